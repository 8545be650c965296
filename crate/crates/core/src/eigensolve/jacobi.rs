//! Cyclic Jacobi for the small dense symmetric matrices met in projections.
//!
//! nalgebra 0.33's `SymmetricEigen` builds the rotation for a trailing 2×2
//! block from `λ − d`, which cancels when the off-diagonal entry is tiny and
//! can tilt the eigenvectors by orders of magnitude more than the entry
//! itself. Jacobi rotations keep eigenvectors accurate to working precision.

use nalgebra::DMatrix;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues ascending, with the matching unit eigenvectors as columns.
pub(crate) fn sym_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix expected");
    let mut a = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                if apq == 0.0 {
                    continue;
                }
                // negligible against both diagonal entries
                if app + 1e3 * apq == app && aqq + 1e3 * apq == aqq {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = (t * t + 1.0).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * kp - s * kq;
                    a[(k, q)] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * pk - s * qk;
                    a[(q, k)] = s * pk + c * qk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (kp, kq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * kp - s * kq;
                    v[(k, q)] = s * kp + c * kq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_coupling_gives_a_tiny_rotation() {
        let b = 1.4e-13;
        let m = DMatrix::from_row_slice(2, 2, &[-5.033931898947129, b, b, -0.17147667690479457]);
        let (vals, vecs) = sym_eigen(&m);
        let tilt = vecs[(1, 0)].abs().min(vecs[(0, 0)].abs());
        assert!(tilt < 1e-13, "{vecs}");
        assert!(vals[0] < vals[1]);
    }

    #[test]
    fn reconstructs_random_symmetric_matrix() {
        let n = 12;
        let m = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + ((i + j) as f64).sin());
        let m = (&m + m.transpose()) * 0.5;
        let (vals, vecs) = sym_eigen(&m);
        let back = &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals.clone())) * vecs.transpose();
        assert!((back - &m).amax() < 1e-12 * m.amax());
        assert!((vecs.transpose() * &vecs - DMatrix::identity(n, n)).amax() < 1e-13);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
