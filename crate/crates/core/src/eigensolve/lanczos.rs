//! Shift-and-invert Lanczos with full reorthogonalization and locking.
//!
//! Everything here works in the Euclidean inner product on raw value vectors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid_ops::dot;

use super::jacobi::sym_eigen;

/// Operator data for one solve. `inverse` applies `(A − σ)^{-1}` on the
/// orthogonal complement of `deflate`, `apply` applies `A` there.
pub(crate) struct Problem<'a> {
    pub n: usize,
    pub sigma: f64,
    pub apply: &'a (dyn Fn(&[f64], &mut [f64]) + Sync),
    pub inverse: &'a (dyn Fn(&[f64], &mut [f64]) -> Result<()> + Sync),
    pub deflate: &'a [Vec<f64>],
    /// Relative accuracy of one `inverse` application.
    pub accuracy: f64,
    /// Optional weights applied to random start vectors.
    pub envelope: Option<&'a [f64]>,
}

pub(crate) struct Solution {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

const SEED: u64 = 0x6477_656c_6c5f_6c7a;
const COMPLETENESS_STEPS: usize = 25;

struct Run {
    basis: Vec<Vec<f64>>,
    theta: Vec<f64>,
    /// Ritz coefficient columns, same order as `theta` (descending).
    coeffs: DMatrix<f64>,
    /// Residual estimate `β_m |s_{m,i}|` per Ritz pair.
    estimates: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(v: &mut [f64], against: &[&[f64]]) {
    for _ in 0..2 {
        for q in against {
            let c = dot(q, v);
            v.iter_mut().zip(q.iter()).for_each(|(x, qi)| *x -= c * qi);
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, p: &Problem) -> Vec<f64> {
    let mut v: Vec<f64> = (0..p.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if let Some(w) = p.envelope {
        v.iter_mut().zip(w).for_each(|(x, wi)| *x *= wi);
    }
    v
}

fn lanczos(p: &Problem, start: &[f64], steps: usize, locked: &[Vec<f64>]) -> Result<Run> {
    let fixed: Vec<&[f64]> = p
        .deflate
        .iter()
        .chain(locked)
        .map(|v| v.as_slice())
        .collect();
    let mut v = start.to_vec();
    orthogonalize(&mut v, &fixed);
    if normalize(&mut v) == 0.0 {
        return Err(Error::InvalidArgument("start vector lies in the locked space".into()));
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; p.n];
    let mut scale = 0.0f64;
    for j in 0..steps {
        (p.inverse)(&v, &mut w)?;
        let a = dot(&w, &v);
        w.iter_mut().zip(&v).for_each(|(x, vi)| *x -= a * vi);
        if j > 0 {
            let b = beta[j - 1];
            w.iter_mut()
                .zip(&basis[j - 1])
                .for_each(|(x, vi)| *x -= b * vi);
        }
        basis.push(std::mem::take(&mut v));
        let mut all: Vec<&[f64]> = fixed.clone();
        all.extend(basis.iter().map(|b| b.as_slice()));
        orthogonalize(&mut w, &all);
        let b = dot(&w, &w).sqrt();
        alpha.push(a);
        scale = scale.max(a.abs());
        beta.push(b);
        if b <= 1e-14 * scale || j + 1 == steps {
            break;
        }
        v = w.iter().map(|x| x / b).collect();
    }
    let m = basis.len();
    let breakdown = beta[m - 1] <= 1e-14 * scale;
    let t = DMatrix::from_fn(m, m, |i, k| {
        if i == k {
            alpha[i]
        } else if i + 1 == k {
            beta[i]
        } else if k + 1 == i {
            beta[k]
        } else {
            0.0
        }
    });
    let (vals, vecs) = sym_eigen(&t);
    let theta: Vec<f64> = vals.iter().rev().copied().collect();
    let coeffs = DMatrix::from_fn(m, m, |r, c| vecs[(r, m - 1 - c)]);
    let last = beta[m - 1];
    let estimates = (0..m)
        .map(|c| if breakdown { 0.0 } else { last * coeffs[(m - 1, c)].abs() })
        .collect();
    Ok(Run {
        basis,
        theta,
        coeffs,
        estimates,
    })
}

fn ritz_vector(run: &Run, col: usize) -> Vec<f64> {
    let n = run.basis[0].len();
    let mut y = vec![0.0; n];
    for (j, b) in run.basis.iter().enumerate() {
        let c = run.coeffs[(j, col)];
        y.iter_mut().zip(b).for_each(|(yi, bi)| *yi += c * bi);
    }
    y
}

/// Converges Ritz pairs from the top of the shifted-inverse spectrum until
/// `locked` holds `target` vectors.
fn fill(
    p: &Problem,
    locked: &mut Vec<Vec<f64>>,
    target: usize,
    start: Vec<f64>,
    rng: &mut ChaCha8Rng,
    steps: usize,
    restarts: &mut usize,
    cap: usize,
) -> Result<()> {
    let avail = p.n - p.deflate.len();
    let conv = (10.0 * p.accuracy).max(1e-14);
    let mut start = start;
    while locked.len() < target {
        if *restarts >= cap {
            return Err(Error::NoConvergence(*restarts));
        }
        *restarts += 1;
        let m = steps.min(avail - locked.len());
        let run = lanczos(p, &start, m, locked)?;
        let need = target - locked.len();
        let top = run.theta[0].abs();
        let mut taken = 0;
        while taken < need.min(run.theta.len()) && run.estimates[taken] <= conv * top {
            let mut y = ritz_vector(&run, taken);
            let fixed: Vec<&[f64]> = p.deflate.iter().chain(locked.iter()).map(|v| v.as_slice()).collect();
            orthogonalize(&mut y, &fixed);
            normalize(&mut y);
            locked.push(y);
            taken += 1;
        }
        let rest = need - taken;
        start = if rest > 0 && taken < run.theta.len() {
            let hi = (taken + rest).min(run.theta.len());
            let mut s = vec![0.0; p.n];
            for c in taken..hi {
                let y = ritz_vector(&run, c);
                s.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
            }
            s
        } else {
            random_vector(rng, p)
        };
    }
    Ok(())
}

/// Rayleigh–Ritz of `A` on the locked vectors, ascending.
fn rayleigh_ritz(p: &Problem, vecs: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = vecs.len();
    let av: Vec<Vec<f64>> = vecs
        .iter()
        .map(|v| {
            let mut out = vec![0.0; p.n];
            (p.apply)(v, &mut out);
            out
        })
        .collect();
    let g = DMatrix::from_fn(k, k, |i, j| dot(&vecs[i], &av[j]));
    let (values, coeffs) = sym_eigen(&g);
    let vectors = (0..k)
        .map(|c| {
            let mut y = vec![0.0; p.n];
            for (j, v) in vecs.iter().enumerate() {
                let s = coeffs[(j, c)];
                y.iter_mut().zip(v).for_each(|(a, b)| *a += s * b);
            }
            normalize(&mut y);
            y
        })
        .collect();
    (values, vectors)
}

/// The `k` algebraically smallest eigenpairs of `A` on the complement of
/// `p.deflate`, each with residual `‖Ay − μy‖ ≤ tol`.
pub(crate) fn lowest(p: &Problem, k: usize, tol: f64) -> Result<Solution> {
    let avail = p.n - p.deflate.len();
    if k == 0 {
        return Ok(Solution {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
        });
    }
    if k > avail {
        return Err(Error::InvalidArgument(format!(
            "asked for {k} eigenpairs of an operator with {avail} free dimensions"
        )));
    }
    let steps = avail.min((2 * k + 20).max(40));
    let cap = 50 * k;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut restarts = 0;
    let mut locked = Vec::with_capacity(k + 1);
    let start = random_vector(&mut rng, p);
    fill(p, &mut locked, k, start, &mut rng, steps, &mut restarts, cap)?;

    // Look for an eigenvalue missed by the runs above, e.g. a degenerate partner.
    while locked.len() < avail {
        let (values, vectors) = rayleigh_ritz(p, &locked);
        locked = vectors;
        let highest = values[values.len() - 1];
        let start = random_vector(&mut rng, p);
        let m = COMPLETENESS_STEPS.min(avail - locked.len());
        let run = lanczos(p, &start, m, &locked)?;
        let candidate = p.sigma + 1.0 / run.theta[0];
        let slack = tol.max(1e-12 * highest.abs());
        if !(run.theta[0] > 0.0 && candidate < highest - slack) {
            break;
        }
        let start = ritz_vector(&run, 0);
        fill(p, &mut locked, k + 1, start, &mut rng, steps, &mut restarts, cap)?;
        let (_, vectors) = rayleigh_ritz(p, &locked);
        locked = vectors;
        locked.truncate(k);
    }

    let (values, vectors) = rayleigh_ritz(p, &locked);
    let mut residuals = Vec::with_capacity(k);
    let mut out = vec![0.0; p.n];
    for (mu, y) in values.iter().zip(&vectors) {
        (p.apply)(y, &mut out);
        let r: f64 = out
            .iter()
            .zip(y)
            .map(|(a, b)| (a - mu * b).powi(2))
            .sum::<f64>()
            .sqrt();
        residuals.push(r);
    }
    if residuals.iter().any(|&r| !(r <= tol)) {
        return Err(Error::NoConvergence(restarts));
    }
    Ok(Solution {
        values,
        vectors,
        residuals,
    })
}
