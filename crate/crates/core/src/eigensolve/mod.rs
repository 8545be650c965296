//! Lowest eigenpairs, spectral gaps and deflated smallest singular values.

mod jacobi;
mod lanczos;
mod linsolve;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_ops::{dot, GridFunction, SparseOperator};
use crate::potential::reflect;
use lanczos::{lowest, Problem};
use linsolve::{BandCholesky, ShiftedSolver};
pub(crate) use jacobi::sym_eigen;

/// Default residual tolerance relative to the spectral radius estimate.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Parity under the reflection `x₁ ↦ 2c − x₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    /// `+1`, `−1`, or `None` for no definite parity.
    pub fn sign(self) -> Option<f64> {
        match self {
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
            Parity::None => None,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub energy: f64,
    /// Unit vector in the grid norm.
    pub vector: GridFunction,
    /// `‖Hv − ev‖` in the grid norm.
    pub residual: f64,
    pub parity: Parity,
    /// `energy < 0`.
    pub bound: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralGap {
    pub level: usize,
    pub gamma: f64,
    pub degenerate: bool,
}

fn shift_below(op: &SparseOperator) -> f64 {
    let (lo, hi) = op.gershgorin();
    lo - (0.25 * lo.abs()).max(1e-6 * (hi - lo)).max(f64::MIN_POSITIVE)
}

// Start vectors decay away from the potential's bounding box faster than any
// bound state does, so eigenvector tails are assembled from small numbers and
// keep their relative accuracy far from the wells.
fn start_envelope(h: &SparseOperator, sigma: f64) -> Option<Vec<f64>> {
    let pot = h.potential()?;
    if !(sigma < 0.0) {
        return None;
    }
    let g = h.grid();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for (i, v) in pot.iter().enumerate() {
        if *v != 0.0 {
            let p = g.point(i);
            for ax in 0..2 {
                lo[ax] = lo[ax].min(p[ax]);
                hi[ax] = hi[ax].max(p[ax]);
            }
        }
    }
    if !lo[0].is_finite() {
        return None;
    }
    let beta = (-sigma).sqrt();
    Some(
        (0..g.len())
            .map(|i| {
                let p = g.point(i);
                let dist2: f64 = (0..2)
                    .map(|ax| (lo[ax] - p[ax]).max(p[ax] - hi[ax]).max(0.0).powi(2))
                    .sum();
                (-beta * dist2.sqrt()).exp()
            })
            .collect(),
    )
}

fn phase_fix(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `k` smallest eigenpairs of `h`, ascending.
///
/// `tol` is relative to the spectral radius estimate of `h`; every returned
/// pair has `‖Hv − ev‖ ≤ tol·ρ(H)`, checked by a direct product after the
/// solve. Parities are left as [`Parity::None`]; see [`classify_parities`].
pub fn lowest_k(h: &SparseOperator, k: usize, tol: f64) -> Result<Vec<EigenPair>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let sigma = shift_below(h);
    let solver = ShiftedSolver::new(h, sigma)?;
    let apply = |x: &[f64], y: &mut [f64]| h.apply(x, y);
    let inverse = |b: &[f64], x: &mut [f64]| solver.solve(b, x);
    let envelope = start_envelope(h, sigma);
    let problem = Problem {
        n: h.dim(),
        sigma,
        apply: &apply,
        inverse: &inverse,
        deflate: &[],
        accuracy: solver.accuracy(),
        envelope: envelope.as_deref(),
    };
    let abs_tol = tol * h.spectral_radius_estimate().max(f64::MIN_POSITIVE);
    let sol = lowest(&problem, k, abs_tol)?;
    let scale = h.grid().cell_volume().sqrt().recip();
    Ok(sol
        .values
        .into_iter()
        .zip(sol.vectors)
        .zip(sol.residuals)
        .map(|((energy, mut v), residual)| {
            phase_fix(&mut v);
            v.iter_mut().for_each(|x| *x *= scale);
            EigenPair {
                energy,
                vector: GridFunction::new(h.grid().clone(), v).expect("length matches grid"),
                residual,
                parity: Parity::None,
                bound: energy < 0.0,
            }
        })
        .collect())
}

const POLISH_MAX_STEPS: usize = 400;
/// Steps below this size count as rounding noise once they stop shrinking.
const POLISH_STEP_TOL: f64 = 1e-12;

/// Refines well-separated pairs by inverse iteration with a shift below the
/// spectrum, deflating the lower pairs at every step.
///
/// Lanczos vectors meet the residual target but their far tails, where the
/// state is many orders below its peak, only carry absolute accuracy. Inverse
/// iteration with a direct factor restores relative accuracy there. Pairs
/// closer than `split_tol·(1 + |e|)` to a neighbour are left alone, and so is
/// everything when the band factor does not fit in memory. With a reflection
/// `center`, pairs that already have a clear parity about it keep exact
/// parity. Returns whether polishing ran.
pub fn polish_isolated(
    h: &SparseOperator,
    pairs: &mut [EigenPair],
    split_tol: f64,
    center: Option<f64>,
) -> Result<bool> {
    let Some(first) = pairs.first() else { return Ok(false) };
    let spread = pairs.last().map_or(0.0, |p| p.energy) - first.energy;
    let sigma = first.energy - spread.max(0.25 * first.energy.abs()).max(1e-3);
    let chol = match BandCholesky::try_factor(h, sigma) {
        Some(c) => c?,
        None => return Ok(false),
    };
    let grid = first.vector.grid().clone();
    let w = grid.cell_volume();
    let n = grid.len();
    let energies: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
    let isolated = |i: usize| {
        let e = energies[i];
        let near = |o: f64| (o - e).abs() <= split_tol * (1.0 + e.abs());
        !(i > 0 && near(energies[i - 1])) && !energies.get(i + 1).is_some_and(|&o| near(o))
    };
    let mut x = vec![0.0; n];
    let mut hy = vec![0.0; n];
    for i in (0..pairs.len()).filter(|&i| isolated(i)) {
        let (lower, rest) = pairs.split_at_mut(i);
        let p = &mut rest[0];
        let sign = match center {
            Some(c) => parity_defect(&p.vector, c, 1e-6)?.0.sign().map(|s| (c, s)),
            None => None,
        };
        let mut y = p.vector.values().to_vec();
        let mut last_change = f64::INFINITY;
        for _ in 0..POLISH_MAX_STEPS {
            chol.solve(&y, &mut x);
            if let Some((c, s)) = sign {
                let f = GridFunction::new(grid.clone(), x.clone())?;
                let u = reflect(&f, c)?;
                x.iter_mut().zip(u.values()).for_each(|(a, b)| *a = 0.5 * (*a + s * b));
            }
            for q in lower.iter() {
                let c = w * dot(q.vector.values(), &x);
                x.iter_mut().zip(q.vector.values()).for_each(|(a, b)| *a -= c * b);
            }
            let norm = (w * dot(&x, &x)).sqrt();
            let s = if dot(&x, &y) < 0.0 { -norm } else { norm };
            x.iter_mut().for_each(|a| *a /= s);
            let change = (w * x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sqrt();
            std::mem::swap(&mut x, &mut y);
            if change < POLISH_STEP_TOL && change > 0.5 * last_change {
                break;
            }
            last_change = change;
        }
        phase_fix(&mut y);
        h.apply(&y, &mut hy);
        let energy = w * dot(&y, &hy);
        p.residual = (w * hy.iter().zip(&y).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>()).sqrt();
        p.energy = energy;
        p.bound = energy < 0.0;
        p.vector = GridFunction::new(grid.clone(), y)?;
    }
    Ok(true)
}

/// Gap of each level to the rest of the computed spectrum. Bound levels also
/// count the distance `|e_j|` to the continuum edge at 0.
pub fn detect_degeneracy(pairs: &[EigenPair], split_tol: f64) -> Vec<SpectralGap> {
    let energies: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
    gaps_of(&energies, split_tol)
}

pub(crate) fn gaps_of(energies: &[f64], split_tol: f64) -> Vec<SpectralGap> {
    energies
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let nearest = energies
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &f)| (f - e).abs())
                .fold(f64::INFINITY, f64::min);
            let gamma = if e < 0.0 { nearest.min(-e) } else { nearest };
            SpectralGap {
                level: i + 1,
                gamma,
                degenerate: nearest < split_tol,
            }
        })
        .collect()
}

/// Number of eigenvalues of `op` below `mu`, or `None` when the direct
/// factorization would be too large.
pub fn count_below(op: &SparseOperator, mu: f64) -> Option<usize> {
    linsolve::count_below(op, mu)
}

/// Parity label of `f` about `x₁ = center` and the defect
/// `min(‖Uf − f‖, ‖Uf + f‖)`. The label is `None` when the defect exceeds `label_tol`.
pub fn parity_defect(f: &GridFunction, center: f64, label_tol: f64) -> Result<(Parity, f64)> {
    let u = reflect(f, center)?;
    let w = f.grid().cell_volume();
    let diff = |s: f64| -> f64 {
        (w * u
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - s * b).powi(2))
            .sum::<f64>())
        .sqrt()
    };
    let (even, odd) = (diff(1.0), diff(-1.0));
    let (label, defect) = if even <= odd {
        (Parity::Even, even)
    } else {
        (Parity::Odd, odd)
    };
    Ok((if defect <= label_tol { label } else { Parity::None }, defect))
}

/// Assigns parity labels about `x₁ = center`. Levels closer than `split_tol`
/// form clusters whose basis is first rotated to diagonalize `U`.
pub fn classify_parities(
    h: &SparseOperator,
    pairs: &mut [EigenPair],
    center: f64,
    split_tol: f64,
    label_tol: f64,
) -> Result<()> {
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i + 1;
        while j < pairs.len() && pairs[j].energy - pairs[j - 1].energy < split_tol {
            j += 1;
        }
        if j - i > 1 {
            rotate_cluster(h, &mut pairs[i..j], center)?;
        }
        i = j;
    }
    for p in pairs.iter_mut() {
        p.parity = parity_defect(&p.vector, center, label_tol)?.0;
    }
    Ok(())
}

fn rotate_cluster(h: &SparseOperator, cluster: &mut [EigenPair], center: f64) -> Result<()> {
    let m = cluster.len();
    let reflected: Vec<GridFunction> = cluster
        .iter()
        .map(|p| reflect(&p.vector, center))
        .collect::<Result<_>>()?;
    let u = DMatrix::from_fn(m, m, |a, b| {
        cluster[a].vector.inner(&reflected[b]).unwrap_or(0.0)
    });
    let (_, eigvecs) = sym_eigen(&u);
    let grid = cluster[0].vector.grid().clone();
    let n = grid.len();
    let rotated: Vec<Vec<f64>> = (0..m)
        .map(|c| {
            let mut y = vec![0.0; n];
            for (a, p) in cluster.iter().enumerate() {
                let s = eigvecs[(a, c)];
                y.iter_mut().zip(p.vector.values()).for_each(|(t, v)| *t += s * v);
            }
            let norm = (grid.cell_volume() * dot(&y, &y)).sqrt();
            y.iter_mut().for_each(|t| *t /= norm);
            phase_fix(&mut y);
            y
        })
        .collect();
    let mut hy = vec![0.0; n];
    for (p, y) in cluster.iter_mut().zip(rotated) {
        h.apply(&y, &mut hy);
        let w = grid.cell_volume();
        let energy = dot(&y, &hy) * w;
        p.residual = (w * hy.iter().zip(&y).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>()).sqrt();
        p.energy = energy;
        p.vector = GridFunction::new(grid.clone(), y)?;
    }
    cluster.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(())
}

/// Smallest `|μ|` over the spectrum of `Π⊥ A Π⊥` on `span(basis)⊥`.
pub fn min_singular_on_complement(a: &SparseOperator, basis: &[GridFunction]) -> Result<f64> {
    min_singular_on_complement_tol(a, basis, DEFAULT_REL_TOL)
}

/// [`min_singular_on_complement`] with an explicit relative residual tolerance.
pub fn min_singular_on_complement_tol(
    a: &SparseOperator,
    basis: &[GridFunction],
    tol: f64,
) -> Result<f64> {
    if basis.iter().any(|b| b.grid() != a.grid()) {
        return Err(Error::GridMismatch);
    }
    let q = orthonormal_basis(basis)?;
    let n = a.dim();
    let p = q.len();
    let avail = n.checked_sub(p).filter(|&m| m > 0).ok_or_else(|| {
        Error::InvalidArgument("basis spans the whole space".into())
    })?;
    let sigma = shift_below(a);
    let solver = ShiftedSolver::new(a, sigma)?;
    // Bordered solve: x = M⁻¹b − W C⁻¹ Qᵀ M⁻¹b with W = M⁻¹Q, C = QᵀW.
    let w: Vec<Vec<f64>> = q
        .iter()
        .map(|qi| {
            let mut x = vec![0.0; n];
            solver.solve(qi, &mut x).map(|_| x)
        })
        .collect::<Result<_>>()?;
    let c = DMatrix::from_fn(p, p, |i, j| dot(&q[i], &w[j]));
    let c_inv = if p > 0 {
        c.clone().try_inverse().ok_or(Error::DegenerateBasis(f64::INFINITY))?
    } else {
        c
    };
    let project = |y: &mut [f64]| {
        for qi in &q {
            let s = dot(qi, y);
            y.iter_mut().zip(qi).for_each(|(t, v)| *t -= s * v);
        }
    };
    let apply = |x: &[f64], y: &mut [f64]| {
        a.apply(x, y);
        project(y);
    };
    let inverse = |b: &[f64], x: &mut [f64]| -> Result<()> {
        solver.solve(b, x)?;
        let proj: Vec<f64> = q.iter().map(|qi| dot(qi, x)).collect();
        for i in 0..p {
            let yi: f64 = (0..p).map(|j| c_inv[(i, j)] * proj[j]).sum();
            x.iter_mut().zip(&w[i]).for_each(|(t, v)| *t -= yi * v);
        }
        project(x);
        Ok(())
    };
    let envelope = start_envelope(a, sigma);
    let problem = Problem {
        n,
        sigma,
        apply: &apply,
        inverse: &inverse,
        deflate: &q,
        accuracy: solver.accuracy(),
        envelope: envelope.as_deref(),
    };
    let abs_tol = tol * a.spectral_radius_estimate().max(f64::MIN_POSITIVE);
    let mut k = 1;
    loop {
        let sol = lowest(&problem, k, abs_tol)?;
        let last = sol.values[sol.values.len() - 1];
        if last > 0.0 || k == avail {
            return Ok(sol.values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
        }
        k = (2 * k).min(avail);
    }
}

/// Euclidean-orthonormal basis of the span; fails when the Gram matrix is
/// too ill-conditioned.
fn orthonormal_basis(basis: &[GridFunction]) -> Result<Vec<Vec<f64>>> {
    let p = basis.len();
    if p == 0 {
        return Ok(vec![]);
    }
    let g = DMatrix::from_fn(p, p, |i, j| dot(basis[i].values(), basis[j].values()));
    let (ev, _) = sym_eigen(&g);
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= 1e12) {
        return Err(Error::DegenerateBasis(cond));
    }
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    for b in basis {
        let mut v = b.values().to_vec();
        for _ in 0..2 {
            for qi in &q {
                let s = dot(qi, &v);
                v.iter_mut().zip(qi).for_each(|(t, x)| *t -= s * x);
            }
        }
        let nrm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|t| *t /= nrm);
        q.push(v);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_ops::{discrete_laplacian, Grid};

    fn toy() -> SparseOperator {
        // spectrum {-2, -1, 0.5} in a rotated basis
        let s = 0.5f64.sqrt();
        let q = [[s, s, 0.0], [s, -s, 0.0], [0.0, 0.0, 1.0]];
        let d = [-2.0, -1.0, 0.5];
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| (0..3).map(|k| q[i][k] * d[k] * q[j][k]).sum())
                    .collect()
            })
            .collect();
        SparseOperator::from_dense(&rows).unwrap()
    }

    #[test]
    fn toy_spectrum_in_full() {
        let pairs = lowest_k(&toy(), 3, 1e-12).unwrap();
        let e: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
        for (got, want) in e.iter().zip([-2.0, -1.0, 0.5]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
        assert!(pairs[0].bound && pairs[1].bound && !pairs[2].bound);
    }

    #[test]
    fn toy_complement_after_shift() {
        let a = toy().shifted(1.0);
        let pairs = lowest_k(&toy(), 1, 1e-12).unwrap();
        let basis = [pairs[0].vector.clone()];
        let s = min_singular_on_complement(&a, &basis).unwrap();
        assert!(s.abs() < 1e-10, "{s}");
        let s_empty = min_singular_on_complement(&toy(), &[]).unwrap();
        assert!((s_empty - 0.5).abs() < 1e-10, "{s_empty}");
    }

    #[test]
    fn degenerate_basis_rejected() {
        let pairs = lowest_k(&toy(), 1, 1e-12).unwrap();
        let v = pairs[0].vector.clone();
        let err = min_singular_on_complement(&toy(), &[v.clone(), v]).unwrap_err();
        assert!(matches!(err, Error::DegenerateBasis(_)));
    }

    #[test]
    fn degenerate_square_modes_get_split_by_parity() {
        // on a square box the second and third Laplacian modes are degenerate
        let g = Grid::new(2, 0.1, &[-9, -9], &[19, 19]).unwrap();
        let op = discrete_laplacian(&g);
        let mut pairs = lowest_k(&op, 3, 1e-10).unwrap();
        assert!((pairs[1].energy - pairs[2].energy).abs() < 1e-8);
        classify_parities(&op, &mut pairs, 0.0, 1e-6, 1e-8).unwrap();
        let labels: Vec<Parity> = pairs.iter().map(|p| p.parity).collect();
        assert_eq!(labels[0], Parity::Even);
        assert!(labels[1..].contains(&Parity::Even) && labels[1..].contains(&Parity::Odd));
    }
}
