//! Solvers for `(A − σ)x = b` with `A − σ` positive definite.

use std::sync::Arc;

use rustdct::{Dst1, DctPlanner};

use crate::error::{Error, Result};
use crate::grid_ops::{dot, SparseOperator};

/// Largest band storage (in f64 entries) factored directly.
const BAND_BUDGET: usize = 25_000_000;
const PCG_TOL: f64 = 1e-13;
const PCG_MAX_ITER: usize = 2000;

pub(crate) enum ShiftedSolver {
    Band(BandCholesky),
    Pcg(Pcg),
}

impl ShiftedSolver {
    pub fn new(op: &SparseOperator, sigma: f64) -> Result<Self> {
        let n = op.dim();
        let b = op.half_bandwidth();
        if n.saturating_mul(b + 1) <= BAND_BUDGET {
            return Ok(ShiftedSolver::Band(BandCholesky::factor(op, sigma)?));
        }
        Ok(ShiftedSolver::Pcg(Pcg::new(op, sigma)))
    }

    pub fn solve(&self, rhs: &[f64], x: &mut [f64]) -> Result<()> {
        match self {
            ShiftedSolver::Band(c) => {
                c.solve(rhs, x);
                Ok(())
            }
            ShiftedSolver::Pcg(p) => p.solve(rhs, x),
        }
    }

    /// Relative accuracy delivered by one solve.
    pub fn accuracy(&self) -> f64 {
        match self {
            ShiftedSolver::Band(_) => f64::EPSILON,
            ShiftedSolver::Pcg(_) => PCG_TOL,
        }
    }
}

/// Lower-triangular band storage, row `i` holding columns `i−b ..= i`.
struct Band {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl Band {
    fn lower_of(op: &SparseOperator, sigma: f64) -> Self {
        let n = op.dim();
        let b = op.half_bandwidth();
        let mut data = vec![0.0; n * (b + 1)];
        for i in 0..n {
            op.for_each_in_row(i, |j, v| {
                if j <= i && i - j <= b {
                    let v = if i == j { v - sigma } else { v };
                    data[i * (b + 1) + b - (i - j)] += v;
                }
            });
        }
        Band { n, b, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.b + 1) + self.b - (i - j)]
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * (self.b + 1)..(i + 1) * (self.b + 1)]
    }
}

pub(crate) struct BandCholesky {
    l: Band,
}

impl BandCholesky {
    /// Factors only when the band fits the direct-solve budget.
    pub fn try_factor(op: &SparseOperator, sigma: f64) -> Option<Result<Self>> {
        (op.dim().saturating_mul(op.half_bandwidth() + 1) <= BAND_BUDGET)
            .then(|| Self::factor(op, sigma))
    }

    pub fn factor(op: &SparseOperator, sigma: f64) -> Result<Self> {
        let mut l = Band::lower_of(op, sigma);
        let (n, b) = (l.n, l.b);
        let w = b + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..=i {
                // columns shared by rows i and j inside both bands
                let k0 = j0.max(j.saturating_sub(b));
                let ri = &l.data[i * w..(i + 1) * w];
                let rj = &l.data[j * w..(j + 1) * w];
                let s: f64 = (k0..j)
                    .map(|k| ri[b - (i - k)] * rj[b - (j - k)])
                    .sum();
                let aij = ri[b - (i - j)] - s;
                let v = if j < i {
                    aij / rj[b]
                } else if aij > 0.0 {
                    aij.sqrt()
                } else {
                    return Err(Error::InvalidArgument(
                        "shifted operator is not positive definite".into(),
                    ));
                };
                l.data[i * w + b - (i - j)] = v;
            }
        }
        Ok(BandCholesky { l })
    }

    pub fn solve(&self, rhs: &[f64], x: &mut [f64]) {
        let (n, b) = (self.l.n, self.l.b);
        x.copy_from_slice(rhs);
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            let row = self.l.row(i);
            let s: f64 = (j0..i).map(|j| row[b - (i - j)] * x[j]).sum();
            x[i] = (x[i] - s) / row[b];
        }
        for i in (0..n).rev() {
            x[i] /= self.l.at(i, i);
            let xi = x[i];
            let j0 = i.saturating_sub(b);
            let row = self.l.row(i);
            for j in j0..i {
                x[j] -= row[b - (i - j)] * xi;
            }
        }
    }
}

/// Number of eigenvalues of `op` below `mu`, from the inertia of an
/// unpivoted band `LDLᵀ` of `op − mu`. `None` when the band is too large.
pub(crate) fn count_below(op: &SparseOperator, mu: f64) -> Option<usize> {
    let n = op.dim();
    let b = op.half_bandwidth();
    if n.saturating_mul(b + 1) > BAND_BUDGET {
        return None;
    }
    let mut l = Band::lower_of(op, mu);
    let w = b + 1;
    let mut dvals = vec![0.0; n];
    let tiny = f64::EPSILON * op.spectral_radius_estimate().max(1.0);
    let mut negatives = 0;
    for i in 0..n {
        let j0 = i.saturating_sub(b);
        for j in j0..=i {
            let k0 = j0.max(j.saturating_sub(b));
            let s: f64 = (k0..j)
                .map(|k| l.data[i * w + b - (i - k)] * l.data[j * w + b - (j - k)] * dvals[k])
                .sum();
            let aij = l.data[i * w + b - (i - j)] - s;
            if j < i {
                l.data[i * w + b - (i - j)] = aij / dvals[j];
            } else {
                let d = if aij.abs() < tiny { -tiny } else { aij };
                if d < 0.0 {
                    negatives += 1;
                }
                dvals[i] = d;
                l.data[i * w + b] = 1.0;
            }
        }
    }
    Some(negatives)
}

enum Preconditioner {
    /// Exact inverse of `−Δ_h + c` by a sine transform on each axis.
    Sine(SinePreconditioner),
    Jacobi(Vec<f64>),
}

pub(crate) struct Pcg {
    op: SparseOperator,
    pre: Preconditioner,
}

impl Pcg {
    fn new(op: &SparseOperator, sigma: f64) -> Self {
        let shifted = op.shifted(-sigma);
        let pre = match op.potential() {
            Some(pot) if op.grid().nu() == 2 => {
                let min_pot = pot.iter().copied().fold(f64::INFINITY, f64::min);
                let (lo, _) = op.gershgorin();
                // −Δ + c matches H − σ away from the wells, so the two differ
                // only on the well supports
                let c = (-sigma).max(min_pot - sigma).max(0.5 * (lo - sigma));
                let g = op.grid();
                Preconditioner::Sine(SinePreconditioner::new(
                    g.counts()[0],
                    g.counts()[1],
                    g.h(),
                    c,
                ))
            }
            _ => Preconditioner::Jacobi(shifted.diagonal().iter().map(|d| 1.0 / d).collect()),
        };
        Pcg { op: shifted, pre }
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        match &self.pre {
            Preconditioner::Sine(s) => s.apply(r, z),
            Preconditioner::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
        }
    }

    fn solve(&self, rhs: &[f64], x: &mut [f64]) -> Result<()> {
        let n = rhs.len();
        let bnorm = dot(rhs, rhs).sqrt();
        x.iter_mut().for_each(|v| *v = 0.0);
        if bnorm == 0.0 {
            return Ok(());
        }
        let mut r = rhs.to_vec();
        let mut z = vec![0.0; n];
        let mut ap = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut best = f64::INFINITY;
        for _ in 0..PCG_MAX_ITER {
            self.op.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rel = dot(&r, &r).sqrt() / bnorm;
            best = best.min(rel);
            if rel <= PCG_TOL {
                return Ok(());
            }
            self.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if best <= 1e3 * PCG_TOL {
            return Ok(());
        }
        Err(Error::NoConvergence(PCG_MAX_ITER))
    }
}

/// Sine transform along axis 2, then one tridiagonal solve along axis 1 per
/// sine mode.
struct SinePreconditioner {
    n1: usize,
    n2: usize,
    dst: Arc<dyn Dst1<f64>>,
    /// Thomas elimination multipliers, `[i·n2 + k]`.
    mult: Vec<f64>,
    /// Reciprocal pivots, `[i·n2 + k]`.
    inv_pivot: Vec<f64>,
    off: f64,
    norm: f64,
}

impl SinePreconditioner {
    fn new(n1: usize, n2: usize, h: f64, c: f64) -> Self {
        let mut planner = DctPlanner::new();
        let off = -1.0 / (h * h);
        let diag: Vec<f64> = (1..=n2)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / (n2 + 1) as f64;
                2.0 / (h * h) * (1.0 - t.cos()) + 2.0 / (h * h) + c
            })
            .collect();
        let mut mult = vec![0.0; n1 * n2];
        let mut inv_pivot = vec![0.0; n1 * n2];
        let mut pivot = diag.clone();
        for i in 0..n1 {
            for k in 0..n2 {
                if i > 0 {
                    let m = off / pivot[k];
                    mult[i * n2 + k] = m;
                    pivot[k] = diag[k] - m * off;
                }
                inv_pivot[i * n2 + k] = 1.0 / pivot[k];
            }
        }
        SinePreconditioner {
            n1,
            n2,
            dst: planner.plan_dst1(n2),
            mult,
            inv_pivot,
            off,
            norm: 2.0 / (n2 + 1) as f64,
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (n1, n2) = (self.n1, self.n2);
        z.copy_from_slice(r);
        let mut scratch = vec![0.0; self.dst.get_scratch_len()];
        for row in z.chunks_mut(n2) {
            sine_transform(&*self.dst, row, &mut scratch);
        }
        for i in 1..n1 {
            let (prev, cur) = z[(i - 1) * n2..(i + 1) * n2].split_at_mut(n2);
            let m = &self.mult[i * n2..(i + 1) * n2];
            cur.iter_mut().zip(prev.iter()).zip(m).for_each(|((c, p), m)| *c -= m * p);
        }
        let last = (n1 - 1) * n2;
        z[last..]
            .iter_mut()
            .zip(&self.inv_pivot[last..])
            .for_each(|(v, p)| *v *= p);
        for i in (0..n1 - 1).rev() {
            let (cur, next) = z[i * n2..(i + 2) * n2].split_at_mut(n2);
            let p = &self.inv_pivot[i * n2..(i + 1) * n2];
            for k in 0..n2 {
                cur[k] = (cur[k] - self.off * next[k]) * p[k];
            }
        }
        for row in z.chunks_mut(n2) {
            sine_transform(&*self.dst, row, &mut scratch);
            row.iter_mut().for_each(|v| *v *= self.norm);
        }
    }
}

// The FFT-backed DST-I in rustdct reads padding slots of the scratch buffer
// without writing them, so the scratch has to be cleared on every call.
fn sine_transform(dst: &dyn Dst1<f64>, buf: &mut [f64], scratch: &mut [f64]) {
    let s = &mut scratch[..dst.get_scratch_len()];
    s.fill(0.0);
    dst.process_dst1_with_scratch(buf, s);
}
