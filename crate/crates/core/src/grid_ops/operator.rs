use rayon::prelude::*;

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};

const PAR_THRESHOLD: usize = 1 << 15;

/// Symmetric sparse operator.
///
/// Discretized Hamiltonians are stored as a stencil (`−Δ_h` plus a diagonal
/// potential); anything else is a general CSR matrix hosted on a 1D line grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    grid: Grid,
    repr: Repr,
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Stencil {
        diag: Vec<f64>,
    },
    Csr {
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

impl SparseOperator {
    /// `−Δ_h + diag(pot)` with Dirichlet walls.
    pub(crate) fn stencil(grid: Grid, pot: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), pot.len());
        SparseOperator {
            grid,
            repr: Repr::Stencil { diag: pot },
        }
    }

    /// Builds a general symmetric matrix from `(row, col, value)` triplets;
    /// duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            match rows[i].iter_mut().find(|(c, _)| *c == j) {
                Some(e) => e.1 += v,
                None => rows[i].push((j, v)),
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        let op = SparseOperator {
            grid: Grid::line(n, 1.0),
            repr: Repr::Csr {
                row_ptr,
                cols,
                vals,
            },
        };
        for i in 0..n {
            let mut asym = None;
            op.for_each_in_row(i, |j, v| {
                let mut vt = 0.0;
                op.for_each_in_row(j, |k, w| {
                    if k == i {
                        vt = w;
                    }
                });
                if (v - vt).abs() > 1e-14 * v.abs().max(vt.abs()) {
                    asym = Some((i, j));
                }
            });
            if let Some((i, j)) = asym {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
        Ok(op)
    }

    /// Dense symmetric matrix given row by row.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let triplets: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(j, &v)| (i, j, v))
            })
            .collect();
        Self::from_triplets(n, &triplets)
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The potential of a stencil operator.
    pub fn potential(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Stencil { diag } => Some(diag),
            Repr::Csr { .. } => None,
        }
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            Repr::Stencil { diag } => diag.iter_mut().for_each(|v| *v += c),
            Repr::Csr {
                row_ptr,
                cols,
                vals,
            } => {
                for i in 0..row_ptr.len() - 1 {
                    let r = row_ptr[i]..row_ptr[i + 1];
                    match cols[r.clone()].iter().position(|&j| j == i) {
                        Some(p) => vals[r.start + p] += c,
                        None => {
                            // rebuild with an explicit diagonal
                            let n = self.dim();
                            let mut trip = Vec::new();
                            for i in 0..n {
                                self.for_each_in_row(i, |j, v| trip.push((i, j, v)));
                                trip.push((i, i, c));
                            }
                            return Self::from_triplets(n, &trip)
                                .expect("shift preserves symmetry");
                        }
                    }
                }
            }
        }
        out
    }

    /// Calls `f(col, value)` for every stored entry of row `i`.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.repr {
            Repr::Csr {
                row_ptr,
                cols,
                vals,
            } => {
                for p in row_ptr[i]..row_ptr[i + 1] {
                    f(cols[p], vals[p]);
                }
            }
            Repr::Stencil { diag } => {
                let g = &self.grid;
                let inv_h2 = 1.0 / (g.h() * g.h());
                let n2 = g.slice_len();
                let n1 = g.counts()[0];
                let (k1, k2) = (i / n2, i % n2);
                if k1 > 0 {
                    f(i - n2, -inv_h2);
                }
                if g.nu() == 2 && k2 > 0 {
                    f(i - 1, -inv_h2);
                }
                f(i, 2.0 * g.nu() as f64 * inv_h2 + diag[i]);
                if g.nu() == 2 && k2 + 1 < n2 {
                    f(i + 1, -inv_h2);
                }
                if k1 + 1 < n1 {
                    f(i + n2, -inv_h2);
                }
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let mut d = 0.0;
                self.for_each_in_row(i, |j, v| {
                    if j == i {
                        d = v;
                    }
                });
                d
            })
            .collect()
    }

    /// Largest `|i − j|` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        match &self.repr {
            Repr::Stencil { .. } => {
                if self.grid.nu() == 1 {
                    1
                } else {
                    self.grid.slice_len()
                }
            }
            Repr::Csr { .. } => (0..self.dim())
                .map(|i| {
                    let mut b = 0;
                    self.for_each_in_row(i, |j, _| b = b.max(i.abs_diff(j)));
                    b
                })
                .max()
                .unwrap_or(0),
        }
    }

    /// Gershgorin enclosure `(lo, hi)` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim() {
            let mut d = 0.0;
            let mut r = 0.0;
            self.for_each_in_row(i, |j, v| {
                if j == i {
                    d = v;
                } else {
                    r += v.abs();
                }
            });
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn spectral_radius_estimate(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        match &self.repr {
            Repr::Csr {
                row_ptr,
                cols,
                vals,
            } => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = (row_ptr[i]..row_ptr[i + 1])
                        .map(|p| vals[p] * x[cols[p]])
                        .sum();
                }
            }
            Repr::Stencil { diag } => apply_stencil(&self.grid, diag, x, y),
        }
    }

    pub fn apply_to(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = GridFunction::zeros(self.grid.clone());
        self.apply(f.values(), out.values_mut());
        Ok(out)
    }
}

// The Laplacian is evaluated as a difference of neighbour differences. For
// smooth data both differences are exact in floating point, so the result
// carries a relative error of the second difference itself rather than of
// `4/h²·|x|`.
fn apply_stencil(grid: &Grid, diag: &[f64], x: &[f64], y: &mut [f64]) {
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let n2 = grid.slice_len();
    let n1 = grid.counts()[0];
    let two_d = grid.nu() == 2;
    let row = |k1: usize, out: &mut [f64]| {
        let base = k1 * n2;
        for k2 in 0..n2 {
            let i = base + k2;
            let xi = x[i];
            let west = if k1 > 0 { x[i - n2] } else { 0.0 };
            let east = if k1 + 1 < n1 { x[i + n2] } else { 0.0 };
            let mut lap = (xi - west) - (east - xi);
            if two_d {
                let south = if k2 > 0 { x[i - 1] } else { 0.0 };
                let north = if k2 + 1 < n2 { x[i + 1] } else { 0.0 };
                lap += (xi - south) - (north - xi);
            }
            out[k2] = lap * inv_h2 + diag[i] * xi;
        }
    };
    if two_d && x.len() >= PAR_THRESHOLD {
        y.par_chunks_mut(n2)
            .enumerate()
            .for_each(|(k1, out)| row(k1, out));
    } else {
        y.chunks_mut(n2)
            .enumerate()
            .for_each(|(k1, out)| row(k1, out));
    }
}
