//! Uniform grids, the finite-difference Hamiltonian and plane slices.

mod grid;
mod operator;

pub use grid::{Grid, GridFunction};
pub(crate) use grid::dot;
pub use operator::SparseOperator;

use crate::error::{Error, Result};

/// A double-well box together with the separation actually used.
#[derive(Clone, Debug, PartialEq)]
pub struct GridLayout {
    pub grid: Grid,
    /// Separation as requested by the caller.
    pub d_requested: f64,
    /// Separation after snapping to an even multiple of `h`.
    pub d: f64,
    pub d_steps: i64,
    /// Distance `L` from each well center to the nearest axis-1 wall.
    pub margin: f64,
}

fn margin_steps(a: f64, kappa_min: f64, h: f64) -> Result<i64> {
    if !(kappa_min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa_min must be positive, got {kappa_min}"
        )));
    }
    if !(a >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "support radius must be non-negative, got {a}"
        )));
    }
    Ok(((a + 12.0 / kappa_min) / h - 1e-9).ceil() as i64)
}

/// Smallest `k ≥ m` with no prime factor above 5. In 2D the transverse sine
/// transforms have length `4m`, and FFTs of smooth lengths are much faster.
fn smooth_at_least(m: i64) -> i64 {
    (m.max(1)..)
        .find(|&k| {
            let mut r = k;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

fn margin_for(nu: usize, a: f64, kappa_min: f64, h: f64) -> Result<i64> {
    let m = margin_steps(a, kappa_min, h)?;
    Ok(if nu == 2 { smooth_at_least(m) } else { m })
}

fn check_nu_h(nu: usize, h: f64) -> Result<()> {
    if nu != 1 && nu != 2 {
        return Err(Error::InvalidDimension(nu));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveSpacing(h));
    }
    Ok(())
}

/// Box `[−L, d+L] × [−L, L]^{ν−1}` with `L ≥ a + 12/kappa_min` and Dirichlet
/// walls at its faces. `d` is snapped to the nearest even multiple of `h` so
/// that `0`, `d/2` and `d` are nodes.
pub fn build_grid(nu: usize, d: f64, a: f64, kappa_min: f64, h: f64) -> Result<GridLayout> {
    check_nu_h(nu, h)?;
    if !(d >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "separation must be non-negative, got {d}"
        )));
    }
    let m = margin_for(nu, a, kappa_min, h)?;
    let d_steps = 2 * (d / (2.0 * h)).round() as i64;
    let mut start = vec![-m + 1];
    let mut counts = vec![(d_steps + 2 * m - 1) as usize];
    if nu == 2 {
        start.push(-m + 1);
        counts.push((2 * m - 1) as usize);
    }
    Ok(GridLayout {
        grid: Grid::new(nu, h, &start, &counts)?,
        d_requested: d,
        d: d_steps as f64 * h,
        d_steps,
        margin: m as f64 * h,
    })
}

/// Box symmetric about the origin that is wide enough to hold the translates
/// `R^{±d}φ` for every `d ≤ reach` on any [`build_grid`] box of the same
/// sizing.
pub fn build_single_well_grid(
    nu: usize,
    reach: f64,
    a: f64,
    kappa_min: f64,
    h: f64,
) -> Result<Grid> {
    check_nu_h(nu, h)?;
    let m = margin_for(nu, a, kappa_min, h)?;
    let r = 2 * (reach.max(0.0) / (2.0 * h)).round() as i64;
    let mut start = vec![-(m + r) + 1];
    let mut counts = vec![(2 * (m + r) - 1) as usize];
    if nu == 2 {
        start.push(-m + 1);
        counts.push((2 * m - 1) as usize);
    }
    Grid::new(nu, h, &start, &counts)
}

/// Second-order `−Δ_h` with Dirichlet walls.
pub fn discrete_laplacian(grid: &Grid) -> SparseOperator {
    SparseOperator::stencil(grid.clone(), vec![0.0; grid.len()])
}

/// `−Δ_h + diag(pot)`.
pub fn assemble_hamiltonian(grid: &Grid, pot: &GridFunction) -> Result<SparseOperator> {
    if pot.grid() != grid {
        return Err(Error::GridMismatch);
    }
    Ok(SparseOperator::stencil(grid.clone(), pot.values().to_vec()))
}

/// Values of `f` on the plane `x₁ = c` and their central difference
/// `(f(c+h,·) − f(c−h,·))/(2h)`, ordered along the transverse axis.
pub fn slice_and_normal_derivative(f: &GridFunction, c: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = f.grid();
    let l = g.lattice_of(c).ok_or(Error::MisalignedPlane(c))?;
    let (first, last) = g.lattice_range(0);
    if l <= first || l >= last {
        return Err(Error::InvalidArgument(format!(
            "plane x1 = {c} needs a node on each side inside the grid"
        )));
    }
    let (t0, t1) = g.lattice_range(1);
    let inv_2h = 0.5 / g.h();
    let slice = (t0..=t1).map(|t| f.at_lattice(l, t)).collect();
    let dslice = (t0..=t1)
        .map(|t| (f.at_lattice(l + 1, t) - f.at_lattice(l - 1, t)) * inv_2h)
        .collect();
    Ok((slice, dslice))
}
