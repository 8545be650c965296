//! The hopping coefficient `ρ_j` by volume, surface and symmetric-slice
//! formulas, and 1D tail amplitudes.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{EigenPair, Parity};
use crate::error::{Error, Result};
use crate::grid_ops::{slice_and_normal_derivative, Grid, GridFunction};

/// `φ(x) ≈ A₋e^{κx}` left of the well and `A₊e^{−κx}` right of it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub a_plus: f64,
    pub a_minus: f64,
    pub kappa: f64,
    /// Largest relative deviation from the fitted exponential on either window.
    pub fit_residual: f64,
}

impl TailFit {
    /// `−2 A₊ A₋ κ e^{−κd}`.
    pub fn rho_exact(&self, d: f64) -> f64 {
        -2.0 * self.a_plus * self.a_minus * self.kappa * (-self.kappa * d).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingResult {
    pub j: usize,
    pub d: f64,
    pub rho_volume: f64,
    pub rho_surface: f64,
    pub rho_symmetric: Option<f64>,
    pub plane_c: f64,
    pub tail: Option<TailFit>,
}

impl HoppingResult {
    /// Largest pairwise relative deviation among the available formulas.
    pub fn max_relative_deviation(&self) -> f64 {
        let mut vals = vec![self.rho_volume, self.rho_surface];
        vals.extend(self.rho_symmetric);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for (i, x) in vals.iter().enumerate() {
            for y in &vals[i + 1..] {
                worst = worst.max((x - y).abs() / scale);
            }
        }
        worst
    }
}

pub(crate) fn steps_of(grid: &Grid, d: f64) -> Result<i64> {
    grid.lattice_of(d).ok_or(Error::MisalignedTranslation(d))
}

/// Largest `‖x‖` over nodes where `pot` is nonzero.
pub(crate) fn support_radius(pot: &GridFunction) -> f64 {
    let g = pot.grid();
    pot.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| {
            let p = g.point(i);
            (p[0] * p[0] + p[1] * p[1]).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `h^ν Σ f(x) w(x) f(x − d)` for `f`, `w` on the same grid.
pub fn translated_overlap(f: &GridFunction, w: &GridFunction, d: f64) -> Result<f64> {
    if f.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let g = f.grid();
    let steps = steps_of(g, d)?;
    let (l1, _) = g.lattice_range(0);
    let (t0, _) = g.lattice_range(1);
    let n2 = g.slice_len();
    let sum: f64 = w
        .values()
        .iter()
        .enumerate()
        .filter(|(_, wv)| **wv != 0.0)
        .map(|(i, wv)| {
            let (k1, k2) = (i / n2, i % n2);
            let shifted = f.at_lattice(l1 + k1 as i64 - steps, t0 + k2 as i64);
            f.values()[i] * wv * shifted
        })
        .sum();
    Ok(g.cell_volume() * sum)
}

/// `ρ = λ²⟨φ, v R^d φ⟩`; `pot_single` holds `λ²v` on the grid of `phi`.
pub fn rho_volume(phi: &EigenPair, pot_single: &GridFunction, d: f64) -> Result<f64> {
    let a = support_radius(pot_single);
    if !(d > 2.0 * a) {
        return Err(Error::SeparationTooSmall { d, a });
    }
    translated_overlap(&phi.vector, pot_single, d)
}

/// Wronskian of `φ` and `R^dφ` on the plane `x₁ = c`, summed over the plane.
pub fn rho_surface(phi: &EigenPair, a: f64, d: f64, c: f64) -> Result<f64> {
    if c <= a || c >= d - a {
        return Err(Error::PlaneInsideSupport { c, a, d });
    }
    let f = &phi.vector;
    steps_of(f.grid(), d)?;
    let (s1, ds1) = slice_and_normal_derivative(f, c)?;
    // (R^dφ)(c, ·) = φ(c − d, ·)
    let (s2, ds2) = slice_and_normal_derivative(f, c - d)?;
    let w = f.grid().h().powi(f.grid().nu() as i32 - 1);
    let sum: f64 = (0..s1.len()).map(|t| ds1[t] * s2[t] - s1[t] * ds2[t]).sum();
    Ok(w * sum)
}

/// `±∂₁ g(d/2)` with `g(x₁) = ∫|φ(x₁, x⊥)|² dx⊥`, sign from the parity of `φ` about 0.
pub fn rho_symmetric(phi: &EigenPair, d: f64, parity: Parity) -> Result<f64> {
    let sign = parity.sign().ok_or(Error::NoDefiniteParity)?;
    let f = &phi.vector;
    let g = f.grid();
    let c = 0.5 * d;
    let l = g.lattice_of(c).ok_or(Error::MisalignedPlane(c))?;
    let (t0, t1) = g.lattice_range(1);
    let w = g.h().powi(g.nu() as i32 - 1);
    let mass = |l1: i64| -> f64 { w * (t0..=t1).map(|t| f.at_lattice(l1, t).powi(2)).sum::<f64>() };
    Ok(sign * (mass(l + 1) - mass(l - 1)) / (2.0 * g.h()))
}

/// Fits `A₊`, `A₋` with `κ = √(−e)` held fixed on the windows
/// `[x₀ + 2/κ, x₀ + 8/κ]` and its mirror, where `x₀` is `a` or the outermost
/// sign change of `φ` if that lies further out.
pub fn extract_tail_amplitudes_1d(phi: &EigenPair, a: f64) -> Result<TailFit> {
    let f = &phi.vector;
    let g = f.grid();
    if g.nu() != 1 {
        return Err(Error::InvalidDimension(g.nu()));
    }
    if !(phi.energy < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail amplitudes need a bound state, got e = {}",
            phi.energy
        )));
    }
    let kappa = (-phi.energy).sqrt();
    let xs: Vec<f64> = (0..g.len()).map(|i| g.coord(0, i)).collect();
    let vals = f.values();

    let fit_side = |dir: f64| -> Result<(f64, f64)> {
        let reach = a + 8.0 / kappa;
        // outermost sign change on this side within the would-be window
        let mut x0 = a;
        let mut prev: Option<f64> = None;
        for (x, v) in xs.iter().zip(vals) {
            let s = dir * x;
            if s < 0.0 || s > reach {
                continue;
            }
            if let Some(p) = prev {
                if p * v < 0.0 {
                    x0 = x0.max(s);
                }
            }
            if *v != 0.0 {
                prev = Some(*v);
            }
        }
        let (lo, hi) = (x0 + 2.0 / kappa, x0 + 8.0 / kappa);
        let (first, last) = g.extent(0);
        let outside = if dir > 0.0 { hi > last } else { -hi < first };
        if outside {
            return Err(Error::TailTooShort { lo, hi });
        }
        let window: Vec<(f64, f64)> = xs
            .iter()
            .zip(vals)
            .filter(|(x, _)| {
                let s = dir * **x;
                s >= lo && s <= hi
            })
            .map(|(x, v)| (*x, *v))
            .collect();
        if window.len() < 2 {
            return Err(Error::TailTooShort { lo, hi });
        }
        let sign = window[0].1.signum();
        if window.iter().any(|(_, v)| v.signum() != sign || *v == 0.0) {
            return Err(Error::SignChangeInWindow);
        }
        // log|φ| + κ|x| = log|A|
        let mean = window
            .iter()
            .map(|(x, v)| v.abs().ln() + kappa * dir * x)
            .sum::<f64>()
            / window.len() as f64;
        let amp = sign * mean.exp();
        let resid = window
            .iter()
            .map(|(x, v)| (v / (amp * (-kappa * dir * x).exp()) - 1.0).abs())
            .fold(0.0, f64::max);
        Ok((amp, resid))
    };

    let (a_plus, r_plus) = fit_side(1.0)?;
    let (a_minus, r_minus) = fit_side(-1.0)?;
    Ok(TailFit {
        a_plus,
        a_minus,
        kappa,
        fit_residual: r_plus.max(r_minus),
    })
}
