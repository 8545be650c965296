//! Compactly supported single wells, double-well assembly and the reflection `U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_ops::{Grid, GridFunction};

/// Profile of the unit-depth well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Shape {
    /// `v = −1` on the closed ball of radius `a`.
    SquareWell,
    /// `v(r) = −exp(1 − a²/(a² − r²))` for `r < a`.
    SmoothBump,
    /// Linear interpolation of `samples` taken at `r_i = i·a/(n−1)`.
    TabulatedRadial { samples: Vec<f64> },
}

/// A single well `λ²v` supported in the ball of radius `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub shape: Shape,
    pub a: f64,
    pub lambda_sq: f64,
    #[serde(default = "default_true")]
    pub reflection_symmetric: bool,
}

fn default_true() -> bool {
    true
}

impl PotentialSpec {
    pub fn new(shape: Shape, a: f64, lambda_sq: f64) -> Result<Self> {
        let spec = PotentialSpec {
            shape,
            a,
            lambda_sq,
            reflection_symmetric: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "support radius a must be positive, got {}",
                self.a
            )));
        }
        if !(self.lambda_sq > 0.0) || !self.lambda_sq.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda_sq must be positive, got {}",
                self.lambda_sq
            )));
        }
        if let Shape::TabulatedRadial { samples } = &self.shape {
            if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "TabulatedRadial needs at least two finite samples".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `v(x)` (unit depth, without the `λ²` factor).
pub fn eval_single_well(spec: &PotentialSpec, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|c| c * c).sum();
    let a2 = spec.a * spec.a;
    // Closed support: nodes that sit on the boundary up to rounding count as inside.
    if r2 > a2 * (1.0 + 1e-12) {
        return 0.0;
    }
    match &spec.shape {
        Shape::SquareWell => -1.0,
        Shape::SmoothBump => {
            if r2 >= a2 {
                0.0
            } else {
                -(1.0 - a2 / (a2 - r2)).exp()
            }
        }
        Shape::TabulatedRadial { samples } => {
            let t = r2.sqrt() / spec.a * (samples.len() - 1) as f64;
            let i = (t.floor() as usize).min(samples.len() - 2);
            let w = t - i as f64;
            samples[i] * (1.0 - w) + samples[i + 1] * w
        }
    }
}

/// `x − center`, computed in whole lattice steps when `center` is a node so
/// that both copies of a well see bit-identical coordinates.
fn shifted(x: f64, center: f64, h: f64) -> f64 {
    let k = center / h;
    if (k - k.round()).abs() < 1e-9 {
        ((x / h).round() - k.round()) * h
    } else {
        x - center
    }
}

/// Samples of `λ² v(x − center·e₁)` on `grid`.
pub fn sample_single_well(spec: &PotentialSpec, grid: &Grid, center: f64) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| {
        let mut y = [0.0; 2];
        y[..x.len()].copy_from_slice(x);
        y[0] = shifted(y[0], center, grid.h());
        spec.lambda_sq * eval_single_well(spec, &y[..x.len()])
    })
}

/// Two copies of a well separated by `d` along axis 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellConfig {
    pub spec: PotentialSpec,
    pub d: f64,
}

/// Samples of `λ²(v(x) + v(x − d))`.
pub fn assemble_double_well(cfg: &DoubleWellConfig, grid: &Grid) -> Result<GridFunction> {
    let (a, d) = (cfg.spec.a, cfg.d);
    if !(d > 2.0 * a) {
        return Err(Error::SeparationTooSmall { d, a });
    }
    let h = grid.h();
    let (lo, hi) = grid.extent(0);
    let too_close = |first: f64, last: f64, lo_edge: f64, hi_edge: f64| {
        first > lo_edge - h * (1.0 - 1e-9) || last < hi_edge + h * (1.0 - 1e-9)
    };
    let mut small = too_close(lo, hi, -a, d + a);
    if grid.nu() == 2 {
        let (lo2, hi2) = grid.extent(1);
        small |= too_close(lo2, hi2, -a, a);
    }
    if small {
        return Err(Error::BoxTooSmall);
    }
    Ok(GridFunction::from_fn(grid.clone(), |x| {
        let mut y = [0.0; 2];
        y[..x.len()].copy_from_slice(x);
        let left = eval_single_well(&cfg.spec, &y[..x.len()]);
        y[0] = shifted(y[0], d, h);
        let right = eval_single_well(&cfg.spec, &y[..x.len()]);
        cfg.spec.lambda_sq * (left + right)
    }))
}

/// `(Uf)(x₁, x⊥) = f(2c − x₁, x⊥)`, zero where the mirror node is outside the grid.
pub fn reflect(f: &GridFunction, c: f64) -> Result<GridFunction> {
    let g = f.grid();
    let m = g.lattice_of(2.0 * c).ok_or(Error::MisalignedPlane(c))?;
    let n2 = g.slice_len();
    let (first, _) = g.lattice_range(0);
    let t0 = g.lattice_range(1).0;
    let mut out = GridFunction::zeros(g.clone());
    for (k1, row) in out.values_mut().chunks_mut(n2).enumerate() {
        let mirror = m - (first + k1 as i64);
        if let Some(src) = g.index_of(mirror, t0) {
            row.copy_from_slice(&f.values()[src..src + n2]);
        }
    }
    Ok(out)
}
