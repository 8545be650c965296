//! Browser front end. Every entry point takes plain numbers and returns JSON;
//! the same computations are exposed as ordinary functions for native use.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dwell_core::config::RunConfig;
use dwell_core::eigensolve::DEFAULT_REL_TOL;
use dwell_core::error::{Error, Result};
use dwell_core::grid_ops::GridFunction;
use dwell_core::pipeline::{
    double_well as build_double_well, double_well_spectrum, hopping_at, run_sweep, solve_single_well,
    CheckSet, SingleWell,
};
use dwell_core::potential::{PotentialSpec, Shape};
use dwell_core::splitting::levels_from_spectrum;

/// Points kept per plotted curve.
pub const CURVE_POINTS: usize = 600;

#[derive(Clone, Debug, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelView {
    pub j: usize,
    pub energy: f64,
    pub kappa: f64,
    pub parity: String,
    pub state: Curve,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleWellView {
    pub levels: Vec<LevelView>,
    pub potential: Curve,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleWellView {
    pub j: usize,
    /// Separation after snapping to the grid.
    pub d: f64,
    pub rho_volume: f64,
    pub rho_surface: f64,
    pub rho_symmetric: Option<f64>,
    pub e_minus: f64,
    pub e_plus: f64,
    pub delta: f64,
    /// `Δ / (2|ρ_volume|)`.
    pub ratio: f64,
    pub lower: Curve,
    pub upper: Curve,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub d: f64,
    pub abs_rho: Option<f64>,
    pub delta: Option<f64>,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

fn spec(shape: &str, a: f64, lambda_sq: f64) -> Result<PotentialSpec> {
    let shape = match shape {
        "square_well" => Shape::SquareWell,
        "smooth_bump" => Shape::SmoothBump,
        other => return Err(Error::InvalidArgument(format!("unknown shape {other:?}"))),
    };
    PotentialSpec::new(shape, a, lambda_sq)
}

fn curve(f: &GridFunction) -> Curve {
    let g = f.grid();
    let stride = g.len().div_ceil(CURVE_POINTS).max(1);
    let (x, y) = (0..g.len())
        .step_by(stride)
        .map(|i| (g.point(i)[0], f.values()[i]))
        .unzip();
    Curve { x, y }
}

fn single(shape: &str, a: f64, lambda_sq: f64, h: f64, j: usize, reach: f64) -> Result<SingleWell> {
    solve_single_well(&spec(shape, a, lambda_sq)?, 1, h, &[j], reach, DEFAULT_REL_TOL)
}

fn check_separation(a: f64, d: f64) -> Result<()> {
    if d > 2.0 * a {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "wells of radius {a} overlap at d = {d}; need d > {}",
            2.0 * a
        )))
    }
}

/// Bound states of one well on a line.
pub fn single_well(shape: &str, a: f64, lambda_sq: f64, h: f64) -> Result<SingleWellView> {
    let sw = single(shape, a, lambda_sq, h, 1, 0.0)?;
    let count = sw.n_bound;
    let sw = if count > 1 { single(shape, a, lambda_sq, h, count, 0.0)? } else { sw };
    let levels = sw
        .states
        .iter()
        .enumerate()
        .filter(|(_, p)| p.bound)
        .map(|(i, p)| LevelView {
            j: i + 1,
            energy: p.energy,
            kappa: (-p.energy).sqrt(),
            parity: p.parity.to_string(),
            state: curve(&p.vector),
        })
        .collect();
    Ok(SingleWellView {
        levels,
        potential: curve(&sw.potential),
    })
}

/// Hopping coefficients and the computed splitting of level `j` at one separation.
pub fn double_well(shape: &str, a: f64, lambda_sq: f64, h: f64, j: usize, d: f64) -> Result<DoubleWellView> {
    check_separation(a, d)?;
    let sw = single(shape, a, lambda_sq, h, j, d + h)?;
    let phi = sw
        .level(j)
        .ok_or_else(|| Error::InvalidArgument(format!("level {j} is not bound")))?;
    let dw = build_double_well(&sw, 1, h, d)?;
    let d = dw.layout.d;
    let hop = hopping_at(&sw, j, d)?;
    let spectrum = double_well_spectrum(&sw, &dw, &[j], DEFAULT_REL_TOL)?;
    let gamma = sw.gaps[j - 1].gamma;
    let split = levels_from_spectrum(&dw.hamiltonian, &spectrum, phi, j, gamma, d, hop.rho_volume)?;
    let mut pair: Vec<_> = spectrum
        .iter()
        .filter(|p| (p.energy - phi.energy).abs() < 0.5 * gamma)
        .collect();
    pair.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    Ok(DoubleWellView {
        j,
        d,
        rho_volume: hop.rho_volume,
        rho_surface: hop.rho_surface,
        rho_symmetric: hop.rho_symmetric,
        e_minus: split.e_minus,
        e_plus: split.e_plus,
        delta: split.delta,
        ratio: split.ratio,
        lower: curve(&pair[0].vector),
        upper: curve(&pair[1].vector),
    })
}

/// `|ρ|`, `Δ` and their ratio for level `j` at `count` evenly spaced separations.
#[allow(clippy::too_many_arguments)]
pub fn hopping_sweep(
    shape: &str,
    a: f64,
    lambda_sq: f64,
    h: f64,
    j: usize,
    d_min: f64,
    d_max: f64,
    count: usize,
) -> Result<Vec<SweepPoint>> {
    check_separation(a, d_min)?;
    if count < 2 || d_max.is_nan() || d_max <= d_min {
        return Err(Error::InvalidArgument("need count >= 2 and d_max > d_min".into()));
    }
    let step = (d_max - d_min) / (count - 1) as f64;
    let cfg = RunConfig {
        potential: spec(shape, a, lambda_sq)?,
        nu: 1,
        h,
        levels: vec![j],
        d_values: (0..count).map(|i| d_min + i as f64 * step).collect(),
        ..RunConfig::demo()
    };
    let sw = single(shape, a, lambda_sq, h, j, d_max + h)?;
    Ok(run_sweep(&sw, &cfg, &CheckSet::new())
        .into_iter()
        .map(|r| SweepPoint {
            d: r.d,
            abs_rho: r.rho().map(f64::abs),
            delta: r.splitting.as_ref().map(|s| s.delta),
            ratio: r.splitting.as_ref().map(|s| s.ratio),
            error: r.error,
        })
        .collect())
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = singleWell)]
pub fn single_well_js(shape: &str, a: f64, lambda_sq: f64, h: f64) -> std::result::Result<String, JsError> {
    to_js(single_well(shape, a, lambda_sq, h))
}

#[wasm_bindgen(js_name = doubleWell)]
pub fn double_well_js(
    shape: &str,
    a: f64,
    lambda_sq: f64,
    h: f64,
    j: usize,
    d: f64,
) -> std::result::Result<String, JsError> {
    to_js(double_well(shape, a, lambda_sq, h, j, d))
}

#[wasm_bindgen(js_name = hoppingSweep)]
#[allow(clippy::too_many_arguments)]
pub fn hopping_sweep_js(
    shape: &str,
    a: f64,
    lambda_sq: f64,
    h: f64,
    j: usize,
    d_min: f64,
    d_max: f64,
    count: usize,
) -> std::result::Result<String, JsError> {
    to_js(hopping_sweep(shape, a, lambda_sq, h, j, d_min, d_max, count))
}
