//! JSON run configuration with position-aware validation errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Eigensolver residual tolerance relative to the spectral radius.
    #[serde(default = "defaults::eig_tol")]
    pub eig_tol: f64,
    /// Allowed `|Δ/(2|ρ|) − 1|` at the largest separation.
    #[serde(default = "defaults::ratio_tol")]
    pub ratio_tol: f64,
    /// Relative tolerance on fitted decay rates.
    #[serde(default = "defaults::rate_tol")]
    pub rate_tol: f64,
    /// Slack in the lower-bound rate `√(κ² + ε)`; `0.05·|e_j|` when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Allowed pairwise relative deviation among the three hopping formulas
    /// and across surface planes.
    #[serde(default = "defaults::agreement_tol")]
    pub agreement_tol: f64,
}

mod defaults {
    pub fn eig_tol() -> f64 {
        1e-10
    }
    pub fn ratio_tol() -> f64 {
        0.05
    }
    pub fn rate_tol() -> f64 {
        0.01
    }
    pub fn agreement_tol() -> f64 {
        1e-3
    }
    pub fn output_dir() -> std::path::PathBuf {
        "out".into()
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig_tol: defaults::eig_tol(),
            ratio_tol: defaults::ratio_tol(),
            rate_tol: defaults::rate_tol(),
            epsilon: None,
            agreement_tol: defaults::agreement_tol(),
        }
    }
}

impl Tolerances {
    pub fn epsilon_for(&self, e_j: f64) -> f64 {
        self.epsilon.unwrap_or(0.05 * e_j.abs())
    }

    /// Monotonicity checks ignore changes below this.
    pub fn noise_floor(&self) -> f64 {
        10.0 * self.eig_tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub potential: PotentialSpec,
    pub nu: usize,
    pub h: f64,
    pub levels: Vec<usize>,
    pub d_values: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Square well `a = 1`, `λ² = 4` on a line, levels 1 and 2, `d = 6..10`.
    pub fn demo() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            potential: PotentialSpec::new(crate::potential::Shape::SquareWell, 1.0, 4.0)
                .expect("valid demo potential"),
            nu: 1,
            h: 0.005,
            levels: vec![1, 2],
            d_values: vec![6.0, 7.0, 8.0, 9.0, 10.0],
            tolerances: Tolerances::default(),
            output_dir: defaults::output_dir(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses and validates. Errors carry the line and column of the offending key.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| {
            let (line, column) = locate_key(text, key).unwrap_or((1, 1));
            Error::Config {
                path: path.to_path_buf(),
                line,
                column,
                message,
            }
        })?;
        Ok(cfg)
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err((
                "schema_version",
                format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        self.potential
            .validate()
            .map_err(|e| ("potential", e.to_string()))?;
        if self.nu != 1 && self.nu != 2 {
            return Err(("nu", format!("nu must be 1 or 2, got {}", self.nu)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(("h", format!("h must be positive, got {}", self.h)));
        }
        if let Some(j) = self.levels.iter().find(|&&j| j == 0) {
            return Err(("levels", format!("levels are numbered from 1, got {j}")));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(("levels", "levels must be strictly increasing".into()));
        }
        if self.d_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(("d_values", "d_values must be strictly increasing".into()));
        }
        let a = self.potential.a;
        if let Some(d) = self.d_values.iter().find(|&&d| !(d > 2.0 * a)) {
            return Err((
                "d_values",
                format!("every d must exceed 2a = {}, got {d}", 2.0 * a),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("eig_tol", t.eig_tol),
            ("ratio_tol", t.ratio_tol),
            ("rate_tol", t.rate_tol),
            ("agreement_tol", t.agreement_tol),
        ] {
            if !(v > 0.0) {
                return Err((name, format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(eps) = t.epsilon.filter(|e| !(*e >= 0.0)) {
            return Err(("epsilon", format!("epsilon must be non-negative, got {eps}")));
        }
        Ok(())
    }
}

/// 1-based line and column of the first `"key"` in `text`.
fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let needle = format!("\"{key}\"");
    text.lines()
        .enumerate()
        .find_map(|(i, line)| line.find(&needle).map(|c| (i + 1, c + 1)))
}
