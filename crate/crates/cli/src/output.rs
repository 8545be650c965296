//! CSV tables and the JSON report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use dwell_core::config::RunConfig;
use dwell_core::pipeline::SingleWell;
use dwell_core::verify::{CheckOutcome, SweepRecord};

pub const LEVELS_CSV: &str = "levels.csv";
pub const HOPPING_CSV: &str = "hopping.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const REPORT_JSON: &str = "report.json";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Commas and newlines would break the row; messages keep their words.
fn text(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

pub fn phi_file(j: usize) -> String {
    format!("phi_{j}.bin")
}

pub fn plot_file(j: usize) -> String {
    format!("plot_j{j}.csv")
}

pub fn levels_csv(single: &SingleWell) -> String {
    let mut out = String::from("j,e_j,residual,parity,kappa,gamma,bound\n");
    for (i, p) in single.states.iter().enumerate() {
        let kappa = if p.bound { Some((-p.energy).sqrt()) } else { None };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            i + 1,
            num(p.energy),
            num(p.residual),
            p.parity,
            opt(kappa),
            num(single.gaps[i].gamma),
            p.bound
        );
    }
    out
}

pub fn hopping_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(
        "j,d_requested,d,rho_volume,rho_surface,rho_symmetric,plane_c,A_plus,A_minus,kappa,fit_residual\n",
    );
    for r in records {
        let Some(h) = &r.hopping else { continue };
        let t = h.tail;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.j,
            num(r.d_requested),
            num(r.d),
            num(h.rho_volume),
            num(h.rho_surface),
            opt(h.rho_symmetric),
            num(h.plane_c),
            opt(t.map(|t| t.a_plus)),
            opt(t.map(|t| t.a_minus)),
            opt(t.map(|t| t.kappa)),
            opt(t.map(|t| t.fit_residual)),
        );
    }
    out
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(
        "j,d_requested,d,E_minus,E_plus,Delta,rho_used,ratio,predicted_split,r1,r2,r3,\
         pairing_score,sigma_min,plane_spread,lower_parity,upper_parity,flags,error\n",
    );
    for r in records {
        let s = r.splitting.as_ref();
        let c = r.corrections;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.j,
            num(r.d_requested),
            num(r.d),
            opt(s.map(|s| s.e_minus)),
            opt(s.map(|s| s.e_plus)),
            opt(s.map(|s| s.delta)),
            opt(r.rho()),
            opt(s.map(|s| s.ratio)),
            opt(r.model.as_ref().map(|m| m.predicted_split)),
            opt(c.map(|c| c.r1)),
            opt(c.map(|c| c.r2)),
            opt(c.map(|c| c.r3)),
            opt(s.map(|s| s.pairing_score)),
            opt(r.sigma_min),
            opt(r.plane_spread),
            s.map(|s| s.lower_parity.to_string()).unwrap_or_default(),
            s.map(|s| s.upper_parity.to_string()).unwrap_or_default(),
            text(&r.flags.join(";")),
            text(r.error.as_deref().unwrap_or("")),
        );
    }
    out
}

/// `d, |ρ|, Δ, ratio, σ_min` for one level, ready for a plotting tool.
pub fn plot_csv(records: &[SweepRecord], j: usize) -> String {
    let mut out = String::from("d,abs_rho,delta,ratio,sigma_min\n");
    for r in records.iter().filter(|r| r.j == j) {
        let s = r.splitting.as_ref();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.d),
            opt(r.rho().map(f64::abs)),
            opt(s.map(|s| s.delta)),
            opt(s.map(|s| s.ratio)),
            opt(r.sigma_min),
        );
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelSummary {
    pub j: usize,
    pub energy: f64,
    pub gamma: f64,
    pub parity: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub levels: Vec<LevelSummary>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn new(cfg: &RunConfig, single: &SingleWell, checks: Vec<CheckOutcome>) -> Self {
        Report {
            schema_version: dwell_core::config::SCHEMA_VERSION,
            config: cfg.clone(),
            levels: single
                .states
                .iter()
                .enumerate()
                .filter(|(_, p)| p.bound)
                .map(|(i, p)| LevelSummary {
                    j: i + 1,
                    energy: p.energy,
                    gamma: single.gaps[i].gamma,
                    parity: p.parity.to_string(),
                })
                .collect(),
            warnings: single.warnings.clone(),
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("cannot read report {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("malformed report {}", path.display()))
    }
}

/// Writes `contents` to `dir/name` and returns the path.
pub fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn write_levels(dir: &Path, single: &SingleWell) -> Result<Vec<PathBuf>> {
    let mut written = vec![write(dir, LEVELS_CSV, levels_csv(single).as_bytes())?];
    for (i, p) in single.states.iter().enumerate().filter(|(_, p)| p.bound) {
        let path = dir.join(phi_file(i + 1));
        p.vector.write_binary(&path)?;
        written.push(path);
    }
    Ok(written)
}
