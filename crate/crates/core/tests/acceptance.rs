//! End-to-end acceptance run: one line per criterion, nonzero exit on failure.
//!
//! Reference energies come from the transcendental and Bessel-matching
//! oracles in `common`, never from the solver under test.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dwell_core::config::RunConfig;
use dwell_core::pipeline::{
    all_checks, evaluate, hopping_at, run_sweep, solve_config, solve_single_well, Check, CheckSet,
    SingleWell,
};
use dwell_core::potential::{PotentialSpec, Shape};
use dwell_core::verify::{check_agmon, fit_decay_rate, CheckOutcome, SweepRecord};

const RATE_TOL: f64 = 0.01;
const CONST_TOL: f64 = 0.02;
const AGREEMENT_TOL: f64 = 1e-3;
const SHRINK_MIN: f64 = 3.5;
const PLANE_TOL: f64 = 1e-3;
const RATIO_TOL: f64 = 0.05;
const TAIL_TOL: f64 = 0.02;
const AGMON_TOL_1D: f64 = 0.02;
const AGMON_TOL_2D: f64 = 0.05;
const SIGMA_FRACTION: f64 = 0.9;
const SIGMA_SLACK: f64 = 1e-6;
const AGREEMENT_TOL_2D: f64 = 5e-3;
const RATIO_TOL_2D: f64 = 0.1;

const BUDGET_HOPPING_1D: Duration = Duration::from_secs(60);
const BUDGET_SWEEP_1D: Duration = Duration::from_secs(300);
const BUDGET_AGMON_2D: Duration = Duration::from_secs(600);
const BUDGET_2D: Duration = Duration::from_secs(1800);

struct Line {
    pass: bool,
    text: String,
}

fn line(pass: bool, text: String) -> Line {
    Line { pass, text }
}

fn outcome<'a>(outcomes: &'a [CheckOutcome], name: &str) -> Option<&'a CheckOutcome> {
    outcomes.iter().find(|o| o.name == name)
}

fn level(records: &[SweepRecord], j: usize) -> Vec<&SweepRecord> {
    records.iter().filter(|r| r.j == j).collect()
}

fn at_d(records: &[SweepRecord], j: usize, d: f64) -> Option<&SweepRecord> {
    records.iter().find(|r| r.j == j && (r.d - d).abs() < 1e-9)
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

/// Smallest `dev(h) / dev(h/2)` over the records.
fn min_shrink(records: &[&SweepRecord], half: &SingleWell) -> Result<f64, String> {
    let mut worst = f64::INFINITY;
    for r in records {
        let coarse = r.hopping.as_ref().ok_or("missing hopping")?.max_relative_deviation();
        let fine = hopping_at(half, r.j, r.d)
            .map_err(|e| e.to_string())?
            .max_relative_deviation();
        worst = worst.min(coarse / fine);
    }
    Ok(worst)
}

fn hopping_law(records: &[SweepRecord], kappa: f64, elapsed: Duration) -> Line {
    let samples: Vec<(f64, f64)> = level(records, 1)
        .iter()
        .filter_map(|r| Some((r.d, r.rho()?.abs())))
        .collect();
    let fit = match fit_decay_rate(&samples) {
        Ok(f) => f,
        Err(e) => return line(false, format!("hopping law: {e}")),
    };
    let scaled: Vec<f64> = samples.iter().map(|&(d, r)| r * (kappa * d).exp()).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (max - min) / min;
    let rate_err = rel(fit.rate(), kappa);
    line(
        rate_err <= RATE_TOL && spread <= CONST_TOL && elapsed < BUDGET_HOPPING_1D,
        format!(
            "hopping law: rate {:.6} vs oracle kappa_1 {kappa:.6} (rel {rate_err:.2e} <= {RATE_TOL}); \
             |rho| e^(kappa d) spread {spread:.2e} <= {CONST_TOL}; {:.1?} < {BUDGET_HOPPING_1D:?}",
            fit.rate(),
            elapsed
        ),
    )
}

fn formula_agreement(records: &[SweepRecord], half: &SingleWell, tol: f64, tag: &str) -> Line {
    let refs: Vec<&SweepRecord> = records.iter().collect();
    let worst = refs
        .iter()
        .filter_map(|r| Some(r.hopping.as_ref()?.max_relative_deviation()))
        .fold(0.0, f64::max);
    let complete = refs.iter().all(|r| r.hopping.is_some());
    let half_h = half.grid.h();
    let at_first: Vec<&SweepRecord> = {
        let d0 = refs.iter().map(|r| r.d).fold(f64::INFINITY, f64::min);
        refs.iter().copied().filter(|r| (r.d - d0).abs() < 1e-9 || tag == "1D").collect()
    };
    match min_shrink(&at_first, half) {
        Ok(shrink) => line(
            complete && worst <= tol && shrink >= SHRINK_MIN,
            format!(
                "{tag} formula agreement: worst pairwise deviation {worst:.3e} <= {tol:e}; \
                 shrink at h = {half_h} is {shrink:.3} >= {SHRINK_MIN}"
            ),
        ),
        Err(e) => line(false, format!("{tag} formula agreement: {e}")),
    }
}

fn plane_invariance(records: &[SweepRecord], d: f64, tol: f64, levels: &[usize], tag: &str) -> Line {
    let spreads: Vec<Option<f64>> = levels
        .iter()
        .map(|&j| at_d(records, j, d).and_then(|r| r.plane_spread))
        .collect();
    let worst = spreads.iter().flatten().copied().fold(0.0, f64::max);
    line(
        spreads.iter().all(Option::is_some) && worst <= tol,
        format!("{tag} plane invariance at d = {d}: relative spread {worst:.3e} <= {tol:e}"),
    )
}

fn ratio_limit(outcomes: &[CheckOutcome], levels: &[usize], tag: &str, extra: String, ok: bool) -> Line {
    let mut pass = ok;
    let mut parts = Vec::new();
    for j in levels {
        match outcome(outcomes, &format!("ratio_limit[j={j}]")) {
            Some(o) => {
                pass &= o.pass;
                parts.push(format!("j={j}: {}", o.detail));
            }
            None => {
                pass = false;
                parts.push(format!("j={j}: missing"));
            }
        }
    }
    line(pass, format!("{tag} ratio limit: {}; {extra}", parts.join("; ")))
}

fn tail_formula(records: &[SweepRecord]) -> Line {
    let mut pass = true;
    let mut parts = Vec::new();
    for j in [1, 2] {
        let dev = at_d(records, j, 8.0).and_then(|r| {
            let h = r.hopping.as_ref()?;
            Some(rel(h.tail?.rho_exact(h.d), h.rho_volume))
        });
        match dev {
            Some(x) => {
                pass &= x <= TAIL_TOL;
                parts.push(format!("j={j}: {x:.3e}"));
            }
            None => {
                pass = false;
                parts.push(format!("j={j}: missing"));
            }
        }
    }
    line(
        pass,
        format!("tail formula at d = 8: relative deviation {} <= {TAIL_TOL}", parts.join(", ")),
    )
}

fn lower_bound(records: &[SweepRecord], oracle: &[f64]) -> Line {
    let mut pass = true;
    let mut parts = Vec::new();
    for j in [1, 2] {
        let e = oracle[j - 1];
        let kappa = (-e).sqrt();
        let hi = (kappa * kappa + 0.05 * e.abs()).sqrt();
        let samples: Vec<(f64, f64)> = level(records, j)
            .iter()
            .filter_map(|r| Some((r.d, r.rho()?)))
            .collect();
        match fit_decay_rate(&samples) {
            Ok(fit) => {
                let ok = fit.rate() >= 0.99 * kappa && fit.rate() <= hi;
                pass &= ok;
                parts.push(format!(
                    "j={j}: rate {:.5} in [{:.5}, {hi:.5}]",
                    fit.rate(),
                    0.99 * kappa
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("j={j}: {e}"));
            }
        }
    }
    line(pass, format!("lower bound: {}", parts.join("; ")))
}

fn agmon(single_1d: &SingleWell, kappa_1d: f64, single_2d: &SingleWell, kappa_2d: f64, t2d: Duration) -> Line {
    let fit1 = single_1d
        .level(1)
        .ok_or_else(|| "no 1D ground state".to_string())
        .and_then(|p| check_agmon(p, 1.0).map_err(|e| e.to_string()));
    let fit2 = single_2d
        .level(1)
        .ok_or_else(|| "no 2D ground state".to_string())
        .and_then(|p| check_agmon(p, 1.0).map_err(|e| e.to_string()));
    match (fit1, fit2) {
        (Ok((_, f1)), Ok((_, f2))) => {
            let (e1, e2) = (rel(f1.rate(), kappa_1d), rel(f2.rate(), kappa_2d));
            line(
                e1 <= AGMON_TOL_1D && e2 <= AGMON_TOL_2D && t2d < BUDGET_AGMON_2D,
                format!(
                    "agmon: 1D rate {:.5} vs {kappa_1d:.5} (rel {e1:.2e} <= {AGMON_TOL_1D}); \
                     2D rate {:.5} vs disk oracle {kappa_2d:.5} (rel {e2:.2e} <= {AGMON_TOL_2D}); \
                     2D solve {t2d:.1?} < {BUDGET_AGMON_2D:?}",
                    f1.rate(),
                    f2.rate()
                ),
            )
        }
        (a, b) => line(false, format!("agmon: {:?} {:?}", a.err(), b.err())),
    }
}

fn energy_estimate(records: &[SweepRecord], gamma: f64) -> Line {
    let sig: Vec<Option<f64>> = [6.0, 8.0, 10.0]
        .iter()
        .map(|&d| at_d(records, 1, d).and_then(|r| r.sigma_min))
        .collect();
    let [Some(s6), Some(s8), Some(s10)] = sig[..] else {
        return line(false, format!("energy estimate: missing sigma_min {sig:?}"));
    };
    let pass = s10 >= SIGMA_FRACTION * gamma
        && s6 < s8
        && s8 < s10
        && [s6, s8, s10].iter().all(|&s| s <= gamma + SIGMA_SLACK);
    line(
        pass,
        format!(
            "energy estimate: sigma_min {s6:.6}, {s8:.6}, {s10:.6} at d = 6, 8, 10; \
             gamma_1 = {gamma:.6}, need >= {:.6} at d = 10, increasing, <= gamma_1 + {SIGMA_SLACK:e}",
            SIGMA_FRACTION * gamma
        ),
    )
}

fn named_pass(outcomes: &[CheckOutcome], prefix: &str) -> (bool, Vec<String>) {
    let hits: Vec<&CheckOutcome> = outcomes.iter().filter(|o| o.name.starts_with(prefix)).collect();
    let pass = !hits.is_empty() && hits.iter().all(|o| o.pass);
    (pass, hits.iter().map(|o| format!("{} {}", o.name, o.detail)).collect())
}

fn main() -> ExitCode {
    let mut lines: Vec<Line> = Vec::new();

    let oracle_1d = common::square_well_levels(4.0, 1.0);
    let kappa_1d = (-oracle_1d[0]).sqrt();
    let kappa_2d = (-common::disk_ground_energy(4.0, 1.0)).sqrt();

    // one dimension
    let mut cfg = RunConfig::demo();
    cfg.tolerances.ratio_tol = RATIO_TOL;
    cfg.tolerances.agreement_tol = AGREEMENT_TOL;
    let t = Instant::now();
    let single = solve_config(&cfg).expect("1D single well");
    let checks = all_checks();
    let records = run_sweep(&single, &cfg, &checks);
    let outcomes = evaluate(&cfg, &single, &records, &checks);
    let t1d = t.elapsed();
    let half = solve_single_well(&cfg.potential, 1, 0.5 * cfg.h, &cfg.levels, 10.0 + cfg.h, 1e-10)
        .expect("1D single well at h/2");

    // two dimensions
    let t = Instant::now();
    let mut cfg2 = RunConfig::demo();
    cfg2.potential = PotentialSpec::new(Shape::SquareWell, 1.0, 4.0).expect("disk");
    cfg2.nu = 2;
    cfg2.h = 0.05;
    cfg2.levels = vec![1];
    cfg2.d_values = vec![6.0, 8.0, 10.0];
    cfg2.tolerances.agreement_tol = AGREEMENT_TOL_2D;
    cfg2.tolerances.ratio_tol = RATIO_TOL_2D;
    let single2 = solve_config(&cfg2).expect("2D single well");
    let t_agmon = t.elapsed();
    let checks2: CheckSet = [Check::FormulaAgreement, Check::PlaneInvariance, Check::RatioLimit]
        .into_iter()
        .collect();
    let records2 = run_sweep(&single2, &cfg2, &checks2);
    let outcomes2 = evaluate(&cfg2, &single2, &records2, &checks2);
    let half2 = solve_single_well(&cfg2.potential, 2, 0.5 * cfg2.h, &[1], 6.0 + cfg2.h, 1e-10)
        .expect("2D single well at h/2");
    let t2d = t.elapsed();

    lines.push(hopping_law(&records, kappa_1d, t1d));
    lines.push(formula_agreement(&records, &half, AGREEMENT_TOL, "1D"));
    lines.push(plane_invariance(&records, 8.0, PLANE_TOL, &[1, 2], "1D"));
    lines.push(ratio_limit(
        &outcomes,
        &[1, 2],
        "1D",
        format!("sweep {t1d:.1?} < {BUDGET_SWEEP_1D:?}"),
        t1d < BUDGET_SWEEP_1D,
    ));
    lines.push(tail_formula(&records));
    lines.push(lower_bound(&records, &oracle_1d));
    lines.push(agmon(&single, kappa_1d, &single2, kappa_2d, t_agmon));
    lines.push(energy_estimate(&records, single.gaps[0].gamma));
    let (pass, detail) = named_pass(&outcomes, "corrections[j=1]");
    lines.push(line(pass, format!("corrections: {}", detail.join("; "))));
    let (pp, pd) = named_pass(&outcomes, "parity");
    let (qp, qd) = named_pass(&outcomes, "partition");
    lines.push(line(pp && qp, format!("parity and partition: {}", [pd, qd].concat().join("; "))));
    let agreement = formula_agreement(&records2, &half2, AGREEMENT_TOL_2D, "2D");
    let planes = plane_invariance(&records2, 8.0, AGREEMENT_TOL_2D, &[1], "2D");
    let ratio = ratio_limit(
        &outcomes2,
        &[1],
        "2D",
        format!("total {t2d:.1?} < {BUDGET_2D:?}"),
        t2d < BUDGET_2D,
    );
    lines.push(line(
        agreement.pass && planes.pass && ratio.pass,
        format!("{} | {} | {}", agreement.text, planes.text, ratio.text),
    ));

    let failed = lines.iter().filter(|l| !l.pass).count();
    for (i, l) in lines.iter().enumerate() {
        println!("criterion {:>2} {}  {}", i + 1, if l.pass { "PASS" } else { "FAIL" }, l.text);
    }
    println!("{} of {} criteria pass", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
