//! Runs the demo square-well sweep and prints one line per check.
//!
//! ```text
//! cargo run --release -p dwell-core --example demo_sweep
//! ```

use dwell_core::config::RunConfig;
use dwell_core::pipeline::{all_checks, evaluate, run_sweep, solve_config};

fn main() -> dwell_core::Result<()> {
    let cfg = RunConfig::demo();
    let single = solve_config(&cfg)?;
    for (j, p) in single.states.iter().enumerate() {
        println!("level {}: e = {:.10} ({})", j + 1, p.energy, p.parity);
    }
    let checks = all_checks();
    let records = run_sweep(&single, &cfg, &checks);
    for r in &records {
        if let Some(s) = &r.splitting {
            println!("j={} d={} delta={:.6e} ratio={:.9}", r.j, r.d, s.delta, s.ratio);
        } else if let Some(e) = &r.error {
            println!("j={} d={} error: {e}", r.j, r.d);
        }
    }
    for c in evaluate(&cfg, &single, &records, &checks) {
        println!("{:<28} {}  {}", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail);
    }
    Ok(())
}
