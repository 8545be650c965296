//! `dwell`: batch driver for double-well tunneling sweeps.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dwell_core::config::RunConfig;
use dwell_core::pipeline::{self, parse_checks, CheckSet};

use output::Report;

#[derive(Parser)]
#[command(name = "dwell", version, about = "Tunneling splittings and hopping coefficients of double wells")]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the single well and write levels.csv and phi_<j>.bin.
    SolveSingle(RunArgs),
    /// Run the double-well sweep and write sweep.csv, hopping.csv and report.json.
    Sweep(SweepArgs),
    /// Summarize an existing report.json.
    Verify {
        /// Path to report.json.
        report: PathBuf,
    },
    /// Print the demo configuration as JSON.
    DemoConfig,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the task plan and exit without solving or writing anything.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated checks to evaluate, or `all`.
    #[arg(long, default_value = "all")]
    checks: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::SolveSingle(args) => cmd_solve_single(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Verify { report } => cmd_verify(&report),
        Command::DemoConfig => serde_json::to_string_pretty(&RunConfig::demo())
            .map(|s| {
                println!("{s}");
                true
            })
            .map_err(Into::into),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &RunArgs) -> Result<(RunConfig, PathBuf)> {
    let cfg = RunConfig::load(&args.config)?;
    let dir = args.output.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, dir))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn print_plan(cfg: &RunConfig, dir: &Path, sweep: Option<&CheckSet>) {
    println!(
        "single well: nu = {}, h = {}, a = {}, lambda^2 = {}, levels {:?}",
        cfg.nu, cfg.h, cfg.potential.a, cfg.potential.lambda_sq, cfg.levels
    );
    if let Some(checks) = sweep {
        for task in pipeline::plan(cfg) {
            let snapped = 2.0 * (task.d_requested / (2.0 * cfg.h)).round() * cfg.h;
            println!(
                "task: d = {} (grid d = {snapped}), levels {:?}",
                task.d_requested, task.levels
            );
        }
        let names: Vec<_> = checks.iter().map(|c| c.name()).collect();
        println!("checks: {}", names.join(", "));
        println!(
            "would write {}/{{{}, {}, {}, {}, plot_j<j>.csv}}",
            dir.display(),
            output::LEVELS_CSV,
            output::HOPPING_CSV,
            output::SWEEP_CSV,
            output::REPORT_JSON
        );
    } else {
        println!(
            "would write {}/{{{}, phi_<j>.bin}}",
            dir.display(),
            output::LEVELS_CSV
        );
    }
}

fn print_levels(single: &pipeline::SingleWell) {
    println!("{:>3} {:>22} {:>10} {:>6}", "j", "e_j", "residual", "parity");
    for (i, p) in single.states.iter().enumerate().filter(|(_, p)| p.bound) {
        println!("{:>3} {:>22.15} {:>10.2e} {:>6}", i + 1, p.energy, p.residual, p.parity);
    }
}

fn cmd_solve_single(args: &RunArgs) -> Result<bool> {
    let (cfg, dir) = load(args)?;
    if args.dry_run {
        print_plan(&cfg, &dir, None);
        return Ok(true);
    }
    if cfg.levels.is_empty() {
        eprintln!("warning: no levels requested; nothing to do");
        return Ok(true);
    }
    let single = pipeline::solve_config(&cfg)?;
    for w in &single.warnings {
        eprintln!("warning: {w}");
    }
    prepare_dir(&dir)?;
    output::write_levels(&dir, &single)?;
    print_levels(&single);
    Ok(true)
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let (cfg, dir) = load(&args.run)?;
    let checks = parse_checks(&args.checks)?;
    if args.run.dry_run {
        print_plan(&cfg, &dir, Some(&checks));
        return Ok(true);
    }
    if cfg.levels.is_empty() || cfg.d_values.is_empty() {
        eprintln!("warning: empty levels or d_values; nothing to do");
        return Ok(true);
    }
    let single = pipeline::solve_config(&cfg)?;
    for w in &single.warnings {
        eprintln!("warning: {w}");
    }
    let records = pipeline::run_sweep(&single, &cfg, &checks);
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: j = {}, d = {}: {}",
            r.j,
            r.d,
            r.error.as_deref().unwrap_or_default()
        );
    }
    let outcomes = pipeline::evaluate(&cfg, &single, &records, &checks);
    let report = Report::new(&cfg, &single, outcomes);
    prepare_dir(&dir)?;
    output::write_levels(&dir, &single)?;
    output::write(&dir, output::HOPPING_CSV, output::hopping_csv(&records).as_bytes())?;
    output::write(&dir, output::SWEEP_CSV, output::sweep_csv(&records).as_bytes())?;
    let mut levels: Vec<usize> = records.iter().map(|r| r.j).collect();
    levels.dedup();
    for j in levels {
        output::write(&dir, &output::plot_file(j), output::plot_csv(&records, j).as_bytes())?;
    }
    output::write(
        &dir,
        output::REPORT_JSON,
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    print_summary(&report);
    Ok(report.all_pass())
}

fn print_summary(report: &Report) -> bool {
    for c in &report.checks {
        println!(
            "{:<4} {:<26} {}",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.reference
        );
        if !c.pass {
            println!("       {}", c.detail);
        }
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    let total = report.checks.len();
    if passed == total {
        println!("ALL CHECKS PASS ({passed}/{total})");
        true
    } else {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        println!("{} CHECK(S) FAILED ({passed}/{total} pass): {}", total - passed, failed.join(", "));
        false
    }
}

fn cmd_verify(path: &Path) -> Result<bool> {
    let report = Report::load(path)?;
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(print_summary(&report))
}
