//! `ghostfringe`: evaluate ghost-interference patterns and the polarization
//! gate from a TOML experiment file.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ghostfringe::pattern::{GridPoint, Mode};
use ghostfringe::CorrelationPattern;

use config::{ExperimentConfig, RunMode};
use run::{ConditionReport, Timings};

const CONFIG_HELP: &str = "\
CONFIG FILE (TOML):
  mode = \"exact\"            exact | asymptotic | mc | all   (default exact)
  [setup]  kind = \"basic\"   basic | gate | mz | free        (default basic)
           a, lambda, z                   all kinds, metres
           f, x1, x2, x1p, x2p            basic/gate; x1p, x2p default to x1, x2
           zbar, delta_c, delta_t         mz
  [angles] phi_c, phi_t, theta_c, theta_t radians, gate/mz only (default 0)
  [scan]   axis = \"x_C\"              x_C | x_T | diagonal
           start = -1e-4, stop = 1e-4, step = 5e-6, detector_x = 0
  [mc]     n_realizations = 20000, n_emitters = 256, seed = 1,
           mean_photon_number = 1.0, batches = 10

ENVIRONMENT:
  GHOSTFRINGE_THREADS   worker threads for the parallel build
  RUST_LOG              log filter (e.g. debug)

EXIT STATUS:
  0 success, 1 error or failed verification,
  2 validity warnings under --strict-conditions";

#[derive(Debug, Parser)]
#[command(name = "ghostfringe", version, about, after_help = CONFIG_HELP)]
struct Cli {
    /// Experiment description.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for CSV output; created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Overrides the `mode` key of the config file.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<RunMode>,

    /// Overrides `mc.seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Exit with status 2 when any validity condition is violated.
    #[arg(long, global = true)]
    strict_conditions: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correlation pattern along the configured scan, one CSV per mode.
    Scan,
    /// 4x4 joint-probability table at x_C = x_T = scan.detector_x (gate and mz).
    TruthTable,
    /// Monte-Carlo against the exact pattern; prints PASS or FAIL.
    Verify,
    /// Reports the validity margins of the geometry over the scan.
    Conditions,
}

fn parse_mode(s: &str) -> Result<RunMode, String> {
    s.parse()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    let path = cli.config.as_deref().context("--config PATH is required")?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(mode) = cli.mode {
        config.mode = mode;
    }
    if let Some(seed) = cli.seed {
        config.mc.seed = seed;
    }
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create {}", cli.out.display()))?;
    log::debug!("resolved config: {config:?}");

    let grid = config.scan.points();
    let (report, ok) = match cli.command {
        Command::Scan => (
            run::conditions(&config, &grid, None),
            scan(&config, &grid, &cli.out)?,
        ),
        Command::TruthTable => {
            let point = run::truth_table_point(&config);
            (
                run::conditions(&config, &grid, Some(point)),
                truth_table(&config, &cli.out)?,
            )
        }
        Command::Verify => (
            run::conditions(&config, &grid, None),
            verify(&config, &grid, &cli.out)?,
        ),
        Command::Conditions => {
            let r = run::conditions(&config, &grid, None);
            for line in &r.lines {
                println!("{line}");
            }
            if r.warnings.is_empty() {
                println!("all conditions satisfied");
            }
            (r, true)
        }
    };
    print_warnings(&report);
    Ok(if !ok {
        ExitCode::FAILURE
    } else if cli.strict_conditions && !report.warnings.is_empty() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("GHOSTFRINGE_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).with_context(|| {
        format!("GHOSTFRINGE_THREADS must be a positive integer, got `{value}`")
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("GHOSTFRINGE_THREADS={n} ignored: built without the parallel feature");
    Ok(())
}

fn print_warnings(report: &ConditionReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
}

fn meta(config: &ExperimentConfig, pattern_mode: &str, with_mc: bool) -> Vec<(String, String)> {
    let mut m = config.summary();
    if with_mc {
        m.extend(config.mc_summary());
    }
    m.push(("output".to_string(), pattern_mode.to_string()));
    m
}

fn print_timings(t: &Timings) {
    for (label, d) in &t.0 {
        println!("timing {label}: {:.3} s", d.as_secs_f64());
    }
}

/// Writes each requested pattern and, when more than one was evaluated,
/// their pairwise comparison.
fn scan(config: &ExperimentConfig, grid: &[GridPoint], out: &Path) -> Result<bool> {
    let mut timings = Timings::default();
    let mut patterns: Vec<(&str, CorrelationPattern)> = Vec::new();
    if config.mode.includes_exact() {
        patterns.push((
            "exact",
            timings.time("exact", || run::analytic(config, grid, Mode::Exact)),
        ));
    }
    if config.mode.includes_asymptotic() {
        patterns.push((
            "asymptotic",
            timings.time("asymptotic", || {
                run::analytic(config, grid, Mode::Asymptotic)
            }),
        ));
    }
    if config.mode.includes_mc() {
        let est = timings.time("mc", || run::monte_carlo(config, grid, config.angles))?;
        patterns.push(("mc", est.pattern));
    }
    for (name, p) in &patterns {
        let m = meta(config, name, *name == "mc");
        output::write(
            out,
            &format!("scan_{name}.csv"),
            &output::pattern_csv(&m, p),
        )?;
        println!(
            "{name}: {} points, max {:e}, visibility {:.4}",
            p.len(),
            p.max(),
            p.visibility()
        );
    }
    if patterns.len() > 1 {
        let mut rows = Vec::new();
        for i in 0..patterns.len() {
            for j in i + 1..patterns.len() {
                let (a, b) = (&patterns[i], &patterns[j]);
                rows.push(run::compare((a.0, &a.1), (b.0, &b.1))?);
            }
        }
        let m = meta(config, "comparison", config.mode.includes_mc());
        output::write(out, "comparison.csv", &output::comparison_csv(&m, &rows))?;
    }
    print_timings(&timings);
    Ok(true)
}

fn truth_table(config: &ExperimentConfig, out: &Path) -> Result<bool> {
    let mut timings = Timings::default();
    let mut tables = Vec::new();
    if config.mode.includes_exact() {
        tables.push((
            "exact",
            timings.time("exact", || run::analytic_truth_table(config, Mode::Exact))?,
        ));
    }
    if config.mode.includes_asymptotic() {
        tables.push((
            "asymptotic",
            timings.time("asymptotic", || {
                run::analytic_truth_table(config, Mode::Asymptotic)
            })?,
        ));
    }
    if config.mode.includes_mc() {
        tables.push(("mc", timings.time("mc", || run::mc_truth_table(config))?));
    }
    let p = run::truth_table_point(config);
    for (name, t) in &tables {
        let mut m = meta(config, name, *name == "mc");
        m.push(("truth_table.x_C".to_string(), config::num(p.x_c)));
        m.push(("truth_table.x_T".to_string(), config::num(p.x_t)));
        let csv = output::truth_table_csv(&m, t);
        output::write(out, &format!("truth_table_{name}.csv"), &csv)?;
        println!("{name}:");
        for line in csv.lines().filter(|l| !l.starts_with('#')) {
            println!("  {line}");
        }
    }
    print_timings(&timings);
    Ok(true)
}

fn verify(config: &ExperimentConfig, grid: &[GridPoint], out: &Path) -> Result<bool> {
    let mut timings = Timings::default();
    let exact = timings.time("exact", || run::analytic(config, grid, Mode::Exact));
    let est = timings.time("mc", || run::monte_carlo(config, grid, config.angles))?;
    let row = run::compare(("exact", &exact), ("mc", &est.pattern))?;
    output::write(
        out,
        "scan_exact.csv",
        &output::pattern_csv(&meta(config, "exact", false), &exact),
    )?;
    output::write(
        out,
        "scan_mc.csv",
        &output::pattern_csv(&meta(config, "mc", true), &est.pattern),
    )?;
    let m = meta(config, "comparison", true);
    output::write(
        out,
        "comparison.csv",
        &output::comparison_csv(&m, std::slice::from_ref(&row)),
    )?;
    let pass = run::verify_passes(&row, &exact);
    println!(
        "{} mc vs exact: pearson {:.5} (>= {}), max deviation {:.2} sigma (<= {}), nrmse {:.3e}, {} realizations",
        if pass { "PASS" } else { "FAIL" },
        row.pearson,
        run::VERIFY_PEARSON,
        row.max_sigma_dev.unwrap_or(f64::NAN),
        run::VERIFY_SIGMA,
        row.nrmse,
        est.n_realizations,
    );
    print_timings(&timings);
    Ok(pass)
}
