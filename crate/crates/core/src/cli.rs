//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check fails or a verdict is not
//! satisfied (including solver failures), 2 on usage, config or parameter
//! errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::energy::RadialForm;
use crate::error::{Error, Result};
use crate::grids::make_radial_grid;
use crate::output::{fmt_sig, write_atomic};
use crate::problem::model_potentials;
use crate::solve::{ground_state_sp, mountain_pass_path, nehari_minimize, threshold_check};
use crate::verify::{records_to_csv, run_suite, transform_checks, CheckRecord};

#[derive(Debug, Parser)]
#[command(
    name = "critnls",
    version,
    about = "Ground states and threshold diagnostics for critical Schrödinger equations with power-law potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file with [params], [grid], [solver] and [output] blocks.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default: `out`, or [output] directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed of the initial-guess perturbation (default: 24301).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Number of radial nodes M (default: 4000).
    #[arg(long = "grid-M", global = true, value_name = "INT")]
    grid_m: Option<usize>,
    /// Outer radius of the radial grid (default: 40).
    #[arg(long, global = true, value_name = "REAL")]
    rmax: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sobolev constant S_p of the isotropic problem [anchor: isotropic-sobolev-constant].
    ///
    /// Minimizes the radial Rayleigh quotient (|∇u|² + a u²)/(∫|u|^p)^{2/p};
    /// writes sp_minimizer.csv.
    Sp,
    /// Ground state of the transformed problem [anchor: nehari-level, mountain-pass-level].
    ///
    /// Minimizes the Nehari quotient, rescales onto the ray maximum, and
    /// cross-checks the level with a climbing-image mountain-pass path.
    /// Fails if the two levels differ by 1% or more.
    Solve,
    /// Existence threshold report [anchor: threshold-condition, limit-energy-lower-bound].
    ///
    /// Compares the best transformed quotient against μ^{-2/p} S with
    /// S = (1-b/2)^{(p-2)/p} S_p, including the annulus sweep r = 10, 20, 40.
    /// Fails unless the quotient condition holds and the level is below the
    /// compactness threshold.
    Threshold,
    /// Full audit suite; writes verify_report.csv [anchor: all checks].
    ///
    /// Transformed Laplacian identity, change-of-variables measure, directional
    /// Hardy inequality, norm equivalence, anisotropic quadratic form,
    /// direction independence of the limit quotient, anisotropic scaling law,
    /// limit energy lower bound, ray-maximum level, mountain-pass level,
    /// functional derivative and weak-solution equivalence.
    Verify,
    /// Change-of-variables audits [anchor: transformed-laplacian-identity, change-of-variables-measure].
    ///
    /// Finite-difference Laplacian against the transformed operator at h = 1e-3|x|
    /// with second-order refinement, and the measure identity for three integrands.
    TransformCheck,
}

/// Parses `argv` (including the program name), dispatches and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match load_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match dispatch(&cli.command, &cfg) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ (Error::Param(_) | Error::Config(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &c.out {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = c.seed {
        cfg.solver.seed = seed;
    }
    if let Some(m) = c.grid_m {
        cfg.grid.nodes = m;
    }
    if let Some(r) = c.rmax {
        cfg.grid.r_max = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<bool> {
    match cmd {
        Command::Sp => cmd_sp(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Threshold => cmd_threshold(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::TransformCheck => cmd_transform_check(cfg),
    }
}

fn save(cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
    write_atomic(&cfg.out_dir.join(name), contents)
}

fn radial_grid(cfg: &RunConfig) -> Result<std::sync::Arc<crate::grids::RadialGrid>> {
    let g = &cfg.grid;
    make_radial_grid(cfg.params.dim, g.r_min, g.r_max, g.nodes, g.spacing)
}

fn table(rows: &[(&str, f64)], digits: usize) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{}", fmt_sig(*v, digits));
    }
    out
}

fn cmd_sp(cfg: &RunConfig) -> Result<bool> {
    let grid = radial_grid(cfg)?;
    let rep = ground_state_sp(&cfg.params, &grid, &cfg.solver)?;
    save(cfg, "sp_minimizer.csv", &rep.minimizer.to_csv(cfg.digits))?;
    println!("S_p={}", fmt_sig(rep.value, cfg.digits));
    println!(
        "iterations={} gradient_norm={} stop={:?}",
        rep.iterations,
        fmt_sig(rep.final_gradient_norm, 3),
        rep.stop
    );
    Ok(true)
}

fn cmd_solve(cfg: &RunConfig) -> Result<bool> {
    let params = &cfg.params;
    let pot = model_potentials(params);
    let grid = radial_grid(cfg)?;
    let neh = nehari_minimize(params, &pot, &grid, &cfg.solver)?;
    let crit = neh.critical_point();
    let form = RadialForm::transformed(params, &pot, &grid)?;
    let j_crit = form.energy(&crit.vals);
    let mp = mountain_pass_path(params, &pot, &grid, &cfg.solver)?;
    let ray_gap = (j_crit - neh.level).abs() / neh.level.abs().max(1.0);
    let mp_gap = (mp.level - neh.level).abs() / neh.level.abs();

    let d = cfg.digits;
    save(cfg, "nehari_solution.csv", &crit.to_csv(d))?;
    save(cfg, "mountain_pass_saddle.csv", &mp.saddle.to_csv(d))?;
    let mut path = String::from("node,energy\n");
    for (k, e) in mp.path_energies.iter().enumerate() {
        let _ = writeln!(path, "{k},{}", fmt_sig(*e, d));
    }
    save(cfg, "mountain_pass_path.csv", &path)?;
    save(
        cfg,
        "solve_report.csv",
        &table(
            &[
                ("nehari_quotient", neh.value),
                ("t_star", neh.t_star),
                ("ray_level", neh.level),
                ("energy_at_critical_point", j_crit),
                ("nehari_gradient_norm", neh.final_gradient_norm),
                ("mountain_pass_level", mp.level),
                ("mountain_pass_gradient_norm", mp.final_gradient_norm),
            ],
            d,
        ),
    )?;

    println!("nehari_quotient={}", fmt_sig(neh.value, d));
    println!("ray_level={}", fmt_sig(neh.level, d));
    println!("energy_at_critical_point={}", fmt_sig(j_crit, d));
    println!("mountain_pass_level={}", fmt_sig(mp.level, d));
    println!("relative_gap={}", fmt_sig(mp_gap, 3));
    let ok = ray_gap <= 1e-8 && mp_gap < 1e-2;
    println!("coherent={ok}");
    Ok(ok)
}

fn cmd_threshold(cfg: &RunConfig) -> Result<bool> {
    let params = &cfg.params;
    let pot = model_potentials(params);
    let grid = radial_grid(cfg)?;
    let rep = threshold_check(params, &pot, &grid, &cfg.solver)?;
    let d = cfg.digits;
    let mut rows = vec![
        ("lhs", rep.lhs),
        ("S_p", rep.s_p),
        ("S", rep.s),
        ("rhs", rep.rhs),
        ("ps_threshold", rep.ps_threshold),
        ("mp_level", rep.mp_level),
    ];
    if let Some(v) = rep.nehari_value {
        rows.push(("nehari_quotient", v));
    }
    save(cfg, "threshold_report.csv", &table(&rows, d))?;
    let mut sweep = String::from("r,quotient_a,dirichlet_quotient\n");
    for t in &rep.annulus {
        let _ = writeln!(
            sweep,
            "{},{},{}",
            fmt_sig(t.r, d),
            fmt_sig(t.quotient_a, d),
            fmt_sig(t.dirichlet_quotient, d)
        );
    }
    save(cfg, "annulus_sweep.csv", &sweep)?;

    for (k, v) in &rows {
        println!("{k}={}", fmt_sig(*v, d));
    }
    println!("quotient_condition_holds={}", rep.quotient_condition_holds);
    println!("level_below_threshold={}", rep.level_below_threshold);
    if rep.degraded {
        println!("degraded=true (Nehari solve failed; lhs from annulus trials only)");
    }
    println!(
        "note: lhs is the smallest quotient found over radial trials, an upper bound on the infimum; \
         a true verdict is conclusive, a false one is not"
    );
    Ok(rep.quotient_condition_holds && rep.level_below_threshold)
}

fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let pot = model_potentials(&cfg.params);
    let records = run_suite(&cfg.params, &pot, &cfg.grid, &cfg.solver)?;
    report(cfg, "verify_report.csv", &records)
}

fn cmd_transform_check(cfg: &RunConfig) -> Result<bool> {
    let records = transform_checks(&cfg.params)?;
    report(cfg, "transform_check.csv", &records)
}

fn report(cfg: &RunConfig, file: &str, records: &[CheckRecord]) -> Result<bool> {
    save(cfg, file, &records_to_csv(records, cfg.digits))?;
    let width = records.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in records {
        println!(
            "{} {:width$}  measured={} target={}  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            fmt_sig(r.measured, 6),
            fmt_sig(r.target, 6),
            r.details
        );
    }
    let failed = records.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed", records.len());
    Ok(failed == 0)
}
