//! `mosol`: command-line front end for the anisotropic modular-analysis
//! toolkit — balance checking, conjugate tables, parabolic solves, and the
//! verification suites. Thin shell: everything here is a library call plus
//! CSV plumbing.
//!
//! Exit codes: 0 pass, 2 check failed, 3 borderline/capped, 4 nonlinear solve
//! did not converge, 64 bad input or config.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use musielak::balance::{theta_scan, ExponentMode, ThetaScanOpts, Verdict};
use musielak::catalog::{conjugate_table, from_key, radial_profile_table};
use musielak::config::Config;
use musielak::error::Error;
use musielak::solver::{energy_residual, solve, theta_continuation, SolverOpts};
use musielak::verify::run_suite;

#[derive(Parser)]
#[command(name = "mosol", version, about = "anisotropic modular analysis and parabolic solves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan the space-time balance condition of the configured modular function.
    CheckBalance {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for balance.csv (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated decreasing delta ladder, e.g. "0.25,0.125,0.0625".
        #[arg(long)]
        delta_grid: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export radial profile and conjugate tables of the configured modular function.
    NfunTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest profile node.
        #[arg(long, default_value_t = 1e3)]
        s_max: f64,
        /// Number of log-spaced nodes.
        #[arg(long, default_value_t = 2048)]
        nodes: usize,
    },
    /// Solve the configured parabolic problem (theta ladder if configured).
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated decreasing theta ladder overriding the config.
        #[arg(long)]
        theta_ladder: Option<String>,
        #[arg(long)]
        tol_newton: Option<f64>,
    },
    /// Run a verification suite: nfun, modular, balance, mollify, solver, comparison, all.
    Verify {
        suite: String,
        #[arg(long)]
        tol_newton: Option<f64>,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number '{p}'"))))
        .collect()
}

fn out_dir(out: &Option<PathBuf>) -> std::io::Result<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_profile_csv(path: &Path, profile: &musielak::profile::SampledProfile1D) -> Result<(), Error> {
    let mut f = File::create(path)?;
    writeln!(f, "node,value")?;
    for (n, v) in profile.nodes.iter().zip(&profile.values) {
        writeln!(f, "{n:.16e},{v:.16e}")?;
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } => 4,
        _ => 64,
    }
}

fn cmd_check_balance(
    config: &Path,
    out: &Option<PathBuf>,
    delta_grid: &Option<String>,
    seed: Option<u64>,
) -> Result<i32, Error> {
    let cfg = Config::from_path(config)?;
    let grid = cfg.build_grid()?;
    let m = from_key(&cfg.flux.key, grid.dim())?;
    let deltas = match delta_grid {
        Some(s) => parse_list(s)?,
        None => cfg.balance.deltas.clone(),
    };
    let mode = match cfg.balance.growth.as_str() {
        "arbitrary" => ExponentMode::N,
        "power_p" => ExponentMode::NOverP(cfg.balance.p),
        other => return Err(Error::Config(format!("unknown balance growth mode '{other}'"))),
    };
    let opts = ThetaScanOpts { seed: seed.unwrap_or(cfg.balance.seed), ..ThetaScanOpts::default() };
    let report = theta_scan(&m, &grid, &deltas, mode, &opts)?;
    let dir = out_dir(out)?;
    let mut f = File::create(dir.join("balance.csv"))?;
    report.write_csv(&mut f)?;
    for row in &report.rows {
        println!("delta {:.6} s {:.3e} ratio {:.6e}{}", row.delta, row.s_probe, row.ratio,
            if row.capped { " (capped)" } else { "" });
    }
    println!(
        "verdict: {:?} (refinement stable: {})",
        report.verdict, report.refinement_stable
    );
    if let Some(w) = &report.witness {
        println!("witness: delta {:.6} center {:?} ratio {:.4e}", w.delta, w.center, w.ratio);
    }
    Ok(match report.verdict {
        _ if report.any_capped() || !report.refinement_stable => 3,
        Verdict::Pass => 0,
        Verdict::Fail => 2,
    })
}

fn cmd_nfun_table(
    config: &Path,
    out: &Option<PathBuf>,
    s_max: f64,
    nodes: usize,
) -> Result<i32, Error> {
    let cfg = Config::from_path(config)?;
    let grid = cfg.build_grid()?;
    let m = from_key(&cfg.flux.key, grid.dim())?;
    let x = grid.box_center();
    let profile = radial_profile_table(&m, 0.0, &x, s_max, nodes);
    let conj = conjugate_table(&m, 0.0, &x, s_max, nodes)?;
    let dir = out_dir(out)?;
    write_profile_csv(&dir.join("profile.csv"), &profile)?;
    write_profile_csv(&dir.join("conjugate.csv"), &conj)?;
    println!(
        "wrote profile.csv and conjugate.csv ({} nodes, s_max {s_max}{})",
        profile.nodes.len(),
        if conj.truncated { ", conjugate truncated at the boundary slope" } else { "" }
    );
    Ok(0)
}

fn write_ledger_csv(path: &Path, result: &musielak::solver::SolveResult, dt: f64) -> Result<(), Error> {
    let mut f = File::create(path)?;
    writeln!(f, "step,t,half_l2,flux_cum,source_cum,energy_residual")?;
    for (i, row) in result.ledger.iter().enumerate() {
        writeln!(
            f,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            i + 1,
            (i + 1) as f64 * dt,
            row.half_l2,
            row.flux_cum,
            row.source_cum,
            energy_residual(result, i + 1)
        )?;
    }
    Ok(())
}

fn cmd_solve(
    config: &Path,
    out: &Option<PathBuf>,
    theta_ladder: &Option<String>,
    tol_newton: Option<f64>,
) -> Result<i32, Error> {
    let cfg = Config::from_path(config)?;
    let mut opts = cfg.solver_opts();
    if let Some(t) = tol_newton {
        opts.tol_newton = t;
    }
    let ladder = match theta_ladder {
        Some(s) => parse_list(s)?,
        None => cfg.theta_ladder(),
    };
    let dir = out_dir(out)?;
    let grid = cfg.build_grid()?;
    if ladder.len() > 1 {
        let base = cfg.build_flux()?;
        let f = cfg.build_source(&grid)?;
        let u0 = cfg.build_initial(&grid)?;
        let cont = theta_continuation(&grid, &base, &ladder, &f, &u0, &opts)?;
        for (i, run) in cont.runs.iter().enumerate() {
            let mut tf = File::create(dir.join(format!("trajectory_theta{}.csv", i)))?;
            run.u.write_csv(&mut tf)?;
            write_ledger_csv(&dir.join(format!("ledger_theta{}.csv", i)), run, grid.dt())?;
        }
        let mut sf = File::create(dir.join("continuation.csv"))?;
        writeln!(sf, "theta,penalty,cauchy_to_next")?;
        for (i, &theta) in cont.thetas.iter().enumerate() {
            let c = cont.cauchy.get(i).copied().unwrap_or(f64::NAN);
            writeln!(sf, "{theta:.16e},{:.16e},{c:.16e}", cont.penalties[i])?;
        }
        println!("theta ladder {:?}", cont.thetas);
        println!("cauchy table {:?}", cont.cauchy);
        println!("penalties {:?}", cont.penalties);
        if !cont.cauchy_ok {
            println!("warning: theta ladder is NOT Cauchy (non-decreasing distances)");
        }
        Ok(0)
    } else {
        let mut problem = cfg.build_problem()?;
        if let Some(&theta) = ladder.first() {
            problem.flux = musielak::flux::regularize(&cfg.build_flux()?, theta)?;
        }
        let result = solve(&problem, &opts)?;
        let mut tf = File::create(dir.join("trajectory.csv"))?;
        result.u.write_csv(&mut tf)?;
        write_ledger_csv(&dir.join("ledger.csv"), &result, grid.dt())?;
        let final_res = energy_residual(&result, problem.grid.nt);
        println!(
            "solved: sup |u| = {:.6e}, final energy residual = {:.6e}, coercivity {}",
            result.u.sup_norm(),
            final_res,
            if result.coercivity_ok { "ok" } else { "VIOLATED" }
        );
        Ok(0)
    }
}

fn cmd_verify(suite: &str, tol_newton: Option<f64>) -> Result<i32, Error> {
    let mut opts = SolverOpts::default();
    if let Some(t) = tol_newton {
        opts.tol_newton = t;
    }
    let lines = run_suite(suite, &opts)?;
    let mut all_pass = true;
    for (name, pass, detail) in &lines {
        all_pass &= *pass;
        println!("[{}] {name}: {detail}", if *pass { "pass" } else { "FAIL" });
    }
    Ok(if all_pass { 0 } else { 2 })
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::CheckBalance { config, out, delta_grid, seed } => {
            cmd_check_balance(config, out, delta_grid, *seed)
        }
        Cmd::NfunTable { config, out, s_max, nodes } => cmd_nfun_table(config, out, *s_max, *nodes),
        Cmd::Solve { config, out, theta_ladder, tol_newton } => {
            cmd_solve(config, out, theta_ladder, *tol_newton)
        }
        Cmd::Verify { suite, tol_newton } => cmd_verify(suite, *tol_newton),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}
