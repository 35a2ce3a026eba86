//! Command-line front end. Every command returns a [`Result`]; `main` maps
//! errors to exit codes 2 (input), 3 (hypothesis) and 4 (numerics).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{FormName, GridSection, RunConfig, TermSection};
use crate::constants::{
    contraction_probes, estimate_contraction_constant, eval_constants, ConstantsReport,
    EmpiricalContraction,
};
use crate::dynamics::{solve_block, NonlinearityForm, NonlinearitySpec, SolveMode};
use crate::error::{Result, RgError};
use crate::oracles::{cole_hopf_solve, fd_brute_solve, linear_heat_solve, sup_difference, OracleConfig, OracleKind};
use crate::profiles::f1_star;
use crate::rg::{estimate_exponents, log_slope, run_rg, RunOutput};
use crate::spectral::{bq_norm, write_field_csv, write_spectrum_csv, SpectralField};

/// L values at which the contraction probes are measured.
pub const PROBE_LS: [f64; 3] = [2.0, 4.0, 8.0];
pub const PROBE_TRAIN: usize = 24;
pub const PROBE_HELD_OUT: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "burgers-rg", version, about = "Renormalization-group runs for zero-mass Burgers-type equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the RG map and write run records, the final profile and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print and write every constant for (L, q, delta).
    Constants {
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed of the randomized contraction probes.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Compare the block solver with the reference solvers.
    Oracle {
        #[arg(long, value_enum)]
        case: OracleCase,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run on the odd extension of half-line data with u(0, t) = 0.
    Halfline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several configs, one worker thread each.
    Sweep {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleCase {
    Linear,
    Burgers,
    H2,
}

/// Contents of `summary.toml`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub f0_norm: f64,
    pub a_limit: f64,
    pub final_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Least-squares slope of `ln e_n` over `n ≥ 1`.
    pub rate_slope: f64,
    /// `-(1-δ) ln L`.
    pub target_slope: f64,
    pub rate_bound_violations: usize,
    /// Largest `|u(0, L^{2n})|`; reported for half-line runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_drift: Option<f64>,
}

impl RunSummary {
    fn new(cfg: &RunConfig, out: &RunOutput, constants: &ConstantsReport) -> Self {
        let e_n: Vec<f64> = out.history.iter().map(|r| r.e_n).collect();
        let exps = estimate_exponents(&out.scaled_snapshots(cfg.rg.l)).ok();
        RunSummary {
            iterations: out.steps.len(),
            f0_norm: out.history[0].f_norm,
            a_limit: out.a_limit,
            final_residual: out.final_residual,
            alpha: exps.map(|e| e.alpha),
            beta: exps.map(|e| e.beta),
            rate_slope: log_slope(&e_n, 1),
            target_slope: -(1.0 - cfg.rg.delta) * cfg.rg.l.ln(),
            rate_bound_violations: e_n
                .iter()
                .enumerate()
                .filter(|(n, e)| **e > constants.rate_bound(*n))
                .count(),
            origin_drift: None,
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }
}

fn out_dir(flag: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.clone().unwrap_or_else(|| cfg.output.directory.clone())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_run_records(out: &RunOutput, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "t", "A_n", "g_norm", "f_norm", "lambda_n", "mass", "parity_defect", "e_n"])?;
    for r in &out.history {
        w.write_record([
            r.n.to_string(),
            r.t.to_string(),
            r.a_n.to_string(),
            r.g_norm.to_string(),
            r.f_norm.to_string(),
            r.lambda_n.to_string(),
            r.mass.to_string(),
            r.parity_defect.to_string(),
            r.e_n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x, scaled_u, A_limit_times_f1star, residual` for the last field.
pub fn write_profile_final(out: &RunOutput, path: &Path) -> Result<()> {
    let last = out.fields.last().expect("a run has at least f_0");
    let star = f1_star(*last.grid())?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "scaled_u", "A_limit_times_f1star", "residual"])?;
    for (j, x) in last.grid().xs().into_iter().enumerate() {
        let u = last.samples()[j];
        let target = out.a_limit * star.samples()[j];
        w.write_record([x.to_string(), u.to_string(), target.to_string(), (u - target).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_fields(out: &RunOutput, every: usize, dir: &Path) -> Result<()> {
    if every == 0 {
        return Ok(());
    }
    for (n, f) in out.fields.iter().enumerate().filter(|(n, _)| n % every == 0) {
        write_field_csv(f, &dir.join(format!("field_{n:03}.csv")))?;
        write_spectrum_csv(f, &dir.join(format!("spectrum_{n:03}.csv")))?;
    }
    Ok(())
}

/// Run one config into `dir`; returns the summary.
pub fn execute_run(cfg: &RunConfig, dir: &Path, halfline: bool) -> Result<RunSummary> {
    let mut resolved_cfg = cfg.resolved();
    let mut run = resolved_cfg.build()?;
    if resolved_cfg.rg.stop_g_tol.is_none() {
        // make the data-dependent default explicit in the resolved file
        let stop = 1e-10 * bq_norm(&run.initial, &run.rg.bq)?;
        resolved_cfg.rg.stop_g_tol = Some(stop);
        run.rg.stop_g_tol = Some(stop);
    }
    if halfline && cfg.initial_data.halfline_file.is_none() {
        return Err(RgError::Config("halfline needs initial_data.halfline_file".into()));
    }
    create_dir(dir)?;
    fs::write(dir.join("resolved_config.toml"), resolved_cfg.to_toml_string()?)?;
    let out = run_rg(&run.initial, &run.rg)?;
    let constants = eval_constants(
        run.rg.l,
        run.rg.bq.q,
        run.rg.delta,
        &run.rg.nonlinearity,
        out.history[0].f_norm,
        run.rg.working_threshold,
        None,
    )?;
    let mut summary = RunSummary::new(cfg, &out, &constants);
    if halfline {
        let origin = run.grid.num_points() / 2;
        let drift = out
            .scaled_snapshots(run.rg.l)
            .iter()
            .map(|s| (s.u_scale * s.field.samples()[origin]).abs())
            .fold(0.0_f64, f64::max);
        summary.origin_drift = Some(drift);
    }
    write_run_records(&out, &dir.join("run_records.csv"))?;
    write_profile_final(&out, &dir.join("profile_final.csv"))?;
    write_fields(&out, cfg.output.dump_every, dir)?;
    fs::write(dir.join("summary.toml"), summary.to_text())?;
    Ok(summary)
}

fn cmd_run(config: &Path, out: &Option<PathBuf>, halfline: bool) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    // validate before anything is written
    cfg.rg_config()?;
    let dir = out_dir(out, &cfg);
    let summary = execute_run(&cfg, &dir, halfline)?;
    print!("{}", summary.to_text());
    Ok(())
}

fn cmd_constants(
    l: Option<f64>,
    q: Option<f64>,
    delta: Option<f64>,
    config: &Option<PathBuf>,
    out: &Option<PathBuf>,
    seed: u64,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(l) = l {
        cfg.rg.l = l;
        cfg.solver.num_steps = None;
    }
    if let Some(q) = q {
        cfg.bq.q = q;
    }
    if let Some(d) = delta {
        cfg.rg.delta = d;
    }
    let rg = cfg.rg_config()?;
    let grid = cfg.grid_spec()?;
    let f0 = cfg.initial_data(grid, &rg.bq)?;
    let f0_norm = bq_norm(&f0, &rg.bq)?;
    let probes = contraction_probes(grid, seed, PROBE_TRAIN + PROBE_HELD_OUT)?;
    let mut ls = PROBE_LS.to_vec();
    if !ls.contains(&rg.l) {
        ls.push(rg.l);
    }
    let est = estimate_contraction_constant(&ls, &rg.bq, &probes[..PROBE_TRAIN], &probes[PROBE_TRAIN..])?;
    let report = eval_constants(
        rg.l,
        rg.bq.q,
        rg.delta,
        &rg.nonlinearity,
        f0_norm,
        rg.working_threshold,
        Some(EmpiricalContraction {
            c_emp: est.c_emp,
            l0_emp: est.l0_emp,
        }),
    )?;
    print!("{}", report.to_table());
    if let Some(dir) = out {
        create_dir(dir)?;
        report.write_csv(&dir.join("constants.csv"))?;
        let mut w = csv::Writer::from_path(dir.join("contraction_probes.csv"))?;
        w.write_record(["set", "probe", "L", "ratio"])?;
        for (set, rows) in [("train", &est.train), ("held_out", &est.held_out)] {
            for r in rows.iter() {
                w.write_record([set.to_string(), r.probe.to_string(), r.l.to_string(), r.ratio.to_string()])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// One line of the oracle comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub pair: String,
    pub max_diff: f64,
    /// `None` for informational rows.
    pub tolerance: Option<f64>,
}

impl OracleRow {
    pub fn passed(&self) -> bool {
        !matches!(self.tolerance, Some(t) if self.max_diff > t)
    }
}

fn oracle_config(case: OracleCase, config: &Option<PathBuf>) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => {
            let mut c = RunConfig {
                grid: GridSection {
                    half_width: 20.0,
                    num_points: 512,
                },
                ..RunConfig::default()
            };
            // large enough for the nonlinearity to matter at t = L²
            c.initial_data.normalize_to = Some(0.5);
            c
        }
    };
    match case {
        OracleCase::Linear => cfg.nonlinearity.form = FormName::Linear,
        OracleCase::Burgers => {
            if cfg.nonlinearity.form != FormName::Burgers {
                cfg.nonlinearity.form = FormName::Burgers;
                cfg.nonlinearity.lambda = 0.5;
            }
        }
        OracleCase::H2 => {
            if cfg.nonlinearity.form != FormName::H2Odd {
                cfg.nonlinearity.form = FormName::H2Odd;
                cfg.nonlinearity.lambda = 1.0;
                cfg.nonlinearity.terms = vec![TermSection { m: 1, n: 1, c: 1.0 }];
                cfg.nonlinearity.a = 1;
                cfg.nonlinearity.b = 1;
                cfg.nonlinearity.r_u = 1.0;
                cfg.nonlinearity.r_v = 1.0;
            }
        }
    }
    Ok(cfg)
}

/// Solver-vs-oracle comparison at `t = L²` for one case.
pub fn oracle_rows(case: OracleCase, cfg: &RunConfig) -> Result<Vec<OracleRow>> {
    let run = cfg.build()?;
    let f = &run.initial;
    let spec = &run.rg.nonlinearity;
    let t = run.rg.l * run.rg.l;
    let block = solve_block(f, spec, &run.rg.solver)?;
    let u = block.final_field();
    let heat = linear_heat_solve(f, t)?;
    let mut rows = Vec::new();
    let row = |pair: &str, a: &SpectralField, b: &SpectralField, tol: Option<f64>| -> Result<OracleRow> {
        Ok(OracleRow {
            pair: pair.into(),
            max_diff: sup_difference(a, b)?,
            tolerance: tol,
        })
    };
    match case {
        OracleCase::Linear => rows.push(row("solve_block vs linear_heat", u, &heat, Some(1e-12))?),
        OracleCase::Burgers => {
            rows.push(row("nonlinear effect (solve_block vs linear_heat)", u, &heat, None)?);
            let lambda = spec.lambda() * spec.terms()[0].c;
            let ch = cole_hopf_solve(f, lambda, t)?;
            rows.push(row("solve_block vs cole_hopf", u, &ch, Some(1e-5))?);
            let mut other = run.rg.solver;
            other.mode = match other.mode {
                SolveMode::EtdMarch => SolveMode::PicardDuhamel,
                SolveMode::PicardDuhamel => SolveMode::EtdMarch,
            };
            let alt = solve_block(f, spec, &other)?;
            rows.push(row("etd vs picard", u, alt.final_field(), Some(1e-8))?);
        }
        OracleCase::H2 => {
            rows.push(row("nonlinear effect (solve_block vs linear_heat)", u, &heat, None)?);
            let fd = fd_brute_solve(f, spec, t, &OracleConfig::new(OracleKind::FdBrute))?;
            rows.push(row("solve_block vs fd_brute", u, &fd, Some(1e-4))?);
            // the linear discretization error of the FD march cancels here
            let fd_lin = fd_brute_solve(f, &NonlinearitySpec::linear(), t, &OracleConfig::new(OracleKind::FdBrute))?;
            let effect = u.sub(&heat)?;
            rows.push(row(
                "nonlinear increment: solve_block vs fd_brute",
                &effect,
                &fd.sub(&fd_lin)?,
                Some(1e-2 * effect.max_abs().max(1e-300)),
            )?);
            rows.push(OracleRow {
                pair: "fd_brute parity defect".into(),
                max_diff: fd.parity_defect(),
                tolerance: None,
            });
        }
    }
    Ok(rows)
}

fn cmd_oracle(case: OracleCase, config: &Option<PathBuf>, out: &Option<PathBuf>) -> Result<()> {
    let cfg = oracle_config(case, config)?;
    cfg.rg_config()?;
    if case == OracleCase::H2 && cfg.nonlinearity.build()?.form() != NonlinearityForm::H2Odd {
        return Err(RgError::Config("the h2 case needs an h2_odd nonlinearity".into()));
    }
    let rows = oracle_rows(case, &cfg)?;
    let mut table = String::new();
    for r in &rows {
        let tol = r.tolerance.map_or_else(|| "-".to_string(), |t| format!("{t:.0e}"));
        let status = match r.tolerance {
            None => "info",
            Some(_) if r.passed() => "pass",
            Some(_) => "FAIL",
        };
        let _ = writeln!(table, "{:<48} {:>12.4e} {:>8} {status}", r.pair, r.max_diff, tol);
    }
    print!("{table}");
    if let Some(dir) = out {
        create_dir(dir)?;
        let mut w = csv::Writer::from_path(dir.join("oracle_report.csv"))?;
        w.write_record(["pair", "max_diff", "tolerance", "passed"])?;
        for r in &rows {
            w.write_record([
                r.pair.clone(),
                r.max_diff.to_string(),
                r.tolerance.map_or_else(String::new, |t| t.to_string()),
                r.passed().to_string(),
            ])?;
        }
        w.flush()?;
    }
    if let Some(bad) = rows.iter().find(|r| !r.passed()) {
        return Err(RgError::Solver(format!(
            "{}: {:.3e} exceeds {:.0e}",
            bad.pair,
            bad.max_diff,
            bad.tolerance.unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

fn cmd_sweep(configs: &[PathBuf], out: &Option<PathBuf>) -> Result<()> {
    let root = out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut loaded = Vec::new();
    for p in configs {
        let cfg = RunConfig::load(p)?;
        cfg.rg_config()?;
        let stem = p
            .file_stem()
            .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
        loaded.push((stem, cfg));
    }
    let results: Vec<(String, Result<RunSummary>)> = std::thread::scope(|s| {
        let handles: Vec<_> = loaded
            .iter()
            .map(|(stem, cfg)| {
                let dir = root.join(stem);
                (stem.clone(), s.spawn(move || execute_run(cfg, &dir, false)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(stem, h)| {
                let r = h
                    .join()
                    .unwrap_or_else(|_| Err(RgError::Solver("worker panicked".into())));
                (stem, r)
            })
            .collect()
    });
    let mut worst: Option<RgError> = None;
    for (stem, r) in results {
        match r {
            Ok(s) => println!(
                "{stem}: a_limit = {:e}, final_residual = {:e}, iterations = {}",
                s.a_limit, s.final_residual, s.iterations
            ),
            Err(e) => {
                println!("{stem}: error[{}] {e}", e.category());
                if !matches!(&worst, Some(w) if e.exit_code() <= w.exit_code()) {
                    worst = Some(e);
                }
            }
        }
    }
    worst.map_or(Ok(()), Err)
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config, out } => cmd_run(config, out, false),
        Command::Constants {
            l,
            q,
            delta,
            config,
            out,
            seed,
        } => cmd_constants(*l, *q, *delta, config, out, *seed),
        Command::Oracle { case, config, out } => cmd_oracle(*case, config, out),
        Command::Halfline { config, out } => cmd_run(config, out, true),
        Command::Sweep { configs, out } => cmd_sweep(configs, out),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
