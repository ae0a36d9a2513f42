//! Front end for the pinning laboratory: configuration, subcommands and result files.

pub mod config;
mod output;

pub use config::{parse_config, ConfigError, Format, Params, RunConfig, Subcommand};

use config::ScheduleKey;
use output::Outputs;
use pinlab_core::evolution::{self, EvolutionConfig, Outcome};
use pinlab_core::flat_percolation::{build_lambda_with, sample_lattice, verify_lambda, GrowthFunction, LambdaStatus, Schedule};
use pinlab_core::periodic_cell::{
    build_v_profile, check_monotone, default_n_modes, integral_residual_check, linf_bound, make_cell_params,
    spectral_residual_check, Which,
};
use pinlab_core::supersolution::{
    choose_params, compose_and_verify, sample_certificate_field, CertificateOptions, ScalingInputs, ScalingParams,
    SupersolutionBundle,
};
use pinlab_core::{FractionalOrder, ObstacleField, PeriodicGrid, StrengthLaw};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::fs::File;
use std::io::BufReader;

/// Points at which the cell residual is evaluated by singular integral.
const RESIDUAL_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A certificate or check ran to completion and failed.
    Failed,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(pinlab_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Core(pinlab_core::Error::Overflow { height }) => write!(
                f,
                "percolation overflow at height {height}; raise `rows` or `p_open`, or try another seed"
            ),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<pinlab_core::Error> for CliError {
    fn from(e: pinlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    /// 2 for configuration and precondition problems, 1 for everything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(pinlab_core::Error::Config(_) | pinlab_core::Error::Bracket(_)) => 2,
            _ => 1,
        }
    }
}

pub fn exit_code(result: &Result<Status, CliError>) -> i32 {
    match result {
        Ok(Status::Success) => 0,
        Ok(Status::Failed) => 1,
        Err(e) => e.exit_code(),
    }
}

/// Runs one subcommand, writing its results and manifest to `output_dir`.
pub fn dispatch(cfg: &RunConfig) -> Result<Status, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.params.threads)
        .build()
        .map_err(|e| ConfigError::Invalid { key: "threads".into(), msg: e.to_string() })?;
    let mut out = Outputs::create(cfg)?;
    let status = pool.install(|| match cfg.subcommand {
        Subcommand::Percolate => percolate(cfg, &mut out),
        Subcommand::Cell => cell(cfg, &mut out),
        Subcommand::Build => build(cfg, &mut out, true),
        Subcommand::Verify => build(cfg, &mut out, false),
        Subcommand::Evolve => evolve(cfg, &mut out),
        Subcommand::Scan => scan(cfg, &mut out),
    });
    out.finish(cfg)?;
    status
}

fn order(p: &Params) -> Result<FractionalOrder, CliError> {
    Ok(FractionalOrder::new(p.s)?)
}

#[derive(Serialize)]
struct PercolationRecord {
    p: f64,
    seed: u64,
    status: LambdaStatus,
    max_lambda: usize,
    mean_lambda: f64,
    verified: bool,
}

fn percolate(cfg: &RunConfig, out: &mut Outputs) -> Result<Status, CliError> {
    let p = &cfg.params;
    let growth = GrowthFunction::new(p.alpha)?;
    let schedule = match p.schedule {
        ScheduleKey::Sweep => Schedule::Sweep,
        ScheduleKey::Worklist => Schedule::Worklist,
    };
    let mut records = out.records("percolation")?;
    let mut status = Status::Success;
    for i in 0..p.p_steps {
        let prob = if p.p_steps == 1 { p.p } else { p.p + (p.p_max - p.p) * i as f64 / (p.p_steps - 1) as f64 };
        let runs: Vec<_> = (0..p.samples as u64)
            .into_par_iter()
            .map(|k| -> Result<_, CliError> {
                let lat = sample_lattice(p.n, p.width, p.height, prob, p.seed.wrapping_add(k))?;
                let field = build_lambda_with(&lat, &growth, schedule);
                let verified = field.status == LambdaStatus::Constructed && verify_lambda(&field).passed;
                Ok((lat, field, verified))
            })
            .collect::<Result<_, _>>()?;
        let mut built = 0;
        for (k, (_, field, verified)) in runs.iter().enumerate() {
            let lam = &field.lambda;
            records.write(&PercolationRecord {
                p: prob,
                seed: p.seed.wrapping_add(k as u64),
                status: field.status,
                max_lambda: *lam.iter().max().unwrap_or(&0),
                mean_lambda: lam.iter().sum::<usize>() as f64 / lam.len().max(1) as f64,
                verified: *verified,
            })?;
            if field.status == LambdaStatus::Constructed {
                built += 1;
                if !verified {
                    status = Status::Failed;
                }
            }
        }
        let overflow = p.samples - built;
        println!("p = {prob}: {built} constructed, {overflow} overflow of {}", p.samples);
        if overflow > built {
            status = Status::Failed;
        }
        if p.samples == 1 && p.p_steps == 1 {
            let (lat, field, _) = &runs[0];
            lat.write_csv(out.file("lattice.csv")?)?;
            field.write_csv(out.file("lambda.csv")?)?;
        }
    }
    records.finish()?;
    Ok(status)
}

#[derive(Serialize)]
struct CellRecord {
    a: f64,
    b: f64,
    delta: f64,
    f1: f64,
    f2: f64,
    rho: f64,
    n_modes: usize,
    tail_bound: f64,
    sup_norm: f64,
    sup_bound: f64,
    monotone: bool,
    min_slope: f64,
    residual_max: f64,
    residual_passed: bool,
    /// same check on the truncated series through the FFT; Gibbs-limited next to ±ρ
    spectral_residual_max: f64,
}

fn cell(cfg: &RunConfig, out: &mut Outputs) -> Result<Status, CliError> {
    let p = &cfg.params;
    let params = make_cell_params(p.a, p.b, p.delta, p.f2, order(p)?)?;
    let n_modes = if p.n_modes == 0 { default_n_modes(&params) } else { p.n_modes };
    let profile = build_v_profile(&params, n_modes)?;
    profile.write_csv(p.grid_points, out.file("cell_profile.csv")?)?;
    let mono = check_monotone(&profile, p.grid_points.max(256))?;
    let grid = PeriodicGrid::with_origin(params.period(), p.grid_points.next_power_of_two().max(8), -params.a)?;
    let sup_norm = profile.sample(Which::Tilde, &grid)?.sup_norm();
    let residual = integral_residual_check(&profile, RESIDUAL_POINTS)?;
    let spectral = spectral_residual_check(&profile)?;
    let rec = CellRecord {
        a: params.a,
        b: params.b,
        delta: params.delta,
        f1: params.f1,
        f2: params.f2,
        rho: params.rho,
        n_modes,
        tail_bound: profile.tail_bound,
        sup_norm,
        sup_bound: linf_bound(&params),
        monotone: mono.passed,
        min_slope: mono.min_slope_tilde.min(mono.min_slope_smoothed),
        residual_max: residual.max_error,
        residual_passed: residual.passed,
        spectral_residual_max: spectral.max_error,
    };
    let ok = rec.monotone && rec.residual_passed && rec.sup_norm <= rec.sup_bound;
    let mut records = out.records("cell_checks")?;
    records.write(&rec)?;
    records.finish()?;
    println!("cell: monotone = {}, sup {:.3e} <= {:.3e}, residual passed = {}", rec.monotone, sup_norm, rec.sup_bound, rec.residual_passed);
    Ok(if ok { Status::Success } else { Status::Failed })
}

fn scaling(p: &Params) -> Result<ScalingParams, CliError> {
    let inputs = ScalingInputs {
        r0: p.r0,
        r1: p.r1,
        q: p.q,
        v: p.v,
        f2: p.f2,
        c_a: p.c_a,
        c_delta: p.c_delta,
        alpha: p.alpha,
        a_ratio: p.a_ratio,
    };
    Ok(choose_params(order(p)?, &inputs)?)
}

fn certificate_options(p: &Params) -> CertificateOptions {
    CertificateOptions {
        n_boxes: p.n_boxes,
        height: p.rows,
        p_open: p.p_open,
        log2_grid: p.log2_grid,
        tol_factor: p.tol_factor,
    }
}

fn strength_law(p: &Params) -> StrengthLaw {
    if p.strength_max > p.strength_min {
        StrengthLaw::Uniform { lo: p.strength_min, hi: p.strength_max }
    } else {
        StrengthLaw::Point(p.strength_min)
    }
}

fn obtain_field(p: &Params, params: &ScalingParams, seed: u64) -> Result<ObstacleField, CliError> {
    if p.field_file.as_os_str().is_empty() {
        Ok(sample_certificate_field(params, &certificate_options(p), strength_law(p), seed)?)
    } else {
        Ok(ObstacleField::read_text(BufReader::new(File::open(&p.field_file)?))?)
    }
}

fn build(cfg: &RunConfig, out: &mut Outputs, full: bool) -> Result<Status, CliError> {
    let p = &cfg.params;
    let params = scaling(p)?;
    let field = obtain_field(p, &params, p.seed)?;
    let bundle = compose_and_verify(&params, &field, &certificate_options(p))?;
    bundle.write_summary(out.file("summary.txt")?)?;
    if full {
        bundle.write_csv(out.file("supersolution.csv")?)?;
        field.write_text(out.file("obstacles.txt")?)?;
        bundle.lambda.write_csv(out.file("lambda.csv")?)?;
        let mut records = out.records("conclusions")?;
        for c in &params.conclusions {
            records.write(c)?;
        }
        records.finish()?;
    } else {
        let mut records = out.records("verification")?;
        records.write(&bundle.verification)?;
        records.finish()?;
    }
    report(&bundle);
    Ok(if bundle.verification.passed { Status::Success } else { Status::Failed })
}

fn report(b: &SupersolutionBundle) {
    let v = &b.verification;
    println!(
        "F* = {:.4e}, max residual = {:.4e} (tolerance {:.1e}), flat residual = {:.4e}: {}",
        v.f_star,
        v.max_residual,
        v.tolerance,
        v.max_flat_residual,
        if v.passed { "certified" } else { "FAILED" }
    );
}

fn evolution_config(p: &Params, params: &ScalingParams, field: &ObstacleField, force: f64) -> Result<EvolutionConfig, CliError> {
    let period = field.window().width();
    let grid = PeriodicGrid::new(period, 1usize << p.evolve_log2_grid)?;
    let mut cfg = EvolutionConfig::new(grid, params.s, force, field);
    cfg.dt = p.dt;
    cfg.t_max = p.t_max;
    if p.pin_tol > 0.0 {
        cfg.pin_tol = p.pin_tol;
    }
    Ok(cfg)
}

fn evolve(cfg: &RunConfig, out: &mut Outputs) -> Result<Status, CliError> {
    let p = &cfg.params;
    let params = scaling(p)?;
    let field = obtain_field(p, &params, p.seed)?;
    let force = if p.force < 0.0 { params.f_star } else { p.force };
    let ecfg = evolution_config(p, &params, &field, force)?;
    // the certificate, when it exists, bounds every snapshot from above
    let bound = compose_and_verify(&params, &field, &certificate_options(p)).ok().filter(|b| b.verification.passed);
    let mut snaps = Vec::new();
    let mut excess = f64::NEG_INFINITY;
    let verdict = evolution::run_observed(&ecfg, &field, p.snapshot_every, |t, u| {
        if let Some(b) = &bound {
            for (x, v) in u.grid.points().zip(&u.values) {
                excess = excess.max(v - b.u_total.interpolate(x));
            }
        }
        snaps.push((t, u.clone()));
    })?;
    evolution::write_snapshots(&snaps, out.file("trajectory.csv")?)?;
    let mut w = out.file("verdict.txt")?;
    verdict.write_summary(&mut w)?;
    use std::io::Write;
    writeln!(w, "force = {force:.16e}")?;
    if bound.is_some() {
        writeln!(w, "max_excess_over_supersolution = {excess:.16e}")?;
    }
    println!("evolve at F = {force:.4e}: {:?} at t = {}", verdict.outcome, verdict.t_final);
    Ok(Status::Success)
}

#[derive(Serialize)]
struct ScanRow {
    realization: usize,
    seed: u64,
    f_star: f64,
    f_lo: f64,
    f_hi: f64,
    threshold_lo: f64,
    threshold_hi: f64,
    probes: usize,
    pinned_probes: usize,
}

fn scan(cfg: &RunConfig, out: &mut Outputs) -> Result<Status, CliError> {
    let p = &cfg.params;
    let params = scaling(p)?;
    let rows: Vec<ScanRow> = (0..p.realizations)
        .into_par_iter()
        .map(|r| -> Result<ScanRow, CliError> {
            let seed = p.seed.wrapping_add(r as u64);
            let field = obtain_field(p, &params, seed)?;
            let f_hi = if p.f_hi < 0.0 { 10.0 * field.force_upper_bound() } else { p.f_hi };
            let base = evolution_config(p, &params, &field, f_hi)?;
            let scan = evolution::threshold_scan(&field, &base, p.f_lo, f_hi, p.n_bisect)?;
            Ok(ScanRow {
                realization: r,
                seed,
                f_star: params.f_star,
                f_lo: p.f_lo,
                f_hi,
                threshold_lo: scan.interval.0,
                threshold_hi: scan.interval.1,
                probes: scan.records.len(),
                pinned_probes: scan.records.iter().filter(|r| r.outcome == Outcome::Pinned).count(),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut records = out.records("scan")?;
    for row in &rows {
        records.write(row)?;
    }
    records.finish()?;
    for row in &rows {
        println!("realization {}: F_c in [{:.4e}, {:.4e}], F* = {:.4e}", row.realization, row.threshold_lo, row.threshold_hi, row.f_star);
    }
    Ok(Status::Success)
}
