//! Batch front end for the coverage / energy-efficiency toolkit.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 numeric failure,
//! 3 validation failure, 4 infeasible optimization.

mod context;
mod csvout;
mod plot;
mod sweep;
mod validate;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

use context::Context;
use csvout::{fmt, CsvWriter};
use sweep::{RunPoint, SweepSpec, SweepVar};
use tiltnet_core::{
    coverage_femto, coverage_femto_lower_bound, coverage_hetnet_approx, coverage_homogeneous,
    coverage_homogeneous_approx, coverage_macro_hetnet, ee_2dbf, ee_homogeneous,
    optimize_hetnet_joint, optimize_tilt_bisection, optimize_tilt_exhaustive, tilt_range, Backend,
    Baseline2d, CoverageMethod, CoverageResult, Error as CoreError, NetworkParams,
    OptimizationOutcome, RangeMode, ServingDistanceDist, TiltRange,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    /// Number of failed validation rows.
    Validation(usize),
    Infeasible,
}

impl CliError {
    fn usage(e: CoreError) -> Self {
        match e {
            CoreError::Numeric(m) => CliError::Numeric(m),
            other => CliError::Usage(other.to_string()),
        }
    }

    fn io(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Infeasible => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::usage(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoverageScenario {
    Homogeneous,
    HetnetMacro,
    HetnetFemto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EeScenario {
    Homogeneous,
    Hetnet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Exact,
    Approx,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Approx => Backend::Approx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HomogeneousMethod {
    Exhaustive,
    Bisection,
}

#[derive(Parser)]
#[command(
    name = "tiltnet",
    about = "Coverage and energy-efficiency analysis for tilt-steered mmWave networks",
    version
)]
struct Cli {
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config entry, e.g. --set network.lambda_f=4.973e-4.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// RNG seed (falls back to TILTNET_SEED, then the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the serving-distance density and CCDF as CSV.
    Dist {
        /// Largest distance; defaults to the 1e-6 tail radius.
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one variable and report coverage probability.
    CoverageSweep {
        #[arg(long, value_enum)]
        scenario: CoverageScenario,
        #[arg(long, value_enum, default_value = "exact")]
        backend: BackendArg,
        #[arg(long, value_enum)]
        var: SweepVar,
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Add the closed-form femto lower-bound column.
        #[arg(long)]
        lower_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a standalone plotting script for the CSV.
        #[arg(long)]
        emit_plot_script: Option<PathBuf>,
    },
    /// Sweep one variable and report optimized-tilt EE against baselines.
    EeSweep {
        #[arg(long, value_enum, default_value = "homogeneous")]
        scenario: EeScenario,
        #[arg(long, value_enum, default_value = "exact")]
        backend: BackendArg,
        #[arg(long, value_enum)]
        var: SweepVar,
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Tilt grid step for the per-point optimization, degrees.
        #[arg(long, default_value_t = 0.5)]
        opt_grid_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_plot_script: Option<PathBuf>,
    },
    /// Optimize the tilt (and sleep radius in the two-tier scenario).
    Optimize {
        #[arg(long, value_enum)]
        scenario: EeScenario,
        /// Homogeneous search method.
        #[arg(long, value_enum, default_value = "exhaustive")]
        method: HomogeneousMethod,
        /// Two-tier objective backend.
        #[arg(long, value_enum, default_value = "exact")]
        backend: BackendArg,
        /// Tilt grid step, degrees.
        #[arg(long, default_value_t = 0.25)]
        grid_step: f64,
        /// Bisection stopping width, degrees.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Sleep-radius grid step; defaults to r_c_max / 64.
        #[arg(long)]
        rc_step: Option<f64>,
        /// Search the full 0..90 degree range instead of the reduced one.
        #[arg(long)]
        full_range: bool,
        /// Write the search trace as CSV.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        emit_plot_script: Option<PathBuf>,
    },
    /// Run a named analytic-vs-Monte-Carlo validation suite.
    Validate {
        /// One of: lemma1, theorem1, theorems23, bounds, derivatives.
        #[arg(long)]
        suite: String,
        /// Monte Carlo drops (defaults to the config value).
        #[arg(long)]
        drops: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numeric(m) => eprintln!("numeric error: {m}"),
                CliError::Validation(n) => {
                    eprintln!("validation failed: {n} check(s) out of tolerance")
                }
                CliError::Infeasible => {
                    eprintln!("optimization infeasible under the given constraints")
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context::build(cli.config.as_ref(), &cli.set, cli.seed)?;
    match cli.command {
        Command::Dist { r_max, steps, out } => cmd_dist(&ctx, r_max, steps, out.as_ref()),
        Command::CoverageSweep {
            scenario,
            backend,
            var,
            start,
            stop,
            steps,
            lower_bound,
            out,
            emit_plot_script,
        } => {
            let spec = SweepSpec::new(var, start, stop, steps)?;
            cmd_coverage_sweep(
                &ctx,
                scenario,
                backend.into(),
                &spec,
                lower_bound,
                out.as_ref(),
                emit_plot_script.as_ref(),
            )
        }
        Command::EeSweep {
            scenario,
            backend,
            var,
            start,
            stop,
            steps,
            opt_grid_step,
            out,
            emit_plot_script,
        } => {
            let spec = SweepSpec::new(var, start, stop, steps)?;
            cmd_ee_sweep(
                &ctx,
                scenario,
                backend.into(),
                &spec,
                opt_grid_step,
                out.as_ref(),
                emit_plot_script.as_ref(),
            )
        }
        Command::Optimize {
            scenario,
            method,
            backend,
            grid_step,
            tol,
            rc_step,
            full_range,
            trace_out,
            emit_plot_script,
        } => cmd_optimize(
            &ctx,
            scenario,
            method,
            backend.into(),
            grid_step,
            tol,
            rc_step,
            full_range,
            trace_out.as_ref(),
            emit_plot_script.as_ref(),
        ),
        Command::Validate { suite, drops, out } => {
            validate::cmd_validate(&ctx, &suite, drops, out.as_ref())
        }
    }
}

fn cmd_dist(
    ctx: &Context,
    r_max: Option<f64>,
    steps: usize,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::Usage("need at least 2 steps".into()));
    }
    let dist = ServingDistanceDist::for_params(&ctx.params)?;
    let r_max = r_max.unwrap_or_else(|| dist.truncation_radius());
    if !(r_max > 0.0) {
        return Err(CliError::Usage("r_max must be positive".into()));
    }
    let mut w = CsvWriter::create(out)?;
    w.header(ctx, "dist", &[], &["r_m", "pdf", "ccdf"])?;
    for i in 1..=steps {
        let r = r_max * i as f64 / steps as f64;
        let pdf = dist.pdf(r)?;
        w.row(&[fmt(r), fmt(pdf), fmt(dist.ccdf(r))])?;
    }
    Ok(())
}

fn coverage_at(
    params: &NetworkParams,
    point: &RunPoint,
    scenario: CoverageScenario,
    backend: Backend,
) -> Result<CoverageResult, CoreError> {
    match (scenario, backend) {
        (CoverageScenario::Homogeneous, Backend::Exact) => {
            coverage_homogeneous(params, point.gamma, point.theta_tilt_deg)
        }
        (CoverageScenario::Homogeneous, Backend::Approx) => {
            coverage_homogeneous_approx(params, point.gamma, point.theta_tilt_deg)
        }
        (CoverageScenario::HetnetMacro, Backend::Exact) => {
            coverage_macro_hetnet(params, point.gamma_m, point.theta_tilt_deg, point.r_c)
        }
        (CoverageScenario::HetnetFemto, Backend::Exact) => {
            coverage_femto(params, point.gamma_f, point.theta_tilt_deg, point.r_c)
        }
        (CoverageScenario::HetnetMacro, Backend::Approx) => Ok(coverage_hetnet_approx(
            params,
            point.gamma_m,
            point.gamma_f,
            point.theta_tilt_deg,
            point.r_c,
        )?
        .0),
        (CoverageScenario::HetnetFemto, Backend::Approx) => Ok(coverage_hetnet_approx(
            params,
            point.gamma_m,
            point.gamma_f,
            point.theta_tilt_deg,
            point.r_c,
        )?
        .1),
    }
}

fn method_name(m: CoverageMethod) -> &'static str {
    match m {
        CoverageMethod::ExactAnalytic => "exact-analytic",
        CoverageMethod::TaylorApprox => "taylor-approx",
        CoverageMethod::LowerBound => "lower-bound",
        CoverageMethod::MonteCarlo => "monte-carlo",
    }
}

fn cmd_coverage_sweep(
    ctx: &Context,
    scenario: CoverageScenario,
    backend: Backend,
    spec: &SweepSpec,
    lower_bound: bool,
    out: Option<&PathBuf>,
    plot_script: Option<&PathBuf>,
) -> Result<(), CliError> {
    if lower_bound && scenario != CoverageScenario::HetnetFemto {
        return Err(CliError::Usage(
            "--lower-bound applies to the hetnet-femto scenario only".into(),
        ));
    }
    let base_point = RunPoint::from_config(&ctx.config);
    let rows: Vec<(f64, CoverageResult, Option<f64>)> = spec
        .grid()
        .par_iter()
        .map(|&x| {
            let (params, point) = sweep::apply(&ctx.params, &base_point, spec.var, x)?;
            let cov = coverage_at(&params, &point, scenario, backend).map_err(CliError::usage)?;
            let bound = if lower_bound {
                Some(
                    coverage_femto_lower_bound(&params, point.gamma_f, point.r_c)
                        .map_err(CliError::usage)?
                        .value,
                )
            } else {
                None
            };
            Ok((x, cov, bound))
        })
        .collect::<Result<_, CliError>>()?;

    let mut columns = vec![spec.var.name(), "coverage"];
    if lower_bound {
        columns.push("lower_bound");
    }
    columns.push("method");
    let mut w = CsvWriter::create(out)?;
    w.header(ctx, "coverage-sweep", &[], &columns)?;
    for (x, cov, bound) in rows {
        let mut fields = vec![fmt(x), fmt(cov.value)];
        if let Some(b) = bound {
            fields.push(fmt(b));
        }
        fields.push(method_name(cov.method).to_string());
        w.row(&fields)?;
    }
    if let (Some(script), Some(csv)) = (plot_script, out) {
        plot::emit(script, csv)?;
    }
    Ok(())
}

fn cmd_ee_sweep(
    ctx: &Context,
    scenario: EeScenario,
    backend: Backend,
    spec: &SweepSpec,
    opt_grid_step: f64,
    out: Option<&PathBuf>,
    plot_script: Option<&PathBuf>,
) -> Result<(), CliError> {
    let base_point = RunPoint::from_config(&ctx.config);
    let mut w = CsvWriter::create(out)?;

    if spec.var == SweepVar::ThetaTiltDeg {
        if scenario != EeScenario::Homogeneous {
            return Err(CliError::Usage(
                "tilt sweeps report the homogeneous EE curve; use optimize for the two-tier problem"
                    .into(),
            ));
        }
        // Tilt sweep: EE curve plus optimizer markers and the reduced range.
        let range = tilt_range(&ctx.params, ctx.config.run.epsilon, RangeMode::Dense)?;
        let exh =
            optimize_tilt_exhaustive(&ctx.params, base_point.gamma, opt_grid_step, Some(range))?;
        let bis = optimize_tilt_bisection(&ctx.params, base_point.gamma, 0.05)?;
        let zero = ee_2dbf(&ctx.params, base_point.gamma, Baseline2d::ZeroTilt, backend)?;
        let omni = ee_2dbf(
            &ctx.params,
            base_point.gamma,
            Baseline2d::OmniVertical,
            backend,
        )?;
        let rows: Vec<(f64, f64)> = spec
            .grid()
            .par_iter()
            .map(|&theta| {
                Ok((
                    theta,
                    ee_homogeneous(&ctx.params, base_point.gamma, theta, backend)?,
                ))
            })
            .collect::<Result<_, CliError>>()?;
        w.header(
            ctx,
            "ee-sweep",
            &[format!(
                "markers: theta_exhaustive={:.3} theta_bisection={:.3} range=[{:.3},{:.3}]",
                exh.theta_opt_deg, bis.theta_opt_deg, range.min_deg, range.max_deg
            )],
            &[
                "theta_tilt_deg",
                "ee",
                "ee_2dbf_zero_tilt",
                "ee_2dbf_omni",
                "theta_exhaustive_opt",
                "theta_bisection_opt",
                "theta_range_lo",
                "theta_range_hi",
            ],
        )?;
        for (theta, ee) in rows {
            w.row(&[
                fmt(theta),
                fmt(ee),
                fmt(zero),
                fmt(omni),
                fmt(exh.theta_opt_deg),
                fmt(bis.theta_opt_deg),
                fmt(range.min_deg),
                fmt(range.max_deg),
            ])?;
        }
    } else {
        let rows: Vec<[f64; 5]> = spec
            .grid()
            .par_iter()
            .map(|&x| {
                let (params, point) = sweep::apply(&ctx.params, &base_point, spec.var, x)?;
                let range = tilt_range(&params, ctx.config.run.epsilon, RangeMode::Dense)
                    .map_err(CliError::usage)?;
                // Keep zero tilt in the searched grid so the optimized curve
                // dominates the fixed-tilt baseline by construction.
                let search = TiltRange {
                    min_deg: 0.0,
                    max_deg: range.max_deg,
                };
                let (ee_opt, theta_opt) = match scenario {
                    EeScenario::Homogeneous => {
                        let o = optimize_tilt_exhaustive_backend(
                            &params,
                            point.gamma,
                            opt_grid_step,
                            search,
                            backend,
                        )?;
                        (o.1, o.0)
                    }
                    EeScenario::Hetnet => {
                        let o = optimize_hetnet_tilt_only(
                            &params,
                            &point,
                            opt_grid_step,
                            search,
                            backend,
                        )?;
                        (o.1, o.0)
                    }
                };
                let zero = ee_2dbf(&params, point.gamma, Baseline2d::ZeroTilt, backend)
                    .map_err(CliError::usage)?;
                let omni = ee_2dbf(&params, point.gamma, Baseline2d::OmniVertical, backend)
                    .map_err(CliError::usage)?;
                Ok([x, ee_opt, theta_opt, zero, omni])
            })
            .collect::<Result<_, CliError>>()?;
        w.header(
            ctx,
            "ee-sweep",
            &[],
            &[
                spec.var.name(),
                "ee_opt_tilt",
                "theta_opt_deg",
                "ee_2dbf_zero_tilt",
                "ee_2dbf_omni",
            ],
        )?;
        for r in rows {
            w.row(&r.map(fmt))?;
        }
    }
    if let (Some(script), Some(csv)) = (plot_script, out) {
        plot::emit(script, csv)?;
    }
    Ok(())
}

/// Exhaustive tilt argmax of the homogeneous EE under either backend.
fn optimize_tilt_exhaustive_backend(
    params: &NetworkParams,
    gamma: f64,
    step: f64,
    range: TiltRange,
    backend: Backend,
) -> Result<(f64, f64), CliError> {
    let n = ((range.max_deg - range.min_deg) / step).ceil() as usize;
    let mut best = (range.min_deg, f64::NEG_INFINITY);
    for i in 0..=n {
        let theta = (range.min_deg + i as f64 * step).min(range.max_deg);
        let ee = ee_homogeneous(params, gamma, theta, backend)?;
        if ee > best.1 {
            best = (theta, ee);
        }
    }
    Ok(best)
}

/// Exhaustive tilt argmax of the two-tier EE at the configured sleep radius.
fn optimize_hetnet_tilt_only(
    params: &NetworkParams,
    point: &RunPoint,
    step: f64,
    range: TiltRange,
    backend: Backend,
) -> Result<(f64, f64), CliError> {
    let n = ((range.max_deg - range.min_deg) / step).ceil() as usize;
    let mut best = (range.min_deg, f64::NEG_INFINITY);
    for i in 0..=n {
        let theta = (range.min_deg + i as f64 * step).min(range.max_deg);
        let ee = tiltnet_core::ee_hetnet(
            params,
            point.gamma_m,
            point.gamma_f,
            theta,
            point.r_c,
            backend,
        )?;
        if ee > best.1 {
            best = (theta, ee);
        }
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    ctx: &Context,
    scenario: EeScenario,
    method: HomogeneousMethod,
    backend: Backend,
    grid_step: f64,
    tol: f64,
    rc_step: Option<f64>,
    full_range: bool,
    trace_out: Option<&PathBuf>,
    plot_script: Option<&PathBuf>,
) -> Result<(), CliError> {
    let point = RunPoint::from_config(&ctx.config);
    let range = if full_range {
        TiltRange::full()
    } else {
        tilt_range(&ctx.params, ctx.config.run.epsilon, RangeMode::Dense)?
    };
    let outcome: OptimizationOutcome = match scenario {
        EeScenario::Homogeneous => match method {
            HomogeneousMethod::Exhaustive => {
                optimize_tilt_exhaustive(&ctx.params, point.gamma, grid_step, Some(range))?
            }
            HomogeneousMethod::Bisection => optimize_tilt_bisection(&ctx.params, point.gamma, tol)?,
        },
        EeScenario::Hetnet => {
            let rc_step = rc_step.unwrap_or(ctx.params.r_c_max() / 64.0);
            optimize_hetnet_joint(
                &ctx.params,
                point.gamma_m,
                point.gamma_f,
                ctx.config.run.eps_m,
                ctx.config.run.eps_f,
                grid_step,
                rc_step,
                backend,
                Some(range),
            )?
        }
    };

    println!("method: {:?}", outcome.method);
    println!("theta_opt_deg: {:.4}", outcome.theta_opt_deg);
    if let Some(rc) = outcome.r_c_opt {
        println!("r_c_opt_m: {:.3}", rc);
    }
    println!("ee_opt: {:.6e}", outcome.ee_opt);
    println!("evaluations: {}", outcome.evaluations);
    if matches!(outcome.method, tiltnet_core::OptMethod::Bisection) {
        let bound = (range.width() / tol).log2().ceil() as usize + 1;
        println!("evaluation_bound: {bound}");
    }
    println!(
        "search_range_deg: [{:.3}, {:.3}]",
        range.min_deg, range.max_deg
    );
    println!("feasible: {}", outcome.feasible);
    if outcome.non_unimodal {
        println!("warning: bracket comparisons were inconsistent with a unimodal objective");
    }

    if let Some(path) = trace_out {
        let mut w = CsvWriter::create(Some(path))?;
        w.header(
            ctx,
            "optimize-trace",
            &[],
            &[
                "theta_tilt_deg",
                "objective_ee",
                "r_c_m",
                "macro_cov",
                "femto_cov",
                "feasible",
            ],
        )?;
        for t in &outcome.trace {
            w.row(&[
                fmt(t.theta_deg),
                fmt(t.objective),
                t.r_c.map_or("nan".into(), fmt),
                t.macro_cov.map_or("nan".into(), fmt),
                t.femto_cov.map_or("nan".into(), fmt),
                (t.feasible as u8).to_string(),
            ])?;
        }
        if let Some(script) = plot_script {
            plot::emit(script, path)?;
        }
    }
    if !outcome.feasible {
        return Err(CliError::Infeasible);
    }
    Ok(())
}
