//! Named validation suites: analytic quantities checked against the Monte
//! Carlo oracle (or an independent numerical route), one CSV row per check.

use crate::context::Context;
use crate::csvout::{fmt, CsvWriter};
use crate::sweep::RunPoint;
use crate::CliError;
use std::path::PathBuf;
use tiltnet_core::laplace::{BlockageWeight, ExponentTerm, FieldGroup, LaplaceExponent};
use tiltnet_core::mc::{
    compact_window_radius, drop_hetnet, drop_homogeneous, ks_distance, sample_serving_distances,
    DropConfig,
};
use tiltnet_core::{
    coverage_femto, coverage_femto_lower_bound, coverage_homogeneous, coverage_macro_hetnet,
    EquivalentDistanceMap, NetworkParams, ServingDistanceDist,
};

struct Report {
    rows: Vec<Row>,
}

struct Row {
    quantity: String,
    analytic: f64,
    empirical: f64,
    ci95: f64,
    pass: bool,
}

impl Report {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn push(
        &mut self,
        quantity: impl Into<String>,
        analytic: f64,
        empirical: f64,
        ci95: f64,
        pass: bool,
    ) {
        self.rows.push(Row {
            quantity: quantity.into(),
            analytic,
            empirical,
            ci95,
            pass,
        });
    }

    fn write(
        self,
        ctx: &Context,
        suite: &str,
        notes: &[String],
        out: Option<&PathBuf>,
    ) -> Result<(), CliError> {
        let mut w = CsvWriter::create(out)?;
        w.header(
            ctx,
            &format!("validate --suite {suite}"),
            notes,
            &[
                "config_hash",
                "quantity",
                "analytic",
                "empirical",
                "ci95",
                "pass",
            ],
        )?;
        let mut failures = 0;
        for r in &self.rows {
            if !r.pass {
                failures += 1;
            }
            w.row(&[
                ctx.hash.clone(),
                r.quantity.clone(),
                fmt(r.analytic),
                fmt(r.empirical),
                fmt(r.ci95),
                if r.pass { "pass".into() } else { "fail".into() },
            ])?;
        }
        if failures > 0 {
            return Err(CliError::Validation(failures));
        }
        Ok(())
    }
}

fn drop_config(
    ctx: &Context,
    params: &NetworkParams,
    drops: Option<usize>,
) -> Result<DropConfig, CliError> {
    let n = drops.unwrap_or(ctx.config.run.n_drops);
    let window = if ctx.config.run.window_radius_m > 0.0 {
        ctx.config.run.window_radius_m
    } else {
        compact_window_radius(params)
    };
    DropConfig::new(window, n, ctx.seed).map_err(CliError::usage)
}

/// Femto-tier density fallback: suites that need femtocells run at ten macro
/// densities when the config leaves the tier empty.
fn with_femto_tier(params: &NetworkParams) -> (NetworkParams, Option<String>) {
    if params.lambda_f > 0.0 {
        (params.clone(), None)
    } else {
        let mut p = params.clone();
        p.lambda_f = 10.0 * p.lambda_m;
        (
            p,
            Some("note: lambda_f was 0; suite ran with lambda_f = 10 lambda_m".into()),
        )
    }
}

pub fn cmd_validate(
    ctx: &Context,
    suite: &str,
    drops: Option<usize>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    match suite {
        "lemma1" => suite_lemma1(ctx, drops, out),
        "theorem1" => suite_theorem1(ctx, drops, out),
        "theorems23" => suite_theorems23(ctx, drops, out),
        "bounds" => suite_bounds(ctx, out),
        "derivatives" => suite_derivatives(ctx, out),
        other => Err(CliError::Usage(format!(
            "unknown suite {other}; expected lemma1, theorem1, theorems23, bounds or derivatives"
        ))),
    }
}

fn suite_lemma1(
    ctx: &Context,
    drops: Option<usize>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let params = &ctx.params;
    let dist = ServingDistanceDist::for_params(params)?;
    let cfg = drop_config(ctx, params, drops)?;
    let mut report = Report::new();

    let mut samples = sample_serving_distances(params, &cfg)?;
    let n = samples.len().max(1);
    let mean_emp: f64 = samples.iter().sum::<f64>() / n as f64;
    let ks = ks_distance(&mut samples, |r| dist.cdf(r));
    // KS tolerance scales as sqrt(n) below the desk-scale 1e5 baseline.
    let ks_tol = 0.01f64.max(1.63 / (n as f64).sqrt());
    report.push("ks_distance", 0.0, ks, 0.0, ks <= ks_tol);

    let se = {
        let var: f64 = samples
            .iter()
            .map(|x| (x - mean_emp) * (x - mean_emp))
            .sum::<f64>()
            / n as f64;
        1.96 * (var / n as f64).sqrt()
    };
    let mean_ok = (mean_emp - dist.mean()).abs() <= (0.01 * dist.mean()).max(2.0 * se);
    report.push("mean_serving_distance", dist.mean(), mean_emp, se, mean_ok);

    let mass = dist.expectation(|_| Ok(1.0), 1e-9)?;
    report.push(
        "pdf_normalization",
        1.0,
        mass,
        0.0,
        (mass - 1.0).abs() < 1e-4,
    );

    report.write(ctx, "lemma1", &[], out)
}

fn suite_theorem1(
    ctx: &Context,
    drops: Option<usize>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let params = &ctx.params;
    let cfg = drop_config(ctx, params, drops)?;
    let tilt = ctx.config.run.theta_tilt_deg;
    let mut report = Report::new();
    for g_db in [-10.0, 0.0, 10.0, 20.0] {
        let gamma = 10f64.powf(g_db / 10.0);
        let ana = coverage_homogeneous(params, gamma, tilt)?.value;
        let emp = drop_homogeneous(params, &cfg, gamma, tilt)?;
        let tol = 0.02f64.max(2.0 * emp.ci95_halfwidth);
        report.push(
            format!("coverage_gamma_{g_db}dB"),
            ana,
            emp.mean,
            emp.ci95_halfwidth,
            (ana - emp.mean).abs() <= tol,
        );
    }
    report.write(ctx, "theorem1", &[], out)
}

fn suite_theorems23(
    ctx: &Context,
    drops: Option<usize>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let (params, note) = with_femto_tier(&ctx.params);
    let cfg = drop_config(ctx, &params, drops)?;
    let point = RunPoint::from_config(&ctx.config);
    let tilt = point.theta_tilt_deg;
    let rc_max = params.r_c_max();
    let mut report = Report::new();
    for rc in [0.0, rc_max / 2.0, rc_max] {
        let am = coverage_macro_hetnet(&params, point.gamma_m, tilt, rc)?.value;
        let af = coverage_femto(&params, point.gamma_f, tilt, rc)?.value;
        let (em, ef) = drop_hetnet(&params, &cfg, point.gamma_m, point.gamma_f, tilt, rc)?;
        report.push(
            format!("macro_coverage_rc_{rc:.0}m"),
            am,
            em.mean,
            em.ci95_halfwidth,
            (am - em.mean).abs() <= 0.03f64.max(2.0 * em.ci95_halfwidth),
        );
        report.push(
            format!("femto_coverage_rc_{rc:.0}m"),
            af,
            ef.mean,
            ef.ci95_halfwidth,
            (af - ef.mean).abs() <= 0.03f64.max(2.0 * ef.ci95_halfwidth),
        );
    }
    let notes: Vec<String> = note.into_iter().collect();
    report.write(ctx, "theorems23", &notes, out)
}

fn suite_bounds(ctx: &Context, out: Option<&PathBuf>) -> Result<(), CliError> {
    let (mut params, note) = with_femto_tier(&ctx.params);
    // The bound is an interference-limited statement.
    params.sigma2 = 0.0;
    let point = RunPoint::from_config(&ctx.config);
    let rc_max = params.r_c_max();
    let mut report = Report::new();
    let mut worst_gap: f64 = 0.0;
    for g_db in [0.0, 10.0] {
        let gamma = 10f64.powf(g_db / 10.0);
        for rc in [0.0, rc_max / 2.0, rc_max] {
            let exact = coverage_femto(&params, gamma, point.theta_tilt_deg, rc)?.value;
            let bound = coverage_femto_lower_bound(&params, gamma, rc)?.value;
            report.push(
                format!("bound_le_exact_g{g_db}dB_rc{rc:.0}m"),
                exact,
                bound,
                0.0,
                bound <= exact + 1e-9,
            );
            worst_gap = worst_gap.max((exact - bound) / exact.max(1e-12));
        }
    }
    report.push("worst_relative_gap", 0.05, worst_gap, 0.0, worst_gap < 0.05);
    let notes: Vec<String> = note.into_iter().collect();
    report.write(ctx, "bounds", &notes, out)
}

fn suite_derivatives(ctx: &Context, out: Option<&PathBuf>) -> Result<(), CliError> {
    let params = &ctx.params;
    let pl = &params.path_loss;
    let map = EquivalentDistanceMap::from_path_loss(pl);
    let lower = 80.0;
    let order_cap = 4usize.min(params.fading.nakagami_m.max(5) as usize - 1);
    let exponent = LaplaceExponent::new()
        .with_rtol(1e-12)
        .with_term(ExponentTerm::Field(FieldGroup::from_gain_dist(
            params.lambda_m,
            &params.macro_gain,
            params.p_m * pl.c_los,
            pl.alpha_los,
            5,
            lower,
            BlockageWeight::Los {
                beta: pl.beta_blockage,
            },
            Some(params.vertical),
        )))
        .with_term(ExponentTerm::Field(FieldGroup::from_gain_dist(
            params.lambda_m,
            &params.macro_gain,
            params.p_m * pl.c_nlos,
            pl.alpha_nlos,
            5,
            map.from_equivalent(lower),
            BlockageWeight::NlosComplement {
                beta: pl.beta_blockage,
            },
            Some(params.vertical),
        )));
    let tilt = ctx.config.run.theta_tilt_deg;
    let mut report = Report::new();
    for z0 in [3e7f64, 3e8, 2e9] {
        let derivs = exponent
            .transform_derivs(z0, order_cap, tilt)
            .map_err(CliError::usage)?;
        let f = |z: f64| exponent.value(z, tilt).map_err(CliError::usage);
        for order in 1..=order_cap {
            let (h, fd): (f64, f64) = match order {
                1 => {
                    let h = 0.005 * z0;
                    (h, (f(z0 + h)? - f(z0 - h)?) / (2.0 * h))
                }
                2 => {
                    let h = 0.01 * z0;
                    (h, (f(z0 + h)? - 2.0 * f(z0)? + f(z0 - h)?) / (h * h))
                }
                3 => {
                    let h = 0.02 * z0;
                    let v = (f(z0 - 3.0 * h)? - 8.0 * f(z0 - 2.0 * h)? + 13.0 * f(z0 - h)?
                        - 13.0 * f(z0 + h)?
                        + 8.0 * f(z0 + 2.0 * h)?
                        - f(z0 + 3.0 * h)?)
                        / (8.0 * h * h * h);
                    (h, v)
                }
                _ => {
                    let h = 0.025 * z0;
                    let v = (-f(z0 - 3.0 * h)? + 12.0 * f(z0 - 2.0 * h)? - 39.0 * f(z0 - h)?
                        + 56.0 * f(z0)?
                        - 39.0 * f(z0 + h)?
                        + 12.0 * f(z0 + 2.0 * h)?
                        - f(z0 + 3.0 * h)?)
                        / (6.0 * h * h * h * h);
                    (h, v)
                }
            };
            let _ = h;
            let rel = ((derivs[order] - fd) / fd).abs();
            report.push(
                format!("laplace_deriv_z{z0:.0e}_l{order}"),
                derivs[order],
                fd,
                0.0,
                rel < 1e-3,
            );
        }
    }
    report.write(ctx, "derivatives", &[], out)
}
