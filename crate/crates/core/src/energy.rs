//! Energy-efficiency objectives and tilt / sleep-radius optimization.
//!
//! The homogeneous EE is coverage times spectral rate over the per-BS power
//! budget; the two-tier EE weights each tier's coverage-rate product by its
//! density over the area power density. Three optimizers are provided:
//! exhaustive grid search on the exact backend, the reduced-range bisection
//! heuristic on the Taylor backend, and a feasibility-filtered 2D grid search
//! for the joint tilt / sleep-radius problem.

use crate::coverage::{
    coverage_femto, coverage_hetnet_approx, coverage_homogeneous, coverage_homogeneous_approx,
    coverage_macro_hetnet,
};
use crate::distance::ServingDistanceDist;
use crate::error::{Error, Result};
use crate::params::{NetworkParams, VerticalPattern};

use rayon::prelude::*;

/// Which coverage computation backs an EE evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Full outer integral over the serving distance.
    Exact,
    /// Single-point Taylor evaluation at the mean serving distance.
    Approx,
}

/// The two readings of the no-3D-beamforming baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline2d {
    /// Keep the vertical pattern, fix the tilt at zero.
    ZeroTilt,
    /// Remove the vertical pattern entirely (unit gain everywhere).
    OmniVertical,
}

/// Search method recorded in an optimization outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMethod {
    Exhaustive,
    Bisection,
    ApproxGrid,
}

/// Tilt search interval in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltRange {
    pub min_deg: f64,
    pub max_deg: f64,
}

impl TiltRange {
    pub fn full() -> Self {
        Self {
            min_deg: 0.0,
            max_deg: 90.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_deg - self.min_deg
    }
}

/// How the tilt search range is derived from the serving-distance law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeMode {
    /// Center the range on `atan(h_eff / mean distance)`; dense-network form.
    Dense,
    /// Use the `(rho0, rho1)` quantile bounds at the given epsilon.
    General,
}

/// Tilt range containing the optimum: the boresight angle of the relevant
/// serving distances widened by the pattern's floor offset `theta_0`.
pub fn tilt_range(params: &NetworkParams, epsilon: f64, mode: RangeMode) -> Result<TiltRange> {
    params.validate()?;
    let dist = ServingDistanceDist::for_params(params)?;
    let theta0 = params.vertical.theta0_deg();
    let h = params.vertical.h_eff;
    let (lo_center, hi_center) = match mode {
        RangeMode::Dense => {
            let a = (h / dist.mean()).atan().to_degrees();
            (a, a)
        }
        RangeMode::General => {
            let (rho0, rho1) = dist.quantile_bounds(epsilon)?;
            (
                (h / rho1).atan().to_degrees(),
                (h / rho0).atan().to_degrees(),
            )
        }
    };
    Ok(TiltRange {
        min_deg: (lo_center - theta0).max(0.0),
        max_deg: (hi_center + theta0).min(90.0),
    })
}

/// One evaluated candidate of an optimization run.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub theta_deg: f64,
    pub r_c: Option<f64>,
    /// Objective value used by the search at this candidate.
    pub objective: f64,
    pub macro_cov: Option<f64>,
    pub femto_cov: Option<f64>,
    pub feasible: bool,
}

/// Result of a tilt (and sleep-radius) optimization.
#[derive(Debug, Clone)]
pub struct OptimizationOutcome {
    pub theta_opt_deg: f64,
    /// Present only for the two-tier joint problem.
    pub r_c_opt: Option<f64>,
    /// Achieved EE in bits/s/Hz/W. For the bisection heuristic this is the
    /// exact-backend EE at the returned tilt, so outcomes are comparable.
    pub ee_opt: f64,
    pub method: OptMethod,
    /// Number of objective evaluations performed by the search itself.
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
    /// False when no grid point satisfied the coverage constraints; the
    /// reported point is then the least-violating one.
    pub feasible: bool,
    /// Set when the bisection bracket comparisons were inconsistent with a
    /// unimodal objective.
    pub non_unimodal: bool,
}

fn rate(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

/// Homogeneous EE: `coverage * log2(1 + gamma) / (p_cm + eta_m p_m)`.
pub fn ee_homogeneous(
    params: &NetworkParams,
    gamma: f64,
    theta_tilt_deg: f64,
    backend: Backend,
) -> Result<f64> {
    let cov = match backend {
        Backend::Exact => coverage_homogeneous(params, gamma, theta_tilt_deg)?,
        Backend::Approx => coverage_homogeneous_approx(params, gamma, theta_tilt_deg)?,
    };
    Ok(cov.value * rate(gamma) / (params.p_cm + params.eta_m * params.p_m))
}

/// Homogeneous EE of a no-3D-beamforming baseline.
pub fn ee_2dbf(
    params: &NetworkParams,
    gamma: f64,
    baseline: Baseline2d,
    backend: Backend,
) -> Result<f64> {
    match baseline {
        Baseline2d::ZeroTilt => ee_homogeneous(params, gamma, 0.0, backend),
        Baseline2d::OmniVertical => {
            let mut flat = params.clone();
            flat.vertical = VerticalPattern::omni();
            ee_homogeneous(&flat, gamma, 0.0, backend)
        }
    }
}

/// Two-tier EE from already-computed tier coverages.
pub fn ee_from_coverages(
    params: &NetworkParams,
    gamma_m: f64,
    gamma_f: f64,
    macro_cov: f64,
    femto_cov: f64,
) -> f64 {
    let numer =
        params.lambda_m * macro_cov * rate(gamma_m) + params.lambda_f * femto_cov * rate(gamma_f);
    numer / params.power_density()
}

/// Two-tier EE: density-weighted tier rates over the area power density.
pub fn ee_hetnet(
    params: &NetworkParams,
    gamma_m: f64,
    gamma_f: f64,
    theta_tilt_deg: f64,
    r_c: f64,
    backend: Backend,
) -> Result<f64> {
    let (pm, pf) = hetnet_coverages(params, gamma_m, gamma_f, theta_tilt_deg, r_c, backend)?;
    Ok(ee_from_coverages(params, gamma_m, gamma_f, pm, pf))
}

fn hetnet_coverages(
    params: &NetworkParams,
    gamma_m: f64,
    gamma_f: f64,
    theta_tilt_deg: f64,
    r_c: f64,
    backend: Backend,
) -> Result<(f64, f64)> {
    match backend {
        Backend::Exact => {
            let pm = coverage_macro_hetnet(params, gamma_m, theta_tilt_deg, r_c)?.value;
            let pf = coverage_femto(params, gamma_f, theta_tilt_deg, r_c)?.value;
            Ok((pm, pf))
        }
        Backend::Approx => {
            let (pm, pf) = coverage_hetnet_approx(params, gamma_m, gamma_f, theta_tilt_deg, r_c)?;
            Ok((pm.value, pf.value))
        }
    }
}

fn grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step).ceil() as usize;
    let mut points: Vec<f64> = (0..=n).map(|i| (min + i as f64 * step).min(max)).collect();
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    points
}

/// Exhaustive tilt search on the exact backend.
pub fn optimize_tilt_exhaustive(
    params: &NetworkParams,
    gamma: f64,
    grid_step_deg: f64,
    range: Option<TiltRange>,
) -> Result<OptimizationOutcome> {
    if !(grid_step_deg > 0.0) {
        return Err(Error::domain("grid step must be positive"));
    }
    let range = range.unwrap_or_else(TiltRange::full);
    let thetas = grid(range.min_deg, range.max_deg, grid_step_deg);
    let evals: Vec<(f64, f64)> = thetas
        .par_iter()
        .map(|&theta| Ok((theta, ee_homogeneous(params, gamma, theta, Backend::Exact)?)))
        .collect::<Result<_>>()?;
    let trace: Vec<TracePoint> = evals
        .iter()
        .map(|&(theta_deg, objective)| TracePoint {
            theta_deg,
            r_c: None,
            objective,
            macro_cov: None,
            femto_cov: None,
            feasible: true,
        })
        .collect();
    let best = evals
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("grid is nonempty");
    Ok(OptimizationOutcome {
        theta_opt_deg: best.0,
        r_c_opt: None,
        ee_opt: best.1,
        method: OptMethod::Exhaustive,
        evaluations: evals.len(),
        trace,
        feasible: true,
        non_unimodal: false,
    })
}

/// Bisection-style tilt search on the Taylor backend within the dense-mode
/// tilt range.
///
/// Each step evaluates the objective at the bracket midpoint and moves the
/// lower edge up when the midpoint improves on it, otherwise pulls the upper
/// edge down; the midpoint of the final bracket is returned. Inconsistent
/// comparisons (a discarded candidate beating the final incumbent) set the
/// `non_unimodal` flag but still return the result.
pub fn optimize_tilt_bisection(
    params: &NetworkParams,
    gamma: f64,
    tol_deg: f64,
) -> Result<OptimizationOutcome> {
    if !(tol_deg > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let range = tilt_range(params, 0.1, RangeMode::Dense)?;
    let mut lo = range.min_deg;
    let mut hi = range.max_deg;
    let objective = |theta: f64| ee_homogeneous(params, gamma, theta, Backend::Approx);

    let mut trace = Vec::new();
    let mut f_lo = objective(lo)?;
    let mut evaluations = 1usize;
    trace.push(TracePoint {
        theta_deg: lo,
        r_c: None,
        objective: f_lo,
        macro_cov: None,
        femto_cov: None,
        feasible: true,
    });
    while hi - lo > tol_deg {
        let mid = 0.5 * (lo + hi);
        let f_mid = objective(mid)?;
        evaluations += 1;
        trace.push(TracePoint {
            theta_deg: mid,
            r_c: None,
            objective: f_mid,
            macro_cov: None,
            femto_cov: None,
            feasible: true,
        });
        if f_mid > f_lo {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let theta_opt = 0.5 * (lo + hi);
    let best_traced = trace
        .iter()
        .map(|t| t.objective)
        .fold(f64::NEG_INFINITY, f64::max);
    let non_unimodal = best_traced > f_lo * (1.0 + 1e-9) + 1e-15;
    let ee_opt = ee_homogeneous(params, gamma, theta_opt, Backend::Exact)?;
    Ok(OptimizationOutcome {
        theta_opt_deg: theta_opt,
        r_c_opt: None,
        ee_opt,
        method: OptMethod::Bisection,
        evaluations,
        trace,
        feasible: true,
        non_unimodal,
    })
}

/// Joint tilt / sleep-radius grid search for the two-tier network under
/// per-tier coverage constraints `P_m >= 1 - eps_m`, `P_f >= 1 - eps_f`.
///
/// Infeasibility is a result, not an error: the outcome then carries the
/// least-violating grid point with `feasible = false`.
#[allow(clippy::too_many_arguments)]
pub fn optimize_hetnet_joint(
    params: &NetworkParams,
    gamma_m: f64,
    gamma_f: f64,
    eps_m: f64,
    eps_f: f64,
    theta_step_deg: f64,
    r_c_step: f64,
    backend: Backend,
    range: Option<TiltRange>,
) -> Result<OptimizationOutcome> {
    for (name, eps) in [("eps_m", eps_m), ("eps_f", eps_f)] {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("{name} must lie in (0, 1)")));
        }
    }
    if !(theta_step_deg > 0.0 && r_c_step > 0.0) {
        return Err(Error::domain("grid steps must be positive"));
    }
    let range = range.unwrap_or_else(TiltRange::full);
    let thetas = grid(range.min_deg, range.max_deg, theta_step_deg);
    let rcs = grid(0.0, params.r_c_max(), r_c_step);
    let mut candidates = Vec::with_capacity(thetas.len() * rcs.len());
    for &theta in &thetas {
        for &rc in &rcs {
            candidates.push((theta, rc));
        }
    }
    let trace: Vec<TracePoint> = candidates
        .par_iter()
        .map(|&(theta, rc)| {
            let (pm, pf) = hetnet_coverages(params, gamma_m, gamma_f, theta, rc, backend)?;
            let ee = ee_from_coverages(params, gamma_m, gamma_f, pm, pf);
            Ok(TracePoint {
                theta_deg: theta,
                r_c: Some(rc),
                objective: ee,
                macro_cov: Some(pm),
                femto_cov: Some(pf),
                feasible: pm >= 1.0 - eps_m && pf >= 1.0 - eps_f,
            })
        })
        .collect::<Result<_>>()?;

    let best_feasible = trace
        .iter()
        .filter(|t| t.feasible)
        .max_by(|a, b| a.objective.partial_cmp(&b.objective).unwrap());
    let chosen = match best_feasible {
        Some(t) => t,
        None => {
            // Report the point closest to feasibility.
            trace
                .iter()
                .min_by(|a, b| {
                    let va = constraint_violation(a, eps_m, eps_f);
                    let vb = constraint_violation(b, eps_m, eps_f);
                    va.partial_cmp(&vb).unwrap()
                })
                .expect("grid is nonempty")
        }
    };
    Ok(OptimizationOutcome {
        theta_opt_deg: chosen.theta_deg,
        r_c_opt: chosen.r_c,
        ee_opt: chosen.objective,
        method: match backend {
            Backend::Exact => OptMethod::Exhaustive,
            Backend::Approx => OptMethod::ApproxGrid,
        },
        evaluations: trace.len(),
        feasible: chosen.feasible,
        non_unimodal: false,
        trace,
    })
}

fn constraint_violation(t: &TracePoint, eps_m: f64, eps_f: f64) -> f64 {
    let vm = (1.0 - eps_m - t.macro_cov.unwrap_or(0.0)).max(0.0);
    let vf = (1.0 - eps_f - t.femto_cov.unwrap_or(0.0)).max(0.0);
    vm.max(vf)
}
