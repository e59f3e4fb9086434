//! Analytic SINR coverage probabilities.
//!
//! Homogeneous scenario: the typical user associates with the macro BS of
//! highest average received power; coverage integrates the Nakagami kernel of
//! [`crate::laplace`] against the serving-distance density. The two-tier
//! scenario adds a femto interference field thinned by the sleep regions
//! (approximated analytically as an independent thinning of density
//! `lambda_f e^{-pi lambda_m r_c^2}`), the femto-user coverage with its
//! `exp(-pi lambda_m r_c^2)` serving-FBS-active prefactor, a closed-form
//! lower bound for the femto user, and single-point Taylor approximations of
//! all of the above evaluated at the mean serving distance.

use crate::distance::{EquivalentDistanceMap, ServingDistanceDist};
use crate::error::{Error, Result};
use crate::laplace::{BlockageWeight, ExponentTerm, FieldGroup, LaplaceExponent};
use crate::params::NetworkParams;
use crate::special;

use std::f64::consts::PI;

/// Provenance of a coverage number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageMethod {
    ExactAnalytic,
    TaylorApprox,
    LowerBound,
    MonteCarlo,
}

/// Coverage probability with provenance.
#[derive(Debug, Clone, Copy)]
pub struct CoverageResult {
    pub value: f64,
    pub method: CoverageMethod,
    /// Zero for analytic results.
    pub ci95_halfwidth: f64,
}

impl CoverageResult {
    fn analytic(value: f64, method: CoverageMethod) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            method,
            ci95_halfwidth: 0.0,
        }
    }
}

/// Relative tolerance of the outer serving-distance integral.
const OUTER_RTOL: f64 = 1e-6;
/// Relative tolerance of the interference quadratures.
const INNER_RTOL: f64 = 1e-8;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!(
            "SINR threshold must be positive and finite, got {gamma}"
        )));
    }
    Ok(())
}

fn check_r_c(params: &NetworkParams, r_c: f64) -> Result<()> {
    let max = params.r_c_max();
    if !(r_c >= 0.0 && r_c <= max * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "sleep radius r_c = {r_c} outside [0, r_c_max = {max:.3}]"
        )));
    }
    Ok(())
}

/// Blockage-split macro interference field seen from an equivalent serving
/// distance `rho_eq`: LOS population beyond `rho_eq`, NLOS population beyond
/// `R_eq^{-1}(rho_eq)`.
fn mbs_split_terms(params: &NetworkParams, rho_eq: f64) -> [ExponentTerm; 2] {
    let pl = &params.path_loss;
    let map = EquivalentDistanceMap::from_path_loss(pl);
    let beta = pl.beta_blockage;
    let m = params.fading.nakagami_m;
    let los = FieldGroup::from_gain_dist(
        params.lambda_m,
        &params.macro_gain,
        params.p_m * pl.c_los,
        pl.alpha_los,
        m,
        rho_eq,
        BlockageWeight::Los { beta },
        Some(params.vertical),
    );
    let nlos = FieldGroup::from_gain_dist(
        params.lambda_m,
        &params.macro_gain,
        params.p_m * pl.c_nlos,
        pl.alpha_nlos,
        m,
        map.from_equivalent(rho_eq),
        BlockageWeight::NlosComplement { beta },
        Some(params.vertical),
    );
    [ExponentTerm::Field(los), ExponentTerm::Field(nlos)]
}

/// Closed-form exponent of the FBS -> macro-user interference: active femto
/// tier (thinned density), always NLOS through one wall, Rayleigh fading, no
/// exclusion radius.
fn fbs_to_macro_term(params: &NetworkParams, r_c: f64) -> ExponentTerm {
    let pl = &params.path_loss;
    let alpha = pl.alpha_nlos;
    let k = PI / (alpha * (2.0 * PI / alpha).sin());
    let strength = params.p_f * params.ell_w * pl.c_nlos;
    let scale = 2.0
        * PI
        * params.lambda_f_thinned(r_c)
        * k
        * strength.powf(2.0 / alpha)
        * params.cross_fm_gain.moment(2.0 / alpha);
    ExponentTerm::PowerLaw {
        scale,
        power: 2.0 / alpha,
    }
}

/// MBS -> femto-user interference: always NLOS through one wall, Rayleigh
/// fading, tilt-dependent vertical pattern, integrated from zero.
fn mbs_to_femto_term(params: &NetworkParams) -> ExponentTerm {
    let pl = &params.path_loss;
    ExponentTerm::Field(FieldGroup::from_gain_dist(
        params.lambda_m,
        &params.cross_mf_gain,
        params.p_m * params.ell_w * pl.c_nlos,
        pl.alpha_nlos,
        1,
        0.0,
        BlockageWeight::Always,
        Some(params.vertical),
    ))
}

/// FBS -> femto-user interference: active femto tier beyond the serving
/// distance, NLOS through two walls, Rayleigh fading, no vertical pattern.
fn fbs_to_femto_term(params: &NetworkParams, r_c: f64, lower: f64) -> ExponentTerm {
    let pl = &params.path_loss;
    ExponentTerm::Field(FieldGroup::from_gain_dist(
        params.lambda_f_thinned(r_c),
        &params.femto_gain,
        params.p_f * params.ell_w * params.ell_w * pl.c_nlos,
        pl.alpha_nlos,
        1,
        lower,
        BlockageWeight::Always,
        None,
    ))
}

fn noise_term(params: &NetworkParams) -> Option<ExponentTerm> {
    (params.sigma2 > 0.0).then_some(ExponentTerm::Linear {
        rate: params.sigma2,
    })
}

/// Conditional macro coverage at equivalent serving distance `rho`, with the
/// optional femto tier folded into the Laplace exponent.
fn macro_conditional(
    params: &NetworkParams,
    gamma: f64,
    theta_tilt_deg: f64,
    rho: f64,
    femto_tier: Option<f64>,
) -> Result<f64> {
    let pl = &params.path_loss;
    let d0 = params.macro_gain.aligned_gain();
    let g0 = params.vertical.gain_linear(rho, theta_tilt_deg);
    let s = gamma * rho.powf(pl.alpha_los) / (params.p_m * pl.c_los * d0 * g0);
    let mut exponent = LaplaceExponent::new().with_rtol(INNER_RTOL);
    for term in mbs_split_terms(params, rho) {
        exponent.push(term);
    }
    if let Some(r_c) = femto_tier {
        if params.lambda_f > 0.0 {
            exponent.push(fbs_to_macro_term(params, r_c));
        }
    }
    if let Some(noise) = noise_term(params) {
        exponent.push(noise);
    }
    exponent.nakagami_coverage(params.fading.nakagami_m, s, theta_tilt_deg)
}

/// Coverage probability of the typical user in the homogeneous macro network.
pub fn coverage_homogeneous(
    params: &NetworkParams,
    gamma: f64,
    theta_tilt_deg: f64,
) -> Result<CoverageResult> {
    check_gamma(gamma)?;
    params.validate()?;
    let dist = ServingDistanceDist::for_params(params)?;
    let value = dist.expectation(
        |rho| macro_conditional(params, gamma, theta_tilt_deg, rho, None),
        OUTER_RTOL,
    )?;
    Ok(CoverageResult::analytic(
        value,
        CoverageMethod::ExactAnalytic,
    ))
}

/// Single-point Taylor approximation of the homogeneous coverage: the
/// conditional kernel evaluated once at the mean serving distance.
pub fn coverage_homogeneous_approx(
    params: &NetworkParams,
    gamma: f64,
    theta_tilt_deg: f64,
) -> Result<CoverageResult> {
    check_gamma(gamma)?;
    params.validate()?;
    let dist = ServingDistanceDist::for_params(params)?;
    let value = macro_conditional(params, gamma, theta_tilt_deg, dist.mean(), None)?;
    Ok(CoverageResult::analytic(
        value,
        CoverageMethod::TaylorApprox,
    ))
}

/// Coverage probability of the typical macro user in the two-tier network
/// with sleep radius `r_c` around each macro BS.
pub fn coverage_macro_hetnet(
    params: &NetworkParams,
    gamma_m: f64,
    theta_tilt_deg: f64,
    r_c: f64,
) -> Result<CoverageResult> {
    check_gamma(gamma_m)?;
    check_r_c(params, r_c)?;
    params.validate()?;
    let dist = ServingDistanceDist::for_params(params)?;
    let value = dist.expectation(
        |rho| macro_conditional(params, gamma_m, theta_tilt_deg, rho, Some(r_c)),
        OUTER_RTOL,
    )?;
    Ok(CoverageResult::analytic(
        value,
        CoverageMethod::ExactAnalytic,
    ))
}

/// Coverage probability of the typical femto user: serving FBS active with
/// probability `exp(-pi lambda_m r_c^2)`, conditional coverage integrated
/// over the in-cell distance law `2 rho / r_f^2`.
pub fn coverage_femto(
    params: &NetworkParams,
    gamma_f: f64,
    theta_tilt_deg: f64,
    r_c: f64,
) -> Result<CoverageResult> {
    check_gamma(gamma_f)?;
    check_r_c(params, r_c)?;
    params.validate()?;
    let prefactor = (-PI * params.lambda_m * r_c * r_c).exp();
    let mut failure: Option<Error> = None;
    let conditional = crate::quad::integrate(
        |rho| {
            if rho <= 0.0 {
                return 0.0;
            }
            match femto_conditional(params, gamma_f, theta_tilt_deg, r_c, rho) {
                Ok(v) => v * crate::distance::femto_distance_pdf(rho, params.r_f),
                Err(e) => {
                    if failure.is_none() {
                        failure = Some(e);
                    }
                    0.0
                }
            }
        },
        0.0,
        params.r_f,
        OUTER_RTOL,
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CoverageResult::analytic(
        prefactor * conditional,
        CoverageMethod::ExactAnalytic,
    ))
}

fn femto_conditional(
    params: &NetworkParams,
    gamma_f: f64,
    theta_tilt_deg: f64,
    r_c: f64,
    rho: f64,
) -> Result<f64> {
    let pl = &params.path_loss;
    let d0f = params.femto_gain.aligned_gain();
    let s_f = gamma_f * rho.powf(pl.alpha_los) / (params.p_f * pl.c_los * d0f);
    let mut exponent = LaplaceExponent::new()
        .with_rtol(INNER_RTOL)
        .with_term(mbs_to_femto_term(params));
    if params.lambda_f > 0.0 {
        exponent.push(fbs_to_femto_term(params, r_c, rho));
    }
    if let Some(noise) = noise_term(params) {
        exponent.push(noise);
    }
    exponent.nakagami_coverage(1, s_f, theta_tilt_deg)
}

/// Closed-form lower bound on the femto coverage in the interference-limited
/// regime: the macro pattern is replaced by its maximum and the femto
/// exclusion radius dropped, which collapses both Laplace transforms to
/// `exp(-(C1 + C2) rho^{2 alpha_L / alpha_N})` and the in-cell integral to an
/// incomplete gamma function.
pub fn coverage_femto_lower_bound(
    params: &NetworkParams,
    gamma_f: f64,
    r_c: f64,
) -> Result<CoverageResult> {
    check_gamma(gamma_f)?;
    check_r_c(params, r_c)?;
    params.validate()?;
    let pl = &params.path_loss;
    let (a_l, a_n) = (pl.alpha_los, pl.alpha_nlos);
    let k = PI / (a_n * (2.0 * PI / a_n).sin());
    let d0f = params.femto_gain.aligned_gain();
    let g_max = 1.0;
    let c1 = 2.0
        * PI
        * params.lambda_m
        * (gamma_f * params.p_m * params.ell_w * pl.c_nlos * g_max / (params.p_f * pl.c_los * d0f))
            .powf(2.0 / a_n)
        * k
        * params.cross_mf_gain.moment(2.0 / a_n);
    let c2 = 2.0
        * PI
        * params.lambda_f_thinned(r_c)
        * (gamma_f * params.ell_w * params.ell_w * pl.c_nlos / (pl.c_los * d0f)).powf(2.0 / a_n)
        * k
        * params.femto_gain.moment(2.0 / a_n);
    let c = c1 + c2;
    let shape = a_n / a_l;
    let x = c * params.r_f.powf(2.0 * a_l / a_n);
    let c0 = shape * special::lower_gamma(shape, x)? / (params.r_f * params.r_f * c.powf(shape));
    let value = c0 * (-PI * params.lambda_m * r_c * r_c).exp();
    Ok(CoverageResult::analytic(value, CoverageMethod::LowerBound))
}

/// Single-point Taylor approximations of the two-tier coverage pair.
///
/// The macro kernel is evaluated at the mean serving distance; the femto
/// kernel at the mean in-cell distance `2 r_f / 3`, with the thinned femto
/// field excluded inside that same radius.
pub fn coverage_hetnet_approx(
    params: &NetworkParams,
    gamma_m: f64,
    gamma_f: f64,
    theta_tilt_deg: f64,
    r_c: f64,
) -> Result<(CoverageResult, CoverageResult)> {
    check_gamma(gamma_m)?;
    check_gamma(gamma_f)?;
    check_r_c(params, r_c)?;
    params.validate()?;
    let dist = ServingDistanceDist::for_params(params)?;
    let macro_value = macro_conditional(params, gamma_m, theta_tilt_deg, dist.mean(), Some(r_c))?;

    let g_bar = 2.0 * params.r_f / 3.0;
    let femto_cond = femto_conditional(params, gamma_f, theta_tilt_deg, r_c, g_bar)?;
    let femto_value = (-PI * params.lambda_m * r_c * r_c).exp() * femto_cond;
    Ok((
        CoverageResult::analytic(macro_value, CoverageMethod::TaylorApprox),
        CoverageResult::analytic(femto_value, CoverageMethod::TaylorApprox),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{FadingModel, PathLossModel, SectorPattern, VerticalPattern};

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    #[test]
    fn coverage_tends_to_one_at_vanishing_threshold() {
        let params = NetworkParams::default();
        let c = coverage_homogeneous(&params, 1e-9, 5.0).unwrap();
        assert!(c.value > 0.999, "got {}", c.value);
    }

    #[test]
    fn coverage_monotone_in_threshold() {
        let params = NetworkParams::default();
        let mut prev = 1.0;
        for g_db in [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0] {
            let c = coverage_homogeneous(&params, db(g_db), 5.0).unwrap().value;
            assert!(c <= prev + 1e-9, "gamma {g_db} dB: {c} > {prev}");
            assert!((0.0..=1.0).contains(&c));
            prev = c;
        }
    }

    #[test]
    fn coverage_monotone_in_noise_and_serving_power() {
        let mut params = NetworkParams::default();
        params.fading = FadingModel { nakagami_m: 2 };
        let base = coverage_homogeneous(&params, 1.0, 5.0).unwrap().value;
        params.sigma2 = 1e-9;
        let noisy = coverage_homogeneous(&params, 1.0, 5.0).unwrap().value;
        assert!(noisy <= base + 1e-9);
        // Raising only the serving power with noise present helps.
        let mut strong = params.clone();
        strong.p_m *= 4.0;
        let s = coverage_homogeneous(&strong, 1.0, 5.0).unwrap().value;
        assert!(s >= noisy - 1e-9);
    }

    #[test]
    fn hetnet_macro_reduces_to_homogeneous_without_femto_tier() {
        let params = NetworkParams::default();
        let hom = coverage_homogeneous(&params, 2.0, 7.0).unwrap().value;
        let het = coverage_macro_hetnet(&params, 2.0, 7.0, 40.0)
            .unwrap()
            .value;
        assert!(
            (hom - het).abs() < 1e-12,
            "lambda_f = 0 must collapse exactly: {hom} vs {het}"
        );
    }

    #[test]
    fn macro_coverage_nondecreasing_in_sleep_radius() {
        let mut params = NetworkParams::default();
        params.lambda_f = 10.0 * params.lambda_m;
        let low = coverage_macro_hetnet(&params, 2.0, 7.0, 0.0).unwrap().value;
        let high = coverage_macro_hetnet(&params, 2.0, 7.0, params.r_c_max())
            .unwrap()
            .value;
        assert!(high >= low, "{high} < {low}");
        assert!(coverage_macro_hetnet(&params, 2.0, 7.0, 1e9).is_err());
    }

    #[test]
    fn femto_limits_and_prefactor() {
        let mut params = NetworkParams::default();
        params.lambda_f = 10.0 * params.lambda_m;
        params.sigma2 = 0.0;
        // Vanishing threshold: conditional coverage -> 1, total -> prefactor.
        let r_c = params.r_c_max();
        let c = coverage_femto(&params, 1e-12, 5.0, r_c).unwrap().value;
        let prefactor = (-1.0f64).exp();
        assert!(
            (c - prefactor).abs() < 1e-3,
            "expected ~e^-1 = {prefactor}, got {c}"
        );
    }

    #[test]
    fn femto_coverage_decreasing_in_sleep_radius_and_macro_density() {
        let mut params = NetworkParams::default();
        params.lambda_f = 10.0 * params.lambda_m;
        params.sigma2 = 5e-4;
        let g = db(10.0);
        let c0 = coverage_femto(&params, g, 5.0, 0.0).unwrap().value;
        let c1 = coverage_femto(&params, g, 5.0, 40.0).unwrap().value;
        let c2 = coverage_femto(&params, g, 5.0, 79.0).unwrap().value;
        assert!(c0 >= c1 && c1 >= c2, "{c0}, {c1}, {c2}");

        let mut denser = params.clone();
        denser.lambda_m *= 2.0;
        let cd = coverage_femto(&denser, g, 5.0, 0.0).unwrap().value;
        assert!(cd <= c0 + 1e-9);
    }

    #[test]
    fn femto_lower_bound_is_a_bound() {
        let mut params = NetworkParams::default();
        params.lambda_f = 10.0 * params.lambda_m;
        params.sigma2 = 0.0;
        for g_db in [-5.0, 0.0, 10.0] {
            for r_c in [0.0, 40.0, 79.9] {
                let exact = coverage_femto(&params, db(g_db), 5.0, r_c).unwrap().value;
                let bound = coverage_femto_lower_bound(&params, db(g_db), r_c)
                    .unwrap()
                    .value;
                assert!(
                    bound <= exact + 1e-9,
                    "gamma {g_db} dB, r_c {r_c}: bound {bound} > exact {exact}"
                );
            }
        }
    }

    #[test]
    fn pattern_max_substitution_matches_closed_form() {
        // Replacing the vertical pattern by its maximum makes the macro->femto
        // field integrable in closed form; the quadrature must agree.
        let params = NetworkParams::default();
        let pl = &params.path_loss;
        let field = FieldGroup::from_gain_dist(
            params.lambda_m,
            &params.cross_mf_gain,
            params.p_m * params.ell_w * pl.c_nlos,
            pl.alpha_nlos,
            1,
            0.0,
            BlockageWeight::Always,
            None,
        );
        let via_quad = LaplaceExponent::new()
            .with_rtol(1e-10)
            .with_term(ExponentTerm::Field(field));
        let a_n = pl.alpha_nlos;
        let k = PI / (a_n * (2.0 * PI / a_n).sin());
        let strength = params.p_m * params.ell_w * pl.c_nlos;
        let scale = 2.0
            * PI
            * params.lambda_m
            * k
            * strength.powf(2.0 / a_n)
            * params.cross_mf_gain.moment(2.0 / a_n);
        let closed = LaplaceExponent::new().with_term(ExponentTerm::PowerLaw {
            scale,
            power: 2.0 / a_n,
        });
        for z in [1e5, 1e7, 1e9] {
            let q = via_quad.value(z, 0.0).unwrap();
            let c = closed.value(z, 0.0).unwrap();
            assert!((q - c).abs() < 1e-6 * c, "z = {z}: {q} vs {c}");
        }
    }

    #[test]
    fn classical_no_blockage_reduction() {
        // beta -> 0, equal exponents alpha = 4, omni vertical pattern,
        // deterministic horizontal gain, Rayleigh fading, no noise: nearest-BS
        // coverage has the textbook closed form
        // 1 / (1 + sqrt(g) (pi/2 - atan(1/sqrt(g)))).
        let sector = SectorPattern::new(5.0, 5.0, 360.0).unwrap();
        let gain = crate::params::HorizontalGainDist::from_patterns(&sector, &sector).unwrap();
        let params = NetworkParams {
            lambda_m: 4.973e-5,
            macro_gain: gain,
            path_loss: PathLossModel {
                c_los: 7.24e-7,
                c_nlos: 7.24e-7,
                alpha_los: 4.0,
                alpha_nlos: 4.0,
                beta_blockage: 1e-9,
            },
            vertical: VerticalPattern::omni(),
            sigma2: 0.0,
            ..NetworkParams::default()
        };
        for gamma in [0.5, 1.0, 4.0, 10.0] {
            let got = coverage_homogeneous(&params, gamma, 0.0).unwrap().value;
            let root = gamma.sqrt();
            let expect = 1.0 / (1.0 + root * (PI / 2.0 - (1.0 / root).atan()));
            assert!(
                (got - expect).abs() < 1e-4,
                "gamma = {gamma}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn taylor_approx_close_in_dense_networks() {
        // The single-point evaluation is accurate where the conditional
        // kernel is close to linear across the serving-distance spread; at
        // zero tilt the vertical gain varies slowly there.
        let mut params = NetworkParams::default();
        params.lambda_m = 8e-4;
        let gamma = 1.0;
        let exact = coverage_homogeneous(&params, gamma, 0.0).unwrap().value;
        let approx = coverage_homogeneous_approx(&params, gamma, 0.0)
            .unwrap()
            .value;
        assert!(
            (exact - approx).abs() < 0.02,
            "dense-network Taylor gap: exact {exact}, approx {approx}"
        );

        // In sparse networks the serving distances map to a narrow band of
        // depression angles and the kernel stays accurate across the whole
        // reduced tilt range.
        let mut sparse = NetworkParams::default();
        sparse.lambda_m = 5.093e-6;
        for tilt in [0.0, 1.3, 4.0, 9.0] {
            let exact = coverage_homogeneous(&sparse, gamma, tilt).unwrap().value;
            let approx = coverage_homogeneous_approx(&sparse, gamma, tilt)
                .unwrap()
                .value;
            assert!(
                (exact - approx).abs() < 0.03,
                "tilt {tilt}: exact {exact}, approx {approx}"
            );
        }
    }

    #[test]
    fn hetnet_approx_reduces_and_tracks_exact() {
        let mut params = NetworkParams::default();
        params.lambda_f = 10.0 * params.lambda_m;
        params.sigma2 = 5e-4;
        let (m_approx, f_approx) =
            coverage_hetnet_approx(&params, db(10.0), db(10.0), 5.0, 40.0).unwrap();
        assert_eq!(m_approx.method, CoverageMethod::TaylorApprox);
        let f_exact = coverage_femto(&params, db(10.0), 5.0, 40.0).unwrap().value;
        assert!(
            (f_approx.value - f_exact).abs() < 0.05,
            "femto approx {} vs exact {f_exact}",
            f_approx.value
        );

        // lambda_f = 0: the macro part must equal the homogeneous approximation.
        let hom = NetworkParams::default();
        let (m0, _) = coverage_hetnet_approx(&hom, db(10.0), db(10.0), 5.0, 0.0).unwrap();
        let href = coverage_homogeneous_approx(&hom, db(10.0), 5.0).unwrap();
        assert!((m0.value - href.value).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let params = NetworkParams::default();
        assert!(coverage_homogeneous(&params, 0.0, 5.0).is_err());
        assert!(coverage_homogeneous(&params, -1.0, 5.0).is_err());
        assert!(coverage_femto(&params, 1.0, 5.0, -1.0).is_err());
    }
}
