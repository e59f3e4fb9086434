//! Blockage-aware serving-distance distribution under maximum average
//! received power association.
//!
//! Association is reduced to a nearest-point rule by mapping every NLOS base
//! station at distance `r` to an equivalent LOS one at
//! `R_eq(r) = (C_L/C_N)^{1/alpha_L} r^{alpha_N/alpha_L}`. The serving
//! "distance" `R` is then the minimum equivalent distance over the process,
//! and its CCDF factors into the void probabilities of the LOS and NLOS
//! populations.

use crate::error::{Error, Result};
use crate::params::{NetworkParams, PathLossModel};
use crate::quad;

/// Bijection between actual NLOS distances and equivalent LOS distances.
#[derive(Debug, Clone, Copy)]
pub struct EquivalentDistanceMap {
    /// Inverse-map scale: `R_eq^{-1}(r) = mu * r^kappa`.
    mu: f64,
    /// Exponent `alpha_L / alpha_N`, in (0, 1].
    kappa: f64,
}

impl EquivalentDistanceMap {
    pub fn from_path_loss(model: &PathLossModel) -> Self {
        Self {
            mu: (model.c_nlos / model.c_los).powf(1.0 / model.alpha_nlos),
            kappa: model.alpha_los / model.alpha_nlos,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Equivalent LOS distance of an NLOS base station at distance `r`.
    pub fn to_equivalent(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return 0.0;
        }
        (r / self.mu).powf(1.0 / self.kappa)
    }

    /// Radius of the NLOS ball whose points have equivalent distance <= `r`:
    /// `R_eq^{-1}(r) = mu * r^kappa`.
    pub fn from_equivalent(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        self.mu * r.powf(self.kappa)
    }
}

/// `f(x) = 1 - (1 + x) e^{-x}`, evaluated stably near zero.
fn one_minus_one_plus_x_exp(x: f64) -> f64 {
    if x < 0.1 {
        // sum_{n>=2} (-1)^n (n-1)/n! x^n
        let mut pow = x * x;
        let mut fact = 2.0;
        let mut sum = 0.0;
        let mut sign = 1.0;
        for n in 2..20 {
            let term = sign * (n as f64 - 1.0) / fact * pow;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            pow *= x;
            fact *= (n + 1) as f64;
            sign = -sign;
        }
        sum
    } else {
        1.0 - (1.0 + x) * (-x).exp()
    }
}

/// `g(x) = x^2/2 - f(x)`, stable against the cancellation at small `x`.
fn half_square_minus_f(x: f64) -> f64 {
    if x < 0.5 {
        // sum_{n>=3} (-1)^{n+1} (n-1)/n! x^n
        let mut pow = x * x * x;
        let mut fact = 6.0;
        let mut sum = 0.0;
        let mut sign = 1.0;
        for n in 3..26 {
            let term = sign * (n as f64 - 1.0) / fact * pow;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            pow *= x;
            fact *= (n + 1) as f64;
            sign = -sign;
        }
        sum
    } else {
        0.5 * x * x - one_minus_one_plus_x_exp(x)
    }
}

/// Distribution of the serving equivalent distance.
///
/// Immutable after construction; the mean and the working truncation radius
/// are computed eagerly so that evaluation methods are pure and cheap.
#[derive(Debug, Clone)]
pub struct ServingDistanceDist {
    lambda_m: f64,
    beta: f64,
    map: EquivalentDistanceMap,
    mean: f64,
    truncation_radius: f64,
}

impl ServingDistanceDist {
    pub fn new(lambda_m: f64, model: &PathLossModel) -> Result<Self> {
        if !(lambda_m > 0.0) {
            return Err(Error::domain("lambda_m must be positive"));
        }
        model.validate()?;
        let mut dist = Self {
            lambda_m,
            beta: model.beta_blockage,
            map: EquivalentDistanceMap::from_path_loss(model),
            mean: f64::NAN,
            truncation_radius: f64::NAN,
        };
        dist.truncation_radius = dist.inverse_ccdf(1e-6);
        dist.mean = dist.expectation(|r| Ok(r), 1e-9)?;
        Ok(dist)
    }

    pub fn for_params(params: &NetworkParams) -> Result<Self> {
        Self::new(params.lambda_m, &params.path_loss)
    }

    pub fn map(&self) -> &EquivalentDistanceMap {
        &self.map
    }

    /// `Pr{R > r}`: product of the LOS void probability over `B(0, r)` and
    /// the NLOS void probability over `B(0, R_eq^{-1}(r))`.
    pub fn ccdf(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r <= 0.0 {
            return 1.0;
        }
        let two_pi_l = 2.0 * std::f64::consts::PI * self.lambda_m;
        let u = self.map.from_equivalent(r);
        let los = two_pi_l / (self.beta * self.beta) * one_minus_one_plus_x_exp(self.beta * r);
        let nlos = two_pi_l / (self.beta * self.beta) * half_square_minus_f(self.beta * u);
        (-los - nlos).exp()
    }

    pub fn cdf(&self, r: f64) -> f64 {
        1.0 - self.ccdf(r)
    }

    /// Serving-distance density `f_R(r)`, the negative derivative of the CCDF.
    pub fn pdf(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!(
                "pdf requires r > 0 (the r^(2 kappa - 1) factor may be singular at 0), got {r}"
            )));
        }
        Ok(self.pdf_unchecked(r))
    }

    fn pdf_unchecked(&self, r: f64) -> f64 {
        let two_pi_l = 2.0 * std::f64::consts::PI * self.lambda_m;
        let (mu, kappa) = (self.map.mu(), self.map.kappa());
        let u = self.map.from_equivalent(r);
        let los_term = r * (-self.beta * r).exp();
        let nlos_term = mu * mu * kappa * r.powf(2.0 * kappa - 1.0) * (-(-self.beta * u).exp_m1());
        two_pi_l * (los_term + nlos_term) * self.ccdf(r)
    }

    /// Mean serving distance `E[R]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Radius beyond which less than 1e-6 of the probability mass remains;
    /// outer integrals over the serving distance stop here.
    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// Inverse CCDF by bisection on a geometrically grown bracket.
    pub fn inverse_ccdf(&self, target: f64) -> f64 {
        debug_assert!(target > 0.0 && target < 1.0);
        let mut hi = 1.0 / (std::f64::consts::PI * self.lambda_m).sqrt();
        let mut grow = 0;
        while self.ccdf(hi) >= target * 0.25 && grow < 200 {
            hi *= 2.0;
            grow += 1;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if self.ccdf(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Quantile bounds `(rho0, rho1)` with `Pr{rho0 <= R <= rho1} >= 1 - eps`.
    pub fn quantile_bounds(&self, epsilon: f64) -> Result<(f64, f64)> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::domain(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let rho0 = self.inverse_ccdf(1.0 - epsilon / 2.0);
        let rho1 = self.inverse_ccdf(epsilon / 2.0);
        Ok((rho0, rho1))
    }

    /// `E[g(R)] = integral g(r) f_R(r) dr`, splitting the singular density
    /// factor off on the inner `[0, 1]` meter panel.
    ///
    /// The integrand may fail (e.g. nested quadrature); the first error wins.
    pub fn expectation<F: FnMut(f64) -> Result<f64>>(&self, mut g: F, rtol: f64) -> Result<f64> {
        let mut failure: Option<Error> = None;
        let two_pi_l = 2.0 * std::f64::consts::PI * self.lambda_m;
        let (mu, kappa) = (self.map.mu(), self.map.kappa());
        let knee = 1.0f64.min(self.truncation_radius);

        // Inner panel, LOS part of the density: smooth.
        let eval = |r: f64, g: &mut F, failure: &mut Option<Error>| match g(r) {
            Ok(v) => v,
            Err(e) => {
                if failure.is_none() {
                    *failure = Some(e);
                }
                0.0
            }
        };
        let inner_los = quad::integrate_with_knots(
            |r| {
                let v = eval(r, &mut g, &mut failure);
                two_pi_l * r * (-self.beta * r).exp() * self.ccdf(r) * v
            },
            0.0,
            knee,
            &[],
            rtol,
            512,
        )?
        .value;
        if let Some(e) = failure.take() {
            return Err(e);
        }

        // Inner panel, NLOS part: weight r^{2 kappa - 1} handled exactly.
        let inner_nlos = quad::integrate_power_weighted(
            |r| {
                if r == 0.0 {
                    return 0.0;
                }
                let v = eval(r, &mut g, &mut failure);
                let u = self.map.from_equivalent(r);
                two_pi_l * mu * mu * kappa * (-(-self.beta * u).exp_m1()) * self.ccdf(r) * v
            },
            2.0 * kappa - 1.0,
            knee,
            rtol,
        )?
        .value;
        if let Some(e) = failure.take() {
            return Err(e);
        }

        // Outer panel up to the certified truncation radius.
        let outer = if self.truncation_radius > knee {
            quad::integrate_with_knots(
                |r| {
                    let v = eval(r, &mut g, &mut failure);
                    self.pdf_unchecked(r) * v
                },
                knee,
                self.truncation_radius,
                &[self.mean],
                rtol,
                512,
            )?
            .value
        } else {
            0.0
        };
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(inner_los + inner_nlos + outer)
    }
}

/// Density of the femto user's distance to its serving FBS: `2 rho / r_f^2`
/// on `[0, r_f]`, zero outside.
pub fn femto_distance_pdf(rho: f64, r_f: f64) -> f64 {
    debug_assert!(r_f > 0.0);
    if rho < 0.0 || rho > r_f {
        return 0.0;
    }
    2.0 * rho / (r_f * r_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NetworkParams;

    fn default_model() -> PathLossModel {
        NetworkParams::default().path_loss
    }

    fn default_dist() -> ServingDistanceDist {
        ServingDistanceDist::new(4.973e-5, &default_model()).unwrap()
    }

    #[test]
    fn equivalent_map_identity_when_models_match() {
        let m = PathLossModel::new(1.0, 1.0, 3.0, 3.0, 0.003).unwrap();
        let map = EquivalentDistanceMap::from_path_loss(&m);
        for r in [0.0, 1.0, 17.3, 500.0] {
            assert!((map.to_equivalent(r) - r).abs() < 1e-12 * (1.0 + r));
            assert!((map.from_equivalent(r) - r).abs() < 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn equivalent_map_closed_form_and_roundtrip() {
        let m = PathLossModel::new(1.0, 1.0, 2.5, 4.0, 0.003).unwrap();
        let map = EquivalentDistanceMap::from_path_loss(&m);
        assert!((map.to_equivalent(10.0) - 10f64.powf(1.6)).abs() < 1e-9);
        assert_eq!(map.to_equivalent(0.0), 0.0);

        let m = PathLossModel::new(2e-7, 9e-7, 2.3, 3.7, 0.004).unwrap();
        let map = EquivalentDistanceMap::from_path_loss(&m);
        for r in [0.01, 1.0, 42.0, 3000.0] {
            let back = map.from_equivalent(map.to_equivalent(r));
            assert!(
                (back - r).abs() < 1e-9 * (1.0 + r),
                "r = {r}, back = {back}"
            );
        }
    }

    #[test]
    fn ccdf_endpoints_and_monotonicity() {
        let d = default_dist();
        assert_eq!(d.ccdf(0.0), 1.0);
        let mut prev = 1.0;
        for i in 1..200 {
            let c = d.ccdf(i as f64 * 5.0);
            assert!(c <= prev + 1e-15);
            prev = c;
        }
        assert!(d.ccdf(5000.0) < 1e-9);
    }

    #[test]
    fn ccdf_all_nlos_limit() {
        // Heavy blockage: the LOS population is empty and the CCDF collapses
        // to the plain void probability in the remapped coordinate.
        let m = PathLossModel::new(1e-6, 1e-6, 2.5, 4.0, 100.0).unwrap();
        let d = ServingDistanceDist::new(4.973e-5, &m).unwrap();
        for r in [10.0, 50.0, 200.0] {
            let u = d.map().from_equivalent(r);
            let expect = (-std::f64::consts::PI * 4.973e-5 * u * u).exp();
            let got = d.ccdf(r);
            assert!(
                (got - expect).abs() < 1e-6 * expect,
                "r = {r}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn pdf_is_negative_ccdf_derivative() {
        let d = default_dist();
        for r in [10.0, 50.0, 200.0] {
            let h = r * 1e-3;
            // 5-point stencil derivative of the CCDF.
            let fd = (-d.ccdf(r + 2.0 * h) + 8.0 * d.ccdf(r + h) - 8.0 * d.ccdf(r - h)
                + d.ccdf(r - 2.0 * h))
                / (12.0 * h);
            let pdf = d.pdf(r).unwrap();
            assert!(
                (pdf + fd).abs() < 1e-6 * pdf.abs(),
                "r = {r}: pdf {pdf} vs -dccdf {}",
                -fd
            );
        }
        assert!(d.pdf(0.0).is_err());
        assert!(d.pdf(-4.0).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        let d = default_dist();
        let total = d.expectation(|_| Ok(1.0), 1e-9).unwrap();
        assert!((total - 1.0).abs() < 1e-4, "normalization {total}");

        // Different intercepts exercise the mu != 1 branch of the density.
        let m = PathLossModel::new(7.2e-7, 3.8e-6, 2.5, 4.0, 0.006).unwrap();
        let d = ServingDistanceDist::new(2e-4, &m).unwrap();
        let total = d.expectation(|_| Ok(1.0), 1e-9).unwrap();
        assert!((total - 1.0).abs() < 1e-4, "normalization {total}");
    }

    #[test]
    fn fundamental_theorem_on_a_grid() {
        let d = default_dist();
        // integral_a^b f_R = CCDF(a) - CCDF(b) on a dense grid.
        let grid: Vec<f64> = (0..=20).map(|i| 10.0 + 15.0 * i as f64).collect();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mass = quad::integrate(|r| d.pdf_unchecked(r), a, b, 1e-10)
                .unwrap()
                .value;
            let delta = d.ccdf(a) - d.ccdf(b);
            assert!((mass - delta).abs() < 1e-5, "[{a}, {b}]: {mass} vs {delta}");
        }
    }

    #[test]
    fn mean_all_los_limit_and_density_scaling() {
        // Nearly no blockage: mean tends to the classic 1/(2 sqrt(lambda)).
        let m = PathLossModel::new(1e-6, 1e-6, 2.5, 4.0, 1e-9).unwrap();
        for lambda in [1e-5, 1e-4] {
            let d = ServingDistanceDist::new(lambda, &m).unwrap();
            let expect = 0.5 / lambda.sqrt();
            assert!(
                (d.mean() - expect).abs() < 1e-3 * expect,
                "lambda = {lambda}: {} vs {expect}",
                d.mean()
            );
        }

        // Mean decreases with density.
        let model = default_model();
        let mut prev = f64::INFINITY;
        for lambda in [1e-6, 1e-5, 1e-4, 1e-3] {
            let d = ServingDistanceDist::new(lambda, &model).unwrap();
            assert!(d.mean() < prev);
            prev = d.mean();
        }
    }

    #[test]
    fn quantile_bounds_cover_and_bracket_mean() {
        let d = default_dist();
        for eps in [0.05, 0.1, 0.3, 0.5] {
            let (rho0, rho1) = d.quantile_bounds(eps).unwrap();
            assert!(rho0 < rho1);
            let mass = d.cdf(rho1) - d.cdf(rho0);
            assert!(mass >= 1.0 - eps - 1e-6, "eps = {eps}: mass {mass}");
            assert!(rho0 < d.mean() && d.mean() < rho1, "eps = {eps}");
        }
        // Degenerate interval around the median as eps -> 1.
        let (rho0, rho1) = d.quantile_bounds(0.999).unwrap();
        let median = d.inverse_ccdf(0.5);
        assert!((rho1 - rho0) < 0.02 * median);
        assert!(rho0 <= median + 1e-3 && median <= rho1 + 1e-3);

        assert!(d.quantile_bounds(0.0).is_err());
        assert!(d.quantile_bounds(1.0).is_err());
    }

    #[test]
    fn blockage_limits_collapse_to_rayleigh_law() {
        let lambda = 4.973e-5;
        // beta -> 0: classic Rayleigh-distance pdf in r.
        let m = PathLossModel::new(1e-6, 1e-6, 2.5, 4.0, 1e-10).unwrap();
        let d = ServingDistanceDist::new(lambda, &m).unwrap();
        for r in [20.0, 70.0, 150.0] {
            let classic = 2.0
                * std::f64::consts::PI
                * lambda
                * r
                * (-std::f64::consts::PI * lambda * r * r).exp();
            let got = d.pdf(r).unwrap();
            assert!(
                (got - classic).abs() < 1e-6 * classic,
                "beta->0, r = {r}: {got} vs {classic}"
            );
        }
        // beta -> inf: Rayleigh law in the remapped coordinate u = mu r^kappa.
        let m = PathLossModel::new(1e-6, 1e-6, 2.5, 4.0, 1000.0).unwrap();
        let d = ServingDistanceDist::new(lambda, &m).unwrap();
        let map = *d.map();
        for r in [20.0, 70.0, 150.0] {
            let u = map.from_equivalent(r);
            let du_dr = map.mu() * map.kappa() * r.powf(map.kappa() - 1.0);
            let classic = 2.0
                * std::f64::consts::PI
                * lambda
                * u
                * (-std::f64::consts::PI * lambda * u * u).exp()
                * du_dr;
            let got = d.pdf(r).unwrap();
            assert!(
                (got - classic).abs() < 1e-6 * classic,
                "beta->inf, r = {r}: {got} vs {classic}"
            );
        }
    }

    #[test]
    fn mean_matches_layer_cake_identity() {
        // Independent route: E[R] = integral_0^inf CCDF(r) dr.
        let d = default_dist();
        let layer = quad::integrate(|r| d.ccdf(r), 0.0, d.truncation_radius(), 1e-10)
            .unwrap()
            .value;
        assert!(
            (d.mean() - layer).abs() < 1e-5 * layer,
            "{} vs {layer}",
            d.mean()
        );
    }

    #[test]
    fn femto_pdf_properties() {
        let r_f = 30.0;
        let total = quad::integrate(|x| femto_distance_pdf(x, r_f), 0.0, r_f, 1e-12)
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-12);
        let mean = quad::integrate(|x| x * femto_distance_pdf(x, r_f), 0.0, r_f, 1e-12)
            .unwrap()
            .value;
        assert!((mean - 20.0).abs() < 1e-10);
        assert!((femto_distance_pdf(r_f, r_f) - 2.0 / r_f).abs() < 1e-15);
        assert_eq!(femto_distance_pdf(-1.0, r_f), 0.0);
        assert_eq!(femto_distance_pdf(31.0, r_f), 0.0);
    }
}
