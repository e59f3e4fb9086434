//! Laplace transforms of aggregate interference and their derivatives.
//!
//! Every interference field seen by a typical user is described by an
//! exponent `A(z)` with `L(z) = E[e^{-z I}] = exp(A(z))`. For a Poisson field
//! of interferers with Nakagami-m fading, horizontal gain `d_i` with
//! probability `p_i`, and per-link factor `u(x) = S d_i G(x) x^{-alpha}`,
//!
//! `A(z) = -sum_i 2 pi lambda p_i int_lower^inf F(z, x) x w(x) dx`,
//! `F(z, x) = 1 - (1 + z u(x)/m)^{-m}`,
//!
//! where `w(x)` is the blockage thinning weight of the population. The
//! derivatives of `F` in `z` have closed form, so `A^{(n)}(z)` is a
//! quadrature with the same geometry for every order; all orders and all four
//! gain values are integrated on one shared adaptive grid. Derivatives of
//! `L = exp(A)` follow from the product-rule recursion
//! `L^{(l)} = sum_j C(l-1, j) A^{(j+1)} L^{(l-1-j)}`.
//!
//! Closed-form exponents cover two special cases: an unshadowed Rayleigh NLOS
//! field integrated from zero (`A = -q z^{2/alpha}`) and the thermal noise
//! factor (`A = -sigma2 z`).

use crate::error::{Error, Result};
use crate::params::{HorizontalGainDist, VerticalPattern, MAX_NAKAGAMI_M};
use crate::quad;

/// Blockage thinning applied to an interfering population.
#[derive(Debug, Clone, Copy)]
pub enum BlockageWeight {
    /// LOS population: weight `e^{-beta x}`.
    Los { beta: f64 },
    /// NLOS population of a blockage-split field: weight `1 - e^{-beta x}`.
    NlosComplement { beta: f64 },
    /// Population that is NLOS (or LOS) by assumption: weight 1.
    Always,
}

impl BlockageWeight {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        match *self {
            BlockageWeight::Los { beta } => (-beta * x).exp(),
            BlockageWeight::NlosComplement { beta } => -(-beta * x).exp_m1(),
            BlockageWeight::Always => 1.0,
        }
    }
}

/// One Poisson interferer population with a four-point horizontal gain law,
/// integrated numerically.
#[derive(Debug, Clone)]
pub struct FieldGroup {
    /// `2 pi lambda p_i` for each gain value.
    pub coeffs: [f64; 4],
    /// Horizontal gain values `d_i`.
    pub gains: [f64; 4],
    /// Distance-independent link strength: transmit power times extra
    /// attenuation times the path-loss coefficient `C_w`.
    pub strength: f64,
    /// Path-loss exponent of this population.
    pub alpha: f64,
    /// Nakagami order of the interferer fading (1 = Rayleigh).
    pub fading_m: u32,
    /// Lower integration limit (exclusion radius in equivalent geometry).
    pub lower: f64,
    pub weight: BlockageWeight,
    /// Vertical pattern applied to the interfering links, if any.
    pub vertical: Option<VerticalPattern>,
}

impl FieldGroup {
    pub fn from_gain_dist(
        density: f64,
        dist: &HorizontalGainDist,
        strength: f64,
        alpha: f64,
        fading_m: u32,
        lower: f64,
        weight: BlockageWeight,
        vertical: Option<VerticalPattern>,
    ) -> Self {
        let two_pi_l = 2.0 * std::f64::consts::PI * density;
        let probs = dist.probs();
        Self {
            coeffs: [
                two_pi_l * probs[0],
                two_pi_l * probs[1],
                two_pi_l * probs[2],
                two_pi_l * probs[3],
            ],
            gains: *dist.values(),
            strength,
            alpha,
            fading_m,
            lower,
            weight,
            vertical,
        }
    }

    /// Accumulate `-A^{(n)}(z)` contributions for `n = 0..=max_order`.
    fn neg_exponent_derivs(
        &self,
        z: f64,
        max_order: usize,
        theta_tilt_deg: f64,
        rtol: f64,
        out: &mut [f64],
    ) -> Result<()> {
        let orders = max_order + 1;
        let m = self.fading_m as f64;
        let m_i = self.fading_m as i32;
        // Rising factorials (m)_n for the closed-form F derivatives.
        let mut rising = vec![1.0f64; orders];
        for n in 1..orders {
            rising[n] = rising[n - 1] * (m + (n - 1) as f64);
        }
        let knots = self
            .vertical
            .as_ref()
            .map(|p| p.kink_radii(theta_tilt_deg))
            .unwrap_or_default();
        let dim = 4 * orders;
        let integrals = quad::integrate_vec_semi_infinite(
            |x, buf| {
                let w = self.weight.eval(x) * x;
                let g = self
                    .vertical
                    .as_ref()
                    .map_or(1.0, |p| p.gain_linear(x, theta_tilt_deg));
                let shared = self.strength * g * x.powf(-self.alpha);
                for (i, &d) in self.gains.iter().enumerate() {
                    let c = shared * d / m;
                    let cz = c * z;
                    let base = 1.0 + cz;
                    // F = 1 - (1+cz)^{-m}, computed without cancellation.
                    buf[i * orders] = -(-m * cz.ln_1p()).exp_m1() * w;
                    let mut cpow = 1.0;
                    let mut sign = 1.0;
                    for n in 1..orders {
                        cpow *= c;
                        buf[i * orders + n] =
                            sign * rising[n] * cpow * base.powi(-(m_i + n as i32)) * w;
                        sign = -sign;
                    }
                }
            },
            dim,
            self.lower,
            &knots,
            rtol,
        )?;
        for i in 0..4 {
            for n in 0..orders {
                // d^n F / dz^n = (-1)^{n+1} (m)_n c^n (1+cz)^{-m-n} for n >= 1;
                // the sign is folded into the integrand, so the accumulation
                // is uniform across orders.
                out[n] += self.coeffs[i] * integrals[i * orders + n];
            }
        }
        Ok(())
    }
}

/// One additive term of the interference exponent `A(z)`.
#[derive(Debug, Clone)]
pub enum ExponentTerm {
    /// Numerically integrated population.
    Field(FieldGroup),
    /// Closed form `A(z) = -scale * z^{power}` (Rayleigh NLOS field with no
    /// pattern integrated from zero).
    PowerLaw { scale: f64, power: f64 },
    /// Thermal-noise factor `A(z) = -rate * z`.
    Linear { rate: f64 },
}

/// Exponent of a Laplace transform of aggregate interference (plus optional
/// noise factor): `L(z) = exp(A(z))`, `A(0) = 0`, `A` decreasing.
#[derive(Debug, Clone, Default)]
pub struct LaplaceExponent {
    terms: Vec<ExponentTerm>,
    rtol: f64,
}

impl LaplaceExponent {
    pub fn new() -> Self {
        Self {
            terms: Vec::new(),
            rtol: 1e-8,
        }
    }

    /// Relative tolerance of the per-term quadratures (default 1e-8).
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn push(&mut self, term: ExponentTerm) {
        self.terms.push(term);
    }

    pub fn with_term(mut self, term: ExponentTerm) -> Self {
        self.push(term);
        self
    }

    /// `[A(z), A'(z), ..., A^{(max_order)}(z)]`.
    pub fn exponent_derivs(
        &self,
        z: f64,
        max_order: usize,
        theta_tilt_deg: f64,
    ) -> Result<Vec<f64>> {
        if z < 0.0 {
            return Err(Error::domain(format!("z must be nonnegative, got {z}")));
        }
        let orders = max_order + 1;
        let mut neg = vec![0.0; orders];
        for term in &self.terms {
            match term {
                ExponentTerm::Field(field) => {
                    if z > 0.0 {
                        field.neg_exponent_derivs(
                            z,
                            max_order,
                            theta_tilt_deg,
                            self.rtol,
                            &mut neg,
                        )?;
                    }
                    // A(0) = 0 and all z-derivative integrands vanish with
                    // F(0, x) = 0 only for the value; derivatives at z = 0
                    // are finite and still need the quadrature.
                    if z == 0.0 && max_order > 0 {
                        field.neg_exponent_derivs(
                            0.0,
                            max_order,
                            theta_tilt_deg,
                            self.rtol,
                            &mut neg,
                        )?;
                    }
                }
                ExponentTerm::PowerLaw { scale, power } => {
                    if z > 0.0 {
                        let mut factor = 1.0;
                        for n in 0..orders {
                            neg[n] += scale * factor * z.powf(power - n as f64);
                            factor *= power - n as f64;
                        }
                    } else if max_order > 0 {
                        return Err(Error::numeric(
                            "power-law exponent derivatives are singular at z = 0",
                        ));
                    }
                }
                ExponentTerm::Linear { rate } => {
                    neg[0] += rate * z;
                    if orders > 1 {
                        neg[1] += *rate;
                    }
                }
            }
        }
        Ok(neg.into_iter().map(|v| -v).collect())
    }

    /// Laplace transform value `exp(A(z))`, in (0, 1].
    pub fn value(&self, z: f64, theta_tilt_deg: f64) -> Result<f64> {
        let a = self.exponent_derivs(z, 0, theta_tilt_deg)?;
        Ok(a[0].exp())
    }

    /// Derivatives `d^l/dz^l exp(A(z))` for `l = 0..=max_order`.
    pub fn transform_derivs(
        &self,
        z: f64,
        max_order: usize,
        theta_tilt_deg: f64,
    ) -> Result<Vec<f64>> {
        if max_order as u32 > MAX_NAKAGAMI_M - 1 {
            return Err(Error::Unsupported(format!(
                "derivative order {max_order} exceeds the cap of {}",
                MAX_NAKAGAMI_M - 1
            )));
        }
        let a = self.exponent_derivs(z, max_order, theta_tilt_deg)?;
        let mut l = vec![0.0; max_order + 1];
        l[0] = a[0].exp();
        for order in 1..=max_order {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..order {
                acc += binom * a[j + 1] * l[order - 1 - j];
                binom *= (order - 1 - j) as f64 / (j + 1) as f64;
            }
            l[order] = acc;
        }
        Ok(l)
    }

    /// Nakagami-m coverage kernel conditioned on the serving distance:
    /// `Pr{h > s (I + noise-in-terms)} = sum_{k<m} (-m s)^k / k! L_tot^{(k)}(m s)`
    /// where this exponent already includes every interference field and the
    /// noise term.
    pub fn nakagami_coverage(&self, serving_m: u32, s: f64, theta_tilt_deg: f64) -> Result<f64> {
        if serving_m < 1 || serving_m > MAX_NAKAGAMI_M {
            return Err(Error::Unsupported(format!(
                "serving Nakagami order {serving_m} outside 1..={MAX_NAKAGAMI_M}"
            )));
        }
        let z = serving_m as f64 * s;
        let l = self.transform_derivs(z, serving_m as usize - 1, theta_tilt_deg)?;
        let mut coef = 1.0;
        let mut sum = 0.0;
        for (k, lk) in l.iter().enumerate() {
            if k > 0 {
                coef *= -z / k as f64;
            }
            sum += coef * lk;
        }
        if !sum.is_finite() {
            return Err(Error::numeric(format!(
                "coverage kernel non-finite at s = {s}"
            )));
        }
        Ok(sum.clamp(0.0, 1.0))
    }
}
