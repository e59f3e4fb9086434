//! Physical model primitives: path loss with blockage, LOS probability,
//! vertical antenna gain, horizontal gain distributions, Nakagami fading and
//! the full deployment parameter set.

use crate::error::{Error, Result};

/// Propagation condition of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkCondition {
    Los,
    Nlos,
}

/// Dual-slope blockage path-loss model: `C_w * r^{-alpha_w}` with an
/// exponential LOS probability `e^{-beta r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    /// Linear gain at the 1 m reference distance, LOS.
    pub c_los: f64,
    /// Linear gain at the 1 m reference distance, NLOS.
    pub c_nlos: f64,
    /// LOS path-loss exponent.
    pub alpha_los: f64,
    /// NLOS path-loss exponent.
    pub alpha_nlos: f64,
    /// Blockage intensity in 1/m.
    pub beta_blockage: f64,
}

impl PathLossModel {
    pub fn new(
        c_los: f64,
        c_nlos: f64,
        alpha_los: f64,
        alpha_nlos: f64,
        beta_blockage: f64,
    ) -> Result<Self> {
        let model = Self {
            c_los,
            c_nlos,
            alpha_los,
            alpha_nlos,
            beta_blockage,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_los > 0.0 && self.c_nlos > 0.0) {
            return Err(Error::domain("reference gains must be positive"));
        }
        if !(self.alpha_los > 2.0) {
            return Err(Error::domain("alpha_los must exceed 2"));
        }
        if !(self.alpha_nlos >= self.alpha_los) {
            return Err(Error::domain("alpha_nlos must be >= alpha_los"));
        }
        if !(self.beta_blockage > 0.0) {
            return Err(Error::domain("beta_blockage must be positive"));
        }
        Ok(())
    }

    /// Probability that a link of length `r` is LOS: `e^{-beta r}`.
    pub fn los_probability(&self, r: f64) -> Result<f64> {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::domain(format!("distance must be >= 0, got {r}")));
        }
        Ok((-self.beta_blockage * r).exp())
    }

    /// Linear attenuation `C_w * r^{-alpha_w}` for the given condition.
    pub fn attenuation(&self, r: f64, condition: LinkCondition) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!(
                "path loss is singular at the origin; need r > 0, got {r}"
            )));
        }
        Ok(self.coefficient(condition) * r.powf(-self.exponent(condition)))
    }

    pub fn coefficient(&self, condition: LinkCondition) -> f64 {
        match condition {
            LinkCondition::Los => self.c_los,
            LinkCondition::Nlos => self.c_nlos,
        }
    }

    pub fn exponent(&self, condition: LinkCondition) -> f64 {
        match condition {
            LinkCondition::Los => self.alpha_los,
            LinkCondition::Nlos => self.alpha_nlos,
        }
    }
}

/// Two-branch vertical antenna pattern steered by a tilt angle.
///
/// In dB the gain is `-min(12 ((theta - theta_tilt)/theta_3db)^2, sll_db)`
/// where `theta = atan(h_eff / r)` is the depression angle toward a user at
/// horizontal distance `r`. Both angles live in `[0, 90]` degrees, so no
/// wraparound handling is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalPattern {
    /// 3 dB beamwidth in degrees.
    pub theta_3db: f64,
    /// Side-lobe level in dB (positive number; the floor of the pattern).
    pub sll_db: f64,
    /// Effective antenna height (BS height minus user height) in meters.
    pub h_eff: f64,
}

impl VerticalPattern {
    pub fn new(theta_3db: f64, sll_db: f64, h_eff: f64) -> Result<Self> {
        if !(theta_3db > 0.0) {
            return Err(Error::domain("theta_3db must be positive"));
        }
        if !(sll_db > 0.0) {
            return Err(Error::domain("sll_db must be positive"));
        }
        if !(h_eff > 0.0) {
            return Err(Error::domain("h_eff must be positive"));
        }
        Ok(Self {
            theta_3db,
            sll_db,
            h_eff,
        })
    }

    /// Pattern with unit gain everywhere (vertical dimension disabled).
    /// Used for the no-tilt baseline; `sll_db = 0` collapses both branches.
    pub fn omni() -> Self {
        Self {
            theta_3db: 1.0,
            sll_db: 0.0,
            h_eff: 1.0,
        }
    }

    /// Gain in dB toward a user at horizontal distance `r_horizontal`.
    pub fn gain_db(&self, r_horizontal: f64, theta_tilt_deg: f64) -> f64 {
        debug_assert!(r_horizontal > 0.0);
        let theta_deg = (self.h_eff / r_horizontal).atan().to_degrees();
        let off = (theta_deg - theta_tilt_deg) / self.theta_3db;
        -(12.0 * off * off).min(self.sll_db)
    }

    /// Linear gain in `[10^{-sll_db/10}, 1]`.
    pub fn gain_linear(&self, r_horizontal: f64, theta_tilt_deg: f64) -> f64 {
        10f64.powf(self.gain_db(r_horizontal, theta_tilt_deg) / 10.0)
    }

    /// Angular offset `theta_0` (degrees) at which the quadratic branch meets
    /// the side-lobe floor: `theta_3db * sqrt(sll_db / 12)`.
    pub fn theta0_deg(&self) -> f64 {
        self.theta_3db * (self.sll_db / 12.0).sqrt()
    }

    /// Horizontal distance at which the pattern is at boresight for the given
    /// tilt, i.e. `atan(h_eff / r) = theta_tilt`. `None` for zero tilt.
    pub fn boresight_radius(&self, theta_tilt_deg: f64) -> Option<f64> {
        if theta_tilt_deg <= 0.0 {
            return None;
        }
        Some(self.h_eff / theta_tilt_deg.to_radians().tan())
    }

    /// Radii where the pattern switches between the quadratic branch and the
    /// side-lobe floor. The gain is continuous but not smooth there, so
    /// quadrature panels should split at these points.
    pub fn kink_radii(&self, theta_tilt_deg: f64) -> Vec<f64> {
        let mut knots = Vec::with_capacity(2);
        for angle in [
            theta_tilt_deg + self.theta0_deg(),
            theta_tilt_deg - self.theta0_deg(),
        ] {
            if angle > 0.0 && angle < 90.0 {
                knots.push(self.h_eff / angle.to_radians().tan());
            }
        }
        knots
    }
}

/// Sectorized horizontal pattern of one antenna: constant main-lobe and
/// side-lobe gains with a given beamwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPattern {
    pub main_db: f64,
    pub side_db: f64,
    pub beamwidth_deg: f64,
}

impl SectorPattern {
    pub fn new(main_db: f64, side_db: f64, beamwidth_deg: f64) -> Result<Self> {
        if !(beamwidth_deg > 0.0 && beamwidth_deg <= 360.0) {
            return Err(Error::domain(format!(
                "beamwidth must be in (0, 360] degrees, got {beamwidth_deg}"
            )));
        }
        if main_db < side_db {
            return Err(Error::domain("main-lobe gain must be >= side-lobe gain"));
        }
        Ok(Self {
            main_db,
            side_db,
            beamwidth_deg,
        })
    }

    fn main_linear(&self) -> f64 {
        10f64.powf(self.main_db / 10.0)
    }

    fn side_linear(&self) -> f64 {
        10f64.powf(self.side_db / 10.0)
    }

    /// Fraction of directions covered by the main lobe.
    fn main_prob(&self) -> f64 {
        self.beamwidth_deg / 360.0
    }
}

/// Four-point distribution of the combined transmitter/receiver horizontal
/// gain on a randomly oriented link.
///
/// Values are `{M_t M_r, M_t m_r, m_t M_r, m_t m_r}` with probabilities
/// `{c_t c_r, c_t (1-c_r), (1-c_t) c_r, (1-c_t)(1-c_r)}`, `c = beamwidth/360`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizontalGainDist {
    values: [f64; 4],
    probs: [f64; 4],
}

impl HorizontalGainDist {
    /// Build the joint distribution from transmitter and receiver patterns.
    pub fn from_patterns(tx: &SectorPattern, rx: &SectorPattern) -> Result<Self> {
        tx.validate_ref()?;
        rx.validate_ref()?;
        let (mt, st, ct) = (tx.main_linear(), tx.side_linear(), tx.main_prob());
        let (mr, sr, cr) = (rx.main_linear(), rx.side_linear(), rx.main_prob());
        Ok(Self {
            values: [mt * mr, mt * sr, st * mr, st * sr],
            probs: [
                ct * cr,
                ct * (1.0 - cr),
                (1.0 - ct) * cr,
                (1.0 - ct) * (1.0 - cr),
            ],
        })
    }

    pub fn values(&self) -> &[f64; 4] {
        &self.values
    }

    pub fn probs(&self) -> &[f64; 4] {
        &self.probs
    }

    /// Gain of a perfectly aligned link, `M_t * M_r`.
    pub fn aligned_gain(&self) -> f64 {
        self.values[0]
    }

    /// `E[D]`.
    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }

    /// `E[D^p]`.
    pub fn moment(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(d, q)| q * d.powf(p))
            .sum()
    }

    /// Sample a gain value.
    pub fn sample(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            acc += self.probs[i];
            if u < acc {
                return self.values[i];
            }
        }
        self.values[3]
    }
}

impl SectorPattern {
    fn validate_ref(&self) -> Result<()> {
        Self::new(self.main_db, self.side_db, self.beamwidth_deg).map(|_| ())
    }
}

/// Nakagami-m small-scale fading; the fading power is Gamma(m, 1/m).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FadingModel {
    /// Integer shape parameter; `m = 1` is Rayleigh.
    pub nakagami_m: u32,
}

/// Practical cap on the Nakagami order (the derivative machinery is O(m^2)).
pub const MAX_NAKAGAMI_M: u32 = 10;

impl FadingModel {
    pub fn new(nakagami_m: u32) -> Result<Self> {
        if nakagami_m < 1 {
            return Err(Error::domain("nakagami_m must be >= 1"));
        }
        if nakagami_m > MAX_NAKAGAMI_M {
            return Err(Error::Unsupported(format!(
                "nakagami_m = {nakagami_m} exceeds the supported cap of {MAX_NAKAGAMI_M}"
            )));
        }
        Ok(Self { nakagami_m })
    }

    /// CCDF of the fading power: `e^{-mz} sum_{k<m} (mz)^k / k!`.
    ///
    /// Decreasing in `z`, equals 1 at `z = 0`; `m = 1` gives `e^{-z}`.
    pub fn power_ccdf(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        let mz = self.nakagami_m as f64 * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..self.nakagami_m {
            term *= mz / k as f64;
            sum += term;
        }
        (-mz).exp() * sum
    }
}

/// Complete deployment parameter set for both scenarios.
///
/// The femto tier is disabled by setting `lambda_f = 0`.
#[derive(Debug, Clone)]
pub struct NetworkParams {
    /// Macro BS density in 1/m^2.
    pub lambda_m: f64,
    /// Femto BS density in 1/m^2 (zero for the homogeneous scenario).
    pub lambda_f: f64,
    /// Macro transmit power, watts.
    pub p_m: f64,
    /// Femto transmit power, watts.
    pub p_f: f64,
    /// Macro circuit power, watts.
    pub p_cm: f64,
    /// Femto circuit power, watts.
    pub p_cf: f64,
    /// Macro amplifier-efficiency factor.
    pub eta_m: f64,
    /// Femto amplifier-efficiency factor.
    pub eta_f: f64,
    /// Noise power, watts.
    pub sigma2: f64,
    /// Wall attenuation, linear in (0, 1].
    pub ell_w: f64,
    /// Femtocell serving radius, meters.
    pub r_f: f64,
    /// MBS -> macro-user horizontal gain distribution.
    pub macro_gain: HorizontalGainDist,
    /// FBS -> femto-user horizontal gain distribution.
    pub femto_gain: HorizontalGainDist,
    /// FBS -> macro-user (cross-tier) gain distribution.
    pub cross_fm_gain: HorizontalGainDist,
    /// MBS -> femto-user (cross-tier) gain distribution.
    pub cross_mf_gain: HorizontalGainDist,
    pub path_loss: PathLossModel,
    pub vertical: VerticalPattern,
    pub fading: FadingModel,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_m > 0.0) {
            return Err(Error::domain("lambda_m must be positive"));
        }
        if !(self.lambda_f >= 0.0) {
            return Err(Error::domain("lambda_f must be nonnegative"));
        }
        for (name, v) in [
            ("p_m", self.p_m),
            ("p_f", self.p_f),
            ("p_cm", self.p_cm),
            ("p_cf", self.p_cf),
            ("eta_m", self.eta_m),
            ("eta_f", self.eta_f),
            ("r_f", self.r_f),
        ] {
            if !(v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive")));
            }
        }
        if !(self.sigma2 >= 0.0) {
            return Err(Error::domain("sigma2 must be nonnegative"));
        }
        if !(self.ell_w > 0.0 && self.ell_w <= 1.0) {
            return Err(Error::domain("ell_w must lie in (0, 1]"));
        }
        self.path_loss.validate()?;
        Ok(())
    }

    /// Maximum sleep-region radius `1/sqrt(pi lambda_m)`.
    pub fn r_c_max(&self) -> f64 {
        1.0 / (std::f64::consts::PI * self.lambda_m).sqrt()
    }

    /// Density of the femto tier after sleep-region thinning,
    /// `lambda_f * exp(-lambda_m pi r_c^2)`.
    pub fn lambda_f_thinned(&self, r_c: f64) -> f64 {
        self.lambda_f * (-self.lambda_m * std::f64::consts::PI * r_c * r_c).exp()
    }

    /// Area power density denominator of the two-tier EE objective.
    pub fn power_density(&self) -> f64 {
        self.lambda_m * (self.p_cm + self.eta_m * self.p_m)
            + self.lambda_f * (self.p_cf + self.eta_f * self.p_f)
    }
}

impl Default for NetworkParams {
    /// Baseline parameter set used throughout the test suite.
    ///
    /// Deployment constants follow the standard mmWave simulation values:
    /// 20 W / 68.73 W macro power budget with amplifier factor 3.77, 100 mW /
    /// 9.6 W femto budget with factor 4, path-loss exponents 2.5 (LOS) and 4
    /// (NLOS), blockage intensity 0.003 /m, 6 degree vertical beamwidth with a
    /// 20 dB side-lobe floor, and (10 dB, -10 dB) sectorized horizontal
    /// patterns with 30/90 degree beamwidths. Reference intercepts default to
    /// the 28 GHz free-space gain at 1 m (-61.4 dB) and the effective antenna
    /// height to 10 m; both are configurable.
    fn default() -> Self {
        let mbs_tx = SectorPattern {
            main_db: 10.0,
            side_db: -10.0,
            beamwidth_deg: 30.0,
        };
        let user_rx = SectorPattern {
            main_db: 10.0,
            side_db: -10.0,
            beamwidth_deg: 90.0,
        };
        let fbs_tx = mbs_tx;
        let femto_rx = user_rx;
        let gain = |tx: &SectorPattern, rx: &SectorPattern| {
            HorizontalGainDist::from_patterns(tx, rx).expect("default patterns are valid")
        };
        Self {
            lambda_m: 4.973e-5,
            lambda_f: 0.0,
            p_m: 20.0,
            p_f: 0.1,
            p_cm: 68.73,
            p_cf: 9.6,
            eta_m: 3.77,
            eta_f: 4.0,
            sigma2: 0.0,
            ell_w: 0.1,
            r_f: 30.0,
            macro_gain: gain(&mbs_tx, &user_rx),
            femto_gain: gain(&fbs_tx, &femto_rx),
            cross_fm_gain: gain(&fbs_tx, &user_rx),
            cross_mf_gain: gain(&mbs_tx, &femto_rx),
            path_loss: PathLossModel {
                c_los: 10f64.powf(-6.14),
                c_nlos: 10f64.powf(-6.14),
                alpha_los: 2.5,
                alpha_nlos: 4.0,
                beta_blockage: 0.003,
            },
            vertical: VerticalPattern {
                theta_3db: 6.0,
                sll_db: 20.0,
                h_eff: 10.0,
            },
            fading: FadingModel { nakagami_m: 1 },
        }
    }
}
