//! Structured key-value configuration: flat TOML sections per model type,
//! every field defaulted, resolved into a validated [`NetworkParams`].

use crate::error::{Error, Result};
use crate::params::{
    FadingModel, HorizontalGainDist, NetworkParams, PathLossModel, SectorPattern, VerticalPattern,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda_m: f64,
    pub lambda_f: f64,
    pub p_m: f64,
    pub p_f: f64,
    pub p_cm: f64,
    pub p_cf: f64,
    pub eta_m: f64,
    pub eta_f: f64,
    pub sigma2: f64,
    pub ell_w: f64,
    pub r_f: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let p = NetworkParams::default();
        Self {
            lambda_m: p.lambda_m,
            lambda_f: p.lambda_f,
            p_m: p.p_m,
            p_f: p.p_f,
            p_cm: p.p_cm,
            p_cf: p.p_cf,
            eta_m: p.eta_m,
            eta_f: p.eta_f,
            sigma2: p.sigma2,
            ell_w: p.ell_w,
            r_f: p.r_f,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossSection {
    pub c_los: f64,
    pub c_nlos: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta: f64,
}

impl Default for PathLossSection {
    fn default() -> Self {
        let m = NetworkParams::default().path_loss;
        Self {
            c_los: m.c_los,
            c_nlos: m.c_nlos,
            alpha_los: m.alpha_los,
            alpha_nlos: m.alpha_nlos,
            beta: m.beta_blockage,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VerticalSection {
    pub theta_3db_deg: f64,
    pub sll_db: f64,
    pub h_eff_m: f64,
}

impl Default for VerticalSection {
    fn default() -> Self {
        let v = NetworkParams::default().vertical;
        Self {
            theta_3db_deg: v.theta_3db,
            sll_db: v.sll_db,
            h_eff_m: v.h_eff,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FadingSection {
    pub nakagami_m: u32,
}

impl Default for FadingSection {
    fn default() -> Self {
        Self { nakagami_m: 1 }
    }
}

/// Transmitter/receiver sectorized pattern pair; gains in dB.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GainSection {
    pub tx_main_db: f64,
    pub tx_side_db: f64,
    pub tx_beamwidth_deg: f64,
    pub rx_main_db: f64,
    pub rx_side_db: f64,
    pub rx_beamwidth_deg: f64,
}

impl Default for GainSection {
    fn default() -> Self {
        Self {
            tx_main_db: 10.0,
            tx_side_db: -10.0,
            tx_beamwidth_deg: 30.0,
            rx_main_db: 10.0,
            rx_side_db: -10.0,
            rx_beamwidth_deg: 90.0,
        }
    }
}

impl GainSection {
    fn resolve(&self) -> Result<HorizontalGainDist> {
        let tx = SectorPattern::new(self.tx_main_db, self.tx_side_db, self.tx_beamwidth_deg)?;
        let rx = SectorPattern::new(self.rx_main_db, self.rx_side_db, self.rx_beamwidth_deg)?;
        HorizontalGainDist::from_patterns(&tx, &rx)
    }
}

/// Run-level knobs consumed by the CLI: thresholds in dB, default tilt and
/// sleep radius, constraint epsilons, Monte Carlo size and seeding.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub gamma_db: f64,
    pub gamma_m_db: f64,
    pub gamma_f_db: f64,
    pub theta_tilt_deg: f64,
    pub r_c_m: f64,
    pub epsilon: f64,
    pub eps_m: f64,
    pub eps_f: f64,
    pub seed: u64,
    pub n_drops: usize,
    /// Zero selects the certified default window.
    pub window_radius_m: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            gamma_db: 0.0,
            gamma_m_db: 10.0,
            gamma_f_db: 10.0,
            theta_tilt_deg: 0.0,
            r_c_m: 0.0,
            epsilon: 0.1,
            eps_m: 0.2,
            eps_f: 0.7,
            seed: 12345,
            n_drops: 10_000,
            window_radius_m: 0.0,
        }
    }
}

/// Full configuration file: flat sections per model type, all optional.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub network: NetworkSection,
    pub path_loss: PathLossSection,
    pub vertical: VerticalSection,
    pub fading: FadingSection,
    pub macro_gain: GainSection,
    pub femto_gain: GainSection,
    pub cross_fm_gain: GainSection,
    pub cross_mf_gain: GainSection,
    pub run: RunSection,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Apply a `section.key=value` override onto the serialized form.
    pub fn with_override(&self, dotted_key: &str, raw_value: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::Table::try_from(self.clone()).map_err(|e| Error::Config(e.to_string()))?;
        let (section, key) = dotted_key.split_once('.').ok_or_else(|| {
            Error::Config(format!(
                "override key must be section.key, got {dotted_key}"
            ))
        })?;
        let value = parse_toml_scalar(raw_value);
        let entry = table
            .get_mut(section)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| Error::Config(format!("unknown config section {section}")))?;
        if !entry.contains_key(key) {
            return Err(Error::Config(format!("unknown key {section}.{key}")));
        }
        entry.insert(key.to_string(), value);
        table
            .try_into()
            .map_err(|e| Error::Config(format!("override {dotted_key}: {e}")))
    }

    /// Canonical serialized form, used for hashing and report headers.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Resolve and validate into the physical parameter set.
    pub fn to_params(&self) -> Result<NetworkParams> {
        let params = NetworkParams {
            lambda_m: self.network.lambda_m,
            lambda_f: self.network.lambda_f,
            p_m: self.network.p_m,
            p_f: self.network.p_f,
            p_cm: self.network.p_cm,
            p_cf: self.network.p_cf,
            eta_m: self.network.eta_m,
            eta_f: self.network.eta_f,
            sigma2: self.network.sigma2,
            ell_w: self.network.ell_w,
            r_f: self.network.r_f,
            macro_gain: self.macro_gain.resolve()?,
            femto_gain: self.femto_gain.resolve()?,
            cross_fm_gain: self.cross_fm_gain.resolve()?,
            cross_mf_gain: self.cross_mf_gain.resolve()?,
            path_loss: PathLossModel::new(
                self.path_loss.c_los,
                self.path_loss.c_nlos,
                self.path_loss.alpha_los,
                self.path_loss.alpha_nlos,
                self.path_loss.beta,
            )?,
            vertical: VerticalPattern::new(
                self.vertical.theta_3db_deg,
                self.vertical.sll_db,
                self.vertical.h_eff_m,
            )?,
            fading: FadingModel::new(self.fading.nakagami_m)?,
        };
        params.validate()?;
        Ok(params)
    }
}

fn parse_toml_scalar(raw: &str) -> toml::Value {
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    toml::Value::String(raw.to_string())
}
