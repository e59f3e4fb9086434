//! Sweep axis handling: a closed set of variables, each mapping a grid value
//! onto the resolved parameter set or the run-level thresholds.

use clap::ValueEnum;
use tiltnet_core::{Config, NetworkParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    /// SINR threshold in dB (applies to every tier).
    GammaDb,
    /// Common tilt angle in degrees.
    ThetaTiltDeg,
    /// Sleep-region radius in meters.
    #[value(name = "r-c-m")]
    RCM,
    /// Macro BS density in 1/m^2.
    LambdaM,
    /// Femto BS density in 1/m^2.
    LambdaF,
    /// Blockage intensity in 1/m.
    Beta,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::GammaDb => "gamma_db",
            SweepVar::ThetaTiltDeg => "theta_tilt_deg",
            SweepVar::RCM => "r_c_m",
            SweepVar::LambdaM => "lambda_m",
            SweepVar::LambdaF => "lambda_f",
            SweepVar::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(var: SweepVar, start: f64, stop: f64, steps: usize) -> Result<Self, CliError> {
        if steps < 2 {
            return Err(CliError::Usage("sweep needs at least 2 steps".into()));
        }
        if !(start < stop) {
            return Err(CliError::Usage(format!(
                "sweep start {start} must be below stop {stop}"
            )));
        }
        Ok(Self {
            var,
            start,
            stop,
            steps,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Run-level knobs a sweep point can touch.
#[derive(Debug, Clone, Copy)]
pub struct RunPoint {
    pub gamma: f64,
    pub gamma_m: f64,
    pub gamma_f: f64,
    pub theta_tilt_deg: f64,
    pub r_c: f64,
}

impl RunPoint {
    pub fn from_config(config: &Config) -> Self {
        let db = |x: f64| 10f64.powf(x / 10.0);
        Self {
            gamma: db(config.run.gamma_db),
            gamma_m: db(config.run.gamma_m_db),
            gamma_f: db(config.run.gamma_f_db),
            theta_tilt_deg: config.run.theta_tilt_deg,
            r_c: config.run.r_c_m,
        }
    }
}

/// Apply one grid value, returning the adjusted parameters and run point.
pub fn apply(
    params: &NetworkParams,
    point: &RunPoint,
    var: SweepVar,
    x: f64,
) -> Result<(NetworkParams, RunPoint), CliError> {
    let mut params = params.clone();
    let mut point = *point;
    match var {
        SweepVar::GammaDb => {
            let g = 10f64.powf(x / 10.0);
            point.gamma = g;
            point.gamma_m = g;
            point.gamma_f = g;
        }
        SweepVar::ThetaTiltDeg => point.theta_tilt_deg = x,
        SweepVar::RCM => point.r_c = x,
        SweepVar::LambdaM => params.lambda_m = x,
        SweepVar::LambdaF => params.lambda_f = x,
        SweepVar::Beta => params.path_loss.beta_blockage = x,
    }
    params.validate().map_err(CliError::usage)?;
    Ok((params, point))
}
