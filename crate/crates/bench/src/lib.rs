//! Shared fixtures for the benchmark targets.

use tiltnet_core::params::FadingModel;
use tiltnet_core::NetworkParams;

/// Baseline parameters with the given Nakagami order.
pub fn params(m: u32) -> NetworkParams {
    let mut p = NetworkParams::default();
    p.fading = FadingModel { nakagami_m: m };
    p
}

/// Two-tier variant: ten femtocells per macro cell.
pub fn hetnet_params(m: u32) -> NetworkParams {
    let mut p = params(m);
    p.lambda_f = 10.0 * p.lambda_m;
    p
}
