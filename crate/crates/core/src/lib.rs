//! Coverage and energy-efficiency analysis for mmWave cellular networks with
//! three-dimensional beamforming.
//!
//! The crate models a downlink mmWave network whose base stations form a
//! Poisson point process, with exponential blockage splitting links into LOS
//! and NLOS populations, a two-branch vertical antenna pattern steered by a
//! common tilt angle, sectorized horizontal gains, and Nakagami-m small-scale
//! fading. On top of that model it provides:
//!
//! - the blockage-aware serving-distance distribution under max-average-power
//!   association ([`distance`]),
//! - analytic SINR coverage probabilities for a homogeneous macro network and
//!   for a two-tier macro/femto network with sleep regions, via Laplace
//!   transforms of the aggregate interference and their derivatives
//!   ([`laplace`], [`coverage`]),
//! - energy-efficiency objectives and tilt / sleep-radius optimizers,
//!   including a reduced-range bisection search ([`energy`]),
//! - an independent Monte Carlo oracle that simulates the exact point process
//!   and validates every analytic quantity ([`mc`]).
//!
//! Angles are accepted in degrees and gains in dB at every public interface;
//! internally everything is radians and linear. Distances are meters, powers
//! watts.

pub mod config;
pub mod coverage;
pub mod distance;
pub mod energy;
mod error;
pub mod laplace;
pub mod mc;
pub mod params;
pub mod quad;
pub mod special;

pub use config::Config;
pub use coverage::{
    coverage_femto, coverage_femto_lower_bound, coverage_hetnet_approx, coverage_homogeneous,
    coverage_homogeneous_approx, coverage_macro_hetnet, CoverageMethod, CoverageResult,
};
pub use distance::{femto_distance_pdf, EquivalentDistanceMap, ServingDistanceDist};
pub use energy::{
    ee_2dbf, ee_from_coverages, ee_hetnet, ee_homogeneous, optimize_hetnet_joint,
    optimize_tilt_bisection, optimize_tilt_exhaustive, tilt_range, Backend, Baseline2d, OptMethod,
    OptimizationOutcome, RangeMode, TiltRange, TracePoint,
};
pub use error::{Error, Result};
pub use mc::{DropConfig, EmpiricalEstimate};
pub use params::{
    FadingModel, HorizontalGainDist, LinkCondition, NetworkParams, PathLossModel, SectorPattern,
    VerticalPattern,
};
