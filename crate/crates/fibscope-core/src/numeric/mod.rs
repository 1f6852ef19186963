//! Numerical engine: rank computation, Newton sampling of Milnor sets,
//! asymptotic-set estimation, and critical-point probes.

pub mod asymptotic;
pub mod cluster;
pub mod k0;
pub mod kinf;
pub mod newton;
pub mod rank;
pub mod rng;
pub mod tangent;

pub use asymptotic::{
    estimate_asymptotic_set, estimate_asymptotic_with_cloud, AsymptoticReport, RadiusSchedule,
    Verdict,
};
pub use cluster::Cluster;
pub use k0::{k0_probe, K0Report, K0Verdict};
pub use kinf::{estimate_kinf, estimate_kinf_with_cloud};
pub use newton::{newton_on_milnor, CloudMeta, NewtonParams, SampleCloud};
pub use rank::{complex_rank, complex_sigma_min, numerical_rank, numerical_rank_row_normalized};
pub use tangent::tangent_cone_directions;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("the Milnor equation is identically zero for this weight choice")]
    IdenticallyZero,
    #[error("sampling starved at radius {radius}: no Milnor-set point found on the sphere")]
    Starved { radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Milnor(#[from] crate::milnor::MilnorError),
}
