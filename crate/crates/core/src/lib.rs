//! Sequential Monte Carlo labeled multi-Bernoulli tracking with multi-sensor
//! fusion, where each sensor's contribution is weighted by how far its update
//! moved the prediction.
//!
//! The library is generic over the floating-point type; the aliases at the
//! crate root fix it to `f64`, and the [`single`] module offers `f32` ones.

pub mod assignment;
pub mod error;
pub mod experiment;
pub mod fusion;
pub mod lmb;
pub mod metrics;
pub mod motion;
pub mod rfs;
pub mod scalar;
pub mod sensor;
pub mod truth;

pub use error::{Error, Result};
pub use fusion::{adaptive_weights, bernoulli_csd, estimate, fuse, gci_fuse_component, prune, FusionMode};
pub use lmb::{local_update, predict, UpdateConfig};
pub use metrics::{cardinality_stats, ospa};
pub use rfs::TrackLabel;
pub use scalar::Scalar;

pub type KinematicState = rfs::KinematicState<f64>;
pub type ParticleCloud = rfs::ParticleCloud<f64>;
pub type BernoulliComponent = rfs::BernoulliComponent<f64>;
pub type LmbDensity = rfs::LmbDensity<f64>;
pub type MotionModel = motion::MotionModel<f64>;
pub type BirthModel = motion::BirthModel<f64>;
pub type SensorModel = sensor::SensorModel<f64>;
pub type Measurement = sensor::Measurement<f64>;
pub type GroundTruthScript = truth::GroundTruthScript<f64>;
pub type OspaResult = metrics::OspaResult<f64>;

/// Single-precision aliases.
pub mod single {
    use super::{metrics, motion, rfs, sensor, truth};

    pub type KinematicState = rfs::KinematicState<f32>;
    pub type ParticleCloud = rfs::ParticleCloud<f32>;
    pub type BernoulliComponent = rfs::BernoulliComponent<f32>;
    pub type LmbDensity = rfs::LmbDensity<f32>;
    pub type MotionModel = motion::MotionModel<f32>;
    pub type BirthModel = motion::BirthModel<f32>;
    pub type SensorModel = sensor::SensorModel<f32>;
    pub type Measurement = sensor::Measurement<f32>;
    pub type GroundTruthScript = truth::GroundTruthScript<f32>;
    pub type OspaResult = metrics::OspaResult<f32>;
}
