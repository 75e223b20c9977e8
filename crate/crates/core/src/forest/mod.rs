//! Cylindric Poisson trees, the sliced forest and its planar companion.

pub mod cpt;
pub mod laws;
pub mod planar;
pub mod schedule;
pub mod skorokhod;
pub mod sliced;
pub mod tail;

pub use cpt::{measure_diffusivity, sample_cpt, CptSample, DiffusivityEstimate};
pub use laws::{mu_eval, MixedLaw, Which};
pub use planar::{planar_delta, planar_delta_lambda};
pub use schedule::{build_schedule, IntensitySpec, SliceSchedule};
pub use skorokhod::{skorokhod_step, SkorokhodStep};
pub use sliced::{sample_increment, sample_sliced_forest, SliceForest};
pub use tail::{coalescence_tail, Model, TailCurve};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("distance must be positive and finite, got {0}")]
    BadDistance(f64),
    #[error("intensity must be positive and finite, got {0}")]
    BadIntensity(f64),
    #[error("schedule has no slice {0}")]
    ShortSchedule(usize),
    #[error("strip half-width must lie in (0, 1/2], got {0}")]
    BadRadius(f64),
    #[error("invalid window")]
    BadWindow,
}
