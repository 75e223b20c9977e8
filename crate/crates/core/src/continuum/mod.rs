//! Coalescing Brownian motions modulo 1, the reflected pair, and closed forms
//! for coalescence times.

pub mod bundle;
pub mod formulas;
pub mod reflected;
pub mod system;

pub use bundle::{eta_counts, sample_bundle_with, sample_coalescing_bundle, PathBundle};
pub use formulas::{fulmek_survival, laplace_t2to1, pair_survival_series, theta_kernel};
pub use reflected::{biinfinite_ladder, sample_reflected_pair, LadderSample, ReflectedPair};
pub use system::{pair_coalescence_time, CoalescingSystem, Topology};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuumError {
    #[error("time must be positive and finite, got {0}")]
    BadTime(f64),
    #[error("theta must be negative, got {0}")]
    BadTheta(f64),
    #[error("angles must be strictly increasing in [0, 1)")]
    UnsortedAngles,
    #[error("need at least two walkers, got {0}")]
    TooFewWalkers(usize),
    #[error("invalid time grid")]
    BadGrid,
    #[error("time {0} is not a grid point")]
    TimeOutsideGrid(f64),
    #[error("time {0} was not recorded")]
    NotRecorded(f64),
    #[error("duplicate start ({0}, {1})")]
    DuplicateStart(f64, f64),
}

/// Uniform grid `t0 + i dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, steps: usize) -> Result<Self, ContinuumError> {
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(ContinuumError::BadGrid);
        }
        Ok(TimeGrid { t0, dt, steps })
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.steps)
    }

    /// Index of the grid point at `t`, to within a millionth of a step.
    pub fn index_of(&self, t: f64) -> Result<usize, ContinuumError> {
        let u = (t - self.t0) / self.dt;
        let i = u.round();
        if (u - i).abs() > 1e-6 || i < 0.0 || i > self.steps as f64 {
            return Err(ContinuumError::TimeOutsideGrid(t));
        }
        Ok(i as usize)
    }
}
