//! Coalescing path webs on the cylinder `R/Z x R`.
//!
//! Discrete lattice webs with exact enumeration oracles, coalescing Brownian
//! motions modulo 1, the reflected bi-infinite pair, homogeneous and sliced
//! Poisson trees, and the closed-form laws that go with them.
//!
//! Geometry and closed-form evaluators are generic over [`Real`] (`f32`/`f64`);
//! the Monte Carlo engines run in `f64`. Exact laws use [`Prob`] rationals.

pub mod continuum;
pub mod export;
pub mod forest;
pub mod geometry;
pub mod lattice;
pub mod quad;
pub mod seed;
pub mod stats;
pub mod unionfind;
pub mod verify;

mod scalar;

pub use scalar::Real;

/// Exact probabilities for the lattice enumeration (denominators are powers of two).
pub type Prob = num_rational::Ratio<i64>;

pub type CirclePos64 = geometry::CirclePos<f64>;
pub type CirclePos32 = geometry::CirclePos<f32>;
pub type CylPoint64 = geometry::CylPoint<f64>;
pub type CylPoint32 = geometry::CylPoint<f32>;
pub type Arc64 = geometry::Arc<f64>;
pub type RadialPoint64 = geometry::RadialPoint<f64>;
pub type WindingFn64 = geometry::WindingFn<f64>;
pub type DeltaLaw64 = forest::laws::DeltaLaw<f64>;
pub type AuxLaw64 = forest::laws::AuxLaw<f64>;
pub type LawSpec64 = forest::laws::LawSpec<f64>;

/// Outcome of a stopping time that may hit the simulation budget.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Censorable<T> {
    Value(T),
    Censored { cap: T },
}

impl<T: Copy> Censorable<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Censorable::Value(v) => Some(*v),
            Censorable::Censored { .. } => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, Censorable::Censored { .. })
    }

    /// The value, or the cap for censored runs.
    pub fn value_or_cap(&self) -> T {
        match self {
            Censorable::Value(v) | Censorable::Censored { cap: v } => *v,
        }
    }
}
