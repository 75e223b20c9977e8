//! Cylindric lattice web on `Z/2n x Z`, its dual, the exact pair law and the
//! reflected-walk representation of the bi-infinite pair.

pub mod biinfinite;
pub mod coalesce;
pub mod enumerate;
pub mod field;
pub mod kernel;
pub mod path;
pub mod reflect;

pub use biinfinite::{extract_biinfinite, BiInfinite};
pub use coalesce::{coalesce_all, coalescence_time_pair};
pub use enumerate::{contacts, enumerate_pair_law, PairEntry, PairLaw};
pub use field::{sample_field, Environment, ExplicitField, RademacherField};
pub use kernel::{kernel_row, kernel_step, PairState};
pub use path::{rescale_path, trace_path, Direction, LatticePath, LatticeSite, RescaledPath};
pub use reflect::{reflected_walk, ReflectedTrajectory};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("n must be at least 1")]
    ZeroWidth,
    #[error("empty height window [{0}, {1})")]
    EmptyWindow(i64, i64),
    #[error("window holds {sites} sites, above the cap of {cap}")]
    WindowTooLarge { sites: u64, cap: u64 },
    #[error("site ({x}, {t}) has the wrong parity for this lattice")]
    Parity { x: u32, t: i64 },
    #[error("position {x} outside Z/{modulus}")]
    OutOfRange { x: u32, modulus: u32 },
    #[error("enumeration over 2^{0} fields exceeds the cap")]
    EnumerationTooLarge(u64),
    #[error("stop height {stop} is on the wrong side of the start {start}")]
    BadStop { start: i64, stop: i64 },
}

/// `x mod 2n` after a `+-1` step.
#[inline]
pub(crate) fn wrap_step(x: u32, step: i8, modulus: u32) -> u32 {
    if step > 0 {
        if x + 1 == modulus {
            0
        } else {
            x + 1
        }
    } else if x == 0 {
        modulus - 1
    } else {
        x - 1
    }
}

#[inline]
pub(crate) fn is_primal(x: u32, t: i64) -> bool {
    (x as i64 - t).rem_euclid(2) == 0
}
