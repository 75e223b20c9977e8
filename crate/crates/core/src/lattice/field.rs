use super::{is_primal, LatticeError};
use crate::seed::mix3;

/// Source of the Rademacher variables `xi(x, t)` on primal sites.
pub trait Environment {
    /// Half the circumference: positions live in `Z/2n`.
    fn n(&self) -> u32;
    /// `xi` at the primal site `(x, t)`.
    fn xi(&self, x: u32, t: i64) -> i8;

    fn modulus(&self) -> u32 {
        2 * self.n()
    }
}

pub const DEFAULT_SITE_CAP: u64 = 1 << 26;

/// i.i.d. `+-1` field. Values in `[h_lo, h_hi)` are cached; outside the window
/// they come from the same counter-based hash, so the field extends lazily.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RademacherField {
    n: u32,
    h_lo: i64,
    h_hi: i64,
    seed: u64,
    values: Vec<i8>,
}

#[inline]
fn hashed_xi(seed: u64, x: u32, t: i64) -> i8 {
    if mix3(seed, x as u64, t as u64) >> 63 == 0 {
        -1
    } else {
        1
    }
}

pub fn sample_field(n: u32, h_lo: i64, h_hi: i64, seed: u64) -> Result<RademacherField, LatticeError> {
    sample_field_capped(n, h_lo, h_hi, seed, DEFAULT_SITE_CAP)
}

pub fn sample_field_capped(
    n: u32,
    h_lo: i64,
    h_hi: i64,
    seed: u64,
    cap: u64,
) -> Result<RademacherField, LatticeError> {
    if n == 0 {
        return Err(LatticeError::ZeroWidth);
    }
    if h_lo >= h_hi {
        return Err(LatticeError::EmptyWindow(h_lo, h_hi));
    }
    let sites = (h_hi - h_lo) as u64 * n as u64;
    if sites > cap {
        return Err(LatticeError::WindowTooLarge { sites, cap });
    }
    let mut values = Vec::with_capacity(sites as usize);
    for t in h_lo..h_hi {
        let parity = t.rem_euclid(2) as u32;
        for m in 0..n {
            values.push(hashed_xi(seed, 2 * m + parity, t));
        }
    }
    Ok(RademacherField { n, h_lo, h_hi, seed, values })
}

impl RademacherField {
    pub fn window(&self) -> (i64, i64) {
        (self.h_lo, self.h_hi)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cached values, slice by slice, primal sites in increasing `x`.
    pub fn values(&self) -> &[i8] {
        &self.values
    }
}

impl Environment for RademacherField {
    fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    fn xi(&self, x: u32, t: i64) -> i8 {
        debug_assert!(is_primal(x, t));
        if t >= self.h_lo && t < self.h_hi {
            self.values[((t - self.h_lo) as usize) * self.n as usize + (x / 2) as usize]
        } else {
            hashed_xi(self.seed, x, t)
        }
    }
}

/// Lazily hashed field with no cache at all, for long Monte Carlo traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedField {
    pub n: u32,
    pub seed: u64,
}

impl Environment for HashedField {
    fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    fn xi(&self, x: u32, t: i64) -> i8 {
        hashed_xi(self.seed, x, t)
    }
}

/// A field given value by value, used by the exhaustive enumerations.
/// Bit `k` of `bits` is the site with index `k` in slice-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplicitField {
    pub n: u32,
    pub h_lo: i64,
    pub h_hi: i64,
    pub bits: u64,
}

impl ExplicitField {
    pub fn sites(n: u32, h_lo: i64, h_hi: i64) -> u64 {
        n as u64 * (h_hi - h_lo).max(0) as u64
    }
}

impl Environment for ExplicitField {
    fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    fn xi(&self, x: u32, t: i64) -> i8 {
        assert!(t >= self.h_lo && t < self.h_hi, "height {t} outside the enumerated window");
        let k = (t - self.h_lo) as u64 * self.n as u64 + (x / 2) as u64;
        if self.bits >> k & 1 == 1 {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_field() {
        let a = sample_field(2, 0, 4, 7).unwrap();
        let b = sample_field(2, 0, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_field(2, 0, 4, 8).unwrap());
    }

    #[test]
    fn lazy_extension_agrees_with_cache() {
        let small = sample_field(3, 0, 5, 11).unwrap();
        let big = sample_field(3, -10, 20, 11).unwrap();
        for t in -10..20 {
            for x in (0..6).filter(|&x| is_primal(x, t)) {
                assert_eq!(small.xi(x, t), big.xi(x, t));
            }
        }
    }

    #[test]
    fn cap_and_window_errors() {
        assert!(matches!(sample_field_capped(4, 0, 100, 1, 10), Err(LatticeError::WindowTooLarge { .. })));
        assert_eq!(sample_field(2, 3, 3, 1), Err(LatticeError::EmptyWindow(3, 3)));
        assert_eq!(sample_field(0, 0, 3, 1), Err(LatticeError::ZeroWidth));
    }

    #[test]
    fn empirical_mean_is_centered() {
        let f = sample_field(500, 0, 2000, 3).unwrap();
        let s: i64 = f.values().iter().map(|&v| v as i64).sum();
        let mean = s as f64 / f.values().len() as f64;
        assert!(mean.abs() < 3e-3, "mean {mean}");
    }
}
