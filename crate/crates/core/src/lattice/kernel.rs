//! Transition kernel `K` of the pair (primal branch, dual branch).
//!
//! Away from contact the four joint moves have mass 1/4. When the dual sits
//! next to the primal the crossing move is removed and its mass goes to the
//! joint move in the direction of the dual.

use super::enumerate::enumerate_pair_law;
use super::{is_primal, wrap_step, LatticeError};
use crate::Prob;
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct PairState {
    /// primal coordinate
    pub a: u32,
    /// dual coordinate
    pub b: u32,
}

impl PairState {
    pub fn new(a: u32, b: u32) -> Self {
        PairState { a, b }
    }

    /// Counterclockwise angle `|a -> b|` in `Z/2n`.
    pub fn angle(&self, n: u32) -> u32 {
        (self.b + 2 * n - self.a) % (2 * n)
    }
}

fn validate(n: u32, s: PairState) -> Result<(), LatticeError> {
    let m = 2 * n;
    if n == 0 {
        return Err(LatticeError::ZeroWidth);
    }
    for x in [s.a, s.b] {
        if x >= m {
            return Err(LatticeError::OutOfRange { x, modulus: m });
        }
    }
    if (s.a as i64 - s.b as i64).rem_euclid(2) == 0 {
        return Err(LatticeError::Parity { x: s.b, t: s.a as i64 });
    }
    Ok(())
}

/// The row `K(s, .)`, targets sorted, duplicate targets merged (only on `2n = 2`).
pub fn kernel_row(n: u32, s: PairState) -> Result<Vec<(PairState, Prob)>, LatticeError> {
    validate(n, s)?;
    let m = 2 * n;
    let mv = |x: u32, d: i8| wrap_step(x, d, m);
    let q = Prob::new(1, 4);
    let h = Prob::new(1, 2);
    let raw: Vec<(PairState, Prob)> = if mv(s.a, 1) == s.b {
        // (a, a+1)
        vec![
            (PairState::new(mv(s.a, 1), mv(s.b, 1)), h),
            (PairState::new(mv(s.a, -1), mv(s.b, 1)), q),
            (PairState::new(mv(s.a, -1), mv(s.b, -1)), q),
        ]
    } else if mv(s.a, -1) == s.b {
        // (a+1, a)
        vec![
            (PairState::new(mv(s.a, -1), mv(s.b, -1)), h),
            (PairState::new(mv(s.a, 1), mv(s.b, -1)), q),
            (PairState::new(mv(s.a, 1), mv(s.b, 1)), q),
        ]
    } else {
        let mut v = Vec::with_capacity(4);
        for da in [1i8, -1] {
            for db in [1i8, -1] {
                v.push((PairState::new(mv(s.a, da), mv(s.b, db)), q));
            }
        }
        v
    };
    let mut merged: BTreeMap<PairState, Prob> = BTreeMap::new();
    for (t, p) in raw {
        *merged.entry(t).or_insert_with(|| Prob::from_integer(0)) += p;
    }
    Ok(merged.into_iter().collect())
}

/// One step of the chain.
pub fn kernel_step<R: Rng + ?Sized>(n: u32, s: PairState, rng: &mut R) -> Result<PairState, LatticeError> {
    let row = kernel_row(n, s)?;
    // all masses are multiples of 1/4
    let u = rng.random_range(0..4i64);
    let mut acc = 0i64;
    for (t, p) in &row {
        acc += (*p * 4).to_integer();
        if u < acc {
            return Ok(*t);
        }
    }
    Ok(row.last().expect("row is never empty").0)
}

/// Which way consecutive heights of the exact pair law are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reading {
    /// state at height i -> state at height i+1
    Upward,
    /// state at height i+1 -> state at height i
    Downward,
}

/// One-step conditional transition tables of the exact pair law on
/// `[h1, h2]` with independent uniform endpoints, one table per step.
pub fn pair_law_transitions(
    n: u32,
    h1: i64,
    h2: i64,
    reading: Reading,
) -> Result<Vec<BTreeMap<(PairState, PairState), Prob>>, LatticeError> {
    let m = 2 * n;
    let dh = (h2 - h1) as usize;
    let w = Prob::new(1, (n * n) as i64);
    let mut joint: Vec<BTreeMap<(PairState, PairState), Prob>> = vec![BTreeMap::new(); dh];
    for x1 in (0..m).filter(|&x| is_primal(x, h1)) {
        for x2 in (0..m).filter(|&x| !is_primal(x, h2)) {
            let law = enumerate_pair_law(n, x1, x2, h1, h2)?;
            for e in &law.entries {
                for (i, table) in joint.iter_mut().enumerate() {
                    let lo = PairState::new(e.primal[i], e.dual[i]);
                    let hi = PairState::new(e.primal[i + 1], e.dual[i + 1]);
                    let key = match reading {
                        Reading::Upward => (lo, hi),
                        Reading::Downward => (hi, lo),
                    };
                    *table.entry(key).or_insert_with(|| Prob::from_integer(0)) += e.prob * w;
                }
            }
        }
    }
    Ok(joint
        .into_iter()
        .map(|table| {
            let mut from: BTreeMap<PairState, Prob> = BTreeMap::new();
            for ((s, _), p) in &table {
                *from.entry(*s).or_insert_with(|| Prob::from_integer(0)) += *p;
            }
            table.into_iter().map(|((s, t), p)| ((s, t), p / from[&s])).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_row_is_uniform() {
        let row = kernel_row(4, PairState::new(0, 3)).unwrap();
        assert_eq!(row.len(), 4);
        assert!(row.iter().all(|(_, p)| *p == Prob::new(1, 4)));
    }

    #[test]
    fn adjacent_rows() {
        let row = kernel_row(4, PairState::new(2, 3)).unwrap();
        let get = |a, b| row.iter().find(|(t, _)| *t == PairState::new(a, b)).map(|r| r.1);
        assert_eq!(get(3, 4), Some(Prob::new(1, 2)));
        assert_eq!(get(1, 4), Some(Prob::new(1, 4)));
        assert_eq!(get(1, 2), Some(Prob::new(1, 4)));
        assert_eq!(get(3, 2), None);
        let row = kernel_row(4, PairState::new(3, 2)).unwrap();
        let get = |a, b| row.iter().find(|(t, _)| *t == PairState::new(a, b)).map(|r| r.1);
        assert_eq!(get(2, 1), Some(Prob::new(1, 2)));
        assert_eq!(get(4, 1), Some(Prob::new(1, 4)));
        assert_eq!(get(4, 3), Some(Prob::new(1, 4)));
    }

    #[test]
    fn rows_sum_to_one() {
        for n in 1..=5u32 {
            for a in 0..2 * n {
                for b in (0..2 * n).filter(|b| (a + b) % 2 == 1) {
                    let s: Prob = kernel_row(n, PairState::new(a, b)).unwrap().iter().map(|r| r.1).sum();
                    assert_eq!(s, Prob::from_integer(1));
                }
            }
        }
    }

    #[test]
    fn parity_rejected() {
        assert!(kernel_row(2, PairState::new(0, 2)).is_err());
    }
}
