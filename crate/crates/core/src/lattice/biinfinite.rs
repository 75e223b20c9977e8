//! The unique bi-infinite primal branch and its dual, read off a finite
//! window: all primal walkers from the bottom slice coalesce into `C_up`,
//! all dual walkers from the top slice coalesce into `C_down`.

use super::coalesce::coalesce_to_site;
use super::path::{trace_path, Direction, LatticeSite};
use super::Environment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiInfinite {
    pub n: u32,
    /// window actually used
    pub lo: i64,
    pub hi: i64,
    /// `C_up` is known on `[up_from, hi]`
    pub up_from: i64,
    pub up: Vec<u32>,
    /// `C_down` is known on `[lo, down_to]`
    pub down_to: i64,
    pub down: Vec<u32>,
    pub attempts: u32,
}

impl BiInfinite {
    pub fn up_at(&self, h: i64) -> Option<u32> {
        if h < self.up_from || h > self.hi {
            return None;
        }
        self.up.get((h - self.up_from) as usize).copied()
    }

    pub fn down_at(&self, h: i64) -> Option<u32> {
        if h < self.lo || h > self.down_to {
            return None;
        }
        self.down.get((h - self.lo) as usize).copied()
    }

    /// Heights where both branches are known.
    pub fn overlap(&self) -> Option<(i64, i64)> {
        (self.up_from <= self.down_to).then_some((self.up_from, self.down_to))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LadderOutcome {
    Stable(BiInfinite),
    /// no stabilization within the retry budget; the last window tried
    Censored { lo: i64, hi: i64 },
}

impl LadderOutcome {
    pub fn stable(self) -> Option<BiInfinite> {
        match self {
            LadderOutcome::Stable(b) => Some(b),
            LadderOutcome::Censored { .. } => None,
        }
    }
}

/// Extract both branches so that they are known on all of `target`.
/// The window doubles on failure, at most `retries` times.
pub fn extract_biinfinite<E: Environment + ?Sized>(
    env: &E,
    window: (i64, i64),
    target: (i64, i64),
    retries: u32,
) -> LadderOutcome {
    let (mut lo, mut hi) = window;
    assert!(lo <= target.0 && target.0 <= target.1 && target.1 <= hi, "target must sit inside the window");
    for attempt in 0..=retries {
        let span = (hi - lo) as u64;
        let up = coalesce_to_site(env, lo, Direction::Up, span).filter(|&(s, _)| lo + s as i64 <= target.0);
        let down = up.and_then(|_| {
            coalesce_to_site(env, hi, Direction::Down, span).filter(|&(s, _)| hi - s as i64 >= target.1)
        });
        if let (Some((su, xu)), Some((sd, xd))) = (up, down) {
            let up_from = lo + su as i64;
            let down_to = hi - sd as i64;
            let p = trace_path(env, LatticeSite::new(xu, up_from), Direction::Up, hi).expect("primal site");
            let d = trace_path(env, LatticeSite::new(xd, down_to), Direction::Down, lo).expect("dual site");
            let mut down_pos = d.positions;
            down_pos.reverse();
            return LadderOutcome::Stable(BiInfinite {
                n: env.n(),
                lo,
                hi,
                up_from,
                up: p.positions,
                down_to,
                down: down_pos,
                attempts: attempt + 1,
            });
        }
        let w = hi - lo;
        lo -= w / 2 + 1;
        hi += w / 2 + 1;
    }
    LadderOutcome::Censored { lo, hi }
}

/// Successive all-coalescence heights `tau_k = tau_{k-1} + T(tau_{k-1})`.
pub fn ladder_rungs<E: Environment + ?Sized>(env: &E, h0: i64, rungs: usize, cap: u64) -> Vec<i64> {
    let mut out = Vec::with_capacity(rungs);
    let mut h = h0;
    for _ in 0..rungs {
        match coalesce_to_site(env, h, Direction::Up, cap) {
            Some((s, _)) => {
                h += s as i64;
                out.push(h);
            }
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::field::HashedField;
    use crate::lattice::path::crosses;
    use crate::lattice::LatticePath;

    #[test]
    fn branches_do_not_cross_and_follow_the_web() {
        for seed in 0..30 {
            let f = HashedField { n: 4, seed };
            let b = extract_biinfinite(&f, (-200, 200), (0, 10), 6).stable().unwrap();
            let p = LatticePath {
                n: 4,
                start: LatticeSite::new(b.up[0], b.up_from),
                direction: Direction::Up,
                positions: b.up.clone(),
                xi: vec![],
            };
            let mut dp = b.down.clone();
            dp.reverse();
            let d = LatticePath {
                n: 4,
                start: LatticeSite::new(dp[0], b.down_to),
                direction: Direction::Down,
                positions: dp,
                xi: vec![],
            };
            assert!(!crosses(&p, &d));
            // every primal walker from the bottom slice ends on C_up
            for x in (0..8).filter(|x| x % 2 == (b.lo.rem_euclid(2)) as u32) {
                let w = trace_path(&f, LatticeSite::new(x, b.lo), Direction::Up, b.hi).unwrap();
                assert_eq!(w.positions.last(), b.up.last());
            }
        }
    }

    #[test]
    fn rungs_increase() {
        let f = HashedField { n: 4, seed: 2 };
        let r = ladder_rungs(&f, 0, 3, 100_000);
        assert_eq!(r.len(), 3);
        assert!(r.windows(2).all(|w| w[0] < w[1]) && r[0] > 0);
    }
}
