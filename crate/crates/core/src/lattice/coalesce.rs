use super::path::{step_down, step_up, Direction};
use super::{is_primal, Environment, LatticeError};
use crate::unionfind::UnionFind;
use crate::Censorable;

/// Number of steps until every walker started on the slice at height `h`
/// (primal sites going up, or dual sites going down) sits on one site.
/// At least one step is always taken, so the result is `>= 1`.
pub fn coalesce_all<E: Environment + ?Sized>(env: &E, h: i64, direction: Direction, cap: u64) -> Censorable<u64> {
    match coalesce_to_site(env, h, direction, cap) {
        Some((steps, _)) => Censorable::Value(steps),
        None => Censorable::Censored { cap },
    }
}

/// Like [`coalesce_all`], also returning the common site.
pub fn coalesce_to_site<E: Environment + ?Sized>(
    env: &E,
    h: i64,
    direction: Direction,
    cap: u64,
) -> Option<(u64, u32)> {
    let m = env.modulus();
    let primal = direction == Direction::Up;
    let starts: Vec<u32> = (0..m).filter(|&x| is_primal(x, h) == primal).collect();
    let mut uf = UnionFind::new(starts.len());
    // (position, walker id) of one representative per class
    let mut alive: Vec<(u32, usize)> = starts.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut t = h;
    for step in 1..=cap {
        for w in alive.iter_mut() {
            w.0 = match direction {
                Direction::Up => step_up(env, w.0, t),
                Direction::Down => step_down(env, w.0, t),
            };
        }
        t = if primal { t + 1 } else { t - 1 };
        alive.sort_unstable();
        let mut kept: Vec<(u32, usize)> = Vec::with_capacity(alive.len());
        for &(x, id) in &alive {
            match kept.last() {
                Some(&(y, rep)) if y == x => {
                    uf.union(rep, id);
                }
                _ => kept.push((x, id)),
            }
        }
        alive = kept;
        if uf.sets() == 1 {
            return Some((step, alive[0].0));
        }
    }
    None
}

/// Steps until two primal walkers from `(x1, h)` and `(x2, h)` meet.
pub fn coalescence_time_pair<E: Environment + ?Sized>(
    env: &E,
    x1: u32,
    x2: u32,
    h: i64,
    cap: u64,
) -> Result<Censorable<u64>, LatticeError> {
    for x in [x1, x2] {
        if !is_primal(x, h) {
            return Err(LatticeError::Parity { x, t: h });
        }
    }
    let (mut a, mut b) = (x1, x2);
    if a == b {
        return Ok(Censorable::Value(0));
    }
    for k in 0..cap {
        let t = h + k as i64;
        a = step_up(env, a, t);
        b = step_up(env, b, t);
        if a == b {
            return Ok(Censorable::Value(k + 1));
        }
    }
    Ok(Censorable::Censored { cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::field::{ExplicitField, HashedField};
    use crate::Prob;

    #[test]
    fn two_site_circle() {
        // one site per slice: the lone walker is trivially coalesced after one step
        for bits in 0..16u64 {
            let f = ExplicitField { n: 1, h_lo: 0, h_hi: 4, bits };
            let v = coalesce_all(&f, 0, Direction::Up, 2).value().unwrap();
            assert!((1..=2).contains(&v));
        }
    }

    #[test]
    fn law_on_four_sites_matches_enumeration() {
        // P(T <= k) over every field of depth k, against the sampled frequencies
        let depth = 6i64;
        let mut exact = vec![Prob::from_integer(0); depth as usize + 1];
        let total = 1u64 << (2 * depth);
        for bits in 0..total {
            let f = ExplicitField { n: 2, h_lo: 0, h_hi: depth, bits };
            if let Some(v) = coalesce_all(&f, 0, Direction::Up, depth as u64).value() {
                for slot in exact.iter_mut().skip(v as usize) {
                    *slot += Prob::new(1, total as i64);
                }
            }
        }
        for k in 1..=depth as usize {
            assert_eq!(exact[k], Prob::from_integer(1) - Prob::new(1, 1 << k));
        }
        let reps = 40_000u64;
        let mut hits = vec![0u64; depth as usize + 1];
        for s in 0..reps {
            let f = HashedField { n: 2, seed: s };
            if let Some(v) = coalesce_all(&f, 0, Direction::Up, depth as u64).value() {
                for slot in hits.iter_mut().skip(v as usize) {
                    *slot += 1;
                }
            }
        }
        for k in 1..=depth as usize {
            let p = *exact[k].numer() as f64 / *exact[k].denom() as f64;
            let f = hits[k] as f64 / reps as f64;
            let sd = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((f - p).abs() < 4.0 * sd + 1e-12, "k={k} freq {f} exact {p}");
        }
    }

    #[test]
    fn dual_walkers_coalesce_too() {
        let f = HashedField { n: 8, seed: 5 };
        let v = coalesce_all(&f, 100, Direction::Down, 1_000_000);
        assert!(v.value().unwrap() >= 1);
    }

    #[test]
    fn censoring_is_reported() {
        let f = HashedField { n: 64, seed: 1 };
        assert!(coalesce_all(&f, 0, Direction::Up, 3).is_censored());
    }
}
