//! The reflected pair `(Y_up, Y_down)` and its lattice approximation by the
//! bi-infinite branches of a wide lattice window.

use super::{ContinuumError, TimeGrid};
use crate::geometry::fold_f;
use crate::lattice::biinfinite::{extract_biinfinite, LadderOutcome};
use crate::lattice::field::HashedField;
use crate::seed::rng;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReflectedPair {
    pub grid: TimeGrid,
    pub y_up: Vec<f64>,
    pub y_down: Vec<f64>,
    /// arc length from `y_up` to `y_down`, in `[0, 1]`
    pub gap: Vec<f64>,
}

/// `Y_up = U1 + B'/sqrt2 - H`, `Y_down = U1 + B'/sqrt2 + H` modulo 1 with
/// `H = F(U2 + sqrt2 B) / 2`.
pub fn sample_reflected_pair(grid: TimeGrid, seed: u64) -> ReflectedPair {
    let mut r = rng(seed);
    let u1: f64 = r.random();
    let u2: f64 = r.random();
    let sd = grid.dt.sqrt();
    let (mut b, mut bp) = (0.0f64, 0.0f64);
    let cap = grid.steps + 1;
    let mut out = ReflectedPair {
        grid,
        y_up: Vec::with_capacity(cap),
        y_down: Vec::with_capacity(cap),
        gap: Vec::with_capacity(cap),
    };
    for i in 0..cap {
        if i > 0 {
            b += sd * r.sample::<f64, _>(StandardNormal);
            bp += sd * r.sample::<f64, _>(StandardNormal);
        }
        let h = fold_f(u2 + std::f64::consts::SQRT_2 * b, 1.0).expect("unit period") / 2.0;
        let c = u1 + bp / std::f64::consts::SQRT_2;
        out.y_up.push((c - h).rem_euclid(1.0));
        out.y_down.push((c + h).rem_euclid(1.0));
        out.gap.push(2.0 * h);
    }
    out
}

/// Outcome of one ladder sample.
#[derive(Debug, Clone, PartialEq)]
pub enum LadderSample {
    Pair(ReflectedPair),
    Censored { lo: i64, hi: i64 },
}

/// Bi-infinite primal and dual branches of the lattice web on `2n` sites,
/// rescaled to the cylinder on lattice heights `[h_lo, h_hi]`. The lattice
/// window starts one rescaled time unit beyond the target on each side and
/// widens on failure.
pub fn biinfinite_ladder(n: u32, h_lo: i64, h_hi: i64, seed: u64, retries: u32) -> Result<LadderSample, ContinuumError> {
    if n == 0 || h_lo > h_hi {
        return Err(ContinuumError::BadGrid);
    }
    let m = 2 * n as i64;
    let env = HashedField { n, seed };
    let pad = m * m;
    match extract_biinfinite(&env, (h_lo - pad, h_hi + pad), (h_lo, h_hi), retries) {
        LadderOutcome::Censored { lo, hi } => Ok(LadderSample::Censored { lo, hi }),
        LadderOutcome::Stable(b) => {
            let scale = 1.0 / (m as f64);
            let grid = TimeGrid::new(h_lo as f64 * scale * scale, scale * scale, (h_hi - h_lo) as usize)?;
            let mut pair = ReflectedPair { grid, y_up: vec![], y_down: vec![], gap: vec![] };
            for h in h_lo..=h_hi {
                let up = b.up_at(h).expect("target inside the branch") as i64;
                let down = b.down_at(h).expect("target inside the branch") as i64;
                pair.y_up.push(up as f64 * scale);
                pair.y_down.push(down as f64 * scale);
                pair.gap.push((down - up).rem_euclid(m) as f64 * scale);
            }
            Ok(LadderSample::Pair(pair))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_stays_in_unit_interval() {
        let g = TimeGrid::new(0.0, 1e-3, 5000).unwrap();
        for seed in 0..5 {
            let p = sample_reflected_pair(g, seed);
            assert!(p.gap.iter().all(|&x| (0.0..=1.0).contains(&x)));
            for i in 0..p.gap.len() {
                let arc = (p.y_down[i] - p.y_up[i]).rem_euclid(1.0);
                assert!((arc - p.gap[i]).abs() < 1e-12 || (p.gap[i] - 1.0).abs() < 1e-12 || p.gap[i] < 1e-12);
            }
        }
    }

    #[test]
    fn ladder_branches_never_cross() {
        for seed in 0..5 {
            match biinfinite_ladder(8, 0, 200, seed, 6).unwrap() {
                LadderSample::Pair(p) => {
                    assert!(p.gap.iter().all(|&g| g > 0.0 && g < 1.0));
                    assert_eq!(p.gap.len(), 201);
                }
                LadderSample::Censored { .. } => panic!("ladder censored"),
            }
        }
    }
}
