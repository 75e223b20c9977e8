//! The sliced cylindric Poisson forest: one Poisson slice per height `h_k`,
//! closest-point navigation to the next slice.

use super::schedule::SliceSchedule;
use super::ForestError;
use crate::export::ForestRecord;
use crate::seed::{mix3, rng};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// One draw of the slice increment at intensity `n`, by inverting its cdf.
pub fn sample_increment<R: Rng + ?Sized>(n: f64, rng: &mut R) -> f64 {
    increment_quantile(n, rng.random::<f64>())
}

/// Quantile of the increment law (atom `e^{-n}` at 0).
pub fn increment_quantile(n: f64, u: f64) -> f64 {
    let p0 = (-n).exp();
    let left = 0.5 * (1.0 - p0);
    if u < left {
        // mass of [-1/2, -r] is (e^{-2nr} - e^{-n}) / 2
        -(-(2.0 * u + p0).ln() / (2.0 * n)).min(0.5)
    } else if u < left + p0 {
        0.0
    } else {
        let w = u - left - p0;
        (-(1.0 - 2.0 * w).max(p0).ln() / (2.0 * n)).min(0.5)
    }
}

/// Points of the unit cell `[c, c + 1)` at slice `k`, sorted. The cylinder
/// slice is cell 0, so cylinder and planar slices share it under one seed.
pub fn cell_points(seed: u64, k: usize, c: i64, n: f64) -> Vec<f64> {
    let mut r = rng(mix3(seed, k as u64, c as u64));
    let count = Poisson::new(n).expect("positive intensity").sample(&mut r) as usize;
    let mut v: Vec<f64> = (0..count).map(|_| c as f64 + r.random::<f64>()).collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn slice_points(seed: u64, k: usize, n: f64) -> Vec<f64> {
    cell_points(seed, k, 0, n)
}

/// Signed circular displacement from `x` to `y`, in `[-1/2, 1/2)`.
pub fn circ_delta(x: f64, y: f64) -> f64 {
    (y - x + 0.5).rem_euclid(1.0) - 0.5
}

/// Index of the point of `pts` (sorted in `[0, 1)`) closest to `x` on the
/// circle; ties go to the lower angle.
pub fn nearest_on_circle(pts: &[f64], x: f64) -> Option<usize> {
    if pts.is_empty() {
        return None;
    }
    let m = pts.len();
    let i = pts.partition_point(|&p| p < x);
    let a = (i + m - 1) % m;
    let b = i % m;
    let da = circ_delta(x, pts[a]).abs();
    let db = circ_delta(x, pts[b]).abs();
    Some(if da < db || (da == db && pts[a] <= pts[b]) { a } else { b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Ancestor {
    Point(usize),
    /// the next slice is empty
    Vertical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceForest {
    pub schedule: SliceSchedule,
    pub shift_j: usize,
    pub k_lo: usize,
    pub k_hi: usize,
    /// `points[i]`: sorted angles of slice `k_lo + i`
    pub points: Vec<Vec<f64>>,
    /// `ancestry[i][p]`: ancestor in slice `k_lo + i + 1` of point `p`
    pub ancestry: Vec<Vec<Ancestor>>,
}

/// Slices `window.0 ..= window.1` of the forest, heights shifted by `h_j`.
pub fn sample_sliced_forest(schedule: &SliceSchedule, j_shift: usize, window: (usize, usize), seed: u64) -> Result<SliceForest, ForestError> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(ForestError::BadWindow);
    }
    if hi > schedule.k_max() || j_shift > schedule.k_max() {
        return Err(ForestError::ShortSchedule(hi.max(j_shift)));
    }
    let points: Vec<Vec<f64>> = (lo..=hi).map(|k| slice_points(seed, k, schedule.n_seq[k])).collect();
    let ancestry = points
        .windows(2)
        .map(|w| w[0].iter().map(|&x| nearest_on_circle(&w[1], x).map_or(Ancestor::Vertical, Ancestor::Point)).collect())
        .collect();
    Ok(SliceForest { schedule: schedule.clone(), shift_j: j_shift, k_lo: lo, k_hi: hi, points, ancestry })
}

impl SliceForest {
    pub fn shifted_height(&self, k: usize) -> f64 {
        self.schedule.h[k] - self.schedule.h[self.shift_j]
    }

    /// Circular order of ancestors is preserved at every slice: the image
    /// of the sorted angles has at most one cyclic descent.
    pub fn order_preserved(&self) -> bool {
        self.ancestry.iter().enumerate().all(|(i, anc)| {
            let ys: Vec<f64> = anc
                .iter()
                .zip(&self.points[i])
                .map(|(a, &x)| match a {
                    Ancestor::Point(p) => self.points[i + 1][*p],
                    Ancestor::Vertical => x,
                })
                .collect();
            let m = ys.len();
            (0..m).filter(|&q| ys[(q + 1) % m] < ys[q]).count() <= 1
        })
    }

    /// Angles of the line through `x` at slice `k`, up to the top slice.
    /// Vertical moves keep the angle.
    pub fn line_from(&self, k: usize, x: f64) -> Vec<f64> {
        let mut out = vec![x];
        let mut cur = x;
        for kk in k.max(self.k_lo) + 1..=self.k_hi {
            let pts = &self.points[kk - self.k_lo];
            if let Some(p) = nearest_on_circle(pts, cur) {
                cur = pts[p];
            }
            out.push(cur);
        }
        out
    }

    pub fn records(&self) -> Vec<ForestRecord> {
        let mut out = Vec::new();
        for (i, anc) in self.ancestry.iter().enumerate() {
            let k = self.k_lo + i;
            for (p, a) in anc.iter().enumerate() {
                let x = self.points[i][p];
                let ancestor_angle = match a {
                    Ancestor::Point(q) => self.points[i + 1][*q],
                    Ancestor::Vertical => x,
                };
                out.push(ForestRecord { slice_k: k, angle: x, ancestor_slice: k + 1, ancestor_angle });
            }
        }
        out
    }
}

/// Lifted displacement at shifted height `t` of the line started at angle 0
/// on slice `j`, linearly interpolated between slices.
pub fn shifted_line_position(schedule: &SliceSchedule, j: usize, t: f64, seed: u64) -> Result<f64, ForestError> {
    let target = schedule.h[j] + t;
    let r = schedule.r_of(target).ok_or(ForestError::ShortSchedule(schedule.k_max() + 1))?;
    let mut angle = 0.0f64;
    let mut lifted = 0.0f64;
    for k in j + 1..=r {
        let pts = slice_points(seed, k, schedule.n_seq[k]);
        let step = nearest_on_circle(&pts, angle).map_or(0.0, |p| circ_delta(angle, pts[p]));
        if k == r {
            let frac = (target - schedule.h[k - 1]) / schedule.sigma2[k];
            return Ok(lifted + frac.clamp(0.0, 1.0) * step);
        }
        lifted += step;
        angle = (angle + step).rem_euclid(1.0);
    }
    Ok(lifted)
}
