//! Coalescence time of two ancestor lines of the sliced forest, planar or
//! cylindric, and its survival curve.

use super::planar::nearest_on_line;
use super::schedule::SliceSchedule;
use super::sliced::{cell_points, nearest_on_circle, slice_points};
use super::ForestError;
use crate::export::TailRow;
use crate::seed::replica_seed;
use crate::Censorable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Planar,
    Cylinder,
}

/// Closest point to `x` in the planar slice `k`, found by scanning unit
/// cells outward until no unscanned cell can hold a closer point.
pub fn nearest_planar(seed: u64, k: usize, n: f64, x: f64) -> f64 {
    let c0 = x.floor() as i64;
    let mut best: Option<f64> = None;
    let consider = |c: i64, best: &mut Option<f64>| {
        let pts = cell_points(seed, k, c, n);
        if let Some(i) = nearest_on_line(&pts, x) {
            let p = pts[i];
            let better = match *best {
                None => true,
                Some(b) => (p - x).abs() < (b - x).abs() || ((p - x).abs() == (b - x).abs() && p < b),
            };
            if better {
                *best = Some(p);
            }
        }
    };
    for ring in 0i64.. {
        if ring == 0 {
            consider(c0, &mut best);
        } else {
            consider(c0 - ring, &mut best);
            consider(c0 + ring, &mut best);
        }
        let reach = (x - (c0 - ring) as f64).min((c0 + ring + 1) as f64 - x);
        if let Some(b) = best {
            if (b - x).abs() < reach {
                return b;
            }
        }
    }
    unreachable!()
}

/// Two lines from `(0, 0)` and `(d, 0)`; calls `visit(k, D_k)` after each
/// slice and returns the first slice where they share an ancestor.
/// Planar and cylinder runs with one seed share the cell `[0, 1)`.
pub fn pair_walk<F: FnMut(usize, f64)>(model: Model, schedule: &SliceSchedule, d: f64, k_max: usize, seed: u64, mut visit: F) -> Censorable<usize> {
    let (mut a, mut b) = (0.0f64, d);
    for k in 1..=k_max {
        let n = schedule.n_seq[k];
        match model {
            Model::Planar => {
                a = nearest_planar(seed, k, n, a);
                b = nearest_planar(seed, k, n, b);
            }
            Model::Cylinder => {
                let pts = slice_points(seed, k, n);
                if let (Some(i), Some(j)) = (nearest_on_circle(&pts, a), nearest_on_circle(&pts, b)) {
                    a = pts[i];
                    b = pts[j];
                }
            }
        }
        let dist = match model {
            Model::Planar => b - a,
            Model::Cylinder => (b - a).rem_euclid(1.0),
        };
        visit(k, dist);
        if a == b {
            return Censorable::Value(k);
        }
    }
    Censorable::Censored { cap: k_max }
}

pub fn pair_tau(model: Model, schedule: &SliceSchedule, d: f64, k_max: usize, seed: u64) -> Censorable<usize> {
    pair_walk(model, schedule, d, k_max, seed, |_, _| {})
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub model: Model,
    pub d: f64,
    pub replicas: usize,
    pub taus: Vec<Censorable<usize>>,
    pub rows: Vec<TailRow>,
}

/// `N` replicas of `tau`; replica `i` uses `replica_seed(seed, i)` in both
/// models and for every `d`, which couples them.
pub fn coalescence_tail(model: Model, schedule: &SliceSchedule, d: f64, k_max: usize, replicas: usize, seed: u64) -> Result<TailCurve, ForestError> {
    if !(d > 0.0 && d.is_finite()) || (model == Model::Cylinder && d > 0.5) {
        return Err(ForestError::BadDistance(d));
    }
    if k_max > schedule.k_max() {
        return Err(ForestError::ShortSchedule(k_max));
    }
    let taus: Vec<Censorable<usize>> = (0..replicas as u64).into_par_iter().map(|i| pair_tau(model, schedule, d, k_max, replica_seed(seed, i))).collect();
    let mut alive = vec![0usize; k_max + 1];
    for t in &taus {
        // tau > K for K < tau; censored runs survive every K
        let last = match t {
            Censorable::Value(v) => *v,
            Censorable::Censored { .. } => k_max + 1,
        };
        for a in alive.iter_mut().take(last.min(k_max + 1)) {
            *a += 1;
        }
    }
    let nf = replicas as f64;
    let rows = (0..=k_max)
        .map(|k| {
            let s = alive[k] as f64 / nf;
            TailRow { k, h_k: schedule.h[k], survival: s, stderr: (s * (1.0 - s) / nf).sqrt(), normalized_stat: s * schedule.h[k].sqrt() / d }
        })
        .collect();
    Ok(TailCurve { model, d, replicas, taus, rows })
}

impl TailCurve {
    /// Largest normalized statistic over `K >= k0`.
    pub fn normalized_max(&self, k0: usize) -> f64 {
        self.rows.iter().skip(k0).map(|r| r.normalized_stat).fold(0.0, f64::max)
    }
}

/// `(D_{k-1}, D_k - D_{k-1})` pairs of the planar distance process before
/// coalescence.
pub fn distance_increments(schedule: &SliceSchedule, d: f64, k_max: usize, replicas: usize, seed: u64) -> Vec<(f64, f64)> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut prev = d;
            pair_walk(Model::Planar, schedule, d, k_max, replica_seed(seed, i), |_, dist| {
                out.push((prev, dist - prev));
                prev = dist;
            });
            out
        })
        .flatten()
        .collect()
}
