//! Homogeneous cylindric Poisson tree: each point links to the first later
//! point within angular distance `r`.

use super::ForestError;
use crate::seed::{replica_seed, rng};
use crate::stats::mean_and_se;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CptSample {
    pub lambda: f64,
    pub r: f64,
    pub window: CptWindow,
    /// `(x, t)` sorted by `t`
    pub points: Vec<(f64, f64)>,
    /// `None` when no qualifying point lies inside the window
    pub ancestor: Vec<Option<usize>>,
}

fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub fn sample_cpt(lambda: f64, r: f64, window: CptWindow, seed: u64) -> Result<CptSample, ForestError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ForestError::BadIntensity(lambda));
    }
    if !(r > 0.0 && r <= 0.5) {
        return Err(ForestError::BadRadius(r));
    }
    if !(window.t_hi > window.t_lo) {
        return Err(ForestError::BadWindow);
    }
    let mut g = rng(seed);
    let count = Poisson::new(lambda * (window.t_hi - window.t_lo)).expect("positive mean").sample(&mut g) as usize;
    let mut points: Vec<(f64, f64)> = (0..count).map(|_| (g.random::<f64>(), g.random_range(window.t_lo..window.t_hi))).collect();
    points.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut s = CptSample { lambda, r, window, points, ancestor: Vec::new() };
    s.ancestor = (0..s.points.len()).map(|i| s.first_after(i + 1, s.points[i].0)).collect();
    Ok(s)
}

impl CptSample {
    fn first_after(&self, from: usize, x: f64) -> Option<usize> {
        (from..self.points.len()).find(|&j| circle_gap(self.points[j].0, x) <= self.r)
    }

    /// Ancestor of an arbitrary point `(x, t)`.
    pub fn ancestor_of(&self, x: f64, t: f64) -> Option<usize> {
        self.first_after(self.points.partition_point(|p| p.1 <= t), x)
    }

    /// Line from `(x, t)`: lifted angles and times of the successive ancestors,
    /// starting with `(x, t)` itself.
    pub fn line(&self, x: f64, t: f64) -> Vec<(f64, f64)> {
        let mut out = vec![(x, t)];
        let mut cur = self.ancestor_of(x, t);
        let mut lifted = x;
        let mut ang = x;
        while let Some(i) = cur {
            let (y, s) = self.points[i];
            lifted += (y - ang + 0.5).rem_euclid(1.0) - 0.5;
            ang = y;
            out.push((lifted, s));
            cur = self.ancestor[i];
        }
        out
    }

    /// Rescaled view: times divided by `n^2`.
    pub fn rescaled(&self, n: f64) -> Vec<(f64, f64)> {
        self.points.iter().map(|&(x, t)| (x, t / (n * n))).collect()
    }
}

/// Position of a piecewise-linear line at time `t` (clamped to its range).
pub fn line_at(line: &[(f64, f64)], t: f64) -> f64 {
    let i = line.partition_point(|p| p.1 <= t);
    if i == 0 {
        return line[0].0;
    }
    if i == line.len() {
        return line[i - 1].0;
    }
    let (x0, t0) = line[i - 1];
    let (x1, t1) = line[i];
    x0 + (x1 - x0) * (t - t0) / (t1 - t0)
}

/// Whether two lines cross before meeting: their lifted gap leaves `[0, 1]`.
pub fn lines_cross(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let t_end = a.last().unwrap().1.min(b.last().unwrap().1);
    let t_start = a[0].1.max(b[0].1);
    let mut times: Vec<f64> = a.iter().chain(b).map(|p| p.1).filter(|&t| t >= t_start && t <= t_end).collect();
    times.push(t_start);
    times.sort_by(f64::total_cmp);
    let g0 = line_at(b, t_start) - line_at(a, t_start);
    let base = g0.div_euclid(1.0);
    times.iter().any(|&t| {
        let g = line_at(b, t) - line_at(a, t) - base;
        !(-1e-12..=1.0 + 1e-12).contains(&g)
    })
}

/// Rescaled single-path jump: angular `U[-r/n, r/n]`, waiting time
/// `Exp(2r) / n^2` (intensity `n` on a strip of half-width `r/n`).
pub fn cpt_jump<R: Rng + ?Sized>(n: f64, r: f64, rng: &mut R) -> (f64, f64) {
    let dx = rng.random_range(-r / n..=r / n);
    let dt = Exp::new(2.0 * r).expect("positive rate").sample(rng) / (n * n);
    (dx, dt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusivityEstimate {
    pub n: f64,
    pub r: f64,
    pub horizon: f64,
    pub paths: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// `2 r^3 / 3` from the jump law
    pub jump_law_value: f64,
    pub candidates: [f64; 2],
}

/// `E[X(s)^2] / s` for the rescaled path, interpolated linearly between jumps.
pub fn measure_diffusivity(n: f64, r: f64, horizon: f64, paths: usize, seed: u64) -> DiffusivityEstimate {
    let sq: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut g = rng(replica_seed(seed, p));
            let (mut x, mut t) = (0.0f64, 0.0f64);
            loop {
                let (dx, dt) = cpt_jump(n, r, &mut g);
                if t + dt >= horizon {
                    let y = x + dx * (horizon - t) / dt;
                    return y * y / horizon;
                }
                x += dx;
                t += dt;
            }
        })
        .collect();
    let (estimate, stderr) = mean_and_se(&sq);
    DiffusivityEstimate { n, r, horizon, paths, estimate, stderr, jump_law_value: 2.0 * r.powi(3) / 3.0, candidates: [1.0, 1.0 / 12.0] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_test;
    use proptest::prelude::*;

    #[test]
    fn rejects_wide_strip() {
        let w = CptWindow { t_lo: 0.0, t_hi: 1.0 };
        assert_eq!(sample_cpt(1.0, 0.6, w, 1), Err(ForestError::BadRadius(0.6)));
        assert!(sample_cpt(-1.0, 0.5, w, 1).is_err());
    }

    #[test]
    fn jump_laws_along_one_line() {
        let (lambda, r) = (1.0, 0.5);
        let s = sample_cpt(lambda, r, CptWindow { t_lo: 0.0, t_hi: 120_000.0 }, 21).unwrap();
        let line = s.line(0.3, 0.0);
        let jumps: Vec<(f64, f64)> = line.windows(2).map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1)).collect();
        assert!(jumps.len() > 100_000);
        let rate = 2.0 * r * lambda;
        let dts: Vec<f64> = jumps.iter().map(|j| j.1).collect();
        assert!(ks_test(&dts, |y| 1.0 - (-rate * y).exp(), 1e-3).unwrap().passed());
        let dxs: Vec<f64> = jumps.iter().map(|j| j.0).collect();
        assert!(ks_test(&dxs, |x| ((x + r) / (2.0 * r)).clamp(0.0, 1.0), 1e-3).unwrap().passed());
    }

    #[test]
    fn off_atom_ancestor() {
        let s = sample_cpt(5.0, 0.25, CptWindow { t_lo: 0.0, t_hi: 50.0 }, 2).unwrap();
        let a = s.ancestor_of(0.9, 10.0).unwrap();
        let (y, t) = s.points[a];
        assert!(t > 10.0 && circle_gap(y, 0.9) <= 0.25);
        // nothing qualifying strictly between
        assert!(s.points.iter().all(|&(x, u)| !(u > 10.0 && u < t && circle_gap(x, 0.9) <= 0.25)));
    }

    #[test]
    fn diffusivity_matches_jump_law() {
        let est = measure_diffusivity(20.0, 0.5, 1.0, 20_000, 3);
        assert!((est.estimate - 1.0 / 12.0).abs() < 4.0 * est.stderr, "{est:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn two_lines_never_cross(seed in any::<u64>(), x0 in 0.0f64..1.0, x1 in 0.0f64..1.0) {
            let s = sample_cpt(3.0, 0.5, CptWindow { t_lo: 0.0, t_hi: 200.0 }, seed).unwrap();
            let a = s.line(x0, 0.0);
            let b = s.line(x1, 0.0);
            prop_assert!(!lines_cross(&a, &b));
        }
    }
}
