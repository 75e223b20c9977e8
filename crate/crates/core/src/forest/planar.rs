//! One slice of the planar Poisson forest: the distance increment `Delta(d)`
//! between the ancestors of two points at distance `d`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Half-width of the realized window beyond `[0, d]`, in units of `1/lambda`.
pub const PLANAR_MARGIN: f64 = 20.0;

/// Nearest point of the sorted `pts` to `x`; ties go to the lower point.
pub fn nearest_on_line(pts: &[f64], x: f64) -> Option<usize> {
    if pts.is_empty() {
        return None;
    }
    let i = pts.partition_point(|&p| p < x);
    if i == 0 {
        return Some(0);
    }
    if i == pts.len() {
        return Some(i - 1);
    }
    Some(if x - pts[i - 1] <= pts[i] - x { i - 1 } else { i })
}

/// `Delta(d)` for a unit-intensity slice.
pub fn planar_delta<R: Rng + ?Sized>(d: f64, rng: &mut R) -> f64 {
    planar_delta_lambda(1.0, d, rng)
}

/// `Delta^lambda(d)`: new distance minus `d` for a slice of intensity `lambda`.
pub fn planar_delta_lambda<R: Rng + ?Sized>(lambda: f64, d: f64, rng: &mut R) -> f64 {
    let lo = -PLANAR_MARGIN / lambda;
    let hi = d + PLANAR_MARGIN / lambda;
    let pois = Poisson::new(lambda * (hi - lo)).expect("positive intensity");
    loop {
        let count = pois.sample(rng) as usize;
        let mut pts: Vec<f64> = (0..count).map(|_| rng.random_range(lo..hi)).collect();
        pts.sort_by(f64::total_cmp);
        if let (Some(a), Some(b)) = (nearest_on_line(&pts, 0.0), nearest_on_line(&pts, d)) {
            return pts[b] - pts[a] - d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::laws::{delta_variance, DeltaLaw};
    use crate::seed::rng;
    use crate::stats::{ks_test_mixed, ks_two_sample};

    #[test]
    fn atom_at_minus_d() {
        let mut r = rng(4);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| planar_delta(1.0, &mut r) == -1.0).count() as f64 / n as f64;
        let p = 2.0 * (-2.0f64).exp();
        assert!((p - 0.270671).abs() < 1e-6);
        assert!((hits - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn mean_zero_and_variance() {
        let mut r = rng(5);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| planar_delta(1.0, &mut r)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let v = delta_variance(1.0f64);
        assert!(mean.abs() < 3.0 * (v / n as f64).sqrt());
        assert!((var / v - 1.0).abs() < 0.01);
    }

    #[test]
    fn ks_against_closed_form() {
        for d in [0.5, 1.0, 2.0] {
            let mut r = rng(10 + (d * 10.0) as u64);
            let xs: Vec<f64> = (0..100_000).map(|_| planar_delta(d, &mut r)).collect();
            let rep = ks_test_mixed(&xs, &DeltaLaw::new(d).unwrap(), 1e-3).unwrap();
            assert!(rep.passed(), "d={d}: {rep:?}");
        }
    }

    #[test]
    fn scaling_identity() {
        for (lambda, d) in [(2.0, 0.5), (5.0, 0.2)] {
            let mut r = rng(77);
            let a: Vec<f64> = (0..50_000).map(|_| planar_delta_lambda(lambda, d, &mut r)).collect();
            let b: Vec<f64> = (0..50_000).map(|_| planar_delta(lambda * d, &mut r) / lambda).collect();
            assert!(ks_two_sample(&a, &b, 1e-3).unwrap().passed());
        }
    }

    #[test]
    fn nearest_ties_low() {
        assert_eq!(nearest_on_line(&[0.0, 2.0], 1.0), Some(0));
        assert_eq!(nearest_on_line(&[0.0, 2.0], 5.0), Some(1));
        assert_eq!(nearest_on_line(&[0.0, 2.0], -5.0), Some(0));
    }
}
