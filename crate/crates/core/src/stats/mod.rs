//! Verification statistics: ECDFs, KS with atoms, chi-square, survival
//! dominance, Laplace estimates, tail fits and moment z-scores.

mod ks;

pub use ks::{kolmogorov_p, ks_statistic, ks_test, ks_test_mixed, ks_two_sample};

use crate::forest::laws::MixedLaw;
use crate::Censorable;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains NaN")]
    NaN,
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("survival must be positive on the fitted region")]
    NonPositiveSurvival,
    #[error("bins and expected probabilities differ in length")]
    BinMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Serialized as `{test, statistic, p_value, n, verdict, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub n: usize,
    pub verdict: Verdict,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl TestReport {
    /// Verdict is `p > alpha`.
    pub fn from_p_value(test: &str, statistic: f64, p_value: f64, n: usize, alpha: f64) -> Self {
        let p = p_value.clamp(0.0, 1.0);
        let mut r = TestReport {
            test: test.to_string(),
            statistic,
            p_value: Some(p),
            n,
            verdict: if p > alpha { Verdict::Pass } else { Verdict::Fail },
            params: BTreeMap::new(),
        };
        r.set("alpha", alpha);
        r
    }

    /// Verdict is `statistic <= bound`; no p-value.
    pub fn from_bound(test: &str, statistic: f64, bound: f64, n: usize) -> Self {
        let mut r = TestReport {
            test: test.to_string(),
            statistic,
            p_value: None,
            n,
            verdict: if statistic <= bound { Verdict::Pass } else { Verdict::Fail },
            params: BTreeMap::new(),
        };
        r.set("bound", bound);
        r
    }

    pub fn set<V: Serialize>(&mut self, key: &str, value: V) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.params.insert(key.to_string(), v);
    }

    pub fn with<V: Serialize>(mut self, key: &str, value: V) -> Self {
        self.set(key, value);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-sided normal p-value of a z-score.
pub fn normal_two_sided(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(sample: &[f64]) -> Result<Self, StatsError> {
        if sample.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(StatsError::NaN);
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{x_i <= x} / n`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// `#{x_i > x} / n`.
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.eval(x)
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.len();
        let i = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[i - 1]
    }

    /// `(x, P(X > x))` at each distinct sample value.
    pub fn survival_curve(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let j = self.sorted.partition_point(|&v| v <= x);
            out.push((x, (self.sorted.len() - j) as f64 / n));
            i = j;
        }
        out
    }
}

/// Pearson chi-square goodness of fit. `fitted` parameters reduce the degrees
/// of freedom.
pub fn chi_square_gof(observed: &[u64], expected_prob: &[f64], fitted: usize, alpha: f64) -> Result<TestReport, StatsError> {
    if observed.len() != expected_prob.len() {
        return Err(StatsError::BinMismatch);
    }
    if observed.len() < 2 + fitted {
        return Err(StatsError::TooFewPoints { need: 2 + fitted, got: observed.len() });
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    let total_p: f64 = expected_prob.iter().sum();
    let mut stat = 0.0;
    let mut min_expected = f64::INFINITY;
    for (&o, &p) in observed.iter().zip(expected_prob) {
        let e = n as f64 * p / total_p;
        min_expected = min_expected.min(e);
        stat += (o as f64 - e).powi(2) / e;
    }
    let df = (observed.len() - 1 - fitted) as f64;
    let p = ChiSquared::new(df).map(|c| c.sf(stat)).unwrap_or(0.0);
    Ok(TestReport::from_p_value("chi_square_gof", stat, p, n as usize, alpha)
        .with("df", df)
        .with("min_expected", min_expected))
}

/// Checks `A <=_S B`: at each threshold, `P(A > t) - P(B > t)` must not exceed
/// three pooled binomial standard errors. The statistic is the largest
/// standardized excess.
pub fn ecdf_dominance(sample_a: &[f64], sample_b: &[f64], thresholds: &[f64]) -> Result<TestReport, StatsError> {
    let a = Ecdf::new(sample_a)?;
    let b = Ecdf::new(sample_b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut worst = f64::NEG_INFINITY;
    let mut strict = Vec::new();
    let mut rows = Vec::new();
    for &t in thresholds {
        let (sa, sb) = (a.survival(t), b.survival(t));
        let pooled = (sa * na + sb * nb) / (na + nb);
        let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
        let z = if se > 0.0 {
            (sa - sb) / se
        } else if sa > sb {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(z);
        if z < -3.0 {
            strict.push(t);
        }
        rows.push((t, sa, sb, se));
    }
    if thresholds.is_empty() {
        worst = 0.0;
    }
    let mut r = TestReport::from_bound("ecdf_dominance", worst, 3.0, a.len().min(b.len()));
    r.set("strict_dominance_thresholds", &strict);
    r.set("rows", &rows);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    /// Censored runs contribute `e^{theta cap}`, which biases the estimate up.
    pub censored: usize,
}

pub fn laplace_mc(sample: &[Censorable<f64>], theta: f64) -> LaplaceEstimate {
    let n = sample.len();
    let mut censored = 0;
    let vals: Vec<f64> = sample
        .iter()
        .map(|c| {
            if c.is_censored() {
                censored += 1;
            }
            (theta * c.value_or_cap()).exp()
        })
        .collect();
    let (m, se) = mean_and_se(&vals);
    LaplaceEstimate { estimate: m, stderr: se, n, censored }
}

/// Laplace estimate for uncensored samples.
pub fn laplace_mc_plain(sample: &[f64], theta: f64) -> LaplaceEstimate {
    let c: Vec<Censorable<f64>> = sample.iter().map(|&x| Censorable::Value(x)).collect();
    laplace_mc(&c, theta)
}

/// Sample mean and its standard error.
pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (m, (v / n as f64).sqrt())
}

/// Which part of a survival curve the tail fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSelection {
    /// Points with `t` in the top fraction of `[t_min, t_max]`.
    TimeRange,
    /// The top fraction of points by `t`.
    Observations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares of `log S` on `t` over the tail of `curve` (pairs `(t, S)`).
pub fn exp_tail_fit(curve: &[(f64, f64)], tail_fraction: f64, selection: TailSelection) -> Result<TailFit, StatsError> {
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.is_empty() {
        return Err(StatsError::TooFewPoints { need: 3, got: 0 });
    }
    let f = tail_fraction.clamp(0.0, 1.0);
    let tail: Vec<(f64, f64)> = match selection {
        TailSelection::TimeRange => {
            let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
            let cut = hi - f * (hi - lo);
            pts.into_iter().filter(|p| p.0 >= cut).collect()
        }
        TailSelection::Observations => {
            let k = ((f * pts.len() as f64).ceil() as usize).min(pts.len());
            pts[pts.len() - k..].to_vec()
        }
    };
    if tail.len() < 3 {
        return Err(StatsError::TooFewPoints { need: 3, got: tail.len() });
    }
    if tail.iter().any(|p| !(p.1 > 0.0)) {
        return Err(StatsError::NonPositiveSurvival);
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, s) in &tail {
        let (dx, dy) = (x - mx, s.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::TooFewPoints { need: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(TailFit { slope, intercept: my - slope * mx, r_squared: r2, points: tail.len() })
}

/// z-scores of the sample mean and variance against targets, with
/// delta-method standard errors. The p-value is Bonferroni over the checks.
pub fn moment_report(sample: &[f64], mean: Option<f64>, variance: Option<f64>, alpha: f64) -> Result<TestReport, StatsError> {
    let n = sample.len();
    if n < 100 {
        return Err(StatsError::TooFewPoints { need: 100, got: n });
    }
    let nf = n as f64;
    let m = sample.iter().sum::<f64>() / nf;
    let s2 = sample.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nf - 1.0);
    let m4 = sample.iter().map(|x| (x - m).powi(4)).sum::<f64>() / nf;
    let mut zs = Vec::new();
    let mut params = BTreeMap::new();
    params.insert("sample_mean".to_string(), serde_json::json!(m));
    params.insert("sample_variance".to_string(), serde_json::json!(s2));
    if let Some(mu) = mean {
        let z = (m - mu) / (s2 / nf).sqrt();
        zs.push(z);
        params.insert("z_mean".to_string(), serde_json::json!(z));
    }
    if let Some(v) = variance {
        let z = (s2 - v) / ((m4 - s2 * s2).max(0.0) / nf).sqrt();
        zs.push(z);
        params.insert("z_variance".to_string(), serde_json::json!(z));
    }
    let worst = zs.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    let p = (zs.len().max(1) as f64 * normal_two_sided(worst)).min(1.0);
    let mut r = TestReport::from_p_value("moment_report", worst, p, n, alpha);
    r.params.extend(params);
    Ok(r)
}

/// Atom-frequency z-score against a law's atom masses.
pub fn atom_z<L: MixedLaw<f64> + ?Sized>(sample: &[f64], law: &L, tol: f64) -> Vec<(f64, f64, f64)> {
    let n = sample.len() as f64;
    law.atoms()
        .into_iter()
        .map(|(x, m)| {
            let k = sample.iter().filter(|&&v| (v - x).abs() <= tol * (1.0 + x.abs())).count() as f64;
            let freq = k / n;
            (x, freq, (freq - m) / (m * (1.0 - m) / n).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;
    use rand::Rng;
    use rand_distr::{Distribution, Exp, StandardNormal};

    #[test]
    fn ecdf_basics() {
        let e = Ecdf::new(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.eval(0.0), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.survival(2.5), 0.25);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.survival_curve(), vec![(1.0, 0.75), (2.0, 0.25), (3.0, 0.0)]);
        assert!(Ecdf::new(&[]).is_err());
    }

    #[test]
    fn dominance_examples() {
        let mut r = rng(1);
        let a: Vec<f64> = (0..2000).map(|_| r.random::<f64>()).collect();
        let th: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        assert!(ecdf_dominance(&a, &a, &th).unwrap().passed());
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        let rep = ecdf_dominance(&a, &b, &th).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.params["strict_dominance_thresholds"].as_array().unwrap().len(), 9);
        assert!(!ecdf_dominance(&b, &a, &th).unwrap().passed());
    }

    #[test]
    fn laplace_examples() {
        let z = laplace_mc_plain(&[0.0; 50], -3.0);
        assert_eq!((z.estimate, z.stderr), (1.0, 0.0));
        let mut r = rng(2);
        let e = Exp::new(1.0).unwrap();
        let s: Vec<f64> = (0..100_000).map(|_| e.sample(&mut r)).collect();
        let l = laplace_mc_plain(&s, -1.0);
        assert!((l.estimate - 0.5).abs() < 3.0 * l.stderr);
        let c = laplace_mc(&[Censorable::Value(1.0), Censorable::Censored { cap: 2.0 }], -1.0);
        assert_eq!(c.censored, 1);
    }

    #[test]
    fn tail_fit_examples() {
        let exp: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.1, (-0.7 * i as f64 * 0.1).exp())).collect();
        let f = exp_tail_fit(&exp, 0.3, TailSelection::TimeRange).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let pow: Vec<(f64, f64)> = (1..100).map(|i| (i as f64 * 0.1, (i as f64 * 0.1).powf(-0.5))).collect();
        let g = exp_tail_fit(&pow, 1.0, TailSelection::Observations).unwrap();
        assert!(g.r_squared < f.r_squared - 0.05);
        assert!(exp_tail_fit(&exp[..2], 1.0, TailSelection::Observations).is_err());
        assert!(exp_tail_fit(&[(0.0, 1.0), (1.0, 0.0), (2.0, 0.0)], 1.0, TailSelection::Observations).is_err());
    }

    #[test]
    fn moment_examples() {
        let mut r = rng(3);
        let s: Vec<f64> = (0..20_000).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        assert!(moment_report(&s, Some(0.0), Some(1.0), DEFAULT_ALPHA).unwrap().passed());
        let shifted: Vec<f64> = s.iter().map(|x| x + 0.2).collect();
        assert!(!moment_report(&shifted, Some(0.0), None, DEFAULT_ALPHA).unwrap().passed());
        assert!(moment_report(&s[..50], Some(0.0), None, DEFAULT_ALPHA).is_err());
    }

    #[test]
    fn chi_square_fair_die() {
        let mut r = rng(4);
        let mut counts = [0u64; 6];
        for _ in 0..60_000 {
            counts[r.random_range(0..6)] += 1;
        }
        assert!(chi_square_gof(&counts, &[1.0 / 6.0; 6], 0, DEFAULT_ALPHA).unwrap().passed());
        let skew = [12_000, 10_000, 10_000, 10_000, 10_000, 8_000];
        assert!(!chi_square_gof(&skew, &[1.0 / 6.0; 6], 0, DEFAULT_ALPHA).unwrap().passed());
    }

    #[test]
    fn report_serializes_with_fixed_fields() {
        let r = TestReport::from_p_value("x", 0.1, 0.5, 10, 1e-3);
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["n", "p_value", "params", "statistic", "test", "verdict"]);
        let back: TestReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
