//! Slice schedules `(n_k, sigma_k^2, V_k, h_k)` of the sliced forest.

use super::laws::increment_variance;
use super::ForestError;
use crate::export::ScheduleRow;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// How the intensities `n_k` are produced, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensitySpec {
    Const(f64),
    /// `n_k = c k^a`
    Pow { c: f64, a: f64 },
    /// `n_1, n_2, ...`
    Explicit(Vec<f64>),
}

impl IntensitySpec {
    pub fn at(&self, k: usize) -> Option<f64> {
        let k = k.max(1);
        match self {
            IntensitySpec::Const(c) => Some(*c),
            IntensitySpec::Pow { c, a } => Some(c * (k as f64).powf(*a)),
            IntensitySpec::Explicit(v) => v.get(k - 1).copied(),
        }
    }
}

/// `const:2`, `pow:0.3`, `pow:0.3:2` (exponent then prefactor), `list:1,2,4`.
impl FromStr for IntensitySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("bad intensity spec {s:?}"))?;
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number {x:?}: {e}"));
        match kind {
            "const" => Ok(IntensitySpec::Const(num(rest)?)),
            "pow" => match rest.split_once(':') {
                Some((a, c)) => Ok(IntensitySpec::Pow { c: num(c)?, a: num(a)? }),
                None => Ok(IntensitySpec::Pow { c: 1.0, a: num(rest)? }),
            },
            "list" => Ok(IntensitySpec::Explicit(rest.split(',').map(num).collect::<Result<_, _>>()?)),
            _ => Err(format!("unknown intensity kind {kind:?}")),
        }
    }
}

/// Finite-horizon surrogates for the three growth conditions on `(n_k, f_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewCondReport {
    pub f_last: f64,
    /// `f_k` non-increasing over the second half of the horizon
    pub f_decreasing_tail: bool,
    pub exp_sum_half: f64,
    pub exp_sum_full: f64,
    /// share of `sum e^{-n_k f_k}` contributed by the second half
    pub exp_sum_tail_share: f64,
    pub inv_sq_sum: f64,
    pub inv_sq_threshold: f64,
    pub inv_sq_exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSchedule {
    pub spec: IntensitySpec,
    /// index 0 is the intensity of the starting slice, taken equal to `n_1`
    pub n_seq: Vec<f64>,
    /// `sigma2[0] = 0`
    pub sigma2: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub h: Vec<f64>,
    pub f_seq: Option<Vec<f64>>,
    pub newcond: Option<NewCondReport>,
}

pub const INV_SQ_THRESHOLD: f64 = 10.0;

pub fn build_schedule(n_spec: &IntensitySpec, k_max: usize, f_spec: Option<&IntensitySpec>) -> Result<SliceSchedule, ForestError> {
    let mut n_seq = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let n = n_spec.at(k).ok_or(ForestError::ShortSchedule(k))?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(ForestError::BadIntensity(n));
        }
        n_seq.push(n);
    }
    let mut sigma2 = vec![0.0];
    let mut v = vec![0.0];
    for &n in &n_seq[1..] {
        let s = increment_variance(n);
        sigma2.push(s);
        v.push(v.last().unwrap() + s);
    }
    let f_seq = match f_spec {
        None => None,
        Some(f) => Some((0..=k_max).map(|k| f.at(k).ok_or(ForestError::ShortSchedule(k))).collect::<Result<Vec<_>, _>>()?),
    };
    let newcond = f_seq.as_ref().map(|f| newcond_report(&n_seq, f));
    Ok(SliceSchedule { spec: n_spec.clone(), n_seq, sigma2, h: v.clone(), v, f_seq, newcond })
}

fn newcond_report(n: &[f64], f: &[f64]) -> NewCondReport {
    let k = n.len() - 1;
    let half = k / 2;
    let mut exp_half = 0.0;
    let mut exp_full = 0.0;
    let mut inv_sq = 0.0;
    for i in 1..=k {
        let e = (-n[i] * f[i]).exp();
        exp_full += e;
        if i <= half {
            exp_half += e;
        }
        inv_sq += 1.0 / (n[i] * n[i]);
    }
    NewCondReport {
        f_last: f[k],
        f_decreasing_tail: f[half.max(1)..].windows(2).all(|w| w[1] <= w[0]),
        exp_sum_half: exp_half,
        exp_sum_full: exp_full,
        exp_sum_tail_share: if exp_full > 0.0 { (exp_full - exp_half) / exp_full } else { 0.0 },
        inv_sq_sum: inv_sq,
        inv_sq_threshold: INV_SQ_THRESHOLD,
        inv_sq_exceeds: inv_sq > INV_SQ_THRESHOLD,
    }
}

impl SliceSchedule {
    pub fn k_max(&self) -> usize {
        self.n_seq.len() - 1
    }

    /// `R(t) = inf{k : V_k >= t}`, `None` past the horizon.
    pub fn r_of(&self, t: f64) -> Option<usize> {
        let i = self.v.partition_point(|&x| x < t);
        (i < self.v.len()).then_some(i)
    }

    /// Smallest horizon `K` with `h_K >= t`, growing the schedule as needed.
    pub fn extend_to_height(spec: &IntensitySpec, t: f64, limit: usize) -> Result<SliceSchedule, ForestError> {
        let mut k = 64;
        loop {
            let s = build_schedule(spec, k, None)?;
            if let Some(r) = s.r_of(t) {
                return build_schedule(spec, r, None);
            }
            if k >= limit {
                return Err(ForestError::ShortSchedule(k));
            }
            k = (2 * k).min(limit);
        }
    }

    pub fn rows(&self) -> Vec<ScheduleRow> {
        (0..self.n_seq.len()).map(|k| ScheduleRow { k, n_k: self.n_seq[k], sigma2_k: self.sigma2[k], v_k: self.v[k] }).collect()
    }
}
