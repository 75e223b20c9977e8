use super::{Ecdf, StatsError, TestReport};
use crate::forest::laws::MixedLaw;
use statrs::distribution::{Binomial, DiscreteCDF};

/// Asymptotic Kolmogorov p-value with Stephens' finite-`n` correction.
pub fn kolmogorov_p(d: f64, n: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let sn = n.sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    let p = if lam < 1.0 {
        // small-lambda form converges faster
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lam * lam);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lam * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * lam * lam).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// Two-sided KS distance between sorted data and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, alpha: f64) -> Result<TestReport, StatsError> {
    let e = Ecdf::new(sample)?;
    let d = ks_statistic(e.sorted(), cdf);
    let n = e.len();
    Ok(TestReport::from_p_value("ks", d, kolmogorov_p(d, n as f64), n, alpha))
}

/// KS against a law with atoms: exact atom hits are tested binomially, the
/// rest by KS against the renormalized continuous part, Bonferroni-combined.
pub fn ks_test_mixed<L: MixedLaw<f64> + ?Sized>(sample: &[f64], law: &L, alpha: f64) -> Result<TestReport, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let atoms = law.atoms();
    let tol = |x: f64| 1e-12 * (1.0 + x.abs());
    let n = sample.len();
    let mut hits = vec![0u64; atoms.len()];
    let mut rest = Vec::with_capacity(n);
    'outer: for &v in sample {
        for (j, &(x, _)) in atoms.iter().enumerate() {
            if (v - x).abs() <= tol(x) {
                hits[j] += 1;
                continue 'outer;
            }
        }
        rest.push(v);
    }
    let mut pvals = Vec::new();
    let mut atom_rows = Vec::new();
    for (j, &(x, m)) in atoms.iter().enumerate() {
        let k = hits[j];
        let p = match Binomial::new(m.clamp(0.0, 1.0), n as u64) {
            Ok(b) => {
                let lo = b.cdf(k);
                let hi = if k == 0 { 1.0 } else { b.sf(k - 1) };
                (2.0 * lo.min(hi)).min(1.0)
            }
            Err(_) => 0.0,
        };
        pvals.push(p);
        atom_rows.push(serde_json::json!({"at": x, "mass": m, "hits": k, "freq": k as f64 / n as f64, "p_value": p}));
    }
    let cont_mass = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
    let mut d = 0.0;
    if !rest.is_empty() && cont_mass > 0.0 {
        rest.sort_by(f64::total_cmp);
        let g = |u: f64| {
            let below: f64 = atoms.iter().filter(|a| a.0 <= u).map(|a| a.1).sum();
            ((law.cdf(u) - below) / cont_mass).clamp(0.0, 1.0)
        };
        d = ks_statistic(&rest, g);
        pvals.push(kolmogorov_p(d, rest.len() as f64));
    }
    let k = pvals.len().max(1) as f64;
    let p = pvals.iter().fold(1.0f64, |a, &b| a.min(b)) * k;
    let mut r = TestReport::from_p_value("ks_mixed", d, p.min(1.0), n, alpha);
    r.set("atoms", atom_rows);
    r.set("continuous_n", rest.len());
    Ok(r)
}

/// Two-sample KS with the asymptotic p-value at `n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport, StatsError> {
    let ea = Ecdf::new(a)?;
    let eb = Ecdf::new(b)?;
    let (sa, sb) = (ea.sorted(), eb.sorted());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    Ok(TestReport::from_p_value("ks_two_sample", d, kolmogorov_p(d, ne), sa.len().min(sb.len()), alpha))
}
