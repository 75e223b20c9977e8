//! Closed forms for Brownian motion modulo 1: the wrapped heat kernel, the
//! survival of `j` coalescing walkers as a signed rotation sum, and the pair
//! Laplace transform.

use super::ContinuumError;
use crate::quad;
use crate::seed::rng;
use crate::Real;
use rand::Rng;
use statrs::function::erf::erfc;

pub const DEFAULT_THETA_TOL: f64 = 1e-10;
pub const DEFAULT_QMC_POINTS: usize = 1 << 16;
const QMC_SHIFTS: usize = 16;

fn check_t<T: Real>(t: T) -> Result<(), ContinuumError> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(ContinuumError::BadTime(t.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Number of images `M` so that the neglected terms `|m| > M` are below `tol`.
pub fn theta_terms(t: f64, tol: f64) -> i64 {
    let mut m = (6.0 * t.sqrt()).ceil() as i64 + 2;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * t).sqrt();
    // images beyond M lie at distance >= M - 1 from any reduced x; the tail
    // sum is at most twice a geometric series started there
    loop {
        let d = (m - 1) as f64;
        let first = norm * (-(d * d) / (2.0 * t)).exp();
        let ratio = (-(2.0 * d + 1.0) / (2.0 * t)).exp();
        if ratio < 1.0 && 2.0 * first / (1.0 - ratio) < tol {
            return m;
        }
        m += 1;
    }
}

/// `Phi_t(x) = (2 pi t)^{-1/2} sum_m exp(-(x - m)^2 / (2t))`.
pub fn theta_kernel<T: Real>(x: T, t: T, tol: T) -> Result<T, ContinuumError> {
    check_t(t)?;
    let xr = x - x.floor();
    let m = theta_terms(t.to_f64().unwrap(), tol.to_f64().unwrap_or(DEFAULT_THETA_TOL));
    let two_t = T::lit(2.0) * t;
    let mut s = T::zero();
    for k in -m..=m {
        let d = xr - T::lit(k as f64);
        s = s + (-(d * d) / two_t).exp();
    }
    Ok(s / (T::lit(2.0) * T::PI() * t).sqrt())
}

fn ncdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `sum_m eps^m phi_t(u - m)` with `eps = +-1`; `eps = 1` is [`theta_kernel`],
/// `eps = -1` the antiperiodic kernel needed for an even number of walkers.
pub fn twisted_kernel(u: f64, t: f64, eps: f64, tol: f64) -> f64 {
    let k = u.floor();
    let xr = u - k;
    let m = theta_terms(t, tol);
    let mut s = 0.0;
    let mut sign = if m % 2 == 0 { 1.0 } else { eps };
    for j in -m..=m {
        let d = xr - j as f64;
        s += sign * (-(d * d) / (2.0 * t)).exp();
        sign *= eps;
    }
    let parity = if eps < 0.0 && (k as i64).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    parity * s / (2.0 * std::f64::consts::PI * t).sqrt()
}

/// `int_a^b sum_m eps^m phi_t(y - m) dy`.
pub fn twisted_mass(a: f64, b: f64, t: f64, eps: f64) -> f64 {
    let s = t.sqrt();
    let pad = theta_terms(t, 1e-17);
    let (lo, hi) = (a.floor() as i64 - pad, b.ceil() as i64 + pad);
    let mut acc = 0.0;
    for m in lo..=hi {
        let sign = if eps < 0.0 && m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let k = m as f64;
        acc += sign * (ncdf((b - k) / s) - ncdf((a - k) / s));
    }
    acc
}

/// `int_a^b Phi_t(y) dy` for finite `a <= b`.
pub fn theta_mass(a: f64, b: f64, t: f64) -> f64 {
    twisted_mass(a, b, t, 1.0)
}

/// Wrapped normal distribution function on `[0, 1)`.
pub fn wrapped_cdf(x: f64, t: f64) -> f64 {
    let xr = x - x.floor();
    theta_mass(0.0, xr, t)
}

fn check_angles(x: &[f64]) -> Result<(), ContinuumError> {
    if x.len() < 2 {
        return Err(ContinuumError::TooFewWalkers(x.len()));
    }
    if x.iter().any(|&v| !(0.0..1.0).contains(&v)) || x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ContinuumError::UnsortedAngles);
    }
    Ok(())
}

/// `P(T^{j -> j-1} > t)` with its numerical error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurvivalValue {
    pub value: f64,
    pub error: f64,
    /// `true` when the error is a Monte Carlo standard error
    pub stochastic: bool,
}

/// Survival of no coalescence among walkers at sorted angles `x` up to time
/// `t`: the integral over ordered endpoints `0 < y_1 < ... < y_j < 1` of
/// `det[K(y_l - x_k)]`, where `K = sum_m eps^m phi_t(. - m)` and
/// `eps = (-1)^(j-1)`. Lifting to the universal cover, the killing group is
/// generated by transpositions and zero-sum integer shifts; folding it over
/// the cyclic rotations of the ordered simplex leaves exactly this twist.
pub fn fulmek_survival(x: &[f64], t: f64, tol: f64) -> Result<SurvivalValue, ContinuumError> {
    check_angles(x)?;
    check_t(t)?;
    if x.len() == 2 {
        return Ok(fulmek_pair(x[0], x[1], t, tol));
    }
    Ok(fulmek_qmc(x, t, DEFAULT_QMC_POINTS, 0x00f1_11ec))
}

/// `j = 2`: the inner integral over `y2 > y1` is a signed sum of normal CDFs,
/// the outer one is adaptive quadrature.
fn fulmek_pair(x1: f64, x2: f64, t: f64, tol: f64) -> SurvivalValue {
    let tol_k = (tol * 1e-3).max(1e-16);
    let k = |u: f64| twisted_kernel(u, t, -1.0, tol_k);
    let f = |y1: f64| {
        let a = k(y1 - x1) * twisted_mass(y1 - x2, 1.0 - x2, t, -1.0);
        let b = k(y1 - x2) * twisted_mass(y1 - x1, 1.0 - x1, t, -1.0);
        a - b
    };
    let r = quad::integrate_breaks(f, 0.0, 1.0, &[x1, x2], tol * 0.1, 0.0);
    SurvivalValue { value: r.value.clamp(0.0, 1.0), error: r.error, stochastic: false }
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Randomly shifted Halton points over `[0,1)^j`, sorted to land in the ordered
/// simplex (volume `1/j!`). Standard error from independent shifts.
pub fn fulmek_qmc(x: &[f64], t: f64, points: usize, seed: u64) -> SurvivalValue {
    let j = x.len();
    assert!(j <= PRIMES.len(), "at most {} walkers", PRIMES.len());
    let fact: f64 = (1..=j).map(|k| k as f64).product();
    let per = (points / QMC_SHIFTS).max(1);
    let mut r = rng(seed);
    let mut est = Vec::with_capacity(QMC_SHIFTS);
    let mut y = vec![0.0; j];
    for _ in 0..QMC_SHIFTS {
        let shift: Vec<f64> = (0..j).map(|_| r.random::<f64>()).collect();
        let mut acc = 0.0;
        for i in 1..=per as u64 {
            for (d, yd) in y.iter_mut().enumerate() {
                *yd = (radical_inverse(i, PRIMES[d]) + shift[d]).fract();
            }
            y.sort_by(f64::total_cmp);
            acc += kernel_determinant(&y, x, t);
        }
        est.push(acc / per as f64 / fact);
    }
    let (m, se) = crate::stats::mean_and_se(&est);
    SurvivalValue { value: m, error: se, stochastic: true }
}

/// `det[K(y_l - x_k)]` with the twisted kernel for `j = x.len()` walkers.
pub fn kernel_determinant(y: &[f64], x: &[f64], t: f64) -> f64 {
    let j = x.len();
    let eps = if j % 2 == 0 { -1.0 } else { 1.0 };
    let mut a: Vec<f64> = Vec::with_capacity(j * j);
    for &yl in y {
        for &xk in x {
            a.push(twisted_kernel(yl - xk, t, eps, 1e-14));
        }
    }
    determinant(&mut a, j)
}

/// Determinant by Gaussian elimination with partial pivoting (in place).
fn determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &k| a[i * n + c].abs().total_cmp(&a[k * n + c].abs())).unwrap();
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..n {
                a.swap(p * n + k, c * n + k);
            }
            det = -det;
        }
        let piv = a[c * n + c];
        det *= piv;
        for i in c + 1..n {
            let f = a[i * n + c] / piv;
            for k in c..n {
                a[i * n + k] -= f * a[c * n + k];
            }
        }
    }
    det
}

/// Rotation-only sum with the untwisted kernel. It drops the paths that
/// permute labels non-cyclically and, for even `j`, weights windings wrongly;
/// kept to document the discrepancy.
pub fn rotation_sum_plain(y: &[f64], x: &[f64], t: f64, tol: f64) -> f64 {
    let j = x.len();
    let mut s = 0.0;
    for i in 0..j {
        let sign = if (i * (j - 1)) % 2 == 0 { 1.0 } else { -1.0 };
        let mut p = 1.0;
        for l in 0..j {
            p *= theta_kernel(y[l] - x[(l + i) % j], t, tol).unwrap_or(0.0);
        }
        s += sign * p;
    }
    s
}

/// Eigenfunction series for two walkers at circular gap `g`: the gap is a
/// Brownian motion of variance 2 absorbed at 0 and 1.
pub fn pair_survival_series(g: f64, t: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut s = 0.0;
    let mut k = 1;
    loop {
        let kk = k as f64;
        let decay = (-kk * kk * pi * pi * t).exp();
        s += 4.0 / (kk * pi) * (kk * pi * g).sin() * decay;
        if decay < 1e-17 || k > 100_001 {
            break;
        }
        k += 2;
    }
    s.clamp(0.0, 1.0)
}

/// `E e^{theta T^{2->1}} = cosh(sqrt|theta| (1 + 2 x1 - 2 x2) / 2) / cosh(sqrt|theta| / 2)`.
pub fn laplace_t2to1<T: Real>(theta: T, x1: T, x2: T) -> Result<T, ContinuumError> {
    if !(theta < T::zero()) {
        return Err(ContinuumError::BadTheta(theta.to_f64().unwrap_or(f64::NAN)));
    }
    if !(x1 >= T::zero() && x1 < x2 && x2 < T::one()) {
        return Err(ContinuumError::UnsortedAngles);
    }
    let r = theta.abs().sqrt();
    let two = T::lit(2.0);
    Ok((r * (T::one() + two * x1 - two * x2) / two).cosh() / (r / two).cosh())
}

/// `1 + int_0^inf theta e^{theta t} S(t) dt` from a survival function `S`.
pub fn laplace_from_survival<F: FnMut(f64) -> f64>(theta: f64, mut survival: F, horizon: f64) -> f64 {
    let r = quad::integrate(|t| theta * (theta * t).exp() * survival(t), 0.0, horizon, 1e-9, 1e-9);
    1.0 + r.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn theta_oracle_and_mass() {
        let v = theta_kernel(0.0, 0.1, DEFAULT_THETA_TOL).unwrap();
        assert!((v - 1.278_567_0).abs() < 1e-4);
        for t in [1e-3, 0.1, 2.0] {
            let q = quad::integrate(|x| theta_kernel(x, t, 1e-12).unwrap(), 0.0, 1.0, 1e-12, 1e-12);
            assert!((q.value - 1.0).abs() < 1e-9);
            assert!((theta_mass(0.0, 1.0, t) - 1.0).abs() < 1e-12);
        }
        assert!(theta_kernel(0.0, 0.0, 1e-10).is_err());
        assert!(theta_kernel(0.0f32, 0.1, 1e-6).unwrap() > 1.27);
    }

    proptest! {
        #[test]
        fn theta_symmetric_and_periodic(x in -3.0f64..3.0, t in 0.001f64..4.0) {
            let a = theta_kernel(x, t, 1e-12).unwrap();
            prop_assert!((a - theta_kernel(-x, t, 1e-12).unwrap()).abs() < 1e-10 * (1.0 + a));
            prop_assert!((a - theta_kernel(x + 1.0, t, 1e-12).unwrap()).abs() < 1e-10 * (1.0 + a));
            prop_assert!(a >= 0.0);
        }
    }

    #[test]
    fn laplace_examples() {
        let v = laplace_t2to1(-1.0, 0.0, 0.25).unwrap();
        assert!((v - 0.914_676_6f64).abs() < 1e-6);
        let v = laplace_t2to1(-1.0, 0.1, 0.6).unwrap();
        assert!((v - 1.0 / 0.5f64.cosh()).abs() < 1e-12);
        assert!((laplace_t2to1(-1e-12f64, 0.2, 0.3).unwrap() - 1.0).abs() < 1e-9);
        assert!(laplace_t2to1(0.0, 0.2, 0.3).is_err());
    }

    #[test]
    fn pair_quadrature_matches_series() {
        for &g in &[0.25, 0.5] {
            for &t in &[1e-3, 0.05, 0.2, 1.0] {
                let q = fulmek_survival(&[0.1, 0.1 + g], t, 1e-9).unwrap();
                let s = pair_survival_series(g, t);
                assert!((q.value - s).abs() < 1e-7, "g={g} t={t}: {} vs {s}", q.value);
            }
        }
        let q = fulmek_survival(&[0.0, 0.5], 1e-4, 1e-9).unwrap();
        assert!(q.value > 0.999);
    }

    #[test]
    fn pair_series_laplace_matches_closed_form() {
        for g in [0.25, 0.5] {
            let l = laplace_from_survival(-1.0, |t| pair_survival_series(g, t), 40.0);
            let c = laplace_t2to1(-1.0, 0.0, g).unwrap();
            assert!((l - c).abs() < 1e-7);
        }
    }

    #[test]
    fn qmc_pair_agrees_with_quadrature() {
        let q = fulmek_qmc(&[0.1, 0.45], 0.05, 1 << 14, 1);
        let s = pair_survival_series(0.35, 0.05);
        assert!((q.value - s).abs() < 4.0 * q.error + 1e-3, "{} +- {} vs {s}", q.value, q.error);
    }

    #[test]
    fn rotation_only_sum_misses_mass_at_small_times() {
        let f = |y1: f64| {
            let inner = quad::integrate(|y2| rotation_sum_plain(&[y1, y2], &[0.1, 0.35], 1e-3, 1e-14), y1, 1.0, 1e-12, 1e-12);
            inner.value
        };
        let v = quad::integrate_breaks(f, 0.0, 1.0, &[0.1, 0.35], 1e-10, 0.0).value;
        assert!((v - 0.998_434_575).abs() < 1e-6);
        assert!(fulmek_survival(&[0.1, 0.35], 1e-3, 1e-9).unwrap().value > 0.999_999);
    }

    #[test]
    fn twisted_kernel_antiperiodic() {
        for &u in &[0.1, 0.7, -0.3] {
            let a = twisted_kernel(u, 0.3, -1.0, 1e-14);
            assert!((twisted_kernel(u + 1.0, 0.3, -1.0, 1e-14) + a).abs() < 1e-12);
            assert!((twisted_kernel(-u, 0.3, -1.0, 1e-14) - a).abs() < 1e-12);
            assert!((twisted_kernel(u, 0.3, 1.0, 1e-14) - theta_kernel(u, 0.3, 1e-14).unwrap()).abs() < 1e-12);
        }
        let q = quad::integrate(|y| twisted_kernel(y, 0.2, -1.0, 1e-14), -0.4, 0.9, 1e-13, 1e-13);
        assert!((q.value - twisted_mass(-0.4, 0.9, 0.2, -1.0)).abs() < 1e-9, "{} {}", q.value, twisted_mass(-0.4, 0.9, 0.2, -1.0));
    }

    #[test]
    fn three_walkers_small_time_survive() {
        let q = fulmek_qmc(&[0.1, 0.4, 0.7], 0.002, 1 << 15, 3);
        assert!((q.value - 1.0).abs() < 4.0 * q.error + 5e-3, "{} +- {}", q.value, q.error);
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(fulmek_survival(&[0.5, 0.2], 0.1, 1e-8).is_err());
        assert!(fulmek_survival(&[0.2, 0.2], 0.1, 1e-8).is_err());
        assert!(fulmek_survival(&[0.2], 0.1, 1e-8).is_err());
    }
}
