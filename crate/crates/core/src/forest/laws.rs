//! Closed-form laws of the sliced forest: the one-slice increment, the planar
//! distance increment `mu_d`, and the auxiliary law `mu_bar_d` used by the
//! Skorokhod embedding (with `c_d = 1`, `nu_d = 2`).

use super::ForestError;
use crate::Real;

/// A law made of finitely many atoms plus a density.
pub trait MixedLaw<T> {
    /// `(location, mass)` pairs.
    fn atoms(&self) -> Vec<(T, T)>;
    /// Density of the absolutely continuous part.
    fn density(&self, u: T) -> T;
    /// Full distribution function, atoms included.
    fn cdf(&self, u: T) -> T;
    fn mean(&self) -> T;
    fn variance(&self) -> T;
    /// Points where the density has kinks or jumps, for quadrature.
    fn breakpoints(&self) -> Vec<T>;
}

/// `f_d(u) = -e^{-2d}/2 + e^{-2|u|}(|u| + 1/2)` on `[-d, d]`.
pub fn f_d<T: Real>(u: T, d: T) -> T {
    let half = T::lit(0.5);
    let a = u.abs();
    -(T::lit(-2.0) * d).exp() * half + (T::lit(-2.0) * a).exp() * (a + half)
}

/// `int_0^s f_d`, for `0 <= s <= d`.
pub fn f_d_integral<T: Real>(s: T, d: T) -> T {
    let half = T::lit(0.5);
    (T::one() - (T::lit(-2.0) * s).exp() * (s + T::one())) * half - s * (T::lit(-2.0) * d).exp() * half
}

/// `p_d = int_0^d f_d = (1 - (1 + 2d) e^{-2d}) / 2`.
pub fn p_d<T: Real>(d: T) -> T {
    let two = T::lit(2.0);
    (T::one() - (T::one() + two * d) * (-two * d).exp()) / two
}

/// `V(d) = 1 - e^{-2d} + (2/3) e^{-2d} d^3 + e^{-2d} d^2`.
pub fn delta_variance<T: Real>(d: T) -> T {
    let e = (T::lit(-2.0) * d).exp();
    T::one() - e + T::lit(2.0 / 3.0) * e * d * d * d + e * d * d
}

/// `alpha_d = e^{-2d}(2d^2 + 5d + 3) / (2(d + 2))`, valid for `d >= 0`.
pub fn aux_alpha<T: Real>(d: T) -> T {
    let two = T::lit(2.0);
    (-two * d).exp() * (two * d * d + T::lit(5.0) * d + T::lit(3.0)) / (two * (d + two))
}

/// `beta_d = e^2 (d + 1) / (2(d + 2))`, valid for `d >= 0`.
pub fn aux_beta<T: Real>(d: T) -> T {
    let two = T::lit(2.0);
    two.exp() * (d + T::one()) / (two * (d + two))
}

pub fn aux_variance<T: Real>(d: T) -> T {
    let p = T::lit(4.0) * d.powi(4) + T::lit(26.0) * d.powi(3) + T::lit(66.0) * d * d + T::lit(75.0) * d + T::lit(27.0);
    T::one() + p * (T::lit(-2.0) * d).exp() / (T::lit(6.0) * d + T::lit(12.0))
}

fn check_d<T: Real>(d: T) -> Result<(), ForestError> {
    if d > T::zero() && d.is_finite() {
        Ok(())
    } else {
        Err(ForestError::BadDistance(d.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Mass of the symmetric part on `[-d, u]`, `u` in `[-d, d]`.
fn central_mass<T: Real>(u: T, d: T) -> T {
    let p = p_d(d);
    if u < T::zero() {
        p - f_d_integral(-u, d)
    } else {
        p + f_d_integral(u.min(d), d)
    }
}

/// `mu_d`: law of the planar distance increment `Delta(d)` at unit intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLaw<T> {
    pub d: T,
}

impl<T: Real> DeltaLaw<T> {
    pub fn new(d: T) -> Result<Self, ForestError> {
        check_d(d)?;
        Ok(DeltaLaw { d })
    }

    /// `(d + 1) e^{-2d}` at `-d`.
    pub fn atom_mass(&self) -> T {
        (self.d + T::one()) * (T::lit(-2.0) * self.d).exp()
    }
}

impl<T: Real> MixedLaw<T> for DeltaLaw<T> {
    fn atoms(&self) -> Vec<(T, T)> {
        vec![(-self.d, self.atom_mass())]
    }

    fn density(&self, u: T) -> T {
        let d = self.d;
        if u.abs() < d {
            f_d(u, d)
        } else if u > d {
            d * (-u - d).exp()
        } else {
            T::zero()
        }
    }

    fn cdf(&self, u: T) -> T {
        let d = self.d;
        if u < -d {
            return T::zero();
        }
        let m = self.atom_mass();
        if u < d {
            return m + central_mass(u, d);
        }
        m + p_d(d) * T::lit(2.0) + d * (T::lit(-2.0) * d).exp() * (T::one() - (d - u).exp())
    }

    fn mean(&self) -> T {
        T::zero()
    }

    fn variance(&self) -> T {
        delta_variance(self.d)
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![-self.d, T::zero(), self.d]
    }
}

/// `mu_bar_d`: atom `alpha_d` at `-(d+1)`, `f_d` on `[-d, d]`, `d e^{-u-d}` on
/// `[d, inf)` and `beta_d e^{-u-d}` on `[d+2, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxLaw<T> {
    pub d: T,
}

impl<T: Real> AuxLaw<T> {
    pub fn new(d: T) -> Result<Self, ForestError> {
        check_d(d)?;
        Ok(AuxLaw { d })
    }

    pub fn alpha(&self) -> T {
        aux_alpha(self.d)
    }

    pub fn beta(&self) -> T {
        aux_beta(self.d)
    }
}

impl<T: Real> MixedLaw<T> for AuxLaw<T> {
    fn atoms(&self) -> Vec<(T, T)> {
        vec![(-(self.d + T::one()), self.alpha())]
    }

    fn density(&self, u: T) -> T {
        let d = self.d;
        let two = T::lit(2.0);
        if u.abs() < d {
            f_d(u, d)
        } else if u > d {
            let tail = (-u - d).exp();
            if u > d + two {
                (d + self.beta()) * tail
            } else {
                d * tail
            }
        } else {
            T::zero()
        }
    }

    fn cdf(&self, u: T) -> T {
        let d = self.d;
        let two = T::lit(2.0);
        let a = self.alpha();
        if u < -(d + T::one()) {
            return T::zero();
        }
        if u < -d {
            return a;
        }
        if u < d {
            return a + central_mass(u, d);
        }
        let e2d = (-two * d).exp();
        let mut c = a + two * p_d(d) + d * e2d * (T::one() - (d - u).exp());
        if u > d + two {
            c = c + self.beta() * e2d * (-two).exp() * (T::one() - (d + two - u).exp());
        }
        c
    }

    fn mean(&self) -> T {
        T::zero()
    }

    fn variance(&self) -> T {
        aux_variance(self.d)
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![-(self.d + T::one()), -self.d, T::zero(), self.d, self.d + T::lit(2.0)]
    }
}

/// Law of one slice increment at intensity `n`: atom `e^{-n}` at 0 and
/// density `n e^{-2n|x|}` on `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementLaw<T> {
    pub n: T,
}

impl<T: Real> IncrementLaw<T> {
    pub fn new(n: T) -> Result<Self, ForestError> {
        if n > T::zero() && n.is_finite() {
            Ok(IncrementLaw { n })
        } else {
            Err(ForestError::BadIntensity(n.to_f64().unwrap_or(f64::NAN)))
        }
    }

    /// `P(|X| >= r) = e^{-2nr} - e^{-n}` for `0 < r <= 1/2`.
    pub fn tail(&self, r: T) -> T {
        (T::lit(-2.0) * self.n * r).exp() - (-self.n).exp()
    }
}

/// `sigma^2(n) = 1/(2n^2) - e^{-n}(n^2 + 2n + 2)/(4n^2)`.
pub fn increment_variance<T: Real>(n: T) -> T {
    let n2 = n * n;
    T::one() / (T::lit(2.0) * n2) - (-n).exp() * (n2 + T::lit(2.0) * n + T::lit(2.0)) / (T::lit(4.0) * n2)
}

/// Fourth moment of the increment.
pub fn increment_fourth_moment<T: Real>(n: T) -> T {
    let n4 = n.powi(4);
    let poly = n4 + T::lit(4.0) * n.powi(3) + T::lit(12.0) * n * n + T::lit(24.0) * n + T::lit(24.0);
    T::lit(1.5) / n4 - (-n).exp() * poly / (T::lit(16.0) * n4)
}

impl<T: Real> MixedLaw<T> for IncrementLaw<T> {
    fn atoms(&self) -> Vec<(T, T)> {
        vec![(T::zero(), (-self.n).exp())]
    }

    fn density(&self, u: T) -> T {
        if u.abs() <= T::lit(0.5) {
            self.n * (T::lit(-2.0) * self.n * u.abs()).exp()
        } else {
            T::zero()
        }
    }

    fn cdf(&self, u: T) -> T {
        let half = T::lit(0.5);
        if u < -half {
            return T::zero();
        }
        if u >= half {
            return T::one();
        }
        let e = (T::lit(-2.0) * self.n * u.abs()).exp();
        let side = half * (T::one() - (-self.n).exp());
        if u < T::zero() {
            // mass of [-1/2, u]
            half * (e - (-self.n).exp())
        } else {
            side + (-self.n).exp() + half * (T::one() - e)
        }
    }

    fn mean(&self) -> T {
        T::zero()
    }

    fn variance(&self) -> T {
        increment_variance(self.n)
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![T::lit(-0.5), T::zero(), T::lit(0.5)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Mu,
    MuBar,
}

/// Either of the two distance laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawSpec<T> {
    Mu(DeltaLaw<T>),
    MuBar(AuxLaw<T>),
}

pub fn mu_eval<T: Real>(d: T, which: Which) -> Result<LawSpec<T>, ForestError> {
    Ok(match which {
        Which::Mu => LawSpec::Mu(DeltaLaw::new(d)?),
        Which::MuBar => LawSpec::MuBar(AuxLaw::new(d)?),
    })
}

impl<T: Real> MixedLaw<T> for LawSpec<T> {
    fn atoms(&self) -> Vec<(T, T)> {
        match self {
            LawSpec::Mu(l) => l.atoms(),
            LawSpec::MuBar(l) => l.atoms(),
        }
    }
    fn density(&self, u: T) -> T {
        match self {
            LawSpec::Mu(l) => l.density(u),
            LawSpec::MuBar(l) => l.density(u),
        }
    }
    fn cdf(&self, u: T) -> T {
        match self {
            LawSpec::Mu(l) => l.cdf(u),
            LawSpec::MuBar(l) => l.cdf(u),
        }
    }
    fn mean(&self) -> T {
        T::zero()
    }
    fn variance(&self) -> T {
        match self {
            LawSpec::Mu(l) => l.variance(),
            LawSpec::MuBar(l) => l.variance(),
        }
    }
    fn breakpoints(&self) -> Vec<T> {
        match self {
            LawSpec::Mu(l) => l.breakpoints(),
            LawSpec::MuBar(l) => l.breakpoints(),
        }
    }
}

/// `int u^k dlaw(u)` by quadrature of the density plus the atoms.
pub fn moment_by_quadrature<L: MixedLaw<f64>>(law: &L, k: i32, upper_cut: f64) -> f64 {
    let atoms: f64 = law.atoms().iter().map(|&(x, m)| m * x.powi(k)).sum();
    let bps = law.breakpoints();
    let lo = bps[0];
    let hi = *bps.last().unwrap();
    let body = crate::quad::integrate_breaks(|u| u.powi(k) * law.density(u), lo, hi, &bps, 1e-15, 1e-15);
    let tail = crate::quad::integrate_to_inf(|u| u.powi(k) * law.density(u), hi, 1e-15, 1e-15);
    let _ = upper_cut;
    atoms + body.value + tail.value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_values() {
        assert!((f_d(0.0f64, 1.0) - 0.432_332).abs() < 1e-6);
        assert!((DeltaLaw::new(1.0f64).unwrap().atom_mass() - 0.270_671).abs() < 1e-6);
        assert_eq!(aux_alpha(0.0f64), 0.75);
        assert!((aux_beta(0.0f64) - 1.847_264).abs() < 1e-6);
        assert!((2.0 * p_d(1.0f64) - 0.593_994).abs() < 1e-6);
        assert!((increment_variance(1.0f64) - 0.040_151).abs() < 1e-6);
    }

    #[test]
    fn mass_mean_variance_by_quadrature() {
        for d in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let mu = DeltaLaw::new(d).unwrap();
            let bar = AuxLaw::new(d).unwrap();
            assert!((moment_by_quadrature(&mu, 0, 0.0) - 1.0).abs() < 1e-12, "mu mass d={d}");
            assert!(moment_by_quadrature(&mu, 1, 0.0).abs() < 1e-12, "mu mean d={d}");
            assert!((moment_by_quadrature(&mu, 2, 0.0) - mu.variance()).abs() < 1e-8, "mu var d={d}");
            assert!((moment_by_quadrature(&bar, 0, 0.0) - 1.0).abs() < 1e-12, "bar mass d={d}");
            assert!(moment_by_quadrature(&bar, 1, 0.0).abs() < 1e-12, "bar mean d={d}");
            assert!((moment_by_quadrature(&bar, 2, 0.0) - bar.variance()).abs() < 1e-8, "bar var d={d}");
            assert!(bar.alpha() <= mu.atom_mass());
        }
    }

    #[test]
    fn cdfs_end_at_one_and_match_density() {
        for d in [0.3, 1.0, 2.5] {
            let laws: [LawSpec<f64>; 2] = [mu_eval(d, Which::Mu).unwrap(), mu_eval(d, Which::MuBar).unwrap()];
            for law in laws {
                assert!((law.cdf(80.0) - 1.0).abs() < 1e-12);
                let (a, b) = (-d + 0.01, d + 3.7);
                let q = crate::quad::integrate_breaks(|u| law.density(u), a, b, &law.breakpoints(), 1e-14, 1e-14);
                assert!((law.cdf(b) - law.cdf(a) - q.value).abs() < 1e-11);
            }
        }
        let inc = IncrementLaw::new(2.0).unwrap();
        assert!((inc.cdf(0.5f64) - 1.0).abs() < 1e-15);
        assert!((inc.cdf(0.0) - inc.cdf(-1e-300) - (-2.0f64).exp()).abs() < 1e-12);
        assert!((moment_by_quadrature(&inc, 2, 0.0) - increment_variance(2.0)).abs() < 1e-12);
        assert!((moment_by_quadrature(&inc, 4, 0.0) - increment_fourth_moment(2.0)).abs() < 1e-12);
    }

    #[test]
    fn large_intensity_limit() {
        let n = 200.0f64;
        assert!((increment_variance(n) * 2.0 * n * n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_distance() {
        assert!(DeltaLaw::new(0.0).is_err());
        assert!(mu_eval(-1.0, Which::MuBar).is_err());
        assert!(IncrementLaw::new(0.0).is_err());
    }
}
