//! Circle and cylinder arithmetic, folding maps and radial projections.

use crate::Real;
use std::fmt;
use std::sync::Arc as Shared;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("height {0} is negative; the star projection needs t >= 0")]
    NegativeHeight(f64),
    #[error("height {t} lies outside the range of winding function `{tag}`")]
    OutsideRange { t: f64, tag: &'static str },
    #[error("fold half-period must be positive, got {0}")]
    BadPeriod(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

/// Reduce any real to `[0, 1)`. Every circle coordinate goes through here.
pub fn reduce<T: Real>(x: T) -> T {
    let r = x - x.floor();
    // x slightly below an integer can round to exactly 1
    if r >= T::one() || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// A point of `R/Z`, stored in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct CirclePos<T>(T);

impl<T: Real> CirclePos<T> {
    pub fn new(x: T) -> Self {
        CirclePos(reduce(x))
    }

    pub fn get(self) -> T {
        self.0
    }

    pub fn shift(self, dx: T) -> Self {
        Self::new(self.0 + dx)
    }

    /// Counterclockwise displacement from `self` to `other`, in `[0, 1)`.
    pub fn ccw_to(self, other: Self) -> T {
        reduce(other.0 - self.0)
    }
}

impl<T: Real> fmt::Display for CirclePos<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `d(x, y) = min(|x - y|, 1 - |x - y|)`.
pub fn circle_dist<T: Real>(a: CirclePos<T>, b: CirclePos<T>) -> T {
    let d = (a.0 - b.0).abs();
    d.min(T::one() - d)
}

/// A point `(x, t)` of the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CylPoint<T> {
    pub x: CirclePos<T>,
    pub t: T,
}

impl<T: Real> CylPoint<T> {
    pub fn new(x: T, t: T) -> Result<Self, GeometryError> {
        if !x.is_finite() || !t.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(CylPoint { x: CirclePos::new(x), t })
    }
}

/// Counterclockwise arc `[a -> b]`. `[a -> a]` is the single point `a`;
/// the whole circle must be built with [`Arc::full`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Arc<T> {
    pub a: CirclePos<T>,
    pub b: CirclePos<T>,
    full: bool,
}

impl<T: Real> Arc<T> {
    pub fn new(a: T, b: T) -> Self {
        Arc { a: CirclePos::new(a), b: CirclePos::new(b), full: false }
    }

    /// Arc starting at `a` with the given counterclockwise length in `[0, 1]`.
    pub fn from_length(a: T, len: T) -> Self {
        if len >= T::one() {
            Self::full(a)
        } else {
            Self::new(a, a + len.max(T::zero()))
        }
    }

    pub fn full(a: T) -> Self {
        let a = CirclePos::new(a);
        Arc { a, b: a, full: true }
    }

    pub fn length(&self) -> T {
        if self.full {
            T::one()
        } else {
            self.a.ccw_to(self.b)
        }
    }

    pub fn contains(&self, x: CirclePos<T>) -> bool {
        self.full || self.a.ccw_to(x) <= self.length()
    }

    pub fn query(&self, x: CirclePos<T>) -> (bool, T) {
        (self.contains(x), self.length())
    }
}

/// Distance from `x` to the nearest even multiple of `h`: even, `2h`-periodic,
/// with values in `[0, h]`. `h = 1` is the fold `F`, `h = 2n` is `F_{2n}`.
pub fn fold_f<T: Real>(x: T, h: T) -> Result<T, GeometryError> {
    if !(h > T::zero()) {
        return Err(GeometryError::BadPeriod(h.to_f64().unwrap_or(f64::NAN)));
    }
    let p = h + h;
    let r = x - (x / p).floor() * p;
    let r = r.max(T::zero()).min(p);
    Ok(r.min(p - r))
}

/// Integer version of [`fold_f`], used for the lattice reflected walks.
pub fn fold_int(x: i64, h: i64) -> i64 {
    let r = x.rem_euclid(2 * h);
    r.min(2 * h - r)
}

/// A point of the punctured plane in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadialPoint<T> {
    pub theta: T,
    pub r: T,
}

impl<T: Real> RadialPoint<T> {
    pub fn new(theta: T, r: T) -> Self {
        let tau = T::TAU();
        let mut th = theta - (theta / tau).floor() * tau;
        if th >= tau || th < T::zero() {
            th = T::zero();
        }
        RadialPoint { theta: th, r }
    }

    pub fn cartesian(&self) -> (T, T) {
        (self.r * self.theta.cos(), self.r * self.theta.sin())
    }
}

fn four_pi_sq<T: Real>() -> T {
    let p = T::PI();
    T::lit(4.0) * p * p
}

/// `(x, t) -> (2 pi x, 4 pi^2 t)`.
pub fn project_star<T: Real>(p: CylPoint<T>) -> Result<RadialPoint<T>, GeometryError> {
    if p.t < T::zero() {
        return Err(GeometryError::NegativeHeight(p.t.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(RadialPoint::new(T::TAU() * p.x.get(), four_pi_sq::<T>() * p.t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindingTag {
    Standard,
    Log,
    Arctan,
    Custom,
}

impl WindingTag {
    pub fn name(self) -> &'static str {
        match self {
            WindingTag::Standard => "standard",
            WindingTag::Log => "log",
            WindingTag::Arctan => "arctan",
            WindingTag::Custom => "custom",
        }
    }
}

/// Interval of admissible heights `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Real> Span<T> {
    pub fn contains(&self, t: T) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }
}

type MapFn<T> = Shared<dyn Fn(T) -> T + Send + Sync>;

/// Winding parameter `f : I -> J`; the radius of a height `t` is `f^{-1}(t)`.
#[derive(Clone)]
pub struct WindingFn<T> {
    pub tag: WindingTag,
    forward: MapFn<T>,
    inverse: MapFn<T>,
    range: Span<T>,
}

impl<T: Real> fmt::Debug for WindingFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WindingFn").field("tag", &self.tag).field("range", &self.range).finish()
    }
}

impl<T: Real> WindingFn<T> {
    /// `f(r) = r / (4 pi^2)` on `[0, inf)`.
    pub fn standard() -> Self {
        WindingFn {
            tag: WindingTag::Standard,
            forward: Shared::new(|r: T| r / four_pi_sq::<T>()),
            inverse: Shared::new(|t: T| four_pi_sq::<T>() * t),
            range: Span { lo: T::zero(), hi: T::infinity(), lo_closed: true, hi_closed: false },
        }
    }

    /// `f(r) = ln r`, `I = (0, inf)`, `J = R`.
    pub fn log() -> Self {
        WindingFn {
            tag: WindingTag::Log,
            forward: Shared::new(|r: T| r.ln()),
            inverse: Shared::new(|t: T| t.exp()),
            range: Span {
                lo: T::neg_infinity(),
                hi: T::infinity(),
                lo_closed: false,
                hi_closed: false,
            },
        }
    }

    /// `f(r) = (2/pi) arctan r`, `J = [0, 1)`.
    pub fn arctan() -> Self {
        WindingFn {
            tag: WindingTag::Arctan,
            forward: Shared::new(|r: T| T::lit(2.0) / T::PI() * r.atan()),
            inverse: Shared::new(|t: T| (T::PI() * t / T::lit(2.0)).tan()),
            range: Span { lo: T::zero(), hi: T::one(), lo_closed: true, hi_closed: false },
        }
    }

    /// User-supplied pair; no numerical inversion is attempted.
    pub fn custom(
        forward: impl Fn(T) -> T + Send + Sync + 'static,
        inverse: impl Fn(T) -> T + Send + Sync + 'static,
        range: Span<T>,
    ) -> Self {
        WindingFn {
            tag: WindingTag::Custom,
            forward: Shared::new(forward),
            inverse: Shared::new(inverse),
            range,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "standard" => Some(Self::standard()),
            "log" => Some(Self::log()),
            "arctan" => Some(Self::arctan()),
            _ => None,
        }
    }

    pub fn range(&self) -> Span<T> {
        self.range
    }

    pub fn forward(&self, r: T) -> T {
        (self.forward)(r)
    }

    pub fn inverse(&self, t: T) -> T {
        (self.inverse)(t)
    }
}

/// `(x, t) -> (2 pi x, f^{-1}(t))`.
pub fn project_f<T: Real>(p: CylPoint<T>, f: &WindingFn<T>) -> Result<RadialPoint<T>, GeometryError> {
    if !f.range.contains(p.t) {
        return Err(GeometryError::OutsideRange {
            t: p.t.to_f64().unwrap_or(f64::NAN),
            tag: f.tag.name(),
        });
    }
    Ok(RadialPoint::new(T::TAU() * p.x.get(), f.inverse(p.t)))
}

/// Inverse of [`project_f`].
pub fn unproject_f<T: Real>(q: RadialPoint<T>, f: &WindingFn<T>) -> CylPoint<T> {
    CylPoint { x: CirclePos::new(q.theta / T::TAU()), t: f.forward(q.r) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_dist_examples() {
        let p = |x: f64| CirclePos::new(x);
        assert!((circle_dist(p(0.1), p(0.9)) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(p(0.3), p(0.3)), 0.0);
        assert_eq!(circle_dist(p(0.0), p(0.5)), 0.5);
    }

    #[test]
    fn arc_examples() {
        let (c, l) = Arc::new(0.9f64, 0.1).query(CirclePos::new(0.95));
        assert!(c && (l - 0.2).abs() < 1e-15);
        let (c, l) = Arc::new(0.2f64, 0.7).query(CirclePos::new(0.8));
        assert!(!c && (l - 0.5).abs() < 1e-15);
        assert_eq!(Arc::new(0.2, 0.2).query(CirclePos::new(0.2)), (true, 0.0));
        assert!(!Arc::new(0.2, 0.2).contains(CirclePos::new(0.3)));
        assert_eq!(Arc::<f64>::full(0.2).length(), 1.0);
    }

    #[test]
    fn fold_examples() {
        assert!((fold_f(1.5f64, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((fold_f(-0.3f64, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(fold_f(9.0, 4.0).unwrap(), 1.0);
        assert_eq!(fold_int(9, 4), 1);
        assert!(fold_f(1.0, 0.0).is_err());
    }

    #[test]
    fn star_examples() {
        let pi = std::f64::consts::PI;
        let q = project_star(CylPoint::new(0.25, 1.0 / (4.0 * pi * pi)).unwrap()).unwrap();
        assert!((q.theta - pi / 2.0).abs() < 1e-14 && (q.r - 1.0).abs() < 1e-14);
        let q = project_star(CylPoint::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!((q.theta, q.r), (0.0, 0.0));
        let q = project_star(CylPoint::new(0.5, 2.0 / (4.0 * pi * pi)).unwrap()).unwrap();
        assert!((q.theta - pi).abs() < 1e-14 && (q.r - 2.0).abs() < 1e-14);
        assert!(project_star(CylPoint::new(0.0, -1.0).unwrap()).is_err());
    }

    #[test]
    fn catalog_examples() {
        let q = project_f(CylPoint::new(0.0, 0.0).unwrap(), &WindingFn::log()).unwrap();
        assert_eq!((q.theta, q.r), (0.0, 1.0));
        let q = project_f(CylPoint::new(0.0, 0.5).unwrap(), &WindingFn::arctan()).unwrap();
        assert!((q.r - 1.0f64).abs() < 1e-15);
        assert!(project_f(CylPoint::new(0.0, 1.0).unwrap(), &WindingFn::arctan()).is_err());
        assert!(project_f(CylPoint::new(0.0, -0.1).unwrap(), &WindingFn::standard()).is_err());
    }

    #[test]
    fn works_in_f32() {
        let d = circle_dist(CirclePos::new(0.1f32), CirclePos::new(0.9f32));
        assert!((d - 0.2).abs() < 1e-6);
        assert!((fold_f(1.5f32, 1.0).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn reduce_stays_in_range() {
        assert_eq!(reduce(-1e-18f64), 0.0);
        assert!(reduce(-0.25f64) == 0.75);
        assert!(reduce(3.0f64) == 0.0);
    }
}
