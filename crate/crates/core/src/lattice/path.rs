use super::{is_primal, wrap_step, Environment, LatticeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct LatticeSite {
    pub x: u32,
    pub t: i64,
}

impl LatticeSite {
    pub fn new(x: u32, t: i64) -> Self {
        LatticeSite { x, t }
    }

    pub fn is_primal(&self) -> bool {
        is_primal(self.x, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// Primal walker one step up from `(x, t)`.
#[inline]
pub fn step_up<E: Environment + ?Sized>(env: &E, x: u32, t: i64) -> u32 {
    wrap_step(x, env.xi(x, t), env.modulus())
}

/// Dual walker one step down from `(x, t)`: it reads the primal site right
/// below it and moves the other way, so dual edges fill the gaps between
/// primal edges.
#[inline]
pub fn step_down<E: Environment + ?Sized>(env: &E, x: u32, t: i64) -> u32 {
    wrap_step(x, -env.xi(x, t - 1), env.modulus())
}

/// A primal (up) or dual (down) path. `positions[k]` is the position at
/// height `start.t + k` (up) or `start.t - k` (down); `xi[k]` is the field
/// value read on step `k`, which labels the edge taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    pub n: u32,
    pub start: LatticeSite,
    pub direction: Direction,
    pub positions: Vec<u32>,
    pub xi: Vec<i8>,
}

impl LatticePath {
    pub fn end_height(&self) -> i64 {
        let len = self.positions.len() as i64 - 1;
        match self.direction {
            Direction::Up => self.start.t + len,
            Direction::Down => self.start.t - len,
        }
    }

    /// Position at height `h`, if the path visits it.
    pub fn at(&self, h: i64) -> Option<u32> {
        let k = match self.direction {
            Direction::Up => h - self.start.t,
            Direction::Down => self.start.t - h,
        };
        if k < 0 {
            return None;
        }
        self.positions.get(k as usize).copied()
    }

    /// `(height, position)` pairs in increasing height.
    pub fn by_height(&self) -> Vec<(i64, u32)> {
        let mut v: Vec<(i64, u32)> = self
            .positions
            .iter()
            .enumerate()
            .map(|(k, &x)| match self.direction {
                Direction::Up => (self.start.t + k as i64, x),
                Direction::Down => (self.start.t - k as i64, x),
            })
            .collect();
        v.sort_by_key(|p| p.0);
        v
    }
}

pub fn trace_path<E: Environment + ?Sized>(
    env: &E,
    start: LatticeSite,
    direction: Direction,
    stop_height: i64,
) -> Result<LatticePath, LatticeError> {
    let modulus = env.modulus();
    if start.x >= modulus {
        return Err(LatticeError::OutOfRange { x: start.x, modulus });
    }
    let primal = start.is_primal();
    match direction {
        Direction::Up if !primal => return Err(LatticeError::Parity { x: start.x, t: start.t }),
        Direction::Down if primal => return Err(LatticeError::Parity { x: start.x, t: start.t }),
        _ => {}
    }
    let len = match direction {
        Direction::Up => stop_height - start.t,
        Direction::Down => start.t - stop_height,
    };
    if len < 0 {
        return Err(LatticeError::BadStop { start: start.t, stop: stop_height });
    }
    let mut positions = Vec::with_capacity(len as usize + 1);
    let mut xi = Vec::with_capacity(len as usize);
    let mut x = start.x;
    positions.push(x);
    for k in 0..len {
        match direction {
            Direction::Up => {
                let t = start.t + k;
                let v = env.xi(x, t);
                x = wrap_step(x, v, modulus);
                xi.push(v);
            }
            Direction::Down => {
                let t = start.t - k;
                let v = env.xi(x, t - 1);
                x = wrap_step(x, -v, modulus);
                xi.push(v);
            }
        }
        positions.push(x);
    }
    Ok(LatticePath { n: env.n(), start, direction, positions, xi })
}

/// Whether a primal and a dual path cross between two common heights. The
/// counterclockwise offset dual - primal is odd; a crossing is a jump of that
/// offset through 0 (mod 2n).
pub fn crosses(primal: &LatticePath, dual: &LatticePath) -> bool {
    let m = 2 * primal.n as i64;
    let p = primal.by_height();
    let lo = p.first().map(|q| q.0).unwrap_or(0).max(dual.by_height().first().map(|q| q.0).unwrap_or(0));
    let hi = p.last().map(|q| q.0).unwrap_or(0).min(dual.by_height().last().map(|q| q.0).unwrap_or(0));
    for h in lo..hi {
        let (Some(p0), Some(p1), Some(d0), Some(d1)) = (primal.at(h), primal.at(h + 1), dual.at(h), dual.at(h + 1)) else {
            continue;
        };
        let u0 = (d0 as i64 - p0 as i64).rem_euclid(m);
        let dd = signed_step(d0, d1, m);
        let dp = signed_step(p0, p1, m);
        let u1 = u0 + dd - dp;
        if u1 <= 0 || u1 >= m {
            return true;
        }
    }
    false
}

fn signed_step(a: u32, b: u32, m: i64) -> i64 {
    let d = (b as i64 - a as i64).rem_euclid(m);
    if d == 1 {
        1
    } else {
        -1
    }
}

/// Lattice path seen in continuum units: `x / 2n`, one step per `1 / (4 n^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPath {
    pub n: u32,
    pub t0: f64,
    pub dt: f64,
    pub x: Vec<f64>,
}

pub fn rescale_point(x: u32, t: i64, n: u32) -> (f64, f64) {
    let nn = n as f64;
    (x as f64 / (2.0 * nn), t as f64 / (4.0 * nn * nn))
}

pub fn rescale_path(path: &LatticePath) -> RescaledPath {
    let n = path.n;
    let pts = path.by_height();
    let t0 = pts.first().map(|p| p.0).unwrap_or(path.start.t);
    RescaledPath {
        n,
        t0: rescale_point(0, t0, n).1,
        dt: 1.0 / (4.0 * n as f64 * n as f64),
        x: pts.iter().map(|&(_, x)| rescale_point(x, 0, n).0).collect(),
    }
}

impl RescaledPath {
    /// Back to lattice `(height, position)` pairs.
    pub fn to_lattice(&self) -> Vec<(i64, u32)> {
        let nn = self.n as f64;
        let h0 = (self.t0 * 4.0 * nn * nn).round() as i64;
        self.x
            .iter()
            .enumerate()
            .map(|(k, &x)| (h0 + k as i64, (x * 2.0 * nn).round() as u32))
            .collect()
    }
}
