//! The angle `A(i) = |M1(i) -> M2(i)|` of the kernel chain is a simple walk
//! reflected at 0 and 2n observed at even times, equivalently the fold
//! `F_{2n}` of a free walk; the first coordinate moves by `-dZ` on odd steps.

use super::kernel::{kernel_row, kernel_step, PairState};
use super::{wrap_step, LatticeError};
use crate::geometry::fold_int;
use crate::Prob;
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReflectedTrajectory {
    pub n: u32,
    pub angle: Vec<u32>,
    pub m1: Vec<u32>,
}

fn check_start(n: u32, a0: u32, m0: u32) -> Result<(), LatticeError> {
    if n == 0 {
        return Err(LatticeError::ZeroWidth);
    }
    if a0 % 2 == 0 || a0 >= 2 * n {
        return Err(LatticeError::Parity { x: a0, t: 0 });
    }
    if m0 % 2 == 1 || m0 >= 2 * n {
        return Err(LatticeError::Parity { x: m0, t: 0 });
    }
    Ok(())
}

/// Half-step of the walk reflected at 0 and `2n`.
#[inline]
fn reflected_half_step(z: i64, up: bool, top: i64) -> i64 {
    if z == 0 {
        1
    } else if z == top {
        top - 1
    } else if up {
        z + 1
    } else {
        z - 1
    }
}

pub fn reflected_walk<R: Rng + ?Sized>(
    n: u32,
    a0: u32,
    m0: u32,
    steps: usize,
    rng: &mut R,
) -> Result<ReflectedTrajectory, LatticeError> {
    check_start(n, a0, m0)?;
    let top = 2 * n as i64;
    let m = 2 * n;
    let mut z = a0 as i64;
    let mut m1 = m0;
    let mut angle = vec![a0];
    let mut ms = vec![m0];
    for _ in 0..steps {
        // z is odd here, so the first half-step is never reflected
        let d: i8 = if rng.random::<bool>() { 1 } else { -1 };
        z += d as i64;
        m1 = wrap_step(m1, -d, m);
        z = reflected_half_step(z, rng.random::<bool>(), top);
        angle.push(z as u32);
        ms.push(m1);
    }
    Ok(ReflectedTrajectory { n, angle, m1: ms })
}

/// `F_{2n}` of a free simple walk at even times.
pub fn folded_free_walk<R: Rng + ?Sized>(n: u32, a0: u32, steps: usize, rng: &mut R) -> Vec<u32> {
    let mut z = a0 as i64;
    let mut out = vec![fold_int(z, 2 * n as i64) as u32];
    for _ in 0..steps {
        for _ in 0..2 {
            z += if rng.random::<bool>() { 1 } else { -1 };
        }
        out.push(fold_int(z, 2 * n as i64) as u32);
    }
    out
}

pub fn kernel_chain<R: Rng + ?Sized>(
    n: u32,
    start: PairState,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<PairState>, LatticeError> {
    let mut s = start;
    let mut out = vec![s];
    for _ in 0..steps {
        s = kernel_step(n, s, rng)?;
        out.push(s);
    }
    Ok(out)
}

pub type JointLaw = BTreeMap<(u32, u32), Prob>;

fn add(map: &mut JointLaw, k: (u32, u32), p: Prob) {
    *map.entry(k).or_insert_with(|| Prob::from_integer(0)) += p;
}

/// Exact law of `(A(i), M1(i))`, `i = 0..=steps`, under the kernel chain.
pub fn exact_joint_kernel(n: u32, a0: u32, m0: u32, steps: usize) -> Result<Vec<JointLaw>, LatticeError> {
    check_start(n, a0, m0)?;
    let mut cur: BTreeMap<PairState, Prob> = BTreeMap::new();
    cur.insert(PairState::new(m0, (m0 + a0) % (2 * n)), Prob::from_integer(1));
    let mut out = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let mut j = JointLaw::new();
        for (s, p) in &cur {
            add(&mut j, (s.angle(n), s.a), *p);
        }
        out.push(j);
        if i == steps {
            break;
        }
        let mut next: BTreeMap<PairState, Prob> = BTreeMap::new();
        for (s, p) in &cur {
            for (t, q) in kernel_row(n, *s)? {
                *next.entry(t).or_insert_with(|| Prob::from_integer(0)) += *p * q;
            }
        }
        cur = next;
    }
    Ok(out)
}

/// Exact law of `(Z_{2i}, M1(i))` under the reflected-walk construction.
pub fn exact_joint_reflected(n: u32, a0: u32, m0: u32, steps: usize) -> Result<Vec<JointLaw>, LatticeError> {
    check_start(n, a0, m0)?;
    let top = 2 * n as i64;
    let m = 2 * n;
    let half = Prob::new(1, 2);
    let mut cur = JointLaw::new();
    cur.insert((a0, m0), Prob::from_integer(1));
    let mut out = vec![cur.clone()];
    for _ in 0..steps {
        let mut next = JointLaw::new();
        for (&(z, m1), &p) in &cur {
            for d in [1i8, -1] {
                let z1 = z as i64 + d as i64;
                let m1n = wrap_step(m1, -d, m);
                for up in [true, false] {
                    let z2 = reflected_half_step(z1, up, top);
                    add(&mut next, (z2 as u32, m1n), p * half * half);
                }
            }
        }
        cur = next;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Exact law of `F_{2n}(a0 + S_{2i})` for a free simple walk `S`.
pub fn exact_angle_folded(n: u32, a0: u32, steps: usize) -> Vec<BTreeMap<u32, Prob>> {
    let mut out = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let k = 2 * i as i64;
        let mut law = BTreeMap::new();
        let mut binom: i64 = 1;
        for up in 0..=k {
            let z = a0 as i64 + 2 * up - k;
            let p = Prob::new(binom, 1i64 << k);
            *law.entry(fold_int(z, 2 * n as i64) as u32).or_insert_with(|| Prob::from_integer(0)) += p;
            binom = binom * (k - up) / (up + 1);
        }
        out.push(law);
    }
    out
}

/// Angle marginal of a joint law.
pub fn angle_marginal(j: &JointLaw) -> BTreeMap<u32, Prob> {
    let mut m = BTreeMap::new();
    for (&(a, _), &p) in j {
        *m.entry(a).or_insert_with(|| Prob::from_integer(0)) += p;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;

    #[test]
    fn angle_stays_in_range_and_alternates() {
        let mut r = rng(4);
        let tr = reflected_walk(3, 1, 0, 2000, &mut r).unwrap();
        assert!(tr.angle.iter().all(|&a| a <= 6 && a % 2 == 1));
        assert!(tr.m1.iter().enumerate().all(|(i, &x)| x as usize % 2 == i % 2));
    }

    #[test]
    fn three_routes_agree_exactly_small() {
        let k = exact_joint_kernel(2, 1, 0, 6).unwrap();
        let r = exact_joint_reflected(2, 1, 0, 6).unwrap();
        let f = exact_angle_folded(2, 1, 6);
        for i in 0..=6 {
            assert_eq!(k[i], r[i], "joint law differs at step {i}");
            assert_eq!(angle_marginal(&k[i]), f[i], "folded law differs at step {i}");
        }
    }

    #[test]
    fn bad_starts() {
        let mut r = rng(1);
        assert!(reflected_walk(2, 2, 0, 3, &mut r).is_err());
        assert!(reflected_walk(2, 1, 1, 3, &mut r).is_err());
        assert!(reflected_walk(2, 5, 0, 3, &mut r).is_err());
    }
}
