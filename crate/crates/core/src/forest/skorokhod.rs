//! Random interval `[U, V]` whose Brownian exit value has law `mu_bar_d`.

use super::laws::{f_d_integral, p_d};
use rand::Rng;
use rand_distr::Exp1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkorokhodStep {
    pub u: f64,
    pub v: f64,
    pub exit_value: f64,
    /// the symmetric event `A_d`
    pub on_a: bool,
}

/// Probability that a Brownian motion from 0 leaves `[u, v]` through `v`.
pub fn exit_through_v(u: f64, v: f64) -> f64 {
    -u / (v - u)
}

fn gamma2_or_exp<R: Rng + ?Sized>(w_gamma: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    if rng.random::<f64>() < w_gamma {
        e + rng.sample::<f64, _>(Exp1)
    } else {
        e
    }
}

/// Solve `int_0^s f_d = target` on `[0, d]` by bisection.
fn symmetric_radius(d: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, d);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f_d_integral(mid, d) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn skorokhod_step<R: Rng + ?Sized>(d: f64, rng: &mut R) -> SkorokhodStep {
    let p = p_d(d);
    if rng.random::<f64>() < 2.0 * p {
        let v = symmetric_radius(d, rng.random::<f64>() * p);
        let exit_value = if rng.random::<bool>() { v } else { -v };
        return SkorokhodStep { u: -v, v, exit_value, on_a: true };
    }
    let u = -d - 1.0;
    // densities (v+d+1)/(2(1+d)) e^{d-v} on [d, inf) and
    // (v+d+1)/(2(d+2)) e^{d+2-v} on [d+2, inf), as Gamma(2)/Exp(1) mixtures
    let v = if rng.random::<f64>() < 2.0 * d / (1.0 + 2.0 * d) {
        d + gamma2_or_exp(1.0 / (2.0 * (1.0 + d)), rng)
    } else {
        d + 2.0 + gamma2_or_exp(1.0 / (2.0 * d + 4.0), rng)
    };
    let exit_value = if rng.random::<f64>() < exit_through_v(u, v) { v } else { u };
    SkorokhodStep { u, v, exit_value, on_a: false }
}
