//! Coalescing Brownian motions on the circle (or the line) advanced on a
//! uniform grid. Only circularly adjacent clusters are tested for merging;
//! between grid points a Brownian-bridge test catches excursions that touch
//! and come back.

use crate::seed::{mix3, rng, SimRng};
use crate::unionfind::UnionFind;
use crate::Censorable;
use rand::Rng;
use rand_distr::StandardNormal;

/// Beyond this value of `g0 g1 / dt` the bridge probability is treated as 0.
const BRIDGE_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// positions modulo 1
    Cylinder,
    /// positions on the real line, no wraparound
    Planar,
}

/// Standard normal and uniform draws attributed to a walker.
pub trait NoiseSource {
    fn normal(&mut self, walker: usize) -> f64;
    fn uniform(&mut self, walker: usize) -> f64;
}

/// One stream shared by all walkers.
pub struct SharedNoise(pub SimRng);

impl NoiseSource for SharedNoise {
    fn normal(&mut self, _: usize) -> f64 {
        self.0.sample(StandardNormal)
    }
    fn uniform(&mut self, _: usize) -> f64 {
        self.0.random()
    }
}

/// One stream per walker, so two systems driven by the same seed see the
/// same increments for a walker as long as it leads its cluster.
pub struct PerWalkerNoise {
    streams: Vec<SimRng>,
}

impl PerWalkerNoise {
    pub fn new(seed: u64, walkers: usize) -> Self {
        PerWalkerNoise { streams: (0..walkers).map(|w| rng(mix3(seed, w as u64, 0x77))).collect() }
    }
}

impl NoiseSource for PerWalkerNoise {
    fn normal(&mut self, walker: usize) -> f64 {
        self.streams[walker].sample(StandardNormal)
    }
    fn uniform(&mut self, walker: usize) -> f64 {
        self.streams[walker].random()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MergeEvent {
    /// grid step after which the merge holds
    pub step: usize,
    pub survivor: usize,
    pub absorbed: usize,
}

/// State of a finite coalescing system.
#[derive(Debug, Clone)]
pub struct CoalescingSystem {
    pub topology: Topology,
    dt: f64,
    sd: f64,
    /// current position of every walker that leads a cluster
    pos: Vec<f64>,
    /// cluster leaders in circular (or linear) order
    alive: Vec<usize>,
    /// `gaps[k]`: displacement from `alive[k]` to `alive[k + 1]`; for the
    /// cylinder the last entry closes the circle and all gaps sum to 1
    gaps: Vec<f64>,
    uf: UnionFind,
    lead: Vec<usize>,
    pub merges: Vec<MergeEvent>,
    pub step: usize,
    /// steps with an increment of at least 1/2
    pub large_jumps: usize,
}

impl CoalescingSystem {
    /// Walkers at `starts`; coincident starts merge at step 0.
    pub fn new(topology: Topology, dt: f64, starts: &[f64]) -> Self {
        let mut sys = Self::empty(topology, dt, starts.len());
        for (w, &x) in starts.iter().enumerate() {
            sys.spawn(w, x);
        }
        sys
    }

    /// Room for `walkers` walkers, none of them started.
    pub fn empty(topology: Topology, dt: f64, walkers: usize) -> Self {
        CoalescingSystem {
            topology,
            dt,
            sd: dt.sqrt(),
            pos: vec![f64::NAN; walkers],
            alive: Vec::with_capacity(walkers),
            gaps: Vec::with_capacity(walkers),
            uf: UnionFind::new(walkers),
            lead: (0..walkers).collect(),
            merges: Vec::new(),
            step: 0,
            large_jumps: 0,
        }
    }

    /// Start walker `w` at `x` at the current step. Landing exactly on a
    /// cluster merges it there.
    pub fn spawn(&mut self, w: usize, x: f64) {
        let x = match self.topology {
            Topology::Cylinder => x.rem_euclid(1.0),
            Topology::Planar => x,
        };
        self.pos[w] = x;
        if self.alive.is_empty() {
            self.alive.push(w);
            self.gaps.push(self.closing_gap());
            return;
        }
        if self.topology == Topology::Planar && x < self.pos[self.alive[0]] {
            let g = self.pos[self.alive[0]] - x;
            self.alive.insert(0, w);
            self.gaps.insert(0, g);
            return;
        }
        for k in 0..self.alive.len() {
            let base = self.pos[self.alive[k]];
            let d = match self.topology {
                Topology::Cylinder => (x - base).rem_euclid(1.0),
                Topology::Planar => x - base,
            };
            if d == 0.0 {
                let l = self.alive[k];
                self.join(l, w);
                return;
            }
            if d < self.gaps[k] {
                let rest = self.gaps[k] - d;
                self.gaps[k] = d;
                self.alive.insert(k + 1, w);
                self.gaps.insert(k + 1, rest);
                return;
            }
        }
        unreachable!("gaps cover the circle or the half-line");
    }

    fn closing_gap(&self) -> f64 {
        match self.topology {
            Topology::Cylinder => 1.0,
            Topology::Planar => f64::INFINITY,
        }
    }

    fn join(&mut self, survivor: usize, absorbed: usize) {
        self.uf.union(survivor, absorbed);
        let r = self.uf.find(survivor);
        self.lead[r] = survivor;
        self.merges.push(MergeEvent { step: self.step, survivor, absorbed });
    }

    /// Merge `alive[k]` with its successor; the left walker survives.
    fn merge_link(&mut self, k: usize) {
        let len = self.alive.len();
        let next = (k + 1) % len;
        let (s, a) = (self.alive[k], self.alive[next]);
        self.join(s, a);
        let g = self.gaps[k] + self.gaps[next];
        if next == 0 {
            // wrap link: drop the first entry, the survivor is last
            self.alive.remove(0);
            self.gaps.remove(0);
            let last = self.gaps.len() - 1;
            self.gaps[last] = g;
        } else {
            self.alive.remove(next);
            self.gaps.remove(next);
            self.gaps[k] = g;
        }
        if self.alive.len() == 1 && self.topology == Topology::Cylinder {
            self.gaps[0] = 1.0;
        }
    }

    pub fn clusters(&self) -> usize {
        self.alive.len()
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Leader of the cluster containing walker `w`.
    pub fn leader(&mut self, w: usize) -> usize {
        let r = self.uf.find(w);
        self.lead[r]
    }

    /// Current position of walker `w` (its cluster's position).
    pub fn position(&mut self, w: usize) -> f64 {
        let l = self.leader(w);
        self.pos[l]
    }

    pub fn alive(&self) -> &[usize] {
        &self.alive
    }

    fn links(&self) -> usize {
        match (self.topology, self.alive.len()) {
            (_, 0 | 1) => 0,
            (Topology::Cylinder, k) => k,
            (Topology::Planar, k) => k - 1,
        }
    }

    /// Advance one grid step.
    pub fn step<N: NoiseSource + ?Sized>(&mut self, noise: &mut N) {
        let k = self.alive.len();
        let mut inc = Vec::with_capacity(k);
        for &w in &self.alive {
            let d = self.sd * noise.normal(w);
            if d.abs() >= 0.5 {
                self.large_jumps += 1;
            }
            inc.push(d);
            let x = self.pos[w] + d;
            self.pos[w] = match self.topology {
                Topology::Cylinder => x.rem_euclid(1.0),
                Topology::Planar => x,
            };
        }
        self.step += 1;
        let links = self.links();
        let mut flags = vec![false; k];
        for i in 0..links {
            let j = (i + 1) % k;
            let g0 = self.gaps[i];
            let g1 = g0 + inc[j] - inc[i];
            self.gaps[i] = g1;
            if g1 <= 0.0 {
                flags[i] = true;
            } else {
                let e = g0 * g1 / self.dt;
                if e < BRIDGE_CUTOFF && noise.uniform(self.alive[i]) < (-e).exp() {
                    flags[i] = true;
                }
            }
        }
        // merge flagged links, then any link whose real gap is not positive
        loop {
            let links = self.links();
            if links == 0 {
                break;
            }
            let hit = (0..links).find(|&i| flags[i] || self.gaps[i] <= 0.0);
            match hit {
                Some(i) => {
                    let len = self.alive.len();
                    let next = (i + 1) % len;
                    let inherited = flags[next];
                    self.merge_link(i);
                    if next == 0 {
                        flags.remove(0);
                        let last = flags.len() - 1;
                        flags[last] = inherited;
                    } else {
                        flags.remove(next);
                        flags[i] = inherited;
                    }
                }
                None => break,
            }
        }
    }

    /// Step until one cluster remains or `cap` steps have been taken.
    pub fn run_to_single<N: NoiseSource + ?Sized>(&mut self, noise: &mut N, cap: usize) -> Censorable<f64> {
        while self.alive.len() > 1 {
            if self.step >= cap {
                return Censorable::Censored { cap: self.time() };
            }
            self.step(noise);
        }
        let last = self.merges.last().map(|m| m.step).unwrap_or(0);
        Censorable::Value(last as f64 * self.dt)
    }
}

/// Coalescence time of two walkers at circular gap `gap`, simulated on the gap
/// itself: a Brownian motion of variance `2 dt` per step absorbed at 0 and 1,
/// with the bridge test at both barriers.
pub fn pair_coalescence_time<R: Rng + ?Sized>(gap: f64, dt: f64, cap: f64, rng: &mut R) -> Censorable<f64> {
    if gap <= 0.0 || gap >= 1.0 {
        return Censorable::Value(0.0);
    }
    let sd = (2.0 * dt).sqrt();
    let two_dt = 2.0 * dt;
    let max_steps = (cap / dt).ceil() as u64;
    let mut g = gap;
    for k in 1..=max_steps {
        let g1 = g + sd * rng.sample::<f64, _>(StandardNormal);
        if g1 <= 0.0 || g1 >= 1.0 {
            return Censorable::Value(k as f64 * dt);
        }
        // barrier at 0 and barrier at 1, tested independently
        let e0 = 2.0 * g * g1 / two_dt;
        let e1 = 2.0 * (1.0 - g) * (1.0 - g1) / two_dt;
        if e0 < BRIDGE_CUTOFF && rng.random::<f64>() < (-e0).exp() {
            return Censorable::Value(k as f64 * dt);
        }
        if e1 < BRIDGE_CUTOFF && rng.random::<f64>() < (-e1).exp() {
            return Censorable::Value(k as f64 * dt);
        }
        g = g1;
    }
    Censorable::Censored { cap: max_steps as f64 * dt }
}
