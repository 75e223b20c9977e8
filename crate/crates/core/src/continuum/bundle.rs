//! Finite bundles of coalescing Brownian motions modulo 1 and the counts
//! `eta`, `eta_hat` read off them.

use super::system::{CoalescingSystem, MergeEvent, NoiseSource, PerWalkerNoise, SharedNoise, Topology};
use super::{ContinuumError, TimeGrid};
use crate::export::BundleRecord;
use crate::geometry::{Arc, CirclePos};
use crate::seed::rng;
use crate::unionfind::UnionFind;
use crate::Censorable;

/// Walkers of a bundle and their recorded positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub topology: Topology,
    /// `(x, start time)` per walker
    pub starts: Vec<(f64, f64)>,
    pub birth_step: Vec<usize>,
    /// grid steps at which positions were recorded
    pub recorded: Vec<usize>,
    /// `positions[w][r]` at `recorded[r]`; NaN before birth
    pub positions: Vec<Vec<f64>>,
    pub merges: Vec<MergeEvent>,
    /// increments of size 1/2 or more (expected to be 0)
    pub large_jumps: usize,
}

/// Which grid steps a bundle keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Every(usize),
    Steps(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    /// one stream for the whole bundle
    Shared,
    /// one stream per walker, for couplings across topologies
    PerWalker,
}

pub fn sample_coalescing_bundle(starts: &[(f64, f64)], grid: TimeGrid, seed: u64) -> Result<PathBundle, ContinuumError> {
    sample_bundle_with(starts, grid, Topology::Cylinder, Record::Every(1), Noise::Shared, seed)
}

pub fn sample_bundle_with(
    starts: &[(f64, f64)],
    grid: TimeGrid,
    topology: Topology,
    record: Record,
    noise: Noise,
    seed: u64,
) -> Result<PathBundle, ContinuumError> {
    let n = starts.len();
    for (i, a) in starts.iter().enumerate() {
        if starts[..i].iter().any(|b| b == a) {
            return Err(ContinuumError::DuplicateStart(a.0, a.1));
        }
    }
    let mut birth = Vec::with_capacity(n);
    for &(_, s) in starts {
        birth.push(grid.index_of(s)?);
    }
    let mut rec: Vec<usize> = match record {
        Record::Every(k) => (0..=grid.steps).step_by(k.max(1)).collect(),
        Record::Steps(v) => v.into_iter().filter(|&s| s <= grid.steps).collect(),
    };
    rec.sort_unstable();
    rec.dedup();
    let mut by_birth: Vec<usize> = (0..n).collect();
    by_birth.sort_by_key(|&w| (birth[w], w));

    let mut sys = CoalescingSystem::empty(topology, grid.dt, n);
    let mut src: Box<dyn NoiseSource> = match noise {
        Noise::Shared => Box::new(SharedNoise(rng(seed))),
        Noise::PerWalker => Box::new(PerWalkerNoise::new(seed, n)),
    };
    let mut positions = vec![Vec::with_capacity(rec.len()); n];
    let mut next_birth = 0;
    let mut next_rec = 0;
    for step in 0..=grid.steps {
        while next_birth < n && birth[by_birth[next_birth]] == step {
            let w = by_birth[next_birth];
            sys.spawn(w, starts[w].0);
            next_birth += 1;
        }
        if next_rec < rec.len() && rec[next_rec] == step {
            for (w, row) in positions.iter_mut().enumerate() {
                row.push(if birth[w] <= step { sys.position(w) } else { f64::NAN });
            }
            next_rec += 1;
        }
        if step < grid.steps {
            sys.step(src.as_mut());
        }
    }
    Ok(PathBundle {
        grid,
        topology,
        starts: starts.to_vec(),
        birth_step: birth,
        recorded: rec,
        positions,
        large_jumps: sys.large_jumps,
        merges: sys.merges,
    })
}

impl PathBundle {
    fn record_index(&self, t: f64) -> Result<(usize, usize), ContinuumError> {
        let s = self.grid.index_of(t)?;
        self.recorded.binary_search(&s).map(|r| (s, r)).map_err(|_| ContinuumError::NotRecorded(t))
    }

    /// Union-find of walkers with all merges up to and including `step`.
    pub fn classes_at(&self, step: usize) -> UnionFind {
        let mut uf = UnionFind::new(self.starts.len());
        for m in self.merges.iter().take_while(|m| m.step <= step) {
            uf.union(m.survivor, m.absorbed);
        }
        uf
    }

    /// Number of classes among all walkers born by `step`.
    pub fn classes_count(&self, step: usize) -> usize {
        let mut uf = self.classes_at(step);
        let mut roots: Vec<usize> = (0..self.starts.len()).filter(|&w| self.birth_step[w] <= step).map(|w| uf.find(w)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// First recorded-independent time at which all walkers share one class.
    pub fn all_coalesced_at(&self) -> Option<f64> {
        let mut uf = UnionFind::new(self.starts.len());
        for m in &self.merges {
            uf.union(m.survivor, m.absorbed);
            if uf.sets() == 1 {
                return Some(self.grid.time(m.step));
            }
        }
        (self.starts.len() == 1).then_some(self.grid.t0)
    }

    /// NDJSON rows `{walker_id, t, x, root_id}`.
    pub fn records(&self) -> Vec<BundleRecord> {
        let mut out = Vec::new();
        let mut merges = self.merges.iter().peekable();
        let mut uf = UnionFind::new(self.starts.len());
        for (r, &s) in self.recorded.iter().enumerate() {
            while let Some(m) = merges.next_if(|m| m.step <= s) {
                uf.union(m.survivor, m.absorbed);
            }
            for w in 0..self.starts.len() {
                let x = self.positions[w][r];
                if x.is_nan() {
                    continue;
                }
                out.push(BundleRecord { walker_id: w, t: self.grid.time(s), x, root_id: uf.find(w) });
            }
        }
        out
    }
}

/// `(eta, eta_hat)`: classes at `t0 + t` of walkers inside `arc` at `t0`, and
/// classes inside `arc` at `t0 + t` of walkers born at or before `t0`.
pub fn eta_counts(bundle: &PathBundle, t0: f64, t: f64, arc: &Arc<f64>) -> Result<(usize, usize), ContinuumError> {
    let (_, r0) = bundle.record_index(t0)?;
    let (s1, r1) = bundle.record_index(t0 + t)?;
    let s0 = bundle.recorded[r0];
    let mut uf = bundle.classes_at(s1);
    let mut eta = Vec::new();
    let mut eta_hat = Vec::new();
    for w in 0..bundle.starts.len() {
        if bundle.birth_step[w] > s0 {
            continue;
        }
        let x0 = bundle.positions[w][r0];
        let x1 = bundle.positions[w][r1];
        let root = uf.find(w);
        if arc.contains(CirclePos::new(x0)) {
            eta.push(root);
        }
        if arc.contains(CirclePos::new(x1)) {
            eta_hat.push(root);
        }
    }
    for v in [&mut eta, &mut eta_hat] {
        v.sort_unstable();
        v.dedup();
    }
    Ok((eta.len(), eta_hat.len()))
}

/// All-paths coalescence time of `walkers` equispaced walkers started at time 0.
pub fn all_coalescence_time<N: NoiseSource + ?Sized>(walkers: usize, dt: f64, cap: f64, noise: &mut N) -> Censorable<f64> {
    let starts: Vec<f64> = (0..walkers).map(|i| i as f64 / walkers as f64).collect();
    let mut sys = CoalescingSystem::new(Topology::Cylinder, dt, &starts);
    sys.run_to_single(noise, (cap / dt).ceil() as usize)
}

/// `eta` counts of a mesh of `m` walkers on `[a, a + len]` after time `t`,
/// for one topology; walkers are driven walker-wise by `seed`.
pub fn eta_mesh(topology: Topology, a: f64, len: f64, m: usize, t: f64, dt: f64, seed: u64) -> usize {
    let starts: Vec<f64> = (0..m).map(|i| a + len * (i as f64 + 0.5) / m as f64).collect();
    let mut sys = CoalescingSystem::new(topology, dt, &starts);
    let mut noise = PerWalkerNoise::new(seed, m);
    let steps = (t / dt).round() as usize;
    for _ in 0..steps {
        if sys.clusters() == 1 {
            break;
        }
        sys.step(&mut noise);
    }
    sys.clusters()
}

/// `eta_hat` on `arc` after time `t` for a full-circle mesh of `m` walkers.
pub fn eta_hat_mesh(arc: &Arc<f64>, m: usize, t: f64, dt: f64, seed: u64) -> usize {
    let starts: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let mut sys = CoalescingSystem::new(Topology::Cylinder, dt, &starts);
    let mut noise = SharedNoise(rng(seed));
    let steps = (t / dt).round() as usize;
    for _ in 0..steps {
        sys.step(&mut noise);
    }
    let alive: Vec<usize> = sys.alive().to_vec();
    alive.into_iter().filter(|&w| arc.contains(CirclePos::new(sys.position(w)))).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.0, 1e-3, 400).unwrap()
    }

    #[test]
    fn duplicate_starts_are_rejected() {
        assert!(sample_coalescing_bundle(&[(0.2, 0.0), (0.2, 0.0)], grid(), 1).is_err());
        assert!(sample_coalescing_bundle(&[(0.2, 0.0), (0.3, 7.0)], grid(), 1).is_err());
    }

    #[test]
    fn eta_examples() {
        let starts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 / 20.0, 0.0)).collect();
        let g = TimeGrid::new(0.0, 1e-3, 3000).unwrap();
        let b = sample_coalescing_bundle(&starts, g, 3).unwrap();
        let full = Arc::full(0.0);
        for t in [0.1, 1.0, 3.0] {
            let (eta, hat) = eta_counts(&b, 0.0, t, &full).unwrap();
            assert!(hat >= 1 && eta >= 1);
            assert_eq!(eta, b.classes_count(b.grid.index_of(t).unwrap()));
        }
        // a zero-length arc at a walker position counts only that walker's class
        let x = b.positions[4][0];
        let (eta, _) = eta_counts(&b, 0.0, 0.5, &Arc::new(x, x)).unwrap();
        assert_eq!(eta, 1);
        assert!(eta_counts(&b, 0.0, 10.0, &full).is_err());
        if let Some(tc) = b.all_coalesced_at() {
            if tc + 0.01 <= 3.0 {
                let s = ((tc + 0.01) * 1000.0).round() / 1000.0;
                assert_eq!(eta_counts(&b, 0.0, s, &full).unwrap().0, 1);
            }
        }
    }

    #[test]
    fn eta_is_non_increasing_in_time() {
        let starts: Vec<(f64, f64)> = (0..30).map(|i| (i as f64 / 30.0, 0.0)).collect();
        let b = sample_coalescing_bundle(&starts, grid(), 9).unwrap();
        let arc = Arc::new(0.1, 0.6);
        let mut last = usize::MAX;
        for i in 0..=400 {
            let (eta, _) = eta_counts(&b, 0.0, i as f64 * 1e-3, &arc).unwrap();
            assert!(eta <= last);
            last = eta;
        }
    }

    #[test]
    fn records_follow_roots() {
        let b = sample_coalescing_bundle(&[(0.1, 0.0), (0.12, 0.0), (0.5, 0.05)], grid(), 2).unwrap();
        let recs = b.records();
        assert!(recs.iter().all(|r| (0.0..1.0).contains(&r.x)));
        assert_eq!(recs.iter().filter(|r| r.walker_id == 2).count(), 400 - 50 + 1);
        assert_eq!(b.large_jumps, 0);
    }
}
