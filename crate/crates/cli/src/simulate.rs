//! `simulate`: drive one sampler over independent replicas.

use crate::config::{Format, Model, SimulateConfig};
use crate::manifest::OutputSet;
use crate::Failure;
use cylweb::continuum::bundle::{sample_bundle_with, Noise, Record};
use cylweb::continuum::reflected::sample_reflected_pair;
use cylweb::continuum::system::Topology;
use cylweb::continuum::TimeGrid;
use cylweb::export::{write_csv, write_ndjson, PathRecord};
use cylweb::forest::cpt::{sample_cpt, CptWindow};
use cylweb::forest::schedule::{build_schedule, IntensitySpec};
use cylweb::forest::sliced::{sample_sliced_forest, Ancestor};
use cylweb::lattice::coalesce::coalesce_all;
use cylweb::lattice::field::HashedField;
use cylweb::lattice::path::{trace_path, Direction, LatticeSite};
use cylweb::seed::{derive_seed, replica_seed};
use cylweb::Censorable;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

pub struct SimOutcome {
    pub task_seeds: BTreeMap<String, u64>,
    pub summary: serde_json::Value,
    /// fraction of replicas whose stopping time hit its cap, where one is computed
    pub censored_fraction: Option<f64>,
}

pub fn encode<T: Serialize>(format: Format, rows: &[T]) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    match format {
        Format::Ndjson => write_ndjson(&mut buf, rows),
        Format::Csv => write_csv(&mut buf, rows),
    }
    .map_err(|e| Failure::Runtime(format!("encoding output: {e}")))?;
    Ok(buf)
}

#[derive(Serialize)]
struct CoalescenceRow {
    replica: usize,
    time: Option<f64>,
    censored: bool,
}

#[derive(Serialize)]
struct BundleRow {
    replica: usize,
    walker_id: usize,
    t: f64,
    x: f64,
    root_id: usize,
}

#[derive(Serialize)]
struct PairTrajectory {
    pair_id: usize,
    t: Vec<f64>,
    y_up: Vec<f64>,
    y_down: Vec<f64>,
    gap: Vec<f64>,
}

#[derive(Serialize)]
struct PairRow {
    pair_id: usize,
    t: f64,
    y_up: f64,
    y_down: f64,
    gap: f64,
}

#[derive(Serialize)]
struct CptRow {
    replica: usize,
    point_id: usize,
    x: f64,
    t: f64,
    ancestor: Option<usize>,
}

#[derive(Serialize)]
struct ForestRow {
    replica: usize,
    slice_k: usize,
    angle: f64,
    ancestor_slice: usize,
    ancestor_angle: f64,
    vertical: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check(c: &SimulateConfig) -> Result<(), Failure> {
    if c.replicas == 0 {
        return Err(usage("replicas must be at least 1"));
    }
    if !(c.censor_threshold >= 0.0 && c.censor_threshold <= 1.0) {
        return Err(usage("censor_threshold must lie in [0, 1]"));
    }
    match c.model {
        Model::Clw => {
            if c.n == 0 {
                return Err(usage("n must be at least 1"));
            }
            if c.height.unwrap_or(0) < 0 {
                return Err(usage("height must be non-negative"));
            }
        }
        Model::CbwBundle | Model::ReflectedPair => {
            if !(c.dt > 0.0 && c.dt.is_finite() && c.t1 > 0.0 && c.t1.is_finite()) {
                return Err(usage("t1 and dt must be positive"));
            }
            if c.model == Model::CbwBundle && c.walkers == 0 {
                return Err(usage("walkers must be at least 1"));
            }
            if c.record_every == Some(0) {
                return Err(usage("record_every must be at least 1"));
            }
        }
        Model::Cpt => {
            if !(c.t1 > 0.0 && c.t1.is_finite()) {
                return Err(usage("t1 must be positive"));
            }
        }
        Model::SlicedForest => {
            if c.shift > c.k {
                return Err(usage("shift must not exceed K"));
            }
        }
    }
    Ok(())
}

pub fn run(c: &SimulateConfig, out: &mut OutputSet) -> Result<SimOutcome, Failure> {
    check(c)?;
    let path = format!("simulate/{}", c.model.name());
    let task = derive_seed(c.seed, &path);
    let seeds = |i: usize| replica_seed(task, i as u64);
    let ext = c.format.ext();
    let mut summary = serde_json::json!({ "model": c.model.name(), "replicas": c.replicas });
    let mut censored_fraction = None;

    match c.model {
        Model::Clw => {
            let height = c.height.expect("resolved");
            let cap = c.cap.expect("resolved");
            let m = 2 * c.n;
            let env = HashedField { n: c.n, seed: seeds(0) };
            // one walker per primal site of the bottom slice
            let mut paths = Vec::new();
            for (w, x) in (0..m).step_by(2).enumerate() {
                let p = trace_path(&env, LatticeSite::new(x, 0), Direction::Up, height).map_err(|e| Failure::Runtime(e.to_string()))?;
                paths.extend(p.by_height().into_iter().map(|(h, x)| PathRecord { walker_id: w, height: h, x }));
            }
            out.write(&format!("paths.{ext}"), &encode(c.format, &paths)?).map_err(Failure::io)?;
            let times: Vec<Censorable<u64>> = (0..c.replicas)
                .into_par_iter()
                .map(|i| coalesce_all(&HashedField { n: c.n, seed: seeds(i) }, 0, Direction::Up, cap))
                .collect();
            let rows: Vec<CoalescenceRow> = times
                .iter()
                .enumerate()
                .map(|(i, t)| CoalescenceRow { replica: i, time: t.value().map(|v| v as f64), censored: t.is_censored() })
                .collect();
            out.write(&format!("coalescence.{ext}"), &encode(c.format, &rows)?).map_err(Failure::io)?;
            let frac = times.iter().filter(|t| t.is_censored()).count() as f64 / c.replicas as f64;
            censored_fraction = Some(frac);
            summary["walkers"] = (m / 2).into();
            summary["path_records"] = paths.len().into();
        }
        Model::CbwBundle => {
            let grid = TimeGrid::new(0.0, c.dt, c.steps()).map_err(|e| usage(e.to_string()))?;
            let starts: Vec<(f64, f64)> = (0..c.walkers).map(|k| (k as f64 / c.walkers as f64, 0.0)).collect();
            let every = c.record_every.expect("resolved");
            let bundles = (0..c.replicas)
                .into_par_iter()
                .map(|i| sample_bundle_with(&starts, grid, Topology::Cylinder, Record::Every(every), Noise::Shared, seeds(i)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| usage(e.to_string()))?;
            let mut rows = Vec::new();
            let mut coal = Vec::new();
            for (i, b) in bundles.iter().enumerate() {
                rows.extend(b.records().into_iter().map(|r| BundleRow { replica: i, walker_id: r.walker_id, t: r.t, x: r.x, root_id: r.root_id }));
                let at = b.all_coalesced_at();
                coal.push(CoalescenceRow { replica: i, time: at, censored: at.is_none() });
            }
            out.write(&format!("bundle.{ext}"), &encode(c.format, &rows)?).map_err(Failure::io)?;
            out.write(&format!("coalescence.{ext}"), &encode(c.format, &coal)?).map_err(Failure::io)?;
            // not coalesced by t1 is an outcome here, not a censored run
            summary["not_coalesced_by_t1"] = coal.iter().filter(|r| r.censored).count().into();
        }
        Model::ReflectedPair => {
            let grid = TimeGrid::new(0.0, c.dt, c.steps()).map_err(|e| usage(e.to_string()))?;
            let every = c.record_every.expect("resolved");
            let pairs: Vec<_> = (0..c.replicas).into_par_iter().map(|i| sample_reflected_pair(grid, seeds(i))).collect();
            let keep: Vec<usize> = (0..=grid.steps).step_by(every).collect();
            let bytes = match c.format {
                Format::Ndjson => {
                    let rows: Vec<PairTrajectory> = pairs
                        .iter()
                        .enumerate()
                        .map(|(i, p)| PairTrajectory {
                            pair_id: i,
                            t: keep.iter().map(|&s| grid.time(s)).collect(),
                            y_up: keep.iter().map(|&s| p.y_up[s]).collect(),
                            y_down: keep.iter().map(|&s| p.y_down[s]).collect(),
                            gap: keep.iter().map(|&s| p.gap[s]).collect(),
                        })
                        .collect();
                    encode(c.format, &rows)?
                }
                Format::Csv => {
                    let rows: Vec<PairRow> = pairs
                        .iter()
                        .enumerate()
                        .flat_map(|(i, p)| keep.iter().map(move |&s| PairRow { pair_id: i, t: grid.time(s), y_up: p.y_up[s], y_down: p.y_down[s], gap: p.gap[s] }))
                        .collect();
                    encode(c.format, &rows)?
                }
            };
            out.write(&format!("pairs.{ext}"), &bytes).map_err(Failure::io)?;
            summary["points_per_pair"] = keep.len().into();
        }
        Model::Cpt => {
            let window = CptWindow { t_lo: 0.0, t_hi: c.t1 };
            let samples = (0..c.replicas)
                .into_par_iter()
                .map(|i| sample_cpt(c.lambda, c.r, window, seeds(i)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| usage(e.to_string()))?;
            let rows: Vec<CptRow> = samples
                .iter()
                .enumerate()
                .flat_map(|(i, s)| s.points.iter().zip(&s.ancestor).enumerate().map(move |(p, (&(x, t), &a))| CptRow { replica: i, point_id: p, x, t, ancestor: a }))
                .collect();
            out.write(&format!("points.{ext}"), &encode(c.format, &rows)?).map_err(Failure::io)?;
            summary["points"] = rows.len().into();
        }
        Model::SlicedForest => {
            let spec: IntensitySpec = c.nk.parse().map_err(|e: String| usage(format!("nk: {e}")))?;
            let sched = build_schedule(&spec, c.k, None).map_err(|e| usage(e.to_string()))?;
            let forests = (0..c.replicas)
                .into_par_iter()
                .map(|i| sample_sliced_forest(&sched, c.shift, (c.shift, c.k), seeds(i)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| usage(e.to_string()))?;
            let mut rows = Vec::new();
            for (i, f) in forests.iter().enumerate() {
                for (s, anc) in f.ancestry.iter().enumerate() {
                    for (p, a) in anc.iter().enumerate() {
                        let angle = f.points[s][p];
                        let (ancestor_angle, vertical) = match a {
                            Ancestor::Point(q) => (f.points[s + 1][*q], false),
                            Ancestor::Vertical => (angle, true),
                        };
                        rows.push(ForestRow { replica: i, slice_k: f.k_lo + s, angle, ancestor_slice: f.k_lo + s + 1, ancestor_angle, vertical });
                    }
                }
            }
            out.write(&format!("forest.{ext}"), &encode(c.format, &rows)?).map_err(Failure::io)?;
            out.write("schedule.csv", &encode(Format::Csv, &sched.rows())?).map_err(Failure::io)?;
            summary["records"] = rows.len().into();
            summary["h_shift"] = sched.h[c.shift].into();
            summary["h_top"] = sched.h[c.k].into();
        }
    }
    if let Some(f) = censored_fraction {
        summary["censored_fraction"] = f.into();
    }
    Ok(SimOutcome { task_seeds: BTreeMap::from([(path, task)]), summary, censored_fraction })
}
