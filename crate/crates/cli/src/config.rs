//! Run configuration: a JSON tree, unknown keys rejected. Every run writes
//! the resolved tree back next to its outputs.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Clw,
    CbwBundle,
    ReflectedPair,
    Cpt,
    SlicedForest,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Clw => "clw",
            Model::CbwBundle => "cbw-bundle",
            Model::ReflectedPair => "reflected-pair",
            Model::Cpt => "cpt",
            Model::SlicedForest => "sliced-forest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ndjson,
    Csv,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Ndjson => "ndjson",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Winding {
    Standard,
    Log,
    Arctan,
}

impl Winding {
    pub fn name(self) -> &'static str {
        match self {
            Winding::Standard => "standard",
            Winding::Log => "log",
            Winding::Arctan => "arctan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Verify(VerifyConfig),
    ExportProjection(ProjectionConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: Model,
    pub seed: u64,
    pub replicas: usize,
    /// lattice half-width: positions in Z/2n
    pub n: u32,
    /// lattice steps to trace (clw); defaults to 4n^2
    pub height: Option<i64>,
    /// lattice steps before a coalescence run counts as censored (clw)
    pub cap: Option<u64>,
    pub walkers: usize,
    pub t1: f64,
    pub dt: f64,
    /// keep every k-th grid step; defaults to about 100 kept points
    pub record_every: Option<usize>,
    pub lambda: f64,
    pub r: f64,
    pub nk: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub shift: usize,
    pub censor_threshold: f64,
    pub format: Format,
    pub out_dir: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            model: Model::Clw,
            seed: 1,
            replicas: 1,
            n: 8,
            height: None,
            cap: None,
            walkers: 16,
            t1: 1.0,
            dt: 1e-3,
            record_every: None,
            lambda: 50.0,
            r: 0.5,
            nk: "pow:0.3".into(),
            k: 2000,
            shift: 0,
            censor_threshold: 0.01,
            format: Format::Ndjson,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl SimulateConfig {
    /// Fill the derived defaults so the written-back config is complete.
    pub fn resolve(mut self) -> Self {
        let n2 = self.n as i64 * self.n as i64;
        self.height.get_or_insert(4 * n2);
        self.cap.get_or_insert(160 * n2 as u64);
        let steps = self.steps();
        self.record_every.get_or_insert((steps / 100).max(1));
        self
    }

    pub fn steps(&self) -> usize {
        (self.t1 / self.dt).round().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: String,
    pub quick: bool,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let b = cylweb::verify::Budget::default();
        VerifyConfig { suite: "all".into(), quick: b.quick, n: b.n_override, seed: b.seed, out_dir: PathBuf::from("verify-out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionConfig {
    pub inputs: Vec<PathBuf>,
    pub winding: Winding,
    /// rescale integer lattice records `(x, height)` of a web on Z/2n
    pub lattice_n: Option<u32>,
    pub format: Format,
    pub out_dir: PathBuf,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig { inputs: Vec::new(), winding: Winding::Standard, lattice_n: None, format: Format::Ndjson, out_dir: PathBuf::from("projection-out") }
    }
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Verify(_) => "verify",
            RunConfig::ExportProjection(_) => "export-projection",
        }
    }

    pub fn out_dir(&self) -> &PathBuf {
        match self {
            RunConfig::Simulate(c) => &c.out_dir,
            RunConfig::Verify(c) => &c.out_dir,
            RunConfig::ExportProjection(c) => &c.out_dir,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Simulate(c) => Some(c.seed),
            RunConfig::Verify(c) => Some(c.seed),
            RunConfig::ExportProjection(_) => None,
        }
    }

    /// Canonical bytes: pretty JSON in declaration order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for c in [
            RunConfig::Simulate(SimulateConfig::default().resolve()),
            RunConfig::Verify(VerifyConfig::default()),
            RunConfig::ExportProjection(ProjectionConfig::default()),
        ] {
            let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"command": "simulate", "model": "clw", "sede": 3}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let ok = r#"{"command": "simulate", "model": "cpt", "seed": 3}"#;
        let c: RunConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(c.seed(), Some(3));
    }

    #[test]
    fn stable_field_order() {
        let s = RunConfig::Simulate(SimulateConfig::default()).to_json();
        let keys: Vec<&str> = s.lines().filter_map(|l| l.trim().strip_prefix('"')?.split('"').next()).collect();
        assert_eq!(&keys[..4], &["command", "model", "seed", "replicas"]);
    }
}
