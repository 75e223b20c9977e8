//! `cylweb`: simulate, verify, export projections, print build info.
//!
//! Exit codes: 0 pass, 1 test failure or runtime error, 2 usage error,
//! 3 censoring budget exceeded. Errors go to stderr as one JSON object.

mod config;
mod manifest;
mod project;
mod simulate;

use clap::{Args, Parser, Subcommand};
use config::{Format, Model, ProjectionConfig, RunConfig, SimulateConfig, VerifyConfig, Winding};
use manifest::{sha256_hex, OutputSet, RunManifest};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn io(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }

    fn report(&self) -> ExitCode {
        let (kind, msg, code) = match self {
            Failure::Usage(m) => ("usage", m, 2),
            Failure::Runtime(m) => ("runtime", m, 1),
        };
        eprintln!("{}", serde_json::json!({ "error": kind, "message": msg }));
        ExitCode::from(code)
    }
}

#[derive(Parser)]
#[command(name = "cylweb", version, about = "Coalescing path webs on the cylinder")]
struct Cli {
    /// Worker threads for replica-level parallelism (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a model and write its records with a manifest
    Simulate(SimulateArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
    /// Map cylinder records to the plane through a winding parameter
    ExportProjection(ProjectionArgs),
    /// Print version, suites, models and the default configs
    Info,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config; flags given on the command line override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    height: Option<i64>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    walkers: Option<usize>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// intensity schedule: const:C, pow:A, pow:A:C or list:N1,N2,...
    #[arg(long)]
    nk: Option<String>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    shift: Option<usize>,
    #[arg(long)]
    censor_threshold: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    quick: bool,
    /// main sample size of every test in the suite
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectionArgs {
    /// NDJSON inputs
    inputs: Vec<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    winding: Option<Winding>,
    /// treat records as lattice sites `(x, height)` of a web on Z/2n
    #[arg(long)]
    lattice_n: Option<u32>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

macro_rules! overlay {
    ($cfg:ident, $args:ident, $($f:ident),*) => {
        $(if let Some(v) = $args.$f.clone() { $cfg.$f = v; })*
    };
}

fn simulate_config(a: &SimulateArgs) -> Result<SimulateConfig, Failure> {
    let mut c = match &a.config {
        Some(p) => match load(p)? {
            RunConfig::Simulate(c) => c,
            other => return Err(Failure::Usage(format!("config is for `{}`, not `simulate`", other.command()))),
        },
        None => SimulateConfig::default(),
    };
    overlay!(c, a, model, seed, replicas, n, walkers, t1, dt, lambda, r, nk, k, shift, censor_threshold, format, out_dir);
    if a.height.is_some() {
        c.height = a.height;
    }
    if a.cap.is_some() {
        c.cap = a.cap;
    }
    if a.record_every.is_some() {
        c.record_every = a.record_every;
    }
    Ok(c.resolve())
}

fn verify_config(a: &VerifyArgs) -> Result<VerifyConfig, Failure> {
    let mut c = match &a.config {
        Some(p) => match load(p)? {
            RunConfig::Verify(c) => c,
            other => return Err(Failure::Usage(format!("config is for `{}`, not `verify`", other.command()))),
        },
        None => VerifyConfig::default(),
    };
    overlay!(c, a, seed, out_dir);
    if let Some(s) = &a.suite {
        c.suite = s.clone();
    }
    if a.quick {
        c.quick = true;
    }
    if a.n.is_some() {
        c.n = a.n;
    }
    if !cylweb::verify::SUITES.contains(&c.suite.as_str()) {
        return Err(Failure::Usage(format!("unknown suite `{}`; expected one of {:?}", c.suite, cylweb::verify::SUITES)));
    }
    Ok(c)
}

fn projection_config(a: &ProjectionArgs) -> Result<ProjectionConfig, Failure> {
    let mut c = match &a.config {
        Some(p) => match load(p)? {
            RunConfig::ExportProjection(c) => c,
            other => return Err(Failure::Usage(format!("config is for `{}`, not `export-projection`", other.command()))),
        },
        None => ProjectionConfig::default(),
    };
    overlay!(c, a, winding, format, out_dir);
    if !a.inputs.is_empty() {
        c.inputs = a.inputs.clone();
    }
    if a.lattice_n.is_some() {
        c.lattice_n = a.lattice_n;
    }
    Ok(c)
}

/// Write the resolved config and the manifest; print the summary.
fn finish(cfg: &RunConfig, mut out: OutputSet, task_seeds: BTreeMap<String, u64>, summary: &serde_json::Value, started: Instant) -> Result<(), Failure> {
    let cfg_json = cfg.to_json();
    out.write("config.json", cfg_json.as_bytes()).map_err(Failure::io)?;
    out.write("summary.json", serde_json::to_string_pretty(summary).expect("json").as_bytes()).map_err(Failure::io)?;
    let m = RunManifest {
        command: cfg.command().into(),
        config_hash: sha256_hex(cfg_json.as_bytes()),
        master_seed: cfg.seed(),
        task_seeds,
        library_version: VERSION.into(),
        wall_clock_secs: started.elapsed().as_secs_f64(),
        outputs: out.digests.clone(),
    };
    let text = serde_json::to_string_pretty(&m).expect("json");
    std::fs::write(cfg.out_dir().join("manifest.json"), &text).map_err(Failure::io)?;
    println!("{}", serde_json::to_string(summary).expect("json"));
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Failure::Usage("workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let started = Instant::now();
    match cli.cmd {
        Cmd::Simulate(a) => {
            let c = simulate_config(&a)?;
            let mut out = OutputSet::new(&c.out_dir).map_err(Failure::io)?;
            let res = simulate::run(&c, &mut out)?;
            let over = res.censored_fraction.is_some_and(|f| f > c.censor_threshold);
            let threshold = c.censor_threshold;
            finish(&RunConfig::Simulate(c), out, res.task_seeds, &res.summary, started)?;
            if over {
                eprintln!("{}", serde_json::json!({ "error": "censoring", "censored_fraction": res.censored_fraction, "threshold": threshold }));
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify(a) => {
            let c = verify_config(&a)?;
            let budget = cylweb::verify::Budget { quick: c.quick, n_override: c.n, seed: c.seed };
            let reports = cylweb::verify::run_suite(&c.suite, &budget).map_err(|e| match e {
                cylweb::verify::VerifyError::UnknownSuite(s) => Failure::Usage(format!("unknown suite `{s}`")),
                other => Failure::Runtime(other.to_string()),
            })?;
            let mut out = OutputSet::new(&c.out_dir).map_err(Failure::io)?;
            for (i, r) in reports.iter().enumerate() {
                let name = format!("test_{i:02}_{}.json", r.test);
                out.write(&name, serde_json::to_string_pretty(r).expect("json").as_bytes()).map_err(Failure::io)?;
            }
            let passed = reports.iter().all(|r| r.passed());
            let summary = serde_json::json!({ "suite": c.suite, "passed": passed, "reports": reports });
            let task_seeds = BTreeMap::from([("verify".to_string(), c.seed)]);
            finish(&RunConfig::Verify(c), out, task_seeds, &summary, started)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::ExportProjection(a) => {
            let c = projection_config(&a)?;
            let mut out = OutputSet::new(&c.out_dir).map_err(Failure::io)?;
            let p = project::run(&c, &mut out)?;
            let summary = serde_json::json!({ "winding": c.winding.name(), "records": p.records, "skipped": p.skipped });
            finish(&RunConfig::ExportProjection(c), out, BTreeMap::new(), &summary, started)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Info => {
            let info = serde_json::json!({
                "name": "cylweb",
                "version": VERSION,
                "build": if cfg!(debug_assertions) { "debug" } else { "release" },
                "models": ["clw", "cbw-bundle", "reflected-pair", "cpt", "sliced-forest"],
                "suites": cylweb::verify::SUITES,
                "windings": ["standard", "log", "arctan"],
                "formats": ["ndjson", "csv"],
                "exit_codes": { "0": "pass", "1": "test failure", "2": "usage error", "3": "censoring budget exceeded" },
                "defaults": [
                    RunConfig::Simulate(SimulateConfig::default().resolve()),
                    RunConfig::Verify(VerifyConfig::default()),
                    RunConfig::ExportProjection(ProjectionConfig::default()),
                ],
            });
            println!("{}", serde_json::to_string_pretty(&info).expect("json"));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::Usage(e.to_string().trim().to_string()).report(),
    };
    run(cli).unwrap_or_else(|f| f.report())
}
