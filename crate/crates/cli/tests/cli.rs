use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn cylweb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylweb")).args(args).output().expect("binary runs")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Output digests except the written-back config, which names the output dir.
fn digests(dir: &Path) -> BTreeMap<String, String> {
    let m = json_file(&dir.join("manifest.json"));
    m["outputs"].as_object().unwrap().iter().filter(|(k, _)| *k != "config.json").map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string())).collect()
}

fn ndjson(p: &Path) -> Vec<Value> {
    std::fs::read_to_string(p).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn clw_runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = cylweb(&["simulate", "--model", "clw", "--n", "8", "--seed", "1", "--replicas", "20", "--out-dir", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cylweb(&["--workers", "1", "simulate", "--model", "clw", "--n", "8", "--seed", "1", "--replicas", "20", "--out-dir", b.to_str().unwrap()]);
    assert!(o.status.success());
    let da = digests(&a);
    assert!(da.contains_key("paths.ndjson") && da.contains_key("coalescence.ndjson"));
    assert_eq!(da, digests(&b));

    // another seed changes the outputs
    let c = tmp.path().join("c");
    cylweb(&["simulate", "--model", "clw", "--n", "8", "--seed", "2", "--out-dir", c.to_str().unwrap()]);
    assert_ne!(digests(&a)["paths.ndjson"], digests(&c)["paths.ndjson"]);
}

#[test]
fn written_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = cylweb(&["simulate", "--model", "cbw-bundle", "--walkers", "6", "--t1", "0.3", "--dt", "1e-3", "--replicas", "3", "--out-dir", a.to_str().unwrap()]);
    assert!(o.status.success());
    let cfg = json_file(&a.join("config.json"));
    assert_eq!(cfg["command"], "simulate");
    assert_eq!(cfg["record_every"], 3);
    let b = tmp.path().join("b");
    let o = cylweb(&["simulate", "--config", a.join("config.json").to_str().unwrap(), "--out-dir", b.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(digests(&a), digests(&b));
    let m = json_file(&a.join("manifest.json"));
    assert_eq!(m["master_seed"], 1);
    assert!(m["task_seeds"]["simulate/cbw-bundle"].is_u64());
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn reflected_pair_one_line_per_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("rp");
    let o = cylweb(&["simulate", "--model", "reflected-pair", "--t1", "5", "--dt", "1e-3", "--replicas", "1000", "--out-dir", d.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = ndjson(&d.join("pairs.ndjson"));
    assert_eq!(rows.len(), 1000);
    for r in &rows {
        let gap = r["gap"].as_array().unwrap();
        assert!(gap.iter().all(|g| (0.0..=1.0).contains(&g.as_f64().unwrap())));
    }
}

#[test]
fn sliced_forest_with_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("sf");
    let o = cylweb(&["simulate", "--model", "sliced-forest", "--nk", "pow:0.3", "--K", "2000", "--shift", "500", "--out-dir", d.to_str().unwrap()]);
    assert!(o.status.success());
    let sched = std::fs::read_to_string(d.join("schedule.csv")).unwrap();
    assert_eq!(sched.lines().next().unwrap(), "k,n_k,sigma2_k,V_k");
    assert_eq!(sched.lines().count(), 2002);
    let rows = ndjson(&d.join("forest.ndjson"));
    assert!(rows.iter().all(|r| (500..2000).contains(&r["slice_k"].as_u64().unwrap())));
}

#[test]
fn cpt_csv_has_header() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("cpt");
    let o = cylweb(&["simulate", "--model", "cpt", "--lambda", "20", "--t1", "2", "--format", "csv", "--out-dir", d.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(d.join("points.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "replica,point_id,x,t,ancestor");
    let o = cylweb(&["simulate", "--model", "cpt", "--r", "0.7", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cylweb(&["verify", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");

    let o = cylweb(&["simulate", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(serde_json::from_slice::<Value>(&o.stderr).is_ok());

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"command": "simulate", "model": "clw", "sede": 1}"#).unwrap();
    let o = cylweb(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // a tiny cap censors every coalescence run
    let d = tmp.path().join("cens");
    let o = cylweb(&["simulate", "--model", "clw", "--n", "16", "--cap", "4", "--replicas", "5", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(d.join("manifest.json").exists());
}

#[test]
fn verify_enumeration_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("v");
    let o = cylweb(&["verify", "enumeration", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(out["passed"], true);
    let reports = out["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        for key in ["test", "statistic", "p_value", "n", "verdict", "params"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
    let files = std::fs::read_dir(&d).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("test_")).count();
    assert_eq!(files, reports.len());
}

fn write_points(path: &Path, pts: &[(f64, f64)]) {
    let text: String = pts.iter().enumerate().map(|(i, (x, t))| format!("{{\"walker_id\":7,\"step\":{i},\"x\":{x},\"t\":{t}}}\n")).collect();
    std::fs::write(path, text).unwrap();
}

fn project(input: &Path, winding: &str, out: &Path) -> (Vec<Value>, Value) {
    let o = cylweb(&["export-projection", input.to_str().unwrap(), "--winding", winding, "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (ndjson(&out.join("projection.ndjson")), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn standard_winding_of_a_vertical_path_is_a_ray() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("v.ndjson");
    write_points(&input, &(0..50).map(|k| (0.3, k as f64 * 0.1)).collect::<Vec<_>>());
    let (rows, summary) = project(&input, "standard", &tmp.path().join("o"));
    assert_eq!(summary["skipped"], 0);
    let theta0 = 2.0 * std::f64::consts::PI * 0.3;
    for w in rows.windows(2) {
        assert!((w[0]["theta"].as_f64().unwrap() - theta0).abs() < 1e-12);
        assert!(w[1]["r"].as_f64().unwrap() > w[0]["r"].as_f64().unwrap());
        assert_eq!(w[0]["walker_id"], 7);
    }
    assert!(rows.iter().enumerate().all(|(i, r)| r["step"] == i));
}

#[test]
fn log_winding_accumulates_at_the_origin() {
    let tmp = tempfile::tempdir().unwrap();
    let mut last = f64::INFINITY;
    for lo in [-2.0, -5.0, -10.0, -20.0] {
        let input = tmp.path().join("l.ndjson");
        write_points(&input, &(0..=20).map(|k| (0.1 * k as f64 % 1.0, lo + (0.0 - lo) * k as f64 / 20.0)).collect::<Vec<_>>());
        let (rows, _) = project(&input, "log", &tmp.path().join("o"));
        let min_r = rows.iter().map(|r| r["r"].as_f64().unwrap()).fold(f64::INFINITY, f64::min);
        assert!(min_r < last);
        last = min_r;
    }
    assert!(last < 1e-8);
}

#[test]
fn arctan_winding_has_an_asymptotic_direction() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("a.ndjson");
    // angle settles as t -> 1, plus two heights outside [0, 1)
    let mut pts: Vec<(f64, f64)> = (0..200).map(|k| {
        let t = 0.9 + 0.0999 * k as f64 / 199.0;
        (0.25 + 0.1 * (1.0 - t), t)
    }).collect();
    pts.push((0.1, 1.0));
    pts.push((0.1, -0.5));
    write_points(&input, &pts);
    let (rows, summary) = project(&input, "arctan", &tmp.path().join("o"));
    assert_eq!(summary["skipped"], 2);
    assert_eq!(rows.len(), 200);
    let far: Vec<&Value> = rows.iter().filter(|r| r["r"].as_f64().unwrap() > 100.0).collect();
    assert!(!far.is_empty());
    let th: Vec<f64> = far.iter().map(|r| r["theta"].as_f64().unwrap()).collect();
    let spread = th.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - th.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.01);
    let target = 2.0 * std::f64::consts::PI * 0.25;
    assert!((th[th.len() - 1] - target).abs() < 0.01);
}

#[test]
fn lattice_records_project_with_rescaling() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("clw");
    assert!(cylweb(&["simulate", "--model", "clw", "--n", "4", "--height", "16", "--out-dir", d.to_str().unwrap()]).status.success());
    let out = tmp.path().join("p");
    let o = cylweb(&["export-projection", d.join("paths.ndjson").to_str().unwrap(), "--lattice-n", "4", "--format", "csv", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out.join("projection.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "walker_id,source,height,theta,r,x,y");
    // 4 walkers, 17 heights each
    assert_eq!(text.lines().count(), 1 + 4 * 17);
}

#[test]
fn info_defaults_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cylweb(&["info"]);
    assert!(o.status.success());
    let info: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(info["suites"].as_array().unwrap().len(), 11);
    let mut sim = info["defaults"][0].clone();
    assert_eq!(sim["command"], "simulate");
    sim["out_dir"] = tmp.path().join("d").to_str().unwrap().into();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, serde_json::to_string(&sim).unwrap()).unwrap();
    let o = cylweb(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let back = json_file(&tmp.path().join("d/config.json"));
    assert_eq!(back, sim);
    let again = cylweb(&["info"]);
    assert_eq!(again.stdout, pretty_line(&info));
}

fn pretty_line(info: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(info).unwrap();
    s.push('\n');
    s.into_bytes()
}
