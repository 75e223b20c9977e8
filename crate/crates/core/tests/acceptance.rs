//! Acceptance run: one PASS/FAIL line per criterion, full sample sizes.
//! Set `CYLWEB_QUICK=1` for a reduced smoke run.

use cylweb::stats::TestReport;
use cylweb::verify::{self, Budget, VResult};
use std::process::ExitCode;
use std::time::Instant;

fn show(r: &TestReport) -> String {
    let mut s = format!("{} stat={:.6}", r.test, r.statistic);
    if let Some(p) = r.p_value {
        s += &format!(" p={p:.4}");
    }
    if let Some(b) = r.params.get("bound") {
        s += &format!(" bound={b}");
    }
    for key in ["d", "gap", "t", "n", "model", "route", "what"] {
        if let Some(v) = r.params.get(key) {
            s += &format!(" {key}={v}");
        }
    }
    s += if r.passed() { " ok" } else { " FAILED" };
    s
}

fn main() -> ExitCode {
    let budget = Budget { quick: std::env::var("CYLWEB_QUICK").is_ok_and(|v| v == "1"), ..Budget::default() };
    let pairs = std::cell::OnceCell::new();
    let pairs = || pairs.get_or_init(|| verify::pair_samples(&budget));
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> VResult + '_>)> = vec![
        (1, "exact pair law", Box::new(|| verify::c1_exact_pair_law(&budget))),
        (2, "kernel consistency", Box::new(|| verify::c2_kernel(&budget))),
        (3, "reflected-walk representation", Box::new(|| verify::c3_reflected_walk(&budget))),
        (4, "mu_d suite", Box::new(|| verify::c4_mu(&budget))),
        (5, "mu_bar_d and Skorokhod step", Box::new(|| verify::c5_skorokhod(&budget))),
        (6, "Laplace transform of the pair time", Box::new(|| verify::c6_laplace(&budget, pairs()))),
        (7, "survival determinant cross-check", Box::new(|| verify::c7_fulmek(&budget, pairs()))),
        (8, "reflected pair law", Box::new(|| verify::c8_reflected_pair(&budget))),
        (9, "exponential coalescence tail", Box::new(|| verify::c9_exponential_tail(&budget))),
        (10, "sliced forest tail bound", Box::new(|| verify::c10_tail_bound(&budget))),
        (11, "cylinder/plane dominance", Box::new(|| verify::c11_dominance(&budget))),
        (12, "lattice to continuum coalescence time", Box::new(|| verify::c12_lattice_to_continuum(&budget))),
        (13, "CPT diffusivity measurement", Box::new(|| verify::c13_cpt_diffusivity(&budget))),
        (14, "sliced forest Donsker check", Box::new(|| verify::c14_donsker(&budget))),
    ];
    let mut failed = 0;
    for (k, name, run) in &criteria {
        let start = Instant::now();
        let (ok, lines) = match run() {
            Ok(reports) => (reports.iter().all(|r| r.passed()), reports.iter().map(show).collect::<Vec<_>>()),
            Err(e) => (false, vec![format!("error: {e}")]),
        };
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {k:>2} {} {name} ({secs:.1}s)", if ok { "PASS" } else { "FAIL" });
        for l in lines {
            println!("    {l}");
        }
        if !ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
