//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Pass substrings as arguments to run a
//! subset, e.g. `cargo test --release --test acceptance -- kesten`.

use std::fs;
use std::time::Instant;

use serde_json::{json, Value};

use invasion_lab::experiments::{self, coupled_dominations, find, flag, registry, spread, Row};
use invasion_lab::oracle::{conformance, invasion as oracle_invasion};
use invasion_lab::runner::{self, ExecOptions, RunConfig, ACCEPTANCE_BANDS};
use invasion_lab::scaling::self_dual_crossing;

const SEED: u64 = 2026;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn bands() -> Value {
    serde_json::from_str(ACCEPTANCE_BANDS).expect("acceptance bands")
}

fn band(key: &str) -> f64 {
    bands()[key].as_f64().unwrap_or_else(|| panic!("band {key} missing"))
}

fn rows(id: &str, params: Value) -> Vec<Row> {
    let exp = experiments::build(id, params, SEED).expect("valid params");
    experiments::run_rows(exp.as_ref()).expect("rows")
}

fn all<'a>(rows: &'a [Row], quantity: &str) -> Vec<&'a Row> {
    rows.iter().filter(|r| r.quantity == quantity).collect()
}

fn fmt_values(rs: &[&Row]) -> String {
    rs.iter().map(|r| format!("n={}: {:.4} [{:.4}, {:.4}]", r.n.unwrap_or(0), r.estimate, r.ci_lo, r.ci_hi)).collect::<Vec<_>>().join("; ")
}

fn oracle_conformance() -> Outcome {
    let start = Instant::now();
    let checks = conformance::run_all().expect("conformance");
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed()).map(|c| format!("{} on {}", c.detector, c.instance)).collect();
    let mismatches: u64 = checks.iter().map(|c| c.mismatches).sum();
    outcome(
        failed.is_empty() && secs < 300.0,
        format!("{} checks, {mismatches} mismatches, {secs:.0} s (limit 300 s){}", checks.len(), if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }),
    )
}

fn invasion_oracle() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g) in oracle_invasion::five_edge_graphs() {
        let c = oracle_invasion::pond_conformance(name, &g).expect("ordering check");
        ok &= c.orderings == 120 && c.mismatches == 0;
        parts.push(format!("{name} {}/{}", c.orderings - c.mismatches, c.orderings));
    }
    outcome(ok, format!("{} agree, {:.2} s", parts.join(", "), start.elapsed().as_secs_f64()))
}

fn self_duality() -> Outcome {
    let trials = 100_000;
    let e = self_dual_crossing(8, trials, SEED).expect("crossing");
    let tol = 3.0 * (0.25 / trials as f64).sqrt();
    outcome((e.estimate - 0.5).abs() <= tol, format!("sigma(8,7,1/2) = {:.4}, |x - 0.5| <= {tol:.4}", e.estimate))
}

fn invaded_weights() -> Vec<Row> {
    rows("exp_invaded_weights", json!({"steps": 1_000_000, "bins": 50}))
}

fn invaded_weight_law(r: &[Row]) -> Outcome {
    let ks = find(r, "ks_uniform_0_half", None, None, None).unwrap().estimate;
    outcome(ks < 0.02, format!("KS distance to U[0, 1/2] after 1e6 steps = {ks:.4} (< 0.02)"))
}

fn boundary_to_volume(r: &[Row]) -> Outcome {
    let b = find(r, "boundary_to_volume", None, None, None).unwrap().estimate;
    outcome((b - 1.0).abs() <= 0.05, format!("|dG|/|E| after 1e6 steps = {b:.4} (1 +- 0.05)"))
}

fn one_arm() -> Outcome {
    let r = rows("exp_onearm", json!({"n_grid": [4, 8, 16, 32], "trials": 100_000, "self_dual_n": 8, "self_dual_trials": 1000}));
    let mut ok = true;
    let mut parts = Vec::new();
    for pi in all(&r, "pi") {
        let n = pi.n.unwrap() as f64;
        let trials = pi.trials.unwrap() as f64;
        let sigma = (pi.estimate * (1.0 - pi.estimate) / trials).sqrt();
        let margin = pi.estimate - 0.5 / n.sqrt();
        ok &= margin > -3.0 * sigma;
        parts.push(format!("n={n}: pi={:.4}, margin {:.4}", pi.estimate, margin));
    }
    outcome(ok, parts.join("; "))
}

fn pond_radii() -> Outcome {
    let r = rows("exp_pond_radii", json!({"k_max": 2, "n_grid": [16, 32, 64, 128], "trials": 100_000, "horizon": 512}));
    let r2: Vec<&Row> = all(&r, "r_k").into_iter().filter(|x| x.k == Some(2)).collect();
    let s = spread(&r2.iter().map(|x| x.estimate).collect::<Vec<_>>());
    let hat2: Vec<&Row> = all(&r, "P(Rhat_k>=n)").into_iter().filter(|x| x.k == Some(2)).collect();
    let discard = hat2.iter().map(|x| x.discards as f64 / 100_000.0).fold(0.0, f64::max);
    let max_spread = band("r2_max_spread");
    let weak = r2.iter().any(|x| x.flag == flag::UNDERPOWERED);
    outcome(
        s < max_spread && discard < band("discard_rate_max") && !weak,
        format!("r_2 spread {s:.3} (< {max_spread}); max discard rate {:.2}%; {}", 100.0 * discard, fmt_values(&r2)),
    )
}

fn defect_scaling() -> Outcome {
    let r = rows("exp_defect_scaling", json!({"k_max": 1, "n_grid": [16, 32, 64, 128], "trials": 100_000}));
    let s1 = all(&r, "s_k");
    let s = spread(&s1.iter().map(|x| x.estimate).collect::<Vec<_>>());
    let max_spread = band("s1_max_spread");
    outcome(s < max_spread, format!("s_1 spread {s:.3} (< {max_spread}); {}", fmt_values(&s1)))
}

fn kesten() -> Outcome {
    let r = rows("exp_kesten", json!({"n_grid": [8, 16, 32], "four_arm_trials": 100_000}));
    let k = all(&r, "kappa");
    let s = spread(&k.iter().map(|x| x.estimate).collect::<Vec<_>>());
    let max_spread = band("kappa_max_spread");
    let positive = k.iter().all(|x| x.estimate > 0.0);
    let pn = all(&r, "p_n").iter().map(|x| format!("{:.4}", x.estimate)).collect::<Vec<_>>().join(", ");
    outcome(positive && s < max_spread, format!("kappa spread {s:.3} (< {max_spread}); p_n = [{pn}]; {}", fmt_values(&k)))
}

fn couplings() -> Outcome {
    let rep = coupled_dominations(10_000, 64, 3, SEED).expect("couplings");
    let parts: Vec<String> = rep.checks.iter().map(|(n, c, v)| format!("{n}: {v}/{c}")).collect();
    let all_checked = rep.checks.iter().all(|c| c.1 > 0);
    outcome(rep.all_hold() && all_checked, format!("{} trials; {}", rep.trials, parts.join("; ")))
}

fn pond_clusters() -> Outcome {
    let r = rows("exp_pond_clusters", json!({"k": 2, "n_grid": [8], "m_max": 1, "trials": 100_000, "horizon": 64}));
    let c = find(&r, "P(U(1;K;N)|Rhat_1>=N)", Some(2), None, Some(8)).unwrap();
    outcome(
        c.ci_lo > 0.0 && c.flag != flag::UNDERPOWERED,
        format!("P(U(1,2,8) | Rhat_1 >= 8) = {:.4} [{:.4}, {:.4}] from {} of {} conditioning trials", c.estimate, c.ci_lo, c.ci_hi, c.successes.unwrap(), c.trials.unwrap()),
    )
}

fn disconnect() -> Outcome {
    let r = rows("exp_disconnect", json!({"cells": [[4, 16, 64], [8, 32, 128]], "trials": 20_000}));
    let up = all(&r, "IPC/A2");
    let lo = all(&r, "nu_N*A1/A2");
    let su = spread(&up.iter().map(|x| x.estimate).collect::<Vec<_>>());
    let sl = spread(&lo.iter().map(|x| x.estimate).collect::<Vec<_>>());
    let (bu, bl) = (band("disconnect_upper_max_spread"), band("disconnect_lower_max_spread"));
    let weak = up.iter().chain(&lo).any(|x| x.flag == flag::UNDERPOWERED);
    let f = |rs: &[&Row]| rs.iter().map(|x| format!("({},{}): {:.4}", x.m.unwrap(), x.n.unwrap(), x.estimate)).collect::<Vec<_>>().join(", ");
    outcome(
        su < bu && sl < bl && !weak,
        format!("P(D)/P(A2) spread {su:.3} (< {bu}) [{}]; nu(D)*P(A1)/P(A2) spread {sl:.3} (< {bl}) [{}]", f(&up), f(&lo)),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut problems = Vec::new();
    let run = |id: &str, params: &Value, threads: usize, name: &str, blocks: Option<u64>| {
        let cfg = RunConfig {
            experiment: id.into(),
            params: params.clone(),
            seed: SEED,
            output_dir: Some(dir.path().into()),
            checkpoint_interval: 64,
            threads: Some(threads),
            name: Some(name.into()),
            export_traces: None,
        };
        let out = runner::execute(&cfg, &ExecOptions { max_blocks: blocks }).expect("run");
        (out.completed, out.csv_path)
    };
    let (mut cells, mut interrupted) = (0, 0);
    for e in registry() {
        let (_, a) = run(&e.id, &e.smoke, 1, &format!("{}_t1", e.id), None);
        let (_, b) = run(&e.id, &e.smoke, 8, &format!("{}_t8", e.id), None);
        let (_, c) = run(&e.id, &e.smoke, 1, &format!("{}_t1", e.id), None);
        let (done, _) = run(&e.id, &e.smoke, 8, &format!("{}_kill", e.id), Some(2));
        let (_, d) = run(&e.id, &e.smoke, 1, &format!("{}_kill", e.id), None);
        let bytes = |p: &std::path::Path| fs::read(p).expect("csv");
        let base = bytes(&a);
        for (label, p) in [("8 threads", &b), ("rerun", &c), ("kill-and-resume", &d)] {
            if bytes(p) != base {
                problems.push(format!("{} {label}", e.id));
            }
        }
        cells += 1;
        interrupted += !done as u32;
    }
    outcome(problems.is_empty(), format!("{cells} experiments ({interrupted} stopped mid-run): 1 vs 8 threads, rerun, kill-and-resume byte-identical{}", if problems.is_empty() { String::new() } else { format!("; differ: {}", problems.join(", ")) }))
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |name: &str| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str()));
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut record = |name: &'static str, f: &dyn Fn() -> Outcome| {
        if !wanted(name) {
            return;
        }
        let start = Instant::now();
        let o = f();
        println!("{} {name}: {} ({:.0} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, start.elapsed().as_secs_f64());
        results.push((name, o));
    };
    record("oracle_conformance", &oracle_conformance);
    record("invasion_oracle", &invasion_oracle);
    record("self_duality", &self_duality);
    if wanted("invaded_weight_law") || wanted("boundary_to_volume") {
        let r = invaded_weights();
        record("invaded_weight_law", &|| invaded_weight_law(&r));
        record("boundary_to_volume", &|| boundary_to_volume(&r));
    }
    record("one_arm_lower_bound", &one_arm);
    record("pond_radii_band", &pond_radii);
    record("defect_band", &defect_scaling);
    record("kesten_band", &kesten);
    record("coupled_dominations", &couplings);
    record("pond_clusters_positivity", &pond_clusters);
    record("disconnect_band", &disconnect);
    record("determinism", &determinism);
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
