use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use invasion_lab::cli::{main_with, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, EXIT_UNDERPOWERED};
use invasion_lab::experiments::{read_csv, EXPERIMENT_IDS};
use invasion_lab::runner::Sidecar;

fn ipl(args: &[&str]) -> i32 {
    let mut v = vec!["ipl"];
    v.extend_from_slice(args);
    main_with(v)
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_succeeds() {
    assert_eq!(ipl(&["list"]), EXIT_OK);
}

#[test]
fn bad_configs_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cases = [
        json!({"experiment": "exp_unknown", "seed": 1, "output_dir": out}),
        json!({"experiment": "exp_pond_radii", "seed": 1, "output_dir": out, "colour": "red"}),
        json!({"experiment": "exp_pond_radii", "seed": 1, "output_dir": out, "params": {"n_grid": [8], "trails": 10}}),
        json!({"experiment": "exp_pond_radii", "output_dir": out}),
        json!({"experiment": "exp_pond_radii", "seed": 1, "output_dir": out, "params": {"n_grid": [100], "horizon": 128}}),
    ];
    for (i, c) in cases.iter().enumerate() {
        let p = write_config(dir.path(), &format!("bad{i}.json"), c);
        assert_eq!(ipl(&["run", &p]), EXIT_CONFIG, "case {i}: {c}");
    }
    let p = dir.path().join("broken.json");
    fs::write(&p, "{\"experiment\": ").unwrap();
    assert_eq!(ipl(&["run", p.to_str().unwrap()]), EXIT_CONFIG);
    assert_eq!(ipl(&["run", dir.path().join("missing.json").to_str().unwrap()]), EXIT_CONFIG);
    assert_eq!(ipl(&["frobnicate"]), EXIT_CONFIG);
}

#[test]
fn run_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "exp_pond_radii",
        "seed": 5,
        "output_dir": dir.path(),
        "checkpoint_interval": 100,
        "params": {"k_max": 2, "n_grid": [4, 8], "trials": 400, "horizon": 32},
        "export_traces": {"trials": 2, "horizon": 16},
    });
    let p = write_config(dir.path(), "run.json", &cfg);
    let code = ipl(&["run", &p]);
    assert!(code == EXIT_OK || code == EXIT_UNDERPOWERED);

    let csv = dir.path().join("exp_pond_radii.csv");
    let rows = read_csv(fs::File::open(&csv).unwrap()).unwrap();
    // two pond-radius rows per (k, n) cell
    for k in 1..=2 {
        for n in [4, 8] {
            let c = rows.iter().filter(|r| r.k == Some(k) && r.n == Some(n) && r.quantity.starts_with("P(R")).count();
            assert_eq!(c, 2);
        }
    }
    let sidecar_path = dir.path().join("exp_pond_radii.json");
    let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(&sidecar_path).unwrap()).unwrap();
    assert_eq!(sidecar.config.params, cfg["params"]);
    assert_eq!(sidecar.seed, 5);
    assert!(sidecar.acceptance_bands.get("r2_max_spread").is_some());
    assert!(!dir.path().join("exp_pond_radii.checkpoint.json").exists());
    let trace = fs::read_to_string(dir.path().join("exp_pond_radii.traces/trace_1.csv")).unwrap();
    assert!(trace.starts_with("step,ax,ay,bx,by,tau,runmax"));

    let s = sidecar_path.to_str().unwrap();
    assert_eq!(ipl(&["replay", s]), EXIT_OK);
    assert_eq!(ipl(&["replay", s, "--row", "3"]), EXIT_OK);
    assert_eq!(ipl(&["replay", s, "--row", "999"]), EXIT_CONFIG);

    // a tampered CSV no longer matches its sidecar
    let text = fs::read_to_string(&csv).unwrap().replacen("exp_pond_radii,P(Rhat_k>=n),1,,4,32,", "exp_pond_radii,P(Rhat_k>=n),1,,4,33,", 1);
    fs::write(&csv, text).unwrap();
    assert_eq!(ipl(&["replay", s, "--row", "0"]), EXIT_FAILURE);
}

#[test]
fn underpowered_results_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "exp_kpoint",
        "seed": 3,
        "output_dir": dir.path(),
        "params": {"points": [[8, 8]], "trials": 20, "horizon": 32},
    });
    let p = write_config(dir.path(), "kpoint.json", &cfg);
    assert_eq!(ipl(&["run", &p]), EXIT_UNDERPOWERED);
}

#[test]
fn oracle_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fixtures.json");
    assert_eq!(ipl(&["oracle", "fixtures", out.to_str().unwrap()]), EXIT_OK);
    assert!(fs::read_to_string(&out).unwrap().contains("15/16"));
    assert_eq!(ipl(&["oracle", "invasion"]), EXIT_OK);
    assert_eq!(ipl(&["oracle", "onearm", "--trials", "4000"]), EXIT_OK);
    assert_eq!(ipl(&["oracle", "conformance", "--quick"]), EXIT_OK);
}

#[test]
fn every_registered_id_runs_its_smoke_params() {
    let dir = tempfile::tempdir().unwrap();
    let reg: Value = serde_json::to_value(invasion_lab::experiments::registry()).unwrap();
    let ids: Vec<&str> = reg.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, EXPERIMENT_IDS);
    for e in reg.as_array().unwrap() {
        let id = e["id"].as_str().unwrap();
        let cfg = json!({"experiment": id, "seed": 11, "output_dir": dir.path(), "params": e["smoke"]});
        let p = write_config(dir.path(), &format!("{id}.json"), &cfg);
        let code = ipl(&["run", &p]);
        assert!(code == EXIT_OK || code == EXIT_UNDERPOWERED, "{id} exited {code}");
        let rows = read_csv(fs::File::open(dir.path().join(format!("{id}.csv"))).unwrap()).unwrap();
        assert!(!rows.is_empty(), "{id}");
        assert!(rows.iter().all(|r| r.experiment == id && r.seed == 11));
        assert!(rows.iter().all(|r| r.successes.zip(r.trials).is_none_or(|(s, t)| r.flag == "diagnostic" || s <= t)));
    }
}

#[test]
fn output_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"experiment": "exp_onearm", "seed": 2, "params": {"n_grid": [2], "trials": 100, "self_dual_n": 2, "self_dual_trials": 100}});
    let p = write_config(dir.path(), "env.json", &cfg);
    let out = dir.path().join("from_env");
    std::env::set_var(invasion_lab::runner::OUTPUT_DIR_ENV, &out);
    let code = ipl(&["run", &p]);
    std::env::remove_var(invasion_lab::runner::OUTPUT_DIR_ENV);
    assert!(code == EXIT_OK || code == EXIT_UNDERPOWERED);
    assert!(out.join("exp_onearm.csv").exists());
}
