use std::path::Path;
use std::process::Command;

use serde_json::Value;
use spinfisher::cli::main_with_args;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("spinfisher").chain(args.iter().copied()))
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

const CSS: &str = r#"{"experiment": {"n_atoms": 100, "dynamics": {"model": "ideal", "lambda": 1.5, "omega_hz": 20},
  "times_ms": [0], "theta_deg": [-2.5, -1.5, -0.5, 0, 0.5, 1.5, 2.5, 3.5, 90]},
  "sampling": {"seed": 7}}"#;

#[test]
fn minimal_simulation_writes_one_histogram() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"experiment": {"n_atoms": 10, "dynamics": {"model": "ideal", "lambda": 1.5, "omega_hz": 20},
            "times_ms": [5], "theta_deg": [0]}}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let dir = out.join("t5.000ms");
    assert_eq!(files_in(&dir), vec!["alpha0.000_theta0.000.csv", "alpha0.000_theta0.000.json"]);
    let csv = std::fs::read_to_string(dir.join("alpha0.000_theta0.000.csv")).unwrap();
    assert!(csv.starts_with("z,count\n-1,"));
    let total: u64 = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 2000);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("alpha0.000_theta0.000.json")).unwrap()).unwrap();
    assert_eq!(meta["n_atoms"], 10);
    assert_eq!(meta["bin_width"], 0.2);
}

#[test]
fn invalid_config_exits_one_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"experiment": {"n_atoms": 10, "dynamics": {"model": "ideal", "lambda": "large", "omega_hz": 20}, "times_ms": [5]}}"#,
    );
    let out = tmp.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_spinfisher"))
        .args(["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&status.stderr).is_empty());
    assert!(!out.exists());
    let unknown = write(tmp.path(), "u.json", r#"{"experimnt": {}}"#);
    assert_eq!(run(&["simulate", "--config", &unknown, "--out", out.to_str().unwrap()]), 1);
    assert!(!out.exists());
}

#[test]
fn coherent_dataset_is_at_the_classical_limit_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", CSS);
    let data = tmp.path().join("data");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", data.to_str().unwrap()]), 0);
    let again = tmp.path().join("again");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", again.to_str().unwrap(), "--threads", "2"]), 0);
    for f in files_in(&data.join("t0.000ms")) {
        assert_eq!(
            std::fs::read(data.join("t0.000ms").join(&f)).unwrap(),
            std::fs::read(again.join("t0.000ms").join(&f)).unwrap()
        );
    }

    let res1 = tmp.path().join("res1");
    let res2 = tmp.path().join("res2");
    assert_eq!(run(&["estimate", "--input", data.to_str().unwrap(), "--out", res1.to_str().unwrap()]), 0);
    assert_eq!(run(&["estimate", "--input", data.to_str().unwrap(), "--out", res2.to_str().unwrap()]), 0);
    let a = std::fs::read(res1.join("t0.000ms/results.json")).unwrap();
    assert_eq!(a, std::fs::read(res2.join("t0.000ms/results.json")).unwrap());

    let text = String::from_utf8(a.clone()).unwrap();
    let order: Vec<usize> = ["\"fisher\"", "\"fisher_per_atom\"", "\"ci68\"", "\"fit\"", "\"c0_predicted\"", "\"jackknife\"", "\"bayes\"", "\"squeezing\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
    let doc: Value = serde_json::from_slice(&a).unwrap();
    let fpa = doc["fisher_per_atom"].as_f64().unwrap();
    let se = doc["std_error"].as_f64().unwrap() / 100.0;
    assert!((fpa - 1.0).abs() < 3.0 * se, "F/N = {fpa} ± {se}");
    let xi = doc["squeezing"]["xi2_db"].as_f64().unwrap();
    assert!(xi.abs() < 1.0, "ξ² = {xi} dB");
    let bayes = doc["bayes"]["sigma2_m_fisher"].as_f64().unwrap();
    assert!(bayes > 0.5 && bayes < 2.0);
    assert!(doc["c0_predicted"].as_f64().unwrap() > 0.0);
}

#[test]
fn missing_reference_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"experiment": {"n_atoms": 20, "dynamics": {"model": "ideal", "lambda": 1.5, "omega_hz": 20},
            "times_ms": [1], "theta_deg": [1, 2]}}"#,
    );
    let data = tmp.path().join("data");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", data.to_str().unwrap()]), 0);
    let res = tmp.path().join("res");
    assert_eq!(run(&["estimate", "--input", data.to_str().unwrap(), "--out", res.to_str().unwrap()]), 1);
    assert!(!res.join("t1.000ms/results.json").exists());
}

#[test]
fn tomography_through_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let alphas: Vec<String> = (0..19).map(|k| format!("{}", 10 * k)).collect();
    let cfg = write(
        tmp.path(),
        "c.json",
        &format!(
            r#"{{"experiment": {{"n_atoms": 8, "dynamics": {{"model": "ideal", "lambda": 1.5, "omega_hz": 20}},
                "times_ms": [20], "alpha_deg": [{}], "theta_deg": [-20, -10, 0, 10, 20]}},
                "sampling": {{"draws": 400, "reference_draws": 400}},
                "analysis": {{"alpha_deg": 0, "fit_range_deg": 30, "bin_width": 0.25,
                    "bayes": {{"enabled": false}}, "tomography": {{"enabled": true}}}}}}"#,
            alphas.join(",")
        ),
    );
    let data = tmp.path().join("data");
    let res = tmp.path().join("res");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", data.to_str().unwrap()]), 0);
    assert_eq!(
        run(&["estimate", "--config", &cfg, "--input", data.join("t20.000ms").to_str().unwrap(), "--out", res.to_str().unwrap()]),
        0
    );
    assert_eq!(files_in(&res), vec!["husimi.csv", "results.json", "rho.json"]);
    let rho: spinfisher::tomo::DensityMatrixSym =
        serde_json::from_str(&std::fs::read_to_string(res.join("rho.json")).unwrap()).unwrap();
    assert_eq!(rho.n_atoms(), 8);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(res.join("results.json")).unwrap()).unwrap();
    assert_eq!(doc["tomography"]["converged"], true);
}

#[test]
fn phase_space_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "p.json",
        r#"{"phasespace": {"lambda": 1.5, "trajectories": [{"z": 0.3, "phi_deg": 180, "duration_ms": 50}]}}"#,
    );
    let out = tmp.path().join("ps");
    assert_eq!(run(&["phasespace", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    assert_eq!(files_in(&out), vec!["fixed_points.json", "separatrix.csv", "trajectory_0.csv"]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out.join("fixed_points.json")).unwrap()).unwrap();
    assert_eq!(doc["fixed_points"].as_array().unwrap().len(), 4);
    assert!(std::fs::read_to_string(out.join("trajectory_0.csv")).unwrap().starts_with("t,z,phi\n0,0.3,"));

    let rabi = write(tmp.path(), "r.json", r#"{"phasespace": {"lambda": 0.5}}"#);
    let out2 = tmp.path().join("ps2");
    assert_eq!(run(&["phasespace", "--config", &rabi, "--out", out2.to_str().unwrap()]), 0);
    assert_eq!(files_in(&out2), vec!["fixed_points.json"]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out2.join("fixed_points.json")).unwrap()).unwrap();
    assert_eq!(doc["fixed_points"].as_array().unwrap().len(), 2);
}

#[test]
fn thread_override_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "p.json", r#"{"phasespace": {"lambda": 1.5}}"#);
    let out = tmp.path().join("ps");
    let status = Command::new(env!("CARGO_BIN_EXE_spinfisher"))
        .env("SPINFISHER_THREADS", "zero")
        .args(["phasespace", "--config", &cfg, "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn bayes_skips_sequences_outside_common_support() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"experiment": {"n_atoms": 430, "dynamics": {"model": "ideal", "lambda": 1.5, "omega_hz": 20},
            "times_ms": [15], "alpha_deg": [57], "noise": {"sigma_det": 4.0, "sigma_loss": 0.0}},
          "sampling": {"draws": 500, "reference_draws": 2000, "seed": 1}}"#,
    );
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", data.to_str().unwrap()]), 0);
    assert_eq!(
        run(&["estimate", "--config", &cfg, "--out", out.to_str().unwrap(), "--input", data.to_str().unwrap()]),
        0
    );
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("t15.000ms/results.json")).unwrap()).unwrap();
    let bayes = &r["bayes"];
    assert_eq!(bayes["sequences"], 125);
    assert!(bayes["discarded"].as_u64().unwrap() > 0);
    assert!(bayes["concave"].as_u64().unwrap() > 0);
}
