use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fc_clt_cli::output::{sha256_hex, SCHEMA};
use serde_json::Value;

fn lab(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fc-clt-lab"));
    cmd.args(args).env_remove("FCCLT_WORKERS");
    if let Some(w) = workers {
        cmd.env("FCCLT_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Parse a written document, validate it against the shipped schema and
/// recompute its payload hash.
fn load_document(path: &Path) -> Value {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
    let hash = sha256_hex(&serde_json::to_vec(&doc["payload"]).unwrap());
    assert_eq!(doc["payload_sha256"], hash.as_str());
    doc
}

fn dir_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn moments_table_ends_with_273() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&lab(&["moments", "--m", "2", "--max-k", "5", "--output", &dir_arg(tmp.path())], None));
    let last: Vec<&str> = out.lines().last().unwrap().split_whitespace().collect();
    assert_eq!(&last[..2], &["5", "273"]);
    let csv = fs::read_to_string(tmp.path().join("moments.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,fc_number,quadrature,abs_diff");
    assert_eq!(lines.len(), 7);
    let fields: Vec<&str> = lines[6].split(',').collect();
    assert_eq!(&fields[..2], &["5", "273"]);
    assert!((fields[2].parse::<f64>().unwrap() - 273.0).abs() <= 1e-6);
}

#[test]
fn variance_of_identity_is_six() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&lab(
        &["variance", "--f", "identity", "--kappa4", "0", "--output", &dir_arg(tmp.path())],
        None,
    ));
    let printed: Value = serde_json::from_str(&out).unwrap();
    let doc = load_document(&tmp.path().join("variance.json"));
    assert_eq!(printed["payload"], doc["payload"]);
    assert_eq!(doc["kind"], "variance");
    let total = doc["payload"]["breakdown"]["total"].as_f64().unwrap();
    assert!((total - 6.0).abs() <= 1e-3, "{total}");

    let out = ok(&lab(
        &["variance", "--f", "identity", "--kappa4", "-2", "--output", &dir_arg(tmp.path())],
        None,
    ));
    let printed: Value = serde_json::from_str(&out).unwrap();
    assert!((printed["payload"]["breakdown"]["total"].as_f64().unwrap() - 2.0).abs() <= 1e-3);
}

#[test]
fn density_grids_have_headers_and_support() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&lab(&["density", "--m", "2", "--points", "50", "--output", &dir_arg(tmp.path())], None));
    for (file, lo, hi) in [("density.csv", 0.0, 6.75), ("symmetrized_density.csv", -2.6, 2.6)] {
        let text = fs::read_to_string(tmp.path().join(file)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,value"));
        let rows: Vec<(f64, f64)> = lines
            .map(|l| {
                let (x, v) = l.split_once(',').unwrap();
                (x.parse().unwrap(), v.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 50);
        assert!(rows.iter().all(|&(x, v)| x > lo && x < hi && v.is_finite() && v >= 0.0));
        assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    }
}

#[test]
fn simulate_writes_replicates_and_spectra() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&lab(
        &[
            "simulate", "--f", "square", "--entry", "uniform", "--n", "8", "--replicates", "5", "--seed", "3",
            "--retain-spectra", "--output", &dir_arg(tmp.path()),
        ],
        None,
    ));
    assert!(out.contains("5 completed, 0 failed"), "{out}");
    let reps = fs::read_to_string(tmp.path().join("replicates.csv")).unwrap();
    assert!(reps.starts_with("replicate_id,derived_seed,statistic\n"));
    assert_eq!(reps.lines().count(), 6);
    let spectra = fs::read_to_string(tmp.path().join("spectra.csv")).unwrap();
    assert!(spectra.starts_with("replicate_id,k,s_squared\n"));
    assert_eq!(spectra.lines().count(), 1 + 5 * 8);
    let doc = load_document(&tmp.path().join("simulate.json"));
    let batch = &doc["payload"]["batch"];
    assert_eq!(batch["replicates_csv_sha256"], sha256_hex(reps.as_bytes()).as_str());
    assert_eq!(batch["spectra_csv_sha256"], sha256_hex(spectra.as_bytes()).as_str());
    assert!(batch["esd_ks_distance"].as_f64().unwrap() > 0.0);
}

#[test]
fn rademacher_verify_example() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&lab(
        &[
            "verify", "--strict", "--f", "identity", "--entry", "rademacher", "--n", "256", "--replicates", "2000",
            "--seed", "7", "--output", &dir_arg(tmp.path()),
        ],
        None,
    ));
    assert!(!out.contains("FAIL"), "{out}");
    let doc = load_document(&tmp.path().join("verify.json"));
    let p = &doc["payload"];
    let predicted = p["predicted"]["total"].as_f64().unwrap();
    assert!((predicted - 2.0).abs() <= 1e-3);
    let (lo, hi) = (p["verdict"]["ci_low"].as_f64().unwrap(), p["verdict"]["ci_high"].as_f64().unwrap());
    assert!(hi >= 1.7 && lo <= 2.3, "[{lo}, {hi}]");
    assert_eq!(p["passed"], true);
    assert_eq!(p["batch"]["completed"], 2000);
    let reps = fs::read_to_string(tmp.path().join("replicates.csv")).unwrap();
    assert_eq!(reps.lines().count(), 2001);
}

fn verify_small(dir: &Path, workers: &str) -> (Value, Vec<u8>) {
    ok(&lab(
        &[
            "verify", "--f", "cosine(1.5)", "--entry", "three_point(0.3)", "--n", "32", "--replicates", "300",
            "--seed", "11", "--resamples", "300", "--output", &dir_arg(dir),
        ],
        Some(workers),
    ));
    (load_document(&dir.join("verify.json")), fs::read(dir.join("replicates.csv")).unwrap())
}

#[test]
fn verify_payload_is_independent_of_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<(Value, Vec<u8>)> = ["1", "3", "1"]
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let d = tmp.path().join(i.to_string());
            verify_small(&d, w)
        })
        .collect();
    for (doc, csv) in &runs[1..] {
        assert_eq!(doc["payload_sha256"], runs[0].0["payload_sha256"]);
        assert_eq!(doc["payload"], runs[0].0["payload"]);
        assert_eq!(csv, &runs[0].1);
    }
    assert_eq!(runs[0].0["metadata"]["workers"], 1);
    assert_eq!(runs[1].0["metadata"]["workers"], 3);
}

#[test]
fn strict_mode_turns_failed_checks_into_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    // a wrong cumulant makes the variance band check fail
    let args = |strict: bool| {
        let mut a = vec![
            "verify", "--entry", "gaussian", "--n", "32", "--replicates", "200", "--seed", "1", "--resamples", "200",
            "--output",
        ];
        a.push(tmp.path().to_str().unwrap());
        if strict {
            a.push("--strict");
        }
        a.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let config = tmp.path().join("bad_kappa.toml");
    fs::write(&config, "kappa4 = 10.0\n").unwrap();
    let run = |strict: bool| {
        let mut a = args(strict);
        a.extend(["--config".into(), config.to_str().unwrap().into()]);
        lab(&a.iter().map(String::as_str).collect::<Vec<_>>(), None)
    };
    let lenient = run(false);
    assert!(lenient.status.success());
    assert!(String::from_utf8_lossy(&lenient.stdout).contains("FAIL variance_ci_meets_band"));
    let strict = run(true);
    assert_eq!(strict.status.code(), Some(2));
    let doc = load_document(&tmp.path().join("verify.json"));
    assert_eq!(doc["payload"]["passed"], false);
}

#[test]
fn config_files_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let config = tmp.path().join("exp.toml");
    fs::write(
        &config,
        format!(
            "command = \"simulate\"\noutput = {:?}\ntest_function = \"monomial(3)\"\nentry = \"rademacher\"\nn = 6\nreplicates = 4\nmaster_seed = 9\n",
            out_dir.to_str().unwrap()
        ),
    )
    .unwrap();
    ok(&lab(&["run", "--config", config.to_str().unwrap()], None));
    let doc = load_document(&out_dir.join("simulate.json"));
    assert_eq!(doc["payload"]["ensemble"]["n"], 6);
    assert_eq!(doc["payload"]["ensemble"]["test_function"], "monomial(3)");

    ok(&lab(&["simulate", "--config", config.to_str().unwrap(), "--n", "7"], None));
    let doc = load_document(&out_dir.join("simulate.json"));
    assert_eq!(doc["payload"]["ensemble"]["n"], 7);
    assert_eq!(doc["payload"]["ensemble"]["master_seed"], 9);

    // a config written for another command is refused
    let out = lab(&["verify", "--config", config.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulate"));
}

#[test]
fn diagnostics_for_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("typo.toml");
    fs::write(&config, "command = \"moments\"\n\n[family]\nm = 2\norder = 3\n").unwrap();
    let out = lab(&["run", "--config", config.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("order") && err.contains("line 5"), "{err}");

    let out = lab(&["moments", "--output", tmp.path().to_str().unwrap()], Some("zero"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FCCLT_WORKERS"));

    let out = lab(&["variance", "--f", "wiggle(2)"], None);
    assert!(!out.status.success());

    let out = lab(&["verify", "--m", "3", "--n", "8", "--replicates", "100", "--output", tmp.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m = 2"));
}
