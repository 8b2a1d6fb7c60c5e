use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chansense_cli::commands::{read_dataset, EstimateReport};
use chansense_cli::tables;

fn chansense(args: &[&str], extra: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chansense"));
    cmd.args(args);
    for p in extra {
        cmd.arg(p);
    }
    cmd.output().unwrap()
}

fn run(args: &[&str]) -> Output {
    chansense(args, &[])
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const NOISELESS: [&str; 6] = [
    "--snr1_db",
    "noiseless",
    "--snr2_db",
    "noiseless",
    "--snr3_db",
    "noiseless",
];

#[test]
fn simulate_writes_every_array() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("data.json");
    let res = run(&["simulate", "--out", path(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let ds = read_dataset(&out).unwrap();
    assert!(ds.h1.is_some() && ds.h2.is_some() && ds.h3.is_some());
    assert!(ds.y.is_some() && ds.direct.is_some());
    assert!(ds.n1.is_some() && ds.n2.is_some() && ds.n3.is_some());
    assert_eq!(ds.x.re.len(), 50);
    assert_eq!(ds.z.re.len(), 50 + 2 * 99);
    assert!(tmp.path().join("data.manifest.json").exists());
}

#[test]
fn k_above_n_is_a_config_error_naming_both_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"n_taps": 10, "sparse_k": 12}"#).unwrap();
    let res = chansense(
        &["simulate", "--out"],
        &[&tmp.path().join("d.json"), Path::new("--config"), &cfg],
    );
    assert_eq!(code(&res), 2);
    let msg = stderr(&res);
    assert!(msg.contains("sparse_k") && msg.contains("n_taps"), "{msg}");
}

#[test]
fn malformed_config_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, "{\n  \"trials\": 5,\n  \"n_taps\": \"many\"\n}\n").unwrap();
    let res = chansense(
        &["simulate", "--out"],
        &[&tmp.path().join("d.json"), Path::new("--config"), &cfg],
    );
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("cfg.json:3:"), "{}", stderr(&res));
}

#[test]
fn missing_config_file_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let res = chansense(
        &["simulate", "--config", "/nonexistent/cfg.json", "--out"],
        &[&tmp.path().join("d.json")],
    );
    assert_eq!(code(&res), 3);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a.json"), tmp.path().join("b.json"));
    for p in [&a, &b] {
        assert_eq!(
            code(&run(&["simulate", "--seed", "42", "--out", path(p)])),
            0
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = tmp.path().join("c.json");
    run(&["simulate", "--seed", "43", "--out", path(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

fn read_report(p: &Path) -> EstimateReport {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn noiseless_estimate_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.json");
    let mut args = vec!["simulate", "--out", path(&data)];
    args.extend(NOISELESS);
    assert_eq!(code(&run(&args)), 0);
    let est = tmp.path().join("e.json");
    let res = run(&[
        "estimate",
        "--dataset",
        path(&data),
        "--estimator",
        "indirect_ls",
        "--out",
        path(&est),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let report = read_report(&est);
    assert!(report.rmse_overall.unwrap() < 1e-7);
    assert!(report.rmse_nonzero.unwrap() < 1e-7);
}

#[test]
fn estimate_without_ground_truth_marks_rmse_absent() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.json");
    run(&["simulate", "--out", path(&data)]);
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&data).unwrap()).unwrap();
    for key in ["h1", "h2", "y", "direct", "n1", "n2", "n3"] {
        v.as_object_mut().unwrap().remove(key);
    }
    let stripped = tmp.path().join("s.json");
    fs::write(&stripped, v.to_string()).unwrap();
    let est = tmp.path().join("e.json");
    let res = run(&[
        "estimate",
        "--dataset",
        path(&stripped),
        "--out",
        path(&est),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let text = fs::read_to_string(&est).unwrap();
    assert!(text.contains("\"rmse_overall\": null"));
    assert_eq!(read_report(&est).h_hat.re.len(), 100);
}

#[test]
fn solver_override_is_echoed_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.json");
    run(&["simulate", "--out", path(&data)]);
    let est = tmp.path().join("e.json");
    let res = run(&[
        "estimate",
        "--dataset",
        path(&data),
        "--estimator",
        "indirect_sparse_irls",
        "--sparse.solver.p",
        "0.8",
        "--out",
        path(&est),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("e.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["sparse"]["solver"]["p"], 0.8);
    assert_eq!(manifest["config"]["estimator"], "indirect_sparse_irls");

    // The manifest reproduces the estimate.
    let again = tmp.path().join("f.json");
    let res = chansense(
        &[
            "estimate",
            "--dataset",
            path(&data),
            "--out",
            path(&again),
            "--config",
        ],
        &[&tmp.path().join("e.manifest.json")],
    );
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert_eq!(fs::read(&est).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn unknown_estimator_lists_valid_names() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.json");
    run(&["simulate", "--out", path(&data)]);
    let res = run(&[
        "estimate",
        "--dataset",
        path(&data),
        "--estimator",
        "magic",
        "--out",
        "x.json",
    ]);
    assert_eq!(code(&res), 2);
    let msg = stderr(&res);
    for name in ["indirect_ls", "indirect_sparse_irls", "indirect_sparse_l1"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn singular_system_exits_numerical_with_hint() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.json");
    // A truncated training matrix with M < N cannot be inverted without help.
    let res = run(&["simulate", "--modes.x", "truncated", "--out", path(&data)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let est = tmp.path().join("e.json");
    let res = run(&["estimate", "--dataset", path(&data), "--out", path(&est)]);
    assert_eq!(code(&res), 4);
    assert!(stderr(&res).contains("--ls.ridge"), "{}", stderr(&res));
    let res = run(&[
        "estimate",
        "--dataset",
        path(&data),
        "--ls.ridge",
        "1e-3",
        "--out",
        path(&est),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
}

#[test]
fn experiment_emits_tables_and_replays_from_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let res = run(&[
        "experiment",
        "--preset",
        "paper-10db",
        "--trials",
        "50",
        "--out",
        path(&dir),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let cdfs: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("cdf_"))
        .collect();
    assert_eq!(cdfs.len(), 4, "{cdfs:?}");

    let trials = fs::read_to_string(dir.join("trials.csv")).unwrap();
    let rows = tables::read_trials(&trials).unwrap();
    assert_eq!(rows.len(), 100);
    assert_eq!(tables::write_trials(&rows).unwrap(), trials);
    for name in &cdfs {
        let text = fs::read_to_string(dir.join(name)).unwrap();
        let cdf = tables::read_cdf(&text).unwrap();
        assert_eq!(cdf.values.len(), 50);
        assert_eq!(tables::write_cdf(&cdf).unwrap(), text);
    }
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(
        tables::write_summary(&tables::read_summary(&summary).unwrap()).unwrap(),
        summary
    );

    let replay = tmp.path().join("replay");
    let res = chansense(
        &["experiment", "--out", path(&replay), "--config"],
        &[&dir.join("manifest.json")],
    );
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    for name in cdfs
        .iter()
        .map(String::as_str)
        .chain(["trials.csv", "summary.csv"])
    {
        assert_eq!(
            fs::read(dir.join(name)).unwrap(),
            fs::read(replay.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn simulated_dataset_matches_first_experiment_trial() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("d.json");
    let dir = tmp.path().join("run");
    run(&["simulate", "--seed", "5", "--out", path(&data)]);
    run(&[
        "experiment",
        "--seed",
        "5",
        "--trials",
        "1",
        "--estimators",
        "[\"indirect_ls\"]",
        "--out",
        path(&dir),
    ]);
    let est = tmp.path().join("e.json");
    run(&["estimate", "--dataset", path(&data), "--out", path(&est)]);
    let rows = tables::read_trials(&fs::read_to_string(dir.join("trials.csv")).unwrap()).unwrap();
    let report = read_report(&est);
    assert_eq!(rows[0].rmse_overall, report.rmse_overall.unwrap());
    assert_eq!(rows[0].rmse_nonzero, report.rmse_nonzero.unwrap());
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("file");
    fs::write(&file, "x").unwrap();
    let res = chansense(
        &["experiment", "--trials", "2", "--out"],
        &[&file.join("sub")],
    );
    assert_eq!(code(&res), 3);
    let res = chansense(&["simulate", "--out"], &[&file.join("d.json")]);
    assert_eq!(code(&res), 3);
}

#[test]
fn experiment_gate_exits_five() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run(&[
        "experiment",
        "--trials",
        "4",
        "--n_taps",
        "30",
        "--training_len",
        "10",
        "--sparse_k",
        "5",
        "--head_count",
        "3",
        "--modes.x",
        "truncated",
        "--out",
        path(&tmp.path().join("g")),
    ]);
    assert_eq!(code(&res), 5, "{}", stderr(&res));
}

#[test]
fn unknown_override_and_preset_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("d.json");
    assert_eq!(
        code(&run(&["simulate", "--trails", "3", "--out", path(&out)])),
        2
    );
    assert_eq!(
        code(&run(&[
            "simulate",
            "--preset",
            "paper-5db",
            "--out",
            path(&out)
        ])),
        2
    );
}
