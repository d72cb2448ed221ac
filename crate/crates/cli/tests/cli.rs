use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn evoprep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoprep")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn single_target_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    stdout(&evoprep(dir, &["--seed", "3", "--out", "states", "sample-states", "--n", "3", "--count", "2"]));
    assert!(dir.join("states/state_001.txt").is_file());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("states/manifest.json")).unwrap()).unwrap();
    assert_eq!((manifest["n_qubits"].as_u64(), manifest["count"].as_u64(), manifest["seed"].as_u64()), (Some(3), Some(2), Some(3)));

    let base = stdout(&evoprep(dir, &["--out", "base", "prepare-baseline", "--target", "states/state_000.txt"]));
    assert!(base.contains("fidelity 1.0000000000"), "{base}");

    let args = ["--out", "ga", "--seed", "1", "evolve", "--target", "states/state_000.txt", "--generations", "40"];
    let front = stdout(&evoprep(dir, &[&args[..], &["--population", "20"]].concat()));
    assert!(front.starts_with("cnot_count,cost,noiseless_f,noisy_f\n"));
    for file in ["final_population.jsonl", "logbook.csv", "front.jsonl", "front.csv"] {
        assert!(dir.join("ga").join(file).is_file(), "{file}");
    }
    assert_eq!(fs::read_to_string(dir.join("ga/logbook.csv")).unwrap().lines().count(), 42);

    let eval = stdout(&evoprep(dir, &["evaluate", "--target", "states/state_000.txt", "--circuit", "base/baseline.txt"]));
    let row: Vec<f64> = eval.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(row[2] > 1.0 - 1e-8 && row[3] < row[2]);

    let pop = stdout(&evoprep(
        dir,
        &["evaluate", "--target", "states/state_000.txt", "--population", "ga/front.jsonl", "--p1", "0", "--p2", "0"],
    ));
    for line in pop.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((v[2] - v[3]).abs() < 1e-9);
    }
}

#[test]
fn theory_curves_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = evoprep(tmp.path(), &["theory", "curves", "--n", "10", "--p", "0.01", "--lph", "3.7", "--max-l", "70"]);
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 72);
    assert!(String::from_utf8_lossy(&out.stderr).contains("l* = 67, F_max = 0.1627"));

    let summary = stdout(&evoprep(tmp.path(), &["--out", "t", "theory", "curves", "--n", "5", "--p", "0.0088"]));
    assert_eq!(summary.lines().count(), 5);
    assert!(tmp.path().join("t/theory.csv").is_file());
}

#[test]
fn theory_fit_reads_a_front() {
    let tmp = tempfile::tempdir().unwrap();
    // Synthetic front following the model with l_ph = 2 for n = 4.
    let mut lines = String::new();
    let circuit = "qubits 4\\nlayout 0 1 2 3\\n";
    for l in [0usize, 3, 6, 9] {
        let cx = "cx 0 1\\n".repeat(l);
        let f = evoprep::theory::noiseless_bound(4, l as f64, 2.0);
        lines.push_str(&format!(
            "{{\"circuit\":\"{circuit}{cx}\",\"cost\":{},\"cnot_count\":{l},\"fidelity\":{f}}}\n",
            10 * l
        ));
    }
    fs::write(tmp.path().join("front.jsonl"), lines).unwrap();
    let fit = stdout(&evoprep(tmp.path(), &["theory", "fit", "--front", "front.jsonl"]));
    let l_ph: f64 = fit.trim().strip_prefix("l_ph = ").unwrap().parse().unwrap();
    assert!((l_ph - 2.0).abs() < 1e-9, "{l_ph}");
}

#[test]
fn experiment_run_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("exp.toml"), "n_qubits = 3\nstate_count = 2\n[ga]\npopulation_size = 20\ngenerations = 20\n")
        .unwrap();
    let run = stdout(&evoprep(dir, &["--config", "exp.toml", "--out", "res", "--threads", "1", "run"]));
    assert!(run.contains("completed 2/2"));
    let report = stdout(&evoprep(dir, &["--out", "res", "report", "--bins", "4"]));
    assert!(report.contains("abs_delta: gaussian fit"));
    assert!(dir.join("res/histograms.csv").is_file());
}

#[test]
fn failures_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(evoprep(dir, &["--config", "missing.toml", "run"]).status.code(), Some(1));
    fs::write(dir.join("bad.toml"), "state_count = 0\n").unwrap();
    assert_eq!(evoprep(dir, &["--config", "bad.toml", "run"]).status.code(), Some(1));
    assert_eq!(evoprep(dir, &["report", "--dir", "nowhere"]).status.code(), Some(1));

    // A report with a skipped state gives exit code 2.
    fs::write(dir.join("exp.toml"), "n_qubits = 2\nstate_count = 1\n[ga]\npopulation_size = 4\ngenerations = 1\n")
        .unwrap();
    stdout(&evoprep(dir, &["--config", "exp.toml", "--out", "res", "run"]));
    let path = dir.join("res/report.json");
    let text = fs::read_to_string(&path).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["states"][0]["skipped"] = "simulated failure".into();
    json["states"][0]["result"] = serde_json::Value::Null;
    fs::write(&path, json.to_string()).unwrap();
    let out = evoprep(dir, &["--out", "res", "report"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("skipped: simulated failure"));
}
