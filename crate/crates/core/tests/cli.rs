use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SQUARE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/square.csv");

fn elhmc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elhmc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn square_run_writes_samples_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = elhmc(
        &[
            "--data", SQUARE, "--initial", "0.9,0.95", "--n-samples", "300", "--lf-steps", "15",
            "--epsilon", "0.06", "--burn-in", "100", "--seed", "3",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let samples = read_rows(&dir.path().join("samples.csv"));
    assert_eq!(samples[0], ["theta_1", "theta_2"]);
    assert_eq!(samples.len() - 1, 200);

    let acf = read_rows(&dir.path().join("acf.csv"));
    assert_eq!(acf[0], ["lag", "theta_1", "theta_2"]);
    assert_eq!(acf.len() - 1, 51);
    assert_eq!(acf[1][1].parse::<f64>().unwrap(), 1.0);

    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["call"]["initial"], serde_json::json!([0.9, 0.95]));
    assert_eq!(summary["call"]["hmc"]["lf_steps"], 15);
    assert_eq!(summary["call"]["model"]["name"], "mean");
    assert_eq!(summary["retained"], 200);
    let acceptance = summary["acceptance_rate"].as_f64().unwrap();
    assert!(acceptance > 0.5 && acceptance <= 1.0);
    assert_eq!(summary["coordinates"].as_array().unwrap().len(), 2);
}

#[test]
fn detailed_files_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = elhmc(
        &[
            "--data", SQUARE, "--initial", "0.9,0.95", "--n-samples", "20", "--lf-steps", "5",
            "--epsilon", "0.06", "--detailed",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let proposed = read_rows(&dir.path().join("proposed.csv"));
    let accepted = read_rows(&dir.path().join("acceptance.csv"));
    let samples = read_rows(&dir.path().join("samples.csv"));
    let traj_q = read_rows(&dir.path().join("trajectory_q.csv"));
    let traj_p = read_rows(&dir.path().join("trajectory_p.csv"));
    assert_eq!(proposed.len() - 1, 19);
    assert_eq!(accepted.len() - 1, 19);
    assert_eq!(traj_q.len(), traj_p.len());
    assert_eq!(traj_q[0], ["update", "step", "theta_1", "theta_2"]);

    for update in 1..=19 {
        let steps: Vec<&Vec<String>> =
            traj_q[1..].iter().filter(|r| r[0] == update.to_string()).collect();
        // every trajectory here completes: the square posterior is far from its boundary
        assert_eq!(steps.len(), 6);
        assert_eq!(steps[0][2..], samples[update][..]);
        assert_eq!(steps[5][2..], proposed[update][..]);
        if accepted[update][1] == "true" {
            assert_eq!(samples[update + 1], proposed[update]);
        } else {
            assert_eq!(samples[update + 1], samples[update]);
        }
    }
}

#[test]
fn two_stage_multi_chain_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = elhmc(
        &[
            "--data", SQUARE, "--initial", "0.5,0.5", "--chains", "2", "--stage",
            "n-samples=10,epsilon=0.01", "--stage", "n-samples=30,lf-steps=8", "--burn-in", "5",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for chain in 1..=2 {
        let base = dir.path().join(format!("chain-{chain}"));
        let first = read_rows(&base.join("stage-1/samples.csv"));
        let second = read_rows(&base.join("stage-2/samples.csv"));
        assert_eq!(first.len() - 1, 10);
        assert_eq!(second.len() - 1, 25);
    }
    let a = std::fs::read(dir.path().join("chain-1/stage-2/samples.csv")).unwrap();
    let b = std::fs::read(dir.path().join("chain-2/stage-2/samples.csv")).unwrap();
    assert_ne!(a, b, "chains share a random stream");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| elhmc(args, dir.path()).status.code().unwrap();

    // configuration errors
    assert_eq!(code(&["--data", SQUARE, "--initial", "0.1,0.2", "--epsilon", "-1"]), 2);
    assert_eq!(code(&["--data", SQUARE, "--initial", "0.1"]), 2);
    assert_eq!(code(&["--data", SQUARE, "--initial", "0.1,0.2", "--n-samples", "10", "--burn-in", "10"]), 2);
    // starting value outside the convex hull of the data
    assert_eq!(code(&["--data", SQUARE, "--initial", "1.5,0"]), 3);
    // data errors
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n").unwrap();
    assert_eq!(code(&["--data", ragged.to_str().unwrap(), "--initial", "0,0"]), 4);
    assert_eq!(code(&["--data", "/nonexistent/data.csv", "--initial", "0,0"]), 4);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--data", SQUARE, "--initial", "0.9,0.95", "--n-samples", "100", "--seed", "9"];
    assert!(elhmc(&args, &dir.path().join("a")).status.success());
    assert!(elhmc(&args, &dir.path().join("b")).status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a/samples.csv")).unwrap(),
        std::fs::read(dir.path().join("b/samples.csv")).unwrap()
    );
}
