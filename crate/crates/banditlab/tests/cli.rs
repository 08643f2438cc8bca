//! End-to-end checks of the `banditlab` binary: subcommands, CSV output and
//! exit codes (0 success, 2 config error, 3 numerical failure).

use std::io::Write;
use std::process::{Command, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_banditlab"))
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("banditlab_test_{}_{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

const CONFIG: &str = r#"{
  "environment": {"kind": "stochastic", "arms": [
    {"kind": "bernoulli", "p": 0.5},
    {"kind": "dirac", "value": 0.495}
  ]},
  "policy": {"policy": "ucbv", "zeta": 1.0},
  "n": 500,
  "replications": 5,
  "seed": 42,
  "metrics": ["pseudo_regret"]
}"#;

#[test]
fn run_emits_deterministic_csv() {
    let config = write_temp("config.json", CONFIG);
    let out = |path: &std::path::Path| {
        let output = bin()
            .args(["run", "--config"])
            .arg(&config)
            .args(["--jobs", "2", "--out"])
            .arg(path)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        std::fs::read_to_string(path).unwrap()
    };
    let a = out(&write_temp("a.csv", ""));
    let b = out(&write_temp("b.csv", ""));
    assert_eq!(a, b);
    assert!(a.starts_with("replication,pseudo_regret\n"));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn run_with_seed_override_changes_rows() {
    let config = write_temp("config2.json", CONFIG);
    let base = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    let other = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--seed", "43"])
        .output()
        .unwrap();
    assert!(base.status.success() && other.status.success());
    assert_ne!(base.stdout, other.stdout);
}

#[test]
fn config_errors_exit_2() {
    // incompatible metric for an index policy
    let bad = CONFIG.replace("pseudo_regret", "error_prob");
    let config = write_temp("bad_config.json", &bad);
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // malformed JSON
    let config = write_temp("broken.json", "{not json");
    let output = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn stop_reads_stream_and_reports_trace() {
    let samples: String = std::iter::repeat_n("0.7\n", 4000).collect();
    let mut child = bin()
        .args(["stop", "--delta", "0.2", "--eps", "0.1"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(samples.as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("estimate,"), "got: {text}");
    assert!(text.contains("stopping_time,"));
    assert!(text.contains("t,mean,radius,lower,upper"));
    let estimate: f64 = text
        .lines()
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((estimate - 0.7).abs() <= 0.2 * 0.7 + 1e-9);
}

#[test]
fn stop_exhausted_stream_exits_3() {
    let mut child = bin()
        .args(["stop", "--delta", "0.01", "--eps", "0.01"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"0.5\n0.6\n0.4\n")
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn summarize_reports_metric_rows() {
    let config = write_temp("config3.json", CONFIG);
    let csv_path = write_temp("results.csv", "");
    let run = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(run.status.success());
    let output = bin()
        .arg("summarize")
        .arg(&csv_path)
        .args(["--level", "0.95"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("metric,count,mean,std_error,ci_low,ci_high,q05,median,q95"));
    assert!(text.contains("pseudo_regret,5,"));
}
