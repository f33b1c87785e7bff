use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn proactive(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proactive"))
        .args(args)
        .env_remove("PROACTIVE_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SIMULATE_TOML: &str = r#"
command = "simulate"
capacity = [4]
paths = 4
slots = 500
seed = 3

[[traffic]]
role = "unicast"
regime = { kind = "linear", gamma = 0.5 }
lookahead = { kind = "deterministic", t = 1 }

[policy]
kind = "edf"
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn reactive_multicast_gain_is_one_row() {
    let o = proactive(&[
        "analytic",
        "--theorem",
        "7",
        "--gamma-m",
        "0.5",
        "--theta",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,C,class,metric,value,stderr,seed");
    assert_eq!(lines.len(), 2);
    let value: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert!((value - 0.372397).abs() < 1e-6);
}

#[test]
fn out_of_range_parameter_is_a_config_error() {
    let o = proactive(&[
        "analytic",
        "--theorem",
        "7",
        "--gamma-m",
        "1.5",
        "--theta",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma_m"));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SIMULATE_TOML.replace("paths = 4", "paths = \"many\"");
    let file = write(dir.path(), "bad.toml", &bad);
    let o = proactive(&["run", &file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`paths`"), "{}", stderr(&o));

    let unknown = SIMULATE_TOML.replace("seed = 3", "seed = 3\nsede = 4");
    let file = write(dir.path(), "typo.toml", &unknown);
    let o = proactive(&["validate", &file]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));
}

#[test]
fn heavier_secondary_is_rejected_with_the_field() {
    let o = proactive(&[
        "simulate",
        "--C",
        "10",
        "--gamma",
        "0.1",
        "--gamma-s",
        "0.2",
        "--T",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("secondary"), "{}", stderr(&o));
}

#[test]
fn config_file_and_flags_give_the_same_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "sim.toml", SIMULATE_TOML);
    let from_file = proactive(&["run", &file]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    let from_flags = proactive(&[
        "simulate", "--C", "4", "--gamma", "0.5", "--T", "1", "--paths", "4", "--slots", "500",
        "--seed", "3",
    ]);
    assert_eq!(stdout(&from_file), stdout(&from_flags));
    assert!(proactive(&["validate", &file]).status.success());
}

#[test]
fn seed_falls_back_to_the_environment() {
    let args = [
        "simulate", "--C", "4", "--gamma", "0.5", "--paths", "3", "--slots", "300",
    ];
    let env = Command::new(env!("CARGO_BIN_EXE_proactive"))
        .args(args)
        .env("PROACTIVE_SEED", "8")
        .output()
        .unwrap();
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "8"]);
    assert_eq!(env.stdout, proactive(&explicit).stdout);
    assert!(stdout(&env).lines().nth(1).unwrap().ends_with(",8"));
}

#[test]
fn manifest_replay_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let o = proactive(&[
        "sweep",
        "--C",
        "6..10:2",
        "--gamma",
        "0.7",
        "--T",
        "2",
        "--paths",
        "3",
        "--slots",
        "400",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = first.join("manifest.json");
    let o = proactive(&[
        "replay",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(first.join("results.csv")).unwrap(),
        fs::read(second.join("results.csv")).unwrap()
    );
    assert_eq!(
        fs::read(first.join("manifest.json")).unwrap(),
        fs::read(second.join("manifest.json")).unwrap()
    );
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = proactive(&[
        "analytic",
        "--theorem",
        "1",
        "--gamma",
        "0.5",
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracle_check_reports_both_estimates() {
    let o = proactive(&[
        "oracle-check",
        "--C",
        "2",
        "--gamma",
        "0.5",
        "--T",
        "1",
        "--paths",
        "10",
        "--slots",
        "5000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for metric in [
        "exact",
        "p_hat",
        "truncation_mass",
        "event_lower",
        "event_upper",
    ] {
        assert!(
            text.lines().any(|l| l.split(',').nth(3) == Some(metric)),
            "missing {metric}:\n{text}"
        );
    }
}

#[test]
fn fig4a_prediction_stays_below_reactive() {
    let o = proactive(&[
        "reproduce-figure",
        "fig4a",
        "--paths",
        "10",
        "--slots",
        "2000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let value = |label: &str, c: &str| -> f64 {
        rows.iter()
            .find(|r| r[0].ends_with(label) && r[1] == c)
            .unwrap_or_else(|| panic!("no {label} at C={c}:\n{text}"))[4]
            .parse()
            .unwrap()
    };
    for c in (10..=60).step_by(5).map(|c: u32| c.to_string()) {
        let reactive = value("nonpred", &c);
        for t in 1..=3 {
            let p = value(&format!("T={t}"), &c);
            assert!(p < reactive, "C={c} T={t}: {p} vs {reactive}");
        }
    }
}
