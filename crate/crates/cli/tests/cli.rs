use std::path::Path;
use std::process::{Command, Output};

fn ordent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordent"))
        .args(args)
        .env_remove("ORDENT_SEED")
        .output()
        .expect("run ordent")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_one_line_per_step() {
    let o = ordent(&["simulate", "--system", "logistic:4", "--len", "1000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1000);
    let first: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], first[2], "identity observable repeats x");
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = ordent(&["simulate", "--system", "tent", "--observable", "sin-cos", "--len", "5000", "--seed", "7", "--out", path(p)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = ordent(&["simulate", "--system", "tent", "--observable", "sin-cos", "--len", "5000", "--seed", "8"]);
    assert_ne!(stdout(&other).into_bytes(), std::fs::read(&a).unwrap());
}

#[test]
fn seed_defaults_to_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ordent"));
        c.args(["simulate", "--len", "20"]).args(extra).env_remove("ORDENT_SEED");
        if let Some(v) = env {
            c.env("ORDENT_SEED", v);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("5"), &[]), run(None, &["--seed", "5"]));
    assert_eq!(run(Some("5"), &["--seed", "6"]), run(None, &["--seed", "6"]));
    assert_ne!(run(Some("5"), &[]), run(None, &[]));
}

#[test]
fn bad_system_is_a_config_error() {
    let o = ordent(&["simulate", "--system", "logistic:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(0, 4]"), "{}", stderr(&o));
    assert_eq!(ordent(&["simulate", "--system", "henon"]).status.code(), Some(2));
    assert_eq!(ordent(&["simulate", "--bogus-flag"]).status.code(), Some(2));
}

#[test]
fn short_series_is_insufficient_data() {
    let o = ordent(&["entropy-table", "--len", "50", "--d-max", "2", "--k-max", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("insufficient data"));
}

#[test]
fn tent_table_prints_oracle_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tent.json");
    let o = ordent(&["entropy-table", "--system", "tent:1.9999", "--d-max", "6", "--k-max", "3", "--len", "1000000", "--seed", "1", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert!(line.contains("lyapunov 0.69") && line.contains("|difference|"), "{line}");
    let table: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let est = table["ks_estimate"]["nats"].as_f64().unwrap();
    assert!((est - 1.9999f64.ln()).abs() < 0.1 * 1.9999f64.ln());
}

#[test]
fn rotation_table_estimate_is_small() {
    let o = ordent(&["entropy-table", "--system", "rotation", "--d-max", "6", "--k-max", "20", "--len", "1000000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let summary = stderr(&o);
    let est: f64 = summary
        .split_whitespace()
        .skip_while(|w| *w != "ks_estimate")
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(est < 0.05, "{summary}");
    assert!(stdout(&o).starts_with("d,k,block_nats,cond_nats,distinct_blocks,total_blocks,reliable_flag\n"));
}

#[test]
fn undersampled_table_warns_but_succeeds() {
    let o = ordent(&["entropy-table", "--len", "1000", "--d-max", "7", "--k-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning:"));
    let table: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cells = table["cells"].as_array().unwrap();
    assert!(cells.iter().any(|c| c["reliable_flag"] == false));
}

#[test]
fn entropy_table_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |p: &str| {
        vec![
            "entropy-table".to_string(),
            "--system=logistic:4".into(),
            "--observable=sin-cos".into(),
            "--d-max=4".into(),
            "--k-max=4".into(),
            "--len=20000".into(),
            "--orbits=3".into(),
            "--seed=3".into(),
            format!("--out={p}"),
        ]
    };
    for (name, threads) in [("a.json", "1"), ("b.json", "2")] {
        let p = dir.path().join(name);
        let mut a = args(path(&p));
        a.push(format!("--threads={threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_ordent")).args(&a).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), std::fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let toml_cfg = dir.path().join("run.toml");
    std::fs::write(&toml_cfg, "orbit_len = 12\nseed = 4\n\n[system]\nkind = \"tent\"\nslope = 1.5\n").unwrap();
    let json_cfg = dir.path().join("run.json");
    std::fs::write(&json_cfg, r#"{"system": "tent:1.5", "orbit_len": 12, "seed": 4}"#).unwrap();

    let from_toml = stdout(&ordent(&["simulate", "--config", path(&toml_cfg)]));
    let from_json = stdout(&ordent(&["simulate", "--config", path(&json_cfg)]));
    let from_flags = stdout(&ordent(&["simulate", "--system", "tent:1.5", "--len", "12", "--seed", "4"]));
    assert_eq!(from_toml.lines().count(), 12);
    assert_eq!(from_toml, from_json);
    assert_eq!(from_toml, from_flags);

    let overridden = stdout(&ordent(&["simulate", "--config", path(&toml_cfg), "--len", "5"]));
    assert_eq!(overridden.lines().count(), 5);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[system]\nkind = \"logistic\"\nr = 9.0\n").unwrap();
    assert_eq!(ordent(&["simulate", "--config", path(&bad)]).status.code(), Some(2));
    let unknown = dir.path().join("run.yaml");
    std::fs::write(&unknown, "seed: 1\n").unwrap();
    assert_eq!(ordent(&["simulate", "--config", path(&unknown)]).status.code(), Some(2));
}

#[test]
fn verify_suites_pass_and_report_json() {
    for suite in ["alpha", "cdf"] {
        let o = ordent(&["verify", suite]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(r["suite"], suite);
        assert_eq!(r["passed"], true);
        assert!(!r["checks"].as_array().unwrap().is_empty());
    }
}

#[test]
fn verify_report_is_byte_identical() {
    assert_eq!(ordent(&["verify", "rank"]).stdout, ordent(&["verify", "rank"]).stdout);
}

#[test]
fn unknown_suite_is_a_config_error() {
    let o = ordent(&["verify", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn symbolize_and_rank_outputs() {
    let o = ordent(&["symbolize", "--d-max", "3", "--len", "100", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    // 100 values give 97 windows of length 4
    assert_eq!(stdout(&o).lines().count(), 97);
    assert!(stdout(&o).lines().all(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap() < 24));

    let o = ordent(&["rank", "--degrees", "100,1000", "--trials", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
}
