use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neuronlab")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("neuronlab-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn bump_solve_exp() {
    let v = stdout_json(&run(&["bump", "solve", "--rho", "exp(x)"]));
    assert!((v["lambda"].as_f64().unwrap() - (-2f64).exp()).abs() < 1e-10);
    assert!((v["L"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn indep_test_on_a_family() {
    let p = temp_file("family.json", r#"{"kind": "family", "functions": ["exp(x)", "exp(2*x)", "x"], "interval": [-1, 1]}"#);
    let v = stdout_json(&run(&["indep", "test", "--spec", p.to_str().unwrap()]));
    assert_eq!(v["independent"], true);

    let p = temp_file("dependent.json", r#"{"kind": "family", "functions": ["tanh(x)", "2*sigmoid(2*x) - 1"]}"#);
    let v = stdout_json(&run(&["indep", "test", "--spec", p.to_str().unwrap()]));
    assert_eq!(v["independent"], false);
    assert!(v["min_singular_value"].as_f64().unwrap() < 1e-8);
    assert!(v["zero_function"].is_null());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["bump", "solve"]).status.code(), Some(2));
}

#[test]
fn malformed_spec_reports_position() {
    let p = temp_file("bad.json", "{\"kind\": \"family\",\n  \"functions\": [\"x\",, ]}");
    let o = run(&["indep", "test", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"], "spec");
    assert_eq!(e["line"], 2);
    assert!(e["column"].as_u64().unwrap() > 0);
}

#[test]
fn wrong_spec_kind_is_a_domain_error() {
    let p = temp_file("kind.json", r#"{"kind": "family", "functions": ["x"]}"#);
    let o = run(&["net", "eval", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_neuronlab"))
        .args(["bump", "solve", "--rho", "exp(x)"])
        .env("NEURONLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let args = ["zero", "enumerate", "--input-dim", "2", "--widths", "2,1", "--samples", "3", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["zero", "enumerate", "--input-dim", "2", "--widths", "2,1", "--samples", "3", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_header_and_columns() {
    let o = run(&["blend", "tanh-approx", "--grid", "5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# neuronlab-csv v1 blend tanh-approx: alpha,x,sigma_tilde,tanh");
    let data: Vec<&str> = lines.filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "alpha,x,sigma_tilde,tanh");
    assert_eq!(data.len(), 1 + 4 * 5);
    for row in &data[1..] {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 4);
        assert!((cells[3] - cells[1].tanh()).abs() < 1e-15);
    }
}

#[test]
fn out_flag_writes_a_file() {
    let p = temp_file("poles.csv", "");
    let o = run(&["curves", "poles", "--w", "2", "--b", "1", "--q-min", "0", "--q-max", "1", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&p).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    // (i·3π − 1)/2
    assert_eq!(last[0], 1.0);
    assert!((last[1] + 0.5).abs() < 1e-15);
    assert!((last[2] - 1.5 * std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn growth_commands() {
    let v = stdout_json(&run(&["growth", "classify", "--expr", "exp(exp(x))"]));
    assert_eq!(v["hyper_exponential"], true);
    let v = stdout_json(&run(&["growth", "classify", "--expr", "exp(x)"]));
    assert_eq!(v["class"], "hyper-polynomial-only");
    let v = stdout_json(&run(&["growth", "order", "--expr", "exp(2*x)", "--expr", "x", "--expr", "exp(x)"]));
    assert_eq!(v["order"], serde_json::json!([0, 2, 1]));
}

#[test]
fn blowup_starts_at_the_closed_form() {
    let o = run(&["curves", "blowup", "--params", "1:0", "--grid", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let first = text.lines().find(|l| !l.starts_with('#') && !l.starts_with('t')).unwrap();
    let cells: Vec<f64> = first.split(',').map(|c| c.parse().unwrap()).collect();
    let want = 1.0 / (1.0 - (-1f64).exp());
    assert!((cells[3] - want).abs() < 1e-12);
}
