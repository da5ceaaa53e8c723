use std::path::Path;
use std::process::{Command, Output};

use num_rational::BigRational;
use qudit_nsf::chain::{run_chain, StrategyOrder};
use qudit_nsf::gf::FieldCtx;
use qudit_nsf::io::{channel_to_json, parse_graph};
use serde_json::Value;
use tempfile::TempDir;

const CHAIN3: &str = r#"{"field":{"p":3,"m":1},"vertices":[1,2,3],
  "edges":[{"u":1,"v":2,"w":[1]},{"u":2,"v":3,"w":[1]}]}"#;

const DEPOLARIZE3: &str = r#"[
  {"type":"depolarizing","v":1,"lambda":"1/2"},
  {"type":"depolarizing","v":2,"lambda":"1/2"},
  {"type":"depolarizing","v":3,"lambda":"1/2"}]"#;

const MEASURE_MIDDLE: &str = r#"[{"op":"measure","v":2,"z":[1],"x":[1],"b":[0]}]"#;

fn nsf(args: &[&str]) -> Output {
    nsf_with_env(args, &[])
}

fn nsf_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nsf"));
    cmd.args(args).env_remove("NSF_DENSE_CAP");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("nsf runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn empty_script_echoes_the_input() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", CHAIN3);
    let doc = stdout_json(&nsf(&["simulate", "--graph", &g]));
    let input: Value = serde_json::from_str(CHAIN3).unwrap();
    assert_eq!(doc["graph"]["vertices"], input["vertices"]);
    assert_eq!(doc["graph"]["edges"], input["edges"]);
    let echoed = parse_graph("out", &doc["graph"].to_string()).unwrap();
    assert_eq!(echoed, parse_graph("in", CHAIN3).unwrap());
    assert_eq!(doc["channels"], Value::Array(vec![]));
    assert_eq!(doc["corrections"], Value::Array(vec![]));
    assert_eq!(doc["fidelity_to_final_graph"], "1");
}

#[test]
fn three_chain_matches_the_library() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", CHAIN3);
    let c = write(dir.path(), "c.json", DEPOLARIZE3);
    let o = write(dir.path(), "o.json", MEASURE_MIDDLE);
    let out_path = dir.path().join("out.json");
    let out = nsf(&[
        "simulate",
        "--graph",
        &g,
        "--channels",
        &c,
        "--ops",
        &o,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();

    let f = FieldCtx::new(3, 1).unwrap();
    let order = StrategyOrder::side_to_side(3).unwrap();
    let run = run_chain(3, &f, BigRational::new(1.into(), 2.into()), &order).unwrap();
    let want: Vec<Value> = run
        .state
        .channels()
        .iter()
        .map(|ch| channel_to_json(&f, ch))
        .collect();
    assert_eq!(doc["channels"], Value::Array(want));
    assert_eq!(doc["graph"]["vertices"], serde_json::json!([1, 3]));
    assert_eq!(doc["corrections"].as_array().unwrap().len(), 1);

    let float = stdout_json(&nsf(&[
        "simulate",
        "--graph",
        &g,
        "--channels",
        &c,
        "--ops",
        &o,
        "--float",
    ]));
    let exact: f64 = {
        let s = doc["fidelity_to_final_graph"].as_str().unwrap();
        let (n, d) = s.split_once('/').unwrap();
        n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
    };
    assert!((float["fidelity_to_final_graph"].as_f64().unwrap() - exact).abs() < 1e-12);
}

#[test]
fn malformed_weight_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let g = write(
        dir.path(),
        "g.json",
        &CHAIN3.replace(r#""w":[1]},{"u":2"#, r#""w":[1,0]},{"u":2"#),
    );
    let out = nsf(&["simulate", "--graph", &g]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("g.json") && err.contains("entry 0"), "{err}");

    let g = write(
        dir.path(),
        "g2.json",
        "{\"field\": {\"p\": 3, \"m\": 1},\n  \"vertices\": [1, 2,",
    );
    let out = nsf(&["simulate", "--graph", &g]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g2.json:2:"));
}

#[test]
fn non_diagonal_channel_is_rejected() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", CHAIN3);
    let c = write(
        dir.path(),
        "c.json",
        r#"[{"type":"amplitude_damping","v":1,"gamma":0.1}]"#,
    );
    let out = nsf(&["simulate", "--graph", &g, "--channels", &c]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Pauli-diagonal"));
}

#[test]
fn bell_chain_writes_csv() {
    let out = nsf(&[
        "bell-chain",
        "--N",
        "10",
        "--p",
        "2",
        "--m-range",
        "1..3",
        "--q2",
        "0.996",
        "--r",
        "0.95,1",
        "--scaling",
        "linear",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "p",
            "m",
            "d",
            "N",
            "r",
            "q2",
            "q_d",
            "scaling",
            "F",
            "F_adapted"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let fid: f64 = row[8].parse().unwrap();
        assert!(fid > 0.0 && fid <= 1.0);
        assert_eq!(&row[7], "linear");
    }
    assert_eq!(&rows[5][2], "8");

    let bad = nsf(&[
        "bell-chain",
        "--N",
        "10",
        "--p",
        "2",
        "--q2",
        "0.996",
        "--order",
        "3,4",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_passes_and_reports_unsupported_dimensions() {
    let out = nsf(&[
        "verify", "--d-list", "3,4", "--max-n", "3", "--trials", "5", "--seed", "9",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("even-extension unsupported"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn verify_is_reproducible_for_a_seed() {
    let args = [
        "verify", "--d-list", "2,5", "--max-n", "3", "--trials", "5", "--seed", "31",
    ];
    let a = nsf(&args);
    let b = nsf(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn dense_cap_override_skips_oracle_suites() {
    let out = nsf_with_env(
        &["verify", "--d-list", "3", "--max-n", "3", "--trials", "3"],
        &[("NSF_DENSE_CAP", "8")],
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("SKIP"), "{text}");
    assert!(text.contains("NSF_DENSE_CAP"), "{text}");
    assert_eq!(out.status.code(), Some(0), "{text}");
}
