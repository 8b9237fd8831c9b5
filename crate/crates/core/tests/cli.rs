mod common;

use std::io::Write;
use std::process::{Command, Stdio};

use common::*;
use lti_laplace::cli::{LaplaceDoc, SignalDoc, TfDoc};
use lti_laplace::crosstalk::{aggressor_tf, total_tf, victim_tf, AggressorParams, VictimParams};
use lti_laplace::laplace::transform;
use lti_laplace::lerch::transform_equal;
use lti_laplace::{LaplaceExpr, TransferFunction};
use serde_json::{json, Value};

struct Run {
    code: i32,
    stdout: String,
}

fn run_with(args: &[&str], stdin: &str) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_lti-laplace"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    Run { code: out.status.code().unwrap(), stdout: String::from_utf8(out.stdout).unwrap() }
}

fn run(job: &Value) -> Run {
    run_with(&[], &job.to_string())
}

fn json_of(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap()
}

fn same_tf(a: &TransferFunction, b: &TransferFunction) -> bool {
    transform_equal(&LaplaceExpr::rational(a.rf.clone()), &LaplaceExpr::rational(b.rf.clone()))
}

fn ones() -> Value {
    json!({
        "aggressor": {"r1a": 1, "r2a": 1, "rth": 1, "c1a": 1, "c2a": 1, "c3a": 1},
        "victim": {"r1v": 1, "r2v": 1, "rd": 1, "cc": 1, "c1v": 1, "c2v": 1, "c3v": 1},
    })
}

#[test]
fn emitted_transfer_functions_reparse() {
    let out = run(&json!({"command": "crosstalk", "payload": ones()}));
    assert_eq!(out.code, 0);
    let v = json_of(&out);
    let (pa, pv) = (AggressorParams::uniform(1.0, 1.0), VictimParams::uniform(1.0, 1.0));
    let expected = [
        ("aggressor", aggressor_tf(&pa).unwrap()),
        ("victim", victim_tf(&pv).unwrap()),
        ("total", total_tf(&pa, &pv).unwrap()),
    ];
    for (key, h) in expected {
        let doc = if key == "total" { &v[key] } else { &v[key]["tf"] };
        let parsed: TfDoc = serde_json::from_value(doc.clone()).unwrap();
        assert!(same_tf(&parsed.to_tf().unwrap(), &h), "{key}");
    }
}

#[test]
fn tf2ode_output_reparses() {
    let out = run(&json!({"command": "tf2ode", "payload": {"num": [3, 1], "den": [2, 3, 1]}}));
    assert_eq!(out.code, 0);
    assert_eq!(json_of(&out), json!({"alpha": [1.0, 1.5, 0.5], "beta": [1.5, 0.5]}));
    // common factors cancel first: (s + 1)/((s + 1)(s + 2))
    let out = run(&json!({"command": "tf2ode", "payload": {"num": [1, 1], "den": [2, 3, 1]}}));
    assert_eq!(json_of(&out), json!({"alpha": [1.0, 0.5], "beta": [0.5]}));
}

#[test]
fn transform_documents_roundtrip() {
    let mut rng = rng(601);
    for _ in 0..20 {
        let f = random_signal(&mut rng, 4, &SHIFTS);
        let job = json!({"command": "transform", "payload": SignalDoc::from_time(&f)});
        let out = run(&job);
        assert_eq!(out.code, 0);
        let doc: LaplaceDoc = serde_json::from_str(&out.stdout).unwrap();
        assert!(transform_equal(&doc.to_expr().unwrap(), &transform(&f)));

        let back = run(&json!({"command": "invert", "payload": doc}));
        assert_eq!(back.code, 0);
        let g: SignalDoc = serde_json::from_str(&back.stdout).unwrap();
        assert!(g.to_time().unwrap().equal(&f, 1e-6));
    }
}

#[test]
fn outputs_are_deterministic() {
    let jobs = [
        json!({"command": "crosstalk", "payload": ones()}),
        json!({"command": "stepresp", "payload": {"alpha": [2, 3, 1], "beta": [1], "t_max": 5, "dt": 0.01}}),
        json!({"command": "transform", "payload": {"modes": [{"amplitude": [1, 2], "power": 2, "exponent": [-1, 3], "shift": 0.5}]}}),
        json!({"command": "moments", "payload": {"a": 0, "b": 1, "k": 2, "poly": [0, -6, 15, -10]}}),
        json!({"command": "logsubst", "payload": {"signal": {"modes": [{"amplitude": 1, "exponent": -1}]}, "n": 3}}),
        json!({"command": "equiv", "payload": {
            "f": {"terms": [{"num": [1], "den": [1, 1]}]},
            "g": {"terms": [{"num": [2, 1], "den": [2, 3, 1]}]}}}),
    ];
    for job in &jobs {
        let (a, b) = (run(job), run(job));
        assert_eq!(a.code, 0, "{job}");
        assert_eq!(a.stdout, b.stdout, "{job}");
    }
}

#[test]
fn equiv_reports_equality() {
    let out = run(&json!({"command": "equiv", "payload": {
        "f": {"terms": [{"num": [1], "den": [1, 1]}]},
        "g": {"terms": [{"num": [2, 1], "den": [2, 3, 1]}]}}}));
    assert_eq!(json_of(&out), json!({"equal": true}));
}

#[test]
fn lerch_sample_honours_tol_flag() {
    let job = json!({"command": "lerch-sample", "payload": {
        "f": {"modes": [{"amplitude": 1, "exponent": -1}]},
        "g": {"modes": [{"amplitude": 1.001, "exponent": -1}]}}});
    let strict = json_of(&run_with(&[], &job.to_string()));
    assert_eq!(strict["sampled_equal"], json!(false));
    assert_eq!(strict["threshold_n"], json!(1.0));
    let loose = json_of(&run_with(&["--tol", "1e-2"], &job.to_string()));
    assert_eq!(loose["sampled_equal"], json!(true));
    assert_eq!(loose["exact_equal"], json!(false));
}

#[test]
fn time_scale_rescales_coefficients() {
    let job = json!({"command": "ode2tf", "payload": {"alpha": [2, 3, 1], "beta": [1]}});
    let v = json_of(&run_with(&["--time-scale", "2"], &job.to_string()));
    assert_eq!(v["den"], json!([2.0, 1.5, 0.25]));
    assert!((v["abscissa"].as_f64().unwrap() + 2.0).abs() < 1e-12);
}

#[test]
fn files_are_read_and_written() {
    let dir = std::env::temp_dir().join(format!("lti-laplace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (input, output) = (dir.join("job.json"), dir.join("out.json"));
    std::fs::write(&input, r#"{"command":"ode2tf","payload":{"alpha":[2,3,1],"beta":[1]}}"#).unwrap();
    let r = run_with(&["--input", input.to_str().unwrap(), "--output", output.to_str().unwrap()], "");
    assert_eq!((r.code, r.stdout.as_str()), (0, ""));
    let written = std::fs::read_to_string(&output).unwrap();
    assert!(written.starts_with(r#"{"num":[1.0000000000000000e0],"den":"#));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn domain_errors_exit_with_1() {
    let cases = [
        (json!({"command": "logsubst", "payload": {"signal": {"modes": [{"amplitude": 1, "exponent": 2}]}, "n": 2}}), "outside_convergence"),
        (json!({"command": "invert", "payload": {"terms": [{"num": [0, 0, 1], "den": [1, 1]}]}}), "improper"),
        (json!({"command": "ode2tf", "payload": {"alpha": [1, 0], "beta": [1]}}), "order_violation"),
        (json!({"command": "crosstalk", "payload": {"aggressor": {"r1a": 0, "r2a": 1, "rth": 1, "c1a": 1, "c2a": 1, "c3a": 1}, "victim": ones()["victim"]}}), "nonpositive_component"),
        (json!({"command": "moments", "payload": {"a": 0, "b": 1, "k": 65, "poly": [1]}}), "degree_cap"),
    ];
    for (job, kind) in cases {
        let r = run(&job);
        assert_eq!(r.code, 1, "{job}");
        let v = json_of(&r);
        assert_eq!(v["error"]["kind"], json!(kind), "{job}");
        assert!(v["error"]["message"].is_string());
    }
}

#[test]
fn malformed_input_exits_with_2() {
    let cases = [
        ("{not json", "malformed_input", "job"),
        (r#"{"command":"frobnicate","payload":{}}"#, "unknown_command", "command"),
        (r#"{"command":"ode2tf","payload":{"alpha":[1,1]}}"#, "malformed_input", "payload"),
        (r#"{"command":"ode2tf","payload":{"alpha":[1,"x"],"beta":[1]}}"#, "malformed_input", "payload.alpha[1]"),
        (r#"{"command":"transform","payload":{"modes":[{"amplitude":[1,2,3]}]}}"#, "malformed_input", "payload.modes[0].amplitude"),
        (r#"{"command":"moments","payload":{"a":0,"b":1,"k":2}}"#, "malformed_input", "payload"),
    ];
    for (job, kind, path) in cases {
        let r = run_with(&[], job);
        assert_eq!(r.code, 2, "{job}");
        let v = json_of(&r);
        assert_eq!(v["error"]["kind"], json!(kind), "{job}");
        assert_eq!(v["error"]["path"], json!(path), "{job}");
    }
}

#[test]
fn bad_flags_exit_with_2() {
    let job = r#"{"command":"ode2tf","payload":{"alpha":[1,1],"beta":[1]}}"#;
    assert_eq!(run_with(&["--tol", "-1"], job).code, 2);
    assert_eq!(run_with(&["--time-scale", "0"], job).code, 2);
    assert_eq!(run_with(&["--bogus"], job).code, 2);
    assert_eq!(run_with(&["--input", "/nonexistent/job.json"], "").code, 2);
}
