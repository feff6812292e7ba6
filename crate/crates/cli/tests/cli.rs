use std::path::PathBuf;

use albker_cli::run;
use serde_json::Value;

fn jobs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../jobs")
}

fn call(args: &[&str], stdin: &str) -> (i32, String) {
    let mut argv = vec!["albker".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let out = run(&argv, &mut stdin.as_bytes());
    (out.code, out.stdout)
}

fn job(name: &str) -> String {
    jobs().join(name).to_string_lossy().into_owned()
}

fn parse(s: &str) -> Value {
    serde_json::from_str(s).expect("output is JSON")
}

#[test]
fn malformed_json_reports_a_position() {
    let (code, out) = call(&["analyze"], "{\"schema\": \"1\",\n  \"field\": {\"p\": 2,, }}");
    assert_eq!(code, 1);
    let v = parse(&out);
    assert_eq!(v["error"]["kind"], "MalformedJson");
    assert_eq!(v["error"]["line"], 2);
    assert!(v["error"]["column"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_keys_and_commands_are_input_errors() {
    let (code, out) = call(&["analyze"], r#"{"schema":"1","field":{"p":2,"precision":30},"colour":"red"}"#);
    assert_eq!(code, 1);
    assert_eq!(parse(&out)["error"]["kind"], "MalformedJson");
    let (code, out) = call(&["integrate"], r#"{"schema":"1","field":{"p":2,"precision":30}}"#);
    assert_eq!(code, 1);
    assert_eq!(parse(&out)["error"]["kind"], "Usage");
    let (code, out) = call(&["--bogus"], "");
    assert_eq!(code, 1);
    assert_eq!(parse(&out)["error"]["kind"], "Usage");
}

#[test]
fn a_single_curve_is_not_a_product() {
    let spec = r#"{"schema":"1","field":{"p":2,"precision":30},"curves":[{"label":"E","a1":"1","a4":"1"}]}"#;
    let (code, out) = call(&["analyze"], spec);
    assert_eq!(code, 1);
    assert_eq!(parse(&out)["error"]["path"], "curves");
}

#[test]
fn minus_one_minus_one_over_q2() {
    let (code, out) = call(&["symbol", "--input", &job("symbol_q2.json")], "");
    assert_eq!(code, 0, "{out}");
    let v = parse(&out);
    let first = &v["result"]["pairs"][0];
    assert_eq!(first["x"], "-1");
    assert_eq!(first["vanishes"], false);
    assert_eq!(first["y_is_norm_from_x"], false);
    assert!(v["result"]["pairs"].as_array().unwrap()[1..].iter().all(|p| p["vanishes"] == true));
}

#[test]
fn self_product_verdict() {
    let (code, out) = call(&["run", "--input", &job("self_product_q2.json")], "");
    assert_eq!(code, 0, "{out}");
    let v = parse(&out);
    let report = &v["result"]["pairs"][0]["report"];
    assert_eq!(report["verdict"]["kind"], "divisible_plus_finite");
    assert_eq!(report["verdict"]["n"], 1);
    assert!(report["theorem_trace"].as_array().unwrap().iter().any(|t| t["result"] == "structure1"));
}

#[test]
fn output_is_deterministic_and_replays_from_the_embedded_spec() {
    let path = job("unramified_torsion_q2.json");
    let (c1, a) = call(&["run", "--input", &path], "");
    let (c2, b) = call(&["run", "--input", &path], "");
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let embedded = serde_json::to_string(&parse(&a)["spec"]).unwrap();
    let (c3, c) = call(&["run"], &embedded);
    assert_eq!(c3, 0);
    assert_eq!(a, c);
}

#[test]
fn command_line_overrides_are_recorded() {
    let path = job("self_product_q2.json");
    let (code, out) = call(&["analyze", "--input", &path, "--precision", "50", "--caps", r#"{"n_cap":2}"#, "--seed", "7"], "");
    assert_eq!(code, 0, "{out}");
    let v = parse(&out);
    assert_eq!(v["spec"]["field"]["precision"], 50);
    assert_eq!(v["spec"]["caps"]["n_cap"], 2);
    assert_eq!(v["spec"]["caps"]["tower_cap"], 6);
    assert_eq!(v["spec"]["seed"], 7);
    let (code, _) = call(&["analyze", "--input", &path, "--caps", r#"{"depth":2}"#], "");
    assert_eq!(code, 1);
}

#[test]
fn conflicting_command_is_rejected() {
    let (code, out) = call(&["symbol", "--input", &job("self_product_q2.json")], "");
    assert_eq!(code, 1);
    assert_eq!(parse(&out)["error"]["kind"], "Usage");
}

#[test]
fn computation_errors_are_reported_per_item() {
    // additive reduction at 2
    let spec = r#"{"schema":"1","field":{"p":2,"precision":30},
        "curves":[{"label":"A","a6":"2"},{"label":"E","a1":"1","a4":"1"}]}"#;
    let (code, out) = call(&["analyze"], spec);
    assert_eq!(code, 2, "{out}");
    let v = parse(&out);
    let errors = v["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e["path"] == "curves.A"));
    assert!(v["result"]["pairs"][0]["error"].is_object());
}

#[test]
fn seed_does_not_change_verdicts() {
    let path = job("three_curves_q2.json");
    let verdicts = |seed: &str| {
        let (_, out) = call(&["run", "--input", &path, "--seed", seed], "");
        let v = parse(&out);
        v["result"]["pairs"].as_array().unwrap().iter().map(|p| p["report"]["verdict"].clone()).collect::<Vec<_>>()
    };
    assert_eq!(verdicts("1"), verdicts("99"));
}

#[test]
fn every_shipped_job_runs() {
    let mut names: Vec<_> = std::fs::read_dir(jobs()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for path in names {
        let (code, out) = call(&["run", "--input", path.to_str().unwrap()], "");
        assert_eq!(code, 0, "{}: {out}", path.display());
        let v = parse(&out);
        assert_eq!(v["schema"], "1");
        assert!(v["errors"].as_array().unwrap().is_empty());
    }
}
