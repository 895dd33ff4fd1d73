use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qfwitt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfwitt")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qfwitt-{}-{name}", std::process::id()))
}

#[test]
fn witt_index_report() {
    let out = qfwitt(&["witt", "Qp(3)", "<1,1,1,1>"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["answer"]["lo"], 2);
    assert_eq!(v["result"]["answer"]["hi"], 2);
    assert_eq!(v["result"]["answer"]["certificate"]["rule"], "springer");
}

#[test]
fn parse_and_field_errors_exit_4() {
    for args in [
        &["witt", "Qp(3)", "<1,,>"][..],
        &["witt", "Qp(2)", "<1>"],
        &["witt", "F(6)", "<1>"],
    ] {
        let out = qfwitt(args);
        assert_eq!(out.status.code(), Some(4), "{args:?}");
    }
    let v = json(&qfwitt(&["witt", "Qp(3)", "<1,,>"]));
    assert_eq!(v["error"]["code"], "ParseError");
    assert_eq!(qfwitt(&["witt"]).status.code(), Some(4));
    let out = qfwitt(&["witt", "Qp(3)", "<1, 0>"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["code"], "ZeroEntry");
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["--seed", "7", "selftest", "--cases", "30"][..],
        &["lgp", "counterexample", "--base", "F(3)", "--n", "1", "--verify"],
        &["m-table", "LS(F(3);t)", "--imax", "5", "--jmax", "2"],
    ] {
        let a = qfwitt(args);
        let b = qfwitt(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stdout));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let v = json(&qfwitt(&["--seed", "7", "selftest", "--cases", "30"]));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn counterexample_is_violated() {
    let out = qfwitt(&["lgp", "counterexample", "--base", "F(3)", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["anisotropy"]["anisotropic"], true);
    assert_eq!(v["result"]["verdict"]["status"], "violated");
    assert_eq!(v["result"]["claimed"]["r"], 2);
    let v = json(&qfwitt(&["lgp", "counterexample", "--base", "Qp(3)"]));
    assert_eq!(v["result"]["dim"], 16);
    let assumptions = v["result"]["assumptions"].as_array().unwrap();
    assert!(assumptions.iter().any(|a| a.as_str().unwrap().starts_with("u(kappa_pi) <= 2^3")));
}

#[test]
fn m_table_csv() {
    let out = qfwitt(&["--format", "csv", "m-table", "Qp(3)", "--imax", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let column: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(column, ["4", "3", "2", "1", "1"]);
}

#[test]
fn fact_store_round_trip() {
    let facts = temp("facts.json");
    let store = serde_json::json!({
        "field": "k",
        "places": "V",
        "facts": [{ "statement": { "kind": "lgp", "dim": null, "r": 1, "s": 1 } }],
    });
    std::fs::write(&facts, store.to_string()).unwrap();
    let up = json(&qfwitt(&["lgp", "derive", "--facts", facts.to_str().unwrap(), "--shift", "0:2"]));
    let st = &up["result"]["store"];
    assert_eq!(st["facts"][1]["statement"]["r"], 3);
    assert_eq!(st["facts"][1]["rule"], "increase-r-and-s");
    let shifted = temp("shifted.json");
    std::fs::write(&shifted, st.to_string()).unwrap();
    let down = json(&qfwitt(&["lgp", "derive", "--facts", shifted.to_str().unwrap(), "--shift", "1:-2"]));
    let facts_after = down["result"]["store"]["facts"].as_array().unwrap();
    assert_eq!(facts_after.len(), 2);
    for key in ["kind", "r", "s"] {
        assert_eq!(facts_after[0]["statement"][key], store["facts"][0]["statement"][key]);
    }
    let bad = qfwitt(&["lgp", "derive", "--facts", shifted.to_str().unwrap(), "--shift", "0:-1"]);
    assert_eq!(bad.status.code(), Some(1));
    std::fs::remove_file(facts).ok();
    std::fs::remove_file(shifted).ok();
}

#[test]
fn undecided_and_violation_codes() {
    // the l-invariant of F_3(x1, x2) is only bounded
    let out = qfwitt(&["lgp", "l-bounds", "--u", "8", "--known-ce", "2", "--isometry-lgp"]);
    assert_eq!(out.status.code(), Some(2));
    let facts = temp("bad.json");
    let store = serde_json::json!({
        "field": "k",
        "places": "V",
        "facts": [
            { "statement": { "kind": "lgp", "dim": 4, "r": 1, "s": 1 } },
            { "statement": { "kind": "counterexample", "dim": 4, "r": 1, "s": 1 } },
        ],
    });
    std::fs::write(&facts, store.to_string()).unwrap();
    let out = qfwitt(&["derive", "--facts", facts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_file(facts).ok();
}
