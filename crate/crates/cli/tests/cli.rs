use std::process::{Command, Output};

use serde_json::Value;

fn duality(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duality")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = duality(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn value(rows: &Value, backend: &str, input: &str, output: &[&str]) -> f64 {
    rows.as_array()
        .unwrap()
        .iter()
        .find(|r| {
            r["backend"] == backend
                && r["input"] == serde_json::json!([input])
                && r["output"] == serde_json::json!(output)
        })
        .unwrap_or_else(|| panic!("no row {backend} {input} {output:?}"))["value"]
        .as_f64()
        .unwrap()
}

/// Every number in the document is finite.
fn all_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        Value::Array(a) => a.iter().all(all_finite),
        Value::Object(o) => o.values().all(all_finite),
        _ => true,
    }
}

#[test]
fn run_a1_same_conditional_from_both_backends() {
    let r = json(&["run", "a1", "--alpha", "0.7"]);
    assert_eq!(r["experiment"], "a1");
    for backend in ["path", "state"] {
        assert!((value(&r["conditional"], backend, "C", &["A"]) - 0.5).abs() < 1e-12);
    }
    assert!(r["agreement"]["conditional_max_delta"].as_f64().unwrap() < 1e-12);
    assert!(r["meta"]["timing_ms"].is_null());
    assert!(all_finite(&r));
    for row in r["conditional"].as_array().unwrap() {
        let p = row["value"].as_f64().unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&p));
    }
}

#[test]
fn run_b1_at_zero() {
    let r = json(&["run", "b1", "--alpha", "0", "--beta", "0", "--backend", "path"]);
    let want = [(["A", "C"], 0.5), (["A", "D"], 0.0), (["B", "C"], 0.0), (["B", "D"], 0.5)];
    for (out, p) in want {
        assert!((value(&r["conditional"], "path", "Z", &out) - p).abs() < 1e-12, "{out:?}");
    }
}

#[test]
fn report_has_the_documented_keys() {
    let r = json(&["run", "a2", "--timing"]);
    for key in ["experiment", "mode", "joint", "conditional", "duality", "bell", "meta"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert!(r["meta"]["timing_ms"].as_f64().unwrap() >= 0.0);
    assert_eq!(r["meta"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn bad_flags_exit_with_usage_code() {
    for args in [
        &["run", "a1", "--alpha", "NaN"][..],
        &["run", "a1", "--alpha", "inf"],
        &["verify-channel", "--dims", "9"],
        &["verify-channel", "--trials", "0"],
        &["bell", "b1", "--resolution", "4"],
        &["bell", "a1"],
        &["run", "no-such-experiment"],
        &["frobnicate"],
    ] {
        let out = duality(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn invalid_file_exits_with_validation_code() {
    let dir = std::env::temp_dir().join(format!("duality-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("dangling.json");
    std::fs::write(
        &bad,
        r#"{"elements":[{"id":"S","kind":"source","ports":["o"]},{"id":"X","kind":"mirror","ports":["in","out"]}],
            "edges":[{"from":"S.o","to":"X.in"}],"inputs":["S"],"outputs":[]}"#,
    )
    .unwrap();
    let path = bad.to_str().unwrap();
    assert_eq!(duality(&["run", path]).status.code(), Some(3));
    let out = duality(&["validate", path]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["messages"].as_array().unwrap().iter().any(|m| m.as_str().unwrap().contains("X")));

    std::fs::write(&bad, "{\"elements\": 3}").unwrap();
    assert_eq!(duality(&["validate", path]).status.code(), Some(3));
    assert_eq!(duality(&["validate", "a1"]).status.code(), Some(0));
}

#[test]
fn verify_presets_match() {
    let r = json(&["verify", "a1a2", "--alpha", "1.1"]);
    assert_eq!(r["duality"]["report"]["matched"], true);
    assert_eq!(r["duality"]["constructed_isomorphic"], true);
    let r = json(&["verify", "b1b2", "--alpha", "0.3", "--beta", "2.0"]);
    assert_eq!(r["duality"]["report"]["matched"], true);
    assert_eq!(r["duality"]["pivot"], "Z");
    assert!(all_finite(&r));
}

#[test]
fn perturbed_file_pair_is_unmatched_but_runs() {
    let dir = std::env::temp_dir().join(format!("duality-pair-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = dir.join("a1.json");
    let second = dir.join("a2.json");
    std::fs::write(&first, duality_core::network::presets::doc("a1").unwrap().to_json()).unwrap();
    let mut doc = duality_core::network::presets::doc("a2").unwrap();
    doc.set_phase("E", 0.25);
    std::fs::write(&second, doc.to_json()).unwrap();
    let (f, s) = (first.to_str().unwrap(), second.to_str().unwrap());

    assert_eq!(duality(&["verify", f, f]).status.code(), Some(3), "a1 is not its own time reverse");
    let r = json(&["verify", f, s]);
    assert_eq!(r["duality"]["report"]["matched"], false);
    let max = r["duality"]["report"]["max_discrepancy"].as_f64().unwrap();
    assert!(max > 1e-12 && max <= 0.25 + 1e-12, "{max}");
    let csv = duality(&["verify", f, s, "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().lines().skip(1).any(|l| l.ends_with(",false")));
}

#[test]
fn verify_channel_is_reproducible() {
    let args = ["verify-channel", "--dims", "2", "--trials", "1", "--seed", "7"];
    let a = duality(&args);
    let b = duality(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["meta"]["seed"], 7);
    assert_eq!(r["channel"]["pass"], true);
    let other = duality(&["verify-channel", "--dims", "2", "--trials", "1", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn bell_b2_grid_is_b1_grid() {
    let b1 = json(&["bell", "b1", "--resolution", "16"]);
    let b2 = json(&["bell", "b2", "--resolution", "16"]);
    let g1 = b1["bell"]["grid"].as_array().unwrap();
    let g2 = b2["bell"]["grid"].as_array().unwrap();
    assert_eq!(g1.len(), 256);
    for (x, y) in g1.iter().zip(g2) {
        assert_eq!(x["alpha"], y["alpha"]);
        assert!((x["e"].as_f64().unwrap() - y["e"].as_f64().unwrap()).abs() < 1e-12);
    }
    let s = b1["bell"]["s_max"].as_f64().unwrap();
    assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    let csv = String::from_utf8(duality(&["bell", "b1", "--resolution", "8", "--format", "csv"]).stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("alpha,beta,e"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("duality-out-{}.json", std::process::id()));
    let out = duality(&["run", "a1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["experiment"], "a1");
}

#[test]
fn table_format_is_readable() {
    let text = String::from_utf8(duality(&["run", "a1", "--format", "table"]).stdout).unwrap();
    assert!(text.starts_with("experiment a1"));
    assert!(text.contains("agreement:"));
}
