//! Runs `polyot verify` once and prints one line per acceptance criterion.

use std::fs;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn check<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check_id"] == id)
        .unwrap_or_else(|| panic!("no record {id}"))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// The suite's thresholds, pinned here independently of the binary.
fn pinned(k: usize) -> Value {
    let m = 8;
    match k {
        1 => json!({"gradient_rel_error": 1e-5, "residual": 1e-7, "seconds_per_instance": 120}),
        2 => json!({"assignment": 1e-6, "flow": 1e-9}),
        3 => json!({"sigma1": m, "sigma2pp": m * (m - 1) * (m - 2) / 6, "turning": "strictly decreasing"}),
        4 => json!(1e-9),
        5 => json!({"min": "> 0", "ratio": 0.5}),
        6 => json!(0),
        7 => json!({
            "fb_normal_error": "strictly decreasing",
            "interior_ball_tol": "2 x spacing",
            "interior_ball_violations": 0,
            "multiplicity": 1
        }),
        8 => json!({"density_min": 0.05, "density_spread": 0.2, "growth_exponent": [0.4, 0.6]}),
        9 => json!({"involution": 1e-9, "ma_rel_error": 1e-6, "violations": 0}),
        10 => json!({"identical_reruns": true, "seconds": 1800}),
        _ => unreachable!(),
    }
}

fn summary(k: usize, c: &Value) -> String {
    let m = &c["measured"];
    match k {
        1 => format!(
            "max residual {:.2e}, gradient rel error {:.2e}",
            f(&m["max_residual"]),
            f(&m["gradient_rel_error"])
        ),
        3 => format!("turning {} sigma1 {} sigma2pp {}", m["max_turning_angle"], m["sigma1_clusters"], m["sigma2pp_clusters"]),
        9 => format!(
            "involution {:.2e}, ma rel error {:.2e}, violations {}",
            f(&m["involution_error"]),
            f(&m["ma_rel_error"]),
            m["monotonicity_violations"]
        ),
        _ => m.to_string().chars().take(160).collect(),
    }
}

#[test]
fn acceptance() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_polyot"))
        .args(["verify", "--seed", "1", "--out"])
        .arg(dir.path())
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exited");
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();

    let mut failed = Vec::new();
    for k in 1..=10 {
        let id = format!("C{k}");
        let c = check(&report, &id);
        assert_eq!(c["threshold"], pinned(k), "{id} threshold drifted");
        let pass = c["status"] == "pass";
        println!("criterion {k:>2}: {} ({})", if pass { "pass" } else { "FAIL" }, summary(k, c));
        if !pass {
            failed.push(id);
        }
    }
    assert_eq!(code == 0, failed.is_empty(), "exit code {code}");
    assert!(failed.is_empty(), "failed: {failed:?}");
}
