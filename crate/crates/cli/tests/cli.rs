//! End-to-end tests of the `mgn` binary: output contracts, JSON round-trips,
//! and the exit-code contract (0 ok, 1 check failed, 2 bad input).

use std::process::{Command, Output};

use mgn_core::rational::format_rat;
use mgn_core::wp::wp_volume;
use mgn_core::Evaluator;

fn mgn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgn")).args(args).output().expect("binary runs")
}

fn mgn_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgn"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn number_prints_plain_rationals() {
    let out = mgn(&["number", "--genus", "0", "--tau", "0:3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1");

    let out = mgn(&["number", "--genus", "1", "--tau", "0:2", "--kappa", "1:2"]);
    assert_eq!(stdout(&out).trim(), "1/8");

    // Dimension mismatch is a legitimate zero, not an error.
    let out = mgn(&["number", "--genus", "1", "--tau", "0:1,1:1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0");

    let out = mgn(&["number", "--genus", "1", "--tau", "0:1", "--lambda", "1"]);
    assert_eq!(stdout(&out).trim(), "1/24");
}

#[test]
fn number_json_shape() {
    let out = mgn(&["number", "--genus", "1", "--tau", "0:2", "--kappa", "1:2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["genus"], 1);
    assert_eq!(v["m"]["0"], 2);
    assert_eq!(v["p"]["1"], 2);
    assert_eq!(v["value"], "1/8");
}

#[test]
fn number_rejects_bad_input_with_code_2() {
    // Unstable configuration.
    let out = mgn(&["number", "--genus", "0", "--tau", "0:2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());

    // Malformed spec.
    let out = mgn(&["number", "--genus", "0", "--tau", "abc"]);
    assert_eq!(out.status.code(), Some(2));

    // kappa_0 is not an insertion.
    let out = mgn(&["number", "--genus", "0", "--tau", "0:4", "--kappa", "0:1"]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown flag: clap's own usage error.
    let out = mgn(&["number", "--genus", "0", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    // lambda with psi insertions beyond tau_0.
    let out = mgn(&["number", "--genus", "1", "--tau", "1:1", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn routes_agree_from_the_command_line() {
    for route in ["recursion", "puncture-dilaton", "closed-form"] {
        let out = mgn(&["number", "--genus", "1", "--tau", "0:1,1:1,2:1", "--route", route]);
        assert!(out.status.success(), "route {route} failed");
        assert_eq!(stdout(&out).trim(), "1/12", "route {route} disagrees");
    }
    // The closed form only covers pure-psi brackets.
    let out = mgn(&["number", "--genus", "0", "--tau", "0:4", "--kappa", "1:1", "--route", "closed-form"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_lists_the_cubic_term() {
    let out = mgn(&["table", "--genus", "0", "--t-max", "0", "--s-max", "0", "--degree", "3"]);
    let text = stdout(&out);
    assert!(text.contains("1/6"), "missing coefficient in {text}");
    assert!(text.contains("t0^3"), "missing monomial in {text}");

    let out = mgn(&["table", "--genus", "1", "--t-max", "1", "--s-max", "1", "--degree", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let terms = v["series"]["terms"].as_array().unwrap();
    assert!(terms
        .iter()
        .any(|t| t["coeff"] == "1/24" && t["exponents"] == serde_json::json!([0, 1, 0])));
}

#[test]
fn verify_suites_pass_and_exit_zero() {
    let cases: &[&[&str]] = &[
        &["verify", "routes", "--n-max", "4", "--dim-max", "4"],
        &["verify", "charge", "--t-max", "2", "--s-max", "2", "--degree", "4"],
        &["verify", "genus1-log", "--t-max", "2", "--s-max", "2", "--degree", "4"],
        &["verify", "annihilators", "--t-max", "2", "--s-max", "2", "--degree", "4", "--genus", "1"],
        &["verify", "getzler", "--s", "1=1", "--u", "2", "--order", "8"],
    ];
    for args in cases {
        let out = mgn(args);
        assert!(out.status.success(), "{args:?} exited {:?}: {}", out.status.code(), stderr(&out));
        assert!(stdout(&out).contains("ok"), "{args:?} printed {}", stdout(&out));
    }

    let out = mgn(&["verify", "routes", "--n-max", "4", "--dim-max", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["reports"][0]["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn wp_json_round_trips_exactly() {
    let out = mgn(&["wp", "--genus", "1", "--n-max", "8", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["genus"], 1);
    let ev = Evaluator::new();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let n = row["n"].as_u64().unwrap();
        let recomputed = format_rat(&wp_volume(&ev, 1, n).unwrap());
        assert_eq!(row["w"].as_str().unwrap(), recomputed, "row n = {n}");
    }
}

#[test]
fn wp_asymptotic_table_reports_constants_and_sane_ratios() {
    let out = mgn(&["wp", "--genus", "1", "--n-max", "30", "--asymptotic", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["gamma0"].as_f64().unwrap() - 2.40482555777).abs() < 1e-9);
    assert!((v["C"].as_f64().unwrap() - 2.496918339).abs() < 1e-8);
    let last = v["rows"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["n"], 30);
    let ratio = last["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.1, "ratio at n = 30 is {ratio}");
}

#[test]
fn cohft_reports_potentials_and_constraint() {
    let out = mgn(&["cohft", "--s", "1=1/2", "--u", "1/3", "--order", "6", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["getzler_ok"], true);
    assert_eq!(v["s"]["1"], "1/2");
    let terms = v["phi0"]["terms"].as_array().unwrap();
    assert!(terms.iter().any(|t| t["coeff"] == "1/6" && t["exponents"] == serde_json::json!([3])));

    let out = mgn(&["cohft", "--order", "4"]);
    assert_eq!(out.status.code(), Some(2), "order below 5 must be rejected");
}

#[test]
fn cache_ceiling_variable_is_honored() {
    let out = mgn_env(
        &["number", "--genus", "0", "--tau", "0:6", "--kappa", "1:3"],
        "MGN_CACHE_CEILING",
        "2",
    );
    assert!(!out.status.success());
    assert!(stderr(&out).contains("cache ceiling"), "stderr: {}", stderr(&out));

    let out = mgn_env(
        &["number", "--genus", "0", "--tau", "0:6", "--kappa", "1:3"],
        "MGN_CACHE_CEILING",
        "not-a-number",
    );
    assert_eq!(out.status.code(), Some(2));

    let out = mgn_env(
        &["number", "--genus", "0", "--tau", "0:6", "--kappa", "1:3"],
        "MGN_CACHE_CEILING",
        "100000",
    );
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "61");
}
