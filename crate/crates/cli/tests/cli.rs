use std::process::{Command, Output};

use serde_json::Value;

// pi rounded to 50, 40 and 30 decimals
const PI_50: &str = "3.14159265358979323846264338327950288419716939937511";
const PI_40: &str = "3.1415926535897932384626433832795028841972";
const PI_30: &str = "3.141592653589793238462643383280";
const EQ_1_1: &str = "fact(2*n)*(130*n+109) / (poch(7/6,n)*poch(11/6,n)*(-1296)^n)";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betaseries")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("betaseries-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn derive_arcsine_seed() {
    let v = json(&run(&["derive", "--p", "1,1/3", "--a", "-1/2", "--b", "0", "--k", "1", "--s", "2"]));
    assert_eq!(v["z"], "-48");
    assert_eq!(v["qcoeffs"], serde_json::json!(["-48", "15", "-3"]));
}

#[test]
fn derive_param_gives_w_cubed() {
    let v = json(&run(&["derive", "--param", "--p", "w,-1,1", "--k", "3", "--s", "3"]));
    assert_eq!(v["z_text"], "w^3");
}

#[test]
fn eval_expression_gives_pi() {
    let v = json(&run(&["eval", "--expr", EQ_1_1, "--scale", "sqrt(3)/60", "--digits", "50"]));
    assert_eq!(v["value"], PI_50);
    assert!(v["terms"].as_u64().unwrap() <= 25);
}

#[test]
fn eval_and_rate_from_spec_file() {
    let spec = temp_file(
        "seed.json",
        r#"{"a":"-1/2","b":"0","k":1,"s":2,"seed_p_coeffs":["1","1/3"]}"#,
    );
    let v = json(&run(&["eval", "--spec", spec.to_str().unwrap(), "--scale", "3/sqrt(3)", "--digits", "40"]));
    assert_eq!(v["value"], PI_40);
    let r = json(&run(&["rate", "--spec", spec.to_str().unwrap()]));
    assert_eq!(r["predicted_rate"], 2.5105);
    assert!((r["measured_rate"].as_f64().unwrap() - 2.51).abs() < 0.05);
    std::fs::remove_file(spec).ok();
}

#[test]
fn integrate_beta_half_half() {
    let v = json(&run(&["integrate", "--a", "-1/2", "--b", "-1/2", "--digits", "30"]));
    assert_eq!(v["value"], PI_30);
}

#[test]
fn accelerate_doubles_rate() {
    let hyp = temp_file("hyp.json", r#"{"upper":["1","1/2"],"lower":["3/2","3/2"],"z":"1/4"}"#);
    let v = json(&run(&["accelerate", "--hyp", hyp.to_str().unwrap(), "--m", "2"]));
    assert_eq!(v["status"], "PASS");
    assert_eq!(v["predicted_grouped_rate"], 1.2041);
    std::fs::remove_file(hyp).ok();
}

#[test]
fn verify_single_and_filtered() {
    let v = json(&run(&["verify", "--id", "eq-3.7", "--digits", "30"]));
    assert_eq!(v["status"], "PASS");
    let v = json(&run(&["verify", "--all", "--only", "eq-5.*", "--digits", "20"]));
    let ids: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert!(!ids.is_empty() && ids.iter().all(|id| id.starts_with("eq-5.")));
}

#[test]
fn verify_all_exits_zero() {
    let v = json(&run(&["verify", "--all", "--digits", "30"]));
    assert_eq!(v["failed"], 0);
    assert_eq!(v["passed"].as_u64(), Some(v["records"].as_array().unwrap().len() as u64));
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        &["verify", "--all", "--only", "eq-2.*", "--digits", "25"][..],
        &["eval", "--expr", EQ_1_1, "--digits", "60"],
        &["list"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let cases: [&[&str]; 6] = [
        &["eval", "--expr", "fact(2*n", "--digits", "10"],
        &["eval", "--expr", "m+1", "--digits", "10"],
        &["derive", "--p", "1,x", "--a", "0", "--b", "0", "--k", "1", "--s", "1"],
        &["verify", "--id", "eq-9.9"],
        &["verify"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let out = run(&["eval", "--expr", "fact(2*n", "--digits", "10"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("column") && err.contains("summand grammar"), "{err}");
}

#[test]
fn divergent_series_exits_one() {
    let out = run(&["eval", "--expr", "2^n", "--digits", "10"]);
    assert_eq!(out.status.code(), Some(1));
}
