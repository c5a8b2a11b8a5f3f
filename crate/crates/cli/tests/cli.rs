//! End-to-end runs of the binary on the sample inputs in `data/`.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_realop"))
        .args(args)
        .arg("--json")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (v, out.status.code().unwrap())
}

fn measured(report: &Value, name: &str) -> Value {
    report["measurements"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["name"] == name)
        .unwrap_or_else(|| panic!("no measurement {name} in {report}"))["value"]
        .clone()
}

fn num(report: &Value, name: &str) -> f64 {
    measured(report, name).as_f64().unwrap()
}

#[test]
fn norm_of_block_diagonal_element() {
    // ‖diag(1,-1) ⊕ [[0,1],[1,0]]‖ = max of two unitaries = 1
    let (r, code) = run(&[
        "norm",
        "--space",
        &data("m2.json"),
        "--elem",
        &data("x-level2.json"),
    ]);
    assert_eq!(code, 0);
    assert!((num(&r, "level_norm") - 1.0).abs() <= 1e-12);
    assert_eq!(r["header"]["parameters"]["level"], 2);
}

#[test]
fn inline_documents_work() {
    let space =
        r#"{"ambient":{"rows":1,"cols":1},"basis":[{"rows":1,"cols":1,"entries":[[2.0]]}]}"#;
    let (r, code) = run(&[
        "norm",
        "--space",
        space,
        "--elem",
        r#"{"level":1,"coeffs":[[[1.0]]]}"#,
    ]);
    assert_eq!(code, 0);
    assert_eq!(num(&r, "level_norm"), 2.0);
}

#[test]
fn complexify_with_element() {
    let x = r#"{"level":1,"coeffs":[[[1,0,0,0]]]}"#;
    let y = r#"{"level":1,"coeffs":[[[0,1,0,0]]]}"#;
    let (r, code) = run(&[
        "complexify",
        "--space",
        &data("m2.json"),
        "--x",
        x,
        "--y",
        y,
    ]);
    assert_eq!(code, 0);
    // the complex row (1, i) has norm sqrt(2)
    assert!((num(&r, "complex_norm") - 2f64.sqrt()).abs() <= 1e-12);
    assert_eq!(r["details"]["space"]["basis"].as_array().unwrap().len(), 8);
    assert_eq!(r["details"]["space"]["complexified"], true);
}

#[test]
fn banach_space_commands() {
    let (r, code) = run(&[
        "w2-norm",
        "--banach",
        &data("l1_2.json"),
        "--x",
        "[1,0]",
        "--y",
        "[0,1]",
    ]);
    assert_eq!(code, 0);
    assert!((num(&r, "w2_norm") - 2f64.sqrt()).abs() <= 1e-12);

    let (r, code) = run(&[
        "quantize-min",
        "--banach",
        &data("l1_2.json"),
        "--elem",
        r#"{"level":1,"coeffs":[[[3,-4]]]}"#,
    ]);
    assert_eq!(code, 0);
    assert!((num(&r, "min_level_norm") - 7.0).abs() <= 1e-12);

    let (r, code) = run(&[
        "max-l1",
        "--coeffs",
        &data("l12-pair.json"),
        "--mmax",
        "2",
        "--restarts",
        "8",
    ]);
    assert_eq!(code, 0);
    assert!(num(&r, "lower") >= 2.0 - 1e-6);
    assert!((num(&r, "upper") - 2.0).abs() <= 1e-12);
}

#[test]
fn certification_exit_codes() {
    let m2 = data("m2.json");
    let small = ["--max-level", "2", "--samples", "40", "--restarts", "2"];
    let (r, code) = run(&[
        &[
            "certify-mproj",
            "--space",
            &m2,
            "--proj",
            &data("corner.json"),
        ][..],
        &small,
    ]
    .concat());
    assert_eq!(code, 0, "{r}");
    let (r, code) = run(&[
        &[
            "certify-mproj",
            "--space",
            &m2,
            "--proj",
            &data("symmetrization.json"),
        ][..],
        &small,
    ]
    .concat());
    assert_eq!(code, 1);
    assert_eq!(r["details"]["verdict"], "refuted");
    assert!((num(&r, "witness_ratio") - 0.5f64.sqrt()).abs() <= 1e-9);
    let (r, code) = run(&[
        "certify-mproj",
        "--space",
        &m2,
        "--proj",
        &data("not-idempotent.json"),
    ]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("idempotent"));
}

#[test]
fn multipliers_and_ideals() {
    let m2 = data("m2.json");
    let (_, code) = run(&[
        "multiplier-witness",
        "--space",
        &m2,
        "--map",
        &data("corner.json"),
        "--a",
        &data("corner-multiplier.json"),
    ]);
    assert_eq!(code, 0);
    let (r, code) = run(&[
        "multiplier-witness",
        "--space",
        &m2,
        "--map",
        &data("corner.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        r["details"]["a"]["entries"][0][0].as_f64().unwrap().round(),
        1.0
    );
    let (_, code) = run(&[
        "multiplier-witness",
        "--space",
        &m2,
        "--map",
        &data("symmetrization.json"),
    ]);
    assert_eq!(code, 1);

    let (_, code) = run(&[
        "right-ideal",
        "--algebra",
        &m2,
        "--subspace",
        &data("first-row.json"),
    ]);
    assert_eq!(code, 0);
    let (_, code) = run(&[
        "right-ideal",
        "--algebra",
        &m2,
        "--subspace",
        "[[1,0,0,0],[0,0,1,0]]",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn algebra_commands() {
    let (_, code) = run(&["brs-check", "--algebra", &data("upper.json")]);
    assert_eq!(code, 0);
    let (r, code) = run(&[
        "brs-check",
        "--algebra",
        &data("scalar-algebra.json"),
        "--max-level",
        "1",
    ]);
    assert_eq!(code, 1);
    assert!(num(&r, "violation_level_1") >= 0.25 - 1e-12);

    let (r, code) = run(&["unitize", "--algebra", &data("upper.json")]);
    assert_eq!(code, 0, "{r}");
    // the upper triangular algebra already contains the identity
    assert_eq!(num(&r, "dimension"), 3.0);

    let (r, code) = run(&[
        "choi-effros",
        "--algebra",
        &data("m2.json"),
        "--idempotent",
        &data("diagonal.json"),
        "--samples",
        "50",
    ]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(measured(&r, "mode"), "selfadjoint");
    let (_, code) = run(&[
        "choi-effros",
        "--algebra",
        &data("m2.json"),
        "--idempotent",
        &data("not-idempotent.json"),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn paulsen_command() {
    let (r, code) = run(&[
        "paulsen",
        "--space",
        &data("upper.json"),
        "--map",
        r#"{"matrix":[[1,0,0],[0,1,0],[0,0,1]]}"#,
        "--samples",
        "20",
    ]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(num(&r, "dimension"), 8.0);
}

#[test]
fn tro_commands() {
    let z = data("symmetric-span.json");
    let (r, code) = run(&["tro-check", "--space", &z]);
    assert_eq!(code, 1);
    assert_eq!(
        r["details"]["witness"]["entries"],
        serde_json::json!([[0.0, 0.0], [0.0, 1.0]])
    );
    let (r, code) = run(&["subtriple", "--space", &z]);
    assert_eq!(code, 0);
    assert_eq!(num(&r, "dimension"), 4.0);
    let (r, code) = run(&[
        "shilov",
        "--space",
        &data("m2.json"),
        "--y",
        "[1,2,0,1]",
        "--z",
        "[1,2,0,1]",
    ]);
    assert_eq!(code, 0);
    assert!(num(&r, "min_eigenvalue") >= -1e-12);
    let (_, code) = run(&["shilov", "--space", &z, "--y", "[1,0]", "--z", "[0,1]"]);
    assert_eq!(code, 2);
}

#[test]
fn quotient_command() {
    // e11 modulo span{e12, e21, e22}: the (1,1) entry cannot be reduced
    let (r, code) = run(&[
        "quotient-norm",
        "--space",
        &data("m2.json"),
        "--subspace",
        "[[0,1,0,0],[0,0,1,0],[0,0,0,1]]",
        "--elem",
        r#"{"level":1,"coeffs":[[[1,0,0,0]]]}"#,
    ]);
    assert_eq!(code, 0, "{r}");
    assert!((num(&r, "quotient_norm") - 1.0).abs() <= 1e-6);
}

#[test]
fn invalid_input_reports_field_and_exits_two() {
    let (r, code) = run(&[
        "norm",
        "--space",
        r#"{"ambient":{"rows":1,"cols":1},"basis":[{"rows":1,"cols":1,"entries":[["a"]]}]}"#,
        "--elem",
        "[]",
    ]);
    assert_eq!(code, 2);
    let msg = r["error"].as_str().unwrap();
    assert!(msg.contains("basis[0].entries[0][0]"), "{msg}");
    let (_, code) = run(&["norm", "--space", "/nonexistent/space.json", "--elem", "[]"]);
    assert_eq!(code, 2);
}

#[test]
fn text_mode_lists_parameters() {
    let out = Command::new(env!("CARGO_BIN_EXE_realop"))
        .args(["--seed", "7", "reproduce", "l12-nonunique"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed=0x7"));
    assert!(text.contains("[PASS] min_norm"));
    assert!(text.contains("is not unique"));
    assert_eq!(out.status.code(), Some(0));
}
