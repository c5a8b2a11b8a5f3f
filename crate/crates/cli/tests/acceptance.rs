//! Acceptance harness. Runs the release criteria against the `realop` binary,
//! prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//! Expected values are fixed here, independently of the binary's own verdicts.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

const SQRT2: f64 = std::f64::consts::SQRT_2;

struct Run {
    json: Value,
    raw: String,
    code: i32,
    elapsed: Duration,
}

fn realop(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_realop"))
        .args(args)
        .args(["--json", "--threads", "1"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let raw = String::from_utf8(out.stdout).expect("utf-8 output");
    let json = serde_json::from_str(&raw).unwrap_or(Value::Null);
    Run {
        json,
        raw,
        code: out.status.code().unwrap_or(-1),
        elapsed,
    }
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn find<'a>(r: &'a Value, name: &str) -> Option<&'a Value> {
    r["measurements"]
        .as_array()?
        .iter()
        .find(|m| m["name"] == name)
}

fn value(r: &Value, name: &str) -> f64 {
    find(r, name)
        .and_then(|m| m["value"].as_f64())
        .unwrap_or(f64::NAN)
}

fn param(r: &Value, name: &str, key: &str) -> Value {
    find(r, name).map_or(Value::Null, |m| m["params"][key].clone())
}

/// Collects failed conditions for one criterion.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.notes.push(format!("{label}={got:.12}"));
        self.expect(
            (got - want).abs() <= tol,
            format!("{label}: {got} not within {tol:e} of {want}"),
        );
    }

    fn at_most(&mut self, label: &str, got: f64, bound: f64) {
        self.notes.push(format!("{label}={got:.3e}"));
        self.expect(got <= bound, format!("{label}: {got} > {bound}"));
    }

    fn at_least(&mut self, label: &str, got: f64, bound: f64) {
        self.notes.push(format!("{label}={got:.12}"));
        self.expect(got >= bound, format!("{label}: {got} < {bound}"));
    }
}

fn criterion_1() -> Check {
    let mut c = Check::default();
    let r = realop(&["reproduce", "l12-nonunique"]);
    c.expect(r.code == 0, format!("exit code {}", r.code));
    c.near("min", value(&r.json, "min_norm"), SQRT2, 1e-9);
    c.at_least("max_lower", value(&r.json, "max_lower"), 2.0 - 1e-6);
    c.near("max_upper", value(&r.json, "max_upper"), 2.0, 1e-12);
    c.at_least("gap", value(&r.json, "gap"), 0.58);
    c.notes.push(format!("{:.2}s", r.elapsed.as_secs_f64()));
    c.expect(r.elapsed < Duration::from_secs(10), "runtime >= 10 s");
    c
}

fn criterion_2() -> Check {
    let mut c = Check::default();
    let r = realop(&["reproduce", "complex-dual"]);
    c.expect(r.code == 0, format!("exit code {}", r.code));
    c.near("norm", value(&r.json, "complex_norm"), SQRT2, 1e-9);
    c.near("theta", value(&r.json, "dual_norm_lower"), 1.0, 1e-6);
    c.at_most(
        "max_restart",
        value(&r.json, "max_restart_value"),
        1.0 + 1e-6,
    );
    c.expect(
        param(&r.json, "dual_norm_lower", "restarts") == 64,
        "restarts != 64",
    );
    c.expect(
        param(&r.json, "dual_norm_lower", "m_max") == 4,
        "m_max != 4",
    );
    c.expect(
        value(&r.json, "restarts_per_m") == 64.0,
        "not all restarts ran",
    );
    c
}

fn criterion_3(all: &Value) -> Check {
    let mut c = Check::default();
    c.at_most(
        "conjugation",
        value(all, "opspace/conjugation_isometry"),
        1e-10,
    );
    c.at_most(
        "real_embedding",
        value(all, "opspace/real_part_embedding"),
        1e-12,
    );
    c.expect(
        param(all, "opspace/conjugation_isometry", "pairs") == 1000,
        "pairs != 1000",
    );
    c.expect(
        param(all, "opspace/conjugation_isometry", "spaces") == 5,
        "spaces != 5",
    );
    c
}

fn criterion_4(all: &Value) -> Check {
    let mut c = Check::default();
    for s in ["m2", "m2_complexified", "min_linf2"] {
        for axiom in ["direct_sum", "bimodule"] {
            let name = format!("opspace/ruan_{axiom}_{s}");
            c.at_most(&format!("{axiom}_{s}"), value(all, &name), 1e-10);
            c.expect(
                param(all, &name, "samples") == 100,
                format!("{name}: samples != 100"),
            );
        }
    }
    c.notes.truncate(2);
    c
}

fn criterion_5() -> Check {
    let mut c = Check::default();
    let args = ["--max-level", "3", "--samples", "200", "--tol", "1e-9"];
    let corner = realop(
        &[
            &[
                "certify-mproj",
                "--space",
                &data("m2.json"),
                "--proj",
                &data("corner.json"),
            ][..],
            &args,
        ]
        .concat(),
    );
    c.expect(
        corner.code == 0,
        format!("corner projection exit {}", corner.code),
    );
    c.expect(
        corner.json["details"]["verdict"] == "certified-at-levels",
        "corner projection not certified",
    );
    c.expect(
        corner.json["details"]["levels"] == 3,
        "corner projection not certified through level 3",
    );
    let sym = realop(
        &[
            &[
                "certify-mproj",
                "--space",
                &data("m2.json"),
                "--proj",
                &data("symmetrization.json"),
            ][..],
            &args,
        ]
        .concat(),
    );
    c.expect(sym.code == 1, format!("symmetrization exit {}", sym.code));
    c.expect(
        sym.json["details"]["verdict"] == "refuted",
        "symmetrization not refuted",
    );
    c.expect(
        sym.json["details"]["level"] == 1,
        "refutation not at level 1",
    );
    c.near(
        "witness",
        value(&sym.json, "witness_ratio"),
        0.5f64.sqrt(),
        1e-9,
    );
    c
}

fn criterion_6() -> Check {
    let mut c = Check::default();
    let r = realop(&[
        "choi-effros",
        "--algebra",
        &data("m2.json"),
        "--idempotent",
        &data("diagonal.json"),
        "--samples",
        "500",
    ]);
    c.expect(r.code == 0, format!("exit code {}", r.code));
    for name in [
        "associativity",
        "c_star_identity",
        "left_bimodule",
        "right_bimodule",
    ] {
        c.at_most(name, value(&r.json, name), 1e-10);
    }
    c.expect(
        param(&r.json, "associativity", "samples") == 500,
        "trials != 500",
    );
    c
}

fn criterion_7(all: &Value) -> Check {
    let mut c = Check::default();
    let name = "linalg/contraction_positivity_agreement";
    c.near("agreement", value(all, name), 1.0, 0.0);
    c.expect(param(all, name, "samples") == 500, "samples != 500");
    c.expect(
        param(all, name, "tol").as_f64() == Some(1e-9),
        "tol != 1e-9",
    );
    c
}

fn criterion_8(all: &Value) -> Check {
    let mut c = Check::default();
    c.at_most(
        "shuffle_basis",
        value(all, "mideal/shuffle_basis_m2"),
        1e-12,
    );
    c.at_most(
        "shuffle_norms",
        value(all, "mideal/shuffle_norms_m2"),
        1e-12,
    );
    c.expect(
        param(all, "mideal/shuffle_norms_m2", "samples") == 50,
        "shuffle samples != 50",
    );
    c.at_most(
        "map_consistency",
        value(all, "mideal/map_complexification_consistency"),
        1e-12,
    );
    c.expect(
        param(all, "mideal/map_complexification_consistency", "maps") == 20,
        "maps != 20",
    );
    for e in ["real", "linf2", "l1_2"] {
        let name = format!("quantization/min_complexification_{e}");
        c.at_most(&format!("min_c_{e}"), value(all, &name), 1e-10);
        c.expect(
            param(all, &name, "levels") == serde_json::json!([1, 2, 3]),
            format!("{name}: levels"),
        );
    }
    c
}

fn criterion_9(all: &Value) -> Check {
    let mut c = Check::default();
    c.at_most(
        "quotient_gap",
        value(all, "opspace/quotient_complexification"),
        1e-6,
    );
    c.expect(
        param(all, "opspace/quotient_complexification", "cases") == 50,
        "cases != 50",
    );
    c.at_most("direct_sum", value(all, "opspace/direct_sum_max"), 1e-12);
    c
}

fn criterion_10(all: &Value) -> Check {
    let mut c = Check::default();
    let z = data("symmetric-span.json");
    let tro = realop(&["tro-check", "--space", &z]);
    c.expect(tro.code == 1, "span{e11, e12+e21} accepted as a TRO");
    let e22 = serde_json::json!([[0.0, 0.0], [0.0, 1.0]]);
    c.expect(
        tro.json["details"]["witness"]["entries"] == e22,
        "witness is not e22",
    );
    let sub = realop(&["subtriple", "--space", &z]);
    c.near("subtriple_dim", value(&sub.json, "dimension"), 4.0, 0.0);
    c.at_least(
        "shilov_min_eig",
        value(all, "systems/shilov_min_eigenvalue"),
        -1e-12,
    );
    c.expect(
        param(all, "systems/shilov_min_eigenvalue", "samples") == 100,
        "shilov samples != 100",
    );
    c
}

fn criterion_11() -> Check {
    let mut c = Check::default();
    for a in ["m2.json", "upper.json"] {
        let r = realop(&["brs-check", "--algebra", &data(a), "--max-level", "3"]);
        c.expect(r.code == 0, format!("{a}: exit {}", r.code));
    }
    let bad = realop(&[
        "brs-check",
        "--algebra",
        &data("scalar-algebra.json"),
        "--max-level",
        "1",
    ]);
    c.expect(bad.code == 1, "scaled scalar algebra not flagged");
    c.at_least(
        "violation",
        value(&bad.json, "violation_level_1"),
        0.25 - 1e-12,
    );
    c
}

fn suite_contract(first: &Run) -> Check {
    let mut c = Check::default();
    c.expect(first.code == 0, format!("verify all exit {}", first.code));
    c.notes
        .push(format!("verify all {:.2}s", first.elapsed.as_secs_f64()));
    c.expect(
        first.elapsed < Duration::from_secs(60),
        "verify all took >= 60 s",
    );
    let second = realop(&["verify", "all"]);
    c.expect(
        first.raw == second.raw,
        "verify all reports differ between runs",
    );
    let q1 = realop(&["verify", "quantization"]);
    let q2 = realop(&["verify", "quantization"]);
    c.expect(
        q1.raw == q2.raw,
        "verify quantization reports differ between runs",
    );

    let dir = tempfile::tempdir().expect("temp dir");
    let corrupted = dir.path().join("p.json");
    std::fs::write(
        &corrupted,
        r#"{"matrix": [[1,0,0,0],[0,1,0,0],[0,0,0.5,0],[0,0,0,0]]}"#,
    )
    .expect("write");
    let r = realop(&[
        "verify",
        "mideal",
        "--space",
        &data("m2.json"),
        "--proj",
        &corrupted.to_string_lossy(),
    ]);
    c.expect(r.code == 2, format!("corrupted projection exit {}", r.code));
    let r = realop(&["reproduce", "no-such-example"]);
    c.expect(r.code == 2, format!("unknown reproduction exit {}", r.code));
    c
}

fn main() -> ExitCode {
    let all = realop(&["verify", "all"]);
    let results: Vec<(&str, &str, Check)> = vec![
        ("1", "l12 non-uniqueness", criterion_1()),
        ("2", "complex dual", criterion_2()),
        ("3", "reasonableness", criterion_3(&all.json)),
        ("4", "Ruan axioms", criterion_4(&all.json)),
        ("5", "M-projection certification", criterion_5()),
        ("6", "Choi-Effros product", criterion_6()),
        ("7", "norm/positivity equivalence", criterion_7(&all.json)),
        ("8", "complexification consistency", criterion_8(&all.json)),
        ("9", "quotients and direct sums", criterion_9(&all.json)),
        ("10", "TRO suite", criterion_10(&all.json)),
        ("11", "BRS level check", criterion_11()),
        (
            "suite",
            "verify all runtime, determinism, exit codes",
            suite_contract(&all),
        ),
    ];
    let mut failed = 0;
    for (id, title, c) in &results {
        let ok = c.failures.is_empty();
        failed += usize::from(!ok);
        let mark = if ok { "PASS" } else { "FAIL" };
        let detail = if ok {
            c.notes.join(", ")
        } else {
            c.failures.join("; ")
        };
        println!("criterion {id:>5} [{mark}] {title}: {detail}");
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
