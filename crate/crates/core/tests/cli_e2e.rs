use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn input(name: &str) -> String {
    corpus().join("inputs").join(name).to_string_lossy().into_owned()
}

fn subgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgrad")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn exact_claims_exit_zero_and_print_hypotheses() {
    let out = subgrad(&["check", "--claim", "equality22", "--dc", &input("abs_minus_x.json"), "--point", "0"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("hypotheses"));
    let out = subgrad(&["subdiff", "--function", &input("abs_minus_x.json"), "--point", "0", "--eps", "1/2"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn certify_separates_minimizer_from_descent() {
    assert_eq!(code(&subgrad(&["certify", "--problem", &input("cone_dc.json"), "--point", "0,0"])), 0);
    let out = subgrad(&["certify", "--problem", &input("cone_dc_neg.json"), "--point", "0,0"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("(1, 0)"), "{}", stdout(&out));
}

#[test]
fn probes_report_fails_and_inconclusive() {
    let out = subgrad(&["probe", "--kind", "calmness", "--function", &input("neg_sqrt_abs.json"), "--point", "0"]);
    assert_eq!(code(&out), 1);
    // Default shells stop too early for the estimate to settle.
    let out = subgrad(&[
        "probe", "--kind", "dini", "--function", &input("abs_minus_sq.json"), "--point", "0", "--direction", "1",
    ]);
    assert_eq!(code(&out), 2, "{}", stdout(&out));
}

#[test]
fn input_errors_exit_three() {
    assert_eq!(code(&subgrad(&["certify", "--problem", "/nonexistent.json", "--point", "0,0"])), 3);
    assert_eq!(code(&subgrad(&["check", "--claim", "no_such_claim", "--dc", &input("abs.json"), "--point", "0"])), 3);
    assert_eq!(code(&subgrad(&["frobnicate"])), 3);
    assert_eq!(code(&subgrad(&["subdiff", "--function", &input("abs.json"), "--point", "0,0"])), 3);
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(&subgrad(&["corpus", empty.path().to_str().unwrap()])), 3);
    assert_eq!(code(&subgrad(&["--help"])), 0);
}

fn copy_scenario(name: &str, to: &Path, edit: impl Fn(&mut serde_json::Value)) {
    let text = std::fs::read_to_string(corpus().join(name)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["function", "problem", "A", "B", "g"] {
        if let Some(serde_json::Value::String(rel)) = v.get(key) {
            let abs = corpus().join(rel).to_string_lossy().into_owned();
            v[key] = serde_json::Value::String(abs);
        }
    }
    edit(&mut v);
    std::fs::write(to.join(name), serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

#[test]
fn corpus_exit_code_tracks_expectations() {
    let dir = tempfile::tempdir().unwrap();
    copy_scenario("certify_cone_dc.json", dir.path(), |_| {});
    copy_scenario("probe_calmness_neg_sqrt_abs.json", dir.path(), |_| {});
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&subgrad(&["corpus", d])), 0);
    // A wrong expectation makes the run fail without being an error.
    copy_scenario("certify_cone_dc_negative.json", dir.path(), |v| v["expect"] = "holds".into());
    let out = subgrad(&["corpus", d]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("2/3 scenarios as expected"), "{}", stdout(&out));
    assert_eq!(code(&subgrad(&["corpus", d, "--filter", "certify_cone_dc.json"])), 0);
    assert_eq!(code(&subgrad(&["corpus", d, "--filter", "nothing*"])), 3);
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let c = corpus();
    for target in [&a, &b] {
        let out = subgrad(&["--seed", "11", "--json", target.to_str().unwrap(), "corpus", c.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ja.is_empty());
    assert_eq!(ja, jb);
}
