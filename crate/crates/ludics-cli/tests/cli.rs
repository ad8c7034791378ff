//! End-to-end checks of the `ludics` binary: output shapes and the exit-code
//! contract (0 converged/valid/yes, 1 diverged/invalid/no, 2 limits,
//! 3 malformed input, 64 usage).

use std::path::PathBuf;
use std::process::{Command, Output};

fn ludics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ludics"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("ludics-cli-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn normalize_replays_the_golden_trace() {
    let out = ludics(&[
        "normalize",
        "--pos",
        "fixture:ab_proponent",
        "--neg",
        "fixture:ab_opponent",
        "--budget",
        "32",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verdict: converged"), "{text}");
    assert!(
        text.contains("(+,0,{1})(-,0.1,{1,2})(+,0.1.1,{1})(-,0.1.1.1,{1})†"),
        "{text}"
    );
}

#[test]
fn normalize_emits_machine_readable_json() {
    let out = ludics(&[
        "normalize",
        "--pos",
        "fixture:ab_proponent",
        "--neg",
        "fixture:ab_opponent",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["verdict"], "converged");
    assert_eq!(doc["trace"].as_array().unwrap().len(), 5);
}

#[test]
fn dialogue_run_reports_the_missing_branch() {
    let out = ludics(&["dialogue-run", "fixture:schopenhauer"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("verdict: diverged"), "{text}");
    assert!(text.contains("missing branch {3}"), "{text}");
    assert!(text.contains("{{1},{2}}"), "{text}");
}

#[test]
fn orth_answers_yes_and_no_through_the_exit_code() {
    let yes = ludics(&["orth", "fixture:ab_proponent", "fixture:ab_opponent"]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(stdout(&yes).trim(), "yes");

    let no = ludics(&[
        "orth",
        "fixture:schopenhauer_proponent",
        "fixture:schopenhauer_opponent",
    ]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(stdout(&no).trim(), "no");
}

#[test]
fn universe_counts_and_honours_the_size_cap() {
    let out = ludics(&["universe", "--base", "|- 0", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "290");

    let capped = Command::new(env!("CARGO_BIN_EXE_ludics"))
        .args(["universe", "--base", "|- 0", "--depth", "2"])
        .env("LUDICS_SIZE_CAP", "50")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    assert!(
        stderr(&capped).contains("SIZE_LIMIT"),
        "{}",
        stderr(&capped)
    );
}

#[test]
fn malformed_documents_are_input_errors() {
    let path = scratch("broken.design");
    std::fs::write(&path, "{\"base\": 42}").unwrap();
    let out = ludics(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!stderr(&out).is_empty());
    std::fs::remove_file(&path).ok();

    let missing = ludics(&["validate", "fixture:no_such_design"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).contains("no_such_design"));
}

#[test]
fn usage_errors_use_the_conventional_code() {
    let unknown = ludics(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(64));

    let bare = ludics(&[]);
    assert_eq!(bare.status.code(), Some(64));

    let help = ludics(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("normalize"));
}

#[test]
fn fixtures_listing_names_every_table() {
    let out = ludics(&["--fixtures"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for section in ["designs:", "scripts:", "proofs:"] {
        assert!(text.contains(section), "{text}");
    }
    for name in ["ab_proponent", "schopenhauer", "s_dprime"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn compiled_proofs_validate_as_designs() {
    let path = scratch("compiled.design");
    let out = ludics(&["hs-compile", "fixture:s_dprime", "--root", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    std::fs::write(&path, stdout(&out)).unwrap();

    let check = ludics(&["validate", path.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
    std::fs::remove_file(&path).ok();
}

#[test]
fn lazy_designs_need_the_lazy_flag() {
    let path = scratch("fax.design");
    let out = ludics(&["fax", "--from", "0", "--to", "5"]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::write(&path, stdout(&out)).unwrap();

    let strict = ludics(&["validate", path.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(3));
    assert!(
        stdout(&strict).contains("LAZY_UNEXPANDED"),
        "{}",
        stdout(&strict)
    );

    let lazy = ludics(&["validate", path.to_str().unwrap(), "--lazy"]);
    assert_eq!(lazy.status.code(), Some(0));
    std::fs::remove_file(&path).ok();
}

#[test]
fn hs_check_rejects_a_broken_axiom() {
    let path = scratch("broken.hsproof");
    std::fs::write(
        &path,
        r#"{"conclusion": {"left": ["~P"], "right": ["Q"]}, "rule": "atom-axiom"}"#,
    )
    .unwrap();
    let out = ludics(&["hs-check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("BAD_AXIOM"), "{}", stdout(&out));
    std::fs::remove_file(&path).ok();
}

#[test]
fn wh_answer_reads_the_selected_index() {
    let out = ludics(&[
        "wh-answer",
        "--question",
        "fixture:wh_question",
        "--justification",
        "fixture:linguist_dprime",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "answer: 1");
}

#[test]
fn biorth_reports_membership_and_closure() {
    let out = ludics(&[
        "biorth", "--base", "0 |-", "--depth", "1", "--budget", "64", "--json",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // The empty set's closure is the set of designs orthogonal to every
    // counter-design; it is nonempty but not the empty set we started from.
    assert_eq!(doc["closed"], false);
    assert!(!doc["members"].as_array().unwrap().is_empty());
}
