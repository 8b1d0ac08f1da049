use std::path::Path;
use std::process::{Command, Output};

use blindcount::format::parse_machine;

const A_OMEGA: &str = "\
machine aw
alphabet a
counters blind
states q
initial q
accepting q
t q a -> q
";

const NONE: &str = "\
machine none
alphabet a
counters blind
states q
initial q
accepting q
t q a -> q delta -1
";

const DETERMINISTIC: &str = "\
machine ab
alphabet a b
counters blind
states p r
initial p
accepting r
t p a -> p delta +1
t p b -> r delta -1
t r a -> p delta +1
t r b -> r delta -1
";

const AMBIGUOUS: &str = "\
machine two
alphabet a
counters blind
states q
initial q
accepting q
t q a -> q
t q a -> q delta +1
";

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blindcount")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("aw", A_OMEGA), ("none", NONE), ("det", DETERMINISTIC), ("two", AMBIGUOUS)] {
        std::fs::write(dir.path().join(format!("{name}.machine")), text).unwrap();
    }
    dir
}

#[test]
fn check_empty_exit_codes() {
    let dir = workspace();
    let out = run(&["check-empty", "aw.machine", "--bound", "4"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("verdict: NonEmpty\n"));
    let out = run(&["check-empty", "none.machine"], dir.path());
    assert_eq!((code(&out), stdout(&out)), (2, "verdict: EmptyCertified\n".to_string()));
}

#[test]
fn a1_pipes_into_check_empty() {
    let dir = workspace();
    let a1 = run(&["a1", "--out", "a1.machine"], dir.path());
    assert_eq!(code(&a1), 0);
    let out = run(&["check-empty", "a1.machine", "--bound", "16"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn member_on_a_omega() {
    let dir = workspace();
    let out = run(&["member", "aw.machine", "--u", "", "--v", "a"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("verdict: member\n"));
    let out = run(&["member", "none.machine", "--u", "", "--v", "a"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_three() {
    let dir = workspace();
    assert_eq!(code(&run(&["frobnicate"], dir.path())), 3);
    assert_eq!(code(&run(&["check-empty", "missing.machine"], dir.path())), 3);
    assert_eq!(code(&run(&["member", "aw.machine", "--u", "", "--v", "b"], dir.path())), 3);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = workspace();
    std::fs::write(dir.path().join("taken"), "keep").unwrap();
    let out = run(&["a1", "--out", "taken"], dir.path());
    assert_eq!(code(&out), 3);
    assert_eq!(std::fs::read_to_string(dir.path().join("taken")).unwrap(), "keep");
    assert_eq!(code(&run(&["a1", "--out", "taken", "--force"], dir.path())), 0);
    assert!(std::fs::read_to_string(dir.path().join("taken")).unwrap().starts_with("machine A1"));
}

#[test]
fn determinize_deterministic_input() {
    let dir = workspace();
    let out = run(&["determinize", "det.machine", "--bound", "16"], dir.path());
    assert_eq!(code(&out), 0);
    let det = parse_machine(&stdout(&out)).unwrap();
    assert!(det.is_deterministic());
    assert!(det.validate().is_empty());
    std::fs::write(dir.path().join("out.machine"), stdout(&out)).unwrap();
    let accept = run(&["run-det", "out.machine", "--u", "", "--v", "ab"], dir.path());
    assert_eq!(code(&accept), 0, "{}", stdout(&accept));
    let reject = run(&["run-det", "out.machine", "--u", "", "--v", "b"], dir.path());
    assert_eq!(code(&reject), 1, "{}", stdout(&reject));
}

#[test]
fn determinize_refuses_on_lint_violation() {
    let dir = workspace();
    let out = run(&["determinize", "two.machine", "--lint-words", "6", "--lint-runs", "100000"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unambiguity violation"));
}

#[test]
fn shuffle_and_hsim_emit_valid_machines() {
    let dir = workspace();
    let out = run(&["shuffle", "aw.machine", "aw.machine"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(parse_machine(&stdout(&out)).unwrap().validate().is_empty());
    for emit in ["B", "L", "PA"] {
        let out = run(&["hsim", "aw.machine", "--emit", emit], dir.path());
        assert_eq!(code(&out), 0, "{emit}");
        assert!(parse_machine(&stdout(&out)).unwrap().is_blind());
    }
}

#[test]
fn alpha_generators() {
    let dir = workspace();
    let out = run(&["alpha", "--set", "left-spine", "--phases", "2"], dir.path());
    assert_eq!(stdout(&out), include_str!("golden/alpha_eps_l_2.txt"));
    let out = run(&["alpha", "--set", "empty", "--phases", "1"], dir.path());
    assert_eq!(stdout(&out), "<|-><|i->#\n");
}
