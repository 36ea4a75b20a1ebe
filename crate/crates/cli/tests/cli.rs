use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icsimp"))
        .current_dir(root())
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(root().join("corpus/golden").join(name)).unwrap()
}

#[test]
fn simplify_matches_golden() {
    for c in ["book", "mutex", "ll96", "ld98"] {
        let out = stdout(&[
            "simplify",
            &format!("corpus/{c}.sch"),
            &format!("corpus/{c}.upd"),
        ]);
        assert_eq!(out, golden(&format!("{c}.simplify.txt")), "{c}");
        let out = stdout(&[
            "after",
            &format!("corpus/{c}.sch"),
            &format!("corpus/{c}.upd"),
        ]);
        assert_eq!(out, golden(&format!("{c}.after.txt")), "{c}");
    }
}

#[test]
fn unfold_and_check_match_golden() {
    for c in ["book", "mutex", "ll96", "ld98", "s1", "s2"] {
        let sch = format!("corpus/{c}.sch");
        assert_eq!(
            stdout(&["unfold", &sch]),
            golden(&format!("{c}.unfold.txt")),
            "{c}"
        );
        assert_eq!(
            stdout(&["check", &sch]),
            golden(&format!("{c}.check.txt")),
            "{c}"
        );
    }
    assert_eq!(
        stdout(&["check", "corpus/ld98.sch", "corpus/ld98.upd"]),
        golden("ld98.upd.check.txt")
    );
}

#[test]
fn documented_outputs() {
    assert_eq!(
        stdout(&["simplify", "corpus/book.sch", "corpus/book.upd"]),
        "<- b($i,Y), Y != $t.\n"
    );
    assert!(stdout(&["check", "corpus/s1.sch"])
        .starts_with("not in L_S (odd-parity star path s1* -> ⊥); in L_Sext\n"));
    assert_eq!(
        stdout(&["simplify", "corpus/ll96.sch", "corpus/ll96.upd"]),
        "true.\n"
    );
}

#[test]
fn output_is_deterministic() {
    let args = ["simplify", "--trace", "corpus/ld98.sch", "corpus/ld98.upd"];
    let first = stdout(&args);
    for _ in 0..3 {
        assert_eq!(stdout(&args), first);
    }
}

#[test]
fn trace_reports_rules_and_counters() {
    let out = stdout(&["simplify", "--trace", "corpus/ll96.sch", "corpus/ll96.upd"]);
    assert!(out.starts_with("true.\n"));
    assert!(out.contains("% nee-replace-derived:"));
    assert!(out.contains("% drop-derived:"));
    assert!(out.contains("firings 2/10000"));
}

#[test]
fn structured_mirrors_text() {
    let out = stdout(&[
        "simplify",
        "--format",
        "structured",
        "corpus/ld98.sch",
        "corpus/ld98.upd",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let text = stdout(&["simplify", "corpus/ld98.sch", "corpus/ld98.upd"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(v["theory"], serde_json::json!(lines));
    assert_eq!(v["lang"], "L_Sext");

    let out = stdout(&["check", "--format", "structured", "corpus/s1.sch"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"]["lang"], "L_Sext");
    assert_eq!(v["schema"]["witness"], "s1* -> ⊥");
}

#[test]
fn verify_exit_codes() {
    let ok = run(&[
        "verify",
        "corpus/mutex.sch",
        "corpus/mutex.upd",
        "--domain",
        "a,b",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));

    let dir = std::env::temp_dir().join(format!("icsimp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cand = dir.join("cand.sch");
    std::fs::write(&cand, "<- q(a).\n").unwrap();
    let bad = run(&[
        "verify",
        "corpus/mutex.sch",
        "corpus/mutex.upd",
        "--domain",
        "a,b",
        "--mode",
        "wp",
        "--candidate",
        cand.to_str().unwrap(),
        "--format",
        "structured",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(
        v["counterexamples"][0]["edb"],
        serde_json::json!(["p(b)", "q(b)"])
    );
}

#[test]
fn wp_verify_of_after() {
    let o = run(&[
        "verify",
        "--mode",
        "wp",
        "corpus/ld98.sch",
        "corpus/ld98.upd",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
}

#[test]
fn paranoid_simplify() {
    let o = run(&[
        "simplify",
        "--paranoid",
        "--domain",
        "a,b",
        "corpus/ld98.sch",
        "corpus/ld98.upd",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        golden("ld98.simplify.txt")
    );
}

#[test]
fn eval_reports_violations() {
    let o = run(&["eval", "corpus/book.sch", "corpus/book_bad.edb"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "violated <- b(X,Y), b(X,Z), Y != Z.\ninconsistent\n"
    );
    let o = run(&["eval", "corpus/book.sch", "corpus/book_ok.edb"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["eval", "corpus/ld98.sch", "corpus/ld98.edb"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(
        text.contains("violated <- parent(X,Y), unmarried(X)."),
        "{text}"
    );
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(run(&["simplify"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", "corpus/missing.sch"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("icsimp-cli-parse-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.sch");
    std::fs::write(&bad, "<- p(X, .\n").unwrap();
    let o = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
}

#[test]
fn ls_is_refused_outside_ls() {
    let o = run(&[
        "--lang",
        "ls",
        "simplify",
        "corpus/ll96.sch",
        "corpus/ll96.upd",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["unfold", "--lang", "ls", "corpus/s1.sch"]);
    assert_eq!(o.status.code(), Some(1));
}
