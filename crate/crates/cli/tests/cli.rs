use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn npt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_npt"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    npt().args(args).current_dir(root()).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn library_checks() {
    let o = run(&["check", "lib/prelude.npt", "lib/corpus.npt", "lib/extras.npt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = run(&["check", "no/such/file.npt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--budget", "0", "check", "lib/prelude.npt"]).status.code(), Some(1));
}

#[test]
fn negative_fixtures_report_their_codes() {
    let dir = fixtures().join("neg");
    let mut seen = 0;
    for e in std::fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        let src = std::fs::read_to_string(&p).unwrap();
        let expect = src.lines().next().unwrap().strip_prefix("-- expect: ").unwrap().trim();
        let o = run(&["--diag-format", "structured", "check", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{}", p.display());
        let first = stderr(&o).lines().next().unwrap_or("").to_string();
        let v: serde_json::Value = serde_json::from_str(&first).unwrap();
        assert_eq!(v["code"], expect, "{}", p.display());
        assert!(v["line"].as_u64().unwrap() >= 1);
        assert!(v["col"].as_u64().unwrap() >= 1);
        seen += 1;
    }
    assert!(seen >= 6);
}

#[test]
fn text_diagnostics_name_the_code_and_position() {
    let p = fixtures().join("neg/unbound_name.npt");
    let o = run(&["check", p.to_str().unwrap()]);
    let err = stderr(&o);
    assert!(err.contains("UnboundName"), "{err}");
    assert!(err.contains("unbound_name.npt:"), "{err}");
}

#[test]
fn norm_prints_the_normal_form() {
    let o = run(&["norm", "lib/corpus.npt", "ubd_hid"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "lam (\\(x : @I). var (name x))\n");
}

#[test]
fn norm_with_trace_lists_rules() {
    let p = fixtures().join("golden/forg_chain.npt");
    let o = run(&["--trace", "norm", p.to_str().unwrap(), "forg_chain"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.contains("-- trace\n") && out.contains("ext-beta\n"), "{out}");
}

#[test]
fn norm_out_of_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("big.npt");
    std::fs::write(
        &f,
        "def double (n : Nat) : Nat := indNat (\\(_ : Nat). Nat) zero (\\_ r. suc (suc r)) n\n\
         def big : Nat := double (double (double (suc (suc zero))))\n",
    )
    .unwrap();
    let o = run(&["--budget", "30", "norm", f.to_str().unwrap(), "big"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("BudgetExceeded"));
}

#[test]
fn norm_unknown_name_is_a_diagnostic() {
    let o = run(&["norm", "lib/prelude.npt", "nothing_here"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shipped_goldens_pass_under_both_strategies() {
    let dir = fixtures().join("golden");
    for s in ["lo", "ri"] {
        let o = run(&["--strategy", s, "golden", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", stdout(&o));
        assert!(stdout(&o).contains(" 0 failed"));
    }
}

#[test]
fn empty_golden_dir_has_no_cases() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["golden", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 cases, 0 passed, 0 failed\n");
}

#[test]
fn corrupted_golden_fails_and_bless_repairs_it() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixtures().join("golden/tighten.npt");
    std::fs::copy(&src, dir.path().join("tighten.npt")).unwrap();
    let good = std::fs::read_to_string(src.with_extension("golden")).unwrap();
    std::fs::write(dir.path().join("tighten.golden"), good.replacen("inl tt", "inr tt", 1)).unwrap();
    let d = dir.path().to_str().unwrap();

    let o = run(&["golden", d]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL tighten"));
    assert!(stdout(&o).ends_with("1 cases, 0 passed, 1 failed\n"));

    let o = run(&["golden", d, "--bless"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(dir.path().join("tighten.golden")).unwrap(), good);
    assert_eq!(run(&["golden", d]).status.code(), Some(0));
}

#[test]
fn missing_golden_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixtures().join("golden/tighten.npt"), dir.path().join("t.npt")).unwrap();
    let o = run(&["golden", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repl_session() {
    let mut child = npt()
        .arg("repl")
        .current_dir(root())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(
            b":assume (y : @I) (x : @I)\n\
              :t gel (name y) x\n\
              tighten (\\(z : @I). name y)\n\
              :def def two : Nat := suc (suc zero)\n\
              :n two\n\
              :t name q\n\
              :q\n",
        )
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Gel Nm x\n"), "{out}");
    assert!(out.contains("inr (name y)\n"), "{out}");
    assert!(out.contains("defined two\n"), "{out}");
    assert!(out.contains("suc (suc zero)\n"), "{out}");
    assert!(stderr(&o).contains("UnboundName"));
}
