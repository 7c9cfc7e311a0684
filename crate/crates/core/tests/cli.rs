use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use delchan::inner::InnerCodebook;

fn delchan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delchan"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn construct_writes_a_reloadable_codebook_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["construct", "--m", "7", "--r1", "3", "--r2", "2", "--d", "2", "--out"];
    let a = delchan(&[&args[..], &["a"]].concat(), dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(stdout(&a).contains("inner_size="));
    let b = delchan(&[&args[..], &["b"]].concat(), dir.path());
    assert_eq!(b.status.code(), Some(0));
    let ta = fs::read_to_string(dir.path().join("a/codebook.txt")).unwrap();
    let tb = fs::read_to_string(dir.path().join("b/codebook.txt")).unwrap();
    assert_eq!(ta, tb);
    let cb = InnerCodebook::from_text(&ta).unwrap();
    assert_eq!(cb.to_text(), ta);
    assert_eq!(cb.params().m(), 7);
}

#[test]
fn construction_guard_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    // C(27, 13) candidates
    let o = delchan(&["construct", "--m", "41", "--r1", "13", "--r2", "14", "--d", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("10000000"));
}

#[test]
fn full_scheme_encodes_and_decodes_through_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("scheme.cfg"), "preset=desk-bdc-e2e\nseed=5\n").unwrap();
    let o = delchan(&["construct", "--config", "scheme.cfg", "--out", "built"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("outer_rate="));
    let desc = fs::read_to_string(dir.path().join("built/scheme.desc")).unwrap();
    assert!(desc.contains("codebook=codebook.txt") && desc.contains("seed=5"));

    let e = delchan(
        &["encode", "--config", "built/scheme.desc", "--message", "9,4", "--out", "sent.txt"],
        dir.path(),
    );
    assert_eq!(e.status.code(), Some(0), "{}", String::from_utf8_lossy(&e.stderr));
    let d = delchan(&["decode", "--config", "built/scheme.desc", "--input", "sent.txt"], dir.path());
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(stdout(&d).trim(), "9,4");

    let bad = delchan(&["encode", "--config", "built/scheme.desc", "--message", "9,99"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn analyze_reports_every_preset_and_flags_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = delchan(&["analyze"], dir.path());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "preset,p_or_lambda,P12,P10,P21,P20,gamma,xi,delta_in,gamma_lt_delta,R_in,final_rate,paper_rate,rel_err"
    );
    assert_eq!(lines.count(), 15);
    // two published rows do not verify, so the status is a verification failure
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = delchan(&["sweep", "--grid", "40", "--out", "sweep.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "source,p,table_rate,curve,lower_bound");
    assert_eq!(text.lines().count(), 1 + 11 + 40);
}

#[test]
fn simulate_writes_matching_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.cfg"),
        "preset=desk-bdc-e2e\nmode=end_to_end\ntrials=20\nmaster_seed=3\n",
    )
    .unwrap();
    let o = delchan(&["simulate", "--config", "exp.cfg", "--out", "r.json", "--csv", "r.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["trials"], 20);
    assert_eq!(report["per_trial"].as_array().unwrap().len(), 20);
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    let successes = csv.lines().skip(1).filter(|l| l.split(',').nth(1) == Some("true")).count();
    assert_eq!(report["successes"], successes);
    // wall-clock goes to stderr only
    assert!(!fs::read_to_string(dir.path().join("r.json")).unwrap().contains("elapsed"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "preset=desk-bdc\ntrials=0\n").unwrap();
    assert_eq!(delchan(&["simulate", "--config", "bad.cfg"], dir.path()).status.code(), Some(2));
    assert_eq!(delchan(&["simulate", "--preset", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(delchan(&["simulate", "--config", "missing.cfg"], dir.path()).status.code(), Some(2));
    assert_eq!(delchan(&["frobnicate"], dir.path()).status.code(), Some(2));
    let o = delchan(&["simulate", "--preset", "desk-bdc", "--mode", "sideways"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_delchan"))
            .args(["simulate", "--preset", "desk-prc", "--trials", "300", "--seed", "42"])
            .env("DELCHAN_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        o.stdout
    };
    assert_eq!(run("1"), run("3"));
}
