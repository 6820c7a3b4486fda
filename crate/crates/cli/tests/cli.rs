use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gonal(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gonal"))
        .args(args)
        .current_dir(dir)
        .env_remove("GONAL_SEED")
        .output()
        .expect("run gonal")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn sample_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let out = gonal(
        &["sample", "-m", "2", "-l", "3", "--p", "1", "--model", "positive", "--seed", "7", "-o", "t.pres"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = gonal(&["analyze", "t.pres"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["num_relators"], 8);
    assert_eq!(v["euler_characteristic"], 7);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.pres", "b.pres"] {
        let out = gonal(
            &["sample", "-m", "6", "-l", "4", "--p", "0.003", "--seed", "99", "-o", name],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.pres")).unwrap();
    let b = fs::read(dir.path().join("b.pres")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, name: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gonal"));
        cmd.args(["sample", "-m", "5", "-l", "3", "--p", "0.05", "-o", name])
            .current_dir(dir.path())
            .env_remove("GONAL_SEED");
        if let Some(s) = env {
            cmd.env("GONAL_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read_to_string(dir.path().join(name)).unwrap()
    };
    let from_env = run(Some("31"), "env.pres");
    assert!(from_env.lines().next().unwrap().ends_with(" 31"));
    let default = run(None, "default.pres");
    assert!(default.lines().next().unwrap().ends_with(" 0"));
}

#[test]
fn certify_free_rank_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("abc.pres"), "3 3 given 0 0\n1 2 3\n").unwrap();
    let out = gonal(&["certify-free", "abc.pres"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["outcome"], "certified");
    assert_eq!(v["final_rank"], 2);
    assert_eq!(v["steps"][0]["generator"], 1);
}

#[test]
fn check_fa_on_all_positive_words() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("2 3 given 0 0\n");
    for code in 0..8 {
        let w: Vec<String> = (0..3).rev().map(|i| ((code >> i & 1) + 1).to_string()).collect();
        text.push_str(&w.join(" "));
        text.push('\n');
    }
    fs::write(dir.path().join("all.pres"), text).unwrap();
    let out = gonal(&["check-fa", "all.pres", "--epsilon", "0.01"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"]["kind"], "fa_certified");
    assert_eq!(v["epsilon_kind"], "reference");
}

#[test]
fn check_fa_budget_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    // Every generator used, not free: (L) and (SL) must be searched.
    fs::write(dir.path().join("p.pres"), "4 3 given 0 0\n1 2 3\n3 2 1\n4 4 1\n1 4 4\n").unwrap();
    let out = gonal(&["check-fa", "p.pres", "--budget", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"], "budget_exceeded");
    assert_eq!(v["budget"], 1);
}

#[test]
fn abelianize_reports_invariants() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("z3.pres"), "2 3 given 0 0\n1 1 2\n1 2 2\n").unwrap();
    let out = gonal(&["abelianize", "z3.pres"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["betti"], 0);
    assert_eq!(v["torsion"][0], "3");
    assert_eq!(v["surjects_onto_z"], false);
}

#[test]
fn malformed_file_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.pres"), "3 3 given 0 0\n1 2 3\n1 -1 2\n").unwrap();
    let out = gonal(&["analyze", "bad.pres"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = gonal(&["sample", "-m", "2", "-l", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = gonal(&["sample", "-m", "1", "-l", "3", "--p", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = gonal(&["analyze", "missing.pres"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_streams_words() {
    let dir = tempfile::tempdir().unwrap();
    let out = gonal(&["enumerate", "-m", "2", "-l", "3"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 28);
    let out = gonal(&["enumerate", "-m", "2", "-l", "2"], dir.path());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().next(), Some("1 1"));
    let out = gonal(&["enumerate", "-m", "9", "-l", "9", "--cap", "1000"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "cap_exceeded");
}

const SWEEP: &str = r#"
m = [6, 12]
ell = 3
model = "binomial"
trials = 8
seed = 3

[grid]
scaled = [{ c = 0.1 }, { c = 5.0, a = 1.0 }]
"#;

#[test]
fn sweep_writes_csv_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SWEEP).unwrap();
    let out = gonal(
        &["sweep", "--config", "s.toml", "-o", "one.csv", "--threads", "1", "--jsonl", "t.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = gonal(&["sweep", "--config", "s.toml", "-o", "two.csv", "--threads", "3"], dir.path());
    assert!(out.status.success());
    let one = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let two = fs::read_to_string(dir.path().join("two.csv")).unwrap();
    assert_eq!(one, two);
    assert!(one.starts_with(
        "m,ell,model,p,d_equiv,trials,frac_free,frac_free_ci_lo,frac_free_ci_hi,mean_R,sd_R,\
         frac_R_ge_3m,frac_unused_ge_halfsqrtm,frac_surjZ,frac_L,frac_SL,frac_FA,frac_unknown\n"
    ));
    assert_eq!(one.lines().count(), 5);
    let jsonl = fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 32);

    let out = gonal(&["sweep", "--config", "s.toml", "--trials", "2"], dir.path());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().split(',').nth(5) == Some("2"));
}

#[test]
fn bad_sweep_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SWEEP.replace("trials = 8", "trials = 0")).unwrap();
    let out = gonal(&["sweep", "--config", "s.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
