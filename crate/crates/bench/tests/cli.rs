use std::path::Path;
use std::process::{Command, Output};

use acl_bench::results::{load_groups, read_jsonl, read_summary, run_dir};
use acl_core::harness::{Challenge, EvalRecord};
use acl_core::teacher::{EkLevel, TeacherKind};

fn acl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acl")).args(args).env_remove("ACL_RESULTS_DIR").output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_writes_records_and_teacher_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out = acl(&[
        "run", "--teacher", "adr", "--challenge", "rugged", "--ek", "high", "--seed", "3", "--episodes", "1000",
        "--eval-every", "250", "--trajectory", "--out", p(tmp.path()),
    ]);
    ok(&out);
    let dir = run_dir(tmp.path(), Challenge::Rugged, EkLevel::High, TeacherKind::Adr);
    let records: Vec<EvalRecord> = read_jsonl(&dir.join("seed_3.jsonl")).unwrap();
    assert_eq!(records.iter().map(|r| r.episode).collect::<Vec<_>>(), [0, 250, 500, 750, 1000]);
    assert!(records.iter().all(|r| r.seed == 3 && r.teacher == TeacherKind::Adr));
    assert!(dir.join("seed_3.curriculum.jsonl").exists());
    assert!(dir.join("seed_3.teacher.jsonl").exists());
    let steps: Vec<serde_json::Value> = read_jsonl(&dir.join("seed_3.student.jsonl")).unwrap();
    assert_eq!(steps.len(), 1000);
}

#[test]
fn batch_then_compare_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let root = p(tmp.path());
    let common = ["--challenge", "mostly_trivial", "--episodes", "600", "--eval-every", "200", "--out", root];
    let mut args = vec!["batch", "--teachers", "random,alp-gmm", "--seeds", "3"];
    args.extend(common);
    ok(&acl(&args));
    // a second batch adds seeds without dropping the first ones
    let mut more = vec!["batch", "--teachers", "random", "--seeds", "1", "--first-seed", "3"];
    more.extend(common);
    ok(&acl(&more));

    let ek_dir = tmp.path().join("mostly_trivial").join("none");
    let summary = read_summary(&ek_dir.join("summary.csv")).unwrap();
    let keys: Vec<(String, u64)> = summary.iter().map(|r| (r.teacher.clone(), r.seed)).collect();
    assert_eq!(
        keys,
        [("alp-gmm", 0), ("alp-gmm", 1), ("alp-gmm", 2), ("random", 0), ("random", 1), ("random", 2), ("random", 3)]
            .map(|(t, s)| (t.to_string(), s))
    );

    let groups = load_groups(std::slice::from_ref(&ek_dir)).unwrap();
    assert_eq!(groups["random"].runs.len(), 4);
    assert_eq!(groups["alp-gmm"].episodes, [0, 200, 400, 600]);

    let csv_path = tmp.path().join("cmp.csv");
    let out = acl(&["compare", p(&ek_dir), "--out", p(&csv_path)]);
    ok(&out);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("alp-gmm") && table.contains("random"));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("teacher,seeds,final_mean"));
    assert!(lines[1].starts_with("alp-gmm,3,") && lines[2].starts_with("random,4,"));

    let svg = tmp.path().join("curves.svg");
    ok(&acl(&["plot", "--in", p(&ek_dir), "--svg", p(&svg)]));
    assert!(std::fs::read_to_string(svg).unwrap().contains("mean-alp-gmm"));
}

#[test]
fn results_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_acl"))
        .args(["run", "--teacher", "random", "--challenge", "mostly_trivial", "--episodes", "200", "--eval-every", "100"])
        .env("ACL_RESULTS_DIR", tmp.path())
        .output()
        .unwrap();
    ok(&out);
    assert!(tmp.path().join("mostly_trivial/none/random/seed_0.jsonl").exists());
}

#[test]
fn hp_overrides_are_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["run", "--teacher", "riac", "--challenge", "mostly_trivial", "--episodes", "200", "--eval-every", "100", "--out", p(tmp.path())];
    let mut good = base.to_vec();
    good.extend(["--hp", "riac.max_s=50"]);
    ok(&acl(&good));
    let mut bad = base.to_vec();
    bad.extend(["--hp", "riac.no_such_key=1"]);
    assert_eq!(acl(&bad).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let root = p(tmp.path());
    let code = |args: &[&str]| acl(args).status.code();
    assert_eq!(code(&["run", "--teacher", "goalgan", "--challenge", "rugged", "--out", root]), Some(2));
    assert_eq!(code(&["run", "--teacher", "adr", "--challenge", "rugged", "--ek", "none", "--out", root]), Some(2));
    assert_eq!(code(&["terrain", "--theta", "9,0,0"]), Some(2));
    assert_eq!(code(&["stumps", "--height", "1", "--spacing", "0"]), Some(2));
    assert_eq!(code(&["compare", p(&tmp.path().join("missing"))]), Some(1));
    assert_eq!(code(&["bogus"]), Some(2));
}

#[test]
fn terrain_and_weights_files() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path().join("w.bin");
    ok(&acl(&["weights", "--out", p(&w)]));
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cppn_seed42.bin");
    assert_eq!(std::fs::read(&w).unwrap(), std::fs::read(shipped).unwrap());

    let (a, b) = (tmp.path().join("a.json"), tmp.path().join("b.json"));
    let theta = "-0.1,0.9,0";
    ok(&acl(&["terrain", "--theta", theta, "--creepers", "3,1", "--water", "0.4", "--json", p(&a)]));
    ok(&acl(&["terrain", "--theta", theta, "--creepers", "3,1", "--water", "0.4", "--weights", p(&w), "--json", p(&b)]));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let mut truncated = std::fs::read(&w).unwrap();
    truncated.truncate(100);
    std::fs::write(&w, truncated).unwrap();
    assert_eq!(acl(&["terrain", "--theta", theta, "--weights", p(&w)]).status.code(), Some(1));
}
