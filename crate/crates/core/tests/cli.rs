use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nlhet"));
    c.env_remove("RUST_LOG");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "[grid]\nR = 40.0\nh = 0.1\n[obstacles]\nb1 = -5.0\nb2 = 5.0\n";

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn verify_model_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let periodic = configs().join("periodic.toml");
    assert_eq!(code(&run(&["verify-model", periodic.to_str().unwrap()])), 0);

    let declared = write(
        tmp.path(),
        "declared.toml",
        "[modulation]\nvalue = 2.0\nnondegeneracy = { m1 = -3.0, m2 = 3.0, omega = 0.5, theta = 1.0, gamma = 0.25 }\n",
    );
    let o = run(&["verify-model", &declared]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("modulation.nondegenerate"));

    let bad = write(tmp.path(), "bad.toml", "[grid]\nR = 100.0\nn = \"many\"\n");
    let o = run(&["verify-model", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3, column 5"), "{}", stderr(&o));
}

#[test]
fn homogeneous_solve_matches_layer_and_lists_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = configs().join("homogeneous.toml");
    let o = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["verdicts"]["layer_match"], "pass");
    assert_eq!(m["verdicts"]["limit"], "pass");
    assert_eq!(m["verdicts"]["stages"].as_array().unwrap().len(), 13);
    let listed: Vec<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for f in &listed {
        assert!(fs::metadata(out.join(f)).unwrap().len() > 0, "{f} is empty");
    }
    let mut on_disk = Vec::new();
    for entry in walk(&out) {
        let rel = entry.strip_prefix(&out).unwrap().to_str().unwrap().to_string();
        if rel != "manifest.json" {
            on_disk.push(rel);
        }
    }
    on_disk.sort();
    let mut listed_sorted = listed.clone();
    listed_sorted.retain(|f| f != "manifest.json");
    assert_eq!(on_disk, listed_sorted);
    assert!(!out.join(".lock").exists());
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn identical_configs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(code(&run(&["solve", &cfg, "--out", d.to_str().unwrap()])), 0);
    }
    for f in ["profile.csv", "energy_trace.csv", "obstacles.csv", "tail.csv", "stages/stage_005.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn resume_continues_from_the_last_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(code(&run(&["solve", &cfg, "--out", o])), 0);
    let reference = fs::read(out.join("profile.csv")).unwrap();
    for f in ["stage_011.csv", "stage_011.json", "stage_012.csv", "stage_012.json"] {
        fs::remove_file(out.join("stages").join(f)).unwrap();
    }
    let r = run(&["solve", &cfg, "--out", o, "--resume"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(String::from_utf8_lossy(&r.stdout).contains("resuming at stage 11"));
    assert_eq!(fs::read(out.join("profile.csv")).unwrap(), reference);
    assert_eq!(manifest(&out)["verdicts"]["stages"].as_array().unwrap().len(), 13);

    let other = write(tmp.path(), "other.toml", &format!("{SMALL}[solver]\nmax_iters = 999\n"));
    assert_eq!(code(&run(&["solve", &other, "--out", o, "--resume"])), 2);
}

#[test]
fn large_initial_penalty_warns_and_proceeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "mu.toml",
        &format!("{SMALL}[continuation]\nmu_seq = [0.9, 0.1, 0.02, 0.005]\n"),
    );
    let o = run(&["solve", &cfg, "--out", tmp.path().join("run").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("first penalty 0.9"));
}

#[test]
fn environment_failures_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let blocker = write(tmp.path(), "file", "x");
    let o = run(&["solve", &cfg, "--out", &format!("{blocker}/run")]);
    assert_eq!(code(&o), 3);

    let locked = tmp.path().join("locked");
    fs::create_dir_all(&locked).unwrap();
    fs::write(locked.join(".lock"), "").unwrap();
    assert_eq!(code(&run(&["solve", &cfg, "--out", locked.to_str().unwrap()])), 3);
    assert!(locked.join(".lock").exists());
}

#[test]
fn diagnose_checks_and_preconditions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("homogeneous.toml");
    let cfg = cfg.to_str().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(code(&run(&["solve", cfg, "--out", out.to_str().unwrap()])), 0);
    let profile = out.join("profile.csv");
    let profile = profile.to_str().unwrap();

    let dout = tmp.path().join("diag");
    let o = run(&[
        "diagnose",
        "--profile",
        profile,
        "--config",
        cfg,
        "--checks",
        "clean-intervals,lewy-stampacchia,tail-decay,limit",
        "--out",
        dout.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dout.join("diagnostics.json")).unwrap()).unwrap();
    let intervals = report["clean_intervals"]["intervals"].as_array().unwrap();
    assert!(intervals.iter().any(|iv| iv["hi"].as_f64().unwrap() < 0.0));
    assert!(intervals.iter().any(|iv| iv["lo"].as_f64().unwrap() > 0.0));
    assert_eq!(manifest(&dout)["verdicts"]["lewy_stampacchia"], "pass");

    let o = run(&["diagnose", "--profile", profile, "--config", cfg, "--checks", "stickiness", "--x1", "60", "--x2", "62"]);
    assert_eq!(code(&o), 2);

    let bad = write(tmp.path(), "bad.csv", "x,Q,Qsharp\n0,0,0\n");
    let o = run(&["diagnose", "--profile", &bad, "--config", cfg, "--checks", "limit"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bench_appendix_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    let cfg = configs().join("bench.toml");
    let o = run(&["bench-appendix", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("bump_s0.3.csv")).unwrap();
    assert!(csv.starts_with("k,l2,hs,ratio_l2,ratio_hs\n"));
    assert_eq!(csv.lines().count(), 14);

    let half = write(tmp.path(), "half.toml", "[bench]\ns_values = [0.5]\n");
    assert_eq!(code(&run(&["bench-appendix", &half])), 2);
    let deep = write(tmp.path(), "deep.toml", "[bench]\ns_values = [0.3]\nk_max = 40\n");
    assert_eq!(code(&run(&["bench-appendix", &deep])), 1);
}

#[test]
fn thread_cap_is_validated() {
    let cfg = configs().join("periodic.toml");
    let o = bin()
        .args(["verify-model", cfg.to_str().unwrap()])
        .env("NLHET_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .args(["verify-model", cfg.to_str().unwrap()])
        .env("NLHET_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}
