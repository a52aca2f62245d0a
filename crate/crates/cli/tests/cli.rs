use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sphereflow"));
    c.env_remove("SPHEREFLOW_OUT").env_remove("SPHEREFLOW_THREADS");
    c
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const COMPAT: &str = r#"kind = "compat"
[grid]
dim = 1
extents = [3.141592653589793]
points = [65]
[profile]
name = "PROFILE"
"#;

#[test]
fn compat_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.toml", &COMPAT.replace("PROFILE", "constant"));
    let out = dir.path().join("good");
    let o = bin().args(["compat", "--config"]).arg(&good).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS compat"));
    let rep: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["kind"], "compat");

    let bad = write_config(dir.path(), "bad.toml", &COMPAT.replace("PROFILE", "equatorial_linear"));
    let o = bin().args(["compat", "--quiet", "--config"]).arg(&bad).arg("--out").arg(dir.path().join("bad")).output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bin().arg("frobnicate").output().unwrap()), 2);
    let o = bin().arg("evolve").output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--config"));

    let broken = write_config(dir.path(), "broken.toml", "kind = \"evolve\"\n[flow]\ndt = \"fast\"\n");
    let o = bin().arg("evolve").arg("--config").arg(&broken).output().unwrap();
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("dt"), "{err}");

    let compat = write_config(dir.path(), "c.toml", &COMPAT.replace("PROFILE", "constant"));
    let o = bin().arg("evolve").arg("--config").arg(&compat).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not match"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.toml",
        "kind = \"eps_sweep\"\n[grid]\ndim = 1\nextents = [3.14]\npoints = [33]\n\
         [profile]\nname = \"equatorial_cos\"\n[flow]\ndt = 1e-4\nt_end = 0.01\nrecord_every = 10\n\
         [sweep]\neps = [0.2, 0.1, 0.05]\n",
    );
    let out = dir.path().join("from-env");
    let o = bin()
        .arg("sweep")
        .arg("--config")
        .arg(&cfg)
        .env("SPHEREFLOW_OUT", &out)
        .env("SPHEREFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("sweep.csv").exists() && out.join("report.json").exists());
}

#[test]
fn converge_runs_without_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("converge").arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("convergence.svg").exists());
}

#[test]
fn selftest_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        let o = bin().args(["selftest", "--seed", "3", "--out"]).arg(d).output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS C")).count(), 11, "{stdout}");
    }
    assert_eq!(fs::read(a.path().join("report.json")).unwrap(), fs::read(b.path().join("report.json")).unwrap());
}

#[test]
fn shipped_configs_run_and_pass() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let cfg = sphereflow::harness::ExperimentConfig::load(&path).unwrap();
        let sub = match cfg.kind.as_str() {
            "convergence" => "converge",
            "eps_sweep" => "sweep",
            other => other,
        }
        .to_string();
        let out = tempfile::tempdir().unwrap();
        let o = bin().arg(&sub).arg("--config").arg(&path).arg("--out").arg(out.path()).output().unwrap();
        assert_eq!(code(&o), 0, "{}: {}{}", path.display(), String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
        // the report's config echo is itself a runnable config
        let rep: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("report.json")).unwrap()).unwrap();
        let echo = sphereflow::harness::ExperimentConfig::from_json(&rep["config"].to_string()).unwrap();
        assert_eq!(echo.kind, cfg.kind);
        seen += 1;
    }
    assert_eq!(seen, 6);
}
