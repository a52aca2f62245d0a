use std::fs;

use sphereflow::harness::{run, ExperimentConfig};

fn config(body: &str, dir: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_toml(body).unwrap();
    c.out_dir = Some(dir.to_path_buf());
    c
}

const LINE: &str = r#"
[grid]
dim = 1
extents = [3.141592653589793]
points = [65]
"#;

#[test]
fn constant_data_is_compatible_to_order_three() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("kind = \"compat\"\n{LINE}\n[profile]\nname = \"constant\"\n[compat]\norder = 3\n");
    let rep = run(&config(&body, dir.path())).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.checks[0].conditions.len(), 8);
    for f in ["compat.json", "compat.csv", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn linear_data_fails_compat() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("kind = \"compat\"\n{LINE}\n[profile]\nname = \"equatorial_linear\"\n");
    let rep = run(&config(&body, dir.path())).unwrap();
    assert!(!rep.passed());
    // the verdicts still agree
    assert!(rep.checks[1].pass);
}

#[test]
fn helical_convergence_study() {
    let dir = tempfile::tempdir().unwrap();
    let body = "kind = \"convergence\"\n[convergence]\nt_end = 0.1\ntime_t_end = 0.4\n";
    let rep = run(&config(body, dir.path())).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(fs::read_to_string(dir.path().join("convergence.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn eps_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "kind = \"eps_sweep\"\n{LINE}\n[profile]\nname = \"equatorial_cos\"\nparams = {{ a = 0.5, m = 2 }}\n\
         [flow]\ndt = 1e-4\nt_end = 0.05\nrecord_every = 50\n[sweep]\neps = [0.2, 0.1, 0.05]\n"
    );
    let rep = run(&config(&body, dir.path())).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn evolve_outputs_are_deterministic() {
    let body = format!(
        "kind = \"evolve\"\nseed = 4\n{LINE}\n[profile]\nname = \"random_smooth\"\nparams = {{ seed = 4 }}\n\
         [flow]\nepsilon = 0.1\ndt = 1e-4\nt_end = 0.01\n"
    );
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run(&config(&body, a.path())).unwrap();
    run(&config(&body, b.path())).unwrap();
    assert!(ra.passed(), "{ra:?}");
    for f in ["trace.csv", "final.csv", "final.field"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    // report differs only through the echoed output directory
    let strip = |p: &std::path::Path| {
        let mut v: serde_json::Value = serde_json::from_slice(&fs::read(p.join("report.json")).unwrap()).unwrap();
        v["config"]["out_dir"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn linearized_and_galerkin_runs() {
    let dir = tempfile::tempdir().unwrap();
    let base = format!(
        "{LINE}\n[profile]\nname = \"equatorial_cos\"\nparams = {{ a = 0.3 }}\n[flow]\ndt = 1e-4\nt_end = 0.01\nrecord_every = 10\n"
    );
    let rep = run(&config(&format!("kind = \"linearized\"\n{base}"), dir.path())).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(dir.path().join("linearized.csv").exists());
    let rep = run(&config(&format!("kind = \"galerkin\"\n{base}\n[galerkin]\nepsilon = 0.1\nn = 8\n"), dir.path())).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(fs::read_to_string(dir.path().join("galerkin.csv")).unwrap().starts_with("t,g0_x"));
}

#[test]
fn downstream_errors_carry_context() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("kind = \"evolve\"\n{LINE}\n[profile]\nname = \"constant\"\n[flow]\ndt = 1.0\nt_end = 1.0\n");
    let e = run(&config(&body, dir.path())).unwrap_err().to_string();
    assert!(e.starts_with("evolve:") && e.contains("stability"), "{e}");
    let body = format!("kind = \"evolve\"\n{LINE}\n[profile]\nname = \"nope\"\n");
    assert!(run(&config(&body, dir.path())).unwrap_err().to_string().contains("nope"));
}

#[test]
fn loads_field_files_relative_to_config() {
    use sphereflow::state::{io::save_field, make_grid, BoundaryMode, Vec3Field};
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(1, &[std::f64::consts::PI], &[65], BoundaryMode::NeumannMirror).unwrap();
    save_field(dir.path().join("u0.field"), &Vec3Field::constant(g, [0.0, 0.0, 1.0])).unwrap();
    let cfg_path = dir.path().join("exp.toml");
    fs::write(&cfg_path, format!("kind = \"compat\"\ninitial_file = \"u0.field\"\n{LINE}")).unwrap();
    let mut cfg = ExperimentConfig::load(&cfg_path).unwrap();
    cfg.out_dir = Some(dir.path().join("out"));
    assert!(run(&cfg).unwrap().passed());
    let json = dir.path().join("exp.json");
    fs::write(&json, "{\"kind\": \"compat\",\n\"grid\": {\"dim\": 1, \"extents\": [1.0], \"points\": [9], \"bogus\": 1}}").unwrap();
    let e = ExperimentConfig::load(&json).unwrap_err().to_string();
    assert!(e.contains("bogus") && e.contains("line 2"), "{e}");
}
