use std::path::Path;
use std::process::{Command, Output};

fn phasegate(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasegate"))
        .args(args)
        .current_dir(dir)
        .env_remove("PHASEGATE_THREADS")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn synthesize_hadamard3_meets_floor() {
    let dir = tempfile::tempdir().unwrap();
    let o = phasegate(&["synthesize", "--target", "hadamard3", "--layers", "3", "--guard", "2", "--seed", "7", "-o", "h3.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("h3.json"));
    assert!(r["metrics"]["fidelity"].as_f64().unwrap() >= 0.999);
    assert_eq!(r["provenance"]["seed"], 7);

    let v = phasegate(&["verify", "h3.json", "--mode", "path"], dir.path());
    assert_eq!(code(&v), 0);
    let out: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    assert!(out["phase_test_fidelity"].as_f64().unwrap() >= 0.999);
    assert!(out["model_agreement"].as_f64().unwrap() >= 0.995);
}

#[test]
fn identity_gives_zero_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = phasegate(&["synthesize", "--target", "identity", "--n", "2", "--restarts", "2", "-o", "id.json"], dir.path());
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("id.json"));
    for s in r["params"]["series"].as_array().unwrap() {
        assert!(s["amplitudes"].as_array().unwrap().iter().all(|a| a.as_f64() == Some(0.0)));
    }
    for g in r["params"]["shapers"].as_array().unwrap() {
        assert!(g["phases"].as_array().unwrap().iter().all(|a| a.as_f64() == Some(0.0)));
    }
}

#[test]
fn random_target_reports_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = phasegate(&["synthesize", "--target", "random-haar", "--n", "3", "--seed", "11", "--restarts", "6", "-o", out], dir.path());
        assert!(matches!(code(&o), 0 | 3));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_abstract_reproduces_stored_metrics() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&phasegate(&["synthesize", "--target", "hadamard2", "--restarts", "4", "-o", "h2.json"], dir.path())), 0);
    let r = json(&dir.path().join("h2.json"));
    let v = phasegate(&["verify", "h2.json"], dir.path());
    let out: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    for key in ["fidelity", "probability"] {
        assert!((out[key].as_f64().unwrap() - r["metrics"][key].as_f64().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&phasegate(&["synthesize", "--target", "bogus"], dir.path())), 2);
    assert_eq!(code(&phasegate(&["synthesize", "--layers", "4"], dir.path())), 2);
    assert_eq!(code(&phasegate(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&phasegate(&["verify", "missing.json"], dir.path())), 2);
    std::fs::write(dir.path().join("bad.toml"), "[window]\nguard = \"two\"\n").unwrap();
    assert_eq!(code(&phasegate(&["synthesize", "--config", "bad.toml"], dir.path())), 2);
    let infeasible = phasegate(
        &["synthesize", "--target", "hadamard3", "--k", "4", "--guard", "0", "--restarts", "1", "-o", "x.json"],
        dir.path(),
    );
    assert_eq!(code(&infeasible), 3);
    assert!(dir.path().join("x.json").exists());
    let threads = Command::new(env!("CARGO_BIN_EXE_phasegate"))
        .args(["report", "x.json"])
        .current_dir(dir.path())
        .env("PHASEGATE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);
}

#[test]
fn config_file_drives_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[target]\nname = \"dft2\"\n[window]\nk = 32\nguard = 2\n[optimizer]\nrestarts = 4\nseed = 5\n",
    )
    .unwrap();
    let o = phasegate(&["synthesize", "--config", "run.toml", "-o", "r.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["spec"]["window"]["k"], 32);
    assert_eq!(r["provenance"]["seed"], 5);
    let text = phasegate(&["report", "r.json"], dir.path());
    assert!(String::from_utf8_lossy(&text.stdout).contains("dft2"));
}

#[test]
fn sweeps_write_stable_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&phasegate(&["synthesize", "--target", "hadamard2", "--restarts", "4", "-o", "h2.json"], dir.path())), 0);
    let g = phasegate(&["sweep", "guard", "--report", "h2.json", "--d", "2,3", "-o", "g.csv"], dir.path());
    assert_eq!(code(&g), 0, "{}", String::from_utf8_lossy(&g.stderr));
    let csv = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("policy,guard,fidelity,probability,converged"));
    assert_eq!(lines.count(), 4);

    let s = phasegate(&["sweep", "separation", "--report", "h2.json", "--separations", "3,6"], dir.path());
    let out = String::from_utf8_lossy(&s.stdout);
    assert!(out.starts_with("separation,worst_fidelity,off_block_fraction,replica_0,replica_1"));
    assert_eq!(out.lines().count(), 3);
    assert_eq!(code(&phasegate(&["sweep", "separation"], dir.path())), 2);
}

#[test]
fn parallelize_and_reject_overlap() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&phasegate(&["synthesize", "--target", "hadamard2", "--restarts", "4", "-o", "h2.json"], dir.path())), 0);
    let o = phasegate(&["parallelize", "h2.json", "--centers", "28,34", "-o", "dual.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("dual.json"));
    assert_eq!(r["spec"]["window"]["channel_indices"], serde_json::json!([28, 29, 34, 35]));
    assert_eq!(r["replica_shifts"], serde_json::json!([-4, 2]));
    let v = phasegate(&["verify", "dual.json"], dir.path());
    assert_eq!(code(&v), 0);
    assert_eq!(code(&phasegate(&["parallelize", "h2.json", "--centers", "30,32"], dir.path())), 2);
}

#[test]
fn export_writes_masks() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&phasegate(&["synthesize", "--target", "hadamard2", "--restarts", "4", "-o", "h2.json"], dir.path())), 0);
    let o = phasegate(&["export-masks", "h2.json", "--out-dir", "m"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for stem in ["sorter_phi1", "sorter_phi2", "angle_0", "angle_1", "shaper_0"] {
        let pgm = std::fs::read(dir.path().join("m").join(format!("{stem}.pgm"))).unwrap();
        assert!(pgm.starts_with(b"P5\n1080 1080\n255\n"));
        assert_eq!(pgm.len(), 17 + 1080 * 1080);
        let side = json(&dir.path().join("m").join(format!("{stem}.json")));
        assert_eq!(side["width"], 1080);
    }
}
