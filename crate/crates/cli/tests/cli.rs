//! End-to-end runs of the `giant-atom` binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_giant-atom"));
    c.env_remove("GIANT_ATOM_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn decay_writes_trajectories_that_reference_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "decay",
        "--d",
        "1,2",
        "--phi-c",
        "0,pi/2",
        "--t-max",
        "5",
        "--out",
        &out_arg(dir.path()),
        "--plot-script",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&dir.path().join("manifest.json"));
    let hash = manifest["manifest_hash"].as_str().unwrap();
    assert_eq!(manifest["cells"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["solvers"], serde_json::json!(["lattice", "dde"]));

    let files = csv_files(dir.path());
    assert_eq!(files.len(), 4 * 2 + 1);
    for (name, bytes) in &files {
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(&format!("# manifest_hash {hash}\n")), "{name}");
    }
    let lattice = String::from_utf8(files["decay_d2_phicpi_2_lattice.csv"].clone()).unwrap();
    let header: Vec<&str> = lattice.lines().filter(|l| !l.starts_with('#')).take(1).collect();
    assert_eq!(header, ["t,re_eps,im_eps,pop,ref_exp,deviation"]);
    assert!(lattice.contains("# solver_tag lattice\n"));
    assert!(lattice.contains("# t_max_valid "));
    assert_eq!(lattice.lines().filter(|l| !l.starts_with('#')).count(), 1 + 501);
    assert!(dir.path().join("decay.gp").exists());
}

#[test]
fn identical_runs_give_identical_csv_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "decay".into(),
            "--d".into(),
            "1,3".into(),
            "--phi-c".into(),
            "0,pi/2,pi".into(),
            "--t-max".into(),
            "4".into(),
            "--solver".into(),
            "lattice,dde,collision".into(),
            "--out".into(),
            out_arg(d),
        ]
    };
    let ra = bin()
        .args(args(a.path()))
        .env("GIANT_ATOM_WORKERS", "1")
        .output()
        .unwrap();
    let rb = bin()
        .args(args(b.path()))
        .env("GIANT_ATOM_WORKERS", "4")
        .output()
        .unwrap();
    assert!(ra.status.success() && rb.status.success());
    assert_eq!(ra.stdout, rb.stdout);
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert_eq!(fa.len(), 3 * 2 * 3 + 1);
    assert_eq!(fa, fb);
}

#[test]
fn json_trajectories_carry_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "decay",
        "--d",
        "2",
        "--phi-c",
        "pi",
        "--t-max",
        "2",
        "--format",
        "json",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success());
    let hash = read_json(&dir.path().join("manifest.json"))["manifest_hash"].clone();
    let lat = read_json(&dir.path().join("decay_d2_phicpi_lattice.json"));
    assert_eq!(lat["manifest_hash"], hash);
    assert_eq!(lat["solver_tag"], "lattice");
    assert!(lat["t_max_valid"].as_f64().unwrap() > 2.0);
    assert_eq!(lat["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(
        lat["t"].as_array().unwrap().len(),
        lat["deviation"].as_array().unwrap().len()
    );
    let dde = read_json(&dir.path().join("decay_d2_phicpi_dde.json"));
    assert_eq!(dde["solver_tag"], "dde");
    assert!(dde["t_max_valid"].is_null());
}

#[test]
fn toml_config_with_pi_strings_runs_as_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("atom.toml");
    std::fs::write(
        &cfg,
        "J = 1.0\ng = 0.2\nomega_a = 0.0\nN = 120\nboundary = \"ring\"\n\
         coupling_points = [ { x = 60, phi = 0 }, { x = 63, phi = \"3*pi/4\" } ]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "decay",
        "--config",
        cfg.to_str().unwrap(),
        "--t-max",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("decay_d3_phic3pi_4_dde.csv").exists());
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["config"]["N"], 120);
}

#[test]
fn markov_solve_prints_rational_phases() {
    let out = run(&["markov-solve", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("phases (0, -pi/4, pi/2)"), "{text}");

    let out = run(&["markov-solve", "4", "--all", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all"].as_array().unwrap().len(), 4);
    assert!(v["canonical"]["max_residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn markov_solve_writes_json_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["markov-solve", "2", "--out", &out_arg(dir.path())]);
    assert!(out.status.success());
    let m = read_json(&dir.path().join("manifest.json"));
    let v = read_json(&dir.path().join("markov_L2.json"));
    assert_eq!(v["manifest_hash"], m["manifest_hash"]);
    assert_eq!(v["canonical"]["phases_text"], serde_json::json!(["0", "pi/2"]));
}

#[test]
fn bic_reports_trapped_population() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bic", "--d", "2", "--phi-c", "0", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = read_json(&dir.path().join("bic_d2_phic0_report.json"));
    assert_eq!(rep["analytic"]["exists"], true);
    assert!((rep["analytic"]["eps_pop"].as_f64().unwrap() - 0.96154).abs() < 1e-5);
    assert_eq!(rep["numerical"]["found"], true);
    let profile = std::fs::read_to_string(dir.path().join("bic_d2_phic0_profile.csv")).unwrap();
    assert!(profile.lines().any(|l| l == "x,re,im,abs2"));

    let out = run(&["bic", "--d", "2", "--phi-c", "pi/2", "--out", &out_arg(dir.path())]);
    assert!(out.status.success());
    let rep = read_json(&dir.path().join("bic_d2_phicpi_2_report.json"));
    assert_eq!(rep["analytic"]["exists"], false);
    assert!(!dir.path().join("bic_d2_phicpi_2_profile.csv").exists());
}

#[test]
fn collision_bins_block_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    assert!(run(&["collision", "--t-max", "2", "--format", "json", "--out", &d])
        .status
        .success());
    let plain = read_json(&dir.path().join("collision_d2_phicpi_2.json"));
    assert!(plain.get("bins").is_none());
    assert!(
        run(&["collision", "--t-max", "2", "--format", "json", "--bins", "--out", &d])
            .status
            .success()
    );
    let with = read_json(&dir.path().join("collision_d2_phicpi_2.json"));
    assert_eq!(with["bins"]["ell"], 100);
    assert!(with["bins"]["right_bins"].as_array().unwrap().len() > 100);
    assert_eq!(run(&["collision", "--bins"]).status.code(), Some(2));
}

#[test]
fn chirality_reports_fractions_and_field_components() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "chirality",
        "--d",
        "1",
        "--phi-c",
        "pi/6",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("chirality.csv")).unwrap();
    for row in table.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = row.split(',').collect();
        let (fwd, bwd): (f64, f64) = (cols[3].parse().unwrap(), cols[4].parse().unwrap());
        assert!(fwd > bwd && bwd > 0.0, "{row}");
    }
    let field = std::fs::read_to_string(dir.path().join("chirality_d1_phicpi_6_field.csv")).unwrap();
    let header = field.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header.split(',').count(), 13);
}

#[test]
fn crossvalidate_emits_a_deviation_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "crossvalidate",
        "--d",
        "2",
        "--phi-c",
        "pi/2",
        "--t-max",
        "10",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success());
    let rep = read_json(&dir.path().join("crossvalidate.json"));
    let pairs = rep["cells"][0]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    let dde_col = pairs.iter().find(|p| p["a"] == "dde" && p["b"] == "collision").unwrap();
    assert!(dde_col["max_pop_gap"].as_f64().unwrap() < 1e-3);
}

#[test]
fn usage_and_runtime_errors_have_distinct_exit_codes() {
    assert_eq!(run(&["markov-solve", "9"]).status.code(), Some(2));
    assert_eq!(run(&["decay", "--d", "0"]).status.code(), Some(2));
    assert_eq!(run(&["decay", "--solver", "magic"]).status.code(), Some(2));
    assert_eq!(run(&["bic", "--solver", "dde"]).status.code(), Some(2));
    let missing = run(&["decay", "--config", "/definitely/not/here.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/definitely/not/here.toml"));
    let bad = bin()
        .args(["markov-solve", "2"])
        .env("GIANT_ATOM_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
