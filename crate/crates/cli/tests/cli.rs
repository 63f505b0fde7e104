//! End-to-end checks of the binary: exit codes, report artifacts, and the
//! documented interface behaviors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lwsurf")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lwsurf_cli_{}_{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(bin()).args(args).current_dir(dir).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const TORUS_VALIDATE: &str = r#"{
  "surface": {"family": "torus", "major_radius": 2.0, "minor_radius": 1.0},
  "domain": {"n_alpha": 64, "n_beta": 64},
  "boundary": {"kind": "closed"},
  "displacement": {"kind": "seeded_random", "seed": 1},
  "output_stem": "t"
}"#;

#[test]
fn validate_passes_on_torus() {
    let dir = scratch("validate");
    fs::write(dir.join("c.json"), TORUS_VALIDATE).unwrap();
    let (code, stdout, _) = run(&["validate", "--config", "c.json", "--out", "out"], &dir);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("pass gmc_analytic_res1"));
    let report = fs::read_to_string(dir.join("out/t_validate.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    assert!(v["config"]["surface"]["family"] == "torus", "report embeds the resolved config");
}

#[test]
fn validate_fails_on_corrupted_sign_convention() {
    let dir = scratch("negctl");
    let config = TORUS_VALIDATE.replace(
        "\"output_stem\": \"t\"",
        "\"output_stem\": \"t\",\n  \"negative_control_flip_kc\": true",
    );
    fs::write(dir.join("c.json"), config).unwrap();
    let (code, stdout, _) = run(&["validate", "--config", "c.json", "--out", "out"], &dir);
    assert_eq!(code, 1, "corrupted convention must fail the residual gate");
    assert!(stdout.contains("FAIL gmc_analytic_res1"), "{stdout}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = scratch("badjson");
    fs::write(dir.join("c.json"), "{\"surface\": {\"family\": \"sphere\"").unwrap();
    let (code, _, stderr) = run(&["validate", "--config", "c.json"], &dir);
    assert_eq!(code, 2);
    assert!(stderr.contains("c.json"), "message names the config path: {stderr}");

    // unknown keys are schema violations too
    fs::write(
        dir.join("k.json"),
        r#"{"surface": {"family": "sphere", "radius": 1.0}, "typo_field": 3}"#,
    )
    .unwrap();
    let (code, _, stderr) = run(&["validate", "--config", "k.json"], &dir);
    assert_eq!(code, 2);
    assert!(stderr.contains("typo_field"), "{stderr}");

    let (code, _, _) = run(&["validate", "--config", "missing.json"], &dir);
    assert_eq!(code, 2);

    let (code, _, _) = run(&["frobnicate", "--config", "c.json"], &dir);
    assert_eq!(code, 2, "unknown subcommand");
}

#[test]
fn vary_band_has_nonzero_boundary_and_agrees() {
    let dir = scratch("varyband");
    fs::write(
        dir.join("c.json"),
        r#"{
  "surface": {"family": "sphere", "radius": 1.0},
  "domain": {"n_alpha": 96, "n_beta": 96,
             "alpha_range": [0.7853981633974483, 2.356194490192345],
             "pole_alpha_start": false, "pole_alpha_end": false},
  "boundary": {"kind": "all_open"},
  "displacement": {"kind": "seeded_random", "seed": 3},
  "coefficients": {"a": 1.0, "b": 0.5, "c": -0.25},
  "output_stem": "band"
}"#,
    )
    .unwrap();
    let (code, stdout, stderr) = run(&["vary", "--config", "c.json", "--out", "out"], &dir);
    assert_eq!(code, 0, "{stdout}\n{stderr}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/band_vary.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!(row["pass"].as_bool().unwrap());
        assert!(
            row["boundary"].as_f64().unwrap().abs() > 1e-6,
            "open patch has nonzero boundary terms: {row}"
        );
    }
    // CSV table mirrors the rows
    let csv = fs::read_to_string(dir.join("out/band_vary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn flow_zero_steps_exits_3_with_single_record() {
    let dir = scratch("flow0");
    fs::write(
        dir.join("c.json"),
        r#"{
  "flow": {
    "profile": {"preset": "perturbed_sphere", "radius": 1.0, "mode": 2, "amplitude": 0.05, "samples": 100},
    "coefficients": {"a": 0.0, "b": 1.0, "c": -2.0},
    "step_size": 1e-4, "max_steps": 0, "residual_tolerance": 1e-3
  },
  "output_stem": "f"
}"#,
    )
    .unwrap();
    let (code, stdout, _) = run(&["flow", "--config", "c.json", "--out", "out"], &dir);
    assert_eq!(code, 3, "{stdout}");
    let trace = fs::read_to_string(dir.join("out/f_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2, "header plus the single initial record");
}

#[test]
fn flow_converges_from_mild_start() {
    // small perturbation well within reach of the step budget
    let dir = scratch("flowok");
    fs::write(
        dir.join("c.json"),
        r#"{
  "flow": {
    "profile": {"preset": "perturbed_sphere", "radius": 1.0, "mode": 3, "amplitude": 0.002, "samples": 120},
    "coefficients": {"a": 0.0, "b": 1.0, "c": -2.0},
    "step_size": 2e-4, "max_steps": 2000, "residual_tolerance": 2e-3,
    "snapshot_every": 200
  },
  "output_stem": "ok"
}"#,
    )
    .unwrap();
    let (code, stdout, stderr) = run(&["flow", "--config", "c.json", "--out", "out"], &dir);
    assert_eq!(code, 0, "{stdout}\n{stderr}");
    assert!(stdout.contains("converged"));
    assert!(dir.join("out/ok_profiles.svg").exists());
    assert!(dir.join("out/ok_snapshots.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/ok_flow.json")).unwrap()).unwrap();
    assert!(report["converged"].as_bool().unwrap());
}

#[test]
fn export_writes_obj_and_round_trip_csv() {
    let dir = scratch("export");
    fs::write(
        dir.join("c.json"),
        r#"{
  "surface": {"family": "torus", "major_radius": 2.0, "minor_radius": 1.0},
  "domain": {"n_alpha": 64, "n_beta": 64},
  "displacement": {"kind": "seeded_random", "seed": 5},
  "export": {"obj": true, "frame_csv": true, "displacement_csv": true},
  "output_stem": "mesh"
}"#,
    )
    .unwrap();
    let (code, _, stderr) = run(&["export", "--config", "c.json", "--out", "out", "--threads", "2"], &dir);
    assert_eq!(code, 0, "{stderr}");
    let obj = fs::read_to_string(dir.join("out/mesh.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4096);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 4096);

    // the exported displacement grid reloads bit-exactly
    let family = lwsurf_core::SurfaceFamily::torus(2.0, 1.0).unwrap();
    let domain = family.natural_domain(64, 64).unwrap();
    let csv = fs::read_to_string(dir.join("out/mesh_displacement.csv")).unwrap();
    let loaded = lwsurf_core::io::displacement_from_csv(&domain, &csv).unwrap();
    let original = lwsurf_core::fields::DisplacementField::seeded_random(&domain, 5, 4);
    assert_eq!(loaded.tangent.v1, original.tangent.v1);
    assert_eq!(loaded.vn.values, original.vn.values);
}
