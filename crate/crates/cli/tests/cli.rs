use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const PRESETS: [&str; 9] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

fn exciton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exciton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

/// Runs `body` into `dir/out` and returns the output directory.
fn run_ok(dir: &Path, body: &str) -> PathBuf {
    let cfg = write_config(dir, body);
    let out = dir.join("out");
    let o = exciton(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "run failed: {}", stderr(&o));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn manifest_paths(out: &Path) -> Vec<String> {
    json(&out.join("manifest.json"))["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_string())
        .collect()
}

const CHAIN: &str = r#"
[lattice]
extent = [41]
spacing = "400 nm"

[coupling]
kind = "dipolar"
alpha = "22.83 kHz"
site_energy = "12.14 GHz"
theta = "90 deg"
truncation = 5
gauge = true
"#;

const SQUARE: &str = r#"
[lattice]
extent = [15, 15]
spacing = "400 nm"

[coupling]
kind = "dipolar"
alpha = "22.83 kHz"
site_energy = "12.14 GHz"
theta = "90 deg"
truncation = 3
gauge = true
"#;

#[test]
fn every_preset_validates() {
    for p in PRESETS {
        let o = exciton(&["validate", "--preset", p]);
        assert!(o.status.success(), "{p}: {}", stderr(&o));
    }
}

#[test]
fn list_presets_names_all_of_them() {
    let o = exciton(&["list-presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for p in PRESETS {
        assert!(text.lines().any(|l| l.starts_with(p)), "missing {p}");
    }
    let shown = exciton(&["list-presets", "--show", "fig2"]);
    assert!(String::from_utf8(shown.stdout).unwrap().contains("experiment = \"focus1d\""));
}

#[test]
fn empty_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = exciton(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for key in ["experiment", "lattice.extent", "coupling.alpha"] {
        assert!(err.contains(key), "{key} not reported in {err}");
    }
}

#[test]
fn conflicting_layers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[run]\nduration = \"10 us\"\n");
    let o = exciton(&["validate", "--preset", "fig1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("run.duration") && err.contains("fig1"), "{err}");
}

#[test]
fn user_file_may_extend_a_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 7\n");
    let o = exciton(&["validate", "--preset", "fig6", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn unknown_preset_and_unknown_key_exit_2() {
    let o = exciton(&["validate", "--preset", "fig42"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig1"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("experiment = \"dispersion\"\ncolour = 3\n{CHAIN}"));
    let o = exciton(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn bare_numbers_need_units() {
    let dir = tempfile::tempdir().unwrap();
    let body = CHAIN.replace("\"22.83 kHz\"", "22830");
    let cfg = write_config(dir.path(), &format!("experiment = \"dispersion\"\n{body}"));
    let o = exciton(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("coupling.alpha"));
}

#[test]
fn run_without_output_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("experiment = \"dispersion\"\n{CHAIN}"));
    let o = exciton(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("output"));
}

#[test]
fn site_outside_the_lattice_is_caught_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"focus1d\"\n{CHAIN}\n[packet]\nkind = \"single_site\"\ncenter = [60]\n\
         [protocol]\nkind = \"lens\"\nphi0 = 0.01\n[run]\nduration = \"10 us\"\n"
    );
    let cfg = write_config(dir.path(), &body);
    let o = exciton(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("packet.center"));
}

#[test]
fn numerical_failure_exits_3() {
    // no step size reaches this local error
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"kick\"\n{CHAIN}\n[packet]\nkind = \"gaussian\"\nwidth = 5\n\
         [pulse]\nkind = \"dc\"\nduration = \"2 us\"\nfield = \"1 kV/cm\"\ngradient = \"0.5 V/cm\"\n\
         [run]\nduration = \"3 us\"\nsamples = 2\n"
    );
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let args = ["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tolerance", "1e-300"];
    let o = exciton(&args);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("tolerance"));
}

#[test]
fn dispersion_run_writes_band_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(dir.path(), &format!("experiment = \"dispersion\"\n{CHAIN}\n[run]\nsamples = 33\n"));
    let csv = std::fs::read_to_string(out.join("dispersion.csv")).unwrap();
    assert!(csv.starts_with("ak_x,ak_y,energy_rad_s,nearest_neighbor_rad_s\n"));
    assert_eq!(csv.lines().count(), 34);
    let summary = json(&out.join("summary.json"));
    assert!(summary["bandwidth_rad_s"].as_f64().unwrap() > 0.0);

    // every listed file exists with the recorded checksum and size
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["experiment"], "dispersion");
    let files = manifest["files"].as_array().unwrap();
    let paths: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);
    for f in files {
        let bytes = std::fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn kick_mask_moves_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"kick\"\n{CHAIN}\n[packet]\nkind = \"gaussian\"\nwidth = 5\n\
         [protocol]\nkind = \"kick\"\nshift = [0.8]\n[run]\nduration = \"20 us\"\nsamples = 5\n"
    );
    let out = run_ok(dir.path(), &body);
    let s = json(&out.join("summary.json"));
    assert!((s["shift_measured_ak"].as_f64().unwrap() - 0.8).abs() < 1e-6, "{s}");
    for f in ["trajectory.csv", "realspace.csv", "kspace.csv", "mask.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn dc_pulse_kick_matches_its_analytic_shift() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"kick\"\n{CHAIN}\n[packet]\nkind = \"gaussian\"\nwidth = 5\n\
         [pulse]\nkind = \"dc\"\nstart = \"1 us\"\nduration = \"2 us\"\nfield = \"1 kV/cm\"\n\
         gradient = \"0.5 V/cm\"\norigin = 20\n[run]\nduration = \"5 us\"\nsamples = 6\n"
    );
    let out = run_ok(dir.path(), &body);
    let s = json(&out.join("summary.json"));
    let (measured, analytic) = (s["shift_measured_ak"].as_f64().unwrap(), s["shift_analytic_ak"].as_f64().unwrap());
    assert!(analytic.abs() > 0.05, "{s}");
    assert!((measured / analytic - 1.0).abs() < 0.05, "{s}");
    assert!(s["integrator"]["accepted"].as_u64().unwrap() > 0);
}

#[test]
fn focus1d_concentrates_probability() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"focus1d\"\n{CHAIN}\n[packet]\nkind = \"uniform\"\n\
         [protocol]\nkind = \"lens\"\nphi0 = \"optimal\"\n[run]\nduration = \"400 us\"\nsamples = 81\n"
    );
    let out = run_ok(dir.path(), &body);
    let s = json(&out.join("summary.json"));
    assert_eq!(s["target"], serde_json::json!([20, 0]));
    assert!(s["eta"].as_f64().unwrap() > 3.0, "{s}");
}

#[test]
fn focus2d_writes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"focus2d\"\n{SQUARE}\n[packet]\nkind = \"gaussian\"\nwidth = 3\n\
         [protocol]\nkind = \"lens\"\nphi0 = \"optimal\"\n[run]\nduration = \"30 us\"\nsamples = 7\nsnapshot_stride = 3\n"
    );
    let out = run_ok(dir.path(), &body);
    let grid = std::fs::read_to_string(out.join("grids/focus_probability.txt")).unwrap();
    assert_eq!(grid.lines().count(), 15);
    assert!(grid.lines().all(|l| l.split_whitespace().count() == 15));
    let paths = manifest_paths(&out);
    assert!(paths.contains(&"grids/probability_0003.txt".to_string()), "{paths:?}");
}

#[test]
fn steer_reverses_with_the_field_angle() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"steer\"\n{CHAIN}\n[packet]\nkind = \"gaussian\"\nwidth = 4\ncarrier = [-1.0471975511965976]\n\
         [steering]\ntheta_grid = [\"0 deg\", \"90 deg\"]\n\
         points = [{{ time = \"0 us\", theta = \"90 deg\" }}, {{ time = \"10 us\", theta = \"0 deg\" }}]\n\
         [run]\nduration = \"20 us\"\nsamples = 11\n"
    );
    let out = run_ok(dir.path(), &body);
    let s = json(&out.join("summary.json"));
    let dx = |i: usize| s["theta_grid"][i]["displacement_sites"][0].as_f64().unwrap();
    assert!(dx(0) * dx(1) < 0.0, "{s}");
    let schedule = std::fs::read_to_string(out.join("schedule.csv")).unwrap();
    assert!(schedule.lines().next().unwrap().ends_with("theta_deg,phi_deg"));
}

#[test]
fn vacancy_scan_is_reproducible() {
    let body = format!(
        "experiment = \"vacancy_scan\"\nseed = 3\n{SQUARE}\n[packet]\nkind = \"gaussian\"\nwidth = 3\n\
         [protocol]\nkind = \"lens\"\nphi0 = \"optimal\"\n\
         [ensemble]\nvacancies = [0.0, 0.2]\nrealizations = 3\ntarget = [7, 7]\n\
         scan_window = \"20 us\"\nscan_samples = 12\ngrids = true\n"
    );
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (oa, ob) = (run_ok(a.path(), &body), run_ok(b.path(), &body));
    let paths = manifest_paths(&oa);
    for f in ["vacancy_scan.csv", "realizations.csv", "focus_scan.csv", "vacancy_0.2/occupancy.txt"] {
        assert!(paths.iter().any(|p| p == f), "{f} missing from {paths:?}");
    }
    for p in &paths {
        if p == "config.resolved.json" {
            continue; // records the output path
        }
        assert_eq!(std::fs::read(oa.join(p)).unwrap(), std::fs::read(ob.join(p)).unwrap(), "{p} differs");
    }
    let rows = std::fs::read_to_string(oa.join("realizations.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
}

#[test]
fn block_focus_runs_on_a_small_array() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "experiment = \"block_focus\"\n{SQUARE}\n[packet]\nkind = \"uniform\"\n\
         [ensemble]\nvacancies = [0.3]\nrealizations = 2\ntarget = [7, 7]\nhorizon = \"100 us\"\nblock = [5, 5]\ngrids = true\n"
    );
    let out = run_ok(dir.path(), &body);
    let s = json(&out.join("summary.json"));
    assert_eq!(s["blocks"], 9);
    let gain = s["scans"][0]["gain"]["mean"].as_f64().unwrap();
    assert!(gain >= 1.0 - 1e-9, "{s}");
    assert!(out.join("vacancy_0.3/block_phases.txt").exists());
}

#[test]
fn seed_flag_overrides_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("experiment = \"dispersion\"\n{CHAIN}\n[run]\nsamples = 5\n");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("out");
    let o = exciton(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&out.join("manifest.json"))["seed"], 11);
    assert_eq!(json(&out.join("config.resolved.json"))["seed"], 11);
}
