use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn genmom(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genmom")).arg("--out-dir").arg(out).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV written by the tool (header comment and column line skipped).
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn virial_suite_passes_with_small_residual() {
    let dir = tempfile::tempdir().unwrap();
    let o = genmom(dir.path(), &["verify", "--suite", "virial"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("verify_virial.json"));
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["pass"], true);
}

#[test]
fn empty_config_is_a_configuration_error_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let o = genmom(dir.path(), &["--config", cfg.to_str().unwrap(), "verify", "--suite", "virial"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty.toml:1:"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[exact]\nt_end = 2.0\n\n[simulate]\ncellz = 10\n").unwrap();
    let o = genmom(dir.path(), &["--config", cfg.to_str().unwrap(), "exact"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.toml:5:") && err.contains("cellz"), "{err}");
}

#[test]
fn exact_gaussian_writes_a_monotone_trajectory_from_b_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = genmom(dir.path(), &["exact", "--shape", "gaussian", "--t-end", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let traj = rows(&dir.path().join("deformation.csv"));
    assert!(traj.len() > 10);
    assert_eq!(traj[0][0], 0.0);
    assert_eq!(traj[0][2], 0.0);
    assert!(traj.windows(2).all(|w| w[1][0] > w[0][0]));
    assert_eq!(traj.last().unwrap()[0], 10.0);
    let summary = json(&dir.path().join("exact.json"));
    // K = (3/2) sqrt(2) pi^(3/2) s with s = sqrt(pi/2)/4 for the Gaussian template
    let s = (std::f64::consts::PI / 2.0).sqrt() / 4.0;
    let k = 1.5 * 2f64.sqrt() * std::f64::consts::PI.powf(1.5) * s;
    assert!((summary["K"].as_f64().unwrap() - k).abs() < 1e-6 * k);
    assert_eq!(summary["m_exp"].as_f64().unwrap(), 4.0);
    assert!(summary["residuals"]["mass_momentum"].as_f64().unwrap() < 1e-6);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["exact", "--t-end", "1", "--times", "0,0.5", "--profile-cells", "400"];
    assert!(genmom(a.path(), &args).status.success());
    assert!(genmom(b.path(), &args).status.success());
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn every_artifact_carries_version_and_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    assert!(genmom(dir.path(), &["exact", "--t-end", "1", "--times", "0.5", "--profile-cells", "400"])
        .status
        .success());
    let header = fs::read_to_string(dir.path().join("deformation.csv")).unwrap();
    let first = header.lines().next().unwrap().to_string();
    assert!(first.starts_with("# genmom 0.1.0 config="), "{first}");
    let hash = first.rsplit('=').next().unwrap();
    assert_eq!(hash.len(), 16);
    let snap = fs::read_to_string(dir.path().join("snapshot_000.csv")).unwrap();
    assert_eq!(snap.lines().next().unwrap(), first);
    for name in ["exact.json", "snapshot_000.json"] {
        let v = json(&dir.path().join(name));
        assert_eq!(v["meta"]["config"], hash);
        assert_eq!(v["meta"]["version"], "0.1.0");
    }
    // a different setting changes the hash
    let other = tempfile::tempdir().unwrap();
    assert!(genmom(other.path(), &["exact", "--t-end", "2", "--profile-cells", "400"]).status.success());
    assert_ne!(json(&other.path().join("exact.json"))["meta"]["config"], hash);
}

#[test]
fn config_values_apply_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(&cfg, "[run]\nout_dir = \"from-config\"\n[exact]\nt_end = 3.0\n[flow]\nprofile_cells = 400\n").unwrap();
    let o =
        Command::new(env!("CARGO_BIN_EXE_genmom")).args(["--config", cfg.to_str().unwrap(), "exact"]).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("from-config");
    assert_eq!(json(&out.join("exact.json"))["t_end"].as_f64(), Some(3.0));

    let o = genmom(&out, &["--config", cfg.to_str().unwrap(), "exact", "--t-end", "1.5"]);
    assert!(o.status.success());
    assert_eq!(json(&out.join("exact.json"))["t_end"].as_f64(), Some(1.5));
}

#[test]
fn snapshot_pipeline_through_momenta_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = genmom(
        &d.join("exact"),
        &["exact", "--profile", "pointwise", "--a0", "0.2", "--t-end", "1", "--times", "0,1", "--profile-cells", "800"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = d.join("exact/snapshot_001.csv");

    let o = genmom(&d.join("m"), &["momenta", "--snapshot", snap.to_str().unwrap(), "--max-residual", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = json(&d.join("m/momenta.json"));
    for key in ["G", "G_rate", "I1", "I2", "I3", "I4", "residual"] {
        assert!(m[key].is_number(), "{key}");
    }
    assert_eq!(m["t"].as_f64(), Some(1.0));

    let o = genmom(
        &d.join("s"),
        &[
            "simulate",
            "--snapshot",
            d.join("exact/snapshot_000.csv").to_str().unwrap(),
            "--cells",
            "100",
            "--t-end",
            "0.2",
            "--out-every",
            "0.1",
            "--max-mass-drift",
            "1e-10",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let log = fs::read_to_string(d.join("s/conservation.csv")).unwrap();
    assert_eq!(log.lines().nth(1), Some("t,mass,outflow,E_k,E_i,G"));
    let log = rows(&d.join("s/conservation.csv"));
    assert_eq!(log.iter().map(|r| r[0]).collect::<Vec<_>>(), [0.0, 0.1, 0.2]);
    for k in 0..3 {
        assert!(d.join(format!("s/sim_{k:04}.csv")).exists());
        assert!(d.join(format!("s/sim_{k:04}.json")).exists());
    }
}

#[test]
fn bounds_certificate_and_expectation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("class.toml");
    fs::write(
        &spec,
        "class = \"ns0\"\nalpha = [-3.0, -4.0, -6.0, -4.0, 0.0]\nr0 = 1.0\nepsilon = 1.0\n\n[envelopes]\nv = { kind = \"const\", value = 1.0 }\nrho = { kind = \"const\", value = 1.0 }\n",
    )
    .unwrap();
    let base =
        ["bounds", "--spec", spec.to_str().unwrap(), "--energy", "1", "--g0", "1", "--g0-rate", "0", "--mass", "1"];
    let o = genmom(dir.path(), &[&base[..], &["--expect", "contradiction"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert = json(&dir.path().join("certificate.json"));
    let t_star = cert["t_star"].as_f64().unwrap();
    assert!(t_star > 0.0 && t_star < 1e6);
    let table = rows(&dir.path().join("bounds.csv"));
    let last = table.last().unwrap();
    assert!((last[0] - t_star).abs() <= 1e-12 * t_star);
    assert!(last[1] >= last[2] * (1.0 - 1e-6));

    let o = genmom(dir.path(), &[&base[..], &["--expect", "none"]].concat());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn volume_tracks_a_sphere_and_rejects_an_inside_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = genmom(
        dir.path(),
        &["volume", "--x0", "4,0,0", "--t-end", "0.5", "--dt", "0.05", "--n-lat", "8", "--n-lon", "16"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let series = rows(&dir.path().join("volume.csv"));
    assert_eq!(series.len(), 11);
    assert_eq!(series.last().unwrap()[0], 0.5);
    let surface = rows(&dir.path().join("surface.csv"));
    assert_eq!(surface.len(), 8 * 16 + 2 - 16);

    let o = genmom(dir.path(), &["volume", "--x0", "0.1,0,0", "--field", "still"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn bad_flag_values_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(genmom(dir.path(), &["exact", "--variant", "nope"]).status.code(), Some(2));
    assert_eq!(genmom(dir.path(), &["exact", "--gamma", "0.5"]).status.code(), Some(2));
    assert_eq!(genmom(dir.path(), &["momenta"]).status.code(), Some(2));
}

#[test]
fn seeded_property_suite_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "verify", "--suite", "properties", "--cases", "8"];
    assert_eq!(genmom(a.path(), &args).status.code(), Some(0));
    assert_eq!(genmom(b.path(), &args).status.code(), Some(0));
    let name = "verify_properties.json";
    assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    assert_eq!(json(&a.path().join(name))["seed"], 11);
}
