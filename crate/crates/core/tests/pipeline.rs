use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use qcurv::pipeline::report::{canonical_json, config_hash, format_float, write_atomic};
use qcurv::pipeline::commands::constants_row;
use qcurv::pipeline::{BackendKind, Overrides, Preset, RunConfig};

fn qcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcurv")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn toml_and_json_configs_agree() {
    let toml = r#"
        n = 5
        band_limit = 24
        t0 = 6.0
        [f]
        preset = "generic-quadratic"
        eps = 0.02
        [tolerances]
        lambda_gate = 1e-7
    "#;
    let json = r#"{"n": 5, "band_limit": 24, "t0": 6.0,
        "f": {"preset": "generic-quadratic", "eps": 0.02},
        "tolerances": {"lambda_gate": 1e-7}}"#;
    let a = RunConfig::parse(toml).unwrap();
    let b = RunConfig::parse(json).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.f.preset, Preset::GenericQuadratic);
    assert_eq!(a.tolerances.lambda_gate, 1e-7);
    assert_eq!(a.tolerances.residual_gate, 1e-3);
    assert_eq!(a.backend, BackendKind::Axisym);
}

#[test]
fn config_errors_are_reported() {
    assert!(RunConfig::parse("n = 6\nbogus = 1\n").is_err());
    assert!(RunConfig::parse("[f]\npreset = \"kw\"\nsign = 1\n").is_err());
    assert!(RunConfig::parse("n = 4\n").is_err());
    assert!(RunConfig::parse("t0 = 1.0\n").is_err());
    assert!(RunConfig::parse("band_limit = 0\n").is_err());
    assert!(RunConfig::parse("[f]\npreset = \"custom\"\n").is_err());
    assert!(RunConfig::parse("[f]\npreset = \"kw\"\ndirection = 7\n").is_err());
    assert!(RunConfig::parse("[probe]\nt_grid = [4.0, 2.0]\n").is_err());
    assert!(RunConfig::parse("[probe]\nalpha = [7.0]\n").is_err());
}

#[test]
fn overrides_apply_and_revalidate() {
    let o = Overrides { n: Some(8), t0: Some(12.0), preset: Some(Preset::Kw), ..Overrides::default() };
    let cfg = RunConfig::default().apply(&o).unwrap();
    assert_eq!((cfg.n, cfg.t0, cfg.f.preset), (8, 12.0, Preset::Kw));
    assert_eq!(cfg.axis(), 8);
    assert!(RunConfig::default().apply(&Overrides { t0: Some(0.5), ..Overrides::default() }).is_err());
}

#[test]
fn config_builds_its_field_and_backend() {
    let cfg = RunConfig::parse("n = 6\nband_limit = 12\n").unwrap();
    let f = cfg.fspec().unwrap();
    assert_eq!(f.n_ambient(), 7);
    let b = cfg.build_backend().unwrap();
    assert_eq!(b.n_modes(), 13);
    assert_eq!(b.symmetry_axis(), Some(6));
}

#[test]
fn canonical_json_sorts_keys_and_fixes_floats() {
    let v = serde_json::json!({"b": 0.1, "a": [1, 2.5], "c": {"z": null, "y": true}});
    let text = canonical_json(&v).unwrap();
    let expected = "{\n  \"a\": [\n    1,\n    2.5000000000000000e0\n  ],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": true,\n    \"z\": null\n  }\n}\n";
    assert_eq!(text, expected);
    assert_eq!(format_float(f64::NAN), "null");
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["b"].as_f64(), Some(0.1));
}

#[test]
fn config_hash_is_stable() {
    let a = config_hash(&RunConfig::default()).unwrap();
    assert_eq!(a.len(), 64);
    assert_eq!(a, config_hash(&RunConfig::default()).unwrap());
    let other = RunConfig { seed: 2, ..RunConfig::default() };
    assert_ne!(a, config_hash(&other).unwrap());
}

#[test]
fn atomic_write_replaces_contents() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sub").join("x.txt");
    write_atomic(&p, b"one").unwrap();
    write_atomic(&p, b"two").unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), b"two");
    assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
}

#[test]
fn constants_rows_hold_their_identities() {
    for n in [5, 6, 8, 12] {
        let r = constants_row(n).unwrap();
        assert!(r.d_n_identity && r.symbol_identity, "n = {n}");
    }
    assert!(constants_row(3).is_err());
}

#[test]
fn cli_constants() {
    let out = qcurv(&["constants", "--n", "5,6"]);
    assert_eq!(code(&out), 0);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["d_n"].as_f64(), Some(6.5625));
    assert_eq!(code(&qcurv(&["constants", "--n", "4"])), 1);
}

#[test]
fn cli_check_passes_for_the_default_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcurv(&["check", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let h = read_json(&dir.path().join("hypothesis.json"));
    assert_eq!(h["pass"], Value::Bool(true));
    assert_eq!(h["h3"]["degree"]["degree"].as_i64(), Some(1));
}

#[test]
fn cli_solve_certifies_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qcurv(&["solve", "--out", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cert_path = dir.path().join("certificate.json");
    let first = std::fs::read(&cert_path).unwrap();
    let cert: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(cert["status"], "certified");
    assert_eq!(cert["pass"], Value::Bool(true));
    assert!(cert["lambda_norm"].as_f64().unwrap() < 1e-6);
    assert!(cert["residual_sup"].as_f64().unwrap() < 1e-3);
    assert!(cert["min_u"].as_f64().unwrap() > 0.0);
    assert_eq!(cert["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(dir.path().join("field.csv").exists());
    assert!(dir.path().join("sweep.csv").exists());

    assert_eq!(code(&qcurv(&["solve", "--out", d])), 0);
    assert_eq!(std::fs::read(&cert_path).unwrap(), first);

    let re = qcurv(&["recheck", cert_path.to_str().unwrap()]);
    assert_eq!(code(&re), 0, "{}", String::from_utf8_lossy(&re.stderr));
    let r = read_json(&dir.path().join("recheck.json"));
    assert_eq!(r["sound"], Value::Bool(true));
}

#[test]
fn cli_refuses_the_obstructed_family() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let base = ["solve", "--preset", "kw", "--eps", "0.05", "--out", d];
    assert_eq!(code(&qcurv(&base)), 2);
    assert!(!dir.path().join("certificate.json").exists());
    let mut forced = base.to_vec();
    forced.push("--force");
    assert_eq!(code(&qcurv(&forced)), 4);
    let cert = read_json(&dir.path().join("certificate.json"));
    assert_eq!(cert["pass"], Value::Bool(false));
    assert_eq!(cert["gates"]["kw"]["pass"], Value::Bool(false));
}

#[test]
fn cli_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n = 6\nunknown_key = 3\n").unwrap();
    let out = qcurv(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown_key"));
    assert_eq!(code(&qcurv(&["recheck", dir.path().join("missing.json").to_str().unwrap()])), 1);
}

#[test]
fn cli_probe_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("probe.toml");
    std::fs::write(&cfg, "band_limit = 24\n[probe]\naubin_starts = 4\n").unwrap();
    let out = qcurv(&["probe", "aubin", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("aubin.json"));
    assert!(v.is_object());
    assert!(dir.path().join("aubin_starts.csv").exists());
}
