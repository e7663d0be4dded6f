use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use gto_kit::channels::{GtoSpec, SectorOp};
use gto_kit::states::{FrequencySpectrum, GaussianState};
use gto_kit::sweeps::random_cm;
use gto_kit::symplectic::{cosine_sine_decompose, passive_to_unitary, random_passive};
use serde_json::{json, Value};

fn gto_kit(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gto-kit"))
        .args(args)
        .env_remove("GTO_KIT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn vacuum_like(a: f64, d: f64) -> Value {
    json!({ "n_modes": 1, "first_moments": [0.0, 0.0], "cm": [[a, 0.0], [0.0, d]] })
}

#[test]
fn feasible_worked_example() {
    let q = json!({ "nu_i": 2.0, "z_i": 4.0, "nu_f": 2.5, "z_f": 2.0, "nu_b": 2.0 });
    let out = gto_kit(&["feasible"], Some(&q.to_string()));
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["feasible"], true);
    assert!((v["p"].as_f64().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn feasible_identity_query() {
    let q = json!({ "nu_i": 3.0, "z_i": 1.5, "nu_f": 3.0, "z_f": 1.5, "nu_b": 2.0 });
    let out = gto_kit(&["feasible"], Some(&q.to_string()));
    assert_eq!(code(&out), 0);
    assert!((stdout_json(&out)["p"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn feasible_negative_and_malformed() {
    let q = json!({ "nu_i": 5.0, "z_i": 1.0, "nu_f": 1.5, "z_f": 1.0, "nu_b": 2.0 });
    let out = gto_kit(&["feasible"], Some(&q.to_string()));
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["feasible"], false);
    assert_eq!(v["reason"], "p-out-of-range");

    let out = gto_kit(&["feasible"], Some("{ not json"));
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());

    let out = gto_kit(&["feasible"], Some(r#"{"nu_i":0.5,"z_i":1,"nu_f":1,"z_f":1,"nu_b":2}"#));
    assert_eq!(code(&out), 2);
}

#[test]
fn files_for_input_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let q = json!({ "nu_i": 2.0, "z_i": 4.0, "nu_f": 2.5, "z_f": 2.0, "nu_b": 2.0 });
    let input = write(dir.path(), "q.json", &q);
    let output = dir.path().join("r.json");
    let out = gto_kit(&["feasible", "--input", &input, "--output", output.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(v["feasible"], true);

    let missing = dir.path().join("absent.json");
    let out = gto_kit(&["feasible", "--input", missing.to_str().unwrap()], None);
    assert_eq!(code(&out), 2);
}

#[test]
fn validate_kinds() {
    let out = gto_kit(&["validate"], Some(&vacuum_like(1.0, 1.0).to_string()));
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["kind"], "state");

    let out = gto_kit(&["validate"], Some(&vacuum_like(0.5, 0.5).to_string()));
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["valid"], false);

    let ch = json!({ "X": [[0.0, 0.0], [0.0, 0.0]], "Y": [[0.5, 0.0], [0.0, 0.5]], "d": [0.0, 0.0] });
    let out = gto_kit(&["validate"], Some(&ch.to_string()));
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["kind"], "channel");

    let out = gto_kit(&["validate"], Some(r#"{"something": 1}"#));
    assert_eq!(code(&out), 2);
}

#[test]
fn apply_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let input = json!({
        "state": vacuum_like(8.0, 0.5),
        "gto": { "p": 0.5, "nu_b": 2.0 },
    });
    let path = write(dir.path(), "apply.json", &input);
    let out_path = dir.path().join("state.json");
    let out = gto_kit(&["apply", "--input", &path, "--output", out_path.to_str().unwrap()], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let state: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let cm = &state["cm"];
    assert!((cm[0][0].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((cm[1][1].as_f64().unwrap() - 1.25).abs() < 1e-12);

    let out = gto_kit(&["validate", "--input", out_path.to_str().unwrap()], None);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["valid"], true);
}

#[test]
fn apply_full_thermalization_and_bad_state() {
    let input = json!({ "state": vacuum_like(7.0, 0.3), "gto": { "p": 0.0, "nu_b": 3.0 } });
    let out = gto_kit(&["apply"], Some(&input.to_string()));
    assert_eq!(code(&out), 0);
    let cm = &stdout_json(&out)["cm"];
    assert!((cm[0][0].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!(cm[0][1].as_f64().unwrap().abs() < 1e-12);

    let input = json!({ "state": vacuum_like(0.2, 0.2), "gto": { "p": 0.5, "nu_b": 2.0 } });
    assert_eq!(code(&gto_kit(&["apply"], Some(&input.to_string()))), 2);

    let input = json!({ "state": vacuum_like(1.0, 1.0) });
    assert_eq!(code(&gto_kit(&["apply"], Some(&input.to_string()))), 2);
}

#[test]
fn apply_with_oracle_on_decomposed_spec() {
    let o = random_passive(4, 11);
    let csd = cosine_sine_decompose(&passive_to_unitary(&o).unwrap()).unwrap();
    let spec = GtoSpec {
        spectrum: FrequencySpectrum::uniform(1.3, 2),
        beta: 0.8,
        sectors: vec![SectorOp { z: csd.z, thetas: csd.thetas, w: csd.w }],
    };
    let state = GaussianState::centered(random_cm(2, 5)).unwrap();
    let input = json!({ "state": state, "spec": spec });
    let out = gto_kit(&["apply", "--oracle"], Some(&input.to_string()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    let dev: f64 = err.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev <= 1e-8, "{err}");
    assert_eq!(stdout_json(&out)["n_modes"], 2);
}

#[test]
fn cool_adversary_and_empty_protocol() {
    let out = gto_kit(&["cool", "--adversary", "10", "--format", "json"], None);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["violated"], false);
    for row in v["steps"].as_array().unwrap() {
        assert!(row["nu"].as_f64().unwrap() >= 2.0 - 1e-6);
    }

    let out = gto_kit(&["cool"], Some("[]"));
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("step,nu,entropy,bound,violated"));
    assert_eq!(text.lines().count(), 2);

    let out = gto_kit(&["cool"], Some(r#"[{"p": 1.5}]"#));
    assert_eq!(code(&out), 2);
}

#[test]
fn cool_sideband_reaches_ancilla_value() {
    let omega = 3f64.ln().to_string();
    let out = gto_kit(&["cool", "--sideband", &omega, "--beta", "1"], None);
    assert_eq!(code(&out), 0);
    let nu = stdout_json(&out)["nu_after"].as_f64().unwrap();
    assert!((nu - 2.0).abs() < 1e-12);
}

#[test]
fn thermo_curve_csv_and_cross_check() {
    let out = gto_kit(&["thermo-curve", "--beta-i", "0.5", "--beta", "1.0"], None);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("x,y"));
    assert!(text.lines().count() > 3);

    let out = gto_kit(&["thermo-curve", "--beta-i", "0.5", "--beta", "1.0", "--beta-f", "0.8"], None);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(v["thermo_verdict"], true);
}

#[test]
fn decompose_matrix() {
    let out = gto_kit(&["decompose"], Some(r#"{"matrix": [[3.0, 0.0], [0.0, 3.0]]}"#));
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!((v["nus"][0].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn selftest_quick_is_deterministic() {
    let a = gto_kit(&["selftest", "--quick", "--seed", "7"], None);
    let b = gto_kit(&["selftest", "--quick", "--seed", "7", "--sequential"], None);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(code(&b), 0);
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.starts_with("elapsed"))
            .map(str::to_owned)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
}
