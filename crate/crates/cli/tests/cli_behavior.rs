//! Black-box checks of the binary: exit codes, config handling, output
//! shape. The numerical acceptance battery lives in `acceptance.rs`.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_annulus-dyn"))
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("read {}: {e}", p.display()))
}

#[test]
fn eval_line_succeeds_and_has_provenance() {
    let dir = tmp();
    let out = dir.path().join("line.csv");
    let status = bin()
        .args(["eval", "--line", "x=0:3:7", "y=0", "z=0", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    assert!(text.starts_with("# annulus-dyn eval v"));
    assert!(text.contains("# body: {\"type\":\"annulus\""));
    assert!(text.contains("x,y,z,U,Ux,Uy,Uz,flags"));
    // origin row carries the closed-form value -8/7
    assert!(text.contains("\n0,0,0,-1.1428571428571428,0,0,0,"));
    // the edge row is flagged with empty value cells
    assert!(text.contains("\n1,0,0,,,,,on_edge"));
    // sidecar config parses back to the same resolved config
    let sidecar = read(&PathBuf::from(format!("{}.config.json", out.display())));
    let v: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(v["body"]["type"], "annulus");
    assert_eq!(v["body"]["b"], 0.75);
}

#[test]
fn exit_code_2_on_config_problems() {
    let dir = tmp();
    let out = dir.path().join("x.csv");
    // malformed axis spec
    let st = bin()
        .args(["eval", "--grid", "q=0:1:5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    // missing config file
    let st = bin()
        .args([
            "--config",
            "/nonexistent/conf.json",
            "eval",
            "--line",
            "x=0:1:3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    // malformed config content
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        "{\"body\": {\"type\": \"annulus\", \"a\": 0.5, \"b\": 0.75, \"mu\": 1.0}}",
    )
    .unwrap();
    let st = bin()
        .arg("--config")
        .arg(&bad)
        .args(["eval", "--line", "x=0:1:3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2), "b > a must be rejected as config error");
    // dynamics command on a wire body
    let wire = dir.path().join("wire.json");
    std::fs::write(
        &wire,
        "{\"body\": {\"type\": \"wire\", \"a\": 1.0, \"mu\": 1.0}}",
    )
    .unwrap();
    let st = bin()
        .arg("--config")
        .arg(&wire)
        .args(["equilibria", "--lambda", "1", "--out"])
        .arg(dir.path().join("eq.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn exit_code_3_on_domain_errors() {
    let dir = tmp();
    // orbit starting on the plate: the field gradient is discontinuous there
    let st = bin()
        .args(["orbit", "--state", "0.9,0,0,0,0,0", "--tmax", "1", "--out"])
        .arg(dir.path().join("t.csv"))
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(3));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&st.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "domain");
    // invalid bifurcation bracket (both ends above the threshold)
    let st = bin()
        .args(["bifurcation", "--bracket", "2.45", "2.5", "--out"])
        .arg(dir.path().join("b.json"))
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn exit_code_4_on_convergence_failure() {
    let dir = tmp();
    let st = bin()
        .args([
            "orbit",
            "--state",
            "3,0,0,0,0.7,0",
            "--tmax",
            "50",
            "--max-steps",
            "10",
            "--out",
        ])
        .arg(dir.path().join("t.csv"))
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(4));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&st.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "convergence");
}

#[test]
fn config_dir_env_var_resolves_bare_names() {
    let dir = tmp();
    let conf = dir.path().join("myconf.json");
    std::fs::write(
        &conf,
        "{\"body\": {\"type\": \"annulus\", \"a\": 2.0, \"b\": 1.0, \"mu\": 1.0}}",
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let st = bin()
        .env("ANNULUS_DYN_CONFIG_DIR", dir.path())
        .args([
            "--config",
            "myconf.json",
            "eval",
            "--line",
            "x=0:1:2",
            "y=0",
            "z=1",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(read(&out).contains("\"a\":2.0"));
}

#[test]
fn flag_overrides_win_over_config() {
    let dir = tmp();
    let out = dir.path().join("o.csv");
    let st = bin()
        .args([
            "--b", "0.5", "eval", "--line", "x=0:1:2", "y=0", "z=1", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(read(&out).contains("\"b\":0.5"));
}

#[test]
fn orbit_collision_is_reported_in_footer() {
    let dir = tmp();
    let out = dir.path().join("orbit.csv");
    // at rest in the hole: ends on the plate
    let st = bin()
        .args(["orbit", "--state", "0.5,0,0,0,0,0", "--tmax", "50", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let text = read(&out);
    assert!(text.contains("# termination: PlateCollision"), "{text}");
    assert!(text.contains("t,x,y,z,vx,vy,vz,r,E,Lz"));
}

#[test]
fn portrait_writes_levels_and_wprime() {
    let dir = tmp();
    let out = dir.path().join("portrait");
    let st = bin()
        .args([
            "portrait",
            "--mode",
            "planar",
            "--lambda",
            "2.25",
            "--range",
            "1.05:12:200",
            "--levels",
            "-0.3,-0.2",
            "--emit-wprime",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(out.join("level_00.csv").exists());
    assert!(out.join("level_01.csv").exists());
    assert!(out.join("wprime.csv").exists());
    assert!(out.join("config.json").exists());
    let wp = read(&out.join("wprime.csv"));
    assert!(wp.contains("r,W,Wprime"));
    let l0 = read(&out.join("level_00.csv"));
    assert!(l0.contains("# level: -0.3"));
    assert!(l0.contains("segment,r,rdot"));
}

#[test]
fn axial_portrait_defaults_span_the_libration_band() {
    let dir = tmp();
    let out = dir.path().join("axial");
    let st = bin()
        .args(["portrait", "--mode", "axial", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    // 8 default levels
    for i in 0..8 {
        assert!(out.join(format!("level_{i:02}.csv")).exists());
    }
    assert!(!out.join("level_08.csv").exists());
}
