use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bendplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bendplan")).args(args).env_remove("BENDPLAN_CLEARANCE").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path: PathBuf = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "l.json", r#"{"vertices": [[0,0],[1,0],[1,1]]}"#);
    let crossing = write(dir.path(), "x.json", r#"{"vertices": [[0,0],[2,0],[1,1],[1,-1]]}"#);
    let degenerate = write(dir.path(), "d.json", r#"{"vertices": [[0,0],[0,0],[1,1]]}"#);
    let degrees = write(dir.path(), "g.json", r#"{"lengths": [1,1], "angles_deg": [90]}"#);
    assert_eq!(code(&bendplan(&["check", &ok])), 0);
    let out = bendplan(&["--format", "json", "check", &crossing]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["strongly_simple"], false);
    assert_eq!(code(&bendplan(&["check", &degenerate])), 2);
    assert_eq!(code(&bendplan(&["check", &degrees])), 2);
    assert_eq!(code(&bendplan(&["check", "/nonexistent/chain.json"])), 2);
    assert_eq!(code(&bendplan(&["check"])), 2);
}

#[test]
fn fixtures_through_the_cli() {
    let locked = fixture("locked_5joint.json");
    let two = fixture("two_orders_6link.json");

    let out = bendplan(&["--format", "json", "enumerate", &two]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!([[1, 5, 4, 2, 3], [1, 5, 4, 3, 2]]));
    assert_eq!(code(&bendplan(&["enumerate", &locked])), 1);

    for strategy in ["exhaustive", "outwards", "inwards", "identity"] {
        assert_eq!(code(&bendplan(&["plan", &locked, "--strategy", strategy])), 1, "{strategy}");
    }
    let out = bendplan(&["--format", "json", "plan", &two, "--strategy", "outwards"]);
    assert_eq!(code(&out), 0);
    let plan = json(&out);
    assert_eq!(plan["found"], true);
    assert_eq!(plan["plan"]["direction"], "straighten");
    assert_eq!(plan["forming"]["direction"], "form");
    assert_eq!(code(&bendplan(&["verify", &two, "--identity"])), 1);
    assert_eq!(code(&bendplan(&["verify", &two, "--perm", "1,5,4,3,2"])), 0);
    assert_eq!(code(&bendplan(&["verify", &two, "--perm", "2,3,4,5,1", "--forming"])), 0);

    let out = bendplan(&["--format", "json", "verify", &two, "--perm", "1,2,3,4,5"]);
    assert_eq!(code(&out), 1);
    let trace = json(&out)["trace"].as_array().unwrap().clone();
    let last = trace.last().unwrap();
    assert_eq!(last["feasible"], false);
    assert!(last["witness"]["kind"].is_string());

    assert_eq!(code(&bendplan(&["verify", &two, "--perm", "1,2,3"])), 2);
}

#[test]
fn feasible_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let hook = write(dir.path(), "hook.json", r#"{"vertices": [[0,0],[2,0],[2,1],[1,1],[1.7,0.2]]}"#);
    let out = bendplan(&["--format", "json", "feasible", &hook, "--joint", "3", "--samples", "256"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["feasible"], false);
    assert_eq!(v["sampled"], false);
    assert_eq!(v["witness"]["kind"], "arc_meets_edge");
    assert_eq!(code(&bendplan(&["feasible", &hook, "--state", "3", "--joint", "2"])), 0);
    assert_eq!(code(&bendplan(&["feasible", &hook, "--state", "9", "--joint", "2"])), 2);
    assert_eq!(code(&bendplan(&["feasible", &hook, "--joint", "7"])), 2);
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json").display().to_string();
    let b = dir.path().join("b.json").display().to_string();
    assert_eq!(code(&bendplan(&["gen", "--n", "9", "--seed", "4", "--out", &a])), 0);
    assert_eq!(code(&bendplan(&["gen", "--n", "9", "--seed", "4", "--out", &b])), 0);
    assert_eq!(fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(code(&bendplan(&["check", &a])), 0);
    assert_eq!(code(&bendplan(&["gen", "--n", "30", "--attempts", "1"])), 2);
}

#[test]
fn clearance_sources() {
    let dir = tempfile::tempdir().unwrap();
    // the last vertex is 0.06 above the first edge
    let near = write(dir.path(), "near.json", r#"{"vertices": [[0,0],[1,0],[1,0.5],[0.2,0.5],[0.2,0.06]]}"#);
    assert_eq!(code(&bendplan(&["check", &near])), 0);
    assert_eq!(code(&bendplan(&["--clearance", "0.1", "check", &near])), 1);
    let env = Command::new(env!("CARGO_BIN_EXE_bendplan"))
        .args(["check", &near])
        .env("BENDPLAN_CLEARANCE", "0.1")
        .output()
        .unwrap();
    assert_eq!(code(&env), 1);
    let own = write(
        dir.path(),
        "own.json",
        r#"{"clearance": 0.001, "vertices": [[0,0],[1,0],[1,0.5],[0.2,0.5],[0.2,0.06]]}"#,
    );
    let env = Command::new(env!("CARGO_BIN_EXE_bendplan"))
        .args(["check", &own])
        .env("BENDPLAN_CLEARANCE", "0.1")
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert_eq!(code(&bendplan(&["--clearance", "-1", "check", &near])), 2);
}

#[test]
fn render_writes_frames() {
    let dir = tempfile::tempdir().unwrap();
    let u = write(dir.path(), "u.json", r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]]}"#);
    let out_dir = dir.path().join("frames");
    let out_str = out_dir.display().to_string();
    let out = bendplan(&["--format", "json", "render", &u, "--plan", "1,2", "--out", &out_str, "--frames", "5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out).as_array().unwrap().len(), 10);
    let first = fs::read_to_string(out_dir.join("frame_0000.svg")).unwrap();
    assert!(first.starts_with("<svg") && first.contains("class=\"moving\"") && first.contains("class=\"swept\""));
    assert!(out_dir.join("frame_0009.svg").exists());
    assert!(!out_dir.join("frame_0010.svg").exists());

    let hook = write(dir.path(), "hook.json", r#"{"vertices": [[0,0],[2,0],[2,1],[1,1],[1.7,0.2]]}"#);
    let blocked = dir.path().join("blocked").display().to_string();
    assert_eq!(code(&bendplan(&["render", &hook, "--plan", "3,2,1", "--out", &blocked])), 1);
    assert_eq!(code(&bendplan(&["render", &u, "--plan", "1,2", "--out", &out_str, "--frames", "0"])), 2);
}
