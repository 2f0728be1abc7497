use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dikw_dp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dikw-dp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, format!("format_version = 1\n{body}")).unwrap();
    path.display().to_string()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(dikw_dp(&["--help"]).status.code(), Some(0));
    assert_eq!(dikw_dp(&["sweep", "--help"]).status.code(), Some(0));
    assert_eq!(dikw_dp(&[]).status.code(), Some(1));
    assert_eq!(dikw_dp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dikw_dp(&["sweep", "--mode", "XDP"]).status.code(), Some(1));
}

#[test]
fn bad_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "repetitions = 0\n");
    let out = dikw_dp(&["sweep", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repetitions"));
}

#[test]
fn unreadable_inputs_exit_2() {
    let out = dikw_dp(&["sweep", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[dataset]\ndata = \"missing.csv\"\nschema = \"missing.toml\"\n",
    );
    assert_eq!(
        dikw_dp(&["optimize", "--config", &config]).status.code(),
        Some(2)
    );
}

#[test]
fn generate_then_decide_mode_on_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("gen");
    let out = dikw_dp(&["generate", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let data = out_dir.join("iris_dikw.csv");
    let schema = out_dir.join("iris_dikw.schema.toml");
    let text = fs::read_to_string(&data).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].contains("centroid_score"));
    assert_eq!(rows.len(), 151);

    let config = write_config(
        dir.path(),
        &format!(
            "[dataset]\ndata = \"{}\"\nschema = \"{}\"\n",
            data.display(),
            schema.display()
        ),
    );
    let out = dikw_dp(&[
        "decide-mode",
        "--config",
        &config,
        "--mask",
        "sepal_length,sepal_width",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let decision: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(decision["mode"].is_string());
    assert!(decision["data_to_information"].is_number());

    let out = dikw_dp(&["decide-mode", "--config", &config, "--mask", "no_such_item"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let d = dir.path().join(name);
        let out = dikw_dp(&["generate", "--seed", seed, "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(d.join("iris_dikw.csv")).unwrap()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("a", "5"), run("c", "6"));
}

#[test]
fn verify_writes_report_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dikw_dp(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["cases"].as_array().unwrap().len(), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("laplace_eps1_claimed_half"));
}
