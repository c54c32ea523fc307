use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fslt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fslt")).args(args).env_remove("FSLT_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary_value(line: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    line.split_whitespace().find_map(|w| w.strip_prefix(&prefix)).unwrap().parse().unwrap()
}

fn path(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn write_config(dir: &Path, edit: impl Fn(&str) -> String) -> String {
    let text = edit(include_str!("../../../configs/defaults.toml"));
    let p = dir.join("params.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn transfer_reports_final_optical_number() {
    let dir = TempDir::new().unwrap();
    let out = fslt(&["transfer", "--config", "defaults", "--T", "8.2", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stdout(&out);
    assert_eq!(line.lines().count(), 1);
    assert!(line.starts_with("transfer "));
    assert!((summary_value(&line, "final_n_optical") - 4.994).abs() <= 0.01);

    let csv = fs::read_to_string(dir.path().join("transfer.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    let mut expected = vec!["t_us", "n_optical", "n_microwave", "atom_excitation", "P0", "Pp1", "Pm1"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    expected.extend((1..=11).map(|s| format!("site_{s}")));
    expected.push("leaked_weight".into());
    assert_eq!(header, expected.join(","));
    assert_eq!(csv.lines().count(), 502);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("transfer.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["T_us"], 8.2);
    assert_eq!(manifest["job"]["command"], "transfer");
    assert!(chrono::DateTime::parse_from_rfc3339(manifest["timestamp"].as_str().unwrap()).is_ok());
    assert!(manifest["wall_time_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn zero_duration_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = fslt(&["transfer", "--T", "0.0", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("T must be positive"));
}

#[test]
fn coarse_steps_are_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    let out = fslt(&["transfer", "--steps", "10", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("step too coarse"));
}

#[test]
fn config_keys_are_checked_by_name() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(dir.path(), |t| format!("{t}\nkappa_x_MHz = 1.0\n"));
    let out = fslt(&["transfer", "--config", &unknown, "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kappa_x_MHz"), "{}", stderr(&out));

    let missing =
        write_config(dir.path(), |t| t.lines().filter(|l| !l.starts_with("Gamma0_MHz")).collect::<Vec<_>>().join("\n"));
    let out = fslt(&["transfer", "--config", &missing, "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Gamma0_MHz"), "{}", stderr(&out));

    let out = fslt(&["transfer", "--config", "/nonexistent/params.toml", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_file_values() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), |t| t.replace("T_us = 8.2", "T_us = 3.0"));
    let out = fslt(&["zero-mode", "--config", &cfg, "--N", "3", "--ratio", "0", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = fs::read_to_string(dir.path().join("zero-mode.manifest.json")).unwrap();
    assert!(manifest.contains("\"T_us\": 3.0"));
    assert!(manifest.contains("\"N_excitations\": 3"));
    assert_eq!(fs::read_to_string(dir.path().join("zero-mode.csv")).unwrap().lines().count(), 8);
}

#[test]
fn disorder_is_byte_identical_across_runs_and_replay() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let c = TempDir::new().unwrap();
    let args = |dir: &TempDir, workers: &'static str| {
        let out = fslt(&[
            "disorder",
            "--eta",
            "0.1,0.05",
            "--samples",
            "12",
            "--seed",
            "42",
            "--workers",
            workers,
            "--out",
            path(dir.path()),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        out
    };
    args(&a, "1");
    args(&b, "3");
    let first = fs::read(a.path().join("disorder.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("disorder.csv")).unwrap());
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("eta1,eta2,mean_n_optical,stderr,samples,seed\n0.1,0.1,"));

    let manifest = a.path().join("disorder.manifest.json");
    let out = fslt(&["replay", "--manifest", manifest.to_str().unwrap(), "--out", path(c.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(first, fs::read(c.path().join("disorder.csv")).unwrap());
    let recorded: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(recorded["seed"], 42);
}

#[test]
fn every_subcommand_replays_identically() {
    let runs: &[&[&str]] = &[
        &["spectrum", "--samples", "20"],
        &["zero-mode", "--ratio", "inf"],
        &["transfer", "--T-us", "2.0", "--samples", "50"],
        &["dissipative", "--T-us", "1.0", "--samples", "20", "--steps", "2000"],
        &["heatmap", "--n-max", "4", "--t-max-us", "3", "--format", "json-lines"],
        &["critical-t", "--t-min-us", "7.9", "--t-max-us", "8.3"],
        &["validate-elimination", "--T-us", "1.0"],
        &["validate-blockade"],
        &["blockade-radius", "--C6-MHz-um6", "1.2e5"],
    ];
    for args in runs {
        let first = TempDir::new().unwrap();
        let second = TempDir::new().unwrap();
        let mut full = args.to_vec();
        full.extend(["--out", path(first.path())]);
        let out = fslt(&full);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        let name = args[0];
        let manifest = first.path().join(format!("{name}.manifest.json"));
        let out = fslt(&["replay", "--manifest", manifest.to_str().unwrap(), "--out", path(second.path())]);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        let ext = if args.contains(&"json-lines") { "jsonl" } else { "csv" };
        let data = format!("{name}.{ext}");
        assert_eq!(
            fs::read(first.path().join(&data)).unwrap(),
            fs::read(second.path().join(&data)).unwrap(),
            "{name} replay differs"
        );
    }
}

#[test]
fn heatmap_rows_are_n_major() {
    let dir = TempDir::new().unwrap();
    let out = fslt(&["heatmap", "--n-max", "4", "--t-max-us", "3", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("heatmap.csv")).unwrap();
    let keys: Vec<(String, String)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        })
        .collect();
    assert_eq!(csv.lines().next(), Some("N,T_us,fidelity"));
    let expected: Vec<(String, String)> =
        [2, 4].iter().flat_map(|n| (1..=3).map(move |t| (n.to_string(), t.to_string()))).collect();
    assert_eq!(keys, expected);
}

#[test]
fn invalid_grid_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = fslt(&["critical-t", "--resolution-us", "0.5", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = fslt(&["heatmap", "--t-min-us", "5", "--t-max-us", "1", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = fslt(&["disorder", "--eta", "0.7", "--samples", "2", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "x").unwrap();
    let out = fslt(&["zero-mode", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_directory_defaults_to_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fslt"))
        .args(["zero-mode", "--ratio", "2"])
        .env("FSLT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("zero-mode.csv").exists());
    assert!(stdout(&out).contains("argmax_site=9"));
}

#[test]
fn help_lists_flags_with_units() {
    for sub in [
        "spectrum",
        "zero-mode",
        "transfer",
        "dissipative",
        "disorder",
        "heatmap",
        "critical-t",
        "validate-elimination",
        "validate-blockade",
        "blockade-radius",
    ] {
        let out = fslt(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let help = stdout(&out);
        for flag in ["--config", "--out", "--format", "--workers", "--g-MHz", "--T-us", "--kappa-o-MHz", "--N"] {
            assert!(help.contains(flag), "{sub} help lacks {flag}");
        }
        assert!(help.contains("[MHz"));
        assert!(help.contains("[µs]"));
    }
    let help = stdout(&fslt(&["heatmap", "--help"]));
    assert!(help.contains("--t-step-us") && help.contains("--n-max"));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(fslt(&["teleport"]).status.code(), Some(2));
}
