use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqwell_cli::config::RunConfig;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cqwell");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cqwell(cwd: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(cwd)
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

/// Columns of a CSV file written by the CLI, keyed by name.
fn read_csv(path: &Path) -> BTreeMap<String, Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let names: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let mut cols: BTreeMap<String, Vec<f64>> =
        names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for l in lines {
        for (n, v) in names.iter().zip(l.split(',')) {
            cols.get_mut(n).unwrap().push(v.parse().unwrap());
        }
    }
    cols
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn symmetric_levels_follow_the_oscillator_pattern() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("symmetric.toml");
    let o = cqwell(
        dir.path(),
        &["levels", "--config", cfg.to_str().unwrap(), "--out", "out"],
    );
    ok(&o);
    let t = read_csv(&dir.path().join("out/levels.csv"));
    assert_eq!(t["eps"].len(), 8);
    for (k, e) in t["eps"].iter().enumerate() {
        assert!((e - (k as f64 + 0.5)).abs() <= 1e-10 * e, "level {k}: {e}");
    }
}

#[test]
fn asymmetric_levels_match_the_oracle_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "n_states = 6\n[well]\nk1 = 1.0\nk2 = 4.0\n[oracle]\nfield_points = 0\n",
    );
    let c = cfg.to_str().unwrap();
    ok(&cqwell(
        dir.path(),
        &["levels", "--config", c, "--out", "out"],
    ));
    ok(&cqwell(
        dir.path(),
        &["oracle", "--config", c, "--out", "out"],
    ));
    let levels = read_csv(&dir.path().join("out/levels.csv"));
    let oracle = read_csv(
        &dir.path()
            .join(format!("out/oracle-v{}/grid_levels.csv", cqwell::VERSION)),
    );
    for (a, b) in levels["eps"].iter().zip(&oracle["eps"]) {
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
}

#[test]
fn malformed_configs_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    for (text, needle) in [
        ("[drive]\nbeta = 12.0\n", "drive.beta"),
        ("[drive]\nbeta = 0.1\nomega = -1.0\n", "drive.omega"),
        ("[well]\nk1 = 0.0\n", "well.k1"),
        (
            "[scan]\nobservable = \"spectral_density\"\n",
            "scan.observable",
        ),
        ("[evolve]\ninitial = [[1.0, 0.0]]\n", "evolve.initial"),
        ("n_states = \"six\"\n", "n_states"),
        ("[drive]\nbta = 0.1\n", "bta"),
        ("[well\n", "malformed"),
    ] {
        let cfg = write_config(dir.path(), text);
        let o = cqwell(
            dir.path(),
            &["levels", "--config", cfg.to_str().unwrap(), "--out", "out"],
        );
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{text}: {err}");
    }
    let o = cqwell(dir.path(), &["levels", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cqwell(dir.path(), &["levels", "--route", "taylor"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn refused_oracle_result_exits_with_code_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "n_states = 2\n[evolve]\nsamples_per_period = 1\n[oracle]\ndt = 0.5\ndoubling_tol = 1e-12\n",
    );
    let o = cqwell(
        dir.path(),
        &["oracle", "--config", cfg.to_str().unwrap(), "--out", "out"],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("step-doubling"));
}

#[test]
fn undriven_populations_are_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("undriven.toml");
    ok(&cqwell(
        dir.path(),
        &["evolve", "--config", cfg.to_str().unwrap(), "--out", "out"],
    ));
    let t = read_csv(&dir.path().join("out/trajectory.csv"));
    for (k, want) in [(0, 0.36), (1, 0.64), (2, 0.0)] {
        for p in &t[&format!("pop{k}")] {
            assert!((p - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn driven_trajectory_norm_and_oracle_agreement() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "n_states = 6\n[drive]\nbeta = 0.05\nomega = 1.4142135623730951\n[evolve]\nsubsteps = 2\n[oracle]\nfield_points = 0\n",
    );
    let c = cfg.to_str().unwrap();
    ok(&cqwell(
        dir.path(),
        &["evolve", "--config", c, "--out", "out"],
    ));
    ok(&cqwell(
        dir.path(),
        &["oracle", "--config", c, "--out", "out"],
    ));
    let propagated = read_csv(&dir.path().join("out/trajectory.csv"));
    let reference = read_csv(
        &dir.path()
            .join(format!("out/oracle-v{}/trajectory.csv", cqwell::VERSION)),
    );
    for v in &propagated["norm"] {
        assert!((v - 1.0).abs() <= 1e-10);
    }
    assert_eq!(propagated["xi"], reference["xi"]);
    let mut worst = 0.0f64;
    for k in 0..6 {
        let key = format!("pop{k}");
        for (a, b) in propagated[&key].iter().zip(&reference[&key]) {
            worst = worst.max((a - b).abs());
        }
    }
    println!("largest population difference to the reference: {worst:.2e}");
    assert!(worst <= 1e-4);
}

#[test]
fn empty_scan_is_an_empty_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[scan]\nomega_points = 0\n");
    ok(&cqwell(
        dir.path(),
        &["scan", "--config", cfg.to_str().unwrap(), "--out", "out"],
    ));
    let t = read_csv(&dir.path().join("out/scan.csv"));
    assert!(t["omega"].is_empty());
}

#[test]
fn flags_override_the_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[kernel_dump]\npoints = 5\n");
    let o = cqwell(
        dir.path(),
        &[
            "kernel-dump",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "elsewhere",
            "--format",
            "json",
            "--route",
            "power",
            "--n-states",
            "3",
        ],
    );
    ok(&o);
    let text = std::fs::read_to_string(dir.path().join("elsewhere/kernel_dump.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["config"]["kernel"]["route"], "power");
    assert_eq!(v["config"]["n_states"], 3);
    assert_eq!(v["config"]["output"]["format"], "json");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    for row in v["rows"].as_array().unwrap() {
        assert!(row[5].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn headers_embed_version_and_parseable_config() {
    let dir = TempDir::new().unwrap();
    let cfg = configs().join("asymmetric.toml");
    ok(&cqwell(
        dir.path(),
        &["dipole", "--config", cfg.to_str().unwrap(), "--out", "out"],
    ));
    for entry in std::fs::read_dir(dir.path().join("out")).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        assert!(text.starts_with(&format!("# cqwell {}\n", cqwell::VERSION)));
        let doc: String = text
            .lines()
            .skip_while(|l| *l != "# config:")
            .skip(1)
            .take_while(|l| l.starts_with('#'))
            .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
            .collect();
        let embedded = RunConfig::from_toml(&doc).unwrap();
        assert_eq!(embedded.n_states, 6);
        assert_eq!(embedded.drive.beta, Some(0.05));
        assert!(embedded.drive.gamma.is_some());
        embedded.resolve().unwrap();
    }
}
