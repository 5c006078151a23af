use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out.join(name)).unwrap()).unwrap()
    }

    fn text(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap()
    }
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_path(dir: &TempDir, command: &str, config: &Path, extra: &[&str]) -> Run {
    let out = dir.path().join(format!("out-{command}"));
    let status = Command::new(env!("CARGO_BIN_EXE_multifrac"))
        .arg(command)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: status.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&status.stderr).into_owned(),
        out,
    }
}

fn run_text(command: &str, config: &str, extra: &[&str]) -> (TempDir, Run) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, config).unwrap();
    let r = run_path(&dir, command, &path, extra);
    (dir, r)
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn pressure_of_the_golden_mean_and_full_shifts() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "pressure", &repo_config("pressure_golden.cfg"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json("pressure.json");
    assert!((v["value"].as_f64().unwrap() - 0.481212).abs() < 1e-6);
    assert_eq!(v["agree"], true);

    let (_d, r) = run_text(
        "pressure",
        "[shift]\npreset = full\nalphabet = 2\n\n[potential]\nconstant = 0\n",
        &["--nmax", "14"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((r.json("pressure.json")["value"].as_f64().unwrap() - 0.693147).abs() < 1e-6);
}

#[test]
fn malformed_row_names_its_line() {
    let (_d, r) = run_text(
        "pressure",
        "[shift]\nrow = 11\nrow = 1x\n\n[potential]\nconstant = 0\n",
        &[],
    );
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
}

#[test]
fn unknown_key_names_its_line() {
    let (_d, r) = run_text(
        "pressure",
        "[shift]\npreset = golden_mean\nbogus = 1\n\n[potential]\nconstant = 0\n",
        &[],
    );
    assert_eq!(r.code, 1);
    assert!(
        r.stderr.contains("line 3") && r.stderr.contains("bogus"),
        "{}",
        r.stderr
    );
}

#[test]
fn missing_config_and_missing_flag_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "pressure", &dir.path().join("absent.cfg"), &[]);
    assert_eq!(r.code, 1);
    let status = Command::new(env!("CARGO_BIN_EXE_multifrac"))
        .arg("pressure")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn alpha_outside_the_rotation_interval_exits_two() {
    let (_d, r) = run_text(
        "spectrum",
        "[shift]\npreset = golden_mean\n\n[phi]\nindicator = 1\n\n[spectrum]\nalphas = 0.7, 0.8\nn_max = 12\n",
        &[],
    );
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("rotation interval"), "{}", r.stderr);
}

const MORAN_ONE_LEVEL: &str =
    "[shift]\npreset = full\nalphabet = 2\n\n[phi]\nindicator = 1\n\n[moran]\ngamma = 0.1\neps = 0.5\nword_lengths = 8\ncopies = 1\n";

#[test]
fn unwitnessed_moran_level_exits_two() {
    let cfg = format!("{MORAN_ONE_LEVEL}alpha = 0.3\ndeltas = 1e-9\n");
    let (_d, r) = run_text("moran-verify", &cfg, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("level set not witnessed"), "{}", r.stderr);
}

#[test]
fn single_level_nesting_is_vacuous() {
    let cfg = format!("{MORAN_ONE_LEVEL}alpha = 0.5\n");
    let (_d, r) = run_text("moran-verify", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json("moran.json");
    assert_eq!(v["separation"]["nesting_vacuous"], true);
    assert_eq!(v["pass"], true);
}

#[test]
fn moran_fixture_passes() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "moran-verify", &repo_config("moran_fixture.cfg"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json("moran.json");
    assert_eq!(v["mode"], "Lazy");
    assert_eq!(v["pass"], true);
}

#[test]
fn unreachable_gap_exits_three() {
    let (_d, r) = run_text(
        "spec-gap",
        "[spec_gap]\nmap = doubling\neps = 0.001\np_max = 2\nfirst = 0.1234, 8\nsecond = 0.7, 6\n",
        &[],
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.json("spec_gap.json")["estimate"]["gap"].is_null());
}

#[test]
fn doubling_gap_is_verified() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "spec-gap", &repo_config("spec_gap_doubling.cfg"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let est = &r.json("spec_gap.json")["estimate"];
    assert!(est["gap"].as_u64().unwrap() <= 4);
    assert!(est["witness"]["error_bound"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn bs_dimension_of_the_full_shift() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "bs-dim", &repo_config("bs_full.cfg"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((r.json("bs.json")["dimension"].as_f64().unwrap() - 1.386294).abs() < 1e-6);
}

#[test]
fn map_samples_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "maps", &repo_config("maps.cfg"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let viana = csv_rows(&r.text("viana_samples.csv"));
    assert_eq!(viana[0], ["0.25", "0", "0", "1"]);
    let mp = csv_rows(&r.text("mp_samples.csv"));
    assert!((mp[0][1].parse::<f64>().unwrap() - 0.426777).abs() < 1e-6);
    let summary = r.json("maps.json");
    assert_eq!(summary["invariance"]["analytic"], false);
    assert!(r.text("coding.csv").lines().count() > 1);
    assert!(r.text("ensemble.csv").lines().count() > 1);
}

#[test]
fn spectrum_rows_on_the_golden_mean() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "spectrum", &repo_config("spectrum_golden.cfg"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.text("spectrum.csv"));
    let third = rows.iter().find(|row| row[0].starts_with("0.3333")).unwrap();
    for col in [1, 3] {
        assert!(
            (third[col].parse::<f64>().unwrap() - 0.462098).abs() < 1e-3,
            "{third:?}"
        );
    }
    for row in rows.iter().filter(|row| row[6] == "true") {
        assert_eq!(row[1], "", "endpoint Legendre value should be blank: {row:?}");
    }
    assert_eq!(rows.iter().filter(|row| row[6] == "true").count(), 2);
}

#[test]
fn full_shift_spectrum_is_the_binary_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_path(&dir, "spectrum", &repo_config("spectrum_full.cfg"), &["--nmax", "14"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json("summary.json");
    assert!(v["binary_entropy_max_error"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["concave"], true);
}

#[test]
fn manifest_rerun_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = run_path(
        &dir,
        "pressure",
        &repo_config("pressure_golden.cfg"),
        &["--workers", "1"],
    );
    assert_eq!(first.code, 0, "{}", first.stderr);
    let manifest = first.out.join("manifest.json");
    let m: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "pressure");
    assert_eq!(m["settings"]["workers"], 1);

    let copy = dir.path().join("saved.json");
    fs::copy(&manifest, &copy).unwrap();
    let out = dir.path().join("again");
    let status = Command::new(env!("CARGO_BIN_EXE_multifrac"))
        .args(["pressure", "--config"])
        .arg(&copy)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    assert_eq!(
        fs::read(first.out.join("pressure.json")).unwrap(),
        fs::read(out.join("pressure.json")).unwrap()
    );

    let mismatch = run_path(&dir, "spectrum", &copy, &[]);
    assert_eq!(mismatch.code, 1);
}
