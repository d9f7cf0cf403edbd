use std::path::{Path, PathBuf};
use std::process::Command;

use gravloc_cli::{RunRecord, ScenarioConfig};
use sha2::{Digest, Sha256};

fn gravloc(dir: &Path, args: &[&str], config: Option<&str>) -> (i32, PathBuf) {
    let out = dir.join("runs");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gravloc"));
    cmd.args(args).arg("--out").arg(&out).arg("--quiet");
    if let Some(text) = config {
        let path = dir.join("scenario.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    let status = cmd.status().expect("binary runs");
    (status.code().expect("exit code"), out)
}

fn only_run(out: &Path) -> PathBuf {
    let mut dirs: Vec<_> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.pop().unwrap()
}

fn summary(run: &Path) -> RunRecord {
    serde_json::from_str(&std::fs::read_to_string(run.join("summary.json")).unwrap()).unwrap()
}

const SMALL_BOOST: &str = "[grid]\nn = 32\nh = 0.8\n[boost_check]\nsigma = 1.6\nvelocity = [1, 1, 0]\noffset = [2, 0, -1]\nsteps = 20\n";

#[test]
fn boost_check_writes_a_self_contained_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out) = gravloc(tmp.path(), &["boost-check"], Some(SMALL_BOOST));
    assert_eq!(code, 0);
    let run = only_run(&out);
    let rec = summary(&run);
    assert!(rec.all_checks_pass());
    assert!(rec.metric("covariance_error").unwrap() < 1e-6);
    for f in &rec.files {
        assert!(run.join(f).is_file(), "{f}");
    }
    let echoed = ScenarioConfig::load(&run.join("config.toml")).unwrap();
    assert_eq!(echoed, ScenarioConfig::from_toml(SMALL_BOOST).unwrap());
    assert_eq!(rec.config_hash, echoed.hash());
    assert!(rec.metrics.values().all(|m| !m.unit.is_empty()));
}

fn file_hashes(run: &Path) -> Vec<(String, String)> {
    let mut names: Vec<_> = std::fs::read_dir(run).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let bytes = std::fs::read(run.join(&n)).unwrap();
            (n.to_string_lossy().into_owned(), hex::encode(Sha256::digest(bytes)))
        })
        .collect()
}

#[test]
fn identical_configs_give_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 16\nh = 2.0\n[evolve]\ndt = 0.05\nsteps = 20\nmonitor_stride = 5\nsnapshot_stride = 10\nsigma = 2.5\nboost = [0, 0, 0]\nmax_energy_drift = 1.0\nmax_momentum_drift = 1.0\n";
    let (ca, out_a) = gravloc(a.path(), &["evolve"], Some(cfg));
    let (cb, out_b) = gravloc(b.path(), &["evolve", "--workers", "3"], Some(cfg));
    assert_eq!(ca, cb);
    let (ra, rb) = (only_run(&out_a), only_run(&out_b));
    assert_eq!(ra.file_name(), rb.file_name());
    assert_eq!(file_hashes(&ra), file_hashes(&rb));
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(gravloc(tmp.path(), &["ground-state"], Some("[grid]\nn = 32\nh = 1.0\nvelocity = 3")).0, 2);
    assert_eq!(gravloc(tmp.path(), &["ground-state"], Some("[kernel]\nvariant = \"none\"")).0, 2);
    assert_eq!(gravloc(tmp.path(), &["no-such-command"], None).0, 2);
    assert_eq!(gravloc(tmp.path(), &["ground-state"], Some("[grid]\nn = 16\nh = 2.0\n[solver]\nmax_iter = 3")).0, 3);
    let strict = format!("{SMALL_BOOST}max_error = 1e-300\n");
    assert_eq!(gravloc(tmp.path(), &["boost-check"], Some(&strict)).0, 4);
}

#[test]
fn failed_runs_leave_a_structured_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out) = gravloc(tmp.path(), &["ground-state"], Some("[kernel]\nvariant = \"none\""));
    assert_eq!(code, 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(only_run(&out).join("error.json")).unwrap()).unwrap();
    assert_eq!(report["error"], "no_ground_state");
    assert_eq!(report["exit_code"], 2);
}

#[test]
fn physical_ground_state_reports_centimetres() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "dimensionless = false\n[physical]\nM = 1e-3\n[grid]\nn = 32\nh = 1.4\n[solver]\ntol = 1e-6\noracle_points = 20000\n";
    let (code, out) = gravloc(tmp.path(), &["ground-state"], Some(cfg));
    assert!(code == 0 || code == 4, "exit {code}");
    let rec = summary(&only_run(&out));
    let width = rec.metric("width").unwrap();
    let a0 = &rec.metrics["length_unit"];
    assert_eq!(a0.unit, "cm");
    assert!((a0.value / 1.6675e-38 - 1.0).abs() < 1e-3);
    let cm = &rec.metrics["width_cm"];
    assert_eq!(cm.unit, "cm");
    assert_eq!(cm.value, width * a0.value);
    assert_eq!(rec.metrics["width"].unit, "dimensionless");
    assert!((rec.metric("epsilon_over_E").unwrap() - 3.0).abs() < 3e-3);
}

#[test]
fn free_packet_follows_the_spreading_law() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[grid]\nn = 32\nh = 1.0\n[kernel]\nvariant = \"none\"\n[evolve]\ndt = 0.05\nsteps = 100\nsigma = 2.0\nboost = [0, 0, 0]\n";
    let (code, out) = gravloc(tmp.path(), &["evolve"], Some(cfg));
    assert_eq!(code, 0);
    let rec = summary(&only_run(&out));
    assert!(rec.metric("max_spreading_error").unwrap() < 1e-4);
}

#[test]
fn critical_size_brackets_the_unit_density_value() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out) = gravloc(tmp.path(), &["critical-size"], None);
    assert_eq!(code, 0);
    let rec = summary(&only_run(&out));
    let rc = rec.metric("R_c@rho=1e0").unwrap();
    assert!((3e-6..=3e-5).contains(&rc));
    assert!((rec.metric("density_exponent").unwrap() + 0.3).abs() < 1e-12);
}
