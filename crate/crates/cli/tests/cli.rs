//! End-to-end runs of the `verify` binary and config-file parsing.

use std::path::Path;
use std::process::{Command, Output};

use hardyops_cli::config::{parse_config_with_env, RunConfig, Suite};
use hardyops_cli::CliError;

fn verify(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify"))
        .args(args)
        .env("HARDYOPS_OUT", out)
        .output()
        .expect("spawn verify")
}

fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().path()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn exit_zero_when_all_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = verify(
        &[
            "--a", "0.3", "--dims", "64,128", "--suite", "spectra", "--suite", "twoproj",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("suite"));
    assert!(stdout.contains("spectra") && stdout.contains("twoproj"));
    assert_eq!(files(dir.path()).len(), 1);
}

#[test]
fn exit_two_on_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = verify(
        &[
            "--a", "0.5", "--dims", "64", "--suite", "cstar", "--tol", "cstar=0",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let report = json(&files(dir.path())[0]);
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["pass"] == false));
}

#[test]
fn exit_one_on_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = verify(&["--a", "1.2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parameter outside open unit disk"));

    let out = verify(&["--suite", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));

    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "dims = []\n").unwrap();
    let reports = dir.path().join("reports");
    let out = verify(&["--config", cfg.to_str().unwrap()], &reports);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty dimension list"));
    assert!(out.stdout.is_empty());
    assert!(!reports.exists());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "--a",
        "0.3+0.2i",
        "--dims",
        "32,64",
        "--suite",
        "identities",
        "--suite",
        "cstar",
    ];
    verify(&args, d1.path());
    verify(&args, d2.path());
    let (f1, f2) = (files(d1.path()), files(d2.path()));
    assert_eq!(f1.len(), 1);
    assert_eq!(f1[0].file_name(), f2[0].file_name());
    assert_eq!(
        std::fs::read(&f1[0]).unwrap(),
        std::fs::read(&f2[0]).unwrap()
    );

    // Same directory: a second file, the first untouched.
    let before = std::fs::read(&f1[0]).unwrap();
    verify(&args, d1.path());
    let again = files(d1.path());
    assert_eq!(again.len(), 2);
    assert_eq!(std::fs::read(&again[0]).unwrap(), before);
    assert_eq!(std::fs::read(&again[1]).unwrap(), before);

    let other = verify(
        &["--seed", "7"]
            .iter()
            .chain(&args)
            .copied()
            .collect::<Vec<_>>(),
        d2.path(),
    );
    assert!(other.status.code().is_some());
    assert_eq!(files(d2.path()).len(), 2);
}

#[test]
fn csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    verify(
        &[
            "--a", "0.5", "--dims", "32", "--suite", "twoproj", "--format", "csv",
        ],
        dir.path(),
    );
    let f = files(dir.path());
    assert_eq!(f[0].extension().unwrap(), "csv");
    let text = std::fs::read_to_string(&f[0]).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "suite,check,a_re,a_im,N,value,target,residual,tol,pass"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn composition_norm_row_at_512() {
    let dir = tempfile::tempdir().unwrap();
    verify(
        &["--a", "0.5", "--dims", "256,512", "--suite", "spectra"],
        dir.path(),
    );
    let report = json(&files(dir.path())[0]);
    let row = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "norm_C" && c["N"] == 512)
        .unwrap()
        .clone();
    let value = row["value"].as_f64().unwrap();
    // ‖C_a‖² = max σ(C_a^*C_a) = 3 at |a| = 1/2.
    assert!((value - 3f64.sqrt()).abs() < 2e-3, "{value}");
    assert!(value < 3f64.sqrt());
    assert_eq!(row["pass"], true);
}

#[test]
fn twoproj_report_carries_subspace_dims() {
    let dir = tempfile::tempdir().unwrap();
    verify(
        &["--a", "0.5", "--dims", "256", "--suite", "twoproj"],
        dir.path(),
    );
    let report = json(&files(dir.path())[0]);
    let d = &report["twoproj"][0];
    assert_eq!(d["N"], 256);
    assert_eq!(d["dims"]["m01"], 1);
    assert_eq!(d["dims"]["m10"], 0);
}

#[test]
fn config_file_mirroring_defaults_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "a = [\"0.3\", 0.5, \"0.6\", \"0.5@45\", \"0.7\"]\n\
         dims = [64, 128, 256, 512]\n\
         suites = [\"spectra\", \"identities\", \"twoproj\", \"cstar\"]\n\
         seed = 42\n\
         format = \"json\"\n\
         \n[tol]\n",
    )
    .unwrap();
    let env = Some(dir.path().join("out"));
    let from_file =
        parse_config_with_env(["verify", "--config", path.to_str().unwrap()], env.clone()).unwrap();
    assert_eq!(from_file, RunConfig::defaults(dir.path().join("out")));
    assert_eq!(
        from_file,
        parse_config_with_env(["verify"], env.clone()).unwrap()
    );

    // Flags win over file values.
    std::fs::write(
        &path,
        "dims = [64]\nseed = 1\nsuites = [\"cstar\"]\n[tol]\ncstar = 0.1\n",
    )
    .unwrap();
    let c = parse_config_with_env(
        [
            "verify",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
            "--tol",
            "cstar=0.2",
        ],
        env.clone(),
    )
    .unwrap();
    assert_eq!((c.dims.as_slice(), c.seed), (&[64][..], 9));
    assert_eq!(c.suites, vec![Suite::Cstar]);
    assert_eq!(c.tol_overrides["cstar"], 0.2);

    std::fs::write(&path, "dimz = [64]\n").unwrap();
    let e = parse_config_with_env(["verify", "--config", path.to_str().unwrap()], env).unwrap_err();
    assert!(matches!(e, CliError::ConfigFile { .. }));
}
