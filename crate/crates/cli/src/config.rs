//! Run configuration: flags, TOML files and defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use hardyops::cstar::MIN_GRID;
use hardyops::hardy::DiskPoint;
use hardyops::identities::{IdentityId, MIN_DIM};
use hardyops::spectral::Recipe;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "reports";
pub const OUT_ENV: &str = "HARDYOPS_OUT";
pub const DEFAULT_A: [&str; 5] = ["0.3", "0.5", "0.6", "0.5@45", "0.7"];
pub const DEFAULT_DIMS: [usize; 4] = [64, 128, 256, 512];

/// Check names of the two-projection suite.
pub const TWOPROJ_CHECKS: [&str; 4] = ["norm_D", "norm_PmQ", "norm_PpQ", "duncan_taylor"];
/// Tolerance key shared by every word of the C*-model suite.
pub const CSTAR_KEY: &str = "cstar";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Spectra,
    Identities,
    Twoproj,
    Cstar,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Spectra,
        Suite::Identities,
        Suite::Twoproj,
        Suite::Cstar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Spectra => "spectra",
            Suite::Identities => "identities",
            Suite::Twoproj => "twoproj",
            Suite::Cstar => "cstar",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| CliError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Fully resolved run. `dims` is strictly ascending and `suites` sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub a_values: Vec<DiskPoint>,
    pub dims: Vec<usize>,
    pub suites: Vec<Suite>,
    pub tol_overrides: BTreeMap<String, f64>,
    pub seed: u64,
    #[serde(skip)]
    pub out_path: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// Defaults, writing to `out_dir`.
    pub fn defaults(out_dir: PathBuf) -> Self {
        Self {
            a_values: DEFAULT_A
                .iter()
                .map(|s| parse_a(s).expect("default a"))
                .collect(),
            dims: DEFAULT_DIMS.to_vec(),
            suites: Suite::ALL.to_vec(),
            tol_overrides: BTreeMap::new(),
            seed: DEFAULT_SEED,
            out_path: out_dir,
            format: Format::Json,
        }
    }

    pub fn has_suite(&self, s: Suite) -> bool {
        self.suites.contains(&s)
    }

    pub fn tol_for(&self, key: &str, default: f64) -> f64 {
        self.tol_overrides.get(key).copied().unwrap_or(default)
    }
}

/// Parses `re`, `re+imi` (also `re-imi`, `imi`) or polar `r@deg`.
pub fn parse_a(s: &str) -> Result<DiskPoint, CliError> {
    let bad = || CliError::ParseA(s.to_string());
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z = if let Some((r, deg)) = t.split_once('@') {
        let r: f64 = r.parse().map_err(|_| bad())?;
        let deg: f64 = deg.parse().map_err(|_| bad())?;
        Complex64::from_polar(r, deg.to_radians())
    } else if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that does not start the string or an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        )
    } else {
        Complex64::new(t.parse().map_err(|_| bad())?, 0.0)
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad());
    }
    DiskPoint::new(z).map_err(|_| CliError::OutsideDisk {
        a: s.to_string(),
        modulus: z.norm(),
    })
}

fn parse_dims_list(values: &[usize]) -> Result<Vec<usize>, CliError> {
    if values.is_empty() {
        return Err(CliError::EmptyDims);
    }
    let min = MIN_DIM.max(MIN_GRID);
    if let Some(&n) = values.iter().find(|&&n| n < min) {
        return Err(CliError::DimTooSmall { n, min });
    }
    let mut dims = values.to_vec();
    dims.sort_unstable();
    dims.dedup();
    Ok(dims)
}

/// Parses `64,128,256`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let values = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| CliError::ParseDims(s.to_string())))
        .collect::<Result<Vec<usize>, _>>()?;
    parse_dims_list(&values)
}

/// Every key accepted by `--tol`.
pub fn tol_keys() -> Vec<String> {
    let mut keys: Vec<String> = Recipe::ALL.iter().map(|r| r.name().to_string()).collect();
    keys.extend(IdentityId::ALL.iter().map(|i| i.name().to_string()));
    keys.extend(TWOPROJ_CHECKS.iter().map(|s| s.to_string()));
    keys.push(CSTAR_KEY.to_string());
    keys.sort();
    keys.dedup();
    keys
}

fn check_tol(key: &str, value: f64) -> Result<(), CliError> {
    if !tol_keys().iter().any(|k| k == key) {
        return Err(CliError::UnknownTolKey(key.to_string()));
    }
    if !(value.is_finite() && value >= 0.0) {
        return Err(CliError::BadTol(format!("{key}={value}")));
    }
    Ok(())
}

/// Parses `KEY=VAL`.
pub fn parse_tol(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::BadTol(s.to_string()))?;
    let key = k.trim().to_string();
    let value: f64 = v
        .trim()
        .parse()
        .map_err(|_| CliError::BadTol(s.to_string()))?;
    check_tol(&key, value)?;
    Ok((key, value))
}

#[derive(Debug, Parser)]
#[command(
    name = "verify",
    version,
    about = "Verify operator identities and spectra on finite sections"
)]
struct Cli {
    /// Disk parameter: `re`, `re+imi` or `r@deg` (repeatable).
    #[arg(long = "a", value_name = "A", allow_hyphen_values = true)]
    a: Vec<String>,
    /// Comma-separated truncation dimensions.
    #[arg(long, value_name = "N,N,...")]
    dims: Option<String>,
    /// One of spectra, identities, twoproj, cstar (repeatable).
    #[arg(long = "suite", value_name = "NAME")]
    suite: Vec<String>,
    /// Tolerance override `KEY=VAL` (repeatable).
    #[arg(long = "tol", value_name = "KEY=VAL")]
    tol: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// TOML file; explicit flags take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    a: Option<Vec<AValue>>,
    dims: Option<Vec<usize>>,
    suites: Option<Vec<String>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    #[serde(default)]
    tol: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AValue {
    Real(f64),
    Text(String),
}

impl AValue {
    fn parse(&self) -> Result<DiskPoint, CliError> {
        match self {
            AValue::Real(x) => parse_a(&x.to_string()),
            AValue::Text(s) => parse_a(s),
        }
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| CliError::ConfigFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Parses command-line arguments (including the program name), resolving the
/// default output directory from `HARDYOPS_OUT`.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    parse_config_with_env(args, std::env::var_os(OUT_ENV).map(PathBuf::from))
}

/// [`parse_config`] with an explicit value for the output-directory variable.
pub fn parse_config_with_env<I, T>(args: I, env_out: Option<PathBuf>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    let file = match &cli.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    let default_out = env_out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut cfg = RunConfig::defaults(default_out);

    if !cli.a.is_empty() {
        cfg.a_values = cli.a.iter().map(|s| parse_a(s)).collect::<Result<_, _>>()?;
    } else if let Some(a) = &file.a {
        cfg.a_values = a.iter().map(AValue::parse).collect::<Result<_, _>>()?;
    }
    if cfg.a_values.is_empty() {
        return Err(CliError::EmptyA);
    }

    if let Some(d) = &cli.dims {
        cfg.dims = parse_dims(d)?;
    } else if let Some(d) = &file.dims {
        cfg.dims = parse_dims_list(d)?;
    }

    let names: Option<&Vec<String>> = if !cli.suite.is_empty() {
        Some(&cli.suite)
    } else {
        file.suites.as_ref()
    };
    if let Some(names) = names {
        let mut suites = names
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Suite>, _>>()?;
        suites.sort_unstable();
        suites.dedup();
        if suites.is_empty() {
            return Err(CliError::EmptySuites);
        }
        cfg.suites = suites;
    }

    for (k, &v) in &file.tol {
        check_tol(k, v)?;
        cfg.tol_overrides.insert(k.clone(), v);
    }
    for t in &cli.tol {
        let (k, v) = parse_tol(t)?;
        cfg.tol_overrides.insert(k, v);
    }

    if let Some(s) = cli.seed.or(file.seed) {
        cfg.seed = s;
    }
    if let Some(o) = cli.out.or(file.out) {
        cfg.out_path = o;
    }
    if let Some(f) = cli.format.or(file.format) {
        cfg.format = f;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: DiskPoint, re: f64, im: f64) -> bool {
        (a.value() - Complex64::new(re, im)).norm() < 1e-15
    }

    #[test]
    fn a_forms() {
        assert!(close(parse_a("0.5").unwrap(), 0.5, 0.0));
        assert!(close(parse_a("0.3+0.4i").unwrap(), 0.3, 0.4));
        assert!(close(parse_a("0.3-0.4i").unwrap(), 0.3, -0.4));
        assert!(close(parse_a("-0.2i").unwrap(), 0.0, -0.2));
        assert!(close(parse_a("1e-1+2e-1i").unwrap(), 0.1, 0.2));
        let h = 0.5 / 2f64.sqrt();
        assert!((parse_a("0.5@45").unwrap().value() - Complex64::new(h, h)).norm() < 1e-15);
    }

    #[test]
    fn a_errors_are_distinct() {
        assert!(matches!(parse_a("x"), Err(CliError::ParseA(_))));
        assert!(matches!(parse_a("0.3+i4"), Err(CliError::ParseA(_))));
        let e = parse_a("1.2").unwrap_err();
        assert!(matches!(e, CliError::OutsideDisk { .. }));
        assert!(e.to_string().contains("parameter outside open unit disk"));
        assert!(matches!(
            parse_a("0.8+0.8i"),
            Err(CliError::OutsideDisk { .. })
        ));
    }

    #[test]
    fn dims_sorted_and_validated() {
        assert_eq!(parse_dims("128, 64,128").unwrap(), vec![64, 128]);
        assert!(matches!(parse_dims(""), Err(CliError::EmptyDims)));
        assert!(matches!(
            parse_dims("8"),
            Err(CliError::DimTooSmall { n: 8, .. })
        ));
        assert!(matches!(parse_dims("64,x"), Err(CliError::ParseDims(_))));
    }

    #[test]
    fn tol_keys_cover_all_suites() {
        assert_eq!(
            parse_tol("involution=1e-5").unwrap(),
            ("involution".into(), 1e-5)
        );
        assert!(parse_tol("norm_C=0.1").is_ok());
        assert!(parse_tol("cstar=0.1").is_ok());
        assert!(matches!(
            parse_tol("nope=1"),
            Err(CliError::UnknownTolKey(_))
        ));
        assert!(matches!(parse_tol("norm_C"), Err(CliError::BadTol(_))));
        assert!(matches!(parse_tol("norm_C=-1"), Err(CliError::BadTol(_))));
    }

    #[test]
    fn example_flags() {
        let c = parse_config_with_env(
            [
                "verify",
                "--a",
                "0.5",
                "--dims",
                "64,128",
                "--suite",
                "identities",
            ],
            None,
        )
        .unwrap();
        assert_eq!(c.a_values.len(), 1);
        assert_eq!(c.dims, vec![64, 128]);
        assert_eq!(c.suites, vec![Suite::Identities]);
        assert_eq!(c.seed, DEFAULT_SEED);
    }

    #[test]
    fn defaults_and_env() {
        let c = parse_config_with_env(["verify"], Some("/tmp/x".into())).unwrap();
        assert_eq!(c, RunConfig::defaults("/tmp/x".into()));
        assert_eq!(c.suites, Suite::ALL.to_vec());
        let c = parse_config_with_env(["verify", "--out", "o"], Some("/tmp/x".into())).unwrap();
        assert_eq!(c.out_path, PathBuf::from("o"));
    }

    #[test]
    fn unknown_suite() {
        let e = parse_config_with_env(["verify", "--suite", "bogus"], None).unwrap_err();
        assert!(matches!(e, CliError::UnknownSuite(_)));
    }
}
