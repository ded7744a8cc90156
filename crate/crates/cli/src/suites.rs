//! Suite runners. Cells `(a, N)` run in parallel; rows are assembled in a
//! fixed order afterwards.

use hardyops::cstar::{paired_grid_size, random_hermitian_words, spectra_match_on, WordExpr};
use hardyops::hardy::DiskPoint;
use hardyops::identities::{run_suite, IdentityId, TolPolicy};
use hardyops::ops::{eigenspace_pair, PairOptions};
use hardyops::spectral::{evaluate_all, non_increasing, Recipe};
use hardyops::two_proj::{d_a_report, DaReport};
use rayon::prelude::*;

use crate::config::{RunConfig, Suite, CSTAR_KEY};
use crate::report::{Check, Report};
use crate::CliError;

/// Relative tolerance of convergent norms and spectral endpoints at the largest `N`.
pub const CONVERGENCE_TOL: f64 = 2e-2;
/// Tolerance of `|‖P+Q‖ − 1 − ‖D‖^{1/2}|`, an exact identity on each section.
pub const DUNCAN_TAYLOR_TOL: f64 = 1e-8;
/// Hausdorff distance between word spectra and the model at the largest `N`.
pub const CSTAR_TOL: f64 = 5e-2;
/// Fixed words of the C*-model suite; seeded random words follow.
pub const FIXED_WORDS: [&str; 3] = ["PQP", "P+Q", "P-Q+I"];
pub const RANDOM_WORDS: usize = 20;
pub const RANDOM_WORD_LEN: usize = 6;

/// Runs every selected suite.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut checks = Vec::new();
    let mut twoproj = Vec::new();
    for &suite in &cfg.suites {
        match suite {
            Suite::Spectra => checks.extend(spectra(cfg)),
            Suite::Identities => checks.extend(identities(cfg)?),
            Suite::Twoproj => {
                let (rows, reports) = two_projection(cfg);
                checks.extend(rows);
                twoproj = reports;
            }
            Suite::Cstar => checks.extend(cstar(cfg)?),
        }
    }
    Ok(Report::new(cfg.clone(), checks, twoproj))
}

/// Evaluates `f` on every `(a, N)` cell in parallel, indexed `[a][N]`.
fn cells<T: Send>(cfg: &RunConfig, f: impl Fn(DiskPoint, usize) -> T + Sync) -> Vec<Vec<T>> {
    let flat: Vec<T> = (0..cfg.a_values.len() * cfg.dims.len())
        .into_par_iter()
        .map(|k| {
            let (ai, ni) = (k / cfg.dims.len(), k % cfg.dims.len());
            f(cfg.a_values[ai], cfg.dims[ni])
        })
        .collect();
    let mut out: Vec<Vec<T>> = Vec::with_capacity(cfg.a_values.len());
    let mut it = flat.into_iter();
    for _ in 0..cfg.a_values.len() {
        out.push(it.by_ref().take(cfg.dims.len()).collect());
    }
    out
}

/// One convergence series over `dims`: each row needs residuals that do not
/// grow with `N`; the tolerance is asserted at the largest `N`.
struct Series<'a> {
    suite: Suite,
    check: String,
    a: DiskPoint,
    target: f64,
    tol: f64,
    floor: f64,
    dims: &'a [usize],
}

impl Series<'_> {
    fn rows(&self, values: &[f64], residuals: &[f64], notes: &[String]) -> Vec<Check> {
        let monotone =
            residuals.iter().all(|r| r.is_finite()) && non_increasing(residuals, self.floor);
        let last = self.dims.len() - 1;
        (0..self.dims.len())
            .map(|i| {
                let within = residuals[i] <= self.tol;
                Check {
                    suite: self.suite,
                    check: self.check.clone(),
                    a_re: self.a.value().re,
                    a_im: self.a.value().im,
                    n: self.dims[i],
                    value: values[i],
                    target: self.target,
                    residual: residuals[i],
                    tol: self.tol,
                    pass: monotone && (i < last || within),
                    note: notes[i].clone(),
                }
            })
            .collect()
    }
}

fn spectra(cfg: &RunConfig) -> Vec<Check> {
    let grid = cells(cfg, evaluate_all);
    let mut out = Vec::new();
    for (ai, &a) in cfg.a_values.iter().enumerate() {
        for (ri, &recipe) in Recipe::ALL.iter().enumerate() {
            let target = recipe.target(a);
            let scale = target.abs().max(1.0);
            let mut values = Vec::new();
            let mut residuals = Vec::new();
            let mut notes = Vec::new();
            for cell in &grid[ai] {
                match cell {
                    Ok(v) => {
                        values.push(v[ri].1);
                        residuals.push((v[ri].1 - target).abs() / scale);
                        notes.push(String::new());
                    }
                    Err(e) => {
                        values.push(f64::NAN);
                        residuals.push(f64::NAN);
                        notes.push(e.to_string());
                    }
                }
            }
            let series = Series {
                suite: Suite::Spectra,
                check: recipe.name().to_string(),
                a,
                target,
                tol: cfg.tol_for(recipe.name(), CONVERGENCE_TOL),
                floor: 1e-12,
                dims: &cfg.dims,
            };
            out.extend(series.rows(&values, &residuals, &notes));
        }
    }
    out
}

fn identities(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut policy = TolPolicy::default();
    for (k, &v) in &cfg.tol_overrides {
        if let Ok(id) = k.parse::<IdentityId>() {
            policy.overrides.insert(id, v);
        }
    }
    let report = run_suite(
        &cfg.a_values,
        &cfg.dims,
        &IdentityId::ALL,
        &policy,
        cfg.seed,
    )?;
    Ok(report
        .rows
        .into_iter()
        .map(|r| Check {
            suite: Suite::Identities,
            check: r.id,
            a_re: r.a_re,
            a_im: r.a_im,
            n: r.n,
            value: r.residual,
            target: 0.0,
            residual: r.residual,
            tol: r.tol,
            pass: r.pass,
            note: r.note,
        })
        .collect())
}

type Getter = fn(&DaReport) -> f64;

fn two_projection(cfg: &RunConfig) -> (Vec<Check>, Vec<DaReport>) {
    let grid = cells(cfg, d_a_report);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (ai, &a) in cfg.a_values.iter().enumerate() {
        let r = a.modulus();
        let norms: [(&str, f64, Getter); 3] = [
            ("norm_D", r * r, |d| d.norm_d),
            ("norm_PmQ", 1.0, |d| d.norm_p_minus_q),
            ("norm_PpQ", 1.0 + r, |d| d.norm_p_plus_q),
        ];
        for (name, target, get) in norms {
            let mut values = Vec::new();
            let mut residuals = Vec::new();
            let mut notes = Vec::new();
            for cell in &grid[ai] {
                match cell {
                    Ok(d) => {
                        values.push(get(d));
                        residuals.push((get(d) - target).abs() / target.max(1.0));
                        notes.push(format!("m01={} m10={}", d.dims.m01, d.dims.m10));
                    }
                    Err(e) => {
                        values.push(f64::NAN);
                        residuals.push(f64::NAN);
                        notes.push(e.to_string());
                    }
                }
            }
            let series = Series {
                suite: Suite::Twoproj,
                check: name.to_string(),
                a,
                target,
                tol: cfg.tol_for(name, CONVERGENCE_TOL),
                floor: 1e-12,
                dims: &cfg.dims,
            };
            rows.extend(series.rows(&values, &residuals, &notes));
        }
        let tol = cfg.tol_for("duncan_taylor", DUNCAN_TAYLOR_TOL);
        for (cell, &n) in grid[ai].iter().zip(&cfg.dims) {
            let (value, note) = match cell {
                Ok(d) => (d.duncan_taylor_residual(), String::new()),
                Err(e) => (f64::NAN, e.to_string()),
            };
            rows.push(Check {
                suite: Suite::Twoproj,
                check: "duncan_taylor".into(),
                a_re: a.value().re,
                a_im: a.value().im,
                n,
                value,
                target: 0.0,
                residual: value,
                tol,
                pass: value <= tol,
                note,
            });
        }
    }
    reports.extend(grid.into_iter().flatten().flatten());
    (rows, reports)
}

fn cstar_words(seed: u64) -> Result<Vec<(String, WordExpr)>, CliError> {
    let mut words = Vec::new();
    for w in FIXED_WORDS {
        words.push((w.to_string(), w.parse::<WordExpr>()?));
    }
    for (k, w) in random_hermitian_words(seed, RANDOM_WORDS, RANDOM_WORD_LEN)
        .into_iter()
        .enumerate()
    {
        words.push((format!("word_{:02}", k + 1), w));
    }
    Ok(words)
}

fn cstar(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let words = cstar_words(cfg.seed)?;
    let grid = cells(cfg, |a, n| -> Result<Vec<f64>, hardyops::Error> {
        let pair = eigenspace_pair(a, n, &PairOptions::default())?;
        words
            .iter()
            .map(|(_, w)| spectra_match_on(w, &pair, paired_grid_size(n)))
            .collect()
    });
    let tol = cfg.tol_for(CSTAR_KEY, CSTAR_TOL);
    let mut out = Vec::new();
    for (ai, &a) in cfg.a_values.iter().enumerate() {
        for (wi, (name, w)) in words.iter().enumerate() {
            let mut values = Vec::new();
            let mut notes = Vec::new();
            for cell in &grid[ai] {
                match cell {
                    Ok(d) => {
                        values.push(d[wi]);
                        notes.push(if name.starts_with("word_") {
                            w.to_string()
                        } else {
                            String::new()
                        });
                    }
                    Err(e) => {
                        values.push(f64::NAN);
                        notes.push(e.to_string());
                    }
                }
            }
            let series = Series {
                suite: Suite::Cstar,
                check: name.clone(),
                a,
                target: 0.0,
                tol,
                floor: 1e-11,
                dims: &cfg.dims,
            };
            out.extend(series.rows(&values, &values, &notes));
        }
    }
    Ok(out)
}
