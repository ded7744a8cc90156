//! Spectra, norms and convergence of finite sections.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::DiskPoint;
use crate::linalg::{self, CMat, C64};
use crate::ops::{
    composition_gram, composition_matrix, eigenspace_pair, shift_matrix, OperatorMatrix,
    PairOptions,
};

/// Inputs with relative Hermiticity residual at or above this are rejected.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Relative jitter allowed when checking that errors decrease with `N`.
pub const JITTER: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigs: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub hermiticity_residual: f64,
    pub dim: usize,
}

impl SpectrumReport {
    fn from_eigs(eigs: Vec<f64>, hermiticity_residual: f64) -> Self {
        let min = eigs.first().copied().unwrap_or(f64::NAN);
        let max = eigs.last().copied().unwrap_or(f64::NAN);
        let dim = eigs.len();
        Self {
            eigs,
            min,
            max,
            hermiticity_residual,
            dim,
        }
    }

    pub fn count(&self) -> usize {
        self.eigs.len()
    }
}

/// Eigenvalues of `(X + X^*)/2` for a numerically Hermitian `X`.
pub fn herm_spectrum(x: &OperatorMatrix) -> Result<SpectrumReport> {
    herm_spectrum_of(x.entries())
}

/// [`herm_spectrum`] on a bare matrix.
pub fn herm_spectrum_of(x: &CMat) -> Result<SpectrumReport> {
    let residual = linalg::hermitian_residual(x);
    if residual >= HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(SpectrumReport::from_eigs(
        linalg::herm_eigenvalues(x)?,
        residual,
    ))
}

/// Largest singular value.
pub fn op_norm(x: &OperatorMatrix) -> f64 {
    linalg::spectral_norm(x.entries())
}

/// Outcome of [`fill_check`], with the two quantities behind the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FillOutcome {
    /// Largest distance of an eigenvalue outside `[lo, hi]`.
    pub hull_excess: f64,
    /// Largest distance from a mesh point of `[lo, hi]` to the nearest eigenvalue.
    pub largest_gap: f64,
    pub pass: bool,
}

/// Hull and density test of a discrete spectrum against an interval.
pub fn fill_check(eigs: &[f64], lo: f64, hi: f64, mesh: f64) -> FillOutcome {
    assert!(
        lo <= hi && mesh > 0.0,
        "fill_check: need lo ≤ hi and mesh > 0"
    );
    let mut sorted = eigs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let hull_excess = sorted
        .iter()
        .map(|&e| (lo - e).max(e - hi).max(0.0))
        .fold(0.0, f64::max);
    let steps = ((hi - lo) / mesh).ceil() as usize;
    let largest_gap = (0..=steps)
        .map(|i| (lo + i as f64 * mesh).min(hi))
        .map(|t| linalg::nearest_distance(&sorted, t))
        .fold(0.0, f64::max);
    let pass = !sorted.is_empty() && hull_excess <= mesh && largest_gap <= 2.0 * mesh;
    FillOutcome {
        hull_excess,
        largest_gap,
        pass,
    }
}

/// True iff every eigenvalue lies in `[lo − mesh, hi + mesh]` and every mesh point
/// of `[lo, hi]` has an eigenvalue within `2·mesh`.
pub fn interval_fill_check(report: &SpectrumReport, lo: f64, hi: f64, mesh: f64) -> bool {
    fill_check(&report.eigs, lo, hi, mesh).pass
}

/// The exact compression of `C_a C_a^* = (1−|a|²)^{−1} (I − āS)(I − aS^*)`.
pub fn co_gram_matrix(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { got: n, min: 2 });
    }
    let av = a.value();
    let s = shift_matrix(n).into_entries();
    let id = CMat::identity(n, n);
    let left = &id - s.map(|z| z * av.conj());
    let right = &id - s.adjoint().map(|z| z * av);
    let scale = C64::new(1.0 / a.defect(), 0.0);
    OperatorMatrix::new(
        linalg::matmul(&left, &right).map(|z| z * scale),
        crate::ops::Basis::Analytic,
        "C_aC_a*",
    )
}

/// The compression of the self-commutator `[C_a^*, C_a] = C_a^*C_a − C_aC_a^*`.
pub fn commutator_matrix(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    composition_gram(a, n)?
        .sub(&co_gram_matrix(a, n)?)
        .map(|m| m.with_label("[C_a*, C_a]"))
}

/// Scalar quantities whose limits are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Recipe {
    /// `‖C_a‖ → (1+|a|)/(1−|a|)`.
    CompositionNorm,
    /// `min σ(C_a^*C_a) → (1−|a|)/(1+|a|)`.
    GramMin,
    /// `max σ(C_a^*C_a) → (1+|a|)/(1−|a|)`.
    GramMax,
    /// `‖[C_a^*, C_a]‖ → 4|a|/(1−|a|²)`.
    CommutatorNorm,
    /// `‖PQ‖ → |a|`.
    ProductNorm,
    /// `‖PQP‖ → |a|²`.
    DNorm,
    /// `‖P − Q‖ → 1`.
    DifferenceNorm,
    /// `min σ(P + Q) → 1 − |a|`.
    SumMin,
    /// `max σ(P + Q) → 1 + |a|`.
    SumMax,
}

impl Recipe {
    pub const ALL: [Recipe; 9] = [
        Recipe::CompositionNorm,
        Recipe::GramMin,
        Recipe::GramMax,
        Recipe::CommutatorNorm,
        Recipe::ProductNorm,
        Recipe::DNorm,
        Recipe::DifferenceNorm,
        Recipe::SumMin,
        Recipe::SumMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::CompositionNorm => "norm_C",
            Recipe::GramMin => "gram_min",
            Recipe::GramMax => "gram_max",
            Recipe::CommutatorNorm => "norm_commutator",
            Recipe::ProductNorm => "norm_PQ",
            Recipe::DNorm => "norm_D",
            Recipe::DifferenceNorm => "norm_PmQ",
            Recipe::SumMin => "PpQ_min",
            Recipe::SumMax => "PpQ_max",
        }
    }

    pub fn target(self, a: DiskPoint) -> f64 {
        let r = a.modulus();
        match self {
            // ‖C_a‖² = max σ(C_a^*C_a).
            Recipe::CompositionNorm => ((1.0 + r) / (1.0 - r)).sqrt(),
            Recipe::GramMax => (1.0 + r) / (1.0 - r),
            Recipe::GramMin => (1.0 - r) / (1.0 + r),
            Recipe::CommutatorNorm => 4.0 * r / (1.0 - r * r),
            Recipe::ProductNorm => r,
            Recipe::DNorm => r * r,
            Recipe::DifferenceNorm => 1.0,
            Recipe::SumMin => 1.0 - r,
            Recipe::SumMax => 1.0 + r,
        }
    }

    /// `true` when the finite-section value approaches the target from below.
    pub fn from_below(self) -> bool {
        !matches!(self, Recipe::GramMin | Recipe::SumMin)
    }

    pub fn evaluate(self, a: DiskPoint, n: usize) -> Result<f64> {
        match self {
            Recipe::CompositionNorm => Ok(op_norm(&composition_matrix(a, n)?)),
            Recipe::GramMin => Ok(herm_spectrum(&composition_gram(a, n)?)?.min),
            Recipe::GramMax => Ok(herm_spectrum(&composition_gram(a, n)?)?.max),
            Recipe::CommutatorNorm => {
                let s = herm_spectrum(&commutator_matrix(a, n)?)?;
                Ok(s.max.abs().max(s.min.abs()))
            }
            _ => {
                let pair = eigenspace_pair(a, n, &PairOptions::default())?;
                let (p, q) = pair.compressed();
                Ok(match self {
                    Recipe::ProductNorm => linalg::spectral_norm(&linalg::matmul(&p, &q)),
                    Recipe::DNorm => herm_spectrum_of(&linalg::chain(&[&p, &q, &p]))?.max,
                    Recipe::DifferenceNorm => {
                        let s = herm_spectrum_of(&(&p - &q))?;
                        s.max.abs().max(s.min.abs())
                    }
                    Recipe::SumMin => herm_spectrum_of(&(&p + &q))?.min,
                    Recipe::SumMax => herm_spectrum_of(&(&p + &q))?.max,
                    _ => unreachable!("handled above"),
                })
            }
        }
    }
}

/// Every recipe at one `(a, N)`, building the Gram matrix and the
/// eigenspace pair once. Order follows [`Recipe::ALL`].
pub fn evaluate_all(a: DiskPoint, n: usize) -> Result<Vec<(Recipe, f64)>> {
    let norm_c = op_norm(&composition_matrix(a, n)?);
    let gram = herm_spectrum(&composition_gram(a, n)?)?;
    let comm = herm_spectrum(&commutator_matrix(a, n)?)?;
    let pair = eigenspace_pair(a, n, &PairOptions::default())?;
    let (p, q) = pair.compressed();
    let d = herm_spectrum_of(&linalg::chain(&[&p, &q, &p]))?;
    let diff = herm_spectrum_of(&(&p - &q))?;
    let sum = herm_spectrum_of(&(&p + &q))?;
    Ok(vec![
        (Recipe::CompositionNorm, norm_c),
        (Recipe::GramMin, gram.min),
        (Recipe::GramMax, gram.max),
        (Recipe::CommutatorNorm, comm.max.abs().max(comm.min.abs())),
        (
            Recipe::ProductNorm,
            linalg::spectral_norm(&linalg::matmul(&p, &q)),
        ),
        (Recipe::DNorm, d.max),
        (Recipe::DifferenceNorm, diff.max.abs().max(diff.min.abs())),
        (Recipe::SumMin, sum.min),
        (Recipe::SumMax, sum.max),
    ])
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown recipe {s}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub recipe: Recipe,
    pub a_re: f64,
    pub a_im: f64,
    pub target: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Errors non-increasing in `N` up to [`JITTER`] (or below `floor`).
    pub monotone: bool,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    recipe: &'a str,
    a_re: f64,
    a_im: f64,
    #[serde(rename = "N")]
    n: usize,
    value: f64,
    target: f64,
    abs_error: f64,
}

impl ConvergenceTable {
    pub fn last_error(&self) -> f64 {
        self.rows.last().map(|r| r.abs_error).unwrap_or(f64::NAN)
    }

    /// CSV with columns `recipe,a_re,a_im,N,value,target,abs_error`.
    pub fn to_csv(&self) -> Result<String> {
        tables_to_csv(std::slice::from_ref(self))
    }
}

/// Several tables in one CSV document with a single header.
pub fn tables_to_csv(tables: &[ConvergenceTable]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in tables {
        for r in &t.rows {
            w.serialize(CsvRow {
                recipe: t.recipe.name(),
                a_re: t.a_re,
                a_im: t.a_im,
                n: r.n,
                value: r.value,
                target: t.target,
                abs_error: r.abs_error,
            })
            .map_err(|e| Error::Domain(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Domain(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Domain(e.to_string()))
}

/// `true` when each value is at most `(1 + JITTER)` times its predecessor, or
/// below `floor` (differences at rounding level carry no ordering).
pub fn non_increasing(values: &[f64], floor: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + JITTER) || w[1] <= floor)
}

/// Evaluates `recipe` at every `N` in `dims` (in parallel) against `target`.
pub fn convergence_sweep(
    recipe: Recipe,
    a: DiskPoint,
    dims: &[usize],
    target: f64,
) -> Result<ConvergenceTable> {
    if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "dims must be nonempty and strictly increasing".into(),
        ));
    }
    let values: Vec<f64> = dims
        .par_iter()
        .map(|&n| {
            recipe.evaluate(a, n).map_err(|e| Error::AtDimension {
                dim: n,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ConvergenceRow> = dims
        .iter()
        .zip(&values)
        .map(|(&n, &value)| ConvergenceRow {
            n,
            value,
            abs_error: (value - target).abs(),
        })
        .collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.abs_error).collect();
    let monotone = non_increasing(&errors, 1e-12 * target.abs().max(1.0));
    let v = a.value();
    Ok(ConvergenceTable {
        recipe,
        a_re: v.re,
        a_im: v.im,
        target,
        rows,
        monotone,
    })
}

/// Residual of a candidate eigenpair under a larger truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResidual {
    pub eigenvalue: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// `‖X_{2N} v − λ v‖` with `v` zero-padded from dimension `N`.
    pub residual: f64,
}

/// For the `count` eigenpairs of `small` closest to `center`, the residual of the
/// zero-padded eigenvector under `large` (whose leading block contains `small`).
pub fn eigen_residuals_under_padding(
    small: &CMat,
    large: &CMat,
    center: f64,
    count: usize,
) -> Result<Vec<EigenResidual>> {
    let n = small.nrows();
    let (vals, vecs) = linalg::herm_eigen(small)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| {
        (vals[i] - center)
            .abs()
            .total_cmp(&(vals[j] - center).abs())
    });
    let big = large.nrows();
    let mut out = Vec::new();
    for &i in order.iter().take(count) {
        let mut v = crate::linalg::CVec::zeros(big);
        v.rows_mut(0, n).copy_from(&vecs.column(i));
        let r = large * &v - &v * C64::new(vals[i], 0.0);
        out.push(EigenResidual {
            eigenvalue: vals[i],
            n,
            residual: r.norm(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::ops::Basis;

    fn op(m: CMat) -> OperatorMatrix {
        OperatorMatrix::new(m, Basis::Analytic, "x").unwrap()
    }

    #[test]
    fn identity_and_diagonal_spectra() {
        let s = herm_spectrum(&op(CMat::identity(8, 8))).unwrap();
        assert!(s.eigs.iter().all(|&e| (e - 1.0).abs() < 1e-15));
        let d = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![
            ONE,
            C64::new(0.0, 0.0),
        ]));
        let s = herm_spectrum(&op(d)).unwrap();
        assert_eq!(s.eigs, vec![0.0, 1.0]);
        assert_eq!((s.min, s.max), (0.0, 1.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMat::identity(3, 3);
        m[(0, 2)] = ONE;
        assert!(matches!(
            herm_spectrum(&op(m)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn fill_examples() {
        let r = SpectrumReport::from_eigs(vec![0.0, 1.0], 0.0);
        assert!(interval_fill_check(&r, 0.0, 1.0, 0.4));
        assert!(!interval_fill_check(&r, 0.0, 1.0, 0.05));
        let dense: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        assert!(fill_check(&dense, 0.0, 1.0, 0.02).pass);
        let mut outlier = dense.clone();
        outlier.push(1.5);
        assert!(!fill_check(&outlier, 0.0, 1.0, 0.02).pass);
    }

    #[test]
    fn zero_operator_norm() {
        assert_eq!(op_norm(&op(CMat::zeros(4, 4))), 0.0);
    }

    #[test]
    fn co_gram_matches_padded_product_on_low_modes() {
        let a = DiskPoint::new(C64::new(0.3, 0.4)).unwrap();
        let n = 32;
        let exact = co_gram_matrix(a, n).unwrap();
        let big = composition_matrix(a, 16 * n).unwrap().into_entries();
        let prod = linalg::matmul(&big, &big.adjoint());
        let d = linalg::leading(&prod, n) - exact.entries();
        assert!(linalg::frobenius(&d) < 1e-10, "{}", linalg::frobenius(&d));
    }

    #[test]
    fn commutator_spectrum_is_symmetric_interval_image() {
        let a = DiskPoint::real(0.5).unwrap();
        let s = herm_spectrum(&commutator_matrix(a, 128).unwrap()).unwrap();
        let bound = 8.0 / 3.0;
        assert!(s.max <= bound + 1e-10 && s.min >= -bound - 1e-10);
        assert!(s.max > 2.4 && s.min < -2.4);
    }

    #[test]
    fn sweep_of_composition_norm() {
        let a = DiskPoint::real(0.5).unwrap();
        let t = convergence_sweep(Recipe::CompositionNorm, a, &[16, 32, 64], 3f64.sqrt()).unwrap();
        assert!(t.monotone);
        assert!(t.last_error() < 1e-2);
        assert!(t.rows.windows(2).all(|w| w[0].value <= w[1].value + 1e-12));
        let last = t.rows.last().unwrap().value;
        let exact = convergence_sweep(Recipe::CompositionNorm, a, &[16, 32, 64], last).unwrap();
        assert_eq!(exact.last_error(), 0.0);
        assert!(convergence_sweep(Recipe::CompositionNorm, a, &[32, 16], 3.0).is_err());
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("recipe,a_re,a_im,N,value,target,abs_error\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn recipe_names_round_trip() {
        for r in Recipe::ALL {
            assert_eq!(r.name().parse::<Recipe>().unwrap(), r);
        }
    }

    #[test]
    fn non_increasing_with_jitter_and_floor() {
        assert!(non_increasing(&[1.0, 1.05, 0.5], 0.0));
        assert!(!non_increasing(&[1.0, 1.2], 0.0));
        assert!(non_increasing(&[1e-14, 3e-14], 1e-12));
    }

    #[test]
    fn evaluate_all_matches_single_recipes() {
        let a = DiskPoint::polar_deg(0.5, 45.0).unwrap();
        let all = evaluate_all(a, 32).unwrap();
        assert_eq!(all.len(), Recipe::ALL.len());
        for (r, v) in all {
            let single = r.evaluate(a, 32).unwrap();
            assert!((v - single).abs() < 1e-12, "{r}: {v} vs {single}");
        }
    }
}
