//! Geometry of a pair of orthogonal projections: the five-subspace
//! decomposition, principal angles, eigenvalue correspondences, and the product
//! `D_a = PQP` of the eigenspace projections of `C_a`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::DiskPoint;
use crate::linalg::{self, CMat, CVec, C64, ONE};
use crate::ops::{eigenspace_pair, PairOptions, ProjectionPair};
use crate::spectral::{
    eigen_residuals_under_padding, herm_spectrum_of, EigenResidual, SpectrumReport,
};

/// Default separation tolerance for the C_a pair.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Dimensions of the four corner subspaces and the generic part.
///
/// `m00 = R(P)∩R(Q)`, `m01 = R(P)∩N(Q)`, `m10 = N(P)∩R(Q)`, `m11 = N(P)∩N(Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceDims {
    pub m00: usize,
    pub m01: usize,
    pub m10: usize,
    pub m11: usize,
    pub generic: usize,
}

impl SubspaceDims {
    pub fn total(&self) -> usize {
        self.m00 + self.m01 + self.m10 + self.m11 + self.generic
    }
}

/// Halmos model of a pair: corner dimensions plus the principal angles of the
/// generic part, each in `(0, π/2)`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalmosModel {
    pub dims: SubspaceDims,
    pub angle_samples: Vec<f64>,
    pub tol: f64,
}

impl HalmosModel {
    /// `P₀ = [[I,0],[0,0]]`, `Q₀ = [[C²,CS],[CS,S²]]` on the generic part,
    /// interleaved as one `2 × 2` block per angle.
    pub fn generic_blocks(&self) -> (CMat, CMat) {
        let g = self.angle_samples.len();
        let mut p = CMat::zeros(2 * g, 2 * g);
        let mut q = CMat::zeros(2 * g, 2 * g);
        for (i, &t) in self.angle_samples.iter().enumerate() {
            let (s, c) = t.sin_cos();
            let k = 2 * i;
            p[(k, k)] = ONE;
            q[(k, k)] = C64::new(c * c, 0.0);
            q[(k, k + 1)] = C64::new(c * s, 0.0);
            q[(k + 1, k)] = C64::new(c * s, 0.0);
            q[(k + 1, k + 1)] = C64::new(s * s, 0.0);
        }
        (p, q)
    }

    /// Predicted spectrum of `P − Q`, ascending.
    pub fn difference_spectrum(&self) -> Vec<f64> {
        let d = &self.dims;
        let mut out = vec![0.0; d.m00 + d.m11];
        out.extend(std::iter::repeat_n(1.0, d.m01));
        out.extend(std::iter::repeat_n(-1.0, d.m10));
        for &t in &self.angle_samples {
            out.push(t.sin());
            out.push(-t.sin());
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Predicted spectrum of `P + Q`, ascending.
    pub fn sum_spectrum(&self) -> Vec<f64> {
        let d = &self.dims;
        let mut out = vec![2.0; d.m00];
        out.extend(std::iter::repeat_n(0.0, d.m11));
        out.extend(std::iter::repeat_n(1.0, d.m01 + d.m10));
        for &t in &self.angle_samples {
            out.push(1.0 + t.cos());
            out.push(1.0 - t.cos());
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Predicted spectrum of `PQP`, ascending.
    pub fn compression_spectrum(&self) -> Vec<f64> {
        let d = &self.dims;
        let mut out = vec![1.0; d.m00];
        out.extend(std::iter::repeat_n(0.0, d.m01 + d.m10 + d.m11));
        for &t in &self.angle_samples {
            out.push(t.cos().powi(2));
            out.push(0.0);
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

fn check_projection(x: &CMat, tol: f64) -> Result<()> {
    let residual = linalg::hermitian_residual(x);
    if residual > tol.max(1e-12) {
        return Err(Error::NotHermitian { residual });
    }
    let idem = linalg::spectral_norm(&(linalg::matmul(x, x) - x));
    if idem > 10.0 * tol {
        return Err(Error::Domain(format!(
            "not idempotent: ‖X² − X‖ = {idem:.3e}"
        )));
    }
    Ok(())
}

/// Orthonormal basis of the range of a projection.
fn range_basis(x: &CMat) -> Result<CMat> {
    let (vals, vecs) = linalg::herm_eigen(x)?;
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    Ok(vecs.select_columns(&cols))
}

/// Number of singular values at or below `thr`; a value in `(thr, 10·thr)`
/// is ill-separated.
fn count_small(m: &CMat, thr: f64) -> Result<usize> {
    let sv = linalg::singular_values(m);
    if let Some(&v) = sv.iter().find(|&&v| v > thr && v < 10.0 * thr) {
        return Err(Error::IllSeparated { value: v });
    }
    Ok(sv.iter().filter(|&&v| v <= thr).count())
}

/// Five-subspace decomposition of a projection pair.
///
/// Corner dimensions are counted from singular values of `(I−Q)U_P`, `QU_P`
/// and `PU_Q` (`U_P`, `U_Q` orthonormal range bases) with threshold `10·tol`.
/// `m11` follows from `dim(R(P)+R(Q)) = rank P + rank Q − m00`.
pub fn five_subspaces(p: &CMat, q: &CMat, tol: f64) -> Result<HalmosModel> {
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch {
            left: p.nrows(),
            right: q.nrows(),
        });
    }
    check_projection(p, tol)?;
    check_projection(q, tol)?;
    let n = p.nrows();
    let thr = 10.0 * tol;
    let up = range_basis(p)?;
    let uq = range_basis(q)?;
    let (rp, rq) = (up.ncols(), uq.ncols());

    let eye = CMat::identity(n, n);
    let m00 = count_small(&linalg::matmul(&(&eye - q), &up), thr)?;
    let m01 = count_small(&linalg::matmul(q, &up), thr)?;
    let m10 = count_small(&linalg::matmul(p, &uq), thr)?;
    let m11 = n + m00 - rp - rq;
    let gen_p = rp - m00 - m01;
    let gen_q = rq - m00 - m10;
    if gen_p != gen_q {
        return Err(Error::IllSeparated {
            value: gen_p as f64 - gen_q as f64,
        });
    }

    // cosines of principal angles: m00 ones, then the generic part
    let cosines = linalg::singular_values(&up.ad_mul(&uq));
    let mut angle_samples: Vec<f64> = cosines
        .iter()
        .skip(m00)
        .take(gen_p)
        .map(|c| c.clamp(0.0, 1.0).acos())
        .collect();
    angle_samples.sort_by(f64::total_cmp);
    Ok(HalmosModel {
        dims: SubspaceDims {
            m00,
            m01,
            m10,
            m11,
            generic: 2 * gen_p,
        },
        angle_samples,
        tol,
    })
}

/// Predictions attached to one eigenvalue `λ ∉ {0,1}` of `PQP`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaCheck {
    pub lambda: f64,
    /// Distance from `±(1−λ)^{1/2}` to `σ(P−Q)`.
    pub difference_error: f64,
    /// Distance from the printed `±(1−λ²)^{1/2}` to `σ(P−Q)`.
    pub printed_difference_error: f64,
    /// Distance from `1 ± λ^{1/2}` to `σ(P+Q)`.
    pub sum_error: f64,
}

/// Predictions attached to one eigenvalue `μ ∉ {0,±1}` of `P − Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCheck {
    pub mu: f64,
    /// Distance from `1 − μ²` to `σ(PQP)`.
    pub compression_error: f64,
    /// Distance from `1 ± (1−μ²)^{1/2}` to `σ(P+Q)`.
    pub sum_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub tol: f64,
    pub pqp: Vec<f64>,
    pub difference: Vec<f64>,
    pub sum: Vec<f64>,
    pub lambda_checks: Vec<LambdaCheck>,
    pub mu_checks: Vec<MuCheck>,
    /// Largest `max(‖(I−P)v‖, ‖(I−Q)v‖)` over unit eigenvectors `v` of `PQP`
    /// with eigenvalue within `tol` of 1; zero when there are none.
    pub fixed_point_residual: f64,
    pub fixed_point_count: usize,
    /// Largest error of every corrected-form prediction.
    pub corrected_max_error: f64,
    /// Largest error of the printed `±(1−λ²)^{1/2}` predictions.
    pub printed_max_error: f64,
}

impl CorrespondenceReport {
    pub fn corrected_pass(&self) -> bool {
        self.corrected_max_error <= self.tol && self.fixed_point_residual <= self.tol
    }
}

fn pm_error(sorted: &[f64], center: f64, offset: f64) -> f64 {
    linalg::nearest_distance(sorted, center + offset)
        .max(linalg::nearest_distance(sorted, center - offset))
}

/// Cross-checks the eigenvalue lists of `PQP`, `P − Q` and `P + Q`.
///
/// Eigenvalues within `10·tol` of an excluded value are skipped.
pub fn eigen_correspondence_check(p: &CMat, q: &CMat, tol: f64) -> Result<CorrespondenceReport> {
    let pqp = linalg::hermitize(&linalg::chain(&[p, q, p]));
    let (pqp_vals, pqp_vecs) = linalg::herm_eigen(&pqp)?;
    let difference = linalg::herm_eigenvalues(&linalg::hermitize(&(p - q)))?;
    let sum = linalg::herm_eigenvalues(&linalg::hermitize(&(p + q)))?;
    let sep = 10.0 * tol;

    let lambda_checks: Vec<LambdaCheck> = pqp_vals
        .iter()
        .filter(|&&l| l > sep && l < 1.0 - sep)
        .map(|&l| LambdaCheck {
            lambda: l,
            difference_error: pm_error(&difference, 0.0, (1.0 - l).sqrt()),
            printed_difference_error: pm_error(&difference, 0.0, (1.0 - l * l).sqrt()),
            sum_error: pm_error(&sum, 1.0, l.sqrt()),
        })
        .collect();
    let mu_checks: Vec<MuCheck> = difference
        .iter()
        .filter(|&&m| m.abs() > sep && m.abs() < 1.0 - sep)
        .map(|&m| MuCheck {
            mu: m,
            compression_error: linalg::nearest_distance(&pqp_vals, 1.0 - m * m),
            sum_error: pm_error(&sum, 1.0, (1.0 - m * m).sqrt()),
        })
        .collect();

    let eye = CMat::identity(p.nrows(), p.ncols());
    let mut fixed_point_residual: f64 = 0.0;
    let mut fixed_point_count = 0;
    for (i, &l) in pqp_vals.iter().enumerate() {
        if (l - 1.0).abs() <= tol {
            let v = pqp_vecs.column(i);
            let rp = ((&eye - p) * v).norm();
            let rq = ((&eye - q) * v).norm();
            fixed_point_residual = fixed_point_residual.max(rp.max(rq));
            fixed_point_count += 1;
        }
    }

    let corrected_max_error = lambda_checks
        .iter()
        .map(|c| c.difference_error.max(c.sum_error))
        .chain(
            mu_checks
                .iter()
                .map(|c| c.compression_error.max(c.sum_error)),
        )
        .fold(0.0, f64::max);
    let printed_max_error = lambda_checks
        .iter()
        .map(|c| c.printed_difference_error)
        .fold(0.0, f64::max);
    Ok(CorrespondenceReport {
        tol,
        pqp: pqp_vals,
        difference,
        sum,
        lambda_checks,
        mu_checks,
        fixed_point_residual,
        fixed_point_count,
        corrected_max_error,
        printed_max_error,
    })
}

/// `|‖P+Q‖ − 1 − ‖PQ‖|`.
pub fn duncan_taylor_check(p: &CMat, q: &CMat) -> Result<f64> {
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch {
            left: p.nrows(),
            right: q.nrows(),
        });
    }
    if linalg::spectral_norm(p) < 0.5 || linalg::spectral_norm(q) < 0.5 {
        return Err(Error::ZeroProjection);
    }
    let sum = linalg::spectral_norm(&(p + q));
    let prod = linalg::spectral_norm(&linalg::matmul(p, q));
    Ok((sum - 1.0 - prod).abs())
}

/// Summary of `D_a = PQP` for the eigenspace projections of `C_a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "DaReportJson")]
pub struct DaReport {
    pub a: DiskPoint,
    pub n: usize,
    pub norm_d: f64,
    pub norm_p_minus_q: f64,
    pub norm_p_plus_q: f64,
    pub d_spectrum: SpectrumReport,
    pub dims: SubspaceDims,
    /// Spectrum of `P + Q` on the retained frame.
    pub sum_spectrum: SpectrumReport,
}

impl DaReport {
    /// `|‖P+Q‖ − 1 − ‖D‖^{1/2}|`.
    pub fn duncan_taylor_residual(&self) -> f64 {
        (self.norm_p_plus_q - 1.0 - self.norm_d.sqrt()).abs()
    }
}

#[derive(Serialize)]
struct SpectrumSummary {
    min: f64,
    max: f64,
    count: usize,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct DaReportJson {
    a: DiskPoint,
    #[serde(rename = "N")]
    n: usize,
    norm_D: f64,
    norm_PmQ: f64,
    norm_PpQ: f64,
    dims: SubspaceDims,
    d_spectrum: SpectrumSummary,
}

impl From<DaReport> for DaReportJson {
    fn from(r: DaReport) -> Self {
        Self {
            a: r.a,
            n: r.n,
            norm_D: r.norm_d,
            norm_PmQ: r.norm_p_minus_q,
            norm_PpQ: r.norm_p_plus_q,
            dims: r.dims,
            d_spectrum: SpectrumSummary {
                min: r.d_spectrum.min,
                max: r.d_spectrum.max,
                count: r.d_spectrum.count(),
            },
        }
    }
}

/// Norms, spectra and subspace dimensions for the eigenspace pair of `C_a`,
/// all evaluated on the compressed pair.
pub fn d_a_report(a: DiskPoint, n: usize) -> Result<DaReport> {
    let pair = eigenspace_pair(a, n, &PairOptions::default())?;
    d_a_report_from(&pair)
}

/// [`d_a_report`] for an already built pair.
pub fn d_a_report_from(pair: &ProjectionPair) -> Result<DaReport> {
    let (p, q) = pair.compressed();
    let d = linalg::hermitize(&linalg::chain(&[&p, &q, &p]));
    let d_spectrum = herm_spectrum_of(&d)?;
    let sum_spectrum = herm_spectrum_of(&(&p + &q))?;
    let model = five_subspaces(&p, &q, DEFAULT_TOL)?;
    Ok(DaReport {
        a: pair.a,
        n: pair.dim(),
        norm_d: d_spectrum.max.max(-d_spectrum.min),
        norm_p_minus_q: linalg::spectral_norm(&(&p - &q)),
        norm_p_plus_q: sum_spectrum.max.max(-sum_spectrum.min),
        d_spectrum,
        dims: model.dims,
        sum_spectrum,
    })
}

/// A projection pair with known Halmos data, in a random orthonormal frame.
#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub p: CMat,
    pub q: CMat,
    pub dims: SubspaceDims,
    /// Ascending.
    pub angles: Vec<f64>,
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Haar-like random unitary from a seeded Gaussian matrix.
pub fn random_unitary(seed: u64, n: usize) -> Result<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    linalg::orthonormalize(&gaussian_matrix(&mut rng, n, n))
}

/// Pair with corner dimensions `(m00, m01, m10, m11)` and generic angles
/// `angles ⊂ (0, π/2)`, conjugated by a seeded random unitary.
pub fn synthetic_pair(
    seed: u64,
    m00: usize,
    m01: usize,
    m10: usize,
    m11: usize,
    angles: &[f64],
) -> Result<SyntheticPair> {
    if let Some(&t) = angles
        .iter()
        .find(|&&t| !(t > 0.0 && t < std::f64::consts::FRAC_PI_2))
    {
        return Err(Error::Domain(format!("angle {t} outside (0, π/2)")));
    }
    let corners = m00 + m01 + m10 + m11;
    let n = corners + 2 * angles.len();
    if n == 0 {
        return Err(Error::DimensionTooSmall { got: 0, min: 1 });
    }
    let mut p0 = CMat::zeros(n, n);
    let mut q0 = CMat::zeros(n, n);
    for i in 0..m00 {
        p0[(i, i)] = ONE;
        q0[(i, i)] = ONE;
    }
    for i in m00..m00 + m01 {
        p0[(i, i)] = ONE;
    }
    for i in m00 + m01..m00 + m01 + m10 {
        q0[(i, i)] = ONE;
    }
    let mut sorted = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    for (j, &t) in sorted.iter().enumerate() {
        let k = corners + 2 * j;
        let (s, c) = t.sin_cos();
        p0[(k, k)] = ONE;
        q0[(k, k)] = C64::new(c * c, 0.0);
        q0[(k, k + 1)] = C64::new(c * s, 0.0);
        q0[(k + 1, k)] = C64::new(c * s, 0.0);
        q0[(k + 1, k + 1)] = C64::new(s * s, 0.0);
    }
    let u = random_unitary(seed, n)?;
    let conj = |x: &CMat| linalg::hermitize(&linalg::chain(&[&u, x, &u.adjoint()]));
    Ok(SyntheticPair {
        p: conj(&p0),
        q: conj(&q0),
        dims: SubspaceDims {
            m00,
            m01,
            m10,
            m11,
            generic: 2 * sorted.len(),
        },
        angles: sorted,
    })
}

/// Projections onto two seeded random subspaces of `C^n` of ranks `rp`, `rq`.
pub fn random_pair(seed: u64, n: usize, rp: usize, rq: usize) -> Result<(CMat, CMat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut proj = |r: usize| -> Result<CMat> {
        if r == 0 {
            return Ok(CMat::zeros(n, n));
        }
        let b = linalg::orthonormalize(&gaussian_matrix(&mut rng, n, r))?;
        Ok(linalg::hermitize(&(&b * b.adjoint())))
    };
    let p = proj(rp)?;
    let q = proj(rq)?;
    Ok((p, q))
}

/// Residuals of candidate eigenvectors at `N` under the operator at `2N`, for
/// `P + Q` (centre 1) and `D_a` (centre `|a|²/2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoEigenvalueDiagnostic {
    pub a_re: f64,
    pub a_im: f64,
    pub sum: Vec<EigenResidual>,
    pub d: Vec<EigenResidual>,
}

fn full_words(pair: &ProjectionPair) -> (CMat, CMat) {
    let p = pair.p.entries();
    let q = pair.q.entries();
    (p + q, linalg::hermitize(&linalg::chain(&[p, q, p])))
}

/// Diagnostic for the absence of point spectrum: for each `N` in `dims`, the
/// three eigenpairs nearest the interval midpoint and their residuals under
/// the `2N` operator. Non-vanishing residuals as `N` grows are the expected
/// signature.
pub fn no_eigenvalue_diagnostic(a: DiskPoint, dims: &[usize]) -> Result<NoEigenvalueDiagnostic> {
    let opts = PairOptions::default();
    let r2 = a.modulus().powi(2);
    let mut sum = Vec::new();
    let mut d = Vec::new();
    for &n in dims {
        let (s_small, d_small) = full_words(&eigenspace_pair(a, n, &opts)?);
        let (s_large, d_large) = full_words(&eigenspace_pair(a, 2 * n, &opts)?);
        sum.extend(eigen_residuals_under_padding(&s_small, &s_large, 1.0, 3)?);
        d.extend(eigen_residuals_under_padding(
            &d_small,
            &d_large,
            r2 / 2.0,
            3,
        )?);
    }
    Ok(NoEigenvalueDiagnostic {
        a_re: a.value().re,
        a_im: a.value().im,
        sum,
        d,
    })
}

/// The `+1` eigenvector of the compressed `P − Q` at `N` compared with the one
/// at `2N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePersistence {
    #[serde(rename = "N")]
    pub n: usize,
    /// `|⟨v_N, v_{2N}⟩|` with `v_N` zero-padded; 1 for a convergent line.
    pub overlap: f64,
    /// `‖v_N[0..16]‖`.
    pub low_mode_mass: f64,
}

/// Unit `+1` eigenvector of the compressed `P − Q`, as H² coefficients.
fn plus_one_line(a: DiskPoint, n: usize) -> Result<CVec> {
    let pair = eigenspace_pair(a, n, &PairOptions::default())?;
    let (p, q) = pair.compressed();
    let (vals, vecs) = linalg::herm_eigen(&linalg::hermitize(&(&p - &q)))?;
    let top = vals.len() - 1;
    if (vals[top] - 1.0).abs() > 10.0 * DEFAULT_TOL {
        return Err(Error::Domain(format!("no +1 eigenvalue at N = {n}")));
    }
    let u = pair.frame.as_ref().ok_or(Error::BasisMismatch)?;
    Ok(u * vecs.column(top))
}

/// Whether the finite-section `R(P)∩N(Q)` line converges as `N` doubles.
pub fn line_persistence(a: DiskPoint, n: usize) -> Result<LinePersistence> {
    let v = plus_one_line(a, n)?;
    let w = plus_one_line(a, 2 * n)?;
    let overlap = w.rows(0, n).dotc(&v).norm();
    let low = v.rows(0, 16.min(n)).norm();
    Ok(LinePersistence {
        n,
        overlap,
        low_mode_mass: low,
    })
}
