//! Projections onto the eigenspaces `N(C_a − I)` and `N(C_a + I)`.
//!
//! `N(C_a − I)` is the closed span of the even powers `φ_ω^{2k}` and `N(C_a + I)`
//! that of the odd powers, ω the fixed point of φ_a. The QR construction keeps
//! the powers `φ_ω^k`, `k < K`, whose coefficients beyond `N` are negligible, so
//! every retained basis vector is represented exactly up to that tail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{fixed_point, DiskPoint};
use crate::linalg::{self, frobenius, CMat, C64};

use super::composition::{composition_columns, composition_gram, composition_matrix, cut};
use super::{require_dim, OperatorMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    /// `N(C_a − I)`.
    Even,
    /// `N(C_a + I)`.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionMethod {
    QrBasis,
    AndoFormula,
}

/// Controls the size of the retained eigenvector basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOptions {
    /// Largest admissible norm of the coefficients `N … 2N−1` of a basis vector.
    pub tail_tol: f64,
    /// Optional cap `K ≤ cut_ratio · N` on the number of retained powers.
    pub cut_ratio: Option<f64>,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            cut_ratio: None,
        }
    }
}

/// The two eigenspace projections of `C_a` at truncation dimension `N`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub a: DiskPoint,
    pub method: ProjectionMethod,
    /// `P_{N(C_a−I)}` as an `N × N` matrix.
    pub p: OperatorMatrix,
    /// `P_{N(C_a+I)}` as an `N × N` matrix.
    pub q: OperatorMatrix,
    /// Orthonormal frame (`N × K`) of the span of both retained bases (QR only).
    pub frame: Option<CMat>,
    /// Number `K` of retained powers (QR) or `N` (Ando).
    pub rank: usize,
    /// Largest relative `‖X − X^*‖_F / ‖X‖_F` over `P`, `Q`. The Ando pair is
    /// measured on its leading `N/2` block.
    pub hermitian_residual: f64,
    /// Largest `‖X² − X‖_F` over `P`, `Q`. QR: the bound `‖B^*B − I‖_F`; Ando: the
    /// leading `N/2` block of the padded square.
    pub idempotent_residual: f64,
}

impl ProjectionPair {
    /// `(P̃, Q̃)`: the pair restricted to the span of the retained eigenvectors.
    ///
    /// For the QR method this is `U^* P U`, `U^* Q U` with `U` the frame; both are
    /// exact projections there. The Ando pair is returned unchanged.
    pub fn compressed(&self) -> (CMat, CMat) {
        match &self.frame {
            Some(u) => {
                let pc = linalg::chain(&[&u.adjoint(), self.p.entries(), u]);
                let qc = linalg::chain(&[&u.adjoint(), self.q.entries(), u]);
                (linalg::hermitize(&pc), linalg::hermitize(&qc))
            }
            None => (self.p.entries().clone(), self.q.entries().clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }
}

/// Number `K` of retained powers `φ_ω^k`, `k < K`: the largest odd count whose
/// tails all stay below `tail_tol`, optionally capped by `cut_ratio`.
///
/// An odd count gives the even span one more dimension than the odd span, which
/// mirrors the one-dimensional `N(C_a−I) ∩ N(C_a+I)^⊥`.
pub fn retained_powers(
    a: DiskPoint,
    n: usize,
    opts: &PairOptions,
) -> Result<(usize, Vec<Vec<C64>>)> {
    require_dim(n, 4)?;
    let w = fixed_point(a);
    let cols = composition_columns(w, n, 2 * n);
    let mut k = 0;
    while k < cols.len() {
        let tail: f64 = cols[k][n..]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if tail >= opts.tail_tol {
            break;
        }
        k += 1;
    }
    if let Some(ratio) = opts.cut_ratio {
        k = k.min((ratio * n as f64).floor() as usize);
    }
    if k % 2 == 0 {
        k = k.saturating_sub(1);
    }
    if k < 3 {
        return Err(Error::DimensionTooSmall { got: n, min: 4 });
    }
    let cols = cols.into_iter().take(k).map(|mut c| {
        c.truncate(n);
        c
    });
    Ok((k, cols.collect()))
}

fn orthonormal_parity(cols: &[Vec<C64>], n: usize, parity: Parity) -> Result<CMat> {
    let start = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let chosen: Vec<Vec<C64>> = cols.iter().skip(start).step_by(2).cloned().collect();
    linalg::orthonormalize(&super::from_columns(&chosen, n))
}

fn frame_defect(b: &CMat) -> f64 {
    frobenius(&(b.ad_mul(b) - CMat::identity(b.ncols(), b.ncols())))
}

/// Orthogonal projection onto the span of the retained even or odd powers.
pub fn projection_matrix(
    a: DiskPoint,
    n: usize,
    parity: Parity,
    opts: &PairOptions,
) -> Result<OperatorMatrix> {
    let (_, cols) = retained_powers(a, n, opts)?;
    let b = orthonormal_parity(&cols, n, parity)?;
    let label = match parity {
        Parity::Even => "P_even",
        Parity::Odd => "P_odd",
    };
    Ok(OperatorMatrix::analytic(
        linalg::matmul(&b, &b.adjoint()),
        label,
    ))
}

/// Both eigenspace projections by the QR construction, with the joint frame.
pub fn eigenspace_pair(a: DiskPoint, n: usize, opts: &PairOptions) -> Result<ProjectionPair> {
    let (k, cols) = retained_powers(a, n, opts)?;
    let be = orthonormal_parity(&cols, n, Parity::Even)?;
    let bo = orthonormal_parity(&cols, n, Parity::Odd)?;
    let frame = linalg::orthonormalize(&super::from_columns(&cols, n))?;
    let p = linalg::matmul(&be, &be.adjoint());
    let q = linalg::matmul(&bo, &bo.adjoint());
    let hermitian_residual = linalg::hermitian_residual(&p).max(linalg::hermitian_residual(&q));
    let idempotent_residual = frame_defect(&be).max(frame_defect(&bo));
    Ok(ProjectionPair {
        a,
        method: ProjectionMethod::QrBasis,
        p: OperatorMatrix::analytic(p, "P_even"),
        q: OperatorMatrix::analytic(q, "P_odd"),
        frame: Some(frame),
        rank: k,
        hermitian_residual,
        idempotent_residual,
    })
}

/// Both projections from `(C_a + C_a^*)^{−1} = C_a (I + C_a^*C_a)^{−1}`:
/// `P = (I + C_a) C_a (I + G)^{−1}`, `Q = (C_a − I) C_a (I + G)^{−1}`, computed at
/// `2N` and cut to `N`.
///
/// `I + G` is positive definite with spectrum in `[1 + (1−|a|)/(1+|a|), …]`, so
/// the inverse is taken by Cholesky rather than inverting the indefinite `C + C^*`.
/// Columns of `C_a` near index `N` spread past `2N`, so only the low modes of the
/// result approximate the compression of the true projections.
pub fn projection_via_ando(a: DiskPoint, n: usize) -> Result<ProjectionPair> {
    require_dim(n, 4)?;
    let padded = 2 * n;
    let c = composition_matrix(a, padded)?.into_entries();
    let g = composition_gram(a, padded)?.into_entries();
    let shifted = g + CMat::identity(padded, padded);
    let inv = shifted
        .cholesky()
        .ok_or(Error::NearSingular { min_eig: 0.0 })?
        .inverse();
    let c2 = linalg::matmul(&c, &c);
    let cinv = linalg::matmul(&c, &inv);
    let c2inv = linalg::matmul(&c2, &inv);
    let p_big = &cinv + &c2inv;
    let q_big = &c2inv - &cinv;

    let window = n / 2;
    let idem = |x: &CMat| frobenius(&cut(&(linalg::matmul(x, x) - x), window));
    let idempotent_residual = idem(&p_big).max(idem(&q_big));
    let p = cut(&p_big, n);
    let q = cut(&q_big, n);
    let herm = |x: &CMat| linalg::hermitian_residual(&cut(x, window));
    let hermitian_residual = herm(&p).max(herm(&q));
    Ok(ProjectionPair {
        a,
        method: ProjectionMethod::AndoFormula,
        p: OperatorMatrix::analytic(p, "P_even (Ando)"),
        q: OperatorMatrix::analytic(q, "P_odd (Ando)"),
        frame: None,
        rank: n,
        hermitian_residual,
        idempotent_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn origin_gives_even_monomials() {
        let p = projection_matrix(
            DiskPoint::origin(),
            8,
            Parity::Even,
            &PairOptions::default(),
        )
        .unwrap();
        for j in 0..8 {
            for k in 0..8 {
                let expect = if j == k && j % 2 == 0 && j < 7 {
                    1.0
                } else {
                    0.0
                };
                assert!(
                    (p.entries()[(j, k)] - c(expect, 0.0)).norm() < 1e-15,
                    "({j},{k})"
                );
            }
        }
        let ando = projection_via_ando(DiskPoint::origin(), 8).unwrap();
        for j in 0..8 {
            let expect = if j % 2 == 0 { 1.0 } else { 0.0 };
            assert!((ando.p.entries()[(j, j)] - c(expect, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn retained_count_is_odd_and_tail_controlled() {
        for (r, n) in [(0.3, 64), (0.5, 256), (0.7, 512)] {
            let a = DiskPoint::real(r).unwrap();
            let (k, _) = retained_powers(a, n, &PairOptions::default()).unwrap();
            assert_eq!(k % 2, 1);
            let w = fixed_point(a).modulus();
            let ratio = (1.0 + w) / (1.0 - w);
            assert!(
                (k as f64) < n as f64 / ratio + 1.0,
                "K = {k} too large for N = {n}"
            );
            assert!(k > n / 4, "K = {k} too small for N = {n}");
        }
        let capped = PairOptions {
            cut_ratio: Some(0.25),
            ..PairOptions::default()
        };
        let (k, _) = retained_powers(DiskPoint::real(0.5).unwrap(), 256, &capped).unwrap();
        assert_eq!(k, 63);
    }

    #[test]
    fn qr_projections_are_orthogonal_projections() {
        let pair = eigenspace_pair(
            DiskPoint::new(c(0.35, 0.35)).unwrap(),
            128,
            &PairOptions::default(),
        )
        .unwrap();
        assert!(pair.hermitian_residual < 1e-12);
        assert!(pair.idempotent_residual < 1e-12);
        let p = pair.p.entries();
        assert!(frobenius(&(linalg::matmul(p, p) - p)) < 1e-12);
    }

    #[test]
    fn even_range_is_fixed_by_c() {
        let a = DiskPoint::real(0.5).unwrap();
        let n = 256;
        let pair = eigenspace_pair(a, n, &PairOptions::default()).unwrap();
        let cm = composition_matrix(a, n).unwrap();
        let pe = linalg::matmul(cm.entries(), pair.p.entries()) - pair.p.entries();
        let qo = linalg::matmul(cm.entries(), pair.q.entries()) + pair.q.entries();
        for j in 0..=n / 8 {
            assert!(pe.column(j).norm() < 1e-7);
            assert!(qo.column(j).norm() < 1e-7);
        }
    }

    #[test]
    fn eigenspaces_are_not_orthogonal_complements() {
        let n = 64;
        let pair =
            eigenspace_pair(DiskPoint::real(0.5).unwrap(), n, &PairOptions::default()).unwrap();
        let (pc, qc) = pair.compressed();
        let k = pc.nrows();
        let defect = linalg::spectral_norm(&(&pc + &qc - CMat::identity(k, k)));
        let pq = linalg::spectral_norm(&linalg::matmul(&pc, &qc));
        assert!(defect > 0.4, "{defect}");
        assert!((defect - pq).abs() < 0.05, "{defect} vs {pq}");
        let zero = eigenspace_pair(DiskPoint::origin(), n, &PairOptions::default()).unwrap();
        let (p0, q0) = zero.compressed();
        let k0 = p0.nrows();
        assert!(frobenius(&(&p0 + &q0 - CMat::identity(k0, k0))) < 1e-13);
    }

    #[test]
    fn ando_agrees_with_qr_on_low_modes() {
        let a = DiskPoint::real(0.5).unwrap();
        let n = 256;
        let qr = eigenspace_pair(a, n, &PairOptions::default()).unwrap();
        let ando = projection_via_ando(a, n).unwrap();
        // Same window as the eigenspace range check: the retained basis stops near
        // K ≈ N(1−|ω|)/(1+|ω|), and modes close to N/4 already feel the cut.
        let w = n / 8;
        let dp = cut(&(qr.p.entries() - ando.p.entries()), w);
        let dq = cut(&(qr.q.entries() - ando.q.entries()), w);
        assert!(linalg::spectral_norm(&dp) < 1e-5);
        assert!(linalg::spectral_norm(&dq) < 1e-5);
        assert!(ando.hermitian_residual < 1e-10);
        assert!(ando.idempotent_residual < 1e-8);
    }

    #[test]
    fn ando_sum_is_twice_inverse_of_shifted_gram() {
        let a = DiskPoint::new(c(0.4, -0.3)).unwrap();
        let n = 128;
        let ando = projection_via_ando(a, n).unwrap();
        let g = composition_gram(a, 2 * n).unwrap().into_entries();
        let inv = (g + CMat::identity(2 * n, 2 * n)).try_inverse().unwrap();
        let rhs = cut(&inv.map(|z| z * 2.0), n / 2);
        let lhs = cut(&(ando.p.entries() + ando.q.entries()), n / 2);
        assert!(frobenius(&(lhs - rhs)) < 1e-6);
    }
}
