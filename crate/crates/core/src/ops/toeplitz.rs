use crate::error::{Error, Result};
use crate::hardy::{fixed_point, phi_coeffs, DiskPoint, LaurentSeq};
use crate::linalg::{CMat, C64, ONE, ZERO};

use super::{require_dim, OperatorMatrix};

/// Symbol coefficients below this magnitude are treated as zero past the cut.
const NEGLIGIBLE: f64 = 1e-15;

/// Toeplitz matrix `(ĝ(j−k))_{j,k<N}` of a symbol given by Fourier coefficients.
pub fn toeplitz_matrix(fourier: &LaurentSeq, n: usize) -> Result<OperatorMatrix> {
    require_dim(n, 1)?;
    let m = fourier.half_width();
    if m + 1 < n {
        let edge = fourier
            .get(m as i64)
            .norm()
            .max(fourier.get(-(m as i64)).norm());
        if edge > NEGLIGIBLE {
            return Err(Error::InsufficientSymbol {
                have: m,
                need: n - 1,
            });
        }
    }
    let entries = CMat::from_fn(n, n, |j, k| fourier.get(j as i64 - k as i64));
    Ok(OperatorMatrix::analytic(entries, "T_g"))
}

/// Lower-triangular Toeplitz matrix of an analytic symbol (`T_g = M_g` on H²).
pub fn analytic_toeplitz(coeffs: &[C64], n: usize, label: impl Into<String>) -> OperatorMatrix {
    let entries = CMat::from_fn(n, n, |j, k| {
        if j >= k {
            coeffs.get(j - k).copied().unwrap_or(ZERO)
        } else {
            ZERO
        }
    });
    OperatorMatrix::analytic(entries, label)
}

/// Full Laurent-Toeplitz matrix of multiplication by a symbol on L²(T), half-width `m`.
pub fn laurent_toeplitz(fourier: &LaurentSeq, m: usize) -> OperatorMatrix {
    let size = 2 * m + 1;
    let entries = CMat::from_fn(size, size, |i, j| fourier.get(i as i64 - j as i64));
    OperatorMatrix::laurent(entries, "M_g")
}

/// The unilateral shift `S = T_z`.
pub fn shift_matrix(n: usize) -> OperatorMatrix {
    let entries = CMat::from_fn(n, n, |j, k| if j == k + 1 { ONE } else { ZERO });
    OperatorMatrix::analytic(entries, "S")
}

/// `T_{φ_ω}` with ω the fixed point of φ_a; an isometry of co-rank one.
pub fn toeplitz_inner(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    require_dim(n, 2)?;
    let w = fixed_point(a);
    Ok(analytic_toeplitz(&phi_coeffs(w, n), n, "T_phi_omega"))
}
