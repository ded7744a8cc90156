use crate::error::Result;
use crate::hardy::{div_one_minus, DiskPoint};
use crate::linalg::{self, CMat, C64};

use super::composition::{composition_columns, composition_matrix, cut, gram_inverse_sqrt};
use super::{require_dim, OperatorMatrix};

/// `W_a = √(1−|a|²) M_{k_a} C_a`.
///
/// `M_{k_a}` is lower triangular, so building at `N` directly already gives the
/// exact compression.
pub fn w_matrix(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    require_dim(n, 2)?;
    let scale = a.defect().sqrt();
    let ab = a.value().conj();
    let cols: Vec<Vec<C64>> = composition_columns(a, n, n)
        .iter()
        .map(|col| {
            div_one_minus(ab, col)
                .into_iter()
                .map(|z| z * scale)
                .collect()
        })
        .collect();
    Ok(OperatorMatrix::analytic(
        super::from_columns(&cols, n),
        "W_a",
    ))
}

/// The polar symmetry `ρ_a = C_a (C_a^*C_a)^{−1/2}` with its quality residuals.
#[derive(Debug, Clone)]
pub struct RhoMatrix {
    pub op: OperatorMatrix,
    /// `max_j ‖(ρ − ρ^*) e_j‖` over `j ≤ N/4`, measured on the first `N/2` coefficients.
    pub hermitian_residual: f64,
    /// `max_j ‖(ρ² − I) e_j‖`, same test family and measurement window.
    pub involution_residual: f64,
}

/// `C_L (G_L)^{−1/2}` at a single dimension `L`, without padding.
pub fn rho_raw(a: DiskPoint, l: usize) -> Result<CMat> {
    let c = composition_matrix(a, l)?;
    let s = gram_inverse_sqrt(a, l)?;
    Ok(linalg::matmul(c.entries(), &s))
}

/// `ρ_a` computed at dimension `2N` and cut to `N`.
pub fn rho_matrix(a: DiskPoint, n: usize) -> Result<RhoMatrix> {
    require_dim(n, 2)?;
    let big = rho_raw(a, 2 * n)?;
    let window = (n / 2).max(1);
    let probes = n / 4 + 1;
    let diff = &big - big.adjoint();
    let sq = linalg::matmul(&big, &big);
    let mut herm: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for j in 0..probes {
        herm = herm.max(diff.view((0, j), (window, 1)).norm());
        let mut col = sq.view((0, j), (window, 1)).into_owned();
        col[j] -= C64::new(1.0, 0.0);
        inv = inv.max(col.norm());
    }
    Ok(RhoMatrix {
        op: OperatorMatrix::analytic(cut(&big, n), "rho_a"),
        hermitian_residual: herm,
        involution_residual: inv,
    })
}
