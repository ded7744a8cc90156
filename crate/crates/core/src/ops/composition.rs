use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hardy::{div_one_minus, mul_phi, DiskPoint};
use crate::linalg::{self, CMat, C64, ONE, ZERO};

use super::{require_dim, OperatorMatrix};

/// Columns `φ_a^j`, `j < count`, each truncated to `rows` coefficients.
///
/// Coefficient `k` of `φ_a f` depends only on `f_0 … f_k`, so the recurrence is
/// exact for every retained coefficient.
pub fn composition_columns(a: DiskPoint, count: usize, rows: usize) -> Vec<Vec<C64>> {
    let mut cols = Vec::with_capacity(count);
    let mut col = vec![ZERO; rows];
    if rows > 0 {
        col[0] = ONE;
    }
    for _ in 0..count {
        let next = mul_phi(a, &col);
        cols.push(col);
        col = next;
    }
    cols
}

/// The compression `P_N C_a P_N`; column `j` holds the coefficients of `φ_a^j`.
pub fn composition_matrix(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    require_dim(n, 2)?;
    let cols = composition_columns(a, n, n);
    Ok(OperatorMatrix::analytic(
        super::from_columns(&cols, n),
        "C_a",
    ))
}

/// `C_0 f(z) = f(−z)`.
pub fn parity_matrix(n: usize) -> OperatorMatrix {
    let entries = CMat::from_fn(n, n, |j, k| match (j == k, j % 2) {
        (true, 0) => ONE,
        (true, _) => -ONE,
        _ => ZERO,
    });
    OperatorMatrix::analytic(entries, "C_0")
}

/// `C_a^* = M_{k_a} C_a T_{1 − a z̄}`, evaluated at dimension `2N` and cut to `N`.
///
/// `T_{1−az̄} = I − aS^*` preserves `span{z^0 … z^{N−1}}` and `M_{k_a}` is lower
/// triangular, so the cut product equals the compression of the adjoint.
pub fn adjoint_composition_matrix(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    require_dim(n, 2)?;
    let padded = 2 * n;
    let av = a.value();
    let cols = composition_columns(a, padded, padded);
    // column j of C(I − aS^*) is C e_j − a C e_{j−1}
    let cols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mixed: Vec<C64> = if j == 0 {
                cols[0].clone()
            } else {
                cols[j]
                    .iter()
                    .zip(&cols[j - 1])
                    .map(|(x, y)| x - av * y)
                    .collect()
            };
            let mut out = div_one_minus(av.conj(), &mixed);
            out.truncate(n);
            out
        })
        .collect();
    Ok(OperatorMatrix::analytic(
        super::from_columns(&cols, n),
        "C_a*",
    ))
}

/// `C_a^* C_a = (1−|a|²) T_{1/|1−āz|²}`: entry `(j,k)` is `ā^{j−k}` for `j ≥ k`
/// and `a^{k−j}` otherwise. Exact compression.
pub fn composition_gram(a: DiskPoint, n: usize) -> Result<OperatorMatrix> {
    require_dim(n, 2)?;
    let av = a.value();
    let ab = av.conj();
    let up: Vec<C64> = powers(av, n);
    let down: Vec<C64> = powers(ab, n);
    let entries = CMat::from_fn(n, n, |j, k| if j >= k { down[j - k] } else { up[k - j] });
    Ok(OperatorMatrix::analytic(entries, "C_a*C_a"))
}

fn powers(x: C64, n: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n);
    let mut p = ONE;
    for _ in 0..n {
        out.push(p);
        p *= x;
    }
    out
}

/// `(C_a^* C_a)^{−1/2}` of the `N × N` Gram compression.
///
/// With `a = r e^{iθ}` the Gram matrix is `D G_r D^*`, `D = diag(e^{−iθj})`, so the
/// inverse square root comes from a real symmetric eigenproblem.
pub fn gram_inverse_sqrt(a: DiskPoint, n: usize) -> Result<CMat> {
    require_dim(n, 2)?;
    let r = a.modulus();
    let theta = a.value().arg();
    let rp = powers(C64::new(r, 0.0), n);
    let g = DMatrix::<f64>::from_fn(n, n, |j, k| rp[j.abs_diff(k)].re);
    let eig = g
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::EigenFailure)?;
    let min_eig = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-12 {
        return Err(Error::NearSingular { min_eig });
    }
    let v = &eig.eigenvectors;
    let scaled = DMatrix::<f64>::from_fn(n, n, |i, k| v[(i, k)] / eig.eigenvalues[k].sqrt());
    let real = &scaled * v.transpose();
    if theta == 0.0 {
        return Ok(real.map(|x| C64::new(x, 0.0)));
    }
    let phase: Vec<C64> = (0..n)
        .map(|j| C64::from_polar(1.0, -theta * j as f64))
        .collect();
    Ok(CMat::from_fn(n, n, |j, k| {
        real[(j, k)] * phase[j] * phase[k].conj()
    }))
}

/// Leading `n × n` block of a padded matrix.
pub(crate) fn cut(m: &CMat, n: usize) -> CMat {
    linalg::leading(m, n)
}
