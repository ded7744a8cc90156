//! The reflection `Γ_a h = h ∘ φ_a` of L²(T) and its adjoint.
//!
//! Laurent matrices of half-width `M` use index `i = m + M` for `z^m`.

use crate::error::Result;
use crate::hardy::DiskPoint;
use crate::linalg::{CMat, C64, ZERO};

use super::composition::composition_columns;
use super::{require_dim, OperatorMatrix};

/// Laurent columns of `Γ_a z^m` for `|m| ≤ cols`, truncated to half-width `rows`.
///
/// For `m ≥ 0` this is `φ_a^m`. For `m < 0` it is `conj(φ_a)^{|m|}`, whose
/// coefficient at `z^{−k}` is `conj(c_k)` because `|φ_a| = 1` on T.
fn gamma_columns(a: DiskPoint, cols: usize, rows: usize) -> Vec<Vec<C64>> {
    let powers = composition_columns(a, cols + 1, rows + 1);
    let size = 2 * rows + 1;
    let mut out = Vec::with_capacity(2 * cols + 1);
    for m in -(cols as i64)..=(cols as i64) {
        let p = &powers[m.unsigned_abs() as usize];
        let mut col = vec![ZERO; size];
        for (k, &ck) in p.iter().enumerate() {
            if m >= 0 {
                col[rows + k] = ck;
            } else {
                col[rows - k] = ck.conj();
            }
        }
        out.push(col);
    }
    out
}

/// Central compression of `Γ_a` at half-width `M`.
pub fn gamma_matrix(a: DiskPoint, m: usize) -> Result<OperatorMatrix> {
    require_dim(m, 2)?;
    let cols = gamma_columns(a, m, m);
    Ok(OperatorMatrix::laurent(
        super::from_columns(&cols, 2 * m + 1),
        "Gamma_a",
    ))
}

/// Multiplication by `(1−|a|²)/|1−āz|²` applied to a Laurent vector in place.
///
/// `1/(1−āz)` is a causal filter and `1/(1−az̄)` an anti-causal one, so two
/// first-order recurrences replace the dense Laurent-Toeplitz product.
fn poisson_multiply(a: DiskPoint, v: &mut [C64]) {
    let av = a.value();
    let ab = av.conj();
    let mut prev = ZERO;
    for x in v.iter_mut() {
        prev = *x + ab * prev;
        *x = prev;
    }
    let mut next = ZERO;
    for x in v.iter_mut().rev() {
        next = *x + av * next;
        *x = next;
    }
    let d = a.defect();
    for x in v.iter_mut() {
        *x *= d;
    }
}

/// `Γ_a^* = (1−|a|²) M_{1/|1−āz|²} Γ_a`, formed at half-width `2M` and cut to `M`.
pub fn gamma_adjoint_matrix(a: DiskPoint, m: usize) -> Result<OperatorMatrix> {
    require_dim(m, 2)?;
    let padded = 2 * m;
    let mut cols = gamma_columns(a, m, padded);
    for col in cols.iter_mut() {
        poisson_multiply(a, col);
        col.drain(..padded - m);
        col.truncate(2 * m + 1);
    }
    Ok(OperatorMatrix::laurent(
        super::from_columns(&cols, 2 * m + 1),
        "Gamma_a*",
    ))
}

/// The flip `V z^m = z^{−m}`.
pub fn laurent_flip(m: usize) -> OperatorMatrix {
    let size = 2 * m + 1;
    let entries = CMat::from_fn(size, size, |i, j| {
        if i + j == 2 * m {
            C64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });
    OperatorMatrix::laurent(entries, "V")
}

/// `Γ_a` in the decomposition `L²(T) = H² ⊕ H₋`.
///
/// H² rows/columns are `z^0 … z^M`; H₋ rows/columns are `z^{−1} … z^{−M}`.
#[derive(Debug, Clone)]
pub struct GammaBlocks {
    pub half_width: usize,
    /// `C_a`, `(M+1) × (M+1)`.
    pub top_left: CMat,
    /// `⟨·, a/(z−a)⟩ 1`, `(M+1) × M`.
    pub top_right: CMat,
    /// Zero, `M × (M+1)`.
    pub bottom_left: CMat,
    /// `V C_ā V − ⟨·, a/(z−a)⟩ 1` restricted to H₋ rows, `M × M`.
    pub bottom_right: CMat,
    /// Largest `|z^0|` component left in the bottom-right columns after the
    /// rank-one subtraction; zero up to rounding.
    pub constant_leak: f64,
}

/// Assembles the block form of `Γ_a` from `C_a`, `C_ā`, the flip and the rank-one
/// term, independently of [`gamma_matrix`].
pub fn gamma_blocks(a: DiskPoint, m: usize) -> Result<GammaBlocks> {
    require_dim(m, 2)?;
    let top_left = super::from_columns(&composition_columns(a, m + 1, m + 1), m + 1);

    // H₋ column z^{−p} is column index p−1; u = a/(z−a) has coefficient a^p at z^{−p}.
    let ab = a.value().conj();
    let mut rank_one_row = Vec::with_capacity(m);
    let mut pow = ab;
    for _ in 0..m {
        rank_one_row.push(pow);
        pow *= ab;
    }
    let top_right = CMat::from_fn(m + 1, m, |i, j| if i == 0 { rank_one_row[j] } else { ZERO });
    let bottom_left = CMat::zeros(m, m + 1);

    // V C_ā V z^{−p} = V φ_ā^p, so coefficient k of φ_ā^p lands on z^{−k}.
    let conj_powers = composition_columns(a.conj(), m + 1, m + 1);
    let mut bottom_right = CMat::zeros(m, m);
    let mut leak: f64 = 0.0;
    for p in 1..=m {
        let col = &conj_powers[p];
        leak = leak.max((col[0] - rank_one_row[p - 1]).norm());
        for k in 1..=m {
            // H₋ row z^{−k} is row index k−1.
            bottom_right[(k - 1, p - 1)] = col[k];
        }
    }
    Ok(GammaBlocks {
        half_width: m,
        top_left,
        top_right,
        bottom_left,
        bottom_right,
        constant_leak: leak,
    })
}

impl GammaBlocks {
    /// The full Laurent matrix, half-width `M`.
    pub fn assembled(&self) -> OperatorMatrix {
        let m = self.half_width;
        let size = 2 * m + 1;
        let mut out = CMat::zeros(size, size);
        // Laurent index of z^j is j + m; H₋ block index q stands for z^{−(q+1)}.
        let neg = |q: usize| m - 1 - q;
        for i in 0..=m {
            for j in 0..=m {
                out[(m + i, m + j)] = self.top_left[(i, j)];
            }
            for q in 0..m {
                out[(m + i, neg(q))] = self.top_right[(i, q)];
            }
        }
        for r in 0..m {
            for j in 0..=m {
                out[(neg(r), m + j)] = self.bottom_left[(r, j)];
            }
            for q in 0..m {
                out[(neg(r), neg(q))] = self.bottom_right[(r, q)];
            }
        }
        OperatorMatrix::laurent(out, "Gamma_a (blocks)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::fourier_by_quadrature;
    use crate::linalg::{central, frobenius, matmul};
    use crate::ops::composition_matrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn origin_is_signed_diagonal() {
        let g = gamma_matrix(DiskPoint::origin(), 4).unwrap();
        let adj = gamma_adjoint_matrix(DiskPoint::origin(), 4).unwrap();
        let blocks = gamma_blocks(DiskPoint::origin(), 4).unwrap();
        assert!(blocks.top_right.iter().all(|z| *z == ZERO));
        for m in -4..=4i64 {
            for n in -4..=4i64 {
                let expect = if m == n {
                    c((-1f64).powi(m as i32), 0.0)
                } else {
                    ZERO
                };
                assert_eq!(g.at(m, n), expect);
                assert!((adj.at(m, n) - expect).norm() < 1e-15);
                assert_eq!(blocks.assembled().at(m, n), expect);
            }
        }
    }

    #[test]
    fn negative_columns_are_conjugated_powers() {
        let g = gamma_matrix(DiskPoint::real(0.5).unwrap(), 8).unwrap();
        assert!((g.at(0, -1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((g.at(-1, -1) - c(-0.75, 0.0)).norm() < 1e-15);
        assert!((g.at(-2, -1) - c(-0.375, 0.0)).norm() < 1e-15);
        // H² columns never reach H₋ rows.
        for n in 0..=8 {
            for m in -8..0 {
                assert_eq!(g.at(m, n), ZERO);
            }
        }
    }

    #[test]
    fn negative_columns_match_quadrature() {
        let a = DiskPoint::new(c(0.2, 0.4)).unwrap();
        let av = a.value();
        let g = gamma_matrix(a, 16).unwrap();
        let q = fourier_by_quadrature(
            |z| ((av - z) / (1.0 - av.conj() * z)).conj().powu(3),
            16,
            4096,
        )
        .unwrap();
        for m in -16..=16i64 {
            assert!((g.at(m, -3) - q.get(m)).norm() < 1e-13);
        }
    }

    #[test]
    fn gamma_is_a_reflection() {
        let a = DiskPoint::real(0.5).unwrap();
        let m = 256;
        let g = gamma_matrix(a, m).unwrap();
        let sq = matmul(g.entries(), g.entries());
        for j in -(m as i64) / 4..=(m as i64) / 4 {
            let idx = (j + m as i64) as usize;
            let mut col = sq.column(idx).into_owned();
            col[idx] -= C64::new(1.0, 0.0);
            assert!(col.norm() < 1e-8, "mode {j}: {}", col.norm());
        }
    }

    #[test]
    fn adjoint_formula_matches_matrix_adjoint() {
        for a in [
            DiskPoint::real(0.5).unwrap(),
            DiskPoint::new(c(0.3, -0.5)).unwrap(),
        ] {
            let m = 64;
            let formula = gamma_adjoint_matrix(a, m).unwrap();
            let reference = gamma_matrix(a, m).unwrap().adjoint();
            let d = central(&(formula.entries() - reference.entries()), m, m / 2);
            assert!(frobenius(&d) < 1e-8, "{}", frobenius(&d));
        }
    }

    #[test]
    fn adjoint_of_constant_has_both_halves() {
        let a = DiskPoint::real(0.5).unwrap();
        let adj = gamma_adjoint_matrix(a, 32).unwrap();
        for n in -10..=10i64 {
            let expect = 0.5f64.powi(n.unsigned_abs() as i32);
            assert!((adj.at(n, 0) - c(expect, 0.0)).norm() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn adjoint_of_constant_sign_convention_by_quadrature() {
        // Γ*(1) = 1/(1−āz) + a/(z−a): ā^n at z^n (n ≥ 0) and a^{|n|} at z^n (n < 0).
        let a = DiskPoint::new(c(0.3, 0.4)).unwrap();
        let av = a.value();
        let q = fourier_by_quadrature(|z| 1.0 / (1.0 - av.conj() * z) + av / (z - av), 12, 4096)
            .unwrap();
        let adj = gamma_adjoint_matrix(a, 32).unwrap();
        for n in -12..=12i64 {
            assert!((adj.at(n, 0) - q.get(n)).norm() < 1e-13, "n = {n}");
            let closed = if n >= 0 {
                av.conj().powu(n as u32)
            } else {
                av.powu((-n) as u32)
            };
            assert!((q.get(n) - closed).norm() < 1e-13);
        }
    }

    #[test]
    fn blocks_match_direct_construction() {
        for a in [
            DiskPoint::real(0.5).unwrap(),
            DiskPoint::new(c(0.25, 0.45)).unwrap(),
        ] {
            let m = 256;
            let blocks = gamma_blocks(a, m).unwrap();
            assert!(blocks.constant_leak < 1e-15);
            let direct = gamma_matrix(a, m).unwrap();
            let d = central(&(blocks.assembled().entries() - direct.entries()), m, m / 4);
            assert!(frobenius(&d) < 1e-8);
            assert!(blocks.bottom_left.iter().all(|z| *z == ZERO));
            let c_a = composition_matrix(a, m + 1).unwrap();
            assert_eq!(&blocks.top_left, c_a.entries());
        }
    }

    #[test]
    fn flip_is_a_symmetry() {
        let v = laurent_flip(5);
        assert_eq!(matmul(v.entries(), v.entries()), CMat::identity(11, 11));
        assert_eq!(v.at(-3, 3), c(1.0, 0.0));
    }
}
