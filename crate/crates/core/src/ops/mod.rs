//! Finite truncations of the operators acting on H² and L²(T).
//!
//! Analytic matrices are indexed by monomials `z^0 … z^{N−1}`. Laurent matrices
//! are indexed by `z^{−M} … z^M`, so row/column `i` stands for `z^{i−M}`.

mod composition;
mod gamma;
mod projection;
mod symmetry;
mod toeplitz;

pub use composition::{
    adjoint_composition_matrix, composition_columns, composition_gram, composition_matrix,
    gram_inverse_sqrt, parity_matrix,
};
pub use gamma::{gamma_adjoint_matrix, gamma_blocks, gamma_matrix, laurent_flip, GammaBlocks};
pub use projection::{
    eigenspace_pair, projection_matrix, projection_via_ando, retained_powers, PairOptions, Parity,
    ProjectionMethod, ProjectionPair,
};
pub use symmetry::{rho_matrix, rho_raw, w_matrix, RhoMatrix};
pub use toeplitz::{
    analytic_toeplitz, laurent_toeplitz, shift_matrix, toeplitz_inner, toeplitz_matrix,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Monomials `z^k`, `0 ≤ k < N`.
    Analytic,
    /// Laurent monomials `z^m`, `−M ≤ m ≤ M`.
    Laurent,
}

/// A dense truncation of an operator, tagged with its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMat,
    basis: Basis,
    dim: usize,
    label: String,
}

impl OperatorMatrix {
    /// Wraps `entries`; `dim` is `N` for [`Basis::Analytic`] and the half-width `M`
    /// for [`Basis::Laurent`].
    pub fn new(entries: CMat, basis: Basis, label: impl Into<String>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        let dim = match basis {
            Basis::Analytic => r,
            Basis::Laurent => {
                if r % 2 == 0 {
                    return Err(Error::Domain(format!("Laurent matrix of even size {r}")));
                }
                r / 2
            }
        };
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Domain(format!(
                "non-finite entry in {}",
                label_str(&entries)
            )));
        }
        Ok(Self {
            entries,
            basis,
            dim,
            label: label.into(),
        })
    }

    pub(crate) fn analytic(entries: CMat, label: impl Into<String>) -> Self {
        let dim = entries.nrows();
        Self {
            entries,
            basis: Basis::Analytic,
            dim,
            label: label.into(),
        }
    }

    pub(crate) fn laurent(entries: CMat, label: impl Into<String>) -> Self {
        let dim = entries.nrows() / 2;
        Self {
            entries,
            basis: Basis::Laurent,
            dim,
            label: label.into(),
        }
    }

    pub fn identity(basis: Basis, dim: usize) -> Self {
        let n = match basis {
            Basis::Analytic => dim,
            Basis::Laurent => 2 * dim + 1,
        };
        Self {
            entries: CMat::identity(n, n),
            basis,
            dim,
            label: "I".into(),
        }
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side length of the underlying square matrix.
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Entry at Laurent indices `(m, n)`, or analytic indices for analytic matrices.
    pub fn at(&self, row: i64, col: i64) -> C64 {
        let off = match self.basis {
            Basis::Analytic => 0,
            Basis::Laurent => self.dim as i64,
        };
        self.entries[((row + off) as usize, (col + off) as usize)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            basis: self.basis,
            dim: self.dim,
            label: format!("({})*", self.label),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            entries: linalg::matmul(&self.entries, &other.entries),
            basis: self.basis,
            dim: self.dim,
            label: format!("{}·{}", self.label, other.label),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            entries: &self.entries + &other.entries,
            basis: self.basis,
            dim: self.dim,
            label: format!("{} + {}", self.label, other.label),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            entries: &self.entries - &other.entries,
            basis: self.basis,
            dim: self.dim,
            label: format!("{} − {}", self.label, other.label),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            entries: self.entries.map(|z| z * s),
            basis: self.basis,
            dim: self.dim,
            label: format!("{s}·{}", self.label),
        }
    }

    pub fn apply(&self, v: &CVec) -> Result<CVec> {
        if v.len() != self.size() {
            return Err(Error::DimensionMismatch {
                left: self.size(),
                right: v.len(),
            });
        }
        Ok(&self.entries * v)
    }

    /// Compression to dimension `n` (leading block, or central block for Laurent).
    pub fn leading_block(&self, n: usize) -> Result<Self> {
        if n > self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: n,
            });
        }
        let entries = match self.basis {
            Basis::Analytic => linalg::leading(&self.entries, n),
            Basis::Laurent => linalg::central(&self.entries, self.dim, n),
        };
        Ok(Self {
            entries,
            basis: self.basis,
            dim: n,
            label: self.label.clone(),
        })
    }

    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_residual(&self.entries)
    }
}

fn label_str(m: &CMat) -> String {
    format!("{}×{} matrix", m.nrows(), m.ncols())
}

/// Matrix whose columns are the given coefficient vectors.
pub(crate) fn from_columns(cols: &[Vec<C64>], rows: usize) -> CMat {
    CMat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

pub(crate) fn require_dim(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::DimensionTooSmall { got: n, min });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_requires_matching_basis() {
        let a = OperatorMatrix::identity(Basis::Analytic, 3);
        let l = OperatorMatrix::identity(Basis::Laurent, 1);
        assert_eq!(a.size(), l.size());
        assert!(matches!(a.add(&l), Err(Error::BasisMismatch)));
        let b = OperatorMatrix::identity(Basis::Analytic, 4);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
        assert_eq!(a.mul(&a).unwrap().entries(), a.entries());
    }

    #[test]
    fn laurent_indexing_is_centered() {
        let m = CMat::from_fn(5, 5, |i, j| C64::new(i as f64, j as f64));
        let op = OperatorMatrix::new(m, Basis::Laurent, "x").unwrap();
        assert_eq!(op.dim(), 2);
        assert_eq!(op.at(-2, 2), C64::new(0.0, 4.0));
        let c = op.leading_block(1).unwrap();
        assert_eq!(c.size(), 3);
        assert_eq!(c.at(0, 0), C64::new(2.0, 2.0));
        assert!(OperatorMatrix::new(CMat::zeros(4, 4), Basis::Laurent, "x").is_err());
        assert!(OperatorMatrix::new(CMat::zeros(4, 3), Basis::Analytic, "x").is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(OperatorMatrix::new(m, Basis::Analytic, "x").is_err());
    }
}
