//! Finite-section workbench for composition reflections on the Hardy space.
//!
//! The crate builds truncated matrices of the composition operator
//! `C_a f = f ∘ φ_a`, its adjoint, the associated Toeplitz, multiplication and
//! symmetry operators, the reflection `Γ_a` on L²(T) and the two eigenspace
//! projections of `C_a`. On top of those it provides spectral estimation,
//! two-projection geometry, the functional model of the C*-algebra generated by
//! the two projections, and a registry of operator identities checked as
//! residuals.

pub mod cstar;
pub mod error;
pub mod hardy;
pub mod identities;
pub mod linalg;
pub mod ops;
pub mod spectral;
pub mod two_proj;

pub use error::{Error, Result};
pub use hardy::{CoeffSeq, DiskPoint, Kernel, LaurentSeq};
pub use linalg::{CMat, CVec, C64};
pub use ops::{Basis, OperatorMatrix};
