//! Dense complex linear algebra shared by the operator builders.
//!
//! Complex products are routed through four real `f64` GEMMs, which is an
//! order of magnitude faster than the generic complex kernel at the sizes
//! used here (a few hundred to a couple of thousand).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn split(m: &CMat) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join(re: &DMatrix<f64>, im: Option<&DMatrix<f64>>) -> CMat {
    match im {
        Some(im) => re.zip_map(im, C64::new),
        None => re.map(|x| C64::new(x, 0.0)),
    }
}

/// Complex matrix product `a * b`.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let a_real = ai.iter().all(|x| *x == 0.0);
    let b_real = bi.iter().all(|x| *x == 0.0);
    match (a_real, b_real) {
        (true, true) => join(&(&ar * &br), None),
        (true, false) => join(&(&ar * &br), Some(&(&ar * &bi))),
        (false, true) => join(&(&ar * &br), Some(&(&ai * &br))),
        (false, false) => {
            let re = &ar * &br - &ai * &bi;
            let im = &ar * &bi + &ai * &br;
            join(&re, Some(&im))
        }
    }
}

/// Product of a chain of matrices, left to right.
pub fn chain(factors: &[&CMat]) -> CMat {
    let (first, rest) = factors.split_first().expect("chain: no factors");
    rest.iter().fold((*first).clone(), |acc, f| matmul(&acc, f))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖m − m*‖_F / ‖m‖_F`, zero for the zero matrix.
pub fn hermitian_residual(m: &CMat) -> f64 {
    let scale = frobenius(m);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(m - m.adjoint())) / scale
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part is used.
pub fn herm_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    let h = hermitize(m);
    let mut eigs: Vec<f64> = if is_real(&h) {
        let r = h.map(|z| z.re);
        r.try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::EigenFailure)?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        h.try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::EigenFailure)?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending with matching columns.
pub fn herm_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let h = hermitize(m);
    let (vals, vecs): (Vec<f64>, CMat) = if is_real(&h) {
        let e = h
            .map(|z| z.re)
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::EigenFailure)?;
        (
            e.eigenvalues.iter().copied().collect(),
            join(&e.eigenvectors, None),
        )
    } else {
        let e = h
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::EigenFailure)?;
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = CMat::from_fn(vecs.nrows(), order.len(), |r, c| vecs[(r, order[c])]);
    Ok((sorted_vals, sorted_vecs))
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = if is_real(m) {
        m.map(|z| z.re)
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    } else {
        m.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Column orthonormalization by Gram–Schmidt with one full reorthogonalization
/// pass (CGS2). Fails when a column is numerically dependent on its predecessors.
pub fn orthonormalize(cols: &CMat) -> Result<CMat> {
    let (rows, ncols) = cols.shape();
    let mut q = CMat::zeros(rows, ncols);
    for j in 0..ncols {
        let original = cols.column(j).into_owned();
        let norm0 = original.norm();
        let mut v = original;
        for _ in 0..2 {
            if j > 0 {
                let basis = q.columns(0, j);
                let coeffs = basis.ad_mul(&v);
                v -= basis * coeffs;
            }
        }
        let norm = v.norm();
        let relative = if norm0 > 0.0 { norm / norm0 } else { 0.0 };
        if relative < 1e-10 {
            return Err(Error::RankLoss {
                column: j,
                relative_norm: relative,
            });
        }
        q.set_column(j, &(v / C64::new(norm, 0.0)));
    }
    Ok(q)
}

/// Top-left `n × n` block.
pub fn leading(m: &CMat, n: usize) -> CMat {
    m.view((0, 0), (n, n)).into_owned()
}

/// Central block of a Laurent-indexed matrix of half-width `from` down to `to`.
pub fn central(m: &CMat, from: usize, to: usize) -> CMat {
    let off = from - to;
    let size = 2 * to + 1;
    m.view((off, off), (size, size)).into_owned()
}

/// Solve `x * a = b` for `x` with `a` Hermitian positive definite.
pub fn right_solve_hpd(b: &CMat, a: &CMat) -> Result<CMat> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or(Error::NearSingular { min_eig: 0.0 })?;
    // x a = b  <=>  a x* = b*
    Ok(chol.solve(&b.adjoint()).adjoint())
}

/// Sorted-set Hausdorff distance between two finite point sets on the line.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    fn directed(from: &[f64], to_sorted: &[f64]) -> f64 {
        from.iter()
            .map(|&x| nearest_distance(to_sorted, x))
            .fold(0.0, f64::max)
    }
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    directed(&sa, &sb).max(directed(&sb, &sa))
}

/// Distance from `x` to the closest entry of an ascending slice.
pub fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    let idx = sorted.partition_point(|&v| v < x);
    let mut best = f64::INFINITY;
    if idx < sorted.len() {
        best = best.min((sorted[idx] - x).abs());
    }
    if idx > 0 {
        best = best.min((x - sorted[idx - 1]).abs());
    }
    best
}
