//! Coefficient-level arithmetic on the Hardy space H² of the unit disk.
//!
//! Elements of H² are represented by their Taylor coefficients ([`CoeffSeq`]),
//! elements of L²(T) by Fourier coefficients ([`LaurentSeq`]). Everything here
//! is exact series arithmetic truncated at a fixed length; no quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Points with `|z| > 1 + UNIT_SLACK` are rejected as outside the closed disk.
const UNIT_SLACK: f64 = 1e-12;

/// A parameter `a` of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

impl DiskPoint {
    /// Largest admissible modulus.
    pub const MAX_MODULUS: f64 = 1.0 - 1e-12;

    pub fn new(a: C64) -> Result<Self> {
        let modulus = a.norm();
        if !modulus.is_finite() || modulus >= Self::MAX_MODULUS {
            return Err(Error::OutsideDisk { modulus });
        }
        Ok(Self { re: a.re, im: a.im })
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(C64::new(x, 0.0))
    }

    /// `r·e^{iθ}` with `θ` in degrees.
    pub fn polar_deg(r: f64, deg: f64) -> Result<Self> {
        Self::new(C64::from_polar(r, deg.to_radians()))
    }

    pub fn origin() -> Self {
        Self { re: 0.0, im: 0.0 }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }

    /// `1 − |a|²`.
    pub fn defect(&self) -> f64 {
        1.0 - self.value().norm_sqr()
    }

    pub fn is_origin(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }
}

/// Taylor coefficients `c_0 … c_{N−1}` of an analytic polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeq {
    coeffs: Vec<C64>,
}

impl CoeffSeq {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![ZERO; n],
        }
    }

    /// The monomial `z^k` in dimension `n`.
    pub fn monomial(k: usize, n: usize) -> Self {
        let mut s = Self::zeros(n);
        s.coeffs[k] = ONE;
        s
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn nominal_dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn truncated(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, ZERO);
        Self { coeffs }
    }

    /// Horner evaluation inside the closed disk.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if z.norm() > 1.0 + UNIT_SLACK {
            return Err(Error::Domain(format!(
                "|z| = {} > 1 for an H² series",
                z.norm()
            )));
        }
        Ok(horner(&self.coeffs, z))
    }

    /// `Σ c_k · conj(d_k)`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DimensionMismatch {
                left: self.coeffs.len(),
                right: other.coeffs.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(c, d)| c * d.conj())
            .sum())
    }
}

/// Fourier coefficients `c_{−M} … c_M` of a trigonometric polynomial on T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentSeq {
    coeffs: Vec<C64>,
    half_width: usize,
}

impl LaurentSeq {
    pub fn zeros(half_width: usize) -> Self {
        Self {
            coeffs: vec![ZERO; 2 * half_width + 1],
            half_width,
        }
    }

    pub fn from_fn(half_width: usize, f: impl Fn(i64) -> C64) -> Self {
        let m = half_width as i64;
        Self {
            coeffs: (-m..=m).map(f).collect(),
            half_width,
        }
    }

    /// Embeds an analytic series (indices ≥ 0) into L²(T).
    pub fn from_analytic(c: &CoeffSeq, half_width: usize) -> Self {
        Self::from_fn(half_width, |m| {
            if m >= 0 {
                c.coeffs().get(m as usize).copied().unwrap_or(ZERO)
            } else {
                ZERO
            }
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Coefficient of `z^m`; zero outside the stored range.
    pub fn get(&self, m: i64) -> C64 {
        let idx = m + self.half_width as i64;
        if idx < 0 {
            return ZERO;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(ZERO)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// The sub-vector of indices `m ≥ 0`.
    pub fn analytic_part(&self) -> CoeffSeq {
        CoeffSeq::new(self.coeffs[self.half_width..].to_vec())
    }

    /// Symbol of the pointwise conjugate function: `ĝ̄(m) = conj(ĝ(−m))`.
    pub fn conjugate_symbol(&self) -> Self {
        Self::from_fn(self.half_width, |k| self.get(-k).conj())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Evaluation on the unit circle.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if (z.norm() - 1.0).abs() > UNIT_SLACK {
            return Err(Error::Domain(format!(
                "|z| = {} is not on the unit circle",
                z.norm()
            )));
        }
        let m = self.half_width;
        let positive = horner(&self.coeffs[m..], z);
        let negative: Vec<C64> = self.coeffs[..m].iter().rev().copied().collect();
        // Σ_{k≥1} c_{−k} z̄^k = z̄ · Σ_{k≥0} c_{−k−1} z̄^k
        let zbar = z.conj();
        Ok(positive + zbar * horner(&negative, zbar))
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.half_width != other.half_width {
            return Err(Error::DimensionMismatch {
                left: self.half_width,
                right: other.half_width,
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(c, d)| c * d.conj())
            .sum())
    }
}

/// Fourier coefficients of a function on T by trapezoidal quadrature on `grid`
/// equispaced points, returned at half-width `half_width`.
///
/// Aliasing folds coefficient `m + grid·j` onto `m`, so accuracy is governed by
/// the decay of the true coefficients beyond `grid − half_width`.
pub fn fourier_by_quadrature(
    f: impl Fn(C64) -> C64,
    half_width: usize,
    grid: usize,
) -> Result<LaurentSeq> {
    if grid < 2 * half_width + 1 {
        return Err(Error::DimensionTooSmall {
            got: grid,
            min: 2 * half_width + 1,
        });
    }
    let mut samples: Vec<C64> = (0..grid)
        .map(|j| {
            f(C64::from_polar(
                1.0,
                std::f64::consts::TAU * j as f64 / grid as f64,
            ))
        })
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(grid)
        .process(&mut samples);
    let scale = 1.0 / grid as f64;
    Ok(LaurentSeq::from_fn(half_width, |m| {
        samples[m.rem_euclid(grid as i64) as usize] * scale
    }))
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// `φ_a(z) = (a − z)/(1 − āz)`.
pub fn mobius_eval(a: DiskPoint, z: C64) -> Result<C64> {
    if z.norm() > 1.0 + UNIT_SLACK {
        return Err(Error::Domain(format!("|z| = {} > 1", z.norm())));
    }
    let a = a.value();
    Ok((a - z) / (ONE - a.conj() * z))
}

/// The fixed point ω_a of φ_a inside the disk.
pub fn fixed_point(a: DiskPoint) -> DiskPoint {
    // (1 − √(1−|a|²))/ā rewritten as a/(1 + √(1−|a|²)) to avoid cancellation.
    let w = a.value() / (1.0 + a.defect().sqrt());
    DiskPoint::new(w).expect("fixed point lies strictly inside the disk")
}

/// Taylor coefficients of φ_a itself: `c_0 = a`, `c_k = −(1−|a|²) ā^{k−1}`.
pub fn phi_coeffs(a: DiskPoint, n: usize) -> Vec<C64> {
    let ab = a.value().conj();
    let d = a.defect();
    let mut out = Vec::with_capacity(n);
    let mut pow = ONE;
    for k in 0..n {
        if k == 0 {
            out.push(a.value());
        } else {
            out.push(-d * pow);
            pow *= ab;
        }
    }
    out
}

/// Truncated Cauchy product, first `n` coefficients.
pub fn cauchy_product(f: &[C64], g: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; n];
    for (i, &fi) in f.iter().enumerate().take(n) {
        if fi == ZERO {
            continue;
        }
        for (j, &gj) in g.iter().enumerate().take(n - i) {
            out[i + j] += fi * gj;
        }
    }
    out
}

/// First `n` Taylor coefficients of `φ_a^power`.
///
/// Computed by repeated squaring with truncated Cauchy products at padded
/// length `2n`, then cut to `n`.
pub fn phi_power_coeffs(a: DiskPoint, power: usize, n: usize) -> CoeffSeq {
    let padded = 2 * n.max(1);
    let mut result = vec![ZERO; padded];
    result[0] = ONE;
    let mut base = phi_coeffs(a, padded);
    let mut e = power;
    while e > 0 {
        if e & 1 == 1 {
            result = cauchy_product(&result, &base, padded);
        }
        e >>= 1;
        if e > 0 {
            base = cauchy_product(&base, &base, padded);
        }
    }
    result.truncate(n);
    CoeffSeq::new(result)
}

/// Multiplies a truncated series by φ_a in place of length: `g = φ_a f`.
///
/// Uses `(1 − āz) g = (a − z) f`, i.e. `g_k = ā g_{k−1} + a f_k − f_{k−1}`,
/// exact for the retained coefficients.
pub fn mul_phi(a: DiskPoint, f: &[C64]) -> Vec<C64> {
    let av = a.value();
    let ab = av.conj();
    let mut g = Vec::with_capacity(f.len());
    let mut prev_g = ZERO;
    let mut prev_f = ZERO;
    for &fk in f {
        let gk = ab * prev_g + av * fk - prev_f;
        g.push(gk);
        prev_g = gk;
        prev_f = fk;
    }
    g
}

/// Multiplies by `1/(1 − c z)`: `g_k = f_k + c g_{k−1}`.
pub fn div_one_minus(c: C64, f: &[C64]) -> Vec<C64> {
    let mut g = Vec::with_capacity(f.len());
    let mut prev = ZERO;
    for &fk in f {
        prev = fk + c * prev;
        g.push(prev);
    }
    g
}

/// Multiplies by `1 − c z`.
pub fn mul_one_minus(c: C64, f: &[C64]) -> Vec<C64> {
    let mut g = f.to_vec();
    for k in (1..f.len()).rev() {
        g[k] -= c * f[k - 1];
    }
    g
}

/// `(f(z) − f(b))/(z − b)` for a polynomial `f`, by synthetic division.
pub fn divided_difference(f: &[C64], b: C64) -> Vec<C64> {
    let n = f.len();
    let mut q = vec![ZERO; n];
    if n < 2 {
        return q;
    }
    q[n - 2] = f[n - 1];
    for i in (0..n - 2).rev() {
        q[i] = f[i + 1] + b * q[i + 1];
    }
    q
}

/// Kernel normalization for [`szego_coeffs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `k_a = 1/(1 − āz)`.
    Plain,
    /// `√(1−|a|²) k_a`, a unit vector.
    Normalized,
}

/// Coefficients `ā^k` of the Szegő kernel at `a`.
pub fn szego_coeffs(a: DiskPoint, n: usize, kernel: Kernel) -> CoeffSeq {
    let ab = a.value().conj();
    let scale = match kernel {
        Kernel::Plain => 1.0,
        Kernel::Normalized => a.defect().sqrt(),
    };
    let mut pow = C64::new(scale, 0.0);
    let coeffs = (0..n)
        .map(|_| {
            let c = pow;
            pow *= ab;
            c
        })
        .collect();
    CoeffSeq::new(coeffs)
}

/// `f_a = (1 + ω̄z)/(1 − ω̄z)` with ω the fixed point of φ_a: `(1, 2ω̄, 2ω̄², …)`.
pub fn fa_coeffs(a: DiskPoint, n: usize) -> CoeffSeq {
    let wb = fixed_point(a).value().conj();
    let mut pow = ONE;
    let coeffs = (0..n)
        .map(|k| {
            let c = if k == 0 { ONE } else { 2.0 * pow };
            pow *= wb;
            c
        })
        .collect();
    CoeffSeq::new(coeffs)
}
