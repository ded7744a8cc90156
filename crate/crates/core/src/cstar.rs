//! Functional model of the C*-algebra generated by the eigenspace projections
//! of `C_a`: elements are pairs (scalar, `2 × 2` matrix function on `σ(H)`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::DiskPoint;
use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::ops::{eigenspace_pair, OperatorMatrix, PairOptions, ProjectionPair};

/// Smallest admissible model grid.
pub const MIN_GRID: usize = 16;

/// Coefficients of a word and its adjoint may differ by at most this much.
const WORD_HERMITIAN_TOL: f64 = 1e-12;

/// An element `(α, [[f00, f01], [f10, f11]])` sampled on a grid of `σ(H)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelElement {
    pub alpha: C64,
    /// Ascending; the last point is `t = 1`.
    pub grid: Vec<f64>,
    pub f00: Vec<C64>,
    pub f01: Vec<C64>,
    pub f10: Vec<C64>,
    pub f11: Vec<C64>,
}

impl ModelElement {
    fn constant(grid: &[f64], alpha: C64, m: [C64; 4]) -> Self {
        let n = grid.len();
        Self {
            alpha,
            grid: grid.to_vec(),
            f00: vec![m[0]; n],
            f01: vec![m[1]; n],
            f10: vec![m[2]; n],
            f11: vec![m[3]; n],
        }
    }

    pub fn identity(grid: &[f64]) -> Self {
        Self::constant(grid, ONE, [ONE, ZERO, ZERO, ONE])
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Pointwise matrix at grid index `i`, row-major.
    pub fn at(&self, i: usize) -> [C64; 4] {
        [self.f00[i], self.f01[i], self.f10[i], self.f11[i]]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let mut out = self.clone();
        out.alpha = self.alpha * other.alpha;
        for i in 0..self.grid.len() {
            let [a, b, c, d] = self.at(i);
            let [e, f, g, h] = other.at(i);
            out.f00[i] = a * e + b * g;
            out.f01[i] = a * f + b * h;
            out.f10[i] = c * e + d * g;
            out.f11[i] = c * f + d * h;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let sum = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(u, v)| u + v).collect();
        Ok(Self {
            alpha: self.alpha + other.alpha,
            grid: self.grid.clone(),
            f00: sum(&self.f00, &other.f00),
            f01: sum(&self.f01, &other.f01),
            f10: sum(&self.f10, &other.f10),
            f11: sum(&self.f11, &other.f11),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        let sc = |x: &[C64]| x.iter().map(|u| u * s).collect();
        Self {
            alpha: self.alpha * s,
            grid: self.grid.clone(),
            f00: sc(&self.f00),
            f01: sc(&self.f01),
            f10: sc(&self.f10),
            f11: sc(&self.f11),
        }
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let cj = |x: &[C64]| x.iter().map(|u| u.conj()).collect();
        Self {
            alpha: self.alpha.conj(),
            grid: self.grid.clone(),
            f00: cj(&self.f00),
            f01: cj(&self.f10),
            f10: cj(&self.f01),
            f11: cj(&self.f11),
        }
    }

    /// `max(|f00(1) − α|, |f01(1)|, |f10(1)|)`.
    pub fn gluing_residual(&self) -> f64 {
        let Some(last) = self.grid.len().checked_sub(1) else {
            return 0.0;
        };
        (self.f00[last] - self.alpha)
            .norm()
            .max(self.f01[last].norm())
            .max(self.f10[last].norm())
    }

    /// Largest entrywise deviation from another element on the same grid.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        let dev = |x: &[C64], y: &[C64]| {
            x.iter()
                .zip(y)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max)
        };
        Ok((self.alpha - other.alpha)
            .norm()
            .max(dev(&self.f00, &other.f00))
            .max(dev(&self.f01, &other.f01))
            .max(dev(&self.f10, &other.f10))
            .max(dev(&self.f11, &other.f11)))
    }

    /// Eigenvalues of every pointwise Hermitian part together with `Re α`,
    /// ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.grid.len() + 1);
        out.push(self.alpha.re);
        for i in 0..self.grid.len() {
            let [a, b, c, d] = self.at(i);
            let off = (b + c.conj()) * 0.5;
            let mean = 0.5 * (a.re + d.re);
            let half = 0.5 * (a.re - d.re);
            let rad = (half * half + off.norm_sqr()).sqrt();
            out.push(mean - rad);
            out.push(mean + rad);
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Uniform grid on `[1−|a|², 1]`, both endpoints included.
pub fn model_grid(a: DiskPoint, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < MIN_GRID {
        return Err(Error::DimensionTooSmall {
            got: grid_size,
            min: MIN_GRID,
        });
    }
    let lo = 1.0 - a.modulus().powi(2);
    let step = (1.0 - lo) / (grid_size - 1) as f64;
    let mut grid: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();
    grid[grid_size - 1] = 1.0;
    Ok(grid)
}

/// Model grid refined together with the truncation: `N/2` points.
///
/// With a fixed grid the Hausdorff distance stalls at the model's own
/// sampling gap near `t = 1`, where `√(1−t)` is steepest.
pub fn paired_grid_size(n: usize) -> usize {
    (n / 2).max(MIN_GRID)
}

/// Images of `P` and `Q` on an arbitrary grid in `[0, 1]` ending at 1.
pub fn generator_images_on(grid: &[f64]) -> (ModelElement, ModelElement) {
    let p = ModelElement::constant(grid, ONE, [ONE, ZERO, ZERO, ZERO]);
    let mut q = ModelElement::constant(grid, ZERO, [ZERO; 4]);
    for (i, &t) in grid.iter().enumerate() {
        let cs = (t * (1.0 - t)).max(0.0).sqrt();
        q.f00[i] = C64::new(1.0 - t, 0.0);
        q.f01[i] = C64::new(cs, 0.0);
        q.f10[i] = C64::new(cs, 0.0);
        q.f11[i] = C64::new(t, 0.0);
    }
    (p, q)
}

/// `P ↦ (1, [[1,0],[0,0]])`, `Q ↦ (0, [[1−t, √(t(1−t))], [√(t(1−t)), t]])`.
pub fn generator_images(a: DiskPoint, grid_size: usize) -> Result<(ModelElement, ModelElement)> {
    Ok(generator_images_on(&model_grid(a, grid_size)?))
}

/// Grid point of parameter `b` matching `t` for parameter `a`:
/// `1 − (1−t)|b|²/|a|²`.
pub fn reparameterize(a: DiskPoint, b: DiskPoint, t: f64) -> f64 {
    let (ra, rb) = (a.modulus().powi(2), b.modulus().powi(2));
    1.0 - (1.0 - t) * rb / ra
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    P,
    Q,
}

impl Letter {
    fn symbol(self) -> char {
        match self {
            Letter::P => 'P',
            Letter::Q => 'Q',
        }
    }
}

/// `coeff · letters`, where an empty letter list is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub letters: Vec<Letter>,
}

/// A noncommutative polynomial in the two projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordExpr {
    terms: Vec<Term>,
}

impl WordExpr {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::WordParse("empty word".into()));
        }
        if let Some(t) = terms
            .iter()
            .find(|t| !(t.coeff.re.is_finite() && t.coeff.im.is_finite()))
        {
            return Err(Error::WordParse(format!(
                "non-finite coefficient {}",
                t.coeff
            )));
        }
        Ok(Self { terms })
    }

    pub fn monomial(letters: Vec<Letter>) -> Self {
        Self {
            terms: vec![Term {
                coeff: ONE,
                letters,
            }],
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Longest monomial.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.letters.len())
            .max()
            .unwrap_or(0)
    }

    /// Conjugated coefficients and reversed letters.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.conj(),
                letters: t.letters.iter().rev().copied().collect(),
            })
            .collect();
        Self { terms }
    }

    /// Coefficients collected per monomial; projections are idempotent, so
    /// repeated letters are merged first.
    fn collected(&self) -> BTreeMap<Vec<Letter>, C64> {
        let mut map: BTreeMap<Vec<Letter>, C64> = BTreeMap::new();
        for t in &self.terms {
            let mut key = t.letters.clone();
            key.dedup();
            *map.entry(key).or_insert(ZERO) += t.coeff;
        }
        map
    }

    pub fn is_hermitian(&self) -> bool {
        let own = self.collected();
        let adj = self.adjoint().collected();
        own.keys().chain(adj.keys()).all(|k| {
            let x = own.get(k).copied().unwrap_or(ZERO);
            let y = adj.get(k).copied().unwrap_or(ZERO);
            (x - y).norm() <= WORD_HERMITIAN_TOL
        })
    }

    fn fold<T: Clone>(
        &self,
        identity: T,
        p: &T,
        q: &T,
        mul: impl Fn(&T, &T) -> Result<T>,
        add: impl Fn(&T, &T) -> Result<T>,
        scale: impl Fn(&T, C64) -> T,
    ) -> Result<T> {
        let mut acc: Option<T> = None;
        for t in &self.terms {
            let mut prod: Option<T> = None;
            for l in &t.letters {
                let g = match l {
                    Letter::P => p,
                    Letter::Q => q,
                };
                prod = Some(match prod {
                    None => g.clone(),
                    Some(x) => mul(&x, g)?,
                });
            }
            let term = scale(&prod.unwrap_or_else(|| identity.clone()), t.coeff);
            acc = Some(match acc {
                None => term,
                Some(x) => add(&x, &term)?,
            });
        }
        acc.ok_or_else(|| Error::WordParse("empty word".into()))
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if t.coeff != ONE || t.letters.is_empty() {
                if t.coeff.im == 0.0 {
                    write!(f, "{}", t.coeff.re)?;
                } else {
                    write!(f, "({}{:+}i)", t.coeff.re, t.coeff.im)?;
                }
            }
            if t.coeff != ONE && !t.letters.is_empty() {
                f.write_str("*")?;
            }
            for l in &t.letters {
                write!(f, "{}", l.symbol())?;
            }
        }
        Ok(())
    }
}

fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::WordParse(format!("bad coefficient `{s}`"));
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or leading
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        });
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse().map_err(|_| bad())?,
        };
        return Ok(C64::new(re.parse().map_err(|_| bad())?, im));
    }
    Ok(C64::new(s.parse().map_err(|_| bad())?, 0.0))
}

/// Grammar: terms joined by `+`/`-`; a term is an optional coefficient
/// (`2`, `0.5`, `(1-2i)`), an optional `*`, and letters from `P`, `Q`, `I`.
impl FromStr for WordExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let src: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = |msg: &str| Error::WordParse(format!("{msg} in `{s}`"));
        let mut terms = Vec::new();
        let mut i = 0;
        while i < src.len() {
            let mut sign = 1.0;
            while i < src.len() && (src[i] == '+' || src[i] == '-') {
                if src[i] == '-' {
                    sign = -sign;
                }
                i += 1;
            }
            let mut coeff = ONE;
            let mut seen = false;
            if i < src.len() && src[i] == '(' {
                let close = src[i..]
                    .iter()
                    .position(|&c| c == ')')
                    .ok_or_else(|| err("unclosed `(`"))?;
                let body: String = src[i + 1..i + close].iter().collect();
                coeff = parse_complex(&body)?;
                seen = true;
                i += close + 1;
            } else {
                let start = i;
                while i < src.len()
                    && (src[i].is_ascii_digit()
                        || src[i] == '.'
                        || src[i] == 'e'
                        || (i > start && matches!(src[i], '+' | '-') && src[i - 1] == 'e'))
                {
                    i += 1;
                }
                if i > start {
                    let text: String = src[start..i].iter().collect();
                    coeff = parse_complex(&text)?;
                    seen = true;
                }
            }
            if i < src.len() && src[i] == '*' {
                i += 1;
            }
            let mut letters = Vec::new();
            while i < src.len() && matches!(src[i], 'P' | 'Q' | 'I') {
                match src[i] {
                    'P' => letters.push(Letter::P),
                    'Q' => letters.push(Letter::Q),
                    _ => {}
                }
                seen = true;
                i += 1;
            }
            if !seen {
                return Err(err("expected a term"));
            }
            if i < src.len() && !matches!(src[i], '+' | '-') {
                return Err(err(&format!("unexpected `{}`", src[i])));
            }
            terms.push(Term {
                coeff: coeff * sign,
                letters,
            });
        }
        WordExpr::new(terms)
    }
}

/// Pointwise evaluation of a word on the model images.
pub fn eval_word_model(
    w: &WordExpr,
    images: &(ModelElement, ModelElement),
) -> Result<ModelElement> {
    let (p, q) = images;
    p.check_grid(q)?;
    w.fold(
        ModelElement::identity(&p.grid),
        p,
        q,
        |x, y| x.mul(y),
        |x, y| x.add(y),
        |x, s| x.scale(s),
    )
}

/// The word evaluated on bare matrices.
pub fn word_matrix_of(w: &WordExpr, p: &CMat, q: &CMat) -> Result<CMat> {
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch {
            left: p.nrows(),
            right: q.nrows(),
        });
    }
    let n = p.nrows();
    w.fold(
        CMat::identity(n, n),
        p,
        q,
        |x, y| Ok(linalg::matmul(x, y)),
        |x, y| Ok(x + y),
        |x, s| x * s,
    )
}

/// The word evaluated on truncated projections.
pub fn word_matrix(w: &WordExpr, p: &OperatorMatrix, q: &OperatorMatrix) -> Result<OperatorMatrix> {
    if p.basis() != q.basis() {
        return Err(Error::BasisMismatch);
    }
    let m = word_matrix_of(w, p.entries(), q.entries())?;
    OperatorMatrix::new(m, p.basis(), w.to_string())
}

/// Hausdorff distance between the spectrum of a Hermitian word on the
/// compressed eigenspace pair and its model spectrum.
pub fn spectra_match(w: &WordExpr, a: DiskPoint, n: usize, grid_size: usize) -> Result<f64> {
    let pair = eigenspace_pair(a, n, &PairOptions::default())?;
    spectra_match_on(w, &pair, grid_size)
}

/// [`spectra_match`] for an already built pair.
pub fn spectra_match_on(w: &WordExpr, pair: &ProjectionPair, grid_size: usize) -> Result<f64> {
    if !w.is_hermitian() {
        return Err(Error::NonHermitianWord);
    }
    let (p, q) = pair.compressed();
    let m = linalg::hermitize(&word_matrix_of(w, &p, &q)?);
    let matrix_eigs = linalg::herm_eigenvalues(&m)?;
    let model = eval_word_model(w, &generator_images(pair.a, grid_size)?)?;
    Ok(linalg::hausdorff(&matrix_eigs, &model.spectrum()))
}

/// Seeded Hermitian words `c·m + c̄·rev(m)` with `m` a monomial of length
/// `1..=max_len` and `c` uniform in the unit square.
pub fn random_hermitian_words(seed: u64, count: usize, max_len: usize) -> Vec<WordExpr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=max_len.max(1));
            let letters: Vec<Letter> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        Letter::P
                    } else {
                        Letter::Q
                    }
                })
                .collect();
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let rev: Vec<Letter> = letters.iter().rev().copied().collect();
            WordExpr {
                terms: vec![
                    Term { coeff: c, letters },
                    Term {
                        coeff: c.conj(),
                        letters: rev,
                    },
                ],
            }
        })
        .collect()
}
