//! Property bodies shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use hardyops::cstar::{
    eval_word_model, generator_images, generator_images_on, model_grid, random_hermitian_words,
    reparameterize, WordExpr,
};
use hardyops::hardy::{fixed_point, mobius_eval, phi_power_coeffs};
use hardyops::identities::{run_identity, tsquare_fit, IdentityId, Workspace};
use hardyops::linalg::{self, herm_eigenvalues};
use hardyops::ops::{
    adjoint_composition_matrix, composition_gram, composition_matrix, gamma_adjoint_matrix,
    gamma_matrix, parity_matrix, rho_raw, shift_matrix, toeplitz_inner, w_matrix,
};
use hardyops::spectral::co_gram_matrix;
use hardyops::two_proj::{five_subspaces, synthetic_pair};
use hardyops::{CMat, CoeffSeq, DiskPoint, C64};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub type Check = std::result::Result<(), TestCaseError>;

/// Default grid: `{0.3, 0.5, 0.6, 0.5e^{iπ/4}, 0.7}`.
pub fn grid() -> Vec<DiskPoint> {
    vec![
        DiskPoint::real(0.3).unwrap(),
        DiskPoint::real(0.5).unwrap(),
        DiskPoint::real(0.6).unwrap(),
        DiskPoint::polar_deg(0.5, 45.0).unwrap(),
        DiskPoint::real(0.7).unwrap(),
    ]
}

pub fn disk_point(max_r: f64) -> impl Strategy<Value = DiskPoint> {
    (0.0..max_r, 0.0..2.0 * PI).prop_map(|(r, t)| DiskPoint::new(C64::from_polar(r, t)).unwrap())
}

pub fn angles_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..FRAC_PI_2 - 0.05, 0..5).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        // distinct enough to pair eigenvalues unambiguously
        v.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        v
    })
}

pub fn word_strategy() -> impl Strategy<Value = WordExpr> {
    (any::<u64>(), 1usize..7).prop_map(|(seed, len)| random_hermitian_words(seed, 1, len).remove(0))
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn lead(m: &CMat, n: usize) -> CMat {
    m.view((0, 0), (n, n)).into_owned()
}

fn central(m: &CMat, half: usize, from_half: usize) -> CMat {
    let off = from_half - half;
    m.view((off, off), (2 * half + 1, 2 * half + 1))
        .into_owned()
}

fn circle(k: usize) -> Vec<C64> {
    (0..k)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64))
        .collect()
}

fn sorted_eigs(m: &CMat) -> Vec<f64> {
    herm_eigenvalues(&linalg::hermitize(m)).unwrap()
}

// ---- coefficient level ----

pub fn phi_series_inverts_the_map(a: DiskPoint) -> Check {
    let series = CoeffSeq::new(phi_power_coeffs(a, 1, 128).into_coeffs());
    for z in circle(64) {
        let w = mobius_eval(a, z).unwrap();
        prop_assert!((series.eval(w).unwrap() - z).norm() < 1e-10);
    }
    Ok(())
}

pub fn fixed_point_anticommutes_pointwise(a: DiskPoint) -> Check {
    let w = fixed_point(a);
    for z in circle(64) {
        let lhs = mobius_eval(w, mobius_eval(a, z).unwrap()).unwrap();
        let rhs = -mobius_eval(w, z).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
    Ok(())
}

pub fn powers_are_unimodular_and_tails_geometric(a: DiskPoint, n: usize) -> Check {
    let len = 256;
    let c = phi_power_coeffs(a, n, len);
    let tail: f64 = c.coeffs()[len / 2..].iter().map(|x| x.norm()).sum();
    for z in circle(32) {
        let direct = mobius_eval(a, z).unwrap().powi(n as i32);
        prop_assert!((direct.norm() - 1.0).abs() < 1e-12);
        prop_assert!((c.eval(z).unwrap() - direct).norm() < 1e-9 + tail);
    }
    let r = a.modulus();
    if r > 0.05 {
        // |c_k| ≤ K k^n r^k with K fitted on the head
        let k0 = 4 * n;
        let k_fit = (0..=k0)
            .map(|k| c.coeffs()[k].norm() / r.powi(k as i32))
            .fold(0.0, f64::max);
        let bound = k_fit * (k0 as f64 + 1.0).powi(n as i32);
        for k in k0..len / 2 {
            let scaled = c.coeffs()[k].norm() / r.powi(k as i32);
            prop_assert!(scaled <= bound * (k as f64 + 1.0).powi(n as i32));
        }
    }
    Ok(())
}

// ---- compression consistency ----

pub fn compression_consistency_exact_builders() -> Check {
    let n = 64;
    for a in grid() {
        let exact: Vec<(&str, CMat, CMat)> = vec![
            (
                "C_a",
                composition_matrix(a, n).unwrap().into_entries(),
                composition_matrix(a, 2 * n).unwrap().into_entries(),
            ),
            (
                "C*C",
                composition_gram(a, n).unwrap().into_entries(),
                composition_gram(a, 2 * n).unwrap().into_entries(),
            ),
            (
                "CC*",
                co_gram_matrix(a, n).unwrap().into_entries(),
                co_gram_matrix(a, 2 * n).unwrap().into_entries(),
            ),
            (
                "T",
                toeplitz_inner(a, n).unwrap().into_entries(),
                toeplitz_inner(a, 2 * n).unwrap().into_entries(),
            ),
            (
                "W_a",
                w_matrix(a, n).unwrap().into_entries(),
                w_matrix(a, 2 * n).unwrap().into_entries(),
            ),
            (
                "C_0",
                parity_matrix(n).into_entries(),
                parity_matrix(2 * n).into_entries(),
            ),
            (
                "S",
                shift_matrix(n).into_entries(),
                shift_matrix(2 * n).into_entries(),
            ),
        ];
        for (name, small, big) in exact {
            let scale = linalg::spectral_norm(&big).max(1.0);
            let gap = max_abs(&(small - lead(&big, n))) / scale;
            prop_assert!(gap < 1e-14, "{} at {:?}: {}", name, a, gap);
        }
        let g_small = gamma_matrix(a, n).unwrap().into_entries();
        let g_big = gamma_matrix(a, 2 * n).unwrap().into_entries();
        prop_assert!(max_abs(&(g_small - central(&g_big, n, 2 * n))) < 1e-14);
    }
    Ok(())
}

pub fn compression_consistency_products() -> Check {
    let n = 128;
    let h = n / 2;
    for a in grid() {
        let cs_small = adjoint_composition_matrix(a, n).unwrap().into_entries();
        let cs_big = adjoint_composition_matrix(a, 2 * n).unwrap().into_entries();
        let b = lead(&cs_big, h);
        let gap = max_abs(&(lead(&cs_small, h) - &b)) / linalg::spectral_norm(&b).max(1.0);
        prop_assert!(gap < 1e-8, "C* at {:?}: {}", a, gap);

        let gs_small = gamma_adjoint_matrix(a, n).unwrap().into_entries();
        let gs_big = gamma_adjoint_matrix(a, 2 * n).unwrap().into_entries();
        let b = central(&gs_big, h, 2 * n);
        let gap = max_abs(&(central(&gs_small, h, n) - &b)) / linalg::spectral_norm(&b).max(1.0);
        prop_assert!(gap < 1e-8, "Γ* at {:?}: {}", a, gap);
    }
    // ρ carries an inverse square root; its low block settles once the
    // padding covers the spread of the columns
    for a in grid().into_iter().filter(|a| a.modulus() <= 0.6) {
        let small = rho_raw(a, 2 * n).unwrap();
        let big = rho_raw(a, 4 * n).unwrap();
        let gap = max_abs(&(lead(&small, h) - lead(&big, h)));
        prop_assert!(gap < 1e-8, "ρ at {:?}: {}", a, gap);
    }
    Ok(())
}

// ---- adjoint consistency ----

pub fn adjoint_consistency_pairs() -> Check {
    let n = 128;
    let h = n / 2;
    for a in grid() {
        let c = composition_matrix(a, 2 * n).unwrap().into_entries();
        let cs = adjoint_composition_matrix(a, n).unwrap().into_entries();
        let scale = linalg::spectral_norm(&lead(&c, n));
        prop_assert!(max_abs(&(lead(&cs, h) - lead(&c.adjoint(), h))) / scale < 1e-12);

        let g = gamma_matrix(a, 2 * n).unwrap().into_entries();
        let gs = gamma_adjoint_matrix(a, n).unwrap().into_entries();
        let gap = max_abs(&(central(&gs, h, n) - central(&g.adjoint(), h, 2 * n)));
        prop_assert!(gap < 1e-10, "Γ at {:?}: {}", a, gap);

        let t = toeplitz_inner(a, n).unwrap();
        let tt = t.adjoint();
        prop_assert_eq!(tt.entries(), &t.entries().adjoint());
        let back = tt.adjoint();
        prop_assert_eq!(back.entries(), t.entries());
    }
    Ok(())
}

pub fn identity_builders_adjoint_pair(idx: usize, g: usize) -> Check {
    let id = IdentityId::ALL[idx];
    let o = run_identity(id, grid()[g], 64).unwrap();
    prop_assert!(o.adjoint_gap < 1e-12, "{}: {}", id, o.adjoint_gap);
    Ok(())
}

// ---- reflections and ranks ----

pub fn reflections_converge_on_low_modes() -> Check {
    let ids = [
        IdentityId::Involution,
        IdentityId::InvolutionW,
        IdentityId::InvolutionRho,
        IdentityId::InvolutionGamma,
    ];
    for a in grid() {
        for id in ids {
            let r: Vec<f64> = [64, 128, 256]
                .iter()
                .map(|&n| run_identity(id, a, n).unwrap().residual)
                .collect();
            prop_assert!(r[2] < 1e-9, "{} {:?} {:?}", id, a, r);
            for w in r.windows(2) {
                prop_assert!(
                    w[1] <= 1e-11 || w[1] <= 1.1 * w[0],
                    "{} {:?} {:?}",
                    id,
                    a,
                    r
                );
            }
        }
    }
    Ok(())
}

pub fn defect_and_commutator_ranks() -> Check {
    for a in grid() {
        let o = run_identity(IdentityId::DefectRankOne, a, 128).unwrap();
        prop_assert!(
            o.note
                .starts_with("rank 1, top singular value 1.0000000000"),
            "{}",
            o.note
        );
        let ws = Workspace::new(a, 128).unwrap();
        let fit = tsquare_fit(&ws).unwrap();
        prop_assert_eq!(fit.rank, 1, "{:?}", fit.singular_values);
        prop_assert!((fit.coefficient - C64::new(2.0, 0.0)).norm() < 1e-8);
    }
    Ok(())
}

// ---- Halmos reconstruction and P − Q symmetry ----

pub fn halmos_reconstruction(
    seed: u64,
    (m00, m01, m10, m11): (usize, usize, usize, usize),
    angles: Vec<f64>,
) -> Check {
    if m00 + m01 + m10 + m11 + angles.len() == 0 {
        return Ok(());
    }
    let pair = synthetic_pair(seed, m00, m01, m10, m11, &angles).unwrap();
    let model = five_subspaces(&pair.p, &pair.q, 1e-8).unwrap();
    prop_assert_eq!(model.dims, pair.dims);
    for (x, y) in model.angle_samples.iter().zip(&pair.angles) {
        prop_assert!((x - y).abs() < 1e-7);
    }
    let (p0, q0) = model.generic_blocks();
    for (i, &t) in model.angle_samples.iter().enumerate() {
        let k = 2 * i;
        let blk = |m: &CMat| m.view((k, k), (2, 2)).into_owned();
        let d = sorted_eigs(&(blk(&p0) - blk(&q0)));
        let s = sorted_eigs(&(blk(&p0) + blk(&q0)));
        prop_assert!((d[0] + t.sin()).abs() < 1e-12 && (d[1] - t.sin()).abs() < 1e-12);
        prop_assert!((s[0] - 1.0 + t.cos()).abs() < 1e-12 && (s[1] - 1.0 - t.cos()).abs() < 1e-12);
    }
    let diff = sorted_eigs(&(&pair.p - &pair.q));
    let sum = sorted_eigs(&(&pair.p + &pair.q));
    for (x, y) in diff.iter().zip(model.difference_spectrum()) {
        prop_assert!((x - y).abs() < 1e-8);
    }
    for (x, y) in sum.iter().zip(model.sum_spectrum()) {
        prop_assert!((x - y).abs() < 1e-8);
    }
    Ok(())
}

pub fn difference_spectrum_is_symmetric(
    seed: u64,
    m01: usize,
    m10: usize,
    angles: Vec<f64>,
) -> Check {
    let pair = synthetic_pair(seed, 1, m01, m10, 1, &angles).unwrap();
    let tol = 1e-8;
    let eig = sorted_eigs(&(&pair.p - &pair.q));
    let generic: Vec<f64> = eig
        .iter()
        .copied()
        .filter(|&m| (m.abs() - 1.0).abs() > 10.0 * tol && m.abs() > 10.0 * tol)
        .collect();
    for &m in &generic {
        let count = |v: f64| generic.iter().filter(|&&x| (x - v).abs() < tol).count();
        prop_assert_eq!(count(m), count(-m));
    }
    prop_assert_eq!(generic.len(), 2 * angles.len());
    Ok(())
}

// ---- gluing and parameter shape ----

pub fn model_words_are_glued(a: DiskPoint, w: WordExpr) -> Check {
    if a.modulus() <= 0.05 {
        return Ok(());
    }
    let images = generator_images(a, 64).unwrap();
    let x = eval_word_model(&w, &images).unwrap();
    prop_assert!(
        x.gluing_residual() <= 1e-12,
        "{}: {}",
        w,
        x.gluing_residual()
    );
    let xs = eval_word_model(&w.adjoint(), &images).unwrap();
    prop_assert!(xs.max_deviation(&x.adjoint()).unwrap() < 1e-12);
    Ok(())
}

pub fn model_shape_is_parameter_independent(a: DiskPoint, b: DiskPoint, w: WordExpr) -> Check {
    if a.modulus() <= 0.05 || b.modulus() <= 0.05 {
        return Ok(());
    }
    let ga = model_grid(a, 64).unwrap();
    let mapped: Vec<f64> = ga.iter().map(|&t| reparameterize(a, b, t)).collect();
    let gb = model_grid(b, 64).unwrap();
    for (x, y) in mapped.iter().zip(&gb) {
        prop_assert!((x - y).abs() < 1e-12);
    }
    // a's model transported along t is b's model
    let transported = eval_word_model(&w, &generator_images_on(&mapped)).unwrap();
    let native = eval_word_model(&w, &generator_images(b, 64).unwrap()).unwrap();
    let (st, sn) = (transported.spectrum(), native.spectrum());
    prop_assert_eq!(st.len(), sn.len());
    for (x, y) in st.iter().zip(&sn) {
        prop_assert!((x - y).abs() < 1e-9);
    }
    let xa = eval_word_model(&w, &generator_images_on(&ga)).unwrap();
    let last = ga.len() - 1;
    prop_assert!((xa.at(last)[0] - native.at(last)[0]).norm() < 1e-12);
    prop_assert!((xa.alpha - native.alpha).norm() < 1e-15);
    Ok(())
}

// ---- deterministic driver ----

/// Seed of the deterministic acceptance run.
pub const DEFAULT_SEED: [u8; 32] = *b"hardyops-acceptance-property-run";

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(
        config,
        TestRng::from_seed(RngAlgorithm::ChaCha, &DEFAULT_SEED),
    )
}

fn run_random<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Check) -> Result<(), String> {
    runner(cases).run(&s, f).map_err(|e| e.to_string())
}

fn run_fixed(f: fn() -> Check) -> Result<(), String> {
    f().map_err(|e| e.to_string())
}

fn all(results: Vec<Result<(), String>>) -> Result<(), String> {
    results
        .into_iter()
        .collect::<Result<Vec<()>, String>>()
        .map(|_| ())
}

/// Every property suite under the default seed, in a fixed order.
pub fn run_property_suites() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "compression consistency",
            all(vec![
                run_fixed(compression_consistency_exact_builders),
                run_fixed(compression_consistency_products),
            ]),
        ),
        (
            "adjoint consistency",
            all(vec![
                run_fixed(adjoint_consistency_pairs),
                run_random(24, (0usize..IdentityId::ALL.len(), 0usize..5), |(i, g)| {
                    identity_builders_adjoint_pair(i, g)
                }),
            ]),
        ),
        (
            "Halmos reconstruction",
            run_random(
                32,
                (
                    any::<u64>(),
                    (0usize..3, 0usize..3, 0usize..3, 0usize..3),
                    angles_strategy(),
                ),
                |(seed, dims, angles)| halmos_reconstruction(seed, dims, angles),
            ),
        ),
        (
            "spectrum symmetry of P-Q",
            run_random(
                32,
                (any::<u64>(), 0usize..3, 0usize..3, angles_strategy()),
                |(s, a, b, t)| difference_spectrum_is_symmetric(s, a, b, t),
            ),
        ),
        (
            "gluing invariants",
            all(vec![
                run_random(32, (disk_point(0.9), word_strategy()), |(a, w)| {
                    model_words_are_glued(a, w)
                }),
                run_random(
                    32,
                    (disk_point(0.9), disk_point(0.9), word_strategy()),
                    |(a, b, w)| model_shape_is_parameter_independent(a, b, w),
                ),
            ]),
        ),
        (
            "coefficient invariants",
            all(vec![
                run_random(16, disk_point(0.7), phi_series_inverts_the_map),
                run_random(16, disk_point(0.9), fixed_point_anticommutes_pointwise),
                run_random(16, (disk_point(0.7), 1usize..6), |(a, n)| {
                    powers_are_unimodular_and_tails_geometric(a, n)
                }),
            ]),
        ),
        (
            "reflections and ranks",
            all(vec![
                run_fixed(reflections_converge_on_low_modes),
                run_fixed(defect_and_commutator_ranks),
            ]),
        ),
    ]
}
