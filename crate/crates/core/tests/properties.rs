//! Property suites over the default parameter grid and random inputs.

mod common;

use common::*;
use hardyops::identities::IdentityId;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn phi_series_inverts(a in disk_point(0.7)) {
        phi_series_inverts_the_map(a)?;
    }

    #[test]
    fn fixed_point_anticommutes(a in disk_point(0.9)) {
        fixed_point_anticommutes_pointwise(a)?;
    }

    #[test]
    fn powers_unimodular_with_geometric_tails(a in disk_point(0.7), n in 1usize..6) {
        powers_are_unimodular_and_tails_geometric(a, n)?;
    }
}

#[test]
fn compression_consistency_exact() {
    compression_consistency_exact_builders().unwrap();
}

#[test]
fn compression_consistency_of_products() {
    compression_consistency_products().unwrap();
}

#[test]
fn adjoint_consistency() {
    adjoint_consistency_pairs().unwrap();
}

#[test]
fn reflections_converge() {
    reflections_converge_on_low_modes().unwrap();
}

#[test]
fn rank_checks() {
    defect_and_commutator_ranks().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identity_adjoint_pair(idx in 0usize..IdentityId::ALL.len(), g in 0usize..5) {
        identity_builders_adjoint_pair(idx, g)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn halmos(
        seed in any::<u64>(),
        dims in (0usize..3, 0usize..3, 0usize..3, 0usize..3),
        angles in angles_strategy(),
    ) {
        halmos_reconstruction(seed, dims, angles)?;
    }

    #[test]
    fn difference_symmetry(seed in any::<u64>(), m01 in 0usize..3, m10 in 0usize..3, angles in angles_strategy()) {
        difference_spectrum_is_symmetric(seed, m01, m10, angles)?;
    }

    #[test]
    fn gluing(a in disk_point(0.9), w in word_strategy()) {
        model_words_are_glued(a, w)?;
    }

    #[test]
    fn parameter_shape(a in disk_point(0.9), b in disk_point(0.9), w in word_strategy()) {
        model_shape_is_parameter_independent(a, b, w)?;
    }
}
