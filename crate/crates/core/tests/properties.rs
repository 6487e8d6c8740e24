//! Property-based invariants over random profile families.
//!
//! These pin the structural facts the solver leans on — norm axioms, the
//! algebra property of the weighted Hölder scale, the bound of the Hölder
//! quotient by its derivative surrogate, exactness of the local inverse in
//! both directions, and invertibility of the curve parameterization —
//! using randomized bump layouts rather than hand-picked fixtures.

mod common;

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use spiralsheet::linear::{apply_l, apply_m};
use spiralsheet::norms::{angle_bracket, norm_gk, norm_x, norm_y};
use spiralsheet::{
    FieldPair, Grid, GridSpec, PairKind, Params, SampledField, SpiralSolution,
};

use common::{bump_field, localized_domain_pair, localized_image_pair, sum_bumps};

fn default_grid() -> Arc<Grid> {
    Grid::new(GridSpec::default()).unwrap()
}

/// Strategy for bump parameters `(amplitude, center, half-width)` placed
/// at least six widths inside the default grid.
fn bump_terms(count: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    let lo = 1e-4_f64.ln();
    let hi = 1e4_f64.ln();
    prop::collection::vec(
        (0.5..0.9_f64)
            .prop_flat_map(move |w| (Just(w), lo + 6.0 * w..hi - 6.0 * w))
            .prop_flat_map(|(w, c)| (-1.0..1.0_f64).prop_map(move |a| (a, c, w))),
        count,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_absolutely_homogeneous(
        terms in bump_terms(1..4),
        c in prop::num::f64::NORMAL.prop_map(|x| x % 100.0),
        k in 0u32..3,
    ) {
        let grid = default_grid();
        let f = bump_field(&grid, 0.0, &terms);
        let base = norm_gk(&f, k, 0.5);
        let scaled = norm_gk(&f.scale(c), k, 0.5);
        prop_assert!(
            (scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + c.abs() * base),
            "‖{c}·f‖ = {scaled}, |c|·‖f‖ = {}",
            c.abs() * base
        );
    }

    #[test]
    fn norm_satisfies_the_triangle_inequality(
        terms_f in bump_terms(1..4),
        terms_g in bump_terms(1..4),
        k in 0u32..3,
    ) {
        let grid = default_grid();
        let f = bump_field(&grid, 0.0, &terms_f);
        let g = bump_field(&grid, 0.0, &terms_g);
        let sum = f.add_scaled(&g, 1.0).unwrap();
        prop_assert!(
            norm_gk(&sum, k, 0.5) <= norm_gk(&f, k, 0.5) + norm_gk(&g, k, 0.5) + 1e-12,
            "triangle inequality failed"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_has_the_algebra_property(
        terms_f in bump_terms(1..4),
        terms_g in bump_terms(1..4),
        k1 in 0u32..3,
        extra in 0u32..2,
        alpha in prop::sample::select(vec![0.5, 0.75]),
    ) {
        // ‖fg‖_{k₁} ≤ ‖f‖_{k₁}·‖g‖_{k₂} for decaying fields and k₂ ≥ k₁.
        let k2 = k1 + extra;
        let grid = default_grid();
        let f = bump_field(&grid, 0.0, &terms_f);
        let g = bump_field(&grid, 0.0, &terms_g);
        let (tf, tg) = (terms_f.clone(), terms_g.clone());
        let product = SampledField::make(
            &grid,
            |t| sum_bumps(t, &terms_f).0 * sum_bumps(t, &terms_g).0,
            Some(&|t: f64| {
                let (fv, fd) = sum_bumps(t, &tf);
                let (gv, gd) = sum_bumps(t, &tg);
                fd * gv + fv * gd
            }),
        )
        .unwrap();
        prop_assert!(
            norm_gk(&product, k1, alpha)
                <= norm_gk(&f, k1, alpha) * norm_gk(&g, k2, alpha) * (1.0 + 1e-6),
            "algebra property failed at k1={k1}, k2={k2}, α={alpha}"
        );
    }
}

/// The two halves of the seminorm estimator, recomputed from the raw
/// samples: the adjacent-pair Hölder quotient and the weighted derivative
/// sup it is bounded by.
fn estimator_parts(field: &SampledField, k: u32, alpha: f64) -> (f64, f64) {
    let nodes = &field.grid().nodes;
    let values = field.values();
    let derivs = field.derivs();
    let mut surrogate = 0.0_f64;
    let mut quotient = 0.0_f64;
    for i in 0..nodes.len() {
        let t = nodes[i];
        surrogate = surrogate.max(
            angle_bracket(t).powf(k as f64 + 2.0 * alpha - 1.0)
                * t.powf(1.0 - alpha)
                * derivs[i].abs(),
        );
        if i + 1 < nodes.len() {
            let dt = nodes[i + 1] - t;
            if dt < 1.0 {
                quotient = quotient.max(
                    angle_bracket(nodes[i + 1]).powf(k as f64 + alpha)
                        * (values[i + 1] - values[i]).abs()
                        / dt.powf(alpha),
                );
            }
        }
    }
    (quotient, surrogate)
}

#[test]
fn holder_quotient_is_bounded_by_the_derivative_surrogate() {
    // Calibrated on bump fields with seeds 0..40 (worst observed
    // quotient/surrogate ratio 1.009 — the Δθ < 1 gate caps the adjacent
    // quotient at ≈ (⟨θ⟩·h)^{1−α} ≤ 1 of the derivative sup); frozen
    // constant asserted on the disjoint seeds 100..120.
    let grid = default_grid();
    let frozen_c = 1.2;
    for seed in 100u64..120 {
        let pair = localized_domain_pair(&grid, 1.0, seed);
        for field in [&pair.first, &pair.second] {
            for k in 0u32..3 {
                let (quotient, surrogate) = estimator_parts(field, k, 0.5);
                assert!(
                    quotient <= frozen_c * surrogate + 1e-300,
                    "seed {seed}, k {k}: quotient {quotient:.6e} vs surrogate {surrogate:.6e}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn domain_pairs_vanish_at_the_center(seed in 0u64..10_000) {
        // Corollary behavior of the domain space: θ·(θ^μ r)′ must die out
        // toward θ → 0 at the rate the α-weight prescribes, relative to
        // its own mid-grid size.
        let grid = default_grid();
        let (mu, alpha) = (1.0, 0.5);
        let pair = localized_domain_pair(&grid, mu, seed);
        let scale_of = |i: usize| {
            let t = grid.nodes[i];
            let r = pair.first.values()[i];
            let rp = pair.first.derivs()[i];
            (mu * t.powf(mu) * r + t.powf(mu + 1.0) * rp).abs()
        };
        let n = grid.nodes.len();
        let mid_scale = (n / 4..3 * n / 4).map(scale_of).fold(0.0, f64::max);
        prop_assert!(
            scale_of(0) <= 10.0 * grid.spec.theta_min.powf(alpha) * mid_scale,
            "head value {:.3e} vs allowance {:.3e}",
            scale_of(0),
            10.0 * grid.spec.theta_min.powf(alpha) * mid_scale
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn local_inverse_round_trips_both_ways(seed in 0u64..10_000) {
        let params = Params::default();
        let grid = default_grid();
        let x = localized_domain_pair(&grid, params.mu, seed);
        let there_and_back = apply_m(&apply_l(&x, &params).unwrap(), &params).unwrap();
        let err = norm_x(&there_and_back.sub(&x).unwrap(), &params).unwrap()
            / norm_x(&x, &params).unwrap();
        prop_assert!(err <= 1e-6, "𝓜∘𝓛 deviated by {err:.3e}");

        let y = localized_image_pair(&grid, params.mu, seed);
        let back_and_there = apply_l(&apply_m(&y, &params).unwrap(), &params).unwrap();
        let err = norm_y(&back_and_there.sub(&y).unwrap(), &params).unwrap()
            / norm_y(&y, &params).unwrap();
        prop_assert!(err <= 1e-6, "𝓛∘𝓜 deviated by {err:.3e}");
    }
}

fn base_solution() -> &'static SpiralSolution {
    static SOLUTION: OnceLock<SpiralSolution> = OnceLock::new();
    SOLUTION.get_or_init(|| {
        let params = Params {
            m: 8,
            ..Params::default()
        };
        let grid = Grid::new(params.grid).unwrap();
        SpiralSolution::new(FieldPair::zero(grid, PairKind::DomainX), &params).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curve_parameter_inverts_the_circulation(log_theta in -3.0..3.0_f64) {
        let s = base_solution();
        let theta = 10f64.powf(log_theta);
        let gamma = s.gamma_tilde(theta);
        let theta_back = s.theta_of_gamma(gamma).unwrap();
        prop_assert!(
            (theta_back - theta).abs() <= 1e-10 * theta,
            "θ = {theta} came back as {theta_back}"
        );
    }
}

#[test]
fn kind_mismatches_are_rejected_everywhere() {
    let grid = default_grid();
    let params = Params::default();
    let x = FieldPair::zero(grid.clone(), PairKind::DomainX);
    let y = FieldPair::zero(grid, PairKind::ImageY);
    assert!(norm_y(&x, &params).is_err());
    assert!(norm_x(&y, &params).is_err());
    assert!(apply_l(&y, &params).is_err());
    assert!(apply_m(&x, &params).is_err());
    assert!(spiralsheet::singular::apply_i_m(&y, &params).is_err());
}
