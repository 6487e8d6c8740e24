//! Shared constructions for unit tests.
//!
//! The workhorse is a Gaussian bump in log θ, centered well inside the grid
//! so that its double-exponential decay in θ puts the boundary samples at
//! the 1e-16 level.  Pairs built from such bumps exercise the operators
//! without involving the head/tail extrapolation models in any material
//! way: every integral the operators need is then a pure on-grid
//! quadrature, so identities that hold exactly in the continuum can be
//! asserted at quadrature accuracy.  Gaussians are used rather than
//! compactly supported cutoffs because the high derivatives of a cutoff
//! explode near its support edge and dominate the quadrature error there;
//! a Gaussian's derivatives stay Hermite-polynomial sized.  (Pairs with
//! genuine power-law tails are still covered by dedicated tests; their
//! reconstruction accuracy at the outermost decade is limited by how much
//! a fitted one-term power law can know about the integrand beyond the
//! grid.)

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::SampledField;
use crate::grid::Grid;
use crate::pair::{FieldPair, PairKind};

/// How many widths a bump center must keep away from the grid edges;
/// `exp(−6²) ≈ 2e-16` puts boundary samples at round-off.
const EDGE_SIGMAS: f64 = 6.0;

/// Value and θ-derivative of `exp(−s²)` with `s = (lnθ − c)/w`.
pub fn log_gaussian(theta: f64, c: f64, w: f64) -> (f64, f64) {
    let s = (theta.ln() - c) / w;
    let v = (-s * s).exp();
    (v, v * (-2.0 * s) / (w * theta))
}

/// Superposition of bumps: `(value, d/dθ)` at `theta`.
fn sum_bumps(theta: f64, terms: &[(f64, f64, f64)]) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for &(amp, c, w) in terms {
        let (b, bp) = log_gaussian(theta, c, w);
        v += amp * b;
        d += amp * bp;
    }
    (v, d)
}

/// Random bump parameters `(amplitude, center, half-width)` in log θ.
fn random_terms(rng: &mut ChaCha8Rng, grid: &Grid, n: usize) -> Vec<(f64, f64, f64)> {
    let lo = grid.spec.theta_min.ln();
    let hi = grid.spec.theta_max.ln();
    (0..n)
        .map(|_| {
            let w = rng.gen_range(0.5..0.9);
            let c = rng.gen_range(lo + EDGE_SIGMAS * w..hi - EDGE_SIGMAS * w);
            let amp = rng.gen_range(-1.0..1.0_f64);
            (amp, c, w)
        })
        .collect()
}

/// A random domain pair whose weighted profiles `θ^μ r` and `θ^{2μ−1} γ`
/// are superpositions of log-space Gaussian bumps, with analytic
/// derivatives.
pub fn localized_pair(grid: &Arc<Grid>, mu: f64, seed: u64) -> FieldPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_terms = random_terms(&mut rng, grid, 3);
    let g_terms = random_terms(&mut rng, grid, 3);
    localized_pair_from_terms(grid, mu, &r_terms, &g_terms)
}

/// Deterministic variant of [`localized_pair`] for hand-picked bump layouts.
pub fn localized_pair_from_terms(
    grid: &Arc<Grid>,
    mu: f64,
    r_terms: &[(f64, f64, f64)],
    g_terms: &[(f64, f64, f64)],
) -> FieldPair {
    let rt = r_terms.to_vec();
    let gt = g_terms.to_vec();
    let rt2 = rt.clone();
    let gt2 = gt.clone();
    let r = SampledField::make(
        grid,
        move |t| t.powf(-mu) * sum_bumps(t, &rt).0,
        Some(&move |t: f64| {
            let (v, d) = sum_bumps(t, &rt2);
            -mu * t.powf(-mu - 1.0) * v + t.powf(-mu) * d
        }),
    )
    .expect("bump radial profile is finite");
    let gamma = SampledField::make(
        grid,
        move |t| t.powf(1.0 - 2.0 * mu) * sum_bumps(t, &gt).0,
        Some(&move |t: f64| {
            let (v, d) = sum_bumps(t, &gt2);
            (1.0 - 2.0 * mu) * t.powf(-2.0 * mu) * v + t.powf(1.0 - 2.0 * mu) * d
        }),
    )
    .expect("bump circulation profile is finite");
    FieldPair::new(r, gamma, PairKind::DomainX)
}
