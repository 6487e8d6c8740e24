//! Shared constructions for the integration suites.
//!
//! Random profiles are superpositions of Gaussian bumps in log θ, centered
//! at least six widths inside the grid so the boundary samples sit at
//! round-off and nothing here leans on the off-grid power-law continuation.
//! (The in-crate unit tests use the same family; integration tests cannot
//! see that module, so the construction is repeated here.)

// Each integration target compiles its own copy; not all of them use
// every helper.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spiralsheet::{FieldPair, Grid, PairKind, SampledField};

/// Bump centers stay this many widths away from the grid edges;
/// `exp(−6²) ≈ 2e-16`.
const EDGE_SIGMAS: f64 = 6.0;

/// Value and θ-derivative of `exp(−s²)` with `s = (lnθ − c)/w`.
pub fn log_gaussian(theta: f64, c: f64, w: f64) -> (f64, f64) {
    let s = (theta.ln() - c) / w;
    let v = (-s * s).exp();
    (v, v * (-2.0 * s) / (w * theta))
}

/// Superposition of bumps: `(value, d/dθ)` at `theta`.
pub fn sum_bumps(theta: f64, terms: &[(f64, f64, f64)]) -> (f64, f64) {
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
pub fn random_terms(rng: &mut ChaCha8Rng, grid: &Grid, n: usize) -> Vec<(f64, f64, f64)> {
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

/// A scalar field whose values are a bump superposition times `θ^p`,
/// with analytic derivatives.
pub fn bump_field(grid: &Arc<Grid>, power: f64, terms: &[(f64, f64, f64)]) -> SampledField {
    let t1 = terms.to_vec();
    let t2 = terms.to_vec();
    SampledField::make(
        grid,
        move |t| t.powf(power) * sum_bumps(t, &t1).0,
        Some(&move |t: f64| {
            let (v, d) = sum_bumps(t, &t2);
            power * t.powf(power - 1.0) * v + t.powf(power) * d
        }),
    )
    .expect("bump field is finite")
}

/// A random domain pair: weighted profiles `θ^μ r` and `θ^{2μ−1} γ` are
/// bump superpositions.
pub fn localized_domain_pair(grid: &Arc<Grid>, mu: f64, seed: u64) -> FieldPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_terms = random_terms(&mut rng, grid, 3);
    let g_terms = random_terms(&mut rng, grid, 3);
    let r = bump_field(grid, -mu, &r_terms);
    let gamma = bump_field(grid, 1.0 - 2.0 * mu, &g_terms);
    FieldPair::new(r, gamma, PairKind::DomainX)
}

/// A random image pair: weighted profiles `θ^{2μ} f` and `θ^{2μ−1} g` are
/// bump superpositions.
pub fn localized_image_pair(grid: &Arc<Grid>, mu: f64, seed: u64) -> FieldPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f_terms = random_terms(&mut rng, grid, 3);
    let g_terms = random_terms(&mut rng, grid, 3);
    let f = bump_field(grid, -2.0 * mu, &f_terms);
    let g = bump_field(grid, 1.0 - 2.0 * mu, &g_terms);
    FieldPair::new(f, g, PairKind::ImageY)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
