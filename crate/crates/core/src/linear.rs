//! The linearized evolution operator and its explicit inverse.
//!
//! Linearizing the local self-similarity residual around the base spiral
//! gives a first-order operator acting on perturbation pairs `(r, γ)`.  In
//! the weighted variables it reads
//!
//! ```text
//! θ^{2μ} f = θ (θ^μ r)′ + (μ / 2π(2μ−1)) θ (θ^{2μ−1} γ)′
//! θ^{2μ−1} g = −2 θ^μ r + θ^{2μ} γ′ / 2π(2μ−1)
//! ```
//!
//! Its inverse is built from two one-dimensional integral operators on the
//! half-line,
//!
//! ```text
//! 𝓐[F](θ) = ∫_θ^∞ F(t)/t dt        𝓑[G](θ) = θ^{-1} ∫_0^θ G(t) dt
//! ```
//!
//! both of which become plain cumulative integrals on the logarithmic grid.
//! The inverse map and *all* of its derivative arrays are closed-form in
//! `𝓐`, `𝓑` and the inputs — no numerical differentiation enters, which is
//! what keeps repeated applications inside the fixed-point iteration from
//! accumulating differencing noise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::pair::{FieldPair, PairKind};
use crate::params::Params;
use crate::quad::segment_integrals;

/// Relative size under which a boundary sample counts as numerically zero
/// when deciding whether a continuation error is real or noise.
const MATERIAL: f64 = 1e-12;

/// Exponent slack around the critical decay/boundedness rates.
const EXPONENT_SLACK: f64 = 0.01;

/// Apply the linearized operator to a domain pair, producing an image pair.
///
/// The image value arrays are exact in the inputs' values and derivatives;
/// the image *derivative* arrays come from fourth-order differencing, since
/// they would need second derivatives of the inputs.  Those arrays only feed
/// norm estimation and quadrature corrections downstream.
pub fn apply_l(pair: &FieldPair, params: &Params) -> Result<FieldPair> {
    pair.expect_kind(PairKind::DomainX)?;
    let grid = pair.grid().clone();
    let mu = params.mu;
    let two_pi_fac = 2.0 * PI * (2.0 * mu - 1.0);
    let n = grid.len();
    let r = &pair.first;
    let gamma = &pair.second;
    let mut f_vals = Vec::with_capacity(n);
    let mut g_vals = Vec::with_capacity(n);
    for i in 0..n {
        let th = grid.nodes[i];
        let rv = r.values()[i];
        let rp = r.derivs()[i];
        let gv = gamma.values()[i];
        let gp = gamma.derivs()[i];
        // θ^{2μ} f = μ θ^μ r + θ^{μ+1} r′ + (μ/2π(2μ−1)) ((2μ−1) θ^{2μ−1} γ + θ^{2μ} γ′)
        let f = mu * th.powf(-mu) * rv
            + th.powf(1.0 - mu) * rp
            + mu / (2.0 * PI) * gv / th
            + mu / two_pi_fac * gp;
        // θ^{2μ−1} g = −2 θ^μ r + θ^{2μ} γ′ / 2π(2μ−1)
        let g = -2.0 * th.powf(1.0 - mu) * rv + th * gp / two_pi_fac;
        f_vals.push(f);
        g_vals.push(g);
    }
    Ok(FieldPair::new(
        SampledField::from_values(grid.clone(), f_vals)?,
        SampledField::from_values(grid, g_vals)?,
        PairKind::ImageY,
    ))
}

/// `𝓐[F](θ) = ∫_θ^∞ F(t)/t dt`, evaluated at every node.
///
/// In `x = ln t` this is the suffix integral of the node values themselves.
/// The piece beyond the grid uses the fitted tail power law; a tail that
/// does not decay (exponent ≥ 0 up to slack) with a material boundary value
/// is not integrable and is rejected.
pub fn op_a(field: &SampledField) -> Result<SampledField> {
    let grid = field.grid().clone();
    let n = grid.len();
    let max_abs = field.values().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let tail = field.tail_model();
    let material = field.values()[n - 1].abs() > MATERIAL * max_abs;
    let tail_int = if material || tail.coeff != 0.0 {
        if tail.exponent > -EXPONENT_SLACK {
            if material {
                return Err(Error::NonIntegrableTail {
                    exponent: tail.exponent,
                    coeff: tail.coeff,
                });
            }
            0.0
        } else {
            // ∫_{θmax}^∞ c t^{p−1} dt = −c θmax^p / p
            -tail.coeff * grid.spec.theta_max.powf(tail.exponent) / tail.exponent
        }
    } else {
        0.0
    };
    // d/dx of F(e^x) is θ F′(θ).
    let dfdx: Vec<f64> = (0..n).map(|i| grid.nodes[i] * field.derivs()[i]).collect();
    let segs = segment_integrals(&grid.log_nodes, field.values(), &dfdx);
    let mut values = vec![0.0; n];
    values[n - 1] = tail_int;
    for i in (0..n - 1).rev() {
        values[i] = values[i + 1] + segs[i];
    }
    let derivs: Vec<f64> = (0..n)
        .map(|i| -field.values()[i] / grid.nodes[i])
        .collect();
    SampledField::from_parts(grid, values, derivs)
}

/// `𝓑[G](θ) = θ^{-1} ∫_0^θ G(t) dt`, evaluated at every node.
///
/// In `x = ln t` the inner integral is the prefix integral of `t G(t)`.  The
/// piece below the grid uses the fitted head power law; a head that blows up
/// (exponent < 0 up to slack) with a material boundary value makes the
/// average unbounded at the center and is rejected.
pub fn op_b(field: &SampledField) -> Result<SampledField> {
    let grid = field.grid().clone();
    let n = grid.len();
    let max_abs = field.values().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let head = field.head_model();
    let material = field.values()[0].abs() > MATERIAL * max_abs;
    let head_int = if material || head.coeff != 0.0 {
        if head.exponent < -EXPONENT_SLACK {
            if material {
                return Err(Error::UnboundedHead {
                    exponent: head.exponent,
                    coeff: head.coeff,
                });
            }
            0.0
        } else {
            // ∫_0^{θmin} c t^p dt = c θmin^{p+1} / (p+1)
            head.coeff * grid.spec.theta_min.powf(head.exponent + 1.0) / (head.exponent + 1.0)
        }
    } else {
        0.0
    };
    // Integrand in x: t G(t); its x-derivative is t (G + t G′).
    let y: Vec<f64> = (0..n).map(|i| grid.nodes[i] * field.values()[i]).collect();
    let dydx: Vec<f64> = (0..n)
        .map(|i| grid.nodes[i] * (field.values()[i] + grid.nodes[i] * field.derivs()[i]))
        .collect();
    let segs = segment_integrals(&grid.log_nodes, &y, &dydx);
    let mut inner = head_int;
    let mut values = Vec::with_capacity(n);
    values.push(inner / grid.nodes[0]);
    for i in 0..n - 1 {
        inner += segs[i];
        values.push(inner / grid.nodes[i + 1]);
    }
    // (θ B)′ = G  ⟹  B′ = (G − B)/θ
    let derivs: Vec<f64> = (0..n)
        .map(|i| (field.values()[i] - values[i]) / grid.nodes[i])
        .collect();
    SampledField::from_parts(grid, values, derivs)
}

/// Apply the inverse of the linearized operator to an image pair.
///
/// With `F = θ^{2μ} f`, `G = θ^{2μ−1} g`, `A = 𝓐[F]`:
///
/// ```text
/// γ  = 2π(2μ−1) θ^{1−2μ} (−2 𝓑[A] + 𝓑[G])
/// γ′ = 2π(2μ−1) θ^{−2μ} (4μ 𝓑[A] − 2μ 𝓑[G] − 2A + G)
/// r  = −(μ/2π(2μ−1)) θ^{μ−1} γ − θ^{−μ} A
/// r′ = −(μ(μ−1)/2π(2μ−1)) θ^{μ−2} γ − (μ/2π(2μ−1)) θ^{μ−1} γ′ + μ θ^{−μ−1} A + θ^{μ−1} f
/// ```
///
/// all of which are closed-form, so the output derivative arrays are exact.
pub fn apply_m(pair: &FieldPair, params: &Params) -> Result<FieldPair> {
    pair.expect_kind(PairKind::ImageY)?;
    let grid = pair.grid().clone();
    let mu = params.mu;
    let two_pi_fac = 2.0 * PI * (2.0 * mu - 1.0);
    let n = grid.len();
    let f_upper = pair.first.weighted(2.0 * mu);
    let g_upper = pair.second.weighted(2.0 * mu - 1.0);
    let a = op_a(&f_upper)?;
    let ba = op_b(&a)?;
    let bg = op_b(&g_upper)?;

    let mut gamma_vals = Vec::with_capacity(n);
    let mut gamma_derivs = Vec::with_capacity(n);
    for i in 0..n {
        let th = grid.nodes[i];
        let combo = -2.0 * ba.values()[i] + bg.values()[i];
        gamma_vals.push(two_pi_fac * th.powf(1.0 - 2.0 * mu) * combo);
        let slope = 4.0 * mu * ba.values()[i] - 2.0 * mu * bg.values()[i] - 2.0 * a.values()[i]
            + g_upper.values()[i];
        gamma_derivs.push(two_pi_fac * th.powf(-2.0 * mu) * slope);
    }
    let mut r_vals = Vec::with_capacity(n);
    let mut r_derivs = Vec::with_capacity(n);
    for i in 0..n {
        let th = grid.nodes[i];
        r_vals.push(-mu / two_pi_fac * th.powf(mu - 1.0) * gamma_vals[i] - th.powf(-mu) * a.values()[i]);
        r_derivs.push(
            -mu * (mu - 1.0) / two_pi_fac * th.powf(mu - 2.0) * gamma_vals[i]
                - mu / two_pi_fac * th.powf(mu - 1.0) * gamma_derivs[i]
                + mu * th.powf(-mu - 1.0) * a.values()[i]
                + th.powf(mu - 1.0) * pair.first.values()[i],
        );
    }
    Ok(FieldPair::new(
        SampledField::from_parts(grid.clone(), r_vals, r_derivs)?,
        SampledField::from_parts(grid, gamma_vals, gamma_derivs)?,
        PairKind::DomainX,
    ))
}
