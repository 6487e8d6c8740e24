//! Weighted Hölder norms on the half-line.
//!
//! Profiles are measured in spaces built from the bracket weight
//! `⟨θ⟩ = (1 + θ²)^{1/2}`: the class-`k` norm is
//!
//! ```text
//! ‖f‖_k = sup ⟨θ⟩^α |f(θ)|
//!       + sup_{0 < θ₂ < θ₁ < θ₂+1} ⟨θ₁⟩^{k+α} |f(θ₁) − f(θ₂)| / (θ₁ − θ₂)^α
//! ```
//!
//! On a sampled field the supremum part is the max over nodes, and the
//! Hölder seminorm is estimated two ways and the larger kept:
//!
//! * a derivative surrogate `⟨θ⟩^{k+2α−1} θ^{1−α} |f′(θ)|`, which reproduces
//!   the seminorm of a C¹ function — pair separations of order `min(1, θ)`
//!   dominate the supremum, and the surrogate interpolates both regimes;
//! * adjacent-node difference quotients `⟨θ_{i+1}⟩^{k+α} |Δf| / Δθ^α` for
//!   `Δθ < 1`, which catch grid-scale roughness the derivative array cannot.
//!
//! The domain norm measures perturbation pairs `(r, γ)` through the weighted
//! profiles `θ^μ r`, `θ^{μ+1} r′`, `θ^{2μ−1} γ`, `θ^{2μ} γ′`; the image norm
//! measures operator outputs `(f, g)` through `θ^{2μ} f` and `θ^{2μ−1} g`.

use crate::error::Result;
use crate::field::SampledField;
use crate::pair::{FieldPair, PairKind};
use crate::params::Params;

/// The bracket weight `⟨θ⟩ = (1 + θ²)^{1/2}`.
pub fn angle_bracket(theta: f64) -> f64 {
    theta.hypot(1.0)
}

/// Discrete class-`k` weighted Hölder norm of a sampled field.
pub fn norm_gk(field: &SampledField, k: u32, alpha: f64) -> f64 {
    let grid = field.grid();
    let values = field.values();
    let derivs = field.derivs();
    let kf = k as f64;

    let mut sup_part = 0.0_f64;
    let mut seminorm = 0.0_f64;
    for i in 0..grid.len() {
        let th = grid.nodes[i];
        let br = angle_bracket(th);
        sup_part = sup_part.max(br.powf(alpha) * values[i].abs());
        seminorm = seminorm.max(br.powf(kf + 2.0 * alpha - 1.0) * th.powf(1.0 - alpha) * derivs[i].abs());
    }
    for i in 0..grid.len() - 1 {
        let dt = grid.nodes[i + 1] - grid.nodes[i];
        if dt >= 1.0 {
            continue;
        }
        let q = angle_bracket(grid.nodes[i + 1]).powf(kf + alpha) * (values[i + 1] - values[i]).abs()
            / dt.powf(alpha);
        seminorm = seminorm.max(q);
    }
    sup_part + seminorm
}

/// Domain norm of a perturbation pair `(r, γ)`.
pub fn norm_x(pair: &FieldPair, params: &Params) -> Result<f64> {
    pair.expect_kind(PairKind::DomainX)?;
    let mu = params.mu;
    let a = params.alpha;
    let r = &pair.first;
    let gamma = &pair.second;
    let total = norm_gk(&r.weighted(mu), 1, a)
        + norm_gk(&r.deriv_field().weighted(mu + 1.0), 0, a)
        + norm_gk(&gamma.weighted(2.0 * mu - 1.0), 1, a)
        + norm_gk(&gamma.deriv_field().weighted(2.0 * mu), 1, a);
    Ok(total)
}

/// Image norm of an operator-output pair `(f, g)`.
pub fn norm_y(pair: &FieldPair, params: &Params) -> Result<f64> {
    pair.expect_kind(PairKind::ImageY)?;
    let mu = params.mu;
    let a = params.alpha;
    let f = &pair.first;
    let g = &pair.second;
    let total = norm_gk(&f.weighted(2.0 * mu), 0, a) + norm_gk(&g.weighted(2.0 * mu - 1.0), 1, a);
    Ok(total)
}
