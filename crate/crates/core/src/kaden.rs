//! The algebraic base spiral and its local self-similarity identity.
//!
//! The similarity profiles are written as perturbations of the classical
//! algebraic spiral `r̃₀(θ) = θ^{-μ}`, `γ̃₀(θ) = −2π θ^{1−2μ}`, which solves
//! the *local* part of the self-similar evolution exactly: the residual
//!
//! ```text
//! μ r̃² + (1 − 2μ) (γ̃/γ̃′)(r̃ r̃′ − i r̃²) + γ̃/(2πi)
//! ```
//!
//! vanishes identically along it.  The whole one-parameter family
//! `r̃ = c₁ θ^{-μ}`, `γ̃ = c₂ θ^{1−2μ}` shares this property exactly when
//! `c₂ = −2π c₁²` — that is the scaling symmetry of the problem, and the
//! tests pin it.  What the full equation adds on top of this identity is the
//! mutual induction of the m symmetric sheet branches, which the solver
//! treats as a perturbation.

use num_complex::Complex64;

use crate::error::{Error, Result};

use std::f64::consts::PI;

/// Radial profile `θ^{-μ}` of the standard base spiral.
pub fn r0(theta: f64, mu: f64) -> f64 {
    theta.powf(-mu)
}

/// `d/dθ` of [`r0`].
pub fn r0_prime(theta: f64, mu: f64) -> f64 {
    -mu * theta.powf(-mu - 1.0)
}

/// Circulation profile `−2π θ^{1−2μ}` of the standard base spiral.
pub fn gamma0(theta: f64, mu: f64) -> f64 {
    -2.0 * PI * theta.powf(1.0 - 2.0 * mu)
}

/// `d/dθ` of [`gamma0`]; positive for `μ > 1/2`.
pub fn gamma0_prime(theta: f64, mu: f64) -> f64 {
    2.0 * PI * (2.0 * mu - 1.0) * theta.powf(-2.0 * mu)
}

/// A member of the scaled spiral family `r̃ = c₁ θ^{-μ}`, `γ̃ = c₂ θ^{1−2μ}`.
#[derive(Debug, Clone, Copy)]
pub struct SpiralFamily {
    pub mu: f64,
    pub c1: f64,
    pub c2: f64,
}

impl SpiralFamily {
    /// The standard spiral `c₁ = 1`, `c₂ = −2π`.
    pub fn standard(mu: f64) -> SpiralFamily {
        SpiralFamily {
            mu,
            c1: 1.0,
            c2: -2.0 * PI,
        }
    }

    /// An arbitrary member; the radial scale must be positive.
    pub fn family(mu: f64, c1: f64, c2: f64) -> Result<SpiralFamily> {
        if !(c1 > 0.0) || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "spiral family needs finite coefficients with c1 > 0, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(SpiralFamily { mu, c1, c2 })
    }

    pub fn r(&self, theta: f64) -> f64 {
        self.c1 * theta.powf(-self.mu)
    }

    pub fn r_prime(&self, theta: f64) -> f64 {
        -self.mu * self.c1 * theta.powf(-self.mu - 1.0)
    }

    pub fn gamma(&self, theta: f64) -> f64 {
        self.c2 * theta.powf(1.0 - 2.0 * self.mu)
    }

    pub fn gamma_prime(&self, theta: f64) -> f64 {
        (1.0 - 2.0 * self.mu) * self.c2 * theta.powf(-2.0 * self.mu)
    }

    /// Whether the member satisfies the local identity exactly.
    pub fn is_self_similar(&self) -> bool {
        (self.c2 + 2.0 * PI * self.c1 * self.c1).abs() <= 1e-12 * self.c1 * self.c1
    }
}

/// The local self-similarity residual at one angle, for full profiles
/// `(r̃, γ̃)` given with their derivatives.  A vanishing circulation
/// derivative makes the transport term undefined.
pub fn limiting_residual(
    theta: f64,
    r: f64,
    r_prime: f64,
    gamma: f64,
    gamma_prime: f64,
    mu: f64,
) -> Result<Complex64> {
    if gamma_prime == 0.0 {
        return Err(Error::SingularConfiguration { theta });
    }
    let transport = Complex64::new(r * r_prime, -r * r) * ((1.0 - 2.0 * mu) * gamma / gamma_prime);
    // γ̃/(2πi) = −i γ̃/(2π)
    let stretch = Complex64::new(0.0, -gamma / (2.0 * PI));
    Ok(Complex64::new(mu * r * r, 0.0) + transport + stretch)
}

/// [`limiting_residual`] evaluated along a family member.
pub fn family_residual(spiral: &SpiralFamily, theta: f64) -> Result<Complex64> {
    limiting_residual(
        theta,
        spiral.r(theta),
        spiral.r_prime(theta),
        spiral.gamma(theta),
        spiral.gamma_prime(theta),
        spiral.mu,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_profile_values() {
        // μ = 1: r̃₀(1) = 1, γ̃₀(1) = −2π; r̃₀(4) = 1/4, γ̃₀(4) = −π/2.
        assert_eq!(r0(1.0, 1.0), 1.0);
        assert_eq!(gamma0(1.0, 1.0), -2.0 * PI);
        assert!((r0(4.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((gamma0(4.0, 1.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_formulas_match_differencing() {
        let mu = 0.8;
        let th = 2.3;
        let h = 1e-6;
        let dr = (r0(th + h, mu) - r0(th - h, mu)) / (2.0 * h);
        assert!((dr - r0_prime(th, mu)).abs() < 1e-8);
        let dg = (gamma0(th + h, mu) - gamma0(th - h, mu)) / (2.0 * h);
        assert!((dg - gamma0_prime(th, mu)).abs() < 1e-7);
    }

    #[test]
    fn standard_spiral_kills_the_local_residual() {
        for &mu in &[0.6, 1.0, 1.7] {
            let s = SpiralFamily::standard(mu);
            for &th in &[0.01, 0.5, 1.0, 7.0, 300.0] {
                let res = family_residual(&s, th).unwrap();
                let scale = th.powf(1.0 - 2.0 * mu);
                assert!(
                    res.norm() <= 1e-13 * scale.max(th.powf(-2.0 * mu)),
                    "mu={mu} theta={th}: residual {res}"
                );
            }
        }
    }

    #[test]
    fn family_residual_vanishes_exactly_on_the_scaling_branch() {
        let mu = 1.2;
        for &c1 in &[0.3, 1.0, 2.5] {
            let good = SpiralFamily::family(mu, c1, -2.0 * PI * c1 * c1).unwrap();
            assert!(good.is_self_similar());
            let res = family_residual(&good, 3.0).unwrap();
            assert!(res.norm() < 1e-13, "c1={c1}: {res}");
            let bad = SpiralFamily::family(mu, c1, -2.0 * PI * c1 * c1 * 1.05).unwrap();
            assert!(!bad.is_self_similar());
            let res = family_residual(&bad, 3.0).unwrap();
            // For any member the real part cancels identically and the
            // imaginary part is −θ^{1−2μ}(c₁² + c₂/2π); off the branch that
            // is exactly 5% of c₁² here.
            let expected = 3.0_f64.powf(1.0 - 2.0 * mu) * 0.05 * c1 * c1;
            assert!(res.re.abs() < 1e-14 * c1 * c1, "c1={c1}: re {res}");
            assert!(
                (res.norm() - expected).abs() < 1e-10 * expected,
                "off-branch residual should be {expected}, got {}",
                res.norm()
            );
        }
    }

    #[test]
    fn flat_circulation_is_singular() {
        let err = limiting_residual(1.0, 1.0, -1.0, -6.0, 0.0, 1.0).unwrap_err();
        match err {
            Error::SingularConfiguration { theta } => assert_eq!(theta, 1.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn family_rejects_nonpositive_scale() {
        assert!(SpiralFamily::family(1.0, 0.0, -1.0).is_err());
        assert!(SpiralFamily::family(1.0, -1.0, -1.0).is_err());
        assert!(SpiralFamily::family(1.0, f64::NAN, -1.0).is_err());
    }
}
