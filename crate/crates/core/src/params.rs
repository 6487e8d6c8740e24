//! Run parameters and grid description.
//!
//! [`Params`] gathers everything a solve needs: the similarity exponent μ, the
//! Hölder exponent α used by the weighted norms, the fold count m, the log
//! grid, and the tolerance/budget knobs of the nested fixed-point iterations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Description of the logarithmic angle grid on which profiles are sampled.
///
/// Nodes are strictly increasing and log-uniform on `[theta_min, theta_max]`.
/// The two exponents seed the power-law continuations used when a field has
/// to be evaluated outside the grid and its own least-squares fit is
/// degenerate (all-zero or sign-changing samples in the fitting window).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_nodes: usize,
    /// Fallback continuation exponent for `theta < theta_min`.
    pub head_exponent: f64,
    /// Fallback continuation exponent for `theta > theta_max`.
    pub tail_exponent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        // Profiles are power laws in theta, so resolution should be uniform
        // per decade; eight decades around theta = 1 cover both the spiral
        // center (theta -> infinity) and the sheet tip (theta -> 0).
        GridSpec {
            theta_min: 1e-4,
            theta_max: 1e4,
            n_nodes: 2048,
            head_exponent: 0.0,
            tail_exponent: -1.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_min > 0.0) {
            return Err(Error::InvalidParams(format!(
                "grid.theta_min must be positive, got {}",
                self.theta_min
            )));
        }
        if !(self.theta_max > self.theta_min) {
            return Err(Error::InvalidParams(format!(
                "grid.theta_max must exceed theta_min, got {} <= {}",
                self.theta_max, self.theta_min
            )));
        }
        if self.n_nodes < 16 {
            return Err(Error::InvalidParams(format!(
                "grid.n_nodes must be at least 16, got {}",
                self.n_nodes
            )));
        }
        if !self.theta_min.is_finite()
            || !self.theta_max.is_finite()
            || !self.head_exponent.is_finite()
            || !self.tail_exponent.is_finite()
        {
            return Err(Error::InvalidParams(
                "grid bounds and exponents must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Full parameter set of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Similarity exponent μ > 1/2 of the algebraic spiral r ~ θ^{-μ}.
    pub mu: f64,
    /// Hölder exponent α ∈ (0,1) of the weighted norms.
    pub alpha: f64,
    /// Fold count m ≥ 2 of the rotational symmetry.
    pub m: u32,
    pub grid: GridSpec,
    /// Maximum number of series terms summed by the Cauchy-integral operator.
    pub series_cap: usize,
    /// Inner (operator-inversion) fixed-point tolerance on the X-norm of
    /// successive iterate steps.
    pub tol_inner: f64,
    /// Outer (Picard) fixed-point tolerance on the X-norm of steps.
    pub tol_outer: f64,
    /// Relative tolerance of quadratures and of the series tail estimate.
    pub tol_quad: f64,
    pub max_iter_inner: usize,
    pub max_iter_outer: usize,
    /// Trust-ball radius guarding the nonlinear inversion: inner iterates
    /// whose domain norm exceeds this are rejected instead of iterated on.
    /// The structural limit is the circulation-density floor (the inversion
    /// degenerates when `θ^{2μ}γ′` reaches `2π(2μ−1)`); the default stays a
    /// safe factor under it while admitting the moderate-m solutions, whose
    /// domain norms reach ~1.5 at m = 16.
    pub ball_radius: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            mu: 1.0,
            alpha: 0.5,
            m: 32,
            grid: GridSpec::default(),
            series_cap: 48,
            tol_inner: 1e-10,
            tol_outer: 1e-9,
            tol_quad: 1e-9,
            max_iter_inner: 60,
            max_iter_outer: 40,
            ball_radius: 3.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.5) {
            return Err(Error::InvalidParams(format!(
                "mu must exceed 1/2, got {}",
                self.mu
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.m < 2 {
            return Err(Error::InvalidParams(format!(
                "m must be at least 2, got {}",
                self.m
            )));
        }
        for (name, value) in [
            ("tol_inner", self.tol_inner),
            ("tol_outer", self.tol_outer),
            ("tol_quad", self.tol_quad),
            ("ball_radius", self.ball_radius),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.series_cap < 1 || self.max_iter_inner < 1 || self.max_iter_outer < 1 {
            return Err(Error::InvalidParams(
                "series_cap and iteration caps must be at least 1".into(),
            ));
        }
        self.grid.validate()
    }

    /// Builder-style override of the fold count, used by m-sweep diagnostics.
    pub fn with_m(mut self, m: u32) -> Self {
        self.m = m;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_validate() {
        Params::default().validate().expect("defaults must be valid");
    }

    #[test]
    fn rejects_out_of_range() {
        let mut p = Params::default();
        p.mu = 0.5;
        assert!(p.validate().is_err(), "mu = 1/2 is excluded");

        let mut p = Params::default();
        p.alpha = 1.0;
        assert!(p.validate().is_err(), "alpha = 1 is excluded");

        let mut p = Params::default();
        p.m = 1;
        assert!(p.validate().is_err(), "m = 1 is excluded");

        let mut p = Params::default();
        p.grid.n_nodes = 8;
        assert!(p.validate().is_err(), "tiny grids are rejected");

        let mut p = Params::default();
        p.grid.theta_min = -1.0;
        assert!(p.validate().is_err(), "negative grid bound rejected");
    }
}
