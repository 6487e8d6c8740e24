//! Self-similar rotationally symmetric vortex-sheet spirals for the 2-D
//! incompressible Euler equations.
//!
//! The library constructs, for a symmetry order `m` and similarity exponent
//! `μ > 1/2`, a profile `(r̃, γ̃)` describing an m-branch algebraic spiral
//! sheet whose self-similar evolution solves the Euler equations: `r̃(θ)` is
//! the radius of the curve at winding angle θ and `γ̃(θ)` the circulation
//! parameter along it.  The profile is found as a perturbation of the
//! classical single-branch algebraic spiral by a fixed-point iteration that
//! alternates a local (per-angle) inversion with the evaluation of the
//! branch-interaction integral.
//!
//! Module layout, bottom up:
//!
//! - [`params`], [`grid`], [`field`], [`pair`]: configuration, the log-
//!   uniform angular grid, sampled scalar profiles with power-law
//!   continuations, and (radius, circulation) / (real, imaginary) pairs.
//! - [`norms`]: the weighted Hölder-type norms the contraction is measured
//!   in.
//! - [`quad`]: Gauss–Legendre panels, adaptive quadrature, and an
//!   oscillatory (Filon-type) rule with spherical Bessel moments.
//! - [`kaden`]: the base algebraic spiral family and the pointwise residual
//!   of the governing equation.
//! - [`linear`] / [`nonlinear`]: the local part of the equation around the
//!   base spiral, its closed-form inverse, and the full local operator with
//!   its small-ball inversion.
//! - [`singular`]: the branch-interaction operator — modal integrals with
//!   damped sweep recurrences and the slow brute-force principal-value
//!   oracle used to cross-check it.
//! - [`solver`]: the outer fixed point combining the pieces, with
//!   convergence diagnostics.
//! - [`geometry`]: the reconstructed spiral curve, its time evolution and
//!   asymptotic constants, and CSV/SVG/JSON export.
//! - [`velocity`]: the induced velocity field, near-center and scaling
//!   diagnostics, circulation, and the weak-form residual of the Euler
//!   equations.

pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod kaden;
pub mod linear;
pub mod nonlinear;
pub mod norms;
pub mod pair;
pub mod params;
pub mod quad;
pub mod singular;
pub mod solver;
#[cfg(test)]
pub(crate) mod testutil;
pub mod velocity;

pub use error::{Error, Result};
pub use field::{PowerLaw, SampledField};
pub use geometry::{Asymptotics, ExportFormat, SpiralSolution};
pub use grid::Grid;
pub use kaden::SpiralFamily;
pub use nonlinear::InversionReport;
pub use pair::{FieldPair, PairKind};
pub use params::{GridSpec, Params};
pub use singular::InteractionSum;
pub use solver::{solve, SolveReport};
pub use velocity::{VelocityField, VelocitySample};
