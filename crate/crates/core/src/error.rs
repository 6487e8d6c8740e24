//! Error types shared by every layer of the library.
//!
//! The numerical operators distinguish *domain* failures (a caller handed us a
//! point or a pair the mathematics does not cover) from *state* failures (an
//! iteration left its contraction ball, a quadrature refused to settle).  The
//! command-line layer maps [`Error::ContractionFailure`] to its own exit code,
//! so that variant carries the full step history for post-mortems.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A sampled closure produced NaN/Inf while building a field.
    #[error("non-finite sample at theta = {theta:.6e} while constructing a field")]
    NonFiniteSample { theta: f64 },

    /// An evaluation or construction argument lies outside the admissible set.
    #[error("domain error: {what} = {value:.6e} is outside the admissible range")]
    Domain { what: &'static str, value: f64 },

    /// A pair tagged for one space was passed where the other was required.
    #[error("field pair kind mismatch: expected {expected}, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// Parameter validation failure (CLI maps this to a usage error).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The fitted tail of an integrand does not decay, so the semi-infinite
    /// integral in the A-operator has no value.
    #[error("non-integrable tail: fitted exponent {exponent:.3} (need < 0) with coefficient {coeff:.3e}")]
    NonIntegrableTail { exponent: f64, coeff: f64 },

    /// The fitted head of an integrand is unbounded at 0, so the averaging
    /// B-operator has no value.
    #[error("unbounded head: fitted exponent {exponent:.3} (need >= 0) with coefficient {coeff:.3e}")]
    UnboundedHead { exponent: f64, coeff: f64 },

    /// The circulation-derivative denominator dropped below its safe floor,
    /// i.e. the input left the ball where the nonlinear operator is defined.
    #[error("input outside the operator ball: {what} = {value:.6e} at theta = {theta:.6e} (floor {floor:.6e})")]
    OutOfBall {
        what: &'static str,
        value: f64,
        theta: f64,
        floor: f64,
    },

    /// The perturbed radius 1 + theta^mu r crossed zero: the sheet geometry
    /// degenerated and the curve is no longer a graph over the angle.
    #[error("degenerate sheet geometry: 1 + theta^mu r = {value:.6e} at theta = {theta:.6e}")]
    GeometryDegenerate { value: f64, theta: f64 },

    /// gamma'(theta) vanished where a formula divides by it.
    #[error("singular configuration: gamma'({theta:.6e}) = 0")]
    SingularConfiguration { theta: f64 },

    /// A series term with mu*n - 2*mu <= -1 diverges at the lower endpoint.
    #[error("divergent series term: n = {n} violates mu*n - 2*mu > -1 for mu = {mu}")]
    DivergentTerm { n: u32, mu: f64 },

    /// Adaptive quadrature exhausted its budget before reaching the tolerance.
    #[error("quadrature accuracy not reached: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureAccuracy { achieved: f64, requested: f64 },

    /// A principal-value window refinement failed to stabilize.
    #[error("principal value did not stabilize: last change {last_change:.3e}, tolerance {tol:.3e}")]
    PvNonStabilization { last_change: f64, tol: f64 },

    /// A fixed-point iteration produced growing steps; the history of step
    /// norms is kept so callers can report how the divergence looked.
    #[error("{context} iteration diverged after {} steps (last steps: {:?})",
            history.len(), &history[history.len().saturating_sub(3)..])]
    ContractionFailure {
        context: &'static str,
        history: Vec<f64>,
    },

    /// A fixed-point iteration ran out of its iteration budget while still
    /// making (non-divergent) progress.
    #[error("{context} iteration did not converge in {iterations} steps (last step {last_step:.3e})")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
        last_step: f64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
