//! Sampled scalar fields on the logarithmic grid.
//!
//! A [`SampledField`] stores node values *and* node derivatives in θ.  The
//! derivative array is first-class data: the nonlinear and linearized
//! operators consume r′ and γ′ directly, and re-differencing sampled values a
//! second time would throw away accuracy exactly where the weighted norms
//! penalize it most.  Off the grid a field continues as a fitted power law
//! `c·θ^p` on either side — the semi-infinite integrals of the inversion
//! operator and the series terms both need usable tails.
//!
//! Interpolation is monotone-limited cubic Hermite in `x = ln θ`: node slopes
//! come from the stored derivatives (`dv/dx = θ·v′`) and are clamped per cell
//! by the Fritsch–Carlson criterion, so monotone data interpolates
//! monotonically while smooth data keeps its full fourth-order accuracy away
//! from extrema.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// One-sided power-law continuation `theta -> coeff * theta^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub const ZERO: PowerLaw = PowerLaw {
        coeff: 0.0,
        exponent: 0.0,
    };

    pub fn eval(&self, theta: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * theta.powf(self.exponent)
        }
    }

    pub fn eval_deriv(&self, theta: f64) -> f64 {
        if self.coeff == 0.0 || self.exponent == 0.0 {
            0.0
        } else {
            self.coeff * self.exponent * theta.powf(self.exponent - 1.0)
        }
    }

    /// Continuation of `theta^s * f`.
    fn weighted(&self, s: f64) -> PowerLaw {
        PowerLaw {
            coeff: self.coeff,
            exponent: self.exponent + s,
        }
    }

    /// Continuation of `f'` (derivative of the power law).
    fn deriv(&self) -> PowerLaw {
        PowerLaw {
            coeff: self.coeff * self.exponent,
            exponent: self.exponent - 1.0,
        }
    }
}

/// A scalar profile sampled on the shared log grid.
#[derive(Debug, Clone)]
pub struct SampledField {
    grid: Arc<Grid>,
    /// Node values `v(theta_i)`.
    values: Vec<f64>,
    /// Node derivatives `v'(theta_i)` (with respect to θ, not ln θ).
    derivs: Vec<f64>,
    /// `d(v')/dx` at nodes, used to interpolate the derivative array itself.
    deriv_slopes: Vec<f64>,
    /// Power-law continuation for `theta < theta_min`.
    head: PowerLaw,
    /// Power-law continuation for `theta > theta_max`.
    tail: PowerLaw,
}

/// Floor below which a fitting window counts as identically zero.
const FIT_ZERO_FLOOR: f64 = 1e-300;

impl SampledField {
    /// Sample a closure on the grid.  Derivatives come from `deriv` when
    /// supplied, otherwise from fourth-order central differences in `ln θ`.
    pub fn make<F>(grid: &Arc<Grid>, f: F, deriv: Option<&dyn Fn(f64) -> f64>) -> Result<SampledField>
    where
        F: Fn(f64) -> f64,
    {
        let mut values = Vec::with_capacity(grid.len());
        for &theta in &grid.nodes {
            let v = f(theta);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { theta });
            }
            values.push(v);
        }
        match deriv {
            Some(df) => {
                let mut derivs = Vec::with_capacity(grid.len());
                for &theta in &grid.nodes {
                    let d = df(theta);
                    if !d.is_finite() {
                        return Err(Error::NonFiniteSample { theta });
                    }
                    derivs.push(d);
                }
                SampledField::from_parts(grid.clone(), values, derivs)
            }
            None => SampledField::from_values(grid.clone(), values),
        }
    }

    /// Build from a value array, differencing for the derivatives.
    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<SampledField> {
        let slopes = fd4_log_slopes(&values, grid.log_step);
        let derivs: Vec<f64> = slopes
            .iter()
            .zip(&grid.nodes)
            .map(|(s, th)| s / th)
            .collect();
        SampledField::from_parts(grid, values, derivs)
    }

    /// Build from explicit value and derivative arrays (the preferred path:
    /// every operator that knows its output's derivative in closed form uses
    /// this constructor).
    pub fn from_parts(grid: Arc<Grid>, values: Vec<f64>, derivs: Vec<f64>) -> Result<SampledField> {
        assert_eq!(values.len(), grid.len(), "value array must match the grid");
        assert_eq!(derivs.len(), grid.len(), "derivative array must match the grid");
        for (i, (&v, &d)) in values.iter().zip(&derivs).enumerate() {
            if !v.is_finite() || !d.is_finite() {
                return Err(Error::NonFiniteSample {
                    theta: grid.nodes[i],
                });
            }
        }
        let deriv_slopes = fd4_log_slopes(&derivs, grid.log_step);
        let head = fit_power_law(&grid, &values, Side::Head);
        let tail = fit_power_law(&grid, &values, Side::Tail);
        Ok(SampledField {
            grid,
            values,
            derivs,
            deriv_slopes,
            head,
            tail,
        })
    }

    /// The all-zero field.
    pub fn zero(grid: Arc<Grid>) -> SampledField {
        let n = grid.len();
        SampledField {
            grid,
            values: vec![0.0; n],
            derivs: vec![0.0; n],
            deriv_slopes: vec![0.0; n],
            head: PowerLaw::ZERO,
            tail: PowerLaw::ZERO,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn head_model(&self) -> PowerLaw {
        self.head
    }

    pub fn tail_model(&self) -> PowerLaw {
        self.tail
    }

    /// Evaluate at any positive angle: Hermite in `ln θ` on the grid,
    /// power-law continuation off it.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        if theta < self.grid.spec.theta_min {
            return Ok(self.head.eval(theta));
        }
        if theta > self.grid.spec.theta_max {
            return Ok(self.tail.eval(theta));
        }
        let i = self.grid.cell_of(theta);
        let th0 = self.grid.nodes[i];
        let th1 = self.grid.nodes[i + 1];
        Ok(hermite_monotone(
            theta.ln(),
            self.grid.log_nodes[i],
            self.grid.log_step,
            self.values[i],
            self.values[i + 1],
            th0 * self.derivs[i],
            th1 * self.derivs[i + 1],
        ))
    }

    /// Evaluate the θ-derivative: the stored derivative array interpolated on
    /// the grid, the differentiated power law off it.
    pub fn eval_deriv(&self, theta: f64) -> Result<f64> {
        self.check_domain(theta)?;
        if theta < self.grid.spec.theta_min {
            return Ok(self.head.eval_deriv(theta));
        }
        if theta > self.grid.spec.theta_max {
            return Ok(self.tail.eval_deriv(theta));
        }
        let i = self.grid.cell_of(theta);
        Ok(hermite_monotone(
            theta.ln(),
            self.grid.log_nodes[i],
            self.grid.log_step,
            self.derivs[i],
            self.derivs[i + 1],
            self.deriv_slopes[i],
            self.deriv_slopes[i + 1],
        ))
    }

    fn check_domain(&self, theta: f64) -> Result<()> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
            });
        }
        Ok(())
    }

    /// The field `θ^s · f`, with exact derivative and continuation shifts.
    pub fn weighted(&self, s: f64) -> SampledField {
        if s == 0.0 {
            return self.clone();
        }
        let n = self.grid.len();
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for i in 0..n {
            let th = self.grid.nodes[i];
            let w = th.powf(s);
            values.push(w * self.values[i]);
            // (θ^s v)' = s θ^{s-1} v + θ^s v'
            derivs.push(w * (s * self.values[i] / th + self.derivs[i]));
        }
        let deriv_slopes = fd4_log_slopes(&derivs, self.grid.log_step);
        SampledField {
            grid: self.grid.clone(),
            values,
            derivs,
            deriv_slopes,
            head: self.head.weighted(s),
            tail: self.tail.weighted(s),
        }
    }

    /// The derivative profile `f′` as a field of its own (values are this
    /// field's derivative array; its derivative array is differenced).
    pub fn deriv_field(&self) -> SampledField {
        let n = self.grid.len();
        let second: Vec<f64> = (0..n)
            .map(|i| self.deriv_slopes[i] / self.grid.nodes[i])
            .collect();
        let deriv_slopes = fd4_log_slopes(&second, self.grid.log_step);
        SampledField {
            grid: self.grid.clone(),
            values: self.derivs.clone(),
            derivs: second,
            deriv_slopes,
            head: self.head.deriv(),
            tail: self.tail.deriv(),
        }
    }

    /// `c · f` (models scale exactly).
    pub fn scale(&self, c: f64) -> SampledField {
        SampledField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            derivs: self.derivs.iter().map(|v| c * v).collect(),
            deriv_slopes: self.deriv_slopes.iter().map(|v| c * v).collect(),
            head: PowerLaw {
                coeff: c * self.head.coeff,
                exponent: self.head.exponent,
            },
            tail: PowerLaw {
                coeff: c * self.tail.coeff,
                exponent: self.tail.exponent,
            },
        }
    }

    /// `self + c · other`.  The sum of two power laws is generally not one,
    /// so the continuations are refitted from the combined samples.
    pub fn add_scaled(&self, other: &SampledField, c: f64) -> Result<SampledField> {
        assert!(
            Arc::ptr_eq(&self.grid, &other.grid),
            "fields must share a grid to combine"
        );
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        let derivs: Vec<f64> = self
            .derivs
            .iter()
            .zip(&other.derivs)
            .map(|(a, b)| a + c * b)
            .collect();
        SampledField::from_parts(self.grid.clone(), values, derivs)
    }
}

/// Fourth-order finite-difference slopes `dv/dx` on the uniform log grid,
/// with one-sided stencils of the same order at the boundaries.
fn fd4_log_slopes(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut s = vec![0.0; n];
    debug_assert!(n >= 5, "grids have at least 16 nodes");
    for i in 2..n - 2 {
        s[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
    }
    s[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
    s[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
    s[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5])
        / (12.0 * h);
    s[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4]
        + 3.0 * v[n - 5])
        / (12.0 * h);
    s
}

/// Cubic Hermite evaluation in `x` with per-cell Fritsch–Carlson slope
/// limiting.  `m0`, `m1` are slopes with respect to `x`.
fn hermite_monotone(x: f64, x0: f64, h: f64, y0: f64, y1: f64, mut m0: f64, mut m1: f64) -> f64 {
    let delta = (y1 - y0) / h;
    if delta == 0.0 {
        m0 = 0.0;
        m1 = 0.0;
    } else {
        let a = m0 / delta;
        let b = m1 / delta;
        if a < 0.0 {
            m0 = 0.0;
        }
        if b < 0.0 {
            m1 = 0.0;
        }
        let s = a.max(0.0).powi(2) + b.max(0.0).powi(2);
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m0 *= tau;
            m1 *= tau;
        }
    }
    let u = ((x - x0) / h).clamp(0.0, 1.0);
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * y0 + h * h10 * m0 + h01 * y1 + h * h11 * m1
}

enum Side {
    Head,
    Tail,
}

/// Least-squares power-law fit over the outer decade of nodes, anchored at
/// the boundary node so evaluation is continuous across the grid seam.  If
/// the window contains zeros or a sign change the log-log fit is undefined
/// and the grid's fallback exponent is used instead.
fn fit_power_law(grid: &Grid, values: &[f64], side: Side) -> PowerLaw {
    let n = grid.len();
    let (range, anchor, fallback_exp) = match side {
        Side::Head => {
            let hi = grid.spec.theta_min * 10.0;
            let mut end = grid.nodes.partition_point(|&t| t <= hi);
            end = end.clamp(6.min(n), n / 2);
            (0..end, 0usize, grid.spec.head_exponent)
        }
        Side::Tail => {
            let lo = grid.spec.theta_max / 10.0;
            let mut start = grid.nodes.partition_point(|&t| t < lo);
            start = start.clamp(n / 2, n - 6.min(n));
            (start..n, n - 1, grid.spec.tail_exponent)
        }
    };
    let window = &values[range.clone()];
    let max_abs = window.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if max_abs <= FIT_ZERO_FLOOR {
        return PowerLaw::ZERO;
    }
    let sign = window[window.len() / 2].signum();
    let clean = window
        .iter()
        .all(|&v| v != 0.0 && v.signum() == sign && v.abs() > max_abs * 1e-13);
    let anchor_theta = grid.nodes[anchor];
    let anchor_value = values[anchor];
    if !clean {
        let coeff = if anchor_value == 0.0 {
            0.0
        } else {
            anchor_value / anchor_theta.powf(fallback_exp)
        };
        return PowerLaw {
            coeff,
            exponent: fallback_exp,
        };
    }
    // ln|v| = ln|c| + p ln θ, ordinary least squares for p.
    let xs = &grid.log_nodes[range];
    let m = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / m;
    let mean_y: f64 = window.iter().map(|v| v.abs().ln()).sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, v) in xs.iter().zip(window) {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (v.abs().ln() - mean_y);
    }
    let p = if sxx > 0.0 { sxy / sxx } else { fallback_exp };
    PowerLaw {
        coeff: anchor_value / anchor_theta.powf(p),
        exponent: p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GridSpec;

    fn grid(spec: GridSpec) -> Arc<Grid> {
        Grid::new(spec).unwrap()
    }

    #[test]
    fn zero_field_is_zero_everywhere() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |_| 0.0, None).unwrap();
        assert_eq!(f.eval(1.0).unwrap(), 0.0);
        assert_eq!(f.eval(1e-9).unwrap(), 0.0);
        assert_eq!(f.eval(1e9).unwrap(), 0.0);
        assert_eq!(f.head_model(), PowerLaw::ZERO);
        assert_eq!(f.tail_model(), PowerLaw::ZERO);
    }

    #[test]
    fn sampling_is_exact_at_nodes() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |t| (-t).exp(), None).unwrap();
        for &i in &[0usize, 517, 1023, 2047] {
            let th = g.nodes[i];
            let v = f.eval(th).unwrap();
            let want = (-th).exp();
            assert!(
                (v - want).abs() <= 1e-15 * want.max(1.0),
                "eval at node {i} should reproduce the sample, got {v} vs {want}"
            );
        }
    }

    #[test]
    fn tail_fit_recovers_power_law_exponent() {
        let spec = GridSpec {
            theta_min: 1e-2,
            theta_max: 1e2,
            n_nodes: 512,
            ..GridSpec::default()
        };
        let g = grid(spec);
        let f = SampledField::make(&g, |t| 1.0 / t, None).unwrap();
        let tail = f.tail_model();
        assert!(
            (tail.exponent + 1.0).abs() < 1e-3,
            "tail exponent should be -1, got {}",
            tail.exponent
        );
        let head = f.head_model();
        assert!((head.exponent + 1.0).abs() < 1e-3);
    }

    #[test]
    fn interpolation_matches_smooth_reference() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |t| t.powi(-2), None).unwrap();
        // Mid-cell points across the grid.
        for k in [100, 500, 1000, 1500, 2000] {
            let th = (g.nodes[k] * g.nodes[k + 1]).sqrt();
            let v = f.eval(th).unwrap();
            let exact = th.powi(-2);
            assert!(
                ((v - exact) / exact).abs() < 1e-8,
                "interpolation error too large at theta = {th}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn off_grid_uses_tail_model() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |t| t.powi(-2), None).unwrap();
        let th = 10.0 * g.spec.theta_max;
        let v = f.eval(th).unwrap();
        let exact = th.powi(-2);
        assert!(
            ((v - exact) / exact).abs() < 1e-3,
            "tail continuation error too large: {v} vs {exact}"
        );
    }

    #[test]
    fn eval_rejects_nonpositive_theta() {
        let g = grid(GridSpec::default());
        let f = SampledField::zero(g);
        assert!(f.eval(0.0).is_err());
        assert!(f.eval(-1.0).is_err());
        assert!(f.eval_deriv(f64::NAN).is_err());
    }

    #[test]
    fn non_finite_sample_names_the_offender() {
        let g = grid(GridSpec::default());
        let bad = 1.0;
        let err = SampledField::make(&g, |t| if t > bad { f64::NAN } else { 0.0 }, None)
            .expect_err("NaN sample must fail");
        match err {
            Error::NonFiniteSample { theta } => assert!(theta > bad),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn weighted_field_shifts_models_and_derivatives() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |t| (-t).exp(), Some(&|t: f64| -(-t).exp())).unwrap();
        let w = f.weighted(2.0);
        let th = 3.7_f64;
        let expect = th * th * (-th).exp();
        let got = w.eval(th).unwrap();
        assert!(((got - expect) / expect).abs() < 1e-9);
        let expect_d = 2.0 * th * (-th).exp() - th * th * (-th).exp();
        let got_d = w.eval_deriv(th).unwrap();
        assert!(((got_d - expect_d) / expect_d).abs() < 1e-7);
        assert!((w.tail_model().exponent - (f.tail_model().exponent + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn deriv_field_exposes_derivative_samples() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |t| (-t).exp(), Some(&|t: f64| -(-t).exp())).unwrap();
        let df = f.deriv_field();
        let th = 2.0;
        let got = df.eval(th).unwrap();
        let expect = -(-th).exp();
        assert!(((got - expect) / expect).abs() < 1e-9);
    }

    #[test]
    fn linear_combinations_are_pointwise() {
        let g = grid(GridSpec::default());
        let a = SampledField::make(&g, |t| (-t).exp(), None).unwrap();
        let b = SampledField::make(&g, |t| 1.0 / (1.0 + t * t), None).unwrap();
        let c = a.add_scaled(&b, -2.0).unwrap();
        let th = 0.9_f64;
        let expect = (-th).exp() - 2.0 / (1.0 + th * th);
        assert!((c.eval(th).unwrap() - expect).abs() < 1e-9);
        let half = a.scale(0.5);
        assert_eq!(half.eval(1.0).unwrap(), 0.5 * a.eval(1.0).unwrap());
    }

    #[test]
    fn seam_continuity_within_quad_tolerance() {
        let g = grid(GridSpec::default());
        let f = SampledField::make(&g, |t| t.powf(-0.7) / (1.0 + t), None).unwrap();
        let eps = 1e-12;
        let tmin = g.spec.theta_min;
        let tmax = g.spec.theta_max;
        let inner = f.eval(tmin * (1.0 + eps)).unwrap();
        let outer = f.eval(tmin * (1.0 - eps)).unwrap();
        assert!(((inner - outer) / inner).abs() < 1e-6, "head seam jump");
        let inner = f.eval(tmax * (1.0 - eps)).unwrap();
        let outer = f.eval(tmax * (1.0 + eps)).unwrap();
        assert!(((inner - outer) / inner).abs() < 1e-6, "tail seam jump");
    }
}
