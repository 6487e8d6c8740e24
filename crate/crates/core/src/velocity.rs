//! The velocity field induced by the m-branch spiral sheet.
//!
//! Folding the m symmetric branches into one kernel with the identity
//! `(1/m) Σ_k (z − ξ^k w)^{-1} = z^{m-1}/(z^m − w^m)` gives the conjugate
//! velocity as a single integral along the profile:
//!
//! ```text
//! v(z)* = (2πi)^{-1} ∫_0^∞ z^{m−1} γ̃′(θ) / (z^m − w(θ)^m) dθ,   w = r̃ e^{iθ}
//! ```
//!
//! Away from the matching radius the kernel flattens to `γ̃′/z` outward
//! (handled by an exact analytic plateau piece) and decays like a power of
//! the radius ratio inward, so the quadrature only ever sees a window of
//! angles around `θ₀ = r̃^{-1}(|z|)`.  On the sheet itself the integral is a
//! principal value, taken with the same symmetric pole window used by the
//! interaction-integral oracle.
//!
//! The self-similar extension `u(t, x) = t^{μ−1} v(t^{−μ} x)` and its `t = 0`
//! limit (the velocity of the initial algebraic vortex rays) are provided,
//! along with contour circulation and the volume terms of the stationary
//! weak form, which the test-suite uses to certify the field actually
//! solves the fluid equations rather than merely resembling a spiral.

use num_complex::Complex64;
use rayon::prelude::*;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pair::FieldPair;
use crate::params::Params;
use crate::quad::adaptive_gl;
use crate::singular::SheetKernels;

/// The sheet-induced velocity field of one solved profile.
pub struct VelocityField {
    kern: SheetKernels,
    params: Params,
    /// Initial-sheet coefficient `d` in `Z(0, Γ) = d (−Γ)^{μ/(2μ−1)}`.
    d_coeff: f64,
}

/// One velocity evaluation with its near-center decomposition.
///
/// `leading` and `remainder` decompose the *conjugate* velocity: beyond the
/// matching angle the kernel flattens to `1/z`, and the circulation mass it
/// picks up there is `∫_{θ₀}^∞ γ̃′ = −γ̃(θ₀) > 0`, so the sheet acts on the
/// near field like a point vortex of that strength at the origin.
#[derive(Debug, Clone, Copy)]
pub struct VelocitySample {
    pub z: Complex64,
    pub v: Complex64,
    /// Angle where the profile radius matches `|z|`.
    pub theta0: f64,
    /// Point-vortex part of the conjugate velocity, `−γ̃(θ₀) / (2πi z)`.
    pub leading: Complex64,
    /// `v* − leading`.
    pub remainder: Complex64,
}

impl VelocityField {
    pub fn new(pair: &FieldPair, params: &Params) -> Result<VelocityField> {
        params.validate()?;
        let kern = SheetKernels::new(pair, params)?;
        let mu = params.mu;
        let th_edge = pair.grid().spec.theta_min;
        let a = kern.ln_big_r(th_edge).exp();
        let b = -th_edge.powf(2.0 * mu - 1.0) * kern.gamma_tilde(th_edge);
        let d_coeff = a * b.powf(-mu / (2.0 * mu - 1.0));
        Ok(VelocityField {
            kern,
            params: *params,
            d_coeff,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Initial-sheet coefficient `d` (also exposed by the geometry layer).
    pub fn initial_sheet_coeff(&self) -> f64 {
        self.d_coeff
    }

    /// The angle whose profile radius equals `rho` (`r̃` is strictly
    /// decreasing, so it is unique).  Newton on `ln r̃`, bisection-guarded.
    pub fn radius_angle(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain {
                what: "radius",
                value: rho,
            });
        }
        let mu = self.params.mu;
        let target = rho.ln();
        let h = |th: f64| -mu * th.ln() + self.kern.ln_big_r(th) - target;
        // Base-spiral seed r̃ ≈ θ^{−μ}.
        let mut lo = rho.powf(-1.0 / mu);
        let mut hi = lo;
        for _ in 0..200 {
            if h(lo) <= 0.0 {
                break;
            }
            lo *= 2.0;
        }
        for _ in 0..200 {
            if h(hi) >= 0.0 {
                break;
            }
            hi *= 0.5;
        }
        // h is decreasing in θ: h(hi) ≥ 0 ≥ h(lo) with hi ≤ lo.
        let (mut lo, mut hi) = (hi, lo);
        let mut th = (lo * hi).sqrt();
        for _ in 0..80 {
            let val = h(th);
            if val >= 0.0 {
                lo = th;
            } else {
                hi = th;
            }
            let slope = -mu / th + self.kern.ln_r.eval_deriv(th).expect("positive angle");
            let next = th - val / slope;
            th = if next.is_finite() && next > lo.min(hi) * 0.5 && next < hi.max(lo) * 2.0 {
                next
            } else {
                (lo * hi).sqrt()
            };
            if val.abs() <= 1e-14 {
                break;
            }
        }
        Ok(th)
    }

    /// Distance from `z` to the sheet (over all branches and nearby turns),
    /// together with the parameter angle of the nearest curve point.
    ///
    /// Candidate parameters sit where the curve's angle matches `arg z`:
    /// `θ_n = arg z + 2πn/m` — each `n` selects one (branch, turn) pair.
    /// Only candidates near the radius-matching angle `θ₀` can be close, so
    /// the scan covers a few on each side and polishes each with Newton on
    /// the squared distance.  Far from the sheet the coarse radial-crossing
    /// estimate is returned without polishing.
    pub fn sheet_distance(&self, z: Complex64) -> Result<(f64, f64)> {
        let rho = z.norm();
        let theta0 = self.radius_angle(rho)?;
        let m = self.params.m as f64;
        let mu = self.params.mu;
        let phi = z.arg();
        let step = 2.0 * PI / m;
        let n0 = ((theta0 - phi) / step).round();
        // Angle mismatch to the nearest aligned candidate; the curve crosses
        // the ray of z at radius r̃(θ₀ + δ) ≈ ρ(1 − μδ/θ₀).
        let delta = theta0 - (phi + n0 * step);
        let coarse = rho * (mu * delta / theta0).abs();
        if coarse > 1e-6 * (1.0 + rho) {
            return Ok((coarse, theta0 + delta));
        }
        let mut best = (f64::INFINITY, theta0);
        for dn in -2..=2_i64 {
            let th_aligned = phi + (n0 + dn as f64) * step;
            if th_aligned <= 0.0 {
                continue;
            }
            // Rotation folding this candidate's branch/turn onto z's ray:
            // ζ has |ζ| = ρ and arg aligned with θ along this branch.
            let zeta = z * Complex64::cis(th_aligned - phi);
            let mut th = th_aligned;
            for _ in 0..8 {
                let w = Complex64::from_polar(self.kern.r_tilde(th), th);
                let wp =
                    w * Complex64::new(self.kern.r_tilde_prime(th) / self.kern.r_tilde(th), 1.0);
                let diff = w - zeta;
                let d1 = (diff * wp.conj()).re;
                let d2 = wp.norm_sqr();
                let upd = d1 / d2;
                let next = th - upd;
                if !(next > 0.0) {
                    break;
                }
                th = next;
                if upd.abs() < 1e-15 * th {
                    break;
                }
            }
            let w = Complex64::from_polar(self.kern.r_tilde(th), th);
            let dist = (w - zeta).norm();
            if dist < best.0 {
                best = (dist, th);
            }
        }
        Ok(best)
    }

    /// The conjugate-kernel integrand `γ̃′(θ)/(z (1 − (w/z)^m))`, written so
    /// that magnitudes combine in log scale before exponentiation.
    fn integrand(&self, z: Complex64, ln_abs_z: f64, theta: f64) -> Complex64 {
        let m = self.params.m as f64;
        let ln_ratio = self.kern.r_tilde(theta).ln() - ln_abs_z;
        let w_over_z_m = Complex64::from_polar((m * ln_ratio).exp(), m * (theta - z.arg()));
        Complex64::new(self.kern.gamma_tilde_prime(theta), 0.0) / (z * (1.0 - w_over_z_m))
    }

    /// Core kernel integral: conjugate velocity times `2πi`.
    fn kernel_integral(&self, z: Complex64, rel_tol: f64) -> Result<Complex64> {
        let mu = self.params.mu;
        let m = self.params.m as f64;
        let rho = z.norm();
        let theta0 = self.radius_angle(rho)?;
        let ln_abs_z = rho.ln();
        let span = (36.0 + rel_tol.ln().abs().min(30.0)) / (mu * m);
        let th_lo = theta0 * (-span).exp();
        let th_hi = theta0 * span.exp();
        let scale = (self.kern.gamma_tilde(theta0) / rho).abs().max(1e-300);
        let quad_tol = rel_tol * scale;

        let (dist, th_pole) = self.sheet_distance(z)?;
        let near_sheet = dist <= 1e-10 * (1.0 + rho);

        // Adaptive integration between kernel-alignment peaks θ₀ + 2πk/m.
        let integrate = |lo: f64, hi: f64| -> Result<Complex64> {
            if hi <= lo {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let step = 2.0 * PI / m;
            let mut pts = vec![lo];
            let k0 = ((lo - theta0) / step).ceil() as i64;
            let k1 = ((hi - theta0) / step).floor() as i64;
            for k in k0..=k1 {
                let p = theta0 + k as f64 * step;
                if p > lo && p < hi {
                    pts.push(p);
                }
            }
            pts.push(hi);
            let mut acc = Complex64::new(0.0, 0.0);
            for w in pts.windows(2) {
                acc += adaptive_gl(
                    |th: f64| self.integrand(z, ln_abs_z, th),
                    w[0],
                    w[1],
                    quad_tol,
                )?;
            }
            Ok(acc)
        };

        let mut total;
        if near_sheet {
            // Principal value: symmetric window around the pole angle.
            let eps = (0.05 * 2.0 * PI / m).min(th_pole / 4.0);
            let s_min = 1e-9 * (2.0 * PI / m);
            total = integrate(th_lo, th_pole - eps)?;
            total += integrate(th_pole + eps, th_hi)?;
            total += adaptive_gl(
                |s: f64| {
                    self.integrand(z, ln_abs_z, th_pole + s)
                        + self.integrand(z, ln_abs_z, th_pole - s)
                },
                s_min,
                eps,
                quad_tol,
            )?;
        } else {
            total = integrate(th_lo, th_hi)?;
        }
        // Plateau beyond the window: kernel → 1/z, so the piece is exactly
        // (γ̃(∞) − γ̃(θ_hi))/z = −γ̃(θ_hi)/z.
        total += Complex64::new(-self.kern.gamma_tilde(th_hi), 0.0) / z;
        Ok(total)
    }

    /// Velocity at a point (principal value on the sheet).
    pub fn velocity(&self, z: Complex64) -> Result<Complex64> {
        self.velocity_with_tol(z, 1e-10)
    }

    /// Velocity with an explicit relative tolerance (the weak-form grids use
    /// a loose one; single-point checks use the default tight one).
    pub fn velocity_with_tol(&self, z: Complex64, rel_tol: f64) -> Result<Complex64> {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0 {
            return Err(Error::Domain {
                what: "field point",
                value: z.norm(),
            });
        }
        let integral = self.kernel_integral(z, rel_tol)?;
        Ok((integral / Complex64::new(0.0, 2.0 * PI)).conj())
    }

    /// Velocity plus its near-center decomposition.
    pub fn sample(&self, z: Complex64) -> Result<VelocitySample> {
        let v = self.velocity(z)?;
        let theta0 = self.radius_angle(z.norm())?;
        let leading = Complex64::new(-self.kern.gamma_tilde(theta0), 0.0)
            / (Complex64::new(0.0, 2.0 * PI) * z);
        Ok(VelocitySample {
            z,
            v,
            theta0,
            leading,
            remainder: v.conj() - leading,
        })
    }

    /// Self-similar velocity `u(t, x) = t^{μ−1} v(t^{−μ} x)`; `t = 0` falls
    /// back to the initial-ray field.
    pub fn self_similar(&self, t: f64, z: Complex64) -> Result<Complex64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "time",
                value: t,
            });
        }
        if t == 0.0 {
            return self.initial_velocity(z);
        }
        let mu = self.params.mu;
        Ok(t.powf(mu - 1.0) * self.velocity(z * t.powf(-mu))?)
    }

    /// Velocity of the initial vorticity configuration: m symmetric
    /// algebraic rays `|x|^{1−1/μ}` with weight `1/m`,
    ///
    /// ```text
    /// u(0,z)* = (c/2πi) ∫_0^∞ s^{q−1} z^{m−1}/(z^m − s^m) ds,
    /// q = (2μ−1)/μ,  c = q d^{−q}
    /// ```
    pub fn initial_velocity(&self, z: Complex64) -> Result<Complex64> {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0 {
            return Err(Error::Domain {
                what: "field point",
                value: z.norm(),
            });
        }
        let mu = self.params.mu;
        let m = self.params.m as f64;
        let q = (2.0 * mu - 1.0) / mu;
        let c = q * self.d_coeff.powf(-q);
        let rho = z.norm();
        let ln_abs_z = rho.ln();
        let f = |s: f64| -> Complex64 {
            let ratio_m = Complex64::from_polar((m * (s.ln() - ln_abs_z)).exp(), -m * z.arg());
            Complex64::new(s.powf(q - 1.0), 0.0) / (z * (1.0 - ratio_m))
        };
        // On-ray points need the symmetric principal-value window.
        let phi_wrap = (z.arg() * m / (2.0 * PI)).round() * 2.0 * PI / m - z.arg();
        let on_ray = (rho * phi_wrap).abs() <= 1e-10 * (1.0 + rho);
        let s_lo = rho * (-36.0 / m).exp();
        let s_hi = rho * (36.0 / m).exp();
        let quad_tol = 1e-10 * rho.powf(q - 1.0) / rho.max(1e-300);
        let mut total;
        if on_ray {
            let eps = 0.05 * rho / m;
            total = adaptive_gl(f, s_lo, rho - eps, quad_tol)?;
            total += adaptive_gl(f, rho + eps, s_hi, quad_tol)?;
            total += adaptive_gl(
                |u: f64| f(rho + u) + f(rho - u),
                1e-9 * rho / m,
                eps,
                quad_tol,
            )?;
        } else {
            total = adaptive_gl(f, s_lo, s_hi, quad_tol)?;
        }
        // Analytic stubs where the kernel has flattened to 1/z or decayed.
        total += Complex64::new(s_lo.powf(q) / q, 0.0) / z;
        let zm = Complex64::from_polar((m * (ln_abs_z - s_hi.ln())).exp(), m * z.arg());
        total -= zm * Complex64::new(s_hi.powf(q - 1.0) / (m - q), 0.0) / z * s_hi;
        Ok((total * c / Complex64::new(0.0, 2.0 * PI)).conj())
    }

    /// Contour circulation `∮ u · dl` on the circle of radius `rho`,
    /// by the trapezoid rule over `n` equispaced angles.
    pub fn circulation(&self, rho: f64, n: usize) -> Result<f64> {
        let mut acc = 0.0;
        let dphi = 2.0 * PI / n as f64;
        for j in 0..n {
            let phi = j as f64 * dphi;
            let z = Complex64::from_polar(rho, phi);
            let v = self.velocity_with_tol(z, 1e-8)?;
            // circulation density: Re( conj(v) · iz dφ )
            acc += (v.conj() * Complex64::new(0.0, 1.0) * z).re * dphi;
        }
        Ok(acc)
    }
}

/// A compactly supported C² stream function: a radial bump on an annulus,
/// optionally windowed in angle.  Supplies the exact first and second
/// derivatives the weak form needs.
#[derive(Debug, Clone, Copy)]
pub struct StreamBump {
    pub r_inner: f64,
    pub r_outer: f64,
    /// `(center, half_width)` of an angular window; `None` is axisymmetric.
    pub angular: Option<(f64, f64)>,
}

/// `exp(1 − 1/(1−u²))` on (−1, 1), with two derivatives.
fn bump(u: f64) -> (f64, f64, f64) {
    if u.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 - u * u;
    let chi = (1.0 - 1.0 / d).exp();
    let g = -2.0 * u / (d * d); // (ln χ)′
    let gp = -2.0 * (1.0 + 3.0 * u * u) / (d * d * d); // (ln χ)″
    (chi, chi * g, chi * (g * g + gp))
}

impl StreamBump {
    /// η and its polar derivatives (η_r, η_φ, η_rr, η_rφ, η_φφ).
    fn polar(&self, r: f64, phi: f64) -> (f64, [f64; 5]) {
        let mid = 0.5 * (self.r_inner + self.r_outer);
        let half = 0.5 * (self.r_outer - self.r_inner);
        let u = (r - mid) / half;
        let (cr, cr1, cr2) = bump(u);
        let (a, a1, a2) = match self.angular {
            None => (1.0, 0.0, 0.0),
            Some((center, hw)) => {
                let mut d = phi - center;
                while d > PI {
                    d -= 2.0 * PI;
                }
                while d < -PI {
                    d += 2.0 * PI;
                }
                let (b, b1, b2) = bump(d / hw);
                (b, b1 / hw, b2 / (hw * hw))
            }
        };
        let eta = cr * a;
        let eta_r = cr1 / half * a;
        let eta_p = cr * a1;
        let eta_rr = cr2 / (half * half) * a;
        let eta_rp = cr1 / half * a1;
        let eta_pp = cr * a2;
        (eta, [eta_r, eta_p, eta_rr, eta_rp, eta_pp])
    }

    /// The divergence-free test field `w = ∇⊥η` and its Jacobian `∂_j w_i`
    /// at a Cartesian point.
    pub fn field_and_jacobian(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let r = x.hypot(y);
        if r == 0.0 {
            return ([0.0, 0.0], [[0.0; 2]; 2]);
        }
        let phi = y.atan2(x);
        let (_, [er, ep, err, erp, epp]) = self.polar(r, phi);
        let (c, s) = (phi.cos(), phi.sin());
        // Cartesian derivatives of η from the polar ones.
        let ex = c * er - s / r * ep;
        let ey = s * er + c / r * ep;
        let exx = c * c * err - 2.0 * c * s / r * erp + s * s / (r * r) * epp + s * s / r * er
            + 2.0 * c * s / (r * r) * ep;
        let eyy = s * s * err + 2.0 * c * s / r * erp + c * c / (r * r) * epp + c * c / r * er
            - 2.0 * c * s / (r * r) * ep;
        let exy = c * s * err + (c * c - s * s) / r * erp - c * s / (r * r) * epp - c * s / r * er
            - (c * c - s * s) / (r * r) * ep;
        // w = (−η_y, η_x); ∂_j w_i with i the row.
        let w = [-ey, ex];
        let jac = [[-exy, -eyy], [exx, exy]];
        (w, jac)
    }

    /// Support bounds for quadrature (radial, angular).
    pub fn support(&self) -> (f64, f64, f64, f64) {
        match self.angular {
            None => (self.r_inner, self.r_outer, 0.0, 2.0 * PI),
            Some((c, hw)) => (self.r_inner, self.r_outer, c - hw, c + hw),
        }
    }
}

/// Velocity samples on a log-radial polar grid, shareable between test
/// functions with the same support.
pub struct VelocityGrid {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    /// Row-major `[i_r * n_phi + j]`.
    pub v: Vec<Complex64>,
    pub dx_log: f64,
    pub dphi: f64,
}

/// Sample the velocity at the midpoints of a log-radial polar grid.
pub fn velocity_grid(
    field: &VelocityField,
    r_lo: f64,
    r_hi: f64,
    phi_lo: f64,
    phi_hi: f64,
    n_r: usize,
    n_phi: usize,
) -> Result<VelocityGrid> {
    let dx = (r_hi / r_lo).ln() / n_r as f64;
    let dphi = (phi_hi - phi_lo) / n_phi as f64;
    let r: Vec<f64> = (0..n_r)
        .map(|i| r_lo * ((i as f64 + 0.5) * dx).exp())
        .collect();
    let phi: Vec<f64> = (0..n_phi)
        .map(|j| phi_lo + (j as f64 + 0.5) * dphi)
        .collect();
    let v = (0..n_r * n_phi)
        .into_par_iter()
        .map(|idx| {
            let z = Complex64::from_polar(r[idx / n_phi], phi[idx % n_phi]);
            field.velocity_with_tol(z, 1e-6)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VelocityGrid {
        r,
        phi,
        v,
        dx_log: dx,
        dphi,
    })
}

/// Sample the velocity on a uniform Cartesian window `[−w, w]²`
/// at the `n × n` cell centers, row-major from the bottom-left.
///
/// Cell centers keep even resolutions away from the branch point at the
/// origin; a center landing exactly on the sheet still works because point
/// evaluation takes the principal value there.  Rows are
/// `(x, y, vx, vy)`.  Evaluations are independent and run in parallel.
pub fn sample_window(field: &VelocityField, half_width: f64, n: usize) -> Result<Vec<[f64; 4]>> {
    if !(half_width > 0.0) || n == 0 {
        return Err(Error::Domain {
            what: "field window half-width and resolution must be positive",
            value: half_width,
        });
    }
    let h = 2.0 * half_width / n as f64;
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let x = -half_width + (0.5 + (idx % n) as f64) * h;
            let y = -half_width + (0.5 + (idx / n) as f64) * h;
            let v = if x == 0.0 && y == 0.0 {
                // Odd resolutions put one center on the branch point, where
                // the m-fold symmetry (m ≥ 2) forces the average to vanish.
                Complex64::new(0.0, 0.0)
            } else {
                field.velocity_with_tol(Complex64::new(x, y), 1e-6)?
            };
            Ok([x, y, v.re, v.im])
        })
        .collect()
}

/// Normalized residual of the stationary self-similar weak form
///
/// ```text
/// ∫ (3μ−1) v·w − (v⊗v):∇w + μ v·(x·∇w) dA = 0
/// ```
///
/// over the support of the test stream function, relative to the integral
/// of the absolute sizes of the three terms.
pub fn weak_residual(mu: f64, grid: &VelocityGrid, bump: &StreamBump) -> f64 {
    let mut total = 0.0_f64;
    let mut scale = 0.0_f64;
    for (i, &ri) in grid.r.iter().enumerate() {
        let da = ri * ri * grid.dx_log * grid.dphi;
        for (j, &pj) in grid.phi.iter().enumerate() {
            let x = ri * pj.cos();
            let y = ri * pj.sin();
            let (w, jac) = bump.field_and_jacobian(x, y);
            let v = grid.v[i * grid.phi.len() + j];
            let (vx, vy) = (v.re, v.im);
            let t1 = (3.0 * mu - 1.0) * (vx * w[0] + vy * w[1]);
            // (v⊗v):∇w = v_i v_j ∂_j w_i
            let t2 = -(vx * vx * jac[0][0]
                + vx * vy * jac[0][1]
                + vy * vx * jac[1][0]
                + vy * vy * jac[1][1]);
            // v·(x·∇)w
            let xdw0 = x * jac[0][0] + y * jac[0][1];
            let xdw1 = x * jac[1][0] + y * jac[1][1];
            let t3 = mu * (vx * xdw0 + vy * xdw1);
            total += (t1 + t2 + t3) * da;
            scale += (t1.abs() + t2.abs() + t3.abs()) * da;
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        total.abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::pair::PairKind;
    use crate::params::Params;

    fn kaden_field(m: u32) -> VelocityField {
        let params = Params {
            m,
            ..Params::default()
        };
        let grid = Grid::new(params.grid).unwrap();
        let pair = FieldPair::zero(grid, PairKind::DomainX);
        VelocityField::new(&pair, &params).unwrap()
    }

    #[test]
    fn rotational_equivariance() {
        let vf = kaden_field(8);
        let z = Complex64::new(0.31, 0.22);
        let xi = Complex64::cis(2.0 * PI / 8.0);
        let v1 = vf.velocity(z * xi).unwrap();
        let v2 = xi * vf.velocity(z).unwrap();
        assert!(
            (v1 - v2).norm() <= 1e-10 * v2.norm(),
            "equivariance violated: {v1} vs {v2}"
        );
    }

    #[test]
    fn near_center_leading_term_dominates() {
        let vf = kaden_field(16);
        let z = Complex64::from_polar(1e-4, 0.4 + PI / 16.0);
        let s = vf.sample(z).unwrap();
        assert!(
            s.remainder.norm() < 0.01 * s.leading.norm(),
            "remainder {} vs leading {}",
            s.remainder.norm(),
            s.leading.norm()
        );
        // θ₀ really is the radius-matching angle.
        let r0 = vf.kern.r_tilde(s.theta0);
        assert!((r0 - z.norm()).abs() <= 1e-12 * z.norm());
    }

    #[test]
    fn on_sheet_principal_value_is_finite_and_close_to_nearby() {
        let vf = kaden_field(8);
        let th = 1.3_f64;
        let z_on = Complex64::from_polar(vf.kern.r_tilde(th), th);
        let v_on = vf.velocity(z_on).unwrap();
        assert!(v_on.is_finite());
        // The PV is the average of the two one-sided limits; points slightly
        // off the sheet on either side should straddle it.
        let normal = Complex64::cis(th); // roughly radial
        let v_plus = vf.velocity(z_on + normal * 1e-5).unwrap();
        let v_minus = vf.velocity(z_on - normal * 1e-5).unwrap();
        let avg = 0.5 * (v_plus + v_minus);
        assert!(
            (v_on - avg).norm() <= 0.05 * v_on.norm(),
            "PV {v_on} vs straddle average {avg}"
        );
    }

    #[test]
    fn self_similar_scaling_identities() {
        let vf = kaden_field(8);
        let z = Complex64::new(0.4, 0.1);
        let mu = vf.params.mu;
        let u1 = vf.self_similar(1.0, z).unwrap();
        let v = vf.velocity(z).unwrap();
        assert_eq!(u1, v, "t = 1 must be the profile field exactly");
        let t = 4.0_f64;
        let u4 = vf.self_similar(t, z * t.powf(mu)).unwrap();
        let want = t.powf(mu - 1.0) * v;
        assert!((u4 - want).norm() <= 1e-9 * want.norm());
    }

    #[test]
    fn initial_field_matches_small_time_limit() {
        let vf = kaden_field(8);
        let z = Complex64::new(0.8, 0.5);
        let u0 = vf.initial_velocity(z).unwrap();
        let u_small = vf.self_similar(1e-7, z).unwrap();
        assert!(
            (u0 - u_small).norm() <= 1e-3 * u0.norm(),
            "t→0 limit {u_small} vs initial field {u0}"
        );
    }

    #[test]
    fn stream_bump_derivatives_match_differencing() {
        let bump = StreamBump {
            r_inner: 0.5,
            r_outer: 1.5,
            angular: Some((0.7, 1.1)),
        };
        let (x, y) = (0.62, 0.55);
        let h = 1e-5;
        let eta = |x: f64, y: f64| {
            let r = x.hypot(y);
            let phi = y.atan2(x);
            bump.polar(r, phi).0
        };
        let (w, jac) = bump.field_and_jacobian(x, y);
        let ey = (eta(x, y + h) - eta(x, y - h)) / (2.0 * h);
        let ex = (eta(x + h, y) - eta(x - h, y)) / (2.0 * h);
        assert!((w[0] + ey).abs() < 1e-8, "w_x = −η_y: {} vs {}", w[0], -ey);
        assert!((w[1] - ex).abs() < 1e-8, "w_y = η_x: {} vs {}", w[1], ex);
        let wfd = |x: f64, y: f64| {
            let r = x.hypot(y);
            let phi = y.atan2(x);
            let (_, [er, ep, ..]) = bump.polar(r, phi);
            let (c, s) = (phi.cos(), phi.sin());
            [
                -(s * er + c / r * ep), // −η_y
                c * er - s / r * ep,    // η_x
            ]
        };
        let j00 = (wfd(x + h, y)[0] - wfd(x - h, y)[0]) / (2.0 * h);
        let j01 = (wfd(x, y + h)[0] - wfd(x, y - h)[0]) / (2.0 * h);
        let j10 = (wfd(x + h, y)[1] - wfd(x - h, y)[1]) / (2.0 * h);
        let j11 = (wfd(x, y + h)[1] - wfd(x, y - h)[1]) / (2.0 * h);
        assert!((jac[0][0] - j00).abs() < 1e-6);
        assert!((jac[0][1] - j01).abs() < 1e-6);
        assert!((jac[1][0] - j10).abs() < 1e-6);
        assert!((jac[1][1] - j11).abs() < 1e-6);
    }

    #[test]
    fn field_is_divergence_free_and_irrotational_off_sheet() {
        let vf = kaden_field(8);
        // A point well between turns.
        let z = Complex64::from_polar(0.6, 0.3);
        let h = 1e-5;
        let v = |z: Complex64| vf.velocity(z).unwrap();
        let dvx_dx = (v(z + h).re - v(z - h).re) / (2.0 * h);
        let dvy_dy =
            (v(z + Complex64::new(0.0, h)).im - v(z - Complex64::new(0.0, h)).im) / (2.0 * h);
        let dvy_dx = (v(z + h).im - v(z - h).im) / (2.0 * h);
        let dvx_dy =
            (v(z + Complex64::new(0.0, h)).re - v(z - Complex64::new(0.0, h)).re) / (2.0 * h);
        let scale = v(z).norm() / z.norm();
        assert!(
            (dvx_dx + dvy_dy).abs() <= 1e-6 * scale.max(1.0),
            "divergence {}",
            dvx_dx + dvy_dy
        );
        assert!(
            (dvy_dx - dvx_dy).abs() <= 1e-4 * scale.max(1.0),
            "curl {}",
            dvy_dx - dvx_dy
        );
    }
}
