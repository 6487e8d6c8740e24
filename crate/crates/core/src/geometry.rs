//! Sheet reconstruction: from a solved profile perturbation to the actual
//! spiral curve, its time evolution, and exportable documents.
//!
//! The solved pair gives the full profile `r̃ = θ^{−μ} + r`, `γ̃ = γ₀ + γ`.
//! `r̃` is strictly decreasing and `γ̃: (0,∞) → (−∞,0)` strictly increasing,
//! so the circulation parameter labels curve points bijectively.  One branch
//! of the sheet at time `t` is
//!
//! ```text
//! Z(t, Γ) = t^μ z(t^{1−2μ} Γ),    z(γ) = r̃(θ(γ)) e^{iθ(γ)},
//! ```
//!
//! and the remaining branches are its rotations by the m-th roots of unity.
//! At `t = 0` the scaling argument blows up; the curve collapses onto the
//! positive real axis with the closed-form power law `Z(0, Γ) = d (−Γ)^{μ/(2μ−1)}`,
//! whose coefficient `d` comes from the edge asymptotics of the profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::pair::{FieldPair, PairKind};
use crate::params::Params;
use crate::singular::SheetKernels;

/// A solved spiral profile with the evaluation machinery for the curve.
pub struct SpiralSolution {
    params: Params,
    perturbation: FieldPair,
    kern: SheetKernels,
}

/// Asymptotic constants of the profile measured at the grid edges.
///
/// At the outer edge (`θ → 0`): `θ^μ r̃ → a_m` and `−θ^{2μ−1}γ̃ → b_m`; the
/// initial sheet is `Z(0,Γ) = d_m (−Γ)^{μ/(2μ−1)}` with
/// `d_m = a_m b_m^{−μ/(2μ−1)}`, and `beta_m = d_m^{2μ−1}` is the roll-up
/// constant, which tends to `(2π)^{−μ}` as the symmetry order grows.
/// At the center (`θ → ∞`): `θ^μ r̃ → 1` (reported as `center_limit`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Asymptotics {
    pub a_m: f64,
    pub b_m: f64,
    pub d_m: f64,
    pub beta_m: f64,
    pub center_limit: f64,
}

/// Output format for curve export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<ExportFormat, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "svg" => Ok(ExportFormat::Svg),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown export format `{other}` (csv|svg|json)")),
        }
    }
}

#[derive(Serialize)]
struct CurveDocument<'a> {
    params: &'a Params,
    branches: Vec<Vec<[f64; 2]>>,
    asymptotics: Asymptotics,
}

impl SpiralSolution {
    /// Wrap a solved perturbation, checking the monotonicity the curve
    /// reconstruction relies on: `γ̃′ > 0` (equivalently
    /// `|θ^{2μ}γ′| < 2π(2μ−1)`) and `r̃` strictly decreasing at every node.
    pub fn new(perturbation: FieldPair, params: &Params) -> Result<SpiralSolution> {
        params.validate()?;
        perturbation.expect_kind(PairKind::DomainX)?;
        let mu = params.mu;
        let base_density = 2.0 * PI * (2.0 * mu - 1.0);
        let grid = perturbation.grid().clone();
        for (i, &theta) in grid.nodes.iter().enumerate() {
            let weighted_slope = theta.powf(2.0 * mu) * perturbation.second.derivs()[i];
            if weighted_slope.abs() >= base_density {
                return Err(Error::SingularConfiguration { theta });
            }
            let r_tilde_prime = -mu * theta.powf(-mu - 1.0) + perturbation.first.derivs()[i];
            if r_tilde_prime >= 0.0 {
                return Err(Error::GeometryDegenerate {
                    value: r_tilde_prime,
                    theta,
                });
            }
        }
        let kern = SheetKernels::new(&perturbation, params)?;
        Ok(SpiralSolution {
            params: *params,
            perturbation,
            kern,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn perturbation(&self) -> &FieldPair {
        &self.perturbation
    }

    /// Full profile radius `r̃(θ)`.
    pub fn r_tilde(&self, theta: f64) -> f64 {
        self.kern.r_tilde(theta)
    }

    pub fn r_tilde_prime(&self, theta: f64) -> f64 {
        self.kern.r_tilde_prime(theta)
    }

    /// Full circulation parameter `γ̃(θ)` (negative, strictly increasing).
    pub fn gamma_tilde(&self, theta: f64) -> f64 {
        self.kern.gamma_tilde(theta)
    }

    pub fn gamma_tilde_prime(&self, theta: f64) -> f64 {
        self.kern.gamma_tilde_prime(theta)
    }

    /// Invert `γ̃(θ) = γ`: bracketed bisection seeded with the base-spiral
    /// inverse `θ ≈ (−γ/2π)^{1/(1−2μ)}`, polished by safeguarded Newton,
    /// to `|γ̃(θ) − γ| ≤ 1e-12 |γ|`.
    pub fn theta_of_gamma(&self, gamma: f64) -> Result<f64> {
        if !(gamma < 0.0) || !gamma.is_finite() {
            return Err(Error::Domain {
                what: "circulation parameter",
                value: gamma,
            });
        }
        let mu = self.params.mu;
        let tol = 1e-12 * gamma.abs();
        let h = |th: f64| self.kern.gamma_tilde(th) - gamma;
        let seed = (-gamma / (2.0 * PI)).powf(1.0 / (1.0 - 2.0 * mu));
        let mut lo = seed;
        let mut hi = seed;
        for _ in 0..300 {
            if h(lo) <= 0.0 {
                break;
            }
            lo *= 0.5;
        }
        for _ in 0..300 {
            if h(hi) >= 0.0 {
                break;
            }
            hi *= 2.0;
        }
        let mut th = seed.clamp(lo, hi);
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let val = h(th);
            if val.abs() <= tol {
                return Ok(th);
            }
            if val < 0.0 {
                lo = th;
            } else {
                hi = th;
            }
            let slope = self.kern.gamma_tilde_prime(th);
            let next = th - val / slope;
            th = if next.is_finite() && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            last = val.abs();
        }
        Err(Error::NonConvergence {
            context: "circulation parameter inversion",
            iterations: 100,
            last_step: last,
        })
    }

    /// Curve point `z(γ) = r̃(θ(γ)) e^{iθ(γ)}` of the time-1 profile.
    pub fn z_of_gamma(&self, gamma: f64) -> Result<Complex64> {
        let th = self.theta_of_gamma(gamma)?;
        Ok(Complex64::from_polar(self.kern.r_tilde(th), th))
    }

    /// Sheet position `Z(t, Γ)` of branch 0.  `t = 0` uses the closed-form
    /// power law on the positive real axis (the scaling argument
    /// `t^{1−2μ}Γ` overflows at `t = 0`).
    pub fn position(&self, t: f64, big_gamma: f64) -> Result<Complex64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "time",
                value: t,
            });
        }
        if !(big_gamma < 0.0) || !big_gamma.is_finite() {
            return Err(Error::Domain {
                what: "circulation parameter",
                value: big_gamma,
            });
        }
        let mu = self.params.mu;
        if t == 0.0 {
            let a = self.asymptotics();
            return Ok(Complex64::new(
                a.d_m * (-big_gamma).powf(mu / (2.0 * mu - 1.0)),
                0.0,
            ));
        }
        Ok(self.z_of_gamma(t.powf(1.0 - 2.0 * mu) * big_gamma)? * t.powf(mu))
    }

    /// Asymptotic constants measured at the grid edges.
    pub fn asymptotics(&self) -> Asymptotics {
        let mu = self.params.mu;
        let th_edge = self.perturbation.grid().spec.theta_min;
        let th_center = self.perturbation.grid().spec.theta_max;
        let a_m = th_edge.powf(mu) * self.kern.r_tilde(th_edge);
        let b_m = -th_edge.powf(2.0 * mu - 1.0) * self.kern.gamma_tilde(th_edge);
        let d_m = a_m * b_m.powf(-mu / (2.0 * mu - 1.0));
        Asymptotics {
            a_m,
            b_m,
            d_m,
            beta_m: d_m.powf(2.0 * mu - 1.0),
            center_limit: th_center.powf(mu) * self.kern.r_tilde(th_center),
        }
    }

    /// The log-spaced circulation samples used for export: 8 decades of
    /// `|Γ|` centered on the value whose angle is 1 (so the finite document
    /// resolves both the outer arm and a healthy number of inner turns),
    /// rescaled to time `t`, outermost first.
    pub fn export_gammas(&self, t: f64, n_gamma: usize) -> Vec<f64> {
        let mu = self.params.mu;
        let scale = if t > 0.0 {
            t.powf(2.0 * mu - 1.0)
        } else {
            1.0
        };
        let center = self.kern.gamma_tilde(1.0).abs() * scale;
        (0..n_gamma)
            .map(|j| {
                let u = if n_gamma == 1 {
                    0.0
                } else {
                    4.0 - 8.0 * j as f64 / (n_gamma - 1) as f64
                };
                -center * 10f64.powf(u)
            })
            .collect()
    }

    /// All m branches at time `t`: branch k is `ξ^k Z(t, Γ)` with
    /// `ξ = e^{2πi/m}`, over the export circulation samples.
    pub fn branch_points(&self, t: f64, n_gamma: usize) -> Result<Vec<Vec<Complex64>>> {
        let gammas = self.export_gammas(t, n_gamma);
        let base: Vec<Complex64> = gammas
            .iter()
            .map(|&g| self.position(t, g))
            .collect::<Result<_>>()?;
        let m = self.params.m;
        Ok((0..m)
            .map(|k| {
                let xi = Complex64::cis(2.0 * PI * k as f64 / m as f64);
                base.iter().map(|&z| z * xi).collect()
            })
            .collect())
    }

    /// Write the curve document for all branches at time `t`.
    pub fn export_curve<W: Write>(
        &self,
        out: &mut W,
        t: f64,
        n_gamma: usize,
        format: ExportFormat,
    ) -> Result<()> {
        if n_gamma < 2 {
            return Err(Error::InvalidParams(format!(
                "export needs at least 2 circulation samples, got {n_gamma}"
            )));
        }
        let gammas = self.export_gammas(t, n_gamma);
        let branches = self.branch_points(t, n_gamma)?;
        match format {
            ExportFormat::Csv => {
                out.write_all(b"branch,Gamma,x,y\n")?;
                for (k, branch) in branches.iter().enumerate() {
                    for (g, z) in gammas.iter().zip(branch) {
                        writeln!(out, "{},{},{},{}", k, g, z.re, z.im)?;
                    }
                }
            }
            ExportFormat::Svg => {
                let mut min_x = f64::INFINITY;
                let mut max_x = f64::NEG_INFINITY;
                let mut min_y = f64::INFINITY;
                let mut max_y = f64::NEG_INFINITY;
                for z in branches.iter().flatten() {
                    min_x = min_x.min(z.re);
                    max_x = max_x.max(z.re);
                    // The vertical axis points down in this format.
                    min_y = min_y.min(-z.im);
                    max_y = max_y.max(-z.im);
                }
                let pad = 0.05 * (max_x - min_x).max(max_y - min_y).max(1e-12);
                let (x0, y0) = (min_x - pad, min_y - pad);
                let (w, h) = (max_x - min_x + 2.0 * pad, max_y - min_y + 2.0 * pad);
                writeln!(
                    out,
                    "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
                    x0, y0, w, h
                )?;
                let stroke = w.max(h) / 600.0;
                for (k, branch) in branches.iter().enumerate() {
                    let hue = (k * 360) / branches.len().max(1);
                    write!(
                        out,
                        "  <polyline fill=\"none\" stroke=\"hsl({hue},70%,45%)\" stroke-width=\"{stroke}\" points=\""
                    )?;
                    for (j, z) in branch.iter().enumerate() {
                        if j > 0 {
                            out.write_all(b" ")?;
                        }
                        write!(out, "{},{}", z.re, -z.im)?;
                    }
                    out.write_all(b"\"/>\n")?;
                }
                out.write_all(b"</svg>\n")?;
            }
            ExportFormat::Json => {
                let doc = CurveDocument {
                    params: &self.params,
                    branches: branches
                        .iter()
                        .map(|b| b.iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                    asymptotics: self.asymptotics(),
                };
                serde_json::to_writer_pretty(&mut *out, &doc)
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}
