//! Runtime invariant suites behind the `check` subcommand.
//!
//! Each suite re-measures a family of identities the library is built on —
//! closed-form residuals, operator inverses, dual evaluation routes,
//! scaling laws — at the configured parameters and prints one row per
//! check with the measured constant next to its bound.  The random
//! families are driven by the seed from the config, so a run is exactly
//! reproducible.
//!
//! These are smoke panels for a parameter set the test suite never saw,
//! not a replacement for the test suite: bounds here are deliberately
//! looser than the pinned test tolerances.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spiralsheet::kaden::{family_residual, SpiralFamily};
use spiralsheet::norms::norm_x;
use spiralsheet::singular::{apply_i_m, i_m_direct};
use spiralsheet::solver::solve;
use spiralsheet::velocity::VelocityField;
use spiralsheet::{
    linear, nonlinear, norms, Error, FieldPair, Grid, PairKind, Params, SampledField,
    SpiralSolution,
};

use crate::config::RunConfig;

pub const SUITES: &[&str] = &[
    "kaden",
    "norms",
    "linear",
    "nonlinear",
    "singular",
    "solver",
    "geometry",
    "velocity",
];

struct Row {
    suite: &'static str,
    name: String,
    measured: String,
    bound: String,
    pass: bool,
}

#[derive(Default)]
struct Table {
    rows: Vec<Row>,
}

impl Table {
    /// `measured ≤ bound`.
    fn le(&mut self, suite: &'static str, name: &str, measured: f64, bound: f64) {
        self.rows.push(Row {
            suite,
            name: name.to_string(),
            measured: format!("{measured:.3e}"),
            bound: format!("<= {bound:.1e}"),
            pass: measured <= bound && measured.is_finite(),
        });
    }

    /// `lo ≤ measured ≤ hi`.
    fn within(&mut self, suite: &'static str, name: &str, measured: f64, lo: f64, hi: f64) {
        self.rows.push(Row {
            suite,
            name: name.to_string(),
            measured: format!("{measured:.3e}"),
            bound: format!("in [{lo}, {hi}]"),
            pass: measured >= lo && measured <= hi,
        });
    }

    /// A yes/no fact.
    fn claim(&mut self, suite: &'static str, name: &str, detail: String, pass: bool) {
        self.rows.push(Row {
            suite,
            name: name.to_string(),
            measured: detail,
            bound: "holds".into(),
            pass,
        });
    }

    fn print(&self) {
        println!(
            "{:<10} {:<52} {:>16} {:>16}  {}",
            "suite", "check", "measured", "bound", "verdict"
        );
        println!("{}", "-".repeat(10 + 1 + 52 + 1 + 16 + 1 + 16 + 2 + 7));
        for row in &self.rows {
            println!(
                "{:<10} {:<52} {:>16} {:>16}  {}",
                row.suite,
                row.name,
                row.measured,
                row.bound,
                if row.pass { "pass" } else { "FAIL" }
            );
        }
    }

    fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Run the named suite (or `all`) and print the table.
/// Returns whether every row passed.
pub fn run_suite(config: &RunConfig, suite: &str) -> Result<bool, String> {
    let known = |s: &str| SUITES.contains(&s);
    let selected: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if known(suite) {
        vec![suite]
    } else {
        return Err(format!(
            "unknown check suite `{suite}` (expected one of: {}, all)",
            SUITES.join(", ")
        ));
    };

    let mut table = Table::default();
    for name in selected {
        let result = match name {
            "kaden" => suite_kaden(config, &mut table),
            "norms" => suite_norms(config, &mut table),
            "linear" => suite_linear(config, &mut table),
            "nonlinear" => suite_nonlinear(config, &mut table),
            "singular" => suite_singular(config, &mut table),
            "solver" => suite_solver(config, &mut table),
            "geometry" => suite_geometry(config, &mut table),
            "velocity" => suite_velocity(config, &mut table),
            _ => unreachable!(),
        };
        result.map_err(|e| format!("suite {name}: {e}"))?;
    }
    table.print();
    let pass = table.all_pass();
    let n = table.rows.len();
    if pass {
        println!("{n} checks, all pass");
    } else {
        let failed = table.rows.iter().filter(|r| !r.pass).count();
        println!("{failed} of {n} checks FAILED");
    }
    Ok(pass)
}

// ---------------------------------------------------------------- families

/// Sum of log-Gaussian bumps and its `d/d ln θ`, as closures over the terms
/// `(amplitude, center in ln θ, width in ln θ)`.
fn bumps(terms: &[(f64, f64, f64)], ln_theta: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &(a, c, w) in terms {
        let u = (ln_theta - c) / w;
        let b = a * (-0.5 * u * u).exp();
        value += b;
        slope += -u / w * b;
    }
    (value, slope)
}

/// A smooth compactly-concentrated field `θ^power × (bump sum)` with its
/// analytic derivative.
fn power_bump_field(
    grid: &Arc<Grid>,
    power: f64,
    terms: &[(f64, f64, f64)],
) -> Result<SampledField, Error> {
    let value = |theta: f64| theta.powf(power) * bumps(terms, theta.ln()).0;
    let deriv = |theta: f64| {
        let (v, s) = bumps(terms, theta.ln());
        theta.powf(power - 1.0) * (power * v + s)
    };
    SampledField::make(grid, value, Some(&deriv))
}

/// Random bump terms placed safely inside the grid.
fn random_terms(rng: &mut ChaCha8Rng, grid: &Grid, scale: f64) -> Vec<(f64, f64, f64)> {
    let lo = grid.spec.theta_min.ln();
    let hi = grid.spec.theta_max.ln();
    (0..3)
        .map(|_| {
            let w = rng.gen_range(0.5..0.9);
            let c = rng.gen_range(lo + 6.0 * w..hi - 6.0 * w);
            let a = scale * rng.gen_range(-1.0..1.0);
            (a, c, w)
        })
        .collect()
}

/// A random pair of the requested kind, components weighted so the pair
/// lies in the operator domains.
fn random_pair(
    rng: &mut ChaCha8Rng,
    grid: &Arc<Grid>,
    params: &Params,
    kind: PairKind,
    scale: f64,
) -> Result<FieldPair, Error> {
    let mu = params.mu;
    let (p1, p2) = match kind {
        PairKind::DomainX => (-mu, 1.0 - 2.0 * mu),
        PairKind::ImageY => (-2.0 * mu, 1.0 - 2.0 * mu),
    };
    let first = power_bump_field(grid, p1, &random_terms(rng, grid, scale))?;
    let second = power_bump_field(grid, p2, &random_terms(rng, grid, scale))?;
    Ok(FieldPair::new(first, second, kind))
}

fn check_angles(params: &Params, count: usize) -> Vec<f64> {
    let lo: f64 = (params.grid.theta_min * 10.0).max(1e-3);
    let hi: f64 = (params.grid.theta_max / 10.0).min(1e3);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

// ----------------------------------------------------------------- suites

/// The base spiral family satisfies the governing equation identically.
fn suite_kaden(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let mu = config.params.mu;
    let angles = check_angles(&config.params, 16);
    let rel_sup = |family: &SpiralFamily| -> Result<f64, String> {
        let mut worst = 0.0_f64;
        for &theta in &angles {
            let res = family_residual(family, theta).map_err(|e| e.to_string())?;
            let scale = mu * family.r(theta).powi(2);
            worst = worst.max(res.norm() / scale);
        }
        Ok(worst)
    };
    let standard = SpiralFamily::standard(mu);
    table.le(
        "kaden",
        "standard profile residual, 16 angles (relative)",
        rel_sup(&standard)?,
        1e-12,
    );
    let c1 = 1.7;
    let member = SpiralFamily::family(mu, c1, -2.0 * PI * c1 * c1).map_err(|e| e.to_string())?;
    table.le(
        "kaden",
        "self-similar family member residual (relative)",
        rel_sup(&member)?,
        1e-12,
    );
    Ok(())
}

/// Scaling identities of the weighted norms.
fn suite_norms(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let params = &config.params;
    let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.checks.seed);
    let mut homogeneity = 0.0_f64;
    let mut triangle = f64::NEG_INFINITY;
    for _ in 0..5 {
        let x = random_pair(&mut rng, &grid, params, PairKind::DomainX, 1.0)
            .map_err(|e| e.to_string())?;
        let y = random_pair(&mut rng, &grid, params, PairKind::DomainX, 1.0)
            .map_err(|e| e.to_string())?;
        let c: f64 = rng.gen_range(-40.0..40.0);
        let nx = norm_x(&x, params).map_err(|e| e.to_string())?;
        let ny = norm_x(&y, params).map_err(|e| e.to_string())?;
        let scaled = norm_x(&x.scale(c), params).map_err(|e| e.to_string())?;
        homogeneity = homogeneity.max((scaled - c.abs() * nx).abs() / (c.abs() * nx));
        let sum = norm_x(&x.add_scaled(&y, 1.0).map_err(|e| e.to_string())?, params)
            .map_err(|e| e.to_string())?;
        triangle = triangle.max((sum - nx - ny) / (nx + ny));
    }
    table.le(
        "norms",
        "absolute homogeneity gap over 5 random pairs",
        homogeneity,
        1e-12,
    );
    table.le(
        "norms",
        "triangle inequality excess over 5 random pairs",
        triangle,
        1e-12,
    );
    Ok(())
}

/// The closed-form inverse of the linearized local operator.
fn suite_linear(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let params = &config.params;
    let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.checks.seed ^ 0x4c49_4e45);
    let mut forward = 0.0_f64;
    let mut backward = 0.0_f64;
    for _ in 0..5 {
        let x = random_pair(&mut rng, &grid, params, PairKind::DomainX, 1.0)
            .map_err(|e| e.to_string())?;
        let lx = linear::apply_l(&x, params).map_err(|e| e.to_string())?;
        let round = linear::apply_m(&lx, params).map_err(|e| e.to_string())?;
        let gap = norm_x(&round.sub(&x).map_err(|e| e.to_string())?, params)
            .map_err(|e| e.to_string())?;
        forward = forward.max(gap / norm_x(&x, params).map_err(|e| e.to_string())?);

        let y = random_pair(&mut rng, &grid, params, PairKind::ImageY, 1.0)
            .map_err(|e| e.to_string())?;
        let my = linear::apply_m(&y, params).map_err(|e| e.to_string())?;
        let round = linear::apply_l(&my, params).map_err(|e| e.to_string())?;
        let gap = norms::norm_y(&round.sub(&y).map_err(|e| e.to_string())?, params)
            .map_err(|e| e.to_string())?;
        backward = backward.max(gap / norms::norm_y(&y, params).map_err(|e| e.to_string())?);
    }
    table.le(
        "linear",
        "inverse-then-forward gap over 5 random pairs",
        forward,
        1e-6,
    );
    table.le(
        "linear",
        "forward-then-inverse gap over 5 random pairs",
        backward,
        1e-6,
    );
    Ok(())
}

/// The full local operator: exact zero at the base profile, quadratic
/// remainder beyond its linearization.
fn suite_nonlinear(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let params = &config.params;
    let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
    let zero = FieldPair::zero(grid.clone(), PairKind::DomainX);
    let n0 = nonlinear::apply_n(&zero, params).map_err(|e| e.to_string())?;
    table.le(
        "nonlinear",
        "image norm at the base profile",
        norms::norm_y(&n0, params).map_err(|e| e.to_string())?,
        1e-10,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(config.checks.seed ^ 0x4e4f_4e4c);
    let pair = random_pair(&mut rng, &grid, params, PairKind::DomainX, 1.0)
        .map_err(|e| e.to_string())?;
    let base_norm = norm_x(&pair, params).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for size in [1e-2, 1e-3] {
        let x = pair.scale(size / base_norm);
        let nx = nonlinear::apply_n(&x, params).map_err(|e| e.to_string())?;
        let lx = linear::apply_l(&x, params).map_err(|e| e.to_string())?;
        let rem = norms::norm_y(&nx.sub(&lx).map_err(|e| e.to_string())?, params)
            .map_err(|e| e.to_string())?;
        ratios.push(rem / (size * size));
    }
    table.within(
        "nonlinear",
        "quadratic remainder coefficient drift, sizes 1e-2/1e-3",
        ratios[0] / ratios[1],
        0.5,
        2.0,
    );
    Ok(())
}

/// The branch-interaction series against the direct principal-value route,
/// and its inverse-square decay in the symmetry order.
fn suite_singular(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let params = &config.params;
    let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
    let zero = FieldPair::zero(grid, PairKind::DomainX);
    let image = apply_i_m(&zero, params).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for theta in [0.7, 2.0] {
        let series = Complex64::new(
            image.pair.first.eval(theta).map_err(|e| e.to_string())?,
            image.pair.second.eval(theta).map_err(|e| e.to_string())?,
        );
        let direct = i_m_direct(&zero, params, theta).map_err(|e| e.to_string())?;
        worst = worst.max((series - direct).norm() / direct.norm());
    }
    table.le(
        "singular",
        "series vs direct principal value at two angles",
        worst,
        1e-4,
    );

    let norm_here = norms::norm_y(&image.pair, params).map_err(|e| e.to_string())?;
    let mut doubled = *params;
    doubled.m = params.m * 2;
    let image2 = apply_i_m(&zero, &doubled).map_err(|e| e.to_string())?;
    let norm_doubled = norms::norm_y(&image2.pair, &doubled).map_err(|e| e.to_string())?;
    table.within(
        "singular",
        "interaction norm decay: 4·‖at 2m‖ / ‖at m‖",
        4.0 * norm_doubled / norm_here,
        0.5,
        2.0,
    );
    Ok(())
}

/// The outer fixed point at the configured parameters.
fn suite_solver(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    match solve(&config.params) {
        Ok(report) => {
            table.claim(
                "solver",
                "fixed point converged",
                format!("{} outer steps", report.steps.len()),
                report.converged,
            );
            table.le(
                "solver",
                "worst contraction ratio after burn-in",
                report.contraction_ratio,
                0.5,
            );
            table.le(
                "solver",
                "equation residual at the fixed point",
                report.residual,
                1e-6,
            );
        }
        Err(Error::ContractionFailure { context, history }) => {
            table.claim(
                "solver",
                "fixed point converged",
                format!("no contraction ({context}); steps {history:?}"),
                false,
            );
        }
        Err(e) => return Err(e.to_string()),
    }
    Ok(())
}

/// Shape of the reconstructed base spiral.
fn suite_geometry(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let params = &config.params;
    let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
    let zero = FieldPair::zero(grid.clone(), PairKind::DomainX);
    let solution = SpiralSolution::new(zero, params).map_err(|e| e.to_string())?;
    let radius_monotone = grid
        .nodes
        .windows(2)
        .all(|w| solution.r_tilde(w[1]) < solution.r_tilde(w[0]));
    table.claim(
        "geometry",
        "radius strictly decreasing toward the center",
        format!("{} nodes", grid.len()),
        radius_monotone,
    );
    let gamma_shape = grid.nodes.windows(2).all(|w| {
        solution.gamma_tilde(w[1]) > solution.gamma_tilde(w[0]) && solution.gamma_tilde(w[1]) < 0.0
    }) && solution.gamma_tilde(grid.nodes[0]) < 0.0;
    table.claim(
        "geometry",
        "circulation negative, strictly increasing inward",
        format!("{} nodes", grid.len()),
        gamma_shape,
    );
    let a = solution.asymptotics();
    table.le(
        "geometry",
        "center limit of θ^μ · radius, gap to 1",
        (a.center_limit - 1.0).abs(),
        1e-2,
    );
    let mut round = 0.0_f64;
    for theta in check_angles(params, 7) {
        let back = solution
            .theta_of_gamma(solution.gamma_tilde(theta))
            .map_err(|e| e.to_string())?;
        round = round.max((back - theta).abs() / theta);
    }
    table.le(
        "geometry",
        "angle ↔ circulation round trip over 7 angles",
        round,
        1e-8,
    );
    Ok(())
}

/// Structure of the induced velocity of the base profile.
fn suite_velocity(config: &RunConfig, table: &mut Table) -> Result<(), String> {
    let params = &config.params;
    let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
    let zero = FieldPair::zero(grid, PairKind::DomainX);
    let field = VelocityField::new(&zero, params).map_err(|e| e.to_string())?;

    let rot = Complex64::from_polar(1.0, 2.0 * PI / params.m as f64);
    let mut equivariance = 0.0_f64;
    for z in [
        Complex64::new(0.31, 0.17),
        Complex64::new(-0.08, 0.52),
        Complex64::new(1.4, -0.6),
    ] {
        let v = field.velocity_with_tol(z, 1e-8).map_err(|e| e.to_string())?;
        let v_rot = field
            .velocity_with_tol(rot * z, 1e-8)
            .map_err(|e| e.to_string())?;
        equivariance = equivariance.max((v_rot - rot * v).norm() / v.norm());
    }
    table.le(
        "velocity",
        "m-fold rotation equivariance at 3 points",
        equivariance,
        1e-6,
    );

    let rho = 0.2;
    let loop_integral = field.circulation(rho, 1024).map_err(|e| e.to_string())?;
    let theta0 = field.radius_angle(rho).map_err(|e| e.to_string())?;
    let enclosed = 2.0 * PI * theta0.powf(1.0 - 2.0 * params.mu);
    table.le(
        "velocity",
        "loop integral vs enclosed sheet circulation at ρ=0.2",
        (loop_integral.abs() - enclosed).abs() / enclosed,
        1e-2,
    );

    let exponent = 1.0 - 1.0 / params.mu;
    let scaled = |rho: f64| -> Result<f64, String> {
        let v = field
            .velocity_with_tol(Complex64::from_polar(rho, 0.37), 1e-6)
            .map_err(|e| e.to_string())?;
        Ok(v.norm() / rho.powf(exponent))
    };
    table.within(
        "velocity",
        "scaling-compensated speed drift over one decade",
        scaled(3.0)? / scaled(0.3)?,
        0.3,
        3.0,
    );
    Ok(())
}
