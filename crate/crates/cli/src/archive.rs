//! The solution archive: a self-describing JSON snapshot of one solve.
//!
//! An archive stores the parameters, the grid nodes, the perturbation
//! samples (values and log-derivatives of both components), a summary of
//! the iteration, and the measured asymptotic constants.  `export` and
//! `field` rebuild the full solution object from it, so a solve has to run
//! only once per parameter set.
//!
//! Serialization is deterministic: field order is fixed by the struct
//! declarations and floats print in shortest round-trip form, so equal
//! configurations produce byte-identical archives.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spiralsheet::geometry::{Asymptotics, SpiralSolution};
use spiralsheet::solver::SolveReport;
use spiralsheet::{FieldPair, Grid, PairKind, Params, SampledField};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionArchive {
    pub params: Params,
    /// Grid node angles, outermost first (redundant with `params.grid`,
    /// kept so the sample columns are readable without recomputation).
    pub grid: Vec<f64>,
    pub perturbation: PerturbationSamples,
    pub report: ReportSummary,
    pub asymptotics: Asymptotics,
}

/// Node samples of the perturbation pair `(r, γ)` and their derivatives
/// in `θ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSamples {
    pub r: Vec<f64>,
    pub r_deriv: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_deriv: Vec<f64>,
}

/// Iteration diagnostics.  Scalars that may be undefined (for example the
/// residual of a failed solve) are optional so the JSON stays loadable;
/// `None` means "not available", never "zero".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSummary {
    pub converged: bool,
    /// Why the solve stopped early, when it did.
    pub failure: Option<String>,
    pub steps: Vec<f64>,
    pub iterate_norms: Vec<f64>,
    pub residual: Option<f64>,
    pub contraction_ratio: Option<f64>,
    pub series_truncated: bool,
    pub truncation_estimate: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl SolutionArchive {
    /// Snapshot a finished solve.
    pub fn from_report(params: &Params, report: &SolveReport) -> Result<SolutionArchive, String> {
        let summary = ReportSummary {
            converged: report.converged,
            failure: None,
            steps: report.steps.clone(),
            iterate_norms: report.iterate_norms.clone(),
            residual: finite(report.residual),
            contraction_ratio: finite(report.contraction_ratio),
            series_truncated: report.series_truncated,
            truncation_estimate: finite(report.truncation_estimate),
        };
        Self::assemble(params, &report.x, summary)
    }

    /// Snapshot the base (zero-perturbation) profile after a failed solve,
    /// recording why.  The geometry and velocity commands still work on the
    /// result; they just describe the unperturbed spiral family member.
    pub fn from_failure(
        params: &Params,
        reason: String,
        history: Vec<f64>,
    ) -> Result<SolutionArchive, String> {
        let grid = Grid::new(params.grid).map_err(|e| e.to_string())?;
        let zero = FieldPair::zero(grid, PairKind::DomainX);
        let summary = ReportSummary {
            converged: false,
            failure: Some(reason),
            steps: history,
            iterate_norms: Vec::new(),
            residual: None,
            contraction_ratio: None,
            series_truncated: false,
            truncation_estimate: None,
        };
        Self::assemble(params, &zero, summary)
    }

    fn assemble(
        params: &Params,
        pair: &FieldPair,
        report: ReportSummary,
    ) -> Result<SolutionArchive, String> {
        let solution =
            SpiralSolution::new(pair.clone(), params).map_err(|e| e.to_string())?;
        let asymptotics = solution.asymptotics();
        Ok(SolutionArchive {
            params: *params,
            grid: pair.grid().nodes.clone(),
            perturbation: PerturbationSamples {
                r: pair.first.values().to_vec(),
                r_deriv: pair.first.derivs().to_vec(),
                gamma: pair.second.values().to_vec(),
                gamma_deriv: pair.second.derivs().to_vec(),
            },
            report,
            asymptotics,
        })
    }

    /// Rebuild the solution object the archive describes.
    pub fn solution(&self) -> Result<SpiralSolution, String> {
        let grid = Grid::new(self.params.grid).map_err(|e| e.to_string())?;
        if grid.len() != self.perturbation.r.len() {
            return Err(format!(
                "archive grid mismatch: params describe {} nodes, samples have {}",
                grid.len(),
                self.perturbation.r.len()
            ));
        }
        let p = &self.perturbation;
        let r = SampledField::from_parts(grid.clone(), p.r.clone(), p.r_deriv.clone())
            .map_err(|e| e.to_string())?;
        let gamma = SampledField::from_parts(grid, p.gamma.clone(), p.gamma_deriv.clone())
            .map_err(|e| e.to_string())?;
        let pair = FieldPair::new(r, gamma, PairKind::DomainX);
        SpiralSolution::new(pair, &self.params).map_err(|e| e.to_string())
    }

    pub fn save(&self, path: &Path) -> Result<(), String> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| format!("cannot encode archive: {e}"))?;
        std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    pub fn load(path: &Path) -> Result<SolutionArchive, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read archive {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid archive: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> Params {
        let mut params = Params::default();
        params.m = 8;
        params.grid.n_nodes = 96;
        params.grid.theta_min = 1e-3;
        params.grid.theta_max = 1e3;
        params
    }

    #[test]
    fn failure_archive_round_trips_through_json() {
        let params = small_params();
        let archive =
            SolutionArchive::from_failure(&params, "no contraction at m = 8".into(), vec![0.9])
                .unwrap();
        let text = serde_json::to_string(&archive).unwrap();
        let back: SolutionArchive = serde_json::from_str(&text).unwrap();
        assert_eq!(back.grid.len(), 96);
        assert_eq!(back.report.failure.as_deref(), Some("no contraction at m = 8"));
        assert!(back.report.residual.is_none());
        let solution = back.solution().unwrap();
        // Zero perturbation reconstructs the pure power-law base profile.
        let r1 = solution.r_tilde(1.0);
        assert!((r1 - 1.0).abs() < 1e-12, "r̃(1) = {r1}");
    }

    #[test]
    fn reconstruction_rejects_sample_count_mismatch() {
        let params = small_params();
        let mut archive =
            SolutionArchive::from_failure(&params, "test".into(), Vec::new()).unwrap();
        archive.perturbation.r.pop();
        // Make the length error unambiguous rather than a from_parts panic.
        archive.perturbation.r_deriv.pop();
        let err = match archive.solution() {
            Ok(_) => panic!("mismatched sample count was accepted"),
            Err(e) => e,
        };
        assert!(err.contains("mismatch"), "got: {err}");
    }
}
