//! Logarithmic angle grid.
//!
//! All sampled profiles live on one strictly increasing, log-uniform grid.
//! Most of the numerics happen in the variable `x = ln(theta)`, where the
//! grid is uniform with step `log_step`; the node array and its logarithms
//! are precomputed once and shared behind an `Arc`.

use std::sync::Arc;

use crate::error::Result;
use crate::params::GridSpec;

#[derive(Debug)]
pub struct Grid {
    pub spec: GridSpec,
    /// Strictly increasing node angles `theta_i`.
    pub nodes: Vec<f64>,
    /// `ln(theta_i)`, uniformly spaced.
    pub log_nodes: Vec<f64>,
    /// Uniform spacing of `log_nodes`.
    pub log_step: f64,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let n = spec.n_nodes;
        let x0 = spec.theta_min.ln();
        let x1 = spec.theta_max.ln();
        let h = (x1 - x0) / (n - 1) as f64;
        let log_nodes: Vec<f64> = (0..n).map(|i| x0 + h * i as f64).collect();
        let mut nodes: Vec<f64> = log_nodes.iter().map(|x| x.exp()).collect();
        // Pin the endpoints so the seam models anchor at exactly the bounds.
        nodes[0] = spec.theta_min;
        nodes[n - 1] = spec.theta_max;
        Ok(Arc::new(Grid {
            spec,
            nodes,
            log_nodes,
            log_step: h,
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the cell `[theta_i, theta_{i+1}]` containing `theta`, clamped
    /// to the grid; callers must have checked `theta > 0`.
    pub fn cell_of(&self, theta: f64) -> usize {
        let x = theta.ln();
        let i = ((x - self.log_nodes[0]) / self.log_step).floor() as isize;
        i.clamp(0, self.len() as isize - 2) as usize
    }
}
