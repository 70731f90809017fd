//! Numerical tolerances shared by every stage of the pipeline.
//!
//! Downstream modules read these values; none of them keeps a private copy.

use serde::{Deserialize, Serialize};

/// Default finite-difference step for double precision.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Largest intrinsic dimension accepted by the eigen-solvers.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Finite-difference step.
    pub step: f64,
    /// Relative symmetry tolerance for second derivatives: `tol_sym * (1 + |d2|)`.
    pub tol_sym: f64,
    /// Smallest eigenvalue a metric must exceed to count as positive definite.
    pub tol_pd: f64,
    /// Single-linkage gap below which principal curvatures merge.
    pub cluster_tol: f64,
    /// Magnitude below which a principal curvature counts as zero.
    pub tol_zero: f64,
    /// Final bracket width for root bisection.
    pub tol_root: f64,
    /// Bound on the normalized null component of the mean curvature vector.
    pub tol_marginal: f64,
    /// Residual allowed on quadric and product constraints.
    pub tol_constraint: f64,
    /// Off-diagonal threshold terminating the Jacobi sweeps.
    pub tol_eigen: f64,
    /// Neighbour jump ratio that breaks a root thread.
    pub thread_jump_factor: f64,
    /// Fraction of excluded samples above which a report is inconclusive.
    pub max_excluded_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            tol_sym: 1e-5,
            tol_pd: 1e-9,
            cluster_tol: 1e-5,
            tol_zero: 1e-7,
            tol_root: 1e-14,
            tol_marginal: 1e-5,
            tol_constraint: 1e-8,
            tol_eigen: 1e-15,
            thread_jump_factor: 10.0,
            max_excluded_fraction: 0.5,
        }
    }
}

impl Tolerances {
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_tol_marginal(mut self, tol: f64) -> Self {
        self.tol_marginal = tol;
        self
    }

    /// Checks that every tolerance is positive and finite.
    pub fn validate(&self) -> crate::Result<()> {
        let fields = [
            ("step", self.step),
            ("tol_sym", self.tol_sym),
            ("tol_pd", self.tol_pd),
            ("cluster_tol", self.cluster_tol),
            ("tol_zero", self.tol_zero),
            ("tol_root", self.tol_root),
            ("tol_marginal", self.tol_marginal),
            ("tol_constraint", self.tol_constraint),
            ("tol_eigen", self.tol_eigen),
            ("thread_jump_factor", self.thread_jump_factor),
            ("max_excluded_fraction", self.max_excluded_fraction),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::GeomError::Argument(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}
