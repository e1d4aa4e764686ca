use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Global absolute tolerance.
    pub global: f64,
    /// Used when validating tensor invariants at construction.
    pub invariant: f64,
    /// Eigenvalue slack for positivity checks, relative to the tensor norm.
    pub eig_slack: f64,
    /// Relative residual accepted by attainment checks.
    pub residual: f64,
    /// Stopping residual for fixed-point iterations.
    pub fixed_point: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            global: 1e-9,
            invariant: 1e-10,
            eig_slack: 1e-8,
            residual: 1e-8,
            fixed_point: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl Tolerances {
    /// Defaults with the global tolerance replaced.
    pub fn with_global(global: f64) -> Self {
        Tolerances {
            global,
            ..Default::default()
        }
    }
}

/// Controls for the boundary search of the translation sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub rays: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { rays: 720 }
    }
}
