//! Corners B and C: trajectories on the upper bulk bound, their self-intersections,
//! and the small-angle family used to map which crystals they reach.

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundsRectangle, Corner};

pub mod asymptotic;
pub mod coverage;
pub mod curve;
pub mod trajectory;

pub use asymptotic::{
    asymptotic_seed, looping_zi_range, positive_zi_range, refine_from_seed, self_intersection,
    zr_squared, AsymptoticFamily, AsymptoticSeed, LoopReport, Portion, SelfIntersection, ZiRange,
};
pub use coverage::{disk_coverage_sweep, CoverageOptions, CoverageReport, CoverageSample};
pub use curve::{find_crossings, refine_intersection, winding_number, Intersection};
pub use trajectory::{
    bilinear_residual, c1_along, crystal_field, find_real_phi_thetas, find_real_phi_thetas_with,
    inverse_phi_reciprocal_form, phi_of_theta, solve_for_crystal, trace_trajectory,
    trajectory_crossings, upper_frame, BcConstruction, TrajectoryB, TrajectoryCrossing,
    TrajectorySample,
};

/// Weights from the upper-bulk translations. `alpha` enters corner B, `beta` and
/// `t_ratio = t1/t2` (of the lower shear bound) enter corner C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub t_ratio: f64,
}

impl MixParams {
    pub fn from_rectangle(rect: &BoundsRectangle) -> MixParams {
        MixParams {
            alpha1: rect.alpha1,
            alpha2: 1.0 - rect.alpha1,
            beta1: rect.beta1,
            beta2: 1.0 - rect.beta1,
            t_ratio: rect.shear_lower.t1 / rect.shear_lower.t2,
        }
    }

    /// Both weight pairs set to `(alpha1, 1 - alpha1)` and unit `t_ratio`.
    pub fn for_alpha(alpha1: f64) -> MixParams {
        MixParams {
            alpha1,
            alpha2: 1.0 - alpha1,
            beta1: alpha1,
            beta2: 1.0 - alpha1,
            t_ratio: 1.0,
        }
    }

    /// The weight pair entering the given corner.
    pub fn weights(&self, corner: Corner) -> (f64, f64) {
        match corner {
            Corner::C => (self.beta1, self.beta2),
            _ => (self.alpha1, self.alpha2),
        }
    }
}
