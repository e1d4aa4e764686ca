//! Corners A (lower bulk, upper shear) and D (lower bulk, lower shear).
//!
//! Both corners reduce to the same map `(y, tau) -> e1` from the admissible region
//! of layering parameters onto the region of crystal coordinates, differing only in
//! the scale (`k + t1 + t2` for A, `k + 1/t1 + 1/t2` for D). Inverting the map for a
//! given crystal yields an orthotropic target tensor together with the layering
//! weights of the hierarchical laminate that realizes it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rho_core::{c, check_jump, cr, rotate_vector, JumpKind, RhoVector, C64, ONE, ZERO};
use crate::roots::bisect;

/// Which of the two corners sharing the lower bulk bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "corner")]
pub enum CornerScale {
    /// `lambda = k + t1 + t2` from the upper shear translation.
    A { lambda: f64 },
    /// `eta = k + 1/t1 + 1/t2` and `t2/t1` from the lower shear translation.
    D { eta: f64, t_ratio: f64 },
}

impl CornerScale {
    pub fn scale(&self) -> f64 {
        match *self {
            CornerScale::A { lambda } => lambda,
            CornerScale::D { eta, .. } => eta,
        }
    }
}

/// Sign class of the layering weight `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Negative,
    AboveOne,
    /// `0 <= p <= 1`: a laminate of two reflected orthotropic layers, no self-similar form.
    Interior,
}

/// Volume fractions of the two equivalent hierarchical laminates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fractions {
    /// Crystal in the crystal/mirror pair.
    pub crystal_in_pair: f64,
    /// Mirror crystal in the crystal/mirror pair.
    pub mirror_in_pair: f64,
    /// Crystal at each level of the self-similar laminate.
    pub crystal_relaminate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerParams {
    pub corner: CornerScale,
    /// Crystal coordinate reached by the trajectory at `(y, tau)`.
    pub e1: C64,
    pub y: f64,
    pub tau: f64,
    /// Half-angle between the two layered orientations, in `(0, pi/2)`.
    pub theta: f64,
    pub p: f64,
    pub branch: Branch,
    /// Real first coordinate of the orthotropic target.
    pub e1_prime: f64,
    /// First coordinate of the target's optimal shear field (`v1'` for A, `w1'` for D).
    pub field1_prime: f64,
    pub fractions: Option<Fractions>,
    /// Residual of the bilinear identity on the averaged fields.
    pub identity_residual: f64,
}

impl CornerParams {
    /// Fails with `BranchAmbiguity` when no self-similar construction exists.
    pub fn self_similar_fractions(&self) -> Result<Fractions> {
        self.fractions.ok_or(Error::BranchAmbiguity { p: self.p })
    }
}

/// `scale (2y+1) (1 + i tau (1 + 1/y)) (1 - i tau) / (2 (1 + i tau))`
pub fn e1_forward(y: f64, tau: f64, scale: f64) -> C64 {
    let a = 1.0 + 1.0 / y;
    cr(scale * (2.0 * y + 1.0)) * c(1.0, tau * a) * c(1.0, -tau) / (cr(2.0) * c(1.0, tau))
}

/// `Re(e1/scale) <= 1/2` with nonzero real and imaginary parts.
pub fn in_omega(e1: C64, scale: f64, tol: f64) -> bool {
    let z = e1 / scale;
    z.re <= 0.5 + tol && z.re.abs() > tol && z.im.abs() > tol
}

/// Whether `(y, tau)` lies in the admissible parameter set.
pub fn in_sigma(y: f64, tau: f64) -> bool {
    y > -1.0 && y < 0.0 && tau * tau >= (1.0 - y) / (1.0 + y)
}

/// Logistic grid on `(lo, hi)`, dense near both ends.
fn logistic_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let u = -30.0 + 60.0 * i as f64 / (n - 1) as f64;
            lo + (hi - lo) / (1.0 + (-u).exp())
        })
        .filter(|&y| y > lo && y < hi)
        .collect()
}

/// Solves `e1_forward(y, tau, scale) = e1` for `(y, tau)` in the admissible set.
///
/// For each `y` the modulus equation fixes `|tau|`, and the sign follows from the
/// sign of `Im(e1)`; the remaining scalar equation in `y` is scanned on both sides
/// of `y = -1/2` and refined by bisection.
pub fn invert_e1(e1: C64, scale: f64) -> Result<(f64, f64)> {
    if !in_omega(e1, scale, 0.0) {
        return Err(Error::NotInOmega {
            re: e1.re,
            im: e1.im,
        });
    }
    let z = e1 / scale;
    let m = z.norm();
    let tau_of = |y: f64| {
        let a = 1.0 + 1.0 / y;
        let b = 2.0 * y + 1.0;
        let t2 = (4.0 * m * m / (b * b) - 1.0) / (a * a);
        t2.max(0.0).sqrt() * z.im.signum() * b.signum()
    };
    let g = |y: f64| e1_forward(y, tau_of(y), 1.0).re - z.re;
    let low = if m < 0.5 {
        (-1.0f64).max(-1.0 / (2.0 * (1.0 - m)))
    } else {
        -1.0
    };
    let intervals = [(low, -0.5), (-0.5, -1.0 / (2.0 * (1.0 + m)))];
    let mut best: Option<(f64, f64, f64)> = None;
    for (lo, hi) in intervals {
        if hi <= lo {
            continue;
        }
        let ys = logistic_grid(lo, hi, 4001);
        let gs: Vec<f64> = ys.iter().map(|&y| g(y)).collect();
        for k in 0..ys.len().saturating_sub(1) {
            if gs[k].signum() == gs[k + 1].signum() {
                continue;
            }
            let Some(y) = bisect(g, ys[k], ys[k + 1], 200) else {
                continue;
            };
            let tau = tau_of(y);
            let res = (e1_forward(y, tau, 1.0) - z).norm();
            let admissible =
                y > -1.0 && y < 0.0 && tau * tau >= (1.0 - y) / (1.0 + y) * (1.0 - 1e-9);
            if admissible && best.map_or(true, |b| res < b.2) {
                best = Some((y, tau, res));
            }
        }
    }
    match best {
        Some((y, tau, res)) if res <= 1e-6 * (1.0 + m) => Ok((y, tau)),
        _ => Err(Error::NoRoot),
    }
}

/// Builds the two-orientation layering at `(y, tau)` explicitly, checks field
/// compatibility and the bilinear identity, and derives the laminate parameters.
pub fn build_construction(y: f64, tau: f64, corner: CornerScale) -> Result<CornerParams> {
    if !(y > -1.0 && y < 0.0) {
        return Err(Error::InvalidInput(format!("y = {y} outside (-1, 0)")));
    }
    let b = 2.0 * y + 1.0;
    if b.abs() < 1e-12 {
        return Err(Error::DegenerateLine);
    }
    let scale = corner.scale();
    let theta = 0.5 * y.acos();
    let p = 0.5 * (tau / theta.tan() + 1.0);
    let e1_prime = scale * b / (2.0 * y);

    // Shear field of the orthotropic target and its compatible rotated pair.
    let (shear, field1_prime, jump_kind) = match corner {
        CornerScale::A { .. } => {
            let v1 = 1.0 / b;
            (
                RhoVector::new(cr(v1), cr(-1.0), ONE, ONE),
                v1,
                JumpKind::Stress,
            )
        }
        CornerScale::D { t_ratio, .. } => {
            let w1 = -t_ratio / b;
            (
                RhoVector::new(cr(w1), ONE, cr(t_ratio), ONE),
                w1,
                JumpKind::Displacement,
            )
        }
    };
    let s1 = rotate_vector(&shear, theta).scale(C64::from_polar(1.0, theta));
    let s2 = rotate_vector(&shear, -theta).scale(C64::from_polar(1.0, -theta));
    let jump = RhoVector(s1.0 - s2.0);
    if !check_jump(jump_kind, &jump, 1e-9) {
        return Err(Error::InvariantViolation {
            what: "shear-field jump",
            residual: jump.norm(),
        });
    }
    let strain = RhoVector::new(cr(e1_prime), cr(e1_prime), ZERO, ZERO);
    let (e_a, e_b) = (
        rotate_vector(&strain, theta),
        rotate_vector(&strain, -theta),
    );
    let e_jump = RhoVector(e_a.0 - e_b.0);
    if !check_jump(JumpKind::Strain, &e_jump, 1e-9) {
        return Err(Error::InvariantViolation {
            what: "strain jump",
            residual: e_jump.norm(),
        });
    }

    let avg = |a: &RhoVector, b: &RhoVector| RhoVector(a.0 * cr(p) + b.0 * cr(1.0 - p));
    // Rotation by -atan(tau) takes the averages into the normalized frame.
    let frame = -tau.atan();
    let shear_avg = rotate_vector(&avg(&s1, &s2), frame).scale((c(1.0, tau) * theta.cos()).inv());
    let strain_avg = rotate_vector(&avg(&e_a, &e_b), frame);
    let e1 = strain_avg.a1();
    let f1 = shear_avg.a1();

    let identity_residual = match corner {
        CornerScale::A { lambda } => (e1.conj() * f1 - e1 + lambda).norm(),
        CornerScale::D { eta, t_ratio } => (e1.conj() * f1 / t_ratio + e1 - eta).norm(),
    };
    let map_residual = (e1 - e1_forward(y, tau, scale)).norm();
    let tol = 1e-10 * (1.0 + scale.abs() + e1.norm() + f1.norm() * e1.norm());
    if identity_residual > tol {
        return Err(Error::InvariantViolation {
            what: "averaged-field identity",
            residual: identity_residual,
        });
    }
    if map_residual > tol {
        return Err(Error::InvariantViolation {
            what: "trajectory map",
            residual: map_residual,
        });
    }

    let (branch, fractions) = if p < 0.0 {
        let f = Fractions {
            crystal_in_pair: (1.0 - p) / (1.0 - 2.0 * p),
            mirror_in_pair: -p / (1.0 - 2.0 * p),
            crystal_relaminate: 1.0 / (1.0 - p),
        };
        (Branch::Negative, Some(f))
    } else if p > 1.0 {
        let f = Fractions {
            crystal_in_pair: p / (2.0 * p - 1.0),
            mirror_in_pair: (p - 1.0) / (2.0 * p - 1.0),
            crystal_relaminate: 1.0 / p,
        };
        (Branch::AboveOne, Some(f))
    } else {
        (Branch::Interior, None)
    };

    Ok(CornerParams {
        corner,
        e1,
        y,
        tau,
        theta,
        p,
        branch,
        e1_prime,
        field1_prime,
        fractions,
        identity_residual,
    })
}

/// Two-field scheme for a purely imaginary crystal coordinate: the crystal rotated
/// by `pi/2` layered against an isotropic medium at `(kappa-, mu+)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateScheme {
    pub stress_crystal: RhoVector,
    pub stress_medium: RhoVector,
    pub strain_crystal: RhoVector,
    pub strain_medium: RhoVector,
    pub stress_compatible: bool,
    pub strain_compatible: bool,
    /// Realized only as the limit of the self-similar scheme with a vanishing loop.
    pub effective_medium_limit: bool,
}

pub fn special_case_imaginary(e1: C64, k: f64, lambda: f64) -> Result<DegenerateScheme> {
    let size = e1.norm();
    if size == 0.0 || e1.re.abs() > 1e-12 * size {
        return Err(Error::InvalidInput(
            "expected a purely imaginary e1; real e1 means an orthotropic crystal".into(),
        ));
    }
    let e1 = c(0.0, e1.im);
    let h = cr(0.5 * k);
    let ratio = cr(lambda) / e1;
    let stress_crystal = RhoVector::new(ONE - ratio, ONE, ONE, ONE);
    let stress_medium = RhoVector::new(-ratio, ZERO, ZERO, ZERO);
    let strain_crystal = RhoVector::new(-e1, e1, h, h);
    let strain_medium = RhoVector::new(ZERO, ZERO, h, h);
    let ds = RhoVector(stress_crystal.0 - stress_medium.0);
    let de = RhoVector(strain_crystal.0 - strain_medium.0);
    Ok(DegenerateScheme {
        stress_crystal,
        stress_medium,
        strain_crystal,
        strain_medium,
        stress_compatible: check_jump(JumpKind::Stress, &ds, 1e-12),
        strain_compatible: check_jump(JumpKind::Strain, &de, 1e-12),
        effective_medium_limit: true,
    })
}

/// Partial derivatives `(de1/dy, de1/dtau)` of the unit-scale map.
pub fn map_derivatives(y: f64, tau: f64) -> (C64, C64) {
    let a = 1.0 + 1.0 / y;
    let d_y = c(2.0, -tau * (1.0 / (y * y) - 2.0)) * c(1.0, -tau) / (cr(2.0) * c(1.0, tau));
    let d_tau = cr(2.0 * y + 1.0) * c(2.0 * tau * a, -((1.0 - 1.0 / y) - tau * tau * a))
        / (cr(2.0) * c(1.0, tau) * c(1.0, tau));
    (d_y, d_tau)
}

/// Local injectivity at `(y, tau)`: both partial derivatives are nonzero and their
/// arguments differ, certified by a strictly positive margin.
pub fn check_injectivity_certificate(y: f64, tau: f64) -> bool {
    let (d_y, d_tau) = map_derivatives(y, tau);
    if d_y.norm() < 1e-12 || d_tau.norm() < 1e-12 {
        return false;
    }
    injectivity_margin(y, tau) > 0.0
}

/// `(1/y^2 - 1) + (1 - y)/(tau^2 (1 + y))`
pub fn injectivity_margin(y: f64, tau: f64) -> f64 {
    (1.0 / (y * y) - 1.0) + (1.0 - y) / (tau * tau * (1.0 + y))
}
