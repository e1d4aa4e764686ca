//! Trajectories through the crystal's bulk coordinate and the corner B/C solve.

use serde::{Deserialize, Serialize};

use super::curve::{find_crossings, refine_intersection};
use super::MixParams;
use crate::attain::CrystalFrame;
use crate::bounds::{normalize_shear, BoundsRectangle, Corner, ShearSide};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::laminate::{
    direction_for, self_similar_fixed_point, verify_attainment, AttainmentReport, FixedPointResult,
    LaminateNode,
};
use crate::rho_core::{cis, cr, rotate_tensor, rotate_vector, RhoTensor, C64, ONE};
use crate::roots::bisect;

const THETA_EDGE: f64 = 1e-4;
const THETA_SCAN: usize = 4001;
const REAL_PHI_TOL: f64 = 1e-10;
const NEAR_TAU: usize = 2000;
const FAR_TAU: usize = 20000;
const FAR_TAU_LIMIT: f64 = 1e-4;
const MAX_ATTEMPTS: usize = 32;

fn check_upper(corner: Corner) -> Result<()> {
    match corner {
        Corner::B | Corner::C => Ok(()),
        _ => Err(Error::InvalidInput(format!(
            "corner {corner} is not on the upper bulk bound"
        ))),
    }
}

/// The layering parameter `phi` as a function of the rotation angle `theta`.
///
/// Corner C uses the B expression with the `beta` weights.
pub fn phi_of_theta(theta: f64, c1: C64, mix: &MixParams, corner: Corner) -> Result<C64> {
    check_upper(corner)?;
    let (w1, w2) = mix.weights(corner);
    let e = cis(theta);
    let cb = c1.conj();
    let num = cb * (ONE - w1 * cb / (e * e) - w2 * c1 * e * e) / (e * e * e);
    let den = ONE - w2 * c1 + w2 * cb / e.powi(4) - cb / (e * e);
    let scale = 1.0 + w2.abs() * 2.0;
    if !(den.norm() > 1e-14 * scale) {
        return Err(Error::PoleAtTheta { theta });
    }
    Ok(num / den)
}

/// The reciprocal `1/phi` written as a correction to `e^{i theta}/conj(c1)`.
/// Algebraically identical to [`phi_of_theta`]; kept as an independent check.
pub fn inverse_phi_reciprocal_form(theta: f64, c1: C64, weights: (f64, f64)) -> Result<C64> {
    let (w1, w2) = weights;
    let e = cis(theta);
    let cb = c1.conj();
    let mix = w1 / (e * e) * (cb - e * e) + w2 * e * e * (c1 - ONE / (e * e));
    let den = cb * mix;
    if !(den.norm() > 1e-14) || cb.norm() == 0.0 {
        return Err(Error::PoleAtTheta { theta });
    }
    Ok(e / cb + (e - ONE / e) * (cb - e * e) / den)
}

/// Rotation angles in `(0, pi)` at which `phi` is real.
pub fn find_real_phi_thetas(c1: C64, mix: &MixParams, corner: Corner) -> Result<Vec<f64>> {
    find_real_phi_thetas_with(c1, mix, corner, THETA_SCAN)
}

/// As [`find_real_phi_thetas`] with an explicit scan resolution.
pub fn find_real_phi_thetas_with(
    c1: C64,
    mix: &MixParams,
    corner: Corner,
    points: usize,
) -> Result<Vec<f64>> {
    check_upper(corner)?;
    if !(c1.norm() < 1.0) {
        return Err(Error::InvalidInput(format!(
            "|c1| = {} is not below one",
            c1.norm()
        )));
    }
    let im = |t: f64| {
        phi_of_theta(t, c1, mix, corner)
            .map(|p| p.im)
            .unwrap_or(f64::NAN)
    };
    let (lo, hi) = (THETA_EDGE, std::f64::consts::PI - THETA_EDGE);
    let grid: Vec<f64> = (0..points.max(2))
        .map(|k| lo + (hi - lo) * k as f64 / (points.max(2) - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| im(t)).collect();
    let mut out: Vec<f64> = Vec::new();
    for k in 0..grid.len() - 1 {
        let (fa, fb) = (vals[k], vals[k + 1]);
        if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
            continue;
        }
        let Some(t) = bisect(im, grid[k], grid[k + 1], 200) else {
            continue;
        };
        // A sign change through a pole leaves a large residual.
        let Ok(phi) = phi_of_theta(t, c1, mix, corner) else {
            continue;
        };
        if phi.im.abs() < REAL_PHI_TOL * (1.0 + phi.re.abs())
            && out.last().is_none_or(|&p| t - p > 1e-12)
        {
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(out)
}

/// First shear-field coordinate of the rotated crystal, fixed by the bilinear identity.
pub fn crystal_field(c1: C64, mix: &MixParams, corner: Corner) -> Result<C64> {
    check_upper(corner)?;
    let cb = c1.conj();
    Ok(match corner {
        Corner::B => (ONE - mix.alpha2 * c1) / (mix.alpha1 * cb),
        _ => (mix.beta2 * c1 - ONE) / (mix.t_ratio * mix.beta1 * cb),
    })
}

/// Residual of the bilinear identity linking the bulk and shear coordinates.
pub fn bilinear_residual(c: C64, field: C64, mix: &MixParams, corner: Corner) -> C64 {
    match corner {
        Corner::C => mix.beta1 * mix.t_ratio * c.conj() * field - mix.beta2 * c + ONE,
        _ => mix.alpha1 * c.conj() * field + mix.alpha2 * c - ONE,
    }
}

/// Bulk coordinate at layering parameter `tau`.
pub fn c1_along(c1: C64, theta: f64, phi: f64, tau: f64) -> C64 {
    c1_along_with_derivative(c1, theta, phi, tau).0
}

/// Bulk coordinate and its `tau` derivative.
pub fn c1_along_with_derivative(c1: C64, theta: f64, phi: f64, tau: f64) -> (C64, C64) {
    let u = cis(theta);
    let a = cis(-2.0 * theta) * phi;
    let n = (c1 + a * tau) * (ONE + u * tau);
    let dn = a * (ONE + u * tau) + u * (c1 + a * tau);
    let d = cr(1.0 + phi * tau) * (ONE + u.conj() * tau);
    let dd = phi * (ONE + u.conj() * tau) + u.conj() * (1.0 + phi * tau);
    (n / d, (dn * d - n * dd) / (d * d))
}

/// Shear-field coordinate at layering parameter `tau`, starting from `field1`.
pub fn field_along(field1: C64, theta: f64, tau: f64, mix: &MixParams, corner: Corner) -> C64 {
    let u = cis(theta);
    let lead = match corner {
        Corner::C => field1 - cis(-3.0 * theta) * (tau / mix.t_ratio),
        _ => field1 + cis(-3.0 * theta) * tau,
    };
    let q = ONE + u.conj() * tau;
    lead * (ONE + u * tau) / (q * q)
}

/// Half the rotation between the crystal frame and the effective tensor at `tau`.
pub fn frame_rotation(theta: f64, tau: f64) -> f64 {
    let u = cis(theta);
    (cis(-2.0 * theta) * (ONE + u * tau) / (ONE + u.conj() * tau)).arg() / 2.0
}

/// Layering parameters for one side of the trajectory.
///
/// The unit interval is sampled uniformly and the far range through reciprocals,
/// stopping short of the pole at `-1/phi` when it lies on this side.
pub fn tau_branch(sign: f64, phi: f64) -> Vec<f64> {
    let near = (0..NEAR_TAU).map(|k| k as f64 / NEAR_TAU as f64);
    let far =
        (0..FAR_TAU).map(|k| 1.0 / (1.0 + (FAR_TAU_LIMIT - 1.0) * k as f64 / (FAR_TAU - 1) as f64));
    let limit = if phi * sign < 0.0 {
        0.999 / phi.abs()
    } else {
        f64::INFINITY
    };
    near.chain(far)
        .map(|t| sign * t)
        .filter(|t| t.abs() < limit)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub tau: f64,
    pub c1_prime: C64,
    /// `v1'` for corner B, `w1'` for corner C.
    pub field1_prime: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryB {
    pub corner: Corner,
    pub c1: C64,
    pub theta: f64,
    pub phi: f64,
    /// Ordered by `tau`.
    pub samples: Vec<TrajectorySample>,
}

impl TrajectoryB {
    /// Largest bilinear-identity residual over the samples.
    pub fn identity_residual(&self, mix: &MixParams) -> f64 {
        self.samples
            .iter()
            .map(|s| bilinear_residual(s.c1_prime, s.field1_prime, mix, self.corner).norm())
            .fold(0.0, f64::max)
    }

    /// Samples with `tau` of the given sign, ordered away from zero.
    pub fn branch(&self, sign: f64) -> Vec<TrajectorySample> {
        let mut out: Vec<_> = self
            .samples
            .iter()
            .copied()
            .filter(|s| s.tau * sign >= 0.0)
            .collect();
        out.sort_by(|a, b| a.tau.abs().total_cmp(&b.tau.abs()));
        out
    }
}

fn sample_at(
    c1: C64,
    field1: C64,
    theta: f64,
    phi: f64,
    tau: f64,
    mix: &MixParams,
    corner: Corner,
) -> TrajectorySample {
    TrajectorySample {
        tau,
        c1_prime: c1_along(c1, theta, phi, tau),
        field1_prime: field_along(field1, theta, tau, mix, corner),
    }
}

/// Samples the trajectory through `c1` on both sides of `tau = 0`.
pub fn trace_trajectory(
    c1: C64,
    theta: f64,
    phi: f64,
    mix: &MixParams,
    corner: Corner,
) -> Result<TrajectoryB> {
    let field1 = crystal_field(c1, mix, corner)?;
    let mut taus: Vec<f64> = tau_branch(-1.0, phi)
        .into_iter()
        .skip(1)
        .chain(tau_branch(1.0, phi))
        .collect();
    taus.sort_by(f64::total_cmp);
    let samples = taus
        .into_iter()
        .map(|t| sample_at(c1, field1, theta, phi, t, mix, corner))
        .collect();
    Ok(TrajectoryB {
        corner,
        c1,
        theta,
        phi,
        samples,
    })
}

/// A refined self-intersection `c1'(tau_a) = c1'(tau_b)` with `|tau_a| < |tau_b|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCrossing {
    pub theta: f64,
    pub phi: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub c1_star: C64,
    pub newton_iterations: usize,
    pub residual: f64,
}

impl TrajectoryCrossing {
    /// Share of the rotated crystal in the laminate realizing the crossing.
    pub fn fraction(&self) -> f64 {
        1.0 - self.tau_a / self.tau_b
    }
}

/// Self-intersections of the trajectory through `c1` at angle `theta`, on both sides.
pub fn trajectory_crossings(c1: C64, theta: f64, phi: f64) -> Vec<TrajectoryCrossing> {
    let curve = |t: f64| c1_along_with_derivative(c1, theta, phi, t);
    let mut out: Vec<TrajectoryCrossing> = Vec::new();
    for sign in [1.0, -1.0] {
        let taus = tau_branch(sign, phi);
        let pts: Vec<C64> = taus.iter().map(|&t| curve(t).0).collect();
        for (i, j) in find_crossings(&pts) {
            let Some(x) = refine_intersection(curve, taus[i], taus[j], 60, 1e-13) else {
                continue;
            };
            let (a, b) = if x.a.abs() < x.b.abs() {
                (x.a, x.b)
            } else {
                (x.b, x.a)
            };
            let distinct = (b - a).abs() > 1e-9 * (1.0 + b.abs());
            if !(distinct && a * b > 0.0 && a * sign > 0.0 && x.point.norm() < 1.0) {
                continue;
            }
            if out.iter().any(|o| {
                (o.tau_a - a).abs() < 1e-8 * (1.0 + a.abs())
                    && (o.tau_b - b).abs() < 1e-8 * (1.0 + b.abs())
            }) {
                continue;
            }
            out.push(TrajectoryCrossing {
                theta,
                phi,
                tau_a: a,
                tau_b: b,
                c1_star: x.point,
                newton_iterations: x.iterations,
                residual: x.residual,
            });
        }
    }
    out
}

/// Normalized frame of the crystal for corner B or C together with its bulk coordinate.
pub fn upper_frame(
    c0: &RhoTensor,
    corner: Corner,
    rect: &BoundsRectangle,
) -> Result<(CrystalFrame, C64)> {
    check_upper(corner)?;
    let (side, second) = match corner {
        Corner::B => (ShearSide::Upper, 1.0),
        _ => (ShearSide::Lower, -1.0),
    };
    let n = normalize_shear(c0, side, &rect.shear(side).null_vector, second)?;
    let c1 = rotate_vector(&rect.bulk.c, n.angle).a1();
    Ok((CrystalFrame::from(&n), c1))
}

/// Corner B or C laminate: a crystal layer and a rotated copy of the effective tensor,
/// repeated self-similarly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcConstruction {
    pub corner: Corner,
    pub frame: CrystalFrame,
    pub mix: MixParams,
    /// Bulk coordinate of the crystal in the normalized frame.
    pub c1: C64,
    /// Bilinear identity evaluated on the crystal's own fields.
    pub frame_identity_residual: f64,
    pub candidates_tried: usize,
    pub crossing: TrajectoryCrossing,
    pub fraction: f64,
    pub tree: LaminateNode,
    pub fixed_point: FixedPointResult,
    pub c_prime: RhoTensor,
    pub report: AttainmentReport,
}

/// Searches the real-`phi` trajectories of the crystal for a self-intersection whose
/// laminate attains the corner.
pub fn solve_for_crystal(
    c0: &RhoTensor,
    corner: Corner,
    rect: &BoundsRectangle,
    mix: &MixParams,
    tol: &Tolerances,
) -> Result<BcConstruction> {
    let (frame, c1) = upper_frame(c0, corner, rect)?;
    let frame_identity_residual =
        bilinear_residual(c1, frame.shear_vector.a1(), mix, corner).norm();
    let thetas = find_real_phi_thetas(c1, mix, corner)?;
    let mut crossings: Vec<TrajectoryCrossing> = Vec::new();
    for theta in thetas {
        let phi = phi_of_theta(theta, c1, mix, corner)?.re;
        crossings.extend(trajectory_crossings(c1, theta, phi));
    }
    crossings.sort_by(|a, b| a.tau_a.abs().total_cmp(&b.tau_a.abs()));

    for (k, x) in crossings.iter().take(MAX_ATTEMPTS).enumerate() {
        let f = x.fraction();
        if !(f > 0.0 && f < 1.0) {
            continue;
        }
        let (pa, pb) = (
            frame_rotation(x.theta, x.tau_a),
            frame_rotation(x.theta, x.tau_b),
        );
        let Ok(fp) = self_similar_fixed_point(c0, frame.angle + x.theta, pb - pa, f, tol) else {
            continue;
        };
        let c_prime = rotate_tensor(&fp.c_prime, pb);
        let Ok(report) = verify_attainment(&c_prime, corner, rect, tol) else {
            continue;
        };
        if !report.passed {
            continue;
        }
        let tree = LaminateNode::SelfSimilar {
            direction: direction_for(pa),
            fraction: f,
            partner_rotation: pa - pb,
            core: Box::new(LaminateNode::crystal(frame.angle + x.theta, false).rotated(pa)),
        };
        return Ok(BcConstruction {
            corner,
            frame,
            mix: *mix,
            c1,
            frame_identity_residual,
            candidates_tried: k + 1,
            crossing: *x,
            fraction: f,
            tree,
            fixed_point: FixedPointResult { c_prime, ..fp },
            c_prime,
            report,
        });
    }
    Err(Error::NotAttainedWithinSearch)
}
