//! Rank-one lamination, hierarchical laminate trees and their self-similar limits,
//! and checks that a constructed effective tensor sits on a corner of the bounds.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundsRectangle, Corner, ShearSide};
use crate::config::Tolerances;
use crate::corners_ad::{Branch, CornerParams};
use crate::error::{Error, Result};
use crate::rho_core::{
    cr, hermitian_eigen3, hermitian_eigen4, hermitianize4, invert_on_symmetric, mirror_tensor,
    rotate_tensor, sym_basis, translation_t, translation_t0, RhoTensor, RhoVector, C64, ONE, ZERO,
};

/// Layer normal obtained from `(0, 1)` when the whole laminate is passed through
/// `rotate_tensor(., angle)`.
pub fn direction_for(angle: f64) -> [f64; 2] {
    [angle.sin(), angle.cos()]
}

/// Inverse of [`direction_for`].
pub fn angle_of(direction: [f64; 2]) -> f64 {
    direction[0].atan2(direction[1])
}

/// Two-phase laminate with normal `(0, 1)`; `fraction` is the share of `ca`.
///
/// The strain jump is a combination of the two admissible directions
/// `(1, 0, -1/2, -1/2)` and `(0, 1, -1/2, -1/2)`, fixed by continuity of the traction,
/// which in these coordinates makes the first two components of the stress jump
/// equal to the third.
fn layered_along_x2(ca: &RhoTensor, cb: &RhoTensor, fraction: f64) -> Result<RhoTensor> {
    let f = fraction;
    let half = cr(-0.5);
    let j1 = Vector4::new(ONE, ZERO, half, half);
    let j2 = Vector4::new(ZERO, ONE, half, half);
    let k = ca.0 * cr(1.0 - f) + cb.0 * cr(f);
    let q = |v: &Vector4<C64>| Vector2::new(v[0] - v[2], v[1] - v[2]);
    let (kj1, kj2) = (q(&(k * j1)), q(&(k * j2)));
    let system = Matrix2::new(kj1[0], kj2[0], kj1[1], kj2[1]);
    let lu = system.lu();
    let det = lu.determinant();
    let size = kj1.norm() * kj2.norm();
    if !(det.norm() > 1e-13 * size) {
        return Err(Error::SingularInterfaceSystem);
    }
    let diff = ca.0 - cb.0;
    let mut cols = [Vector4::<C64>::zeros(); 3];
    let averages = [
        Vector4::new(ONE, ZERO, ZERO, ZERO),
        Vector4::new(ZERO, ONE, ZERO, ZERO),
        Vector4::new(ZERO, ZERO, cr(0.5), cr(0.5)),
    ];
    for (col, e) in cols.iter_mut().zip(averages.iter()) {
        let x = lu
            .solve(&(-q(&(diff * e))))
            .ok_or(Error::SingularInterfaceSystem)?;
        let jump = j1 * x[0] + j2 * x[1];
        let strain_a = e + jump * cr(1.0 - f);
        let strain_b = e - jump * cr(f);
        *col = ca.0 * strain_a * cr(f) + cb.0 * strain_b * cr(1.0 - f);
    }
    let m = Matrix4::from_columns(&[cols[0], cols[1], cols[2], cols[2]]);
    Ok(RhoTensor(hermitianize4(&m)))
}

/// Effective tensor of a simple laminate of `ca` (volume share `fraction`) and `cb`
/// with layer normal `direction`.
pub fn rank1_effective(
    ca: &RhoTensor,
    cb: &RhoTensor,
    fraction: f64,
    direction: [f64; 2],
) -> Result<RhoTensor> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "volume fraction {fraction} outside (0, 1)"
        )));
    }
    let norm = direction[0].hypot(direction[1]);
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("layer normal must be nonzero".into()));
    }
    let a = angle_of([direction[0] / norm, direction[1] / norm]);
    if a == 0.0 {
        return layered_along_x2(ca, cb, fraction);
    }
    let inner = layered_along_x2(&rotate_tensor(ca, -a), &rotate_tensor(cb, -a), fraction)?;
    Ok(rotate_tensor(&inner, a))
}

/// Hierarchical laminate built from a single crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaminateNode {
    /// `rotate_tensor(C0, rotation)`, or of its mirror image when `mirror` is set.
    Crystal { rotation: f64, mirror: bool },
    /// Rank-one laminate; `fraction` is the share of the first child.
    Layered {
        direction: [f64; 2],
        fraction: f64,
        children: Box<[LaminateNode; 2]>,
    },
    /// Infinite-rank laminate `Y = Lam(core, rotate_tensor(Y, partner_rotation), fraction, direction)`.
    SelfSimilar {
        direction: [f64; 2],
        fraction: f64,
        partner_rotation: f64,
        core: Box<LaminateNode>,
    },
}

impl LaminateNode {
    pub fn crystal(rotation: f64, mirror: bool) -> LaminateNode {
        LaminateNode::Crystal { rotation, mirror }
    }

    pub fn layered(
        direction: [f64; 2],
        fraction: f64,
        a: LaminateNode,
        b: LaminateNode,
    ) -> LaminateNode {
        LaminateNode::Layered {
            direction,
            fraction,
            children: Box::new([a, b]),
        }
    }

    /// The same microstructure passed through `rotate_tensor(., angle)`.
    pub fn rotated(&self, angle: f64) -> LaminateNode {
        match self {
            LaminateNode::Crystal { rotation, mirror } => LaminateNode::Crystal {
                rotation: rotation + angle,
                mirror: *mirror,
            },
            LaminateNode::Layered {
                direction,
                fraction,
                children,
            } => LaminateNode::Layered {
                direction: direction_for(angle_of(*direction) + angle),
                fraction: *fraction,
                children: Box::new([children[0].rotated(angle), children[1].rotated(angle)]),
            },
            LaminateNode::SelfSimilar {
                direction,
                fraction,
                partner_rotation,
                core,
            } => LaminateNode::SelfSimilar {
                direction: direction_for(angle_of(*direction) + angle),
                fraction: *fraction,
                partner_rotation: *partner_rotation,
                core: Box::new(core.rotated(angle)),
            },
        }
    }

    /// Checks the fractions and normals of every node.
    pub fn validate(&self) -> Result<()> {
        match self {
            LaminateNode::Crystal { rotation, .. } => finite("rotation", *rotation),
            LaminateNode::Layered {
                direction,
                fraction,
                children,
            } => {
                check_layer(*direction, *fraction)?;
                children[0].validate()?;
                children[1].validate()
            }
            LaminateNode::SelfSimilar {
                direction,
                fraction,
                partner_rotation,
                core,
            } => {
                check_layer(*direction, *fraction)?;
                finite("partner rotation", *partner_rotation)?;
                core.validate()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LaminateNode::Crystal { .. } => 0,
            LaminateNode::Layered { children, .. } => {
                1 + children[0].depth().max(children[1].depth())
            }
            LaminateNode::SelfSimilar { core, .. } => 1 + core.depth(),
        }
    }
}

fn finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} is not finite")))
    }
}

fn check_layer(direction: [f64; 2], fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "volume fraction {fraction} outside (0, 1)"
        )));
    }
    if !(direction[0].is_finite()
        && direction[1].is_finite()
        && direction[0].hypot(direction[1]) > 0.0)
    {
        return Err(Error::InvalidInput(
            "layer normal must be finite and nonzero".into(),
        ));
    }
    Ok(())
}

/// Evaluates a laminate tree bottom-up. Self-similar nodes are solved by fixed-point
/// iteration started from the evaluated core.
pub fn evaluate_tree(tree: &LaminateNode, c0: &RhoTensor, tol: &Tolerances) -> Result<RhoTensor> {
    match tree {
        LaminateNode::Crystal { rotation, mirror } => {
            let base = if *mirror { mirror_tensor(c0) } else { *c0 };
            Ok(rotate_tensor(&base, *rotation))
        }
        LaminateNode::Layered {
            direction,
            fraction,
            children,
        } => {
            let a = evaluate_tree(&children[0], c0, tol)?;
            let b = evaluate_tree(&children[1], c0, tol)?;
            rank1_effective(&a, &b, *fraction, *direction)
        }
        LaminateNode::SelfSimilar {
            direction,
            fraction,
            partner_rotation,
            core,
        } => {
            let k = evaluate_tree(core, c0, tol)?;
            let step = |y: &RhoTensor| {
                rank1_effective(
                    &k,
                    &rotate_tensor(y, *partner_rotation),
                    *fraction,
                    *direction,
                )
            };
            iterate(step, k, tol).map(|r| r.c_prime)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub c_prime: RhoTensor,
    pub iterations: usize,
    pub residual: f64,
    pub positive_definite: bool,
}

/// Plain iteration with a switch to half-step relaxation when the residual stops
/// decreasing. Every iterate must stay positive definite.
fn iterate<F>(step: F, seed: RhoTensor, tol: &Tolerances) -> Result<FixedPointResult>
where
    F: Fn(&RhoTensor) -> Result<RhoTensor>,
{
    let mut y = seed;
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    let mut relax = false;
    let mut residual = f64::INFINITY;
    for it in 1..=tol.max_iterations {
        let next = step(&y)?;
        residual = (next.0 - y.0).norm() / next.0.norm().max(f64::MIN_POSITIVE);
        y = if relax {
            RhoTensor((y.0 + next.0) * cr(0.5))
        } else {
            next
        };
        if !y.is_positive_definite_on_symmetric() {
            return Err(Error::LostPositivity { iteration: it });
        }
        if residual < tol.fixed_point {
            return Ok(FixedPointResult {
                c_prime: y,
                iterations: it,
                residual,
                positive_definite: true,
            });
        }
        if residual < best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 {
                relax = true;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: tol.max_iterations,
        residual,
    })
}

/// Solves `C' = rotate(Lam(rotate(C0, rot_crystal), C', fraction), -rot_result)` with
/// normal `(0, 1)`, starting from `C0`.
pub fn self_similar_fixed_point(
    c0: &RhoTensor,
    rot_crystal: f64,
    rot_result: f64,
    fraction: f64,
    tol: &Tolerances,
) -> Result<FixedPointResult> {
    self_similar_from(c0, rot_crystal, rot_result, fraction, *c0, tol)
}

/// As [`self_similar_fixed_point`] with an explicit starting tensor.
pub fn self_similar_from(
    c0: &RhoTensor,
    rot_crystal: f64,
    rot_result: f64,
    fraction: f64,
    seed: RhoTensor,
    tol: &Tolerances,
) -> Result<FixedPointResult> {
    if !c0.is_positive_definite_on_symmetric() || !seed.is_positive_definite_on_symmetric() {
        return Err(Error::NotPositiveDefinite);
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "volume fraction {fraction} outside (0, 1)"
        )));
    }
    let k = rotate_tensor(c0, rot_crystal);
    let step =
        |y: &RhoTensor| layered_along_x2(&k, y, fraction).map(|m| rotate_tensor(&m, -rot_result));
    iterate(step, seed, tol)
}

/// One attainment condition and how far it is from holding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttainmentReport {
    pub corner: Corner,
    pub conditions: Vec<ConditionCheck>,
    pub passed: bool,
}

impl AttainmentReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Largest value among the residual-type conditions.
    pub fn max_residual(&self) -> f64 {
        self.conditions
            .iter()
            .filter(|c| !c.name.ends_with(">= 0"))
            .fold(0.0, |m, c| m.max(c.value.abs()))
    }
}

/// Checks on a form `F` that must be positive semidefinite with a null vector.
struct FormCheck {
    min_eigenvalue: f64,
    null_vector: RhoVector,
}

fn symmetric_form(m: &RhoTensor) -> FormCheck {
    let (vals, vecs) = hermitian_eigen3(&m.restrict());
    FormCheck {
        min_eigenvalue: vals[0],
        null_vector: RhoVector(sym_basis() * vecs.column(0)),
    }
}

fn full_form(m: &RhoTensor) -> FormCheck {
    let (vals, vecs) = hermitian_eigen4(&m.0);
    FormCheck {
        min_eigenvalue: vals[0],
        null_vector: RhoVector(vecs.column(0).into_owned()),
    }
}

fn push(out: &mut Vec<ConditionCheck>, name: &str, value: f64, tolerance: f64, passed: bool) {
    out.push(ConditionCheck {
        name: name.to_string(),
        value,
        tolerance,
        passed,
    });
}

/// Relative residual of `v = C' T v` for a compliance-side null vector.
fn compliance_relation(c_prime: &RhoTensor, t: &RhoTensor, v: &RhoVector) -> f64 {
    let back = c_prime.apply(&t.apply(v));
    (back.0 - v.0).norm() / v.norm()
}

/// Relative residual of `C' w = T w` for a stiffness-side null vector.
fn stiffness_relation(c_prime: &RhoTensor, t: &RhoTensor, w: &RhoVector) -> f64 {
    let lhs = c_prime.apply(w);
    let rhs = t.apply(w);
    (lhs.0 - rhs.0).norm() / (c_prime.norm() * w.norm())
}

/// Verifies positivity, the null-vector relations and, for corners on the lower
/// bulk bound, `I : S' I = k`.
pub fn verify_attainment(
    c_prime: &RhoTensor,
    corner: Corner,
    rect: &BoundsRectangle,
    tol: &Tolerances,
) -> Result<AttainmentReport> {
    let s_prime = invert_on_symmetric(c_prime)?;
    let shear = rect.shear(corner.shear_side());
    let t = translation_t(shear.t1, shear.t2);
    let mut out = Vec::new();
    let slack_c = tol.eig_slack * c_prime.norm();
    let slack_s = tol.eig_slack * s_prime.norm();
    let rel = tol.residual;

    match corner.shear_side() {
        ShearSide::Upper => {
            let f = symmetric_form(&(s_prime - t));
            push(
                &mut out,
                "S'-T >= 0",
                f.min_eigenvalue,
                slack_s,
                f.min_eigenvalue >= -slack_s,
            );
            let r = compliance_relation(c_prime, &t, &f.null_vector);
            push(&mut out, "v' = C'Tv'", r, rel, r <= rel);
        }
        ShearSide::Lower => {
            let f = full_form(&(*c_prime - t));
            push(
                &mut out,
                "C'-T >= 0",
                f.min_eigenvalue,
                slack_c,
                f.min_eigenvalue >= -slack_c,
            );
            let r = stiffness_relation(c_prime, &t, &f.null_vector);
            push(&mut out, "C'w' = Tw'", r, rel, r <= rel);
        }
    }
    if corner.lower_bulk() {
        let e = s_prime.apply(&RhoVector::identity());
        let k = rect.bulk.k;
        let r = (e.trace().re - k).abs() / k.abs();
        push(&mut out, "I:e' = k", r, rel, r <= rel);
        let back = c_prime.apply(&e);
        let r = (back.0 - RhoVector::identity().0).norm() / 2f64.sqrt();
        push(&mut out, "C'e' = I", r, rel, r <= rel);
    } else {
        let t0 = translation_t0(rect.bulk.t0);
        let f = symmetric_form(&(s_prime - t0));
        push(
            &mut out,
            "S'-T0 >= 0",
            f.min_eigenvalue,
            slack_s,
            f.min_eigenvalue >= -slack_s,
        );
        let r = compliance_relation(c_prime, &t0, &f.null_vector);
        push(&mut out, "c' = C'T0c'", r, rel, r <= rel);
    }
    let passed = out.iter().all(|c| c.passed);
    Ok(AttainmentReport {
        corner,
        conditions: out,
        passed,
    })
}

/// The two equivalent descriptions of a corner A or D laminate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerTrees {
    /// Crystal layered with its mirror image: a finite rank-one laminate.
    pub mirror_pair: LaminateNode,
    /// Crystal repeatedly relaminated with a rotated copy of the result.
    pub self_similar: LaminateNode,
}

/// Laminate trees for corner A or D parameters. `frame` is the rotation taking the
/// input crystal to the normalized frame of the construction.
///
/// Parameters with `0 <= p <= 1` describe a laminate of two reflected orthotropic
/// layers rather than of the crystal, and are rejected with `BranchAmbiguity`.
pub fn build_corner_tree(params: &CornerParams, frame: f64) -> Result<CornerTrees> {
    let fr = params.self_similar_fractions()?;
    let base = frame + params.tau.atan();
    let crystal = LaminateNode::crystal(base, false);
    let mirror = LaminateNode::crystal(-base, true);
    // The target is the pair turned by +theta on the negative branch, -theta above one.
    let turn = match params.branch {
        Branch::Negative => params.theta,
        _ => -params.theta,
    };
    let mirror_pair =
        LaminateNode::layered([0.0, 1.0], fr.crystal_in_pair, crystal.clone(), mirror)
            .rotated(turn);
    let self_similar = LaminateNode::SelfSimilar {
        direction: direction_for(turn),
        fraction: fr.crystal_relaminate,
        partner_rotation: 2.0 * turn,
        core: Box::new(crystal.rotated(turn)),
    };
    Ok(CornerTrees {
        mirror_pair,
        self_similar,
    })
}

/// `(f SA + (1-f) SB)^{-1}` and `f CA + (1-f) CB`.
pub fn reuss_voigt(
    ca: &RhoTensor,
    cb: &RhoTensor,
    fraction: f64,
) -> Result<(RhoTensor, RhoTensor)> {
    let sa = invert_on_symmetric(ca)?;
    let sb = invert_on_symmetric(cb)?;
    let harmonic =
        invert_on_symmetric(&RhoTensor(sa.0 * cr(fraction) + sb.0 * cr(1.0 - fraction)))?;
    let arithmetic = RhoTensor(ca.0 * cr(fraction) + cb.0 * cr(1.0 - fraction));
    Ok((harmonic, arithmetic))
}

/// Smallest eigenvalue of `hi - lo` on the symmetric subspace.
pub fn order_margin(lo: &RhoTensor, hi: &RhoTensor) -> f64 {
    (*hi - *lo).symmetric_eigenvalues()[0]
}
