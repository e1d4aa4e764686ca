//! End-to-end constructions: from a crystal to a laminate whose effective tensor
//! sits on a corner of the bound rectangle.

use serde::{Deserialize, Serialize};

use crate::bounds::{rectangle, BoundsRectangle, Corner, NormalizedField};
use crate::config::{SearchOptions, Tolerances};
use crate::corners_ad::{
    build_construction, in_omega, invert_e1, special_case_imaginary, Branch, CornerParams,
    CornerScale, DegenerateScheme,
};
use crate::corners_bc::{solve_for_crystal, BcConstruction, MixParams};
use crate::error::{Error, Result};
use crate::laminate::{
    build_corner_tree, evaluate_tree, self_similar_fixed_point, verify_attainment,
    AttainmentReport, CornerTrees, FixedPointResult,
};
use crate::rho_core::{invert_on_symmetric, rotate_tensor, RhoTensor, RhoVector, C64};

/// Crystal coordinate and normalization shared by the corner constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalFrame {
    /// Rotation taking the input crystal to the normalized frame.
    pub angle: f64,
    pub rotated_crystal: RhoTensor,
    pub shear_vector: RhoVector,
}

impl From<&NormalizedField> for CrystalFrame {
    fn from(n: &NormalizedField) -> Self {
        CrystalFrame {
            angle: n.angle,
            rotated_crystal: n.rotated_crystal,
            shear_vector: n.vector,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdOutcome {
    /// Self-similar laminate of the crystal and its mirror image.
    Laminate {
        params: CornerParams,
        trees: CornerTrees,
        fixed_point: FixedPointResult,
        /// Effective tensor of the finite crystal/mirror laminate.
        mirror_pair_tensor: RhoTensor,
        report: AttainmentReport,
    },
    /// `0 <= p <= 1`: the orthotropic target is reached by reflecting itself.
    InteriorBranch { params: CornerParams },
    /// Purely imaginary crystal coordinate: an effective-medium limit.
    Imaginary { scheme: DegenerateScheme },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdConstruction {
    pub corner: Corner,
    pub frame: CrystalFrame,
    /// First coordinate of `S0 I` in the normalized frame.
    pub e1: C64,
    pub scale: f64,
    pub outcome: AdOutcome,
}

impl AdConstruction {
    pub fn c_prime(&self) -> Option<&RhoTensor> {
        match &self.outcome {
            AdOutcome::Laminate { fixed_point, .. } => Some(&fixed_point.c_prime),
            _ => None,
        }
    }

    pub fn report(&self) -> Option<&AttainmentReport> {
        match &self.outcome {
            AdOutcome::Laminate { report, .. } => Some(report),
            _ => None,
        }
    }
}

/// Constructs the corner A or D laminate for `c0`.
pub fn attain_ad(
    c0: &RhoTensor,
    corner: Corner,
    rect: &BoundsRectangle,
    tol: &Tolerances,
) -> Result<AdConstruction> {
    let scale = match corner {
        Corner::A => CornerScale::A {
            lambda: rect.lambda,
        },
        Corner::D => {
            let lo = &rect.shear_lower;
            CornerScale::D {
                eta: rect.eta,
                t_ratio: lo.t2 / lo.t1,
            }
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "corner {corner} is not on the lower bulk bound"
            )))
        }
    };
    let normal = rect.shear(corner.shear_side()).normalized()?;
    let frame = CrystalFrame::from(normal);
    let s0 = invert_on_symmetric(&frame.rotated_crystal)?;
    let e1 = s0.apply(&RhoVector::identity()).a1();
    let s = scale.scale();
    let size = e1.norm().max(s.abs() * f64::EPSILON);
    let tiny = 1e-9 * size.max(s.abs());

    if e1.im.abs() <= tiny {
        return Err(Error::InvalidInput(
            "crystal coordinate is real (orthotropic crystal); handled by the orthotropic construction".into(),
        ));
    }
    if e1.re.abs() <= tiny {
        let scheme = special_case_imaginary(e1, rect.bulk.k, s)?;
        return Ok(AdConstruction {
            corner,
            frame,
            e1,
            scale: s,
            outcome: AdOutcome::Imaginary { scheme },
        });
    }
    if !in_omega(e1, s, tol.global) {
        return Err(Error::NotInOmega {
            re: e1.re,
            im: e1.im,
        });
    }
    // Boundary points within tolerance are pulled onto the closed region.
    let target = if (e1 / s).re > 0.5 {
        C64::new(0.5 * s, e1.im)
    } else {
        e1
    };
    let (y, tau) = invert_e1(target, s)?;
    let params = build_construction(y, tau, scale)?;
    if params.branch == Branch::Interior {
        return Ok(AdConstruction {
            corner,
            frame,
            e1,
            scale: s,
            outcome: AdOutcome::InteriorBranch { params },
        });
    }
    let trees = build_corner_tree(&params, frame.angle)?;
    let fr = params.self_similar_fractions()?;
    let turn = if params.branch == Branch::Negative {
        params.theta
    } else {
        -params.theta
    };
    let fp = self_similar_fixed_point(
        c0,
        frame.angle + params.tau.atan(),
        -2.0 * turn,
        fr.crystal_relaminate,
        tol,
    )?;
    let fixed_point = FixedPointResult {
        c_prime: rotate_tensor(&fp.c_prime, -turn),
        ..fp
    };
    let mirror_pair_tensor = evaluate_tree(&trees.mirror_pair, c0, tol)?;
    let report = verify_attainment(&fixed_point.c_prime, corner, rect, tol)?;
    Ok(AdConstruction {
        corner,
        frame,
        e1,
        scale: s,
        outcome: AdOutcome::Laminate {
            params,
            trees,
            fixed_point,
            mirror_pair_tensor,
            report,
        },
    })
}

/// Result of a corner query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Construction {
    LowerBulk(AdConstruction),
    UpperBulk(BcConstruction),
}

impl Construction {
    pub fn report(&self) -> Option<&AttainmentReport> {
        match self {
            Construction::LowerBulk(a) => a.report(),
            Construction::UpperBulk(b) => Some(&b.report),
        }
    }

    pub fn c_prime(&self) -> Option<&RhoTensor> {
        match self {
            Construction::LowerBulk(a) => a.c_prime(),
            Construction::UpperBulk(b) => Some(&b.c_prime),
        }
    }
}

/// Computes the bounds and constructs the laminate for one corner.
pub fn attain(
    c0: &RhoTensor,
    corner: Corner,
    opts: &SearchOptions,
    tol: &Tolerances,
) -> Result<(BoundsRectangle, Construction)> {
    let rect = rectangle(c0, opts)?;
    let construction = attain_with(c0, corner, &rect, tol)?;
    Ok((rect, construction))
}

/// As [`attain`] with precomputed bounds.
pub fn attain_with(
    c0: &RhoTensor,
    corner: Corner,
    rect: &BoundsRectangle,
    tol: &Tolerances,
) -> Result<Construction> {
    match corner {
        Corner::A | Corner::D => attain_ad(c0, corner, rect, tol).map(Construction::LowerBulk),
        Corner::B | Corner::C => {
            let mix = MixParams::from_rectangle(rect);
            solve_for_crystal(c0, corner, rect, &mix, tol).map(Construction::UpperBulk)
        }
    }
}
