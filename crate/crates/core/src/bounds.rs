//! Translation bounds on the bulk and shear moduli of a polycrystal.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::config::SearchOptions;
use crate::error::{Error, Result};
use crate::rho_core::{
    cr, hermitian_eigen3, hermitian_eigen4, hermitianize3, hermitianize4, invert_on_symmetric,
    rotate_tensor, rotate_vector, sym_basis, translation_t, RhoTensor, RhoVector, C64,
};
use crate::roots::{bisect, golden_max};

/// Relative size below which a normalizing component counts as zero.
const NORMALIZE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkBounds {
    /// Trace of `S0 I`.
    pub k: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub e: RhoVector,
    pub t0: f64,
    pub c: RhoVector,
}

/// Corner of the bound rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    /// Lower bulk, upper shear.
    A,
    /// Upper bulk, upper shear.
    B,
    /// Upper bulk, lower shear.
    C,
    /// Lower bulk, lower shear.
    D,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::A, Corner::B, Corner::C, Corner::D];

    pub fn shear_side(self) -> ShearSide {
        match self {
            Corner::A | Corner::B => ShearSide::Upper,
            Corner::C | Corner::D => ShearSide::Lower,
        }
    }

    /// Whether the bulk modulus sits at its lower bound.
    pub fn lower_bulk(self) -> bool {
        matches!(self, Corner::A | Corner::D)
    }
}

impl std::fmt::Display for Corner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Corner {
    type Err = Error;
    fn from_str(s: &str) -> Result<Corner> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Corner::A),
            "B" => Ok(Corner::B),
            "C" => Ok(Corner::C),
            "D" => Ok(Corner::D),
            other => Err(Error::InvalidInput(format!("unknown corner {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShearSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    Compliance,
    Stiffness,
}

/// Optimal vector after scaling and rotating the crystal into the reference frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedField {
    pub vector: RhoVector,
    /// Rotation angle applied to the crystal (radians).
    pub angle: f64,
    pub rotated_crystal: RhoTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearBound {
    pub side: ShearSide,
    pub t1: f64,
    pub t2: f64,
    pub mu: f64,
    /// Unit-norm null vector at the optimum, in the crystal's own frame.
    pub null_vector: RhoVector,
    /// Present unless the normalizing component of the null vector vanishes
    /// (isotropic crystals, for instance).
    pub normal: Option<NormalizedField>,
    /// Smallest eigenvalue of the defining form at the optimum.
    pub min_eigenvalue: f64,
    pub rays: usize,
}

impl ShearBound {
    pub fn normalized(&self) -> Result<&NormalizedField> {
        self.normal.as_ref().ok_or(normalization_error(self.side))
    }
}

fn normalization_error(side: ShearSide) -> Error {
    Error::NormalizationFailure {
        what: match side {
            ShearSide::Upper => "upper shear vector (v3 = 0)",
            ShearSide::Lower => "lower shear vector (w4 = 0)",
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleChecks {
    /// `k + t1 + t2 >= 0` at the upper shear optimum.
    pub lambda_nonnegative: bool,
    /// `t1 + t2 + 2 t0 t1 t2 >= 0` at the lower shear optimum.
    pub mixed_denominator_nonnegative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRectangle {
    pub bulk: BulkBounds,
    pub shear_upper: ShearBound,
    pub shear_lower: ShearBound,
    /// `k + t1 + t2` (upper shear translation).
    pub lambda: f64,
    /// `k + 1/t1 + 1/t2` (lower shear translation).
    pub eta: f64,
    /// `(t0 + t1)/(2 t0 + t1 + t2)` (upper shear translation).
    pub alpha1: f64,
    /// `t2 (1 + t0 t1)/(t1 + t2 + 2 t0 t1 t2)` (lower shear translation).
    pub beta1: f64,
    pub checks: RectangleChecks,
}

impl BoundsRectangle {
    pub fn kappa_minus(&self) -> f64 {
        self.bulk.kappa_minus
    }
    pub fn kappa_plus(&self) -> f64 {
        self.bulk.kappa_plus
    }
    pub fn mu_minus(&self) -> f64 {
        self.shear_lower.mu
    }
    pub fn mu_plus(&self) -> f64 {
        self.shear_upper.mu
    }

    pub fn shear(&self, side: ShearSide) -> &ShearBound {
        match side {
            ShearSide::Upper => &self.shear_upper,
            ShearSide::Lower => &self.shear_lower,
        }
    }
}

fn restricted_stiffness(c0: &RhoTensor) -> Matrix3<C64> {
    hermitianize3(&c0.restrict())
}

fn cholesky3(m: &Matrix3<C64>) -> Result<Matrix3<C64>> {
    m.cholesky()
        .map(|ch| ch.l())
        .ok_or(Error::NotPositiveDefinite)
}

/// `e = S0 I` and `k = Tr(e)`.
pub fn bulk_lower(c0: &RhoTensor) -> Result<(f64, RhoVector)> {
    let s0 = invert_on_symmetric(c0)?;
    let e = s0.apply(&RhoVector::identity());
    Ok((e.trace().re, e))
}

/// Smallest positive `t0` with `det(I - C0 T0(t0)) = 0` on symmetric matrices and
/// the null vector normalized to `c3 = c4 = 1`.
pub fn bulk_upper(c0: &RhoTensor) -> Result<(f64, RhoVector)> {
    let l = cholesky3(&restricted_stiffness(c0))?;
    let d = Matrix3::from_diagonal(&Vector3::new(cr(-1.0), cr(-1.0), cr(1.0)));
    let (vals, vecs) = hermitian_eigen3(&(l.adjoint() * d * l));
    let top = vals[2];
    if top <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let t0 = 1.0 / top;
    let b = l * vecs.column(2);
    let c = RhoVector(sym_basis() * b);
    if c.a3().norm() <= NORMALIZE_EPS * c.norm() {
        return Err(Error::NormalizationFailure {
            what: "bulk vector (c3 = 0)",
        });
    }
    let c = c.scale(c.a3().inv());
    Ok((t0, c))
}

pub fn bulk_bounds(c0: &RhoTensor) -> Result<BulkBounds> {
    let (k, e) = bulk_lower(c0)?;
    let (t0, c) = bulk_upper(c0)?;
    Ok(BulkBounds {
        k,
        kappa_minus: 1.0 / k,
        kappa_plus: 1.0 / (2.0 * t0),
        e,
        t0,
        c,
    })
}

/// A point of the boundary of a translation set along one ray.
#[derive(Debug, Clone, Copy)]
struct BoundaryPoint {
    t1: f64,
    t2: f64,
    vector: RhoVector,
}

/// The convex set of admissible `(t1, t2)`, with rays cast from an interior center.
enum TranslationSet {
    /// `S0 - T >= 0` on symmetric matrices; `l` is the Cholesky factor of the restricted `C0`.
    Compliance { l: Matrix3<C64> },
    /// `C0 - T >= 0` on all matrices, seen from `(center, center)`; `l_inv` inverts
    /// the Cholesky factor of `C0 - T(center, center)`.
    Stiffness { center: f64, l_inv: Matrix4<C64> },
}

impl TranslationSet {
    fn new(c0: &RhoTensor, mode: CurveMode) -> Result<TranslationSet> {
        let cr3 = restricted_stiffness(c0);
        let l = cholesky3(&cr3)?;
        match mode {
            CurveMode::Compliance => Ok(TranslationSet::Compliance { l }),
            CurveMode::Stiffness => {
                // The origin lies on the boundary here (the antisymmetric direction has no
                // stiffness), so step inside along the diagonal.
                let l_inv = l.try_inverse().ok_or(Error::SingularOnSymmetric)?;
                let d = Matrix3::from_diagonal(&Vector3::new(cr(1.0), cr(1.0), cr(-1.0)));
                let (vals, _) = hermitian_eigen3(&(l_inv * d * l_inv.adjoint()));
                let s_max = 1.0 / vals[2];
                let center = 0.5 * s_max;
                let shifted = hermitianize4(&(c0.0 - translation_t(center, center).0));
                let lf = shifted.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
                let l_inv = lf.try_inverse().ok_or(Error::NotPositiveDefinite)?;
                Ok(TranslationSet::Stiffness { center, l_inv })
            }
        }
    }

    fn boundary(&self, psi: f64) -> BoundaryPoint {
        let (dc, ds) = (psi.cos(), psi.sin());
        match self {
            TranslationSet::Compliance { l } => {
                let tr =
                    Matrix3::from_diagonal(&Vector3::new(cr(dc), cr(ds), cr(-0.5 * (dc + ds))));
                let (vals, vecs) = hermitian_eigen3(&(l.adjoint() * tr * l));
                let r = 1.0 / vals[2];
                let b = l * vecs.column(2);
                let v = RhoVector(sym_basis() * b);
                BoundaryPoint {
                    t1: r * dc,
                    t2: r * ds,
                    vector: v.scale(cr(1.0 / v.norm())),
                }
            }
            TranslationSet::Stiffness { center, l_inv } => {
                let t = translation_t(dc, ds).0;
                let (vals, vecs) = hermitian_eigen4(&(l_inv * t * l_inv.adjoint()));
                let r = 1.0 / vals[3];
                let w: Vector4<C64> = l_inv.adjoint() * vecs.column(3);
                let w = RhoVector(w);
                BoundaryPoint {
                    t1: center + r * dc,
                    t2: center + r * ds,
                    vector: w.scale(cr(1.0 / w.norm())),
                }
            }
        }
    }

    /// Derivative of the smallest eigenvalue in `t2`, up to a positive factor; it
    /// vanishes where `t1` is stationary along the boundary.
    fn stationarity(&self, v: &RhoVector) -> f64 {
        match self {
            TranslationSet::Compliance { .. } => v.a2().norm_sqr() - v.a3().norm_sqr(),
            TranslationSet::Stiffness { .. } => v.a2().norm_sqr() - v.a4().norm_sqr(),
        }
    }
}

/// Samples of the boundary of the admissible translation set, ordered by ray angle
/// over `[0, 2 pi)`. Compliance rays start at the origin; stiffness rays start at an
/// interior point on the diagonal.
pub fn trace_translation_curve(
    c0: &RhoTensor,
    mode: CurveMode,
    rays: usize,
) -> Result<Vec<(f64, f64)>> {
    let set = TranslationSet::new(c0, mode)?;
    Ok((0..rays)
        .map(|i| {
            let p = set.boundary(TAU * i as f64 / rays as f64);
            (p.t1, p.t2)
        })
        .collect())
}

/// Maximizes `t1` over the boundary: ray sampling, golden-section refinement, then
/// bisection on the stationarity condition.
fn maximize_t1(set: &TranslationSet, rays: usize) -> (f64, BoundaryPoint) {
    let step = TAU / rays as f64;
    let pts: Vec<BoundaryPoint> = (0..rays).map(|i| set.boundary(step * i as f64)).collect();
    let scale = pts
        .iter()
        .fold(0.0f64, |m, p| m.max(p.t1.abs()).max(p.t2.abs()));
    let tie = 1e-12 * scale.max(1e-300);
    let mut best = 0;
    for (i, p) in pts.iter().enumerate() {
        let b = &pts[best];
        if p.t1 > b.t1 + tie || ((p.t1 - b.t1).abs() <= tie && p.t2 > b.t2) {
            best = i;
        }
    }
    let psi0 = step * best as f64;
    let (lo, hi) = (psi0 - step, psi0 + step);
    let (mut psi, _) = golden_max(|x| set.boundary(x).t1, lo, hi, 1e-13);
    let mut point = set.boundary(psi);
    let h = |x: f64| set.stationarity(&set.boundary(x).vector);
    if let Some(root) = bisect(h, lo, hi, 200) {
        let cand = set.boundary(root);
        if cand.t1 >= point.t1 - 1e-10 * scale {
            psi = root;
            point = cand;
        }
    }
    // Isotropic-like plateaus: prefer the largest t2 among equal t1.
    if (point.t1 - pts[best].t1).abs() <= tie && pts[best].t2 > point.t2 {
        psi = psi0;
        point = pts[best];
    }
    (psi, point)
}

/// Rotates the crystal so that the second component of `vector` equals `target`
/// (times its modulus). `vector` must already be scaled.
fn rotate_into_frame(c0: &RhoTensor, vector: &RhoVector, target: f64) -> NormalizedField {
    let target_arg = if target < 0.0 { PI } else { 0.0 };
    let angle = 0.5 * (vector.a2().arg() - target_arg);
    NormalizedField {
        vector: rotate_vector(vector, angle),
        angle,
        rotated_crystal: rotate_tensor(c0, angle),
    }
}

/// Normalizes a shear null vector and rotates the crystal so that the second
/// component equals `second` (`-1` or `+1`). Upper vectors are scaled to
/// `v3 = v4 = 1`; lower vectors to `w4 = 1`.
pub fn normalize_shear(
    c0: &RhoTensor,
    side: ShearSide,
    raw: &RhoVector,
    second: f64,
) -> Result<NormalizedField> {
    let pivot = match side {
        ShearSide::Upper => raw.a3(),
        ShearSide::Lower => raw.a4(),
    };
    if pivot.norm() <= NORMALIZE_EPS * raw.norm() {
        return Err(normalization_error(side));
    }
    let v = raw.scale(pivot.inv());
    Ok(rotate_into_frame(c0, &v, second))
}

fn shear_bound(c0: &RhoTensor, side: ShearSide, opts: &SearchOptions) -> Result<ShearBound> {
    let mode = match side {
        ShearSide::Upper => CurveMode::Compliance,
        ShearSide::Lower => CurveMode::Stiffness,
    };
    let set = TranslationSet::new(c0, mode)?;
    let (_, p) = maximize_t1(&set, opts.rays.max(8));
    let (mu, min_eigenvalue) = match side {
        ShearSide::Upper => {
            let s0 = invert_on_symmetric(c0)?;
            let m = s0 - translation_t(p.t1, p.t2);
            (1.0 / (2.0 * p.t1), m.symmetric_eigenvalues()[0])
        }
        ShearSide::Lower => {
            let m = *c0 - translation_t(p.t1, p.t2);
            (0.5 * p.t1, m.full_eigenvalues()[0])
        }
    };
    let second = match side {
        ShearSide::Upper => -1.0,
        ShearSide::Lower => 1.0,
    };
    let normal = normalize_shear(c0, side, &p.vector, second).ok();
    Ok(ShearBound {
        side,
        t1: p.t1,
        t2: p.t2,
        mu,
        null_vector: p.vector,
        normal,
        min_eigenvalue,
        rays: opts.rays,
    })
}

/// Upper shear bound `mu+ = 1/(2 t1)` with `t1` maximal over the compliance set.
pub fn shear_upper(c0: &RhoTensor, opts: &SearchOptions) -> Result<ShearBound> {
    shear_bound(c0, ShearSide::Upper, opts)
}

/// Lower shear bound `mu- = t1/2` with `t1` maximal over the stiffness set.
pub fn shear_lower(c0: &RhoTensor, opts: &SearchOptions) -> Result<ShearBound> {
    shear_bound(c0, ShearSide::Lower, opts)
}

pub fn rectangle(c0: &RhoTensor, opts: &SearchOptions) -> Result<BoundsRectangle> {
    if !c0.is_positive_definite_on_symmetric() {
        return Err(Error::NotPositiveDefinite);
    }
    let bulk = bulk_bounds(c0)?;
    let up = shear_upper(c0, opts)?;
    let lo = shear_lower(c0, opts)?;
    let (k, t0) = (bulk.k, bulk.t0);
    let lambda = k + up.t1 + up.t2;
    let eta = k + 1.0 / lo.t1 + 1.0 / lo.t2;
    let alpha1 = (t0 + up.t1) / (2.0 * t0 + up.t1 + up.t2);
    let mixed = lo.t1 + lo.t2 + 2.0 * t0 * lo.t1 * lo.t2;
    let beta1 = lo.t2 * (1.0 + t0 * lo.t1) / mixed;
    let slack = 1e-9 * (k.abs() + up.t1.abs() + up.t2.abs());
    let checks = RectangleChecks {
        lambda_nonnegative: lambda >= -slack,
        mixed_denominator_nonnegative: mixed >= -1e-9 * (lo.t1.abs() + lo.t2.abs()),
    };
    Ok(BoundsRectangle {
        bulk,
        shear_upper: up,
        shear_lower: lo,
        lambda,
        eta,
        alpha1,
        beta1,
        checks,
    })
}
