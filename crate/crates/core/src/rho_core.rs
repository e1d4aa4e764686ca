//! Complex rho-basis algebra for planar second- and fourth-order tensors.
//!
//! A 2x2 matrix `A` is stored through its coefficients `a_k = conj(rho_k) : A` in the
//! orthonormal basis
//!
//! ```text
//! rho1 = 1/2 [[1, i], [i, -1]]    rho2 = 1/2 [[1, -i], [-i, -1]]
//! rho3 = 1/2 [[1, i], [-i, 1]]    rho4 = 1/2 [[1, -i], [i, 1]]
//! ```
//!
//! in which rotations act diagonally. Fourth-order tensors become 4x4 complex
//! matrices acting on these coefficients.

use nalgebra::{Matrix3, Matrix4, Matrix4x3, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `e^{i x}`
pub(crate) fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

/// Coefficients of a 2x2 complex matrix in the rho basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<[f64; 2]>", try_from = "Vec<[f64; 2]>")]
pub struct RhoVector(pub Vector4<C64>);

impl From<RhoVector> for Vec<[f64; 2]> {
    fn from(v: RhoVector) -> Self {
        v.0.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl TryFrom<Vec<[f64; 2]>> for RhoVector {
    type Error = String;
    fn try_from(v: Vec<[f64; 2]>) -> std::result::Result<Self, String> {
        if v.len() != 4 {
            return Err(format!("expected 4 complex entries, got {}", v.len()));
        }
        Ok(RhoVector::new(
            c(v[0][0], v[0][1]),
            c(v[1][0], v[1][1]),
            c(v[2][0], v[2][1]),
            c(v[3][0], v[3][1]),
        ))
    }
}

impl RhoVector {
    pub fn new(a1: C64, a2: C64, a3: C64, a4: C64) -> Self {
        RhoVector(Vector4::new(a1, a2, a3, a4))
    }

    /// The identity matrix, `(0, 0, 1, 1)`.
    pub fn identity() -> Self {
        RhoVector::new(ZERO, ZERO, ONE, ONE)
    }

    pub fn zero() -> Self {
        RhoVector(Vector4::zeros())
    }

    pub fn a1(&self) -> C64 {
        self.0[0]
    }
    pub fn a2(&self) -> C64 {
        self.0[1]
    }
    pub fn a3(&self) -> C64 {
        self.0[2]
    }
    pub fn a4(&self) -> C64 {
        self.0[3]
    }

    /// Represents a symmetric matrix: `a3 = a4`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.a3() - self.a4()).norm() <= tol * (1.0 + self.norm())
    }

    /// Represents a real matrix: `a2 = conj(a1)` and `a4 = conj(a3)`.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = tol * (1.0 + self.norm());
        (self.a2() - self.a1().conj()).norm() <= scale
            && (self.a4() - self.a3().conj()).norm() <= scale
    }

    /// `conj(self) : other`
    pub fn inner(&self, other: &RhoVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Trace of the represented matrix.
    pub fn trace(&self) -> C64 {
        self.a3() + self.a4()
    }

    pub fn scale(&self, s: C64) -> RhoVector {
        RhoVector(self.0 * s)
    }

    pub fn conj(&self) -> RhoVector {
        RhoVector(self.0.map(|z| z.conj()))
    }

    pub fn from_matrix(m: &[[C64; 2]; 2]) -> RhoVector {
        let basis = rho_matrices();
        let mut out = Vector4::zeros();
        for (k, b) in basis.iter().enumerate() {
            let mut s = ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    s += b[i][j].conj() * m[i][j];
                }
            }
            out[k] = s;
        }
        RhoVector(out)
    }

    pub fn to_matrix(&self) -> [[C64; 2]; 2] {
        let basis = rho_matrices();
        let mut m = [[ZERO; 2]; 2];
        for (k, b) in basis.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += self.0[k] * b[i][j];
                }
            }
        }
        m
    }
}

/// The four basis matrices as 2x2 arrays.
pub fn rho_matrices() -> [[[C64; 2]; 2]; 4] {
    let h = 0.5;
    [
        [[cr(h), c(0.0, h)], [c(0.0, h), cr(-h)]],
        [[cr(h), c(0.0, -h)], [c(0.0, -h), cr(-h)]],
        [[cr(h), c(0.0, h)], [c(0.0, -h), cr(h)]],
        [[cr(h), c(0.0, -h)], [c(0.0, h), cr(h)]],
    ]
}

/// Fourth-order planar tensor as a 4x4 complex matrix in the rho basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<[f64; 2]>>", try_from = "Vec<Vec<[f64; 2]>>")]
pub struct RhoTensor(pub Matrix4<C64>);

impl From<RhoTensor> for Vec<Vec<[f64; 2]>> {
    fn from(t: RhoTensor) -> Self {
        (0..4)
            .map(|i| (0..4).map(|j| [t.0[(i, j)].re, t.0[(i, j)].im]).collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for RhoTensor {
    type Error = String;
    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> std::result::Result<Self, String> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err("expected a 4x4 array of [re, im] pairs".into());
        }
        Ok(RhoTensor(Matrix4::from_fn(|i, j| {
            c(rows[i][j][0], rows[i][j][1])
        })))
    }
}

impl RhoTensor {
    /// Wraps a matrix and validates the elasticity-tensor invariants.
    pub fn new(m: Matrix4<C64>, tol: f64) -> Result<RhoTensor> {
        let t = RhoTensor(m);
        t.check_invariants(tol)?;
        Ok(t)
    }

    /// Wraps a matrix without validation (translations, intermediate products).
    pub fn from_matrix(m: Matrix4<C64>) -> RhoTensor {
        RhoTensor(m)
    }

    pub fn zero() -> RhoTensor {
        RhoTensor(Matrix4::zeros())
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn apply(&self, v: &RhoVector) -> RhoVector {
        RhoVector(self.0 * v.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> RhoTensor {
        RhoTensor(self.0 * cr(s))
    }

    /// Hermitian, equal columns 3 and 4 (and rows 3 and 4), and the reality
    /// structure `P conj(M) P = M`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let m = &self.0;
        let scale = tol * (1.0 + m.norm());
        let herm = (m - m.adjoint()).norm();
        if herm > scale {
            return Err(Error::InvariantViolation {
                what: "hermitian",
                residual: herm,
            });
        }
        let cols = (m.column(2) - m.column(3)).norm();
        if cols > scale {
            return Err(Error::InvariantViolation {
                what: "columns 3 and 4 equal",
                residual: cols,
            });
        }
        let rows = (m.row(2) - m.row(3)).norm();
        if rows > scale {
            return Err(Error::InvariantViolation {
                what: "rows 3 and 4 equal",
                residual: rows,
            });
        }
        let p = swap_permutation();
        let real = (p * m.map(|z| z.conj()) * p - m).norm();
        if real > scale {
            return Err(Error::InvariantViolation {
                what: "reality",
                residual: real,
            });
        }
        Ok(())
    }

    /// Restriction to the symmetric subspace in the orthonormal basis
    /// `e1, e2, (e3 + e4)/sqrt(2)`.
    pub fn restrict(&self) -> Matrix3<C64> {
        let u = sym_basis();
        u.adjoint() * self.0 * u
    }

    /// Inverse of [`RhoTensor::restrict`].
    pub fn expand(m: &Matrix3<C64>) -> RhoTensor {
        let u = sym_basis();
        RhoTensor(u * m * u.adjoint())
    }

    /// Eigenvalues of the restriction to symmetric matrices, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vector3<f64> {
        hermitian_eigen3(&self.restrict()).0
    }

    /// Eigenvalues of the full 4x4 Hermitian form, ascending.
    pub fn full_eigenvalues(&self) -> Vector4<f64> {
        hermitian_eigen4(&self.0).0
    }

    pub fn is_positive_definite_on_symmetric(&self) -> bool {
        let h = hermitianize3(&self.restrict());
        h.cholesky().is_some()
    }
}

impl std::ops::Add for RhoTensor {
    type Output = RhoTensor;
    fn add(self, o: RhoTensor) -> RhoTensor {
        RhoTensor(self.0 + o.0)
    }
}

impl std::ops::Sub for RhoTensor {
    type Output = RhoTensor;
    fn sub(self, o: RhoTensor) -> RhoTensor {
        RhoTensor(self.0 - o.0)
    }
}

/// Permutation swapping indices 1<->2 and 3<->4.
pub(crate) fn swap_permutation() -> Matrix4<C64> {
    let mut p = Matrix4::zeros();
    p[(0, 1)] = ONE;
    p[(1, 0)] = ONE;
    p[(2, 3)] = ONE;
    p[(3, 2)] = ONE;
    p
}

/// Orthonormal basis of the symmetric subspace as columns.
pub fn sym_basis() -> Matrix4x3<C64> {
    let h = cr(std::f64::consts::FRAC_1_SQRT_2);
    Matrix4x3::new(
        ONE, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, h, ZERO, ZERO, h,
    )
}

pub(crate) fn hermitianize3(m: &Matrix3<C64>) -> Matrix3<C64> {
    (m + m.adjoint()) * cr(0.5)
}

pub(crate) fn hermitianize4(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * cr(0.5)
}

/// Eigen-decomposition of a Hermitian 3x3 matrix, eigenvalues ascending.
pub fn hermitian_eigen3(m: &Matrix3<C64>) -> (Vector3<f64>, Matrix3<C64>) {
    let eig = hermitianize3(m).symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = Vector3::from_fn(|i, _| eig.eigenvalues[idx[i]]);
    let vecs = Matrix3::from_fn(|r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

/// Eigen-decomposition of a Hermitian 4x4 matrix, eigenvalues ascending.
pub fn hermitian_eigen4(m: &Matrix4<C64>) -> (Vector4<f64>, Matrix4<C64>) {
    let eig = hermitianize4(m).symmetric_eigen();
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = Vector4::from_fn(|i, _| eig.eigenvalues[idx[i]]);
    let vecs = Matrix4::from_fn(|r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

/// Cartesian components of a planar elasticity tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtTensor {
    #[serde(rename = "C1111")]
    pub c1111: f64,
    #[serde(rename = "C1122")]
    pub c1122: f64,
    #[serde(rename = "C1112")]
    pub c1112: f64,
    #[serde(rename = "C2222")]
    pub c2222: f64,
    #[serde(rename = "C2212")]
    pub c2212: f64,
    #[serde(rename = "C1212")]
    pub c1212: f64,
}

impl VoigtTensor {
    /// Isotropic tensor with planar bulk modulus `kappa` and shear modulus `mu`.
    pub fn isotropic(kappa: f64, mu: f64) -> VoigtTensor {
        VoigtTensor {
            c1111: kappa + mu,
            c1122: kappa - mu,
            c1112: 0.0,
            c2222: kappa + mu,
            c2212: 0.0,
            c1212: mu,
        }
    }

    /// Quadratic-form matrix in the coordinates `(A11, A22, A12)` of a symmetric matrix.
    pub fn gram(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.c1111,
            self.c1122,
            2.0 * self.c1112,
            self.c1122,
            self.c2222,
            2.0 * self.c2212,
            2.0 * self.c1112,
            2.0 * self.c2212,
            4.0 * self.c1212,
        )
    }

    /// Full index form `C[i][j][k][l]` with the minor and major symmetries.
    pub fn components(&self) -> [[[[f64; 2]; 2]; 2]; 2] {
        let idx = |i: usize, j: usize| if i == j { i } else { 2 };
        let v = [
            [self.c1111, self.c1122, self.c1112],
            [self.c1122, self.c2222, self.c2212],
            [self.c1112, self.c2212, self.c1212],
        ];
        let mut out = [[[[0.0; 2]; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i][j][k][l] = v[idx(i, j)][idx(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn is_positive_definite(&self) -> bool {
        self.gram().cholesky().is_some()
    }
}

/// Symmetric parts of the rho matrices in `(A11, A22, A12)` coordinates.
fn sym_coordinates() -> [Vector3<C64>; 4] {
    let h = 0.5;
    let bulk = Vector3::new(cr(h), cr(h), ZERO);
    [
        Vector3::new(cr(h), cr(-h), c(0.0, h)),
        Vector3::new(cr(h), cr(-h), c(0.0, -h)),
        bulk,
        bulk,
    ]
}

pub fn voigt_to_rho(v: &VoigtTensor) -> RhoTensor {
    let g = v.gram().map(cr);
    let b = sym_coordinates();
    RhoTensor(Matrix4::from_fn(|j, k| b[j].dotc(&(g * b[k]))))
}

/// Inverse of [`voigt_to_rho`]; imaginary round-off is discarded.
pub fn rho_to_voigt(t: &RhoTensor) -> VoigtTensor {
    let b = sym_coordinates();
    let basis = Matrix3::from_columns(&[b[0], b[1], b[2]]);
    let m3 = Matrix3::from_fn(|i, j| t.0[(i, j)]);
    let inv = basis
        .try_inverse()
        .expect("rho coordinates are independent");
    let g = inv.adjoint() * m3 * inv;
    VoigtTensor {
        c1111: g[(0, 0)].re,
        c1122: g[(0, 1)].re,
        c1112: g[(0, 2)].re / 2.0,
        c2222: g[(1, 1)].re,
        c2212: g[(1, 2)].re / 2.0,
        c1212: g[(2, 2)].re / 4.0,
    }
}

/// Diagonal rotation `diag(e^{2i theta}, e^{-2i theta}, 1, 1)`.
pub fn rotation_matrix(theta: f64) -> Matrix4<C64> {
    Matrix4::from_diagonal(&Vector4::new(cis(2.0 * theta), cis(-2.0 * theta), ONE, ONE))
}

/// `R_theta C R_theta^H`. Note that this corresponds to a physical rotation of the
/// material by `-theta`.
pub fn rotate_tensor(t: &RhoTensor, theta: f64) -> RhoTensor {
    let r = rotation_matrix(theta);
    RhoTensor(r * t.0 * r.adjoint())
}

pub fn rotate_vector(v: &RhoVector, theta: f64) -> RhoVector {
    RhoVector(rotation_matrix(theta) * v.0)
}

/// Reflection of the material about the x1 axis: entrywise conjugation of the
/// rho matrix (equivalently `P M P` with `P` swapping 1<->2 and 3<->4).
pub fn mirror_tensor(t: &RhoTensor) -> RhoTensor {
    RhoTensor(t.0.map(|z| z.conj()))
}

/// Inverse on the space of symmetric matrices.
pub fn invert_on_symmetric(t: &RhoTensor) -> Result<RhoTensor> {
    let r = hermitianize3(&t.restrict());
    let inv = r.try_inverse().ok_or(Error::SingularOnSymmetric)?;
    let scale = r.norm() * inv.norm();
    if !scale.is_finite() || scale > 1e14 {
        return Err(Error::SingularOnSymmetric);
    }
    Ok(RhoTensor::expand(&hermitianize3(&inv)))
}

/// Translation used for the shear bounds, `diag(t1, t2, -t1, -t2)`.
pub fn translation_t(t1: f64, t2: f64) -> RhoTensor {
    RhoTensor(Matrix4::from_diagonal(&Vector4::new(
        cr(t1),
        cr(t2),
        cr(-t1),
        cr(-t2),
    )))
}

/// Translation used for the upper bulk bound, `diag(-t0, -t0, t0, t0)`.
pub fn translation_t0(t0: f64) -> RhoTensor {
    RhoTensor(Matrix4::from_diagonal(&Vector4::new(
        cr(-t0),
        cr(-t0),
        cr(t0),
        cr(t0),
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpKind {
    Stress,
    Displacement,
    Strain,
}

/// Whether `d` can be the jump of the given field across an interface with
/// normal `(0, 1)`.
pub fn check_jump(kind: JumpKind, d: &RhoVector, tol: f64) -> bool {
    let a = d.0;
    let scale = tol * (1.0 + d.norm());
    match kind {
        JumpKind::Stress => (1..4).all(|k| (a[k] - a[0]).norm() <= scale),
        JumpKind::Displacement => (a[2] + a[0]).norm() <= scale && (a[3] + a[1]).norm() <= scale,
        JumpKind::Strain => {
            (a[2] - a[3]).norm() <= scale && (a[0] + a[1] + a[2] + a[3]).norm() <= scale
        }
    }
}

/// Fourier-space form of a divergence-free field, `i (g conj(k), -d k, -g k, d conj(k))`.
pub fn divergence_free_form(g: C64, d: C64, k: C64) -> RhoVector {
    RhoVector::new(I * g * k.conj(), -I * d * k, -I * g * k, I * d * k.conj())
}

/// Fourier-space form of a displacement gradient, `(a conj(k), b k, a k, b conj(k))`.
pub fn gradient_form(a: C64, b: C64, k: C64) -> RhoVector {
    RhoVector::new(a * k.conj(), b * k, a * k, b * k.conj())
}

/// Recovers `(a, b)` if `v` has the displacement-gradient form for wavevector `k`.
pub fn match_gradient_form(v: &RhoVector, k: C64, tol: f64) -> Option<(C64, C64)> {
    let a = v.a3() / k;
    let b = v.a2() / k;
    let back = gradient_form(a, b, k);
    ((back.0 - v.0).norm() <= tol * (1.0 + v.norm())).then_some((a, b))
}

/// Recovers `(g, d)` if `v` has the divergence-free form for wavevector `k`.
pub fn match_divergence_free_form(v: &RhoVector, k: C64, tol: f64) -> Option<(C64, C64)> {
    let g = v.a3() / (-I * k);
    let d = v.a2() / (-I * k);
    let back = divergence_free_form(g, d, k);
    ((back.0 - v.0).norm() <= tol * (1.0 + v.norm())).then_some((g, d))
}
