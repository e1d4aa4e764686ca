//! Random crystals for sweeps, tests and benchmarks.

use nalgebra::Matrix3;
use rand::Rng;

use crate::rho_core::VoigtTensor;

fn from_gram(g: &Matrix3<f64>) -> VoigtTensor {
    VoigtTensor {
        c1111: g[(0, 0)],
        c1122: g[(0, 1)],
        c1112: g[(0, 2)] / 2.0,
        c2222: g[(1, 1)],
        c2212: g[(1, 2)] / 2.0,
        c1212: g[(2, 2)] / 4.0,
    }
}

/// Fully anisotropic positive-definite crystal. The smallest eigenvalue of the
/// quadratic form is at least `floor`.
pub fn random_crystal<R: Rng + ?Sized>(rng: &mut R, floor: f64) -> VoigtTensor {
    let a = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    from_gram(&(a * a.transpose() + Matrix3::identity() * floor))
}

/// Orthotropic crystal with axes along x1, x2 (no shear-normal coupling).
pub fn random_orthotropic<R: Rng + ?Sized>(rng: &mut R) -> VoigtTensor {
    let c1111: f64 = rng.gen_range(1.0..4.0);
    let c2222: f64 = rng.gen_range(1.0..4.0);
    let bound = (c1111 * c2222).sqrt();
    VoigtTensor {
        c1111,
        c1122: rng.gen_range(-0.8..0.8) * bound,
        c1112: 0.0,
        c2222,
        c2212: 0.0,
        c1212: rng.gen_range(0.2..2.0),
    }
}

/// Planar bulk and shear moduli of a random isotropic material.
pub fn random_isotropic<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0))
}
