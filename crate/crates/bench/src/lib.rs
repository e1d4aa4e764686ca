//! Fixed inputs shared by the benchmarks.

use polybounds_core::corners_ad::in_omega;
use polybounds_core::{VoigtTensor, C64};

/// Non-orthotropic positive-definite crystals with every corner attainable.
pub fn crystals() -> Vec<VoigtTensor> {
    let v = |c1111, c1122, c1112, c2222, c2212, c1212| VoigtTensor {
        c1111,
        c1122,
        c1112,
        c2222,
        c2212,
        c1212,
    };
    vec![
        v(3.0, 0.8, 0.4, 2.0, -0.3, 1.1),
        v(2.2, 0.3, -0.2, 1.6, 0.25, 0.7),
        v(4.0, 1.5, 0.6, 3.1, 0.2, 1.4),
    ]
}

/// Points of the admissible region for `scale`, on a fixed lattice.
pub fn omega_points(scale: f64, n: usize) -> Vec<C64> {
    let side = (n as f64).sqrt().ceil() as usize * 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..side {
        for j in 0..side {
            let z = C64::new(
                -5.5 + 5.9 * (i as f64 + 0.5) / side as f64,
                -5.0 + 10.0 * (j as f64 + 0.5) / side as f64,
            );
            if out.len() < n
                && z.im.abs() > 1e-3
                && z.re.abs() > 1e-3
                && in_omega(z * scale, scale, 1e-6)
            {
                out.push(z * scale);
            }
        }
    }
    out
}
