//! Small-angle family of trajectories near `c1 = 1`, parameterized by the imaginary
//! part `zI` of the scaled offset `z`.

use serde::{Deserialize, Serialize};

use super::curve::{refine_intersection, winding_number, Intersection};
use super::trajectory::c1_along_with_derivative;
use crate::error::{Error, Result};
use crate::rho_core::{c, C64, I, ONE};

/// One member of the family. `delta` shifts the trajectory parameter: `s = 1/(delta + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFamily {
    pub alpha1: f64,
    pub zi: f64,
    pub zr: f64,
    pub delta: f64,
}

/// Right-hand side of the `zR^2` relation.
pub fn zr_squared(alpha1: f64, zi: f64) -> f64 {
    let d = 2.0 * alpha1 - 1.0;
    -(2.0 + (zi - 1.0) * d) * d * zi * zi / (zi + 1.0)
}

/// The `zI` interval on which the family loops around the origin, with closedness of
/// each end. Empty for `alpha1 = 1/2`.
pub fn looping_zi_range(alpha1: f64) -> Option<ZiRange> {
    let d = 2.0 * alpha1 - 1.0;
    if d == 0.0 || !d.is_finite() {
        None
    } else if d < 0.0 || d >= 2.0 {
        Some(ZiRange {
            lo: -1.0,
            hi: 0.0,
            lo_closed: false,
            hi_closed: false,
        })
    } else if d < 1.0 {
        Some(ZiRange {
            lo: 1.0 - 2.0 / d,
            hi: -1.0,
            lo_closed: true,
            hi_closed: false,
        })
    } else if d > 1.0 {
        Some(ZiRange {
            lo: -1.0,
            hi: 1.0 - 2.0 / d,
            lo_closed: false,
            hi_closed: true,
        })
    } else {
        // d = 1: the numerator vanishes only at zI = -1.
        None
    }
}

/// Positive `zI` admitted by the family, which exists only for `alpha1 < 1/2`.
pub fn positive_zi_range(alpha1: f64) -> Option<ZiRange> {
    let d = 2.0 * alpha1 - 1.0;
    (d < 0.0).then(|| ZiRange {
        lo: 0.0,
        hi: 1.0 + 2.0 / d.abs(),
        lo_closed: false,
        hi_closed: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZiRange {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl ZiRange {
    /// `count` interior points clustered toward both ends.
    pub fn clustered(&self, count: usize) -> Vec<f64> {
        (1..=count)
            .map(|k| {
                let u = k as f64 / (count + 1) as f64;
                let u = 0.5 - 0.5 * (std::f64::consts::PI * u).cos();
                self.lo + (self.hi - self.lo) * u
            })
            .collect()
    }
}

/// Loop classification of a family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopReport {
    /// Winding of the closed loop portion about the origin; zero when there is no loop.
    pub winding: i32,
    pub numeric: bool,
    pub analytic: bool,
}

/// Which tail of a family member a sample lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Portion {
    /// From the crystal end to the first intersection parameter.
    Leading,
    Loop,
    /// From the second intersection parameter to the end of the admissible interval.
    Trailing,
}

impl AsymptoticFamily {
    /// Member with the given `zI` and sign of `zR`.
    pub fn new(alpha1: f64, zi: f64, positive_zr: bool) -> Result<AsymptoticFamily> {
        let zr2 = zr_squared(alpha1, zi);
        if !(zr2 >= 0.0) || !zr2.is_finite() {
            return Err(Error::InadmissibleZI { zi });
        }
        let zr = if positive_zr { zr2.sqrt() } else { -zr2.sqrt() };
        let d = 2.0 * alpha1 - 1.0;
        let n = zr * zr + d * d * zi * zi;
        if !(n > 0.0) {
            return Err(Error::InadmissibleZI { zi });
        }
        let alpha2 = 1.0 - alpha1;
        let delta = zr - 4.0 * alpha2 * zr * zi / n;
        Ok(AsymptoticFamily {
            alpha1,
            zi,
            zr,
            delta,
        })
    }

    pub fn z(&self) -> C64 {
        c(self.zr, self.zi)
    }

    pub fn w(&self) -> C64 {
        self.z().inv()
    }

    /// Bulk coordinate at loop parameter `s`.
    pub fn c1_at_s(&self, s: f64) -> C64 {
        let w = self.w();
        let dl = self.delta;
        (w - s) * (ONE + (I - dl) * s) / (w * (ONE - (I + dl) * s))
    }

    pub fn c1_at_t(&self, t: f64) -> C64 {
        self.c1_at_s(1.0 / (self.delta + t))
    }

    /// Radicand of the intersection half-width.
    pub fn gamma_squared(&self) -> f64 {
        let w = self.w();
        let dl = self.delta;
        w.re * w.re + (1.0 - 2.0 * dl * w.re + 2.0 * w.im) / (dl * dl + 1.0)
    }

    /// Admissible loop parameters lie strictly between zero and `2 wR`.
    pub fn admissible_s(&self) -> (f64, f64) {
        let end = 2.0 * self.w().re;
        (end.min(0.0), end.max(0.0))
    }

    /// Winding of the loop portion, compared with the analytic predicate `zI < 0`.
    pub fn loops_origin(&self) -> Result<LoopReport> {
        let analytic = self.zi < 0.0;
        let g2 = self.gamma_squared();
        if !(g2 > 0.0) {
            return Ok(LoopReport {
                winding: 0,
                numeric: false,
                analytic,
            });
        }
        let g = g2.sqrt();
        let (lo, hi) = (self.w().re - g, self.w().re + g);
        let mut n = 4001;
        loop {
            let pts: Vec<C64> = (0..n)
                .map(|k| self.c1_at_s(lo + (hi - lo) * k as f64 / (n - 1) as f64))
                .collect();
            match winding_number(&pts) {
                Ok(w) => {
                    let winding = w.round() as i32;
                    return Ok(LoopReport {
                        winding,
                        numeric: winding.abs() == 1,
                        analytic,
                    });
                }
                Err(e) if n > 256_000 => return Err(e),
                Err(_) => n *= 4,
            }
        }
    }

    pub fn portion(&self, s: f64, si: &SelfIntersection) -> Portion {
        if s > si.s_minus && s < si.s_plus {
            Portion::Loop
        } else if s.abs() < si.s_minus.abs().min(si.s_plus.abs()) {
            Portion::Leading
        } else {
            Portion::Trailing
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfIntersection {
    pub wr: f64,
    pub wi: f64,
    pub gamma: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub c1_star: C64,
    /// `|c1'(s+) - c1'(s-)|`.
    pub mismatch: f64,
    /// Both intersection parameters lie strictly inside the admissible interval.
    pub admissible: bool,
}

/// Closed-form self-intersection of a family member.
pub fn self_intersection(fam: &AsymptoticFamily) -> Result<SelfIntersection> {
    let g2 = fam.gamma_squared();
    if !(g2 >= 0.0) {
        return Err(Error::NoRealGamma);
    }
    let w = fam.w();
    let gamma = g2.sqrt();
    let (s_plus, s_minus) = (w.re + gamma, w.re - gamma);
    let c1_star = fam.c1_at_s(s_plus);
    let mismatch = (c1_star - fam.c1_at_s(s_minus)).norm();
    if !(c1_star.norm() < 1.0) {
        return Err(Error::OutsideUnitDisk {
            modulus: c1_star.norm(),
        });
    }
    let (lo, hi) = fam.admissible_s();
    let inside = |s: f64| s > lo && s < hi;
    Ok(SelfIntersection {
        wr: w.re,
        wi: w.im,
        gamma,
        s_plus,
        s_minus,
        c1_star,
        mismatch,
        admissible: inside(s_plus) && inside(s_minus),
    })
}

/// Exact-trajectory data whose small-angle limit is a family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSeed {
    pub theta: f64,
    pub c1: C64,
    pub phi: f64,
    /// Layering parameters predicted for the two intersection points.
    pub tau_plus: f64,
    pub tau_minus: f64,
}

/// Seeds an exact trajectory at small angle `theta` from a family member and its
/// intersection.
pub fn asymptotic_seed(
    fam: &AsymptoticFamily,
    si: &SelfIntersection,
    theta: f64,
) -> AsymptoticSeed {
    let c1 = ONE + (fam.z() - c(0.0, 2.0)) * theta;
    let phi = 1.0 / (1.0 - theta * fam.delta);
    let tau_of = |s: f64| -1.0 - (1.0 / s - fam.delta) * theta;
    AsymptoticSeed {
        theta,
        c1,
        phi,
        tau_plus: tau_of(si.s_plus),
        tau_minus: tau_of(si.s_minus),
    }
}

/// Newton refinement of the exact self-intersection from the asymptotic seed.
pub fn refine_from_seed(seed: &AsymptoticSeed, max_iter: usize) -> Option<Intersection> {
    let curve = |t: f64| c1_along_with_derivative(seed.c1, seed.theta, seed.phi, t);
    refine_intersection(curve, seed.tau_plus, seed.tau_minus, max_iter, 1e-13)
}
