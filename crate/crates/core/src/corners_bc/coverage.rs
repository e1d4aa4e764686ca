//! Sweeps of the asymptotic family and how much of the unit disk their tails reach.

use serde::{Deserialize, Serialize};

use super::asymptotic::{
    looping_zi_range, self_intersection, AsymptoticFamily, Portion, SelfIntersection, ZiRange,
};
use crate::error::{Error, Result};
use crate::rho_core::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageOptions {
    /// Number of `zI` values, clustered toward the ends of the range.
    pub zi_count: usize,
    /// Overrides the looping range of the family.
    pub zi_range: Option<(f64, f64)>,
    pub points_per_tail: usize,
    /// Grid points per axis over `[-1, 1]`.
    pub grid: usize,
    pub epsilon: f64,
    /// Also report loop-portion samples to the callback (never counted for coverage).
    pub emit_loops: bool,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions {
            zi_count: 3000,
            zi_range: None,
            points_per_tail: 400,
            grid: 100,
            epsilon: 0.02,
            emit_loops: false,
        }
    }
}

/// One sample of a family member, before mirroring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageSample {
    /// Index of the member within the sweep.
    pub member: usize,
    pub zi: f64,
    pub zr: f64,
    pub t: f64,
    pub c1_prime: C64,
    pub portion: Portion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub alpha1: f64,
    pub zi_range: (f64, f64),
    pub members: usize,
    /// Members whose intersection is admissible and inside the disk.
    pub looping_members: usize,
    pub tail_samples: usize,
    pub grid_points: usize,
    pub covered_points: usize,
    pub coverage: f64,
    pub epsilon: f64,
}

struct DiskGrid {
    n: usize,
    step: f64,
    inside: Vec<bool>,
    covered: Vec<bool>,
}

impl DiskGrid {
    fn new(n: usize) -> DiskGrid {
        let step = 2.0 / (n - 1) as f64;
        let mut inside = vec![false; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let (x, y) = (-1.0 + ix as f64 * step, -1.0 + iy as f64 * step);
                inside[iy * n + ix] = x * x + y * y < 1.0;
            }
        }
        DiskGrid {
            n,
            step,
            inside,
            covered: vec![false; n * n],
        }
    }

    fn mark(&mut self, p: C64, eps: f64) {
        let index = |v: f64| ((v + 1.0) / self.step).floor() as i64;
        let clamp = |i: i64| i.clamp(0, self.n as i64 - 1) as usize;
        let (x0, x1) = (clamp(index(p.re - eps)), clamp(index(p.re + eps) + 1));
        let (y0, y1) = (clamp(index(p.im - eps)), clamp(index(p.im + eps) + 1));
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let q = C64::new(-1.0 + ix as f64 * self.step, -1.0 + iy as f64 * self.step);
                if (q - p).norm() < eps {
                    self.covered[iy * self.n + ix] = true;
                }
            }
        }
    }

    fn counts(&self) -> (usize, usize) {
        let total = self.inside.iter().filter(|&&b| b).count();
        let hit = self
            .inside
            .iter()
            .zip(&self.covered)
            .filter(|(&i, &c)| i && c)
            .count();
        (total, hit)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        if n == 1 {
            a
        } else {
            a + (b - a) * k as f64 / (n - 1) as f64
        }
    })
}

/// Family members with an admissible in-disk self-intersection for one `zI`.
fn members(alpha1: f64, zi: f64) -> impl Iterator<Item = (AsymptoticFamily, SelfIntersection)> {
    [true, false].into_iter().filter_map(move |sign| {
        let fam = AsymptoticFamily::new(alpha1, zi, sign).ok()?;
        if fam.zr == 0.0 {
            return None;
        }
        let si = self_intersection(&fam).ok()?;
        si.admissible.then_some((fam, si))
    })
}

/// Sweeps the looping members of the family, hands every in-disk tail sample to
/// `sink`, and reports the fraction of disk grid points within `epsilon` of a tail
/// sample or its mirror image.
pub fn disk_coverage_sweep<F>(
    alpha1: f64,
    opts: &CoverageOptions,
    mut sink: F,
) -> Result<CoverageReport>
where
    F: FnMut(&CoverageSample),
{
    if !(opts.grid >= 2 && opts.epsilon > 0.0 && opts.points_per_tail >= 2) {
        return Err(Error::InvalidInput(
            "coverage grid needs at least 2 points, two tail points and epsilon > 0".into(),
        ));
    }
    let range = match opts.zi_range {
        Some((lo, hi)) if lo < hi => ZiRange {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        },
        Some((lo, hi)) => return Err(Error::InvalidInput(format!("empty zI range [{lo}, {hi}]"))),
        None => looping_zi_range(alpha1).ok_or_else(|| {
            Error::InvalidInput(format!("alpha1 = {alpha1} has no looping family members"))
        })?,
    };
    let mut grid = DiskGrid::new(opts.grid);
    let mut count = 0usize;
    let mut looping = 0usize;
    let mut tail_samples = 0usize;
    for zi in range.clustered(opts.zi_count) {
        for (fam, si) in members(alpha1, zi) {
            let member = count;
            count += 1;
            looping += 1;
            let (lo, hi) = fam.admissible_s();
            let (near, far) = if si.s_minus.abs() < si.s_plus.abs() {
                (si.s_minus, si.s_plus)
            } else {
                (si.s_plus, si.s_minus)
            };
            let end = if lo == 0.0 { hi } else { lo };
            let mut emit = |s: f64, portion: Portion, grid: &mut DiskGrid| {
                let p = fam.c1_at_s(s);
                if !(p.norm() < 1.0) {
                    return;
                }
                if portion != Portion::Loop {
                    tail_samples += 1;
                    grid.mark(p, opts.epsilon);
                    grid.mark(p.conj(), opts.epsilon);
                } else if !opts.emit_loops {
                    return;
                }
                sink(&CoverageSample {
                    member,
                    zi,
                    zr: fam.zr,
                    t: 1.0 / s - fam.delta,
                    c1_prime: p,
                    portion,
                });
            };
            for s in linspace(0.0, near, opts.points_per_tail).skip(1) {
                emit(s, Portion::Leading, &mut grid);
            }
            if opts.emit_loops {
                for s in linspace(si.s_minus, si.s_plus, opts.points_per_tail) {
                    emit(s, Portion::Loop, &mut grid);
                }
            }
            for s in linspace(far, end, opts.points_per_tail) {
                emit(s, Portion::Trailing, &mut grid);
            }
        }
    }
    let (grid_points, covered_points) = grid.counts();
    Ok(CoverageReport {
        alpha1,
        zi_range: (range.lo, range.hi),
        members: count,
        looping_members: looping,
        tail_samples,
        grid_points,
        covered_points,
        coverage: covered_points as f64 / grid_points.max(1) as f64,
        epsilon: opts.epsilon,
    })
}
