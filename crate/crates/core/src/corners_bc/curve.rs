//! Planar curve utilities: segment crossings, Newton refinement of self-intersections,
//! and winding numbers.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rho_core::C64;

fn orient(p: C64, q: C64, r: C64) -> f64 {
    (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re)
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Pairs `(i, j)`, `i + 1 < j`, of polyline segments `[i, i+1]` and `[j, j+1]` that
/// cross properly. Sorted by `i`, then `j`.
pub fn find_crossings(points: &[C64]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 4 {
        return Vec::new();
    }
    let finite: Vec<bool> = points
        .iter()
        .map(|p| p.re.is_finite() && p.im.is_finite())
        .collect();
    let segs: Vec<usize> = (0..n - 1).filter(|&i| finite[i] && finite[i + 1]).collect();
    let mut lengths: Vec<f64> = segs
        .iter()
        .map(|&i| (points[i + 1] - points[i]).norm())
        .filter(|l| *l > 0.0)
        .collect();
    if lengths.is_empty() {
        return Vec::new();
    }
    let mid = lengths.len() / 2;
    let cell = 2.0 * *lengths.select_nth_unstable_by(mid, f64::total_cmp).1;
    let (lo_x, lo_y) = segs
        .iter()
        .fold((f64::INFINITY, f64::INFINITY), |(x, y), &i| {
            (
                x.min(points[i].re).min(points[i + 1].re),
                y.min(points[i].im).min(points[i + 1].im),
            )
        });
    let key = |x: f64, y: f64| {
        (
            ((x - lo_x) / cell).floor() as i64,
            ((y - lo_y) / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    // Segments covering many cells are compared against everything instead.
    let mut long = Vec::new();
    for &i in &segs {
        let (p, q) = (points[i], points[i + 1]);
        let (x0, y0) = key(p.re.min(q.re), p.im.min(q.im));
        let (x1, y1) = key(p.re.max(q.re), p.im.max(q.im));
        if (x1 - x0 + 1) * (y1 - y0 + 1) > 64 {
            long.push(i);
            continue;
        }
        for gx in x0..=x1 {
            for gy in y0..=y1 {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut out = Vec::new();
    let mut test = |i: usize, j: usize| {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if j > i + 1 && segments_cross(points[i], points[i + 1], points[j], points[j + 1]) {
            out.push((i, j));
        }
    };
    for bucket in grid.values() {
        for (k, &i) in bucket.iter().enumerate() {
            for &j in &bucket[k + 1..] {
                test(i, j);
            }
        }
    }
    for &i in &long {
        for &j in &segs {
            test(i, j);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Outcome of a Newton solve for `curve(a) = curve(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub a: f64,
    pub b: f64,
    pub point: C64,
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton iteration for `curve(a) = curve(b)`. `curve` returns the point and
/// its derivative with respect to the parameter. Stops when the residual is below
/// `tol` relative to the point or at the rounding floor of the evaluation, or when
/// the Newton step is at rounding level.
pub fn refine_intersection<F>(
    curve: F,
    a0: f64,
    b0: f64,
    max_iter: usize,
    tol: f64,
) -> Option<Intersection>
where
    F: Fn(f64) -> (C64, C64),
{
    let (mut a, mut b) = (a0, b0);
    let eval = |a: f64, b: f64| {
        let (pa, da) = curve(a);
        let (pb, db) = curve(b);
        (pa - pb, pa, da, db)
    };
    let (mut f, mut pa, mut da, mut db) = eval(a, b);
    for it in 0..=max_iter {
        let scale = 1.0 + pa.norm();
        // Rounding in the parameters alone moves the residual by about this much.
        let floor = 16.0 * f64::EPSILON * (pa.norm() + a.abs() * da.norm() + b.abs() * db.norm());
        if f.norm() <= (tol * scale).max(floor) {
            return Some(Intersection {
                a,
                b,
                point: pa,
                residual: f.norm(),
                iterations: it,
            });
        }
        if it == max_iter {
            break;
        }
        // [Re da, -Re db; Im da, -Im db] [sa; sb] = -[Re f; Im f]
        let det = da.re * (-db.im) - (-db.re) * da.im;
        if !(det.abs() > 0.0) || !det.is_finite() {
            return None;
        }
        let sa = (-f.re * (-db.im) - (-db.re) * (-f.im)) / det;
        let sb = (da.re * (-f.im) - (-f.re) * da.im) / det;
        // At the rounding floor the residual stops decreasing; a negligible step means converged.
        if sa.abs().max(sb.abs()) <= 16.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            return Some(Intersection {
                a,
                b,
                point: pa,
                residual: f.norm(),
                iterations: it,
            });
        }
        let mut step = 1.0;
        let current = f.norm();
        loop {
            let (na, nb) = (a + step * sa, b + step * sb);
            let (nf, npa, nda, ndb) = eval(na, nb);
            if nf.norm().is_finite() && nf.norm() < current {
                a = na;
                b = nb;
                f = nf;
                pa = npa;
                da = nda;
                db = ndb;
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                return None;
            }
        }
    }
    None
}

/// Winding number of a closed polyline about the origin.
///
/// Fails with `UndersampledTrajectory` when two consecutive points differ in argument
/// by more than `pi/2`.
pub fn winding_number(points: &[C64]) -> Result<f64> {
    let mut total = 0.0;
    let n = points.len();
    for k in 0..n {
        let (p, q) = (points[k], points[(k + 1) % n]);
        let step = (q / p).arg();
        if !step.is_finite() || step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::UndersampledTrajectory);
        }
        total += step;
    }
    Ok(total / std::f64::consts::TAU)
}
