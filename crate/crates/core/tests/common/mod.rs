#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use polybounds_core::sample::random_crystal;
use polybounds_core::{voigt_to_rho, RhoTensor, VoigtTensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub type Tensor4 = [[[[f64; 2]; 2]; 2]; 2];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rho(rng: &mut ChaCha8Rng) -> RhoTensor {
    voigt_to_rho(&random_crystal(rng, 0.2))
}

fn acoustic(c: &Tensor4, n: [f64; 2]) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| {
        let mut s = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                s += c[p][i][q][j] * n[p] * n[q];
            }
        }
        s
    })
}

fn stress(c: &Tensor4, e: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut s = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s[i][j] += c[i][j][k][l] * e[k][l];
                }
            }
        }
    }
    s
}

/// Effective tensor of a periodic layered medium with layer normal `n`, from a P1
/// finite-element solve of the one-dimensional cell problem in Cartesian components.
/// Each phase is split into `sub` equal elements; the solution is exact for
/// piecewise-constant layers, so refinement only guards against assembly mistakes.
pub fn layered_cell_oracle(phases: &[(VoigtTensor, f64)], n: [f64; 2], sub: usize) -> VoigtTensor {
    let len = n[0].hypot(n[1]);
    let n = [n[0] / len, n[1] / len];
    let mut cells: Vec<(Tensor4, f64)> = Vec::new();
    for (v, f) in phases {
        for _ in 0..sub {
            cells.push((v.components(), f / sub as f64));
        }
    }
    let m = cells.len();
    // Nodes 0..m with node m identified with node 0 and node 0 pinned.
    let dof = 2 * (m - 1);
    let node = |k: usize| {
        if k == 0 || k == m {
            None
        } else {
            Some(2 * (k - 1))
        }
    };
    let mut effective = [[[[0.0; 2]; 2]; 2]; 2];
    for (k, l) in [(0usize, 0usize), (1, 1), (0, 1)] {
        let mut e = [[0.0; 2]; 2];
        e[k][l] = if k == l { 1.0 } else { 0.5 };
        e[l][k] = e[k][l];
        let mut a = DMatrix::<f64>::zeros(dof, dof);
        let mut rhs = DVector::<f64>::zeros(dof);
        for (idx, (c, h)) in cells.iter().enumerate() {
            let ak = acoustic(c, n) / *h;
            let s = stress(c, &e);
            let tr = Vector2::new(
                s[0][0] * n[0] + s[0][1] * n[1],
                s[1][0] * n[0] + s[1][1] * n[1],
            );
            // Element unknown jump is u_{idx+1} - u_idx.
            for (na, sa) in [(node(idx + 1), 1.0), (node(idx), -1.0)] {
                let Some(ra) = na else { continue };
                for i in 0..2 {
                    rhs[ra + i] -= sa * tr[i];
                }
                for (nb, sb) in [(node(idx + 1), 1.0), (node(idx), -1.0)] {
                    let Some(rb) = nb else { continue };
                    for i in 0..2 {
                        for j in 0..2 {
                            a[(ra + i, rb + j)] += sa * sb * ak[(i, j)];
                        }
                    }
                }
            }
        }
        let u = a.lu().solve(&rhs).expect("cell problem is nonsingular");
        let at = |k: usize| node(k).map_or(Vector2::zeros(), |r| Vector2::new(u[r], u[r + 1]));
        let mut avg = [[0.0; 2]; 2];
        for (idx, (c, h)) in cells.iter().enumerate() {
            let g = (at(idx + 1) - at(idx)) / *h;
            let mut strain = e;
            for i in 0..2 {
                for j in 0..2 {
                    strain[i][j] += 0.5 * (g[i] * n[j] + g[j] * n[i]);
                }
            }
            let s = stress(c, &strain);
            for i in 0..2 {
                for j in 0..2 {
                    avg[i][j] += h * s[i][j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                effective[i][j][k][l] = avg[i][j];
                effective[i][j][l][k] = avg[i][j];
            }
        }
    }
    let c = effective;
    VoigtTensor {
        c1111: c[0][0][0][0],
        c1122: c[0][0][1][1],
        c1112: c[0][0][0][1],
        c2222: c[1][1][1][1],
        c2212: c[1][1][0][1],
        c1212: c[0][1][0][1],
    }
}

pub fn voigt_entries(v: &VoigtTensor) -> [f64; 6] {
    [v.c1111, v.c1122, v.c1112, v.c2222, v.c2212, v.c1212]
}

/// Largest componentwise difference relative to the largest component.
pub fn voigt_relative_error(a: &VoigtTensor, b: &VoigtTensor) -> f64 {
    let (ea, eb) = (voigt_entries(a), voigt_entries(b));
    let scale = ea
        .iter()
        .chain(eb.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    ea.iter()
        .zip(eb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}
