//! Minimum-norm point of `conv(V) + cone(R)` by Wolfe's corral method.
//!
//! The classic algorithm keeps a "corral" of affinely independent atoms whose
//! affine hull minimiser lies in their relative interior. Rays are handled as
//! atoms whose coefficients are only sign-constrained, not part of the
//! convex-combination sum. Optimality is certified by the Frank-Wolfe gap
//! `|x|^2 - min_v <x, v>` together with `min_r <x, r> >= 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{dot, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpOptions {
    /// Stopping gap, relative to `max(1, largest squared atom norm)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    pub point: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
    /// Final optimality gap (absolute, squared-length units).
    pub gap: f64,
}

struct Atoms<'a> {
    vertices: &'a [Vec<f64>],
    rays: Vec<Vec<f64>>,
}

impl Atoms<'_> {
    fn get(&self, i: usize) -> &[f64] {
        if i < self.vertices.len() {
            &self.vertices[i]
        } else {
            &self.rays[i - self.vertices.len()]
        }
    }

    fn is_vertex(&self, i: usize) -> bool {
        i < self.vertices.len()
    }

    fn combine(&self, set: &[usize], coeffs: &[f64]) -> Vec<f64> {
        let n = self.vertices[0].len();
        let mut x = vec![0.0; n];
        for (&a, &c) in set.iter().zip(coeffs) {
            for (xi, ai) in x.iter_mut().zip(self.get(a)) {
                *xi += c * ai;
            }
        }
        x
    }

    /// Minimiser of `|sum c_i a_i|^2` subject to the vertex coefficients summing to one.
    fn affine_minimizer(&self, set: &[usize]) -> Option<Vec<f64>> {
        let m = set.len();
        let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
        for i in 0..m {
            for j in i..m {
                let g = dot(self.get(set[i]), self.get(set[j]));
                kkt[(i, j)] = g;
                kkt[(j, i)] = g;
            }
            if self.is_vertex(set[i]) {
                kkt[(i, m)] = 1.0;
                kkt[(m, i)] = 1.0;
            }
        }
        let mut rhs = DVector::<f64>::zeros(m + 1);
        rhs[m] = 1.0;
        let sol = kkt.clone().lu().solve(&rhs).filter(|s| s.iter().all(|v| v.is_finite()));
        let sol = match sol {
            Some(s) => s,
            None => kkt.svd(true, true).solve(&rhs, 1e-14).ok()?,
        };
        Some(sol.iter().take(m).copied().collect())
    }
}

/// Minimum Euclidean norm over `conv(generators) + cone(rays)`.
///
/// Starts from the generator of smallest norm (first one on ties).
pub fn min_norm_point(generators: &[Vec<f64>], rays: &[Vec<f64>], opts: &QpOptions) -> Result<MinNormPoint> {
    if generators.is_empty() {
        return Err(Error::EmptyInput("minimum-norm point needs at least one generator".into()));
    }
    let rays: Vec<Vec<f64>> = rays
        .iter()
        .filter_map(|r| {
            let len = norm_sq(r).sqrt();
            (len > 0.0).then(|| r.iter().map(|x| x / len).collect())
        })
        .collect();
    let atoms = Atoms {
        vertices: generators,
        rays,
    };
    let total = generators.len() + atoms.rays.len();
    let scale = generators.iter().map(|v| norm_sq(v)).fold(1.0f64, f64::max);
    let tol = opts.tolerance * scale;
    // coefficients below this are treated as leaving the corral
    let drop_tol = 1e-14;

    let start = (0..generators.len())
        .min_by(|&a, &b| norm_sq(&generators[a]).total_cmp(&norm_sq(&generators[b])).then(a.cmp(&b)))
        .expect("nonempty");
    let mut set = vec![start];
    let mut coeffs = vec![1.0];
    let mut x = generators[start].clone();

    for iteration in 0..opts.max_iterations {
        let xx = norm_sq(&x);
        let (best_v, min_v) = (0..generators.len())
            .map(|i| (i, dot(&x, &generators[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let gap_v = xx - min_v;
        let best_r = (generators.len()..total)
            .map(|i| (i, dot(&x, atoms.get(i))))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let gap_r = best_r.map_or(f64::NEG_INFINITY, |(_, v)| -v * xx.sqrt().max(1.0));
        let gap = gap_v.max(gap_r).max(0.0);
        if gap <= tol {
            return Ok(finish(x, iteration, gap));
        }
        let entering = if gap_v >= gap_r { best_v } else { best_r.expect("ray gap").0 };
        if set.contains(&entering) {
            // rounding noise: the corral already contains the best atom
            if gap <= tol.sqrt() {
                return Ok(finish(x, iteration, gap));
            }
            return Err(Error::MaxIterations {
                iterations: iteration,
                gap,
            });
        }
        set.push(entering);
        coeffs.push(0.0);

        for _minor in 0..=set.len() {
            let y = match atoms.affine_minimizer(&set) {
                Some(y) => y,
                None => {
                    return Err(Error::MaxIterations {
                        iterations: iteration,
                        gap,
                    })
                }
            };
            if y.iter().all(|&c| c > drop_tol) {
                coeffs = y;
                break;
            }
            let mut theta = 1.0f64;
            for (c, yc) in coeffs.iter().zip(&y) {
                if *yc <= drop_tol && c - yc > 0.0 {
                    theta = theta.min(c / (c - yc));
                }
            }
            let mut next_set = Vec::with_capacity(set.len());
            let mut next_coeffs = Vec::with_capacity(set.len());
            for (i, (&c, &yc)) in coeffs.iter().zip(&y).enumerate() {
                let v = (1.0 - theta) * c + theta * yc;
                if v > drop_tol {
                    next_set.push(set[i]);
                    next_coeffs.push(v);
                }
            }
            if next_set.is_empty() || !next_set.iter().any(|&a| atoms.is_vertex(a)) {
                return Err(Error::MaxIterations {
                    iterations: iteration,
                    gap,
                });
            }
            set = next_set;
            coeffs = next_coeffs;
            let sum: f64 = set.iter().zip(&coeffs).filter(|(a, _)| atoms.is_vertex(**a)).map(|(_, c)| c).sum();
            for (a, c) in set.iter().zip(coeffs.iter_mut()) {
                if atoms.is_vertex(*a) {
                    *c /= sum;
                }
            }
        }
        x = atoms.combine(&set, &coeffs);
    }
    let xx = norm_sq(&x);
    let gap = generators.iter().map(|v| xx - dot(&x, v)).fold(0.0, f64::max);
    Err(Error::MaxIterations {
        iterations: opts.max_iterations,
        gap,
    })
}

fn finish(x: Vec<f64>, iterations: usize, gap: f64) -> MinNormPoint {
    let norm = norm_sq(&x).sqrt();
    MinNormPoint {
        point: x,
        norm,
        iterations,
        gap,
    }
}
