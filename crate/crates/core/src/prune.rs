//! Pruning of power-diagram faces that never reach the open unit ball.
//!
//! Power cells may meet outside the Klein ball; such contacts are not
//! hyperbolic Voronoi adjacencies. A face of the regular triangulation is
//! kept iff its dual polytope has a point of Euclidean norm below
//! `1 - tolerance`. Faces tangent to the sphere (within the tolerance) are
//! removed, matching the open-ball model.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{dot, norm_sq};
use crate::par::{map_slice, Execution};
use crate::power::{DelaunayComplex, DualFace};
use crate::qp::{min_norm_point, QpOptions};

pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneMethod {
    Algebraic2d,
    Qp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneOptions {
    pub tolerance: f64,
    /// Use the iterative solver even in the plane.
    pub force_qp: bool,
    pub qp: QpOptions,
    pub execution: Execution,
}

impl Default for PruneOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_PRUNE_TOLERANCE,
            force_qp: false,
            qp: QpOptions::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinNorm {
    pub point: Vec<f64>,
    pub norm: f64,
    pub method: PruneMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceRecord {
    pub vertices: Vec<usize>,
    pub min_norm: f64,
    pub method: PruneMethod,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneReport {
    pub tolerance: f64,
    pub kept_edges: Vec<[usize; 2]>,
    pub removed_edges: Vec<[usize; 2]>,
    pub kept_simplices: Vec<Vec<usize>>,
    pub removed_simplices: Vec<Vec<usize>>,
    pub edge_faces: Vec<FaceRecord>,
    pub simplex_faces: Vec<FaceRecord>,
}

/// Closed-form minimum-norm point of a planar point, segment or ray.
///
/// Returns `None` for any other face shape (or non-planar input).
pub fn min_norm_point_2d(face: &DualFace) -> Option<MinNorm> {
    let done = |p: Vec<f64>| {
        let norm = norm_sq(&p).sqrt();
        Some(MinNorm {
            point: p,
            norm,
            method: PruneMethod::Algebraic2d,
        })
    };
    if face.generators.iter().chain(&face.rays).any(|v| v.len() != 2) {
        return None;
    }
    match (face.generators.as_slice(), face.rays.as_slice()) {
        ([p], []) => done(p.clone()),
        ([a, b], []) => {
            let d = [b[0] - a[0], b[1] - a[1]];
            let dd = d[0] * d[0] + d[1] * d[1];
            let t = if dd > 0.0 { (-dot(a, &d) / dd).clamp(0.0, 1.0) } else { 0.0 };
            done(vec![a[0] + t * d[0], a[1] + t * d[1]])
        }
        ([a], [d]) => {
            let dd = d[0] * d[0] + d[1] * d[1];
            let t = if dd > 0.0 { (-dot(a, d) / dd).max(0.0) } else { 0.0 };
            done(vec![a[0] + t * d[0], a[1] + t * d[1]])
        }
        _ => None,
    }
}

/// Minimum-norm point by the iterative solver (any dimension).
pub fn min_norm_point_qp(face: &DualFace, opts: &QpOptions) -> Result<MinNorm> {
    let r = min_norm_point(&face.generators, &face.rays, opts)?;
    Ok(MinNorm {
        point: r.point,
        norm: r.norm,
        method: PruneMethod::Qp,
    })
}

fn face_min_norm(face: &DualFace, dim: usize, opts: &PruneOptions) -> Result<MinNorm> {
    if dim == 2 && !opts.force_qp {
        if let Some(m) = min_norm_point_2d(face) {
            return Ok(m);
        }
    }
    min_norm_point_qp(face, &opts.qp)
}

/// Flags every edge and top simplex of `complex` as kept or removed.
///
/// Previously removed faces are re-evaluated, so pruning is idempotent.
pub fn prune_complex(complex: &DelaunayComplex, opts: &PruneOptions) -> Result<(DelaunayComplex, PruneReport)> {
    let threshold = 1.0 - opts.tolerance;
    let dim = complex.dim;

    let edge_norms: Vec<Result<MinNorm>> =
        map_slice(opts.execution, &complex.edges, |e| face_min_norm(&e.dual, dim, opts));
    let simplex_norms: Vec<Result<MinNorm>> = map_slice(opts.execution, &complex.simplices, |s| {
        let point = DualFace {
            generators: vec![s.dual_vertex.clone()],
            rays: Vec::new(),
        };
        face_min_norm(&point, dim, opts)
    });

    let mut out = complex.clone();
    let mut report = PruneReport {
        tolerance: opts.tolerance,
        kept_edges: Vec::new(),
        removed_edges: Vec::new(),
        kept_simplices: Vec::new(),
        removed_simplices: Vec::new(),
        edge_faces: Vec::with_capacity(out.edges.len()),
        simplex_faces: Vec::with_capacity(out.simplices.len()),
    };
    for (e, m) in out.edges.iter_mut().zip(edge_norms) {
        let m = m?;
        e.kept = m.norm < threshold;
        if e.kept {
            report.kept_edges.push([e.a, e.b]);
        } else {
            report.removed_edges.push([e.a, e.b]);
        }
        report.edge_faces.push(FaceRecord {
            vertices: vec![e.a, e.b],
            min_norm: m.norm,
            method: m.method,
            kept: e.kept,
        });
    }
    for (s, m) in out.simplices.iter_mut().zip(simplex_norms) {
        let m = m?;
        s.kept = m.norm < threshold;
        if s.kept {
            report.kept_simplices.push(s.vertices.clone());
        } else {
            report.removed_simplices.push(s.vertices.clone());
        }
        report.simplex_faces.push(FaceRecord {
            vertices: s.vertices.clone(),
            min_norm: m.norm,
            method: m.method,
            kept: s.kept,
        });
    }
    Ok((out, report))
}
