//! Power diagrams and regular triangulations of Klein-ball point sets.
//!
//! A Klein point `p` becomes a power site with center `s = p / (2 sqrt(1 - |p|^2))`
//! and squared weight `r^2 = |p|^2 / (4 (1 - |p|^2)) - 1 / sqrt(1 - |p|^2)`.
//! With these sites the power function `|x - s|^2 - r^2` differs from the
//! affine Klein bisector function `(1 - <x,p>) / sqrt(1 - |p|^2)` only by the
//! site-independent `|x|^2`, so power cells restricted to the open ball are
//! exactly the hyperbolic Voronoi cells.
//!
//! The regular triangulation is read off the lower convex hull of the sites
//! lifted to height `|s|^2 - r^2`; with that convention the dual vertex of a
//! simplex is the radical center of its sites. Ties (co-power-spherical
//! sites) are broken by symbolic perturbation ordered by site position.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::models::{dot, norm_sq, HyperbolicPoint, Model};
use crate::predicates::{affinely_spanning, lex_cmp, orient_sos, Sign};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSite {
    pub center: Vec<f64>,
    /// May be negative.
    pub squared_weight: f64,
    pub source_index: usize,
}

impl PowerSite {
    /// Height on the lifting paraboloid, `|s|^2 - r^2`.
    pub fn lifted_height(&self) -> f64 {
        norm_sq(&self.center) - self.squared_weight
    }

    /// Power distance `|x - s|^2 - r^2`.
    pub fn power(&self, x: &[f64]) -> f64 {
        let d: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d - self.squared_weight
    }
}

/// Maps a Klein point to its power site.
pub fn klein_to_power_site(p: &HyperbolicPoint, source_index: usize) -> Result<PowerSite> {
    if p.model() != Model::Klein {
        return Err(Error::InvalidPoint(format!("expected a klein point, got {}", p.model())));
    }
    klein_coords_to_power_site(p.coords(), source_index)
}

pub(crate) fn klein_coords_to_power_site(p: &[f64], source_index: usize) -> Result<PowerSite> {
    let r2 = norm_sq(p);
    let gap = 1.0 - r2;
    if !(gap > 0.0) || !r2.is_finite() {
        return Err(Error::InvalidPoint(format!("point {source_index} is not inside the unit ball")));
    }
    let root = gap.sqrt();
    let center: Vec<f64> = p.iter().map(|c| c / (2.0 * root)).collect();
    let squared_weight = r2 / (4.0 * gap) - 1.0 / root;
    if !squared_weight.is_finite() || center.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidPoint(format!("point {source_index} is too close to the boundary")));
    }
    Ok(PowerSite {
        center,
        squared_weight,
        source_index,
    })
}

/// A (possibly unbounded) convex polytope of the power diagram:
/// `conv(generators) + cone(rays)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualFace {
    pub generators: Vec<Vec<f64>>,
    /// Unit directions; empty for bounded faces.
    pub rays: Vec<Vec<f64>>,
}

impl DualFace {
    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    /// Source indices, `a < b`.
    pub a: usize,
    pub b: usize,
    pub kept: bool,
    pub dual: DualFace,
    /// Positions in [`DelaunayComplex::simplices`] containing this edge.
    pub simplices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simplex {
    /// Sorted source indices (`n + 1` of them).
    pub vertices: Vec<usize>,
    /// Radical center: equal power distance to every vertex site.
    pub dual_vertex: Vec<f64>,
    /// Hadamard ratio `|det| / prod(row norms)` of the radical-center system,
    /// in `[0, 1]`; values near zero flag ill-conditioned dual vertices.
    pub conditioning: f64,
    pub kept: bool,
}

/// A boundary `(n-1)`-face of the triangulation with its outward normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullFacet {
    pub vertices: Vec<usize>,
    pub simplex: usize,
    pub outward: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelaunayComplex {
    pub dim: usize,
    pub sites: Vec<PowerSite>,
    /// Source indices of sites with a nonempty power cell.
    pub vertices: Vec<usize>,
    /// Source indices of sites whose power cell is empty.
    pub redundant: Vec<usize>,
    pub edges: Vec<Edge>,
    pub simplices: Vec<Simplex>,
    pub hull_facets: Vec<HullFacet>,
}

impl DelaunayComplex {
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by(|e| (e.a, e.b).cmp(&key)).ok()
    }

    pub fn kept_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.kept)
    }

    /// Debug dump consumed by the renderer and test harnesses.
    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self)
    }
}

/// Dual power-diagram face of `edge`; `None` if the edge is not in the complex.
pub fn dual_face_of_edge(complex: &DelaunayComplex, a: usize, b: usize) -> Option<&DualFace> {
    complex.edge_index(a, b).map(|i| &complex.edges[i].dual)
}

/// Regular triangulation of `sites` (the power-diagram dual).
pub fn regular_triangulation(sites: &[PowerSite]) -> Result<DelaunayComplex> {
    let Some(first) = sites.first() else {
        return Err(Error::DegenerateInput("no sites".into()));
    };
    let n = first.center.len();
    if n == 0 || sites.iter().any(|s| s.center.len() != n) {
        return Err(Error::DegenerateInput("sites must share a positive dimension".into()));
    }
    if n + 2 > crate::predicates::MAX_ORDER {
        return Err(Error::DegenerateInput(format!("dimension {n} is not supported")));
    }
    if sites.len() < n + 1 {
        return Err(Error::DegenerateInput(format!(
            "need at least {} sites in dimension {n}, got {}",
            n + 1,
            sites.len()
        )));
    }
    for s in sites {
        if !s.squared_weight.is_finite() || s.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("site {} is not finite", s.source_index)));
        }
    }

    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&sites[a].center, &sites[b].center).then(a.cmp(&b)));
    for w in order.windows(2) {
        if sites[w[0]].center == sites[w[1]].center {
            let (x, y) = (sites[w[0]].source_index, sites[w[1]].source_index);
            return Err(Error::DuplicateSite {
                first: x.min(y),
                second: x.max(y),
            });
        }
    }

    let centers: Vec<Vec<f64>> = sites.iter().map(|s| s.center.clone()).collect();
    if !affinely_spanning(&centers, n) {
        return Err(Error::DegenerateInput("all sites are affinely dependent".into()));
    }

    let stride = n + 2;
    let lower: Vec<(Vec<usize>, Vec<Option<usize>>)> = if sites.len() == n + 1 {
        let verts: Vec<usize> = (0..=n).collect();
        vec![(verts, vec![None; n + 1])]
    } else {
        let lifted: Vec<Vec<f64>> = sites
            .iter()
            .map(|s| {
                let mut v = s.center.clone();
                v.push(s.lifted_height());
                v
            })
            .collect();
        let hull = convex_hull(&lifted, stride);
        let mut is_lower = vec![false; hull.facets.len()];
        for (i, f) in hull.facets.iter().enumerate() {
            if f.alive {
                let pts: Vec<&[f64]> = f.verts.iter().map(|&v| &sites[v].center[..]).collect();
                is_lower[i] = orient_sos(&pts, &f.verts, stride) == Sign::Positive;
            }
        }
        hull.facets
            .iter()
            .enumerate()
            .filter(|(i, _)| is_lower[*i])
            .map(|(_, f)| {
                let nbrs = f.neighbors.iter().map(|&g| if is_lower[g] { Some(g) } else { None }).collect();
                (f.verts.clone(), nbrs)
            })
            .collect()
    };

    // Boundary ridges first collected by position, then keyed by simplex.
    let mut simplex_rows: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> = lower
        .iter()
        .map(|(verts, nbrs)| {
            let mut sorted = verts.clone();
            sorted.sort_unstable();
            let boundary_opposite: Vec<usize> = verts
                .iter()
                .zip(nbrs)
                .filter(|(_, g)| g.is_none())
                .map(|(&v, _)| v)
                .collect();
            (sorted, verts.clone(), boundary_opposite)
        })
        .collect();
    simplex_rows.sort_by(|a, b| a.0.cmp(&b.0));

    let mut simplices = Vec::with_capacity(simplex_rows.len());
    let mut hull_facets = Vec::new();
    for (si, (sorted, _, opposite)) in simplex_rows.iter().enumerate() {
        let (dual_vertex, conditioning) = radical_center(sites, sorted)?;
        simplices.push(Simplex {
            vertices: sorted.iter().map(|&v| sites[v].source_index).collect(),
            dual_vertex,
            conditioning,
            kept: true,
        });
        for &o in opposite {
            let ridge: Vec<usize> = sorted.iter().copied().filter(|&v| v != o).collect();
            let outward = outward_normal(sites, &ridge, o);
            hull_facets.push(HullFacet {
                vertices: ridge.iter().map(|&v| sites[v].source_index).collect(),
                simplex: si,
                outward,
            });
        }
    }

    // edges keyed by source index
    let mut edge_map: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (si, s) in simplices.iter().enumerate() {
        for i in 0..s.vertices.len() {
            for j in (i + 1)..s.vertices.len() {
                let key = (s.vertices[i].min(s.vertices[j]), s.vertices[i].max(s.vertices[j]));
                edge_map.entry(key).or_default().0.push(si);
            }
        }
    }
    for (hi, h) in hull_facets.iter().enumerate() {
        for i in 0..h.vertices.len() {
            for j in (i + 1)..h.vertices.len() {
                let key = (h.vertices[i].min(h.vertices[j]), h.vertices[i].max(h.vertices[j]));
                edge_map.entry(key).or_default().1.push(hi);
            }
        }
    }
    let edges: Vec<Edge> = edge_map
        .into_iter()
        .map(|((a, b), (incident, boundary))| Edge {
            a,
            b,
            kept: true,
            dual: DualFace {
                generators: incident.iter().map(|&s| simplices[s].dual_vertex.clone()).collect(),
                rays: boundary.iter().map(|&h| hull_facets[h].outward.clone()).collect(),
            },
            simplices: incident,
        })
        .collect();

    let mut in_complex = vec![false; sites.len()];
    for (sorted, _, _) in &simplex_rows {
        for &v in sorted {
            in_complex[v] = true;
        }
    }
    let mut vertices: Vec<usize> = Vec::new();
    let mut redundant: Vec<usize> = Vec::new();
    for (i, s) in sites.iter().enumerate() {
        if in_complex[i] {
            vertices.push(s.source_index);
        } else {
            redundant.push(s.source_index);
        }
    }
    vertices.sort_unstable();
    redundant.sort_unstable();

    Ok(DelaunayComplex {
        dim: n,
        sites: sites.to_vec(),
        vertices,
        redundant,
        edges,
        simplices,
        hull_facets,
    })
}

/// Solves `2 <x, s_i - s_0> = h_i - h_0` for the point of equal power.
fn radical_center(sites: &[PowerSite], verts: &[usize]) -> Result<(Vec<f64>, f64)> {
    let n = sites[verts[0]].center.len();
    let s0 = &sites[verts[0]];
    let h0 = s0.lifted_height();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (r, &v) in verts[1..].iter().enumerate() {
        let s = &sites[v];
        for c in 0..n {
            a[(r, c)] = 2.0 * (s.center[c] - s0.center[c]);
        }
        rhs[r] = s.lifted_height() - h0;
    }
    let row_norms: f64 = (0..n).map(|r| a.row(r).norm()).product();
    let det = a.determinant();
    let conditioning = if row_norms > 0.0 { (det.abs() / row_norms).min(1.0) } else { 0.0 };
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateInput(format!("singular simplex {verts:?}")))?;
    Ok((x.iter().copied().collect(), conditioning))
}

/// Unit normal of the hyperplane through `ridge` pointing away from `opposite`.
fn outward_normal(sites: &[PowerSite], ridge: &[usize], opposite: usize) -> Vec<f64> {
    let n = sites[ridge[0]].center.len();
    let base = &sites[ridge[0]].center;
    let rows: Vec<Vec<f64>> = ridge[1..]
        .iter()
        .map(|&v| sites[v].center.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    // generalized cross product: cofactors of the (n-1) x n difference matrix
    let mut normal = vec![0.0; n];
    for (c, slot) in normal.iter_mut().enumerate() {
        let m = DMatrix::from_fn(n - 1, n - 1, |r, k| rows[r][if k < c { k } else { k + 1 }]);
        let minor = if n == 1 { 1.0 } else { m.determinant() };
        *slot = if c % 2 == 0 { minor } else { -minor };
    }
    let away: Vec<f64> = sites[opposite].center.iter().zip(base).map(|(a, b)| a - b).collect();
    if dot(&normal, &away) > 0.0 {
        normal.iter_mut().for_each(|x| *x = -*x);
    }
    let len = norm_sq(&normal).sqrt();
    normal.iter().map(|x| x / len).collect()
}
