//! Incremental (beneath-beyond) convex hull in `R^D` over symbolically
//! perturbed points.
//!
//! Facets are stored as `D` vertex ids ordered so that every hull point not
//! on the facet has negative orientation with respect to it; a new point is
//! beyond a facet iff its orientation is positive. Replacing the vertex
//! opposite a horizon ridge by the new point preserves that convention.

use std::collections::HashMap;

use crate::predicates::{lex_cmp, orient_sos, Sign};

#[derive(Debug, Clone)]
pub(crate) struct Facet {
    pub verts: Vec<usize>,
    /// `neighbors[i]` shares the ridge opposite `verts[i]`.
    pub neighbors: Vec<usize>,
    pub alive: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Hull {
    pub facets: Vec<Facet>,
}

impl Hull {
    /// Points on no surviving facet, i.e. inside the hull of the others.
    #[cfg(test)]
    pub fn interior(&self, n: usize) -> Vec<usize> {
        let mut on_hull = vec![false; n];
        for f in self.facets.iter().filter(|f| f.alive) {
            for &v in &f.verts {
                on_hull[v] = true;
            }
        }
        (0..n).filter(|&i| !on_hull[i]).collect()
    }
}

pub(crate) struct HullBuilder<'a> {
    points: &'a [Vec<f64>],
    stride: usize,
    facets: Vec<Facet>,
    mark: Vec<u32>,
    visible: Vec<bool>,
    stamp: u32,
}

impl<'a> HullBuilder<'a> {
    fn beyond(&self, facet: usize, p: usize) -> bool {
        let f = &self.facets[facet];
        let mut pts: Vec<&[f64]> = f.verts.iter().map(|&v| self.points[v].as_slice()).collect();
        pts.push(&self.points[p]);
        let mut ids = f.verts.clone();
        ids.push(p);
        orient_sos(&pts, &ids, self.stride) == Sign::Positive
    }

    fn visible_cached(&mut self, facet: usize, p: usize) -> bool {
        if self.mark.len() < self.facets.len() {
            self.mark.resize(self.facets.len(), 0);
            self.visible.resize(self.facets.len(), false);
        }
        if self.mark[facet] != self.stamp {
            self.mark[facet] = self.stamp;
            self.visible[facet] = self.beyond(facet, p);
        }
        self.visible[facet]
    }

    fn link(&mut self, new_ids: &[usize]) {
        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &f in new_ids {
            for i in 0..self.facets[f].verts.len() {
                if self.facets[f].neighbors[i] != usize::MAX {
                    continue;
                }
                let mut ridge: Vec<usize> = self.facets[f]
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                if let Some((g, j)) = open.remove(&ridge) {
                    self.facets[f].neighbors[i] = g;
                    self.facets[g].neighbors[j] = f;
                } else {
                    open.insert(ridge, (f, i));
                }
            }
        }
        debug_assert!(open.is_empty(), "unmatched ridges while linking facets");
    }

    fn insert(&mut self, p: usize) -> bool {
        self.stamp += 1;
        let start = (0..self.facets.len())
            .rev()
            .find(|&f| self.facets[f].alive && self.visible_cached(f, p));
        let Some(start) = start else {
            return false;
        };

        let mut stack = vec![start];
        let mut seen = vec![start];
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        while let Some(f) = stack.pop() {
            for i in 0..self.facets[f].verts.len() {
                let g = self.facets[f].neighbors[i];
                if self.visible_cached(g, p) {
                    if !seen.contains(&g) {
                        seen.push(g);
                        stack.push(g);
                    }
                } else {
                    horizon.push((f, i));
                }
            }
        }

        let mut created = Vec::with_capacity(horizon.len());
        for (f, i) in horizon {
            let g = self.facets[f].neighbors[i];
            let mut verts = self.facets[f].verts.clone();
            verts[i] = p;
            let mut neighbors = vec![usize::MAX; verts.len()];
            neighbors[i] = g;
            let id = self.facets.len();
            self.facets.push(Facet {
                verts,
                neighbors,
                alive: true,
            });
            if let Some(slot) = self.facets[g].neighbors.iter_mut().find(|n| **n == f) {
                *slot = id;
            }
            created.push(id);
        }
        for f in seen {
            self.facets[f].alive = false;
        }
        self.link(&created);
        true
    }
}

/// Convex hull of `points` (each of length `D`, at least `D + 1` of them).
///
/// `stride` is the symbolic-perturbation stride shared with any other
/// predicate evaluated on the same point ids.
pub(crate) fn convex_hull(points: &[Vec<f64>], stride: usize) -> Hull {
    let d = points[0].len();
    assert!(points.len() > d, "hull needs at least D + 1 points");

    // Sweep order: every point is extreme in the first coordinate among those
    // already inserted. Exact ties are resolved like the perturbation would
    // (smaller id is perturbed further to the right).
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[a][..1], &points[b][..1]).then(b.cmp(&a)));

    let mut b = HullBuilder {
        points,
        stride,
        facets: Vec::new(),
        mark: Vec::new(),
        visible: Vec::new(),
        stamp: 0,
    };

    let simplex: Vec<usize> = order[..=d].to_vec();
    let mut first = Vec::new();
    for k in 0..=d {
        let mut verts: Vec<usize> = simplex.iter().copied().filter(|&v| v != simplex[k]).collect();
        let mut pts: Vec<&[f64]> = verts.iter().map(|&v| points[v].as_slice()).collect();
        pts.push(&points[simplex[k]]);
        let mut ids = verts.clone();
        ids.push(simplex[k]);
        if orient_sos(&pts, &ids, stride) == Sign::Positive {
            verts.swap(0, 1);
        }
        b.facets.push(Facet {
            verts,
            neighbors: vec![usize::MAX; d],
            alive: true,
        });
        first.push(k);
    }
    b.link(&first);

    for &p in &order[d + 1..] {
        b.insert(p);
    }
    Hull { facets: b.facets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicates::orient;
    use rand::{Rng, SeedableRng};

    fn check_hull(points: &[Vec<f64>], hull: &Hull) {
        let alive: Vec<&Facet> = hull.facets.iter().filter(|f| f.alive).collect();
        assert!(!alive.is_empty());
        // every point lies weakly beneath every alive facet (exact, unperturbed)
        for f in &alive {
            for (i, p) in points.iter().enumerate() {
                if f.verts.contains(&i) {
                    continue;
                }
                let mut pts: Vec<&[f64]> = f.verts.iter().map(|&v| points[v].as_slice()).collect();
                pts.push(p);
                assert_ne!(orient(&pts), Sign::Positive, "point {i} beyond facet {:?}", f.verts);
            }
        }
        // neighbor symmetry
        for (id, f) in hull.facets.iter().enumerate().filter(|(_, f)| f.alive) {
            for &g in &f.neighbors {
                assert!(hull.facets[g].alive);
                assert!(hull.facets[g].neighbors.contains(&id));
            }
        }
    }

    #[test]
    fn cube_corners() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        pts.push(vec![0.5, 0.5, 0.5]);
        let hull = convex_hull(&pts, 4);
        check_hull(&pts, &hull);
        // a triangulated cube surface has 12 triangles
        assert_eq!(hull.facets.iter().filter(|f| f.alive).count(), 12);
        assert_eq!(hull.interior(pts.len()), vec![8]);
    }

    #[test]
    fn random_clouds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in 2..=4 {
            for _ in 0..10 {
                let n = rng.random_range(d + 1..40);
                let pts: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
                let hull = convex_hull(&pts, d + 1);
                check_hull(&pts, &hull);
            }
        }
    }

    #[test]
    fn integer_grid_degenerate() {
        let mut pts = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                pts.push(vec![x as f64, y as f64, (x * x + y * y) as f64]);
            }
        }
        let hull = convex_hull(&pts, 4);
        check_hull(&pts, &hull);
    }
}
