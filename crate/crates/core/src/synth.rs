//! Binary-tree "protein evolution" datasets, bit-flip perturbation, and a
//! deterministic planar hyperbolic layout standing in for a trained encoder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::seq::SliceRandom;
use std::io::Write;

use crate::error::{Error, Result};
use crate::models::norm_sq;

pub const MIN_DEPTH: usize = 2;
pub const MAX_DEPTH: usize = 12;
pub const DEFAULT_EDGE_LENGTH: f64 = 1.0;
/// Largest geodesic radius the layout may reach; keeps Klein norms below
/// `1 - 1e-8`.
pub const MAX_LAYOUT_RADIUS: f64 = 9.0;

/// Stream used for the coordinate permutation of [`generate_tree`].
const TREE_STREAM: u64 = u64::MAX;

/// A complete binary tree in heap order (node `i` has children `2i+1`, `2i+2`).
///
/// Node `i` is encoded by the indicator vector of its ancestors (itself and
/// the root included), so Hamming distance equals tree distance. The
/// coordinate owned by each node is scattered by a seeded permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryTreeDataset {
    pub depth: usize,
    pub vectors: Vec<Vec<bool>>,
    /// `coord_node[c]` is the node whose indicator lives in coordinate `c`.
    pub coord_node: Vec<usize>,
}

pub fn node_count(depth: usize) -> usize {
    (1 << depth) - 1
}

pub fn parent(node: usize) -> Option<usize> {
    (node > 0).then(|| (node - 1) / 2)
}

pub fn node_depth(node: usize) -> usize {
    (usize::BITS - 1 - (node + 1).leading_zeros()) as usize
}

/// Number of tree edges between two nodes.
pub fn tree_distance(mut u: usize, mut v: usize) -> usize {
    let mut steps = 0;
    while u != v {
        if u > v {
            u = (u - 1) / 2;
        } else {
            v = (v - 1) / 2;
        }
        steps += 1;
    }
    steps
}

impl BinaryTreeDataset {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.len()).map(|c| ((c - 1) / 2, c)).collect()
    }

    /// One row per node: `id,parent_id,bits` (root parent left empty).
    pub fn write_csv<W: Write>(&self, vectors: &[Vec<bool>], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "parent_id", "bits"]).map_err(|e| Error::Io(e.to_string()))?;
        for (i, v) in vectors.iter().enumerate() {
            let p = parent(i).map(|p| p.to_string()).unwrap_or_default();
            let bits: String = v.iter().map(|&b| if b { '1' } else { '0' }).collect();
            w.write_record([i.to_string(), p, bits]).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the depth-`depth` tree; `seed` fixes the coordinate permutation.
pub fn generate_tree(depth: usize, seed: u64) -> Result<BinaryTreeDataset> {
    if !(MIN_DEPTH..=MAX_DEPTH).contains(&depth) {
        return Err(Error::DepthOutOfRange(depth));
    }
    let n = node_count(depth);
    let mut coord_node: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TREE_STREAM);
    coord_node.shuffle(&mut rng);
    let mut node_coord = vec![0; n];
    for (c, &v) in coord_node.iter().enumerate() {
        node_coord[v] = c;
    }
    let vectors = (0..n)
        .map(|i| {
            let mut v = vec![false; n];
            let mut a = Some(i);
            while let Some(x) = a {
                v[node_coord[x]] = true;
                a = parent(x);
            }
            v
        })
        .collect();
    Ok(BinaryTreeDataset {
        depth,
        vectors,
        coord_node,
    })
}

/// Flips every bit independently with probability `eps`.
pub fn perturb_with(vectors: &[Vec<bool>], eps: f64, rng: &mut impl Rng) -> Vec<Vec<bool>> {
    vectors
        .iter()
        .map(|v| v.iter().map(|&b| b ^ rng.random_bool(eps)).collect())
        .collect()
}

/// [`perturb_with`] driven by ChaCha8 seeded with `seed`.
pub fn perturb(ds: &BinaryTreeDataset, eps: f64, seed: u64) -> Result<Vec<Vec<bool>>> {
    check_eps(eps)?;
    Ok(perturb_with(&ds.vectors, eps, &mut ChaCha8Rng::seed_from_u64(seed)))
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidPoint(format!("flip probability {eps} is outside [0, 1]")));
    }
    Ok(())
}

pub fn hamming(u: &[bool], v: &[bool]) -> Result<usize> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.iter().zip(v).filter(|(a, b)| a != b).count())
}

/// Möbius addition in the Poincaré ball.
fn mobius_add(x: &[f64], y: &[f64]) -> Vec<f64> {
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let xx = norm_sq(x);
    let yy = norm_sq(y);
    let den = 1.0 + 2.0 * xy + xx * yy;
    x.iter()
        .zip(y)
        .map(|(a, b)| ((1.0 + 2.0 * xy + yy) * a + (1.0 - xx) * b) / den)
        .collect()
}

fn poincare_to_klein(p: &[f64]) -> Vec<f64> {
    let s = 2.0 / (1.0 + norm_sq(p));
    p.iter().map(|x| s * x).collect()
}

/// Edge length actually used for a tree of this depth.
pub fn effective_edge_length(depth: usize, edge_length: f64) -> f64 {
    edge_length.min(MAX_LAYOUT_RADIUS / (depth - 1).max(1) as f64)
}

/// Klein coordinates of every node.
///
/// The root sits at the origin with its children antipodal. Every other node
/// sends its two children out at `CHILD_TURN` on either side of the geodesic
/// continuing from its parent, so all three edges at a node meet at 120
/// degrees. Children sit at geodesic distance `edge_length` (capped for deep
/// trees, see [`effective_edge_length`]).
pub fn tree_layout(ds: &BinaryTreeDataset, edge_length: f64) -> Vec<Vec<f64>> {
    let n = ds.len();
    let step = (effective_edge_length(ds.depth, edge_length) / 2.0).tanh();
    let mut poincare = vec![vec![0.0, 0.0]; n];
    // outgoing direction at each node, in the node's own gyro frame
    let mut heading = vec![0.0f64; n];
    for c in 1..n {
        let p = (c - 1) / 2;
        let first = c % 2 == 1;
        let a = if p == 0 {
            if first {
                0.0
            } else {
                std::f64::consts::PI
            }
        } else if first {
            heading[p] - CHILD_TURN
        } else {
            heading[p] + CHILD_TURN
        };
        poincare[c] = mobius_add(&poincare[p], &[step * a.cos(), step * a.sin()]);
        // the parent seen from the child; keep going the opposite way
        let neg: Vec<f64> = poincare[c].iter().map(|x| -x).collect();
        let back = mobius_add(&neg, &poincare[p]);
        heading[c] = (-back[1]).atan2(-back[0]);
    }
    poincare.iter().map(|p| poincare_to_klein(p)).collect()
}

const CHILD_TURN: f64 = std::f64::consts::FRAC_PI_3;

/// Maps a bit vector to the weighted Klein barycentre of the layout points
/// owning its set bits (origin when no bit is set).
///
/// Node weights grow as `depth_weight^depth`. The Klein ball is convex, so
/// every code lands inside it; noise bits pull codes towards the layout's
/// barycentre, which is the origin for the symmetric layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutEncoder {
    anchors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub const DEFAULT_DEPTH_WEIGHT: f64 = 2.0;
pub const DEFAULT_CODE_JITTER: f64 = 1e-7;

impl LayoutEncoder {
    pub fn new(ds: &BinaryTreeDataset, edge_length: f64, depth_weight: f64) -> Self {
        let layout = tree_layout(ds, edge_length);
        let anchors = ds.coord_node.iter().map(|&v| layout[v].clone()).collect();
        let weights = ds.coord_node.iter().map(|&v| depth_weight.powi(node_depth(v) as i32)).collect();
        Self { anchors, weights }
    }

    pub fn encode(&self, bits: &[bool]) -> Vec<f64> {
        let mut acc = vec![0.0; 2];
        let mut total = 0.0;
        for ((a, &w), _) in self.anchors.iter().zip(&self.weights).zip(bits).filter(|(_, &b)| b) {
            acc[0] += w * a[0];
            acc[1] += w * a[1];
            total += w;
        }
        if total > 0.0 {
            acc.iter_mut().for_each(|x| *x /= total);
        }
        acc
    }

    pub fn encode_all(&self, vectors: &[Vec<bool>]) -> Vec<Vec<f64>> {
        vectors.iter().map(|v| self.encode(v)).collect()
    }

    /// [`Self::encode_all`] followed by a uniform random displacement of
    /// Euclidean length `jitter` per code.
    ///
    /// Identical bit vectors, and symmetric bit sets, share a code exactly;
    /// the displacement keeps such codes apart without moving anything by a
    /// visible amount.
    pub fn encode_all_jittered(&self, vectors: &[Vec<bool>], jitter: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        vectors
            .iter()
            .map(|v| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                let mut x = self.encode(v);
                x[0] += jitter * a.cos();
                x[1] += jitter * a.sin();
                x
            })
            .collect()
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::ZeroVariance);
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&ranks(x), &ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::klein_distance;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn bfs_distances(n: usize, from: usize) -> Vec<usize> {
        let mut adj = vec![Vec::new(); n];
        for c in 1..n {
            adj[c].push((c - 1) / 2);
            adj[(c - 1) / 2].push(c);
        }
        let mut dist = vec![usize::MAX; n];
        dist[from] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        dist
    }

    #[test]
    fn depth_two() {
        let ds = generate_tree(2, 0).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.vectors.iter().all(|v| v.len() == 3));
        assert_eq!(hamming(&ds.vectors[0], &ds.vectors[1]).unwrap(), 1);
        assert_eq!(hamming(&ds.vectors[1], &ds.vectors[2]).unwrap(), 2);
        assert_eq!(ds.vectors[0].iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn depth_three_matches_bfs() {
        let ds = generate_tree(3, 17).unwrap();
        assert_eq!(ds.len(), 7);
        for u in 0..7 {
            let d = bfs_distances(7, u);
            for v in 0..7 {
                assert_eq!(hamming(&ds.vectors[u], &ds.vectors[v]).unwrap(), d[v]);
                assert_eq!(tree_distance(u, v), d[v]);
            }
        }
    }

    #[test]
    fn depth_eleven_size() {
        let ds = generate_tree(11, 1).unwrap();
        assert_eq!(ds.len(), 2047);
        assert_eq!(ds.vectors[2046].len(), 2047);
    }

    #[test]
    fn depth_bounds() {
        assert_eq!(generate_tree(1, 0).unwrap_err(), Error::DepthOutOfRange(1));
        assert_eq!(generate_tree(13, 0).unwrap_err(), Error::DepthOutOfRange(13));
    }

    #[test]
    fn each_child_adds_one_private_coordinate() {
        let ds = generate_tree(5, 3).unwrap();
        let mut owners = std::collections::HashSet::new();
        for c in 1..ds.len() {
            let p = parent(c).unwrap();
            let diff: Vec<usize> = (0..ds.len()).filter(|&k| ds.vectors[c][k] != ds.vectors[p][k]).collect();
            assert_eq!(diff.len(), 1);
            assert!(ds.vectors[c][diff[0]]);
            assert!(owners.insert(diff[0]));
        }
    }

    #[test]
    fn perturb_extremes_and_determinism() {
        let ds = generate_tree(4, 0).unwrap();
        assert_eq!(perturb(&ds, 0.0, 5).unwrap(), ds.vectors);
        let all = perturb(&ds, 1.0, 5).unwrap();
        for (a, b) in all.iter().zip(&ds.vectors) {
            assert!(a.iter().zip(b).all(|(x, y)| x != y));
        }
        assert_eq!(perturb(&ds, 0.3, 9).unwrap(), perturb(&ds, 0.3, 9).unwrap());
        assert_ne!(perturb(&ds, 0.3, 9).unwrap(), perturb(&ds, 0.3, 10).unwrap());
        assert!(perturb(&ds, 1.5, 0).is_err());
    }

    #[test]
    fn perturbation_is_binomial() {
        let ds = generate_tree(11, 0).unwrap();
        let a = perturb(&ds, 0.1, 42).unwrap();
        let n = ds.len() as f64;
        let total: usize = a.iter().zip(&ds.vectors).map(|(x, y)| hamming(x, y).unwrap()).sum();
        let mean = total as f64 / n;
        // the mean of n independent Binomial(n, 0.1) counts
        let sigma = (n * 0.1 * 0.9 / n).sqrt();
        assert!((mean - 0.1 * n).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&[false; 3], &[false; 3]).unwrap(), 0);
        assert_eq!(hamming(&[false; 3], &[true; 3]).unwrap(), 3);
        assert_eq!(hamming(&[true], &[true, false]).unwrap_err(), Error::LengthMismatch(1, 2));
    }

    proptest! {
        #[test]
        fn hamming_matches_loop(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 0..200)) {
            let (u, v): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let mut count = 0;
            for i in 0..u.len() {
                if u[i] != v[i] {
                    count += 1;
                }
            }
            prop_assert_eq!(hamming(&u, &v).unwrap(), count);
        }
    }

    #[test]
    fn layout_conventions() {
        let ds = generate_tree(2, 0).unwrap();
        let pts = tree_layout(&ds, 1.0);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        for c in [1, 2] {
            assert_relative_eq!(klein_distance(&pts[0], &pts[c]).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(pts[1][0], -pts[2][0], epsilon = 1e-15);
        assert_relative_eq!(pts[1][1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn layout_points_are_distinct_and_inside() {
        for depth in [5, 7, 12] {
            let ds = generate_tree(depth, 0).unwrap();
            let pts = tree_layout(&ds, 1.0);
            for p in &pts {
                assert!(norm_sq(p).sqrt() < 1.0 - 1e-9);
            }
            let mut sorted = pts.clone();
            sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            sorted.dedup();
            assert_eq!(sorted.len(), pts.len(), "depth {depth}");
        }
    }

    #[test]
    fn layout_edges_have_fixed_length_and_bounded_distortion() {
        for depth in 2..=6 {
            let ds = generate_tree(depth, 0).unwrap();
            let pts = tree_layout(&ds, 1.0);
            for (p, c) in ds.edges() {
                assert_relative_eq!(klein_distance(&pts[p], &pts[c]).unwrap(), 1.0, epsilon = 1e-9);
            }
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for u in 0..ds.len() {
                for v in (u + 1)..ds.len() {
                    let r = klein_distance(&pts[u], &pts[v]).unwrap() / tree_distance(u, v) as f64;
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            // geodesic paths along tree edges bound the distance from above
            assert!(hi <= 1.0 + 1e-9);
            let c = 1.0 / lo;
            println!("depth {depth}: distortion band [{lo:.3}, {hi:.3}], c = {c:.3}");
            assert!(c < 4.0, "depth {depth}: c = {c}");
        }
    }

    #[test]
    fn encoder_places_codes_inside() {
        let ds = generate_tree(6, 2).unwrap();
        let enc = LayoutEncoder::new(&ds, 1.0, DEFAULT_DEPTH_WEIGHT);
        for eps in [0.0, 0.5, 1.0] {
            for v in perturb(&ds, eps, 3).unwrap() {
                assert!(norm_sq(&enc.encode(&v)) < 1.0);
            }
        }
        assert_eq!(enc.encode(&vec![false; ds.len()]), vec![0.0, 0.0]);
    }

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_relative_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_relative_eq!(pearson(&x, &neg).unwrap(), -1.0);
        // hand computation: mean y = 3.2, Sxy = 3, Sxx = 10, Syy = 2.8
        let y = [2.0, 4.0, 3.0, 3.0, 4.0];
        assert_relative_eq!(pearson(&x, &y).unwrap(), 3.0 / 28f64.sqrt(), epsilon = 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]).unwrap_err(), Error::ZeroVariance);
        assert_eq!(pearson(&[1.0], &[1.0]).unwrap_err(), Error::ZeroVariance);
        assert_eq!(ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
        assert_relative_eq!(spearman(&x, &[1.0, 4.0, 9.0, 16.0, 100.0]).unwrap(), 1.0);
    }
}
