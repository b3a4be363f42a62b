use std::collections::BTreeSet;

use hyperdga::scores::{chamfer, delaunay_graph, hyperdga, wasserstein, Group};
use hyperdga::{regular_triangulation, Execution, Hyperbolic, LabeledPointSet, PowerSite, PruneOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_ball(rng: &mut ChaCha8Rng, n: usize, dim: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| loop {
            let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..radius)).collect();
            if p.iter().map(|x| x * x).sum::<f64>() < radius * radius {
                break p;
            }
        })
        .collect()
}

/// Hyperbolic isometry of the Klein ball: boost of rapidity `t` along the
/// first axis followed by a rotation by `phi` in the first plane.
fn klein_isometry(p: &[f64], t: f64, phi: f64) -> Vec<f64> {
    let (ch, sh) = (t.cosh(), t.sinh());
    let den = ch + sh * p[0];
    let mut q: Vec<f64> = p.iter().map(|x| x / den).collect();
    q[0] = (sh + ch * p[0]) / den;
    let (c, s) = (phi.cos(), phi.sin());
    let (x, y) = (q[0], q[1]);
    q[0] = c * x - s * y;
    q[1] = s * x + c * y;
    q
}

fn kept_edges(set: &LabeledPointSet, opts: &PruneOptions) -> BTreeSet<(usize, usize)> {
    let (c, _) = delaunay_graph(set, opts).unwrap();
    c.kept_edges().map(|e| (e.a, e.b)).collect()
}

fn circumcircle_2d(a: &[f64], b: &[f64], c: &[f64]) -> ([f64; 2], f64) {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let (a2, b2, c2) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1], c[0] * c[0] + c[1] * c[1]);
    let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
    let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
    let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
    ([ux, uy], r2)
}

/// Andrew's monotone chain; number of strict hull vertices.
fn hull_size(points: &[Vec<f64>]) -> usize {
    let mut p: Vec<[f64; 2]> = points.iter().map(|q| [q[0], q[1]]).collect();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut chain: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while chain.len() >= start + 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], q) <= 0.0 {
                chain.pop();
            }
            chain.push(q);
        }
        chain.pop();
    }
    chain.len()
}

#[test]
fn zero_weight_triangulation_is_delaunay() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..20 {
        let n = 8 + 4 * round;
        let pts = random_ball(&mut rng, n, 2, 1.0);
        let sites: Vec<PowerSite> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| PowerSite {
                center: p.clone(),
                squared_weight: 0.0,
                source_index: i,
            })
            .collect();
        let c = regular_triangulation(&sites).unwrap();
        assert!(c.redundant.is_empty());
        for s in &c.simplices {
            let v = &s.vertices;
            let (centre, r2) = circumcircle_2d(&pts[v[0]], &pts[v[1]], &pts[v[2]]);
            for (i, p) in pts.iter().enumerate() {
                if v.contains(&i) {
                    continue;
                }
                let d2 = (p[0] - centre[0]).powi(2) + (p[1] - centre[1]).powi(2);
                assert!(d2 >= r2 * (1.0 - 1e-9), "point {i} inside circumcircle of {v:?}");
            }
            assert!((s.dual_vertex[0] - centre[0]).abs() < 1e-8 && (s.dual_vertex[1] - centre[1]).abs() < 1e-8);
        }
        let h = hull_size(&pts);
        assert_eq!(c.simplices.len(), 2 * n - h - 2);
        assert_eq!(c.edges.len(), 3 * n - h - 3);
    }
}

#[test]
fn zero_weight_triangulation_3d_has_empty_circumspheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts = random_ball(&mut rng, 40, 3, 1.0);
    let sites: Vec<PowerSite> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| PowerSite {
            center: p.clone(),
            squared_weight: 0.0,
            source_index: i,
        })
        .collect();
    let c = regular_triangulation(&sites).unwrap();
    assert!(!c.simplices.is_empty());
    for s in &c.simplices {
        let o = &s.dual_vertex;
        let r2: f64 = pts[s.vertices[0]].iter().zip(o).map(|(a, b)| (a - b).powi(2)).sum();
        for &v in &s.vertices[1..] {
            let d2: f64 = pts[v].iter().zip(o).map(|(a, b)| (a - b).powi(2)).sum();
            assert!((d2 - r2).abs() < 1e-8 * r2.max(1.0));
        }
        for (i, p) in pts.iter().enumerate() {
            if s.vertices.contains(&i) {
                continue;
            }
            let d2: f64 = p.iter().zip(o).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(d2 >= r2 * (1.0 - 1e-9), "point {i} inside circumsphere of {:?}", s.vertices);
        }
    }
}

#[test]
fn qp_and_closed_form_pruning_agree_in_the_plane() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let qp = PruneOptions {
        force_qp: true,
        ..PruneOptions::default()
    };
    for _ in 0..30 {
        let pts = random_ball(&mut rng, 24, 2, 0.97);
        let set = LabeledPointSet::from_klein(pts[..12].to_vec(), pts[12..].to_vec()).unwrap();
        assert_eq!(kept_edges(&set, &PruneOptions::default()), kept_edges(&set, &qp));
    }
}

#[test]
fn separated_clusters_score_higher_than_mixed_sets_in_3d() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let blob = |rng: &mut ChaCha8Rng, centre: f64| -> Vec<Vec<f64>> {
        random_ball(rng, 30, 3, 0.25)
            .into_iter()
            .map(|mut p| {
                p[0] += centre;
                p
            })
            .collect()
    };
    let a = blob(&mut rng, 0.5);
    let b = blob(&mut rng, -0.5);
    let separated = hyperdga(&LabeledPointSet::from_klein(a.clone(), b).unwrap(), &PruneOptions::default()).unwrap();
    let mixed_b = blob(&mut rng, 0.5);
    let mixed = hyperdga(&LabeledPointSet::from_klein(a, mixed_b).unwrap(), &PruneOptions::default()).unwrap();
    assert!(separated.value > 0.8, "{}", separated.value);
    assert!(separated.value - mixed.value > 0.2);
    assert!(mixed.value < 0.7, "{}", mixed.value);
    assert!(separated.edges.heterogeneous > 0);
}

#[test]
fn sequential_and_parallel_pipelines_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let pts = random_ball(&mut rng, 80, 3, 0.95);
    let set = LabeledPointSet::from_klein(pts[..40].to_vec(), pts[40..].to_vec()).unwrap();
    let seq = PruneOptions {
        execution: Execution::Sequential,
        ..PruneOptions::default()
    };
    let (c1, r1) = delaunay_graph(&set, &seq).unwrap();
    let (c2, r2) = delaunay_graph(&set, &PruneOptions::default()).unwrap();
    assert_eq!(c1, c2);
    assert_eq!(r1, r2);
    let a = set.group(Group::A);
    let b = set.group(Group::B);
    assert_eq!(
        wasserstein(&a, &b, Execution::Sequential).unwrap().to_bits(),
        wasserstein(&a, &b, Execution::Parallel).unwrap().to_bits()
    );
}

#[test]
fn poincare_and_lorentz_inputs_give_the_klein_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = Hyperbolic::default();
    let pts = random_ball(&mut rng, 30, 2, 0.9);
    let klein: Vec<_> = pts.iter().map(|p| g.klein(p.clone()).unwrap()).collect();
    let base = LabeledPointSet::new(&klein[..15], &klein[15..], &g).unwrap();
    let expected = kept_edges(&base, &PruneOptions::default());
    for convert in [Hyperbolic::klein_to_poincare, Hyperbolic::klein_to_lorentz] {
        let other: Vec<_> = klein.iter().map(|p| convert(&g, p).unwrap()).collect();
        let set = LabeledPointSet::new(&other[..15], &other[15..], &g).unwrap();
        assert_eq!(kept_edges(&set, &PruneOptions::default()), expected);
        let (a, b) = (set.group(Group::A), set.group(Group::B));
        let w0 = wasserstein(&base.group(Group::A), &base.group(Group::B), Execution::Sequential).unwrap();
        assert!((wasserstein(&a, &b, Execution::Sequential).unwrap() - w0).abs() < 1e-9 * w0);
    }
}

fn point_set(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-0.7f64..0.7, dim), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hyperdga_is_a_fraction_and_label_symmetric(pts in point_set(16, 2), split in 3usize..13) {
        let set = LabeledPointSet::from_klein(pts[..split].to_vec(), pts[split..].to_vec()).unwrap();
        let h = hyperdga(&set, &PruneOptions::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&h.value));
        prop_assert_eq!(h.edges.total, h.edges.heterogeneous + h.edges.homogeneous[0] + h.edges.homogeneous[1]);
        let s = hyperdga(&set.swapped(), &PruneOptions::default()).unwrap();
        prop_assert_eq!(h.value, s.value);
        prop_assert_eq!(h.edges.homogeneous, [s.edges.homogeneous[1], s.edges.homogeneous[0]]);
    }

    #[test]
    fn scores_are_invariant_under_isometries(pts in point_set(14, 2), t in -0.8f64..0.8, phi in 0.0f64..6.28) {
        let set = LabeledPointSet::from_klein(pts[..7].to_vec(), pts[7..].to_vec()).unwrap();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| klein_isometry(p, t, phi)).collect();
        let image = LabeledPointSet::from_klein(moved[..7].to_vec(), moved[7..].to_vec()).unwrap();
        prop_assert_eq!(kept_edges(&set, &PruneOptions::default()), kept_edges(&image, &PruneOptions::default()));
        let (a, b) = (set.group(Group::A), set.group(Group::B));
        let (ia, ib) = (image.group(Group::A), image.group(Group::B));
        let c0 = chamfer(&a, &b, Execution::Sequential).unwrap();
        let c1 = chamfer(&ia, &ib, Execution::Sequential).unwrap();
        prop_assert!((c0 - c1).abs() <= 1e-8 * c0.max(1.0));
        let w0 = wasserstein(&a, &b, Execution::Sequential).unwrap();
        let w1 = wasserstein(&ia, &ib, Execution::Sequential).unwrap();
        prop_assert!((w0 - w1).abs() <= 1e-8 * w0.max(1.0));
    }
}

#[test]
fn one_dimensional_sets_link_sorted_neighbours() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let xs: Vec<f64> = (0..12).map(|_| rng.random_range(-0.99..0.99)).collect();
    let set = LabeledPointSet::from_klein(xs[..6].iter().map(|x| vec![*x]).collect(), xs[6..].iter().map(|x| vec![*x]).collect()).unwrap();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let expected: BTreeSet<(usize, usize)> = order.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
    assert_eq!(kept_edges(&set, &PruneOptions::default()), expected);
}
