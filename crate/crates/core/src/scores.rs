//! HyperDGA and the hyperbolic Chamfer / Wasserstein baselines.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::assignment;
use crate::error::{Error, Result};
use crate::models::{klein_distance, Hyperbolic, HyperbolicPoint, Model};
use crate::par::{map_range, Execution};
use crate::power::{klein_coords_to_power_site, regular_triangulation, DelaunayComplex};
use crate::prune::{prune_complex, PruneOptions, PruneReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
}

/// Union of two Klein-ball point sets; point `i` has stable id `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointSet {
    points: Vec<Vec<f64>>,
    labels: Vec<Group>,
}

impl LabeledPointSet {
    /// Converts both sets into the Klein ball and concatenates them (A first).
    pub fn new(a: &[HyperbolicPoint], b: &[HyperbolicPoint], geometry: &Hyperbolic) -> Result<Self> {
        let convert = |set: &[HyperbolicPoint]| -> Result<Vec<Vec<f64>>> {
            set.iter().map(|p| geometry.to_klein(p).map(HyperbolicPoint::into_coords)).collect()
        };
        Self::from_klein(convert(a)?, convert(b)?)
    }

    /// Klein coordinates, assumed already validated.
    pub fn from_klein(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        let dim = a.first().or(b.first()).map_or(0, Vec::len);
        if let Some(p) = a.iter().chain(&b).find(|p| p.len() != dim) {
            return Err(Error::LengthMismatch(p.len(), dim));
        }
        let labels = std::iter::repeat_n(Group::A, a.len()).chain(std::iter::repeat_n(Group::B, b.len())).collect();
        let mut points = a;
        points.extend(b);
        Ok(Self { points, labels })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn group(&self, g: Group) -> Vec<Vec<f64>> {
        self.points.iter().zip(&self.labels).filter(|(_, l)| **l == g).map(|(p, _)| p.clone()).collect()
    }

    pub fn group_sizes(&self) -> [usize; 2] {
        let a = self.labels.iter().filter(|l| **l == Group::A).count();
        [a, self.labels.len() - a]
    }

    /// Same points with the group tags exchanged.
    pub fn swapped(&self) -> Self {
        let labels = self
            .labels
            .iter()
            .map(|l| match l {
                Group::A => Group::B,
                Group::B => Group::A,
            })
            .collect();
        Self {
            points: self.points.clone(),
            labels,
        }
    }
}

/// Pruned hyperbolic Delaunay complex of the union.
pub fn delaunay_graph(set: &LabeledPointSet, prune: &PruneOptions) -> Result<(DelaunayComplex, PruneReport)> {
    if set.len() < set.dim() + 1 || set.dim() == 0 {
        return Err(Error::EmptyGraph);
    }
    let sites = set
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| klein_coords_to_power_site(p, i))
        .collect::<Result<Vec<_>>>()?;
    let complex = regular_triangulation(&sites)?;
    prune_complex(&complex, prune)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub total: usize,
    pub heterogeneous: usize,
    /// Homogeneous edges inside A and inside B.
    pub homogeneous: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDga {
    pub value: f64,
    pub edges: EdgeCounts,
    pub pruned_edges: usize,
}

/// `1 - |heterogeneous kept edges| / |kept edges|` for a pruned complex.
pub fn hyperdga_from_complex(complex: &DelaunayComplex, labels: &[Group]) -> Result<HyperDga> {
    let mut counts = EdgeCounts {
        total: 0,
        heterogeneous: 0,
        homogeneous: [0, 0],
    };
    let mut pruned = 0;
    for e in &complex.edges {
        if !e.kept {
            pruned += 1;
            continue;
        }
        counts.total += 1;
        match (labels[e.a], labels[e.b]) {
            (Group::A, Group::A) => counts.homogeneous[0] += 1,
            (Group::B, Group::B) => counts.homogeneous[1] += 1,
            _ => counts.heterogeneous += 1,
        }
    }
    if counts.total == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(HyperDga {
        value: 1.0 - counts.heterogeneous as f64 / counts.total as f64,
        edges: counts,
        pruned_edges: pruned,
    })
}

pub fn hyperdga(set: &LabeledPointSet, prune: &PruneOptions) -> Result<HyperDga> {
    let (complex, _) = delaunay_graph(set, prune)?;
    hyperdga_from_complex(&complex, &set.labels)
}

/// Klein distances between every point of `a` (rows) and `b` (columns).
pub fn distance_matrix(a: &[Vec<f64>], b: &[Vec<f64>], exec: Execution) -> Result<Vec<Vec<f64>>> {
    map_range(exec, a.len(), |i| b.iter().map(|q| klein_distance(&a[i], q)).collect::<Result<Vec<f64>>>())
        .into_iter()
        .collect()
}

fn chamfer_from_matrix(d: &[Vec<f64>]) -> f64 {
    let rows: f64 = d.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min).powi(2)).sum();
    let cols: f64 = (0..d[0].len())
        .map(|j| d.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min).powi(2))
        .sum();
    rows + cols
}

/// Symmetrised sum of squared nearest-neighbour Klein distances.
pub fn chamfer(a: &[Vec<f64>], b: &[Vec<f64>], exec: Execution) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("chamfer needs two nonempty sets".into()));
    }
    Ok(chamfer_from_matrix(&distance_matrix(a, b, exec)?))
}

/// Minimal total Klein distance over bijections between equal-size sets.
pub fn wasserstein(a: &[Vec<f64>], b: &[Vec<f64>], exec: Execution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch {
            metric: "wasserstein",
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("wasserstein needs nonempty sets".into()));
    }
    Ok(assignment::solve(&distance_matrix(a, b, exec)?)?.cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    HyperDga,
    Chamfer,
    Wasserstein,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::HyperDga, Metric::Chamfer, Metric::Wasserstein];

    pub fn name(self) -> &'static str {
        match self {
            Metric::HyperDga => "hyperdga",
            Metric::Chamfer => "chamfer",
            Metric::Wasserstein => "wasserstein",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hyperdga" => Ok(Metric::HyperDga),
            "chamfer" => Ok(Metric::Chamfer),
            "wasserstein" => Ok(Metric::Wasserstein),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

/// Which metrics to compute; `explicit` marks a user-chosen list, in which
/// case an inapplicable metric is an error instead of a `null` entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSelection {
    pub metrics: Vec<Metric>,
    pub explicit: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            explicit: false,
        }
    }
}

impl MetricSelection {
    pub fn parse(list: &str) -> Result<Self> {
        let mut metrics: Vec<Metric> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
        metrics.sort();
        metrics.dedup();
        if metrics.is_empty() {
            return Err(Error::Parse("empty metric list".into()));
        }
        Ok(Self { metrics, explicit: true })
    }

    pub fn contains(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<String>,
    pub boundary_margin: f64,
    pub prune_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub hyperdga: Option<f64>,
    pub chamfer: Option<f64>,
    pub wasserstein: Option<f64>,
    pub edges: Option<EdgeCounts>,
    pub pruned_edges: Option<usize>,
    pub model_in: String,
    pub n_points: [usize; 2],
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreOptions {
    pub geometry: Hyperbolic,
    pub prune: PruneOptions,
}

/// Runs the full pipeline on a labelled union and assembles the report.
///
/// Returns the pruned complex as well when HyperDGA was requested.
pub fn score_sets(
    set: &LabeledPointSet,
    metrics: &MetricSelection,
    opts: &ScoreOptions,
    model_in: Model,
    provenance: Provenance,
) -> Result<(ScoreReport, Option<DelaunayComplex>)> {
    let sizes = set.group_sizes();
    let mut report = ScoreReport {
        hyperdga: None,
        chamfer: None,
        wasserstein: None,
        edges: None,
        pruned_edges: None,
        model_in: model_in.name().to_string(),
        n_points: sizes,
        provenance,
    };
    let mut complex = None;
    if metrics.contains(Metric::HyperDga) {
        let (c, _) = delaunay_graph(set, &opts.prune)?;
        let h = hyperdga_from_complex(&c, set.labels())?;
        report.hyperdga = Some(h.value);
        report.edges = Some(h.edges);
        report.pruned_edges = Some(h.pruned_edges);
        complex = Some(c);
    }
    let needs_matrix = metrics.contains(Metric::Chamfer) || metrics.contains(Metric::Wasserstein);
    if needs_matrix {
        let (a, b) = (set.group(Group::A), set.group(Group::B));
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyInput("both groups must be nonempty".into()));
        }
        let d = distance_matrix(&a, &b, opts.prune.execution)?;
        if metrics.contains(Metric::Chamfer) {
            report.chamfer = Some(chamfer_from_matrix(&d));
        }
        if metrics.contains(Metric::Wasserstein) {
            if a.len() == b.len() {
                report.wasserstein = Some(assignment::solve(&d)?.cost);
            } else if metrics.explicit {
                return Err(Error::CardinalityMismatch {
                    metric: "wasserstein",
                    left: a.len(),
                    right: b.len(),
                });
            }
        }
    }
    Ok((report, complex))
}
