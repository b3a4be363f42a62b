//! Library side of the command-line tool: scoring files, the ε sweep, and
//! pairwise score matrices. Every function here is deterministic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{format_f64, read_points, to_json_string, write_points_csv, InputSpec};
use crate::models::Model;
use crate::par::map_range;
use crate::power::DelaunayComplex;
use crate::svg::{render_svg, View};
use crate::scores::{score_sets, LabeledPointSet, Metric, MetricSelection, Provenance, ScoreOptions, ScoreReport};
use crate::synth::{self, check_eps, generate_tree, perturb_with, LayoutEncoder};

/// Flip probability of the reference set `T` in the sweep.
pub const REFERENCE_EPS: f64 = 0.1;

pub const DEFAULT_SWEEP_EPS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

const JITTER_STREAM: u64 = 1 << 32;

pub const RNG_NAME: &str = "ChaCha8";

pub fn provenance(inputs: Vec<String>, opts: &ScoreOptions, generator: Option<String>, seed: Option<u64>) -> Provenance {
    Provenance {
        inputs,
        boundary_margin: opts.geometry.boundary_margin,
        prune_tolerance: opts.prune.tolerance,
        generator,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub depth: usize,
    pub eps: Vec<f64>,
    pub seeds: Vec<u64>,
    pub edge_length: f64,
    pub depth_weight: f64,
    pub code_jitter: f64,
    #[serde(skip)]
    pub options: ScoreOptions,
}

impl SweepConfig {
    pub fn new(depth: usize, eps: Vec<f64>, seeds: Vec<u64>) -> Self {
        Self {
            depth,
            eps,
            seeds,
            edge_length: synth::DEFAULT_EDGE_LENGTH,
            depth_weight: synth::DEFAULT_DEPTH_WEIGHT,
            code_jitter: synth::DEFAULT_CODE_JITTER,
            options: ScoreOptions::default(),
        }
    }
}

/// Klein codes of `T` and of `A_eps` for one seed.
///
/// Stream 0 of the seeded generator draws `T` at [`REFERENCE_EPS`]; stream
/// `1 + k` draws the `k`-th perturbed set, so every ε gets an independent draw.
/// Code jitter comes from streams `1 << 32` (for `T`) and `(1 << 32) + 1 + k`.
pub fn sweep_point_sets(cfg: &SweepConfig, seed: u64, eps_index: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let eps = cfg.eps[eps_index];
    check_eps(eps)?;
    let ds = generate_tree(cfg.depth, seed)?;
    let enc = LayoutEncoder::new(&ds, cfg.edge_length, cfg.depth_weight);
    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(k);
        r
    };
    let k = 1 + eps_index as u64;
    let reference = perturb_with(&ds.vectors, REFERENCE_EPS, &mut stream(0));
    let perturbed = perturb_with(&ds.vectors, eps, &mut stream(k));
    let jitter = cfg.code_jitter;
    Ok((
        enc.encode_all_jittered(&reference, jitter, &mut stream(JITTER_STREAM)),
        enc.encode_all_jittered(&perturbed, jitter, &mut stream(JITTER_STREAM + k)),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub eps: f64,
    pub hyperdga: f64,
    pub chamfer: f64,
    pub wasserstein: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    /// `None` for the correlation pooled over all seeds.
    pub seed: Option<u64>,
    pub metric: Metric,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub generator: String,
    pub reference_eps: f64,
    pub rows: Vec<SweepRow>,
    pub correlations: Vec<Correlation>,
    pub notes: Vec<String>,
}

impl SweepRow {
    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::HyperDga => self.hyperdga,
            Metric::Chamfer => self.chamfer,
            Metric::Wasserstein => self.wasserstein,
        }
    }
}

/// Scores `T` against `A_eps` and returns one row per (seed, ε), seeds outermost.
pub fn sweep_rows(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(u64, usize)> = cfg.seeds.iter().flat_map(|&s| (0..cfg.eps.len()).map(move |k| (s, k))).collect();
    map_range(cfg.options.prune.execution, jobs.len(), |j| {
        let (seed, k) = jobs[j];
        let (t, a) = sweep_point_sets(cfg, seed, k)?;
        score_row(t, a, seed, cfg.eps[k], &cfg.options)
    })
    .into_iter()
    .collect()
}

/// All three metrics for one pair of Klein point sets.
pub fn score_row(t: Vec<Vec<f64>>, a: Vec<Vec<f64>>, seed: u64, eps: f64, opts: &ScoreOptions) -> Result<SweepRow> {
    let set = LabeledPointSet::from_klein(t, a)?;
    let (r, _) = score_sets(&set, &MetricSelection::default(), opts, Model::Klein, provenance(Vec::new(), opts, None, None))?;
    let need = |v: Option<f64>, m: Metric| v.ok_or(Error::CardinalityMismatch {
        metric: m.name(),
        left: set.group_sizes()[0],
        right: set.group_sizes()[1],
    });
    Ok(SweepRow {
        seed,
        eps,
        hyperdga: need(r.hyperdga, Metric::HyperDga)?,
        chamfer: need(r.chamfer, Metric::Chamfer)?,
        wasserstein: need(r.wasserstein, Metric::Wasserstein)?,
    })
}

/// Pearson and Spearman correlation of each metric with ε, per seed and
/// pooled. Degenerate sweeps yield `None` plus a note instead of failing.
pub fn correlations(rows: &[SweepRow], seeds: &[u64]) -> (Vec<Correlation>, Vec<String>) {
    let mut out = Vec::new();
    let mut notes = Vec::new();
    let mut groups: Vec<Option<u64>> = seeds.iter().map(|&s| Some(s)).collect();
    if seeds.len() > 1 {
        groups.push(None);
    }
    for g in groups {
        let sel: Vec<&SweepRow> = rows.iter().filter(|r| g.is_none_or(|s| r.seed == s)).collect();
        let eps: Vec<f64> = sel.iter().map(|r| r.eps).collect();
        for m in Metric::ALL {
            let v: Vec<f64> = sel.iter().map(|r| r.metric(m)).collect();
            let mut fail = |e: Error| {
                let who = g.map_or("pooled".to_string(), |s| format!("seed {s}"));
                let note = format!("{who}, {m}: {e}");
                if !notes.contains(&note) {
                    notes.push(note);
                }
                None
            };
            let pearson = synth::pearson(&eps, &v).map_or_else(&mut fail, Some);
            let spearman = synth::spearman(&eps, &v).map_or_else(&mut fail, Some);
            out.push(Correlation {
                seed: g,
                metric: m,
                pearson,
                spearman,
            });
        }
    }
    (out, notes)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    if cfg.eps.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::EmptyInput("sweep needs at least one ε and one seed".into()));
    }
    let rows = sweep_rows(cfg)?;
    let (correlations, notes) = correlations(&rows, &cfg.seeds);
    Ok(SweepReport {
        config: cfg.clone(),
        generator: RNG_NAME.to_string(),
        reference_eps: REFERENCE_EPS,
        rows,
        correlations,
        notes,
    })
}

/// Result of scoring two files.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutput {
    pub report: ScoreReport,
    pub set: LabeledPointSet,
    pub complex: Option<DelaunayComplex>,
}

impl ScoreOutput {
    pub fn json(&self) -> String {
        to_json_string(&self.report) + "\n"
    }

    /// SVG of the pruned complex; `None` when HyperDGA was not computed.
    pub fn svg(&self, view: View) -> Option<String> {
        self.complex.as_ref().map(|c| render_svg(c, self.set.labels(), view))
    }
}

/// Scores file `a` against file `b`; any label column is ignored.
pub fn score_files(a: &InputSpec, b: &InputSpec, metrics: &MetricSelection, opts: &ScoreOptions) -> Result<ScoreOutput> {
    if a.model != b.model {
        return Err(Error::Parse("both inputs must use the same model".into()));
    }
    let ta = read_points(a, &opts.geometry)?;
    let tb = read_points(b, &opts.geometry)?;
    let set = LabeledPointSet::new(&ta.points, &tb.points, &opts.geometry)?;
    let inputs = vec![a.path.display().to_string(), b.path.display().to_string()];
    let (report, complex) = score_sets(&set, metrics, opts, a.model, provenance(inputs, opts, None, None))?;
    Ok(ScoreOutput { report, set, complex })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
    /// Symmetric matrices keyed by metric name; `null` where undefined.
    pub matrices: BTreeMap<String, Vec<Vec<Option<f64>>>>,
    pub notes: Vec<String>,
    pub model_in: String,
    pub provenance: Provenance,
}

/// Score matrix over every pair of label groups of one file.
///
/// The diagonal holds 0 for Chamfer and Wasserstein; HyperDGA of a set with
/// itself is undefined and left `null`. Failing pairs are `null` with a note.
pub fn pairwise(input: &InputSpec, metrics: &MetricSelection, opts: &ScoreOptions) -> Result<PairwiseReport> {
    let table = read_points(input, &opts.geometry)?;
    if table.labels.is_none() {
        return Err(Error::Parse(format!("{}: pairwise mode needs a label column", input.path.display())));
    }
    let groups = table.groups();
    if groups.len() < 2 {
        return Err(Error::EmptyInput("pairwise mode needs at least two label groups".into()));
    }
    let k = groups.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect();
    let per_metric = MetricSelection {
        metrics: metrics.metrics.clone(),
        explicit: false,
    };
    let results = map_range(opts.prune.execution, pairs.len(), |n| {
        let (i, j) = pairs[n];
        let set = LabeledPointSet::new(&groups[i].1, &groups[j].1, &opts.geometry)?;
        let mut row = Vec::new();
        let mut notes = Vec::new();
        for &m in &metrics.metrics {
            let one = MetricSelection {
                metrics: vec![m],
                ..per_metric.clone()
            };
            match score_sets(&set, &one, opts, input.model, provenance(Vec::new(), opts, None, None)) {
                Ok((r, _)) => {
                    let v = match m {
                        Metric::HyperDga => r.hyperdga,
                        Metric::Chamfer => r.chamfer,
                        Metric::Wasserstein => r.wasserstein,
                    };
                    if v.is_none() {
                        notes.push(format!("{m} undefined for '{}' vs '{}'", groups[i].0, groups[j].0));
                    }
                    row.push(v);
                }
                Err(e) => {
                    notes.push(format!("{m} failed for '{}' vs '{}': {e}", groups[i].0, groups[j].0));
                    row.push(None);
                }
            }
        }
        Ok::<_, Error>((row, notes))
    });

    let mut matrices: BTreeMap<String, Vec<Vec<Option<f64>>>> = BTreeMap::new();
    for &m in &metrics.metrics {
        let diag = if m == Metric::HyperDga { None } else { Some(0.0) };
        let mut mat = vec![vec![None; k]; k];
        for (i, row) in mat.iter_mut().enumerate() {
            row[i] = diag;
        }
        matrices.insert(m.name().to_string(), mat);
    }
    let mut notes = Vec::new();
    for (&(i, j), r) in pairs.iter().zip(results) {
        let (row, n) = r?;
        notes.extend(n);
        for (&m, v) in metrics.metrics.iter().zip(row) {
            let mat = matrices.get_mut(m.name()).expect("metric matrix");
            mat[i][j] = v;
            mat[j][i] = v;
        }
    }
    Ok(PairwiseReport {
        labels: groups.iter().map(|g| g.0.clone()).collect(),
        sizes: groups.iter().map(|g| g.1.len()).collect(),
        matrices,
        notes,
        model_in: input.model.name().to_string(),
        provenance: provenance(vec![input.path.display().to_string()], opts, None, None),
    })
}

/// Files written by [`generate`].
pub const TREE_FILE: &str = "tree.csv";
pub const PERTURBED_TREE_FILE: &str = "tree_perturbed.csv";
pub const REFERENCE_FILE: &str = "reference.csv";
pub const PERTURBED_FILE: &str = "perturbed.csv";

/// Writes the tree, its ε-perturbation, and the Klein codes of `T` and
/// `A_eps` exactly as the sweep builds them for `seed`.
pub fn generate(depth: usize, eps: f64, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let cfg = SweepConfig::new(depth, vec![eps], vec![seed]);
    let ds = generate_tree(depth, seed)?;
    let (t, a) = sweep_point_sets(&cfg, seed, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let bits = perturb_with(&ds.vectors, eps, &mut rng);
    std::fs::create_dir_all(out_dir)?;
    let geometry = crate::models::Hyperbolic::default();
    let mut written = Vec::new();
    let mut file = |name: &str| -> Result<std::fs::File> {
        let p = out_dir.join(name);
        written.push(p.clone());
        Ok(std::fs::File::create(p)?)
    };
    ds.write_csv(&ds.vectors, file(TREE_FILE)?)?;
    ds.write_csv(&bits, file(PERTURBED_TREE_FILE)?)?;
    for (name, pts) in [(REFERENCE_FILE, t), (PERTURBED_FILE, a)] {
        let pts = pts.into_iter().map(|p| geometry.klein(p)).collect::<Result<Vec<_>>>()?;
        write_points_csv(&pts, None, file(name)?)?;
    }
    Ok(written)
}

/// File name of the embedding for one ε inside an embeddings directory.
pub fn embedding_file(eps: f64) -> String {
    format!("eps_{eps}.csv")
}

/// Sweep over externally produced embeddings: `reference.csv` plus one
/// `eps_<ε>.csv` per ε (e.g. `eps_0.1.csv`), all in `model`.
pub fn run_sweep_embeddings(dir: &Path, eps: &[f64], model: Model, opts: &ScoreOptions) -> Result<SweepReport> {
    if eps.is_empty() {
        return Err(Error::EmptyInput("sweep needs at least one ε".into()));
    }
    let load = |name: &str| -> Result<Vec<Vec<f64>>> {
        let t = read_points(&InputSpec::new(dir.join(name), model), &opts.geometry)?;
        t.points
            .iter()
            .map(|p| opts.geometry.to_klein(p).map(crate::models::HyperbolicPoint::into_coords))
            .collect()
    };
    let reference = load(REFERENCE_FILE)?;
    let rows = map_range(opts.prune.execution, eps.len(), |k| {
        check_eps(eps[k])?;
        score_row(reference.clone(), load(&embedding_file(eps[k]))?, 0, eps[k], opts)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (correlations, notes) = correlations(&rows, &[0]);
    let mut cfg = SweepConfig::new(0, eps.to_vec(), vec![0]);
    cfg.options = *opts;
    Ok(SweepReport {
        config: cfg,
        generator: format!("embeddings:{}", dir.display()),
        reference_eps: REFERENCE_EPS,
        rows,
        correlations,
        notes,
    })
}

impl SweepReport {
    pub fn json(&self) -> String {
        to_json_string(self) + "\n"
    }

    /// `seed,eps,hyperdga,chamfer,wasserstein` rows, then a blank line and
    /// `seed,metric,pearson,spearman` (empty seed = pooled, empty value = undefined).
    pub fn csv(&self) -> String {
        let mut out = String::from("seed,eps,hyperdga,chamfer,wasserstein\n");
        for r in &self.rows {
            out += &format!(
                "{},{},{},{},{}\n",
                r.seed,
                format_f64(r.eps),
                format_f64(r.hyperdga),
                format_f64(r.chamfer),
                format_f64(r.wasserstein)
            );
        }
        out += "\nseed,metric,pearson,spearman\n";
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for c in &self.correlations {
            out += &format!(
                "{},{},{},{}\n",
                c.seed.map(|s| s.to_string()).unwrap_or_default(),
                c.metric,
                opt(c.pearson),
                opt(c.spearman)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_eps_sweep_reports_zero_variance() {
        let cfg = SweepConfig::new(4, vec![0.3], vec![1]);
        let r = run_sweep(&cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.correlations.iter().all(|c| c.pearson.is_none() && c.spearman.is_none()));
        assert!(r.notes.iter().any(|n| n.contains("variance")));
    }

    #[test]
    fn sweep_is_deterministic_and_parallel_safe() {
        let mut cfg = SweepConfig::new(4, vec![0.1, 0.5, 0.9], vec![3, 4]);
        let a = run_sweep(&cfg).unwrap();
        cfg.options.prune.execution = crate::par::Execution::Sequential;
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.correlations, b.correlations);
    }
}
