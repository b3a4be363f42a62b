use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperdga::commands::{self, SweepConfig, DEFAULT_SWEEP_EPS};
use hyperdga::io::{options_from_env, to_json_string, InputSpec};
use hyperdga::scores::{MetricSelection, ScoreOptions};
use hyperdga::svg::View;
use hyperdga::{Error, Execution, Model};

/// Hyperbolic Delaunay geometric alignment of point sets.
///
/// Environment: HYPERDGA_EPS_PRUNE overrides the pruning tolerance and
/// HYPERDGA_DELTA_BOUNDARY the boundary margin of the ball models.
#[derive(Parser)]
#[command(name = "hyperdga", version)]
struct Cli {
    /// Run without the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score set A against set B.
    Score {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// klein, poincare or lorentz.
        #[arg(long, default_value = "klein")]
        model: Model,
        /// Comma-separated subset of hyperdga,chamfer,wasserstein.
        #[arg(long)]
        metrics: Option<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Draw the pruned Delaunay graph.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value = "klein")]
        view: View,
        /// Dump the triangulation and pruning flags as JSON.
        #[arg(long)]
        complex: Option<PathBuf>,
    },
    /// Correlate the scores of T vs A_eps with eps on the synthetic tree data.
    Sweep {
        #[arg(long, default_value_t = 7)]
        depth: usize,
        /// Comma-separated flip probabilities.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seed: Vec<u64>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Geodesic edge length of the tree layout.
        #[arg(long, default_value_t = hyperdga::synth::DEFAULT_EDGE_LENGTH)]
        edge_length: f64,
        /// Score reference.csv and eps_<eps>.csv from this directory instead.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Model of the files in --embeddings.
        #[arg(long, default_value = "klein")]
        model: Model,
    },
    /// Score matrices between every pair of label groups in one file.
    Pairwise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "klein")]
        model: Model,
        #[arg(long)]
        metrics: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic tree, its perturbation and both Klein code sets.
    Generate {
        #[arg(long, default_value_t = 7)]
        depth: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::EmptyGraph | Error::CardinalityMismatch { .. } => 3,
        Error::NumericalDomain(_) | Error::MaxIterations { .. } | Error::ZeroVariance => 1,
        _ => 2,
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::EmptyGraph => format!("hyperdga: {e}"),
        _ => e.to_string(),
    }
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|err| Error::Io(format!("{}: {err}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn metrics(list: Option<&str>) -> Result<MetricSelection, Error> {
    list.map_or_else(|| Ok(MetricSelection::default()), MetricSelection::parse)
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut opts: ScoreOptions = options_from_env()?;
    if cli.sequential {
        opts.prune.execution = Execution::Sequential;
    }
    match cli.command {
        Command::Score {
            a,
            b,
            model,
            metrics: m,
            out,
            svg,
            view,
            complex,
        } => {
            let result = commands::score_files(&InputSpec::new(a, model), &InputSpec::new(b, model), &metrics(m.as_deref())?, &opts)?;
            emit(out.as_deref(), &result.json())?;
            if let Some(path) = svg {
                let doc = result
                    .svg(view)
                    .ok_or_else(|| Error::Parse("--svg needs the hyperdga metric".into()))?;
                write(&path, &doc)?;
            }
            if let Some(path) = complex {
                let c = result
                    .complex
                    .as_ref()
                    .ok_or_else(|| Error::Parse("--complex needs the hyperdga metric".into()))?;
                write(&path, &(to_json_string(c) + "\n"))?;
            }
        }
        Command::Sweep {
            depth,
            eps,
            seed,
            out_dir,
            edge_length,
            embeddings,
            model,
        } => {
            let eps = eps.unwrap_or_else(|| DEFAULT_SWEEP_EPS.to_vec());
            let report = match embeddings {
                Some(dir) => commands::run_sweep_embeddings(&dir, &eps, model, &opts)?,
                None => {
                    let mut cfg = SweepConfig::new(depth, eps, seed);
                    cfg.edge_length = edge_length;
                    cfg.options = opts;
                    commands::run_sweep(&cfg)?
                }
            };
            std::fs::create_dir_all(&out_dir)?;
            write(&out_dir.join("sweep.json"), &report.json())?;
            write(&out_dir.join("sweep.csv"), &report.csv())?;
            for n in &report.notes {
                eprintln!("note: {n}");
            }
            print!("{}", report.csv());
        }
        Command::Pairwise {
            input,
            model,
            metrics: m,
            out,
        } => {
            let report = commands::pairwise(&InputSpec::new(input, model), &metrics(m.as_deref())?, &opts)?;
            emit(out.as_deref(), &(to_json_string(&report) + "\n"))?;
        }
        Command::Generate {
            depth,
            eps,
            seed,
            out_dir,
        } => {
            for p in commands::generate(depth, eps, seed, &out_dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
