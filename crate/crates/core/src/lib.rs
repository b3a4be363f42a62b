//! Hyperbolic Delaunay geometric alignment (HyperDGA) between point sets.
//!
//! The pipeline:
//!
//! 1. convert both sets into the Klein-Beltrami ball ([`models`]),
//! 2. build the Euclidean power diagram of their union and its regular
//!    triangulation ([`power`]), then drop every face whose dual power
//!    polytope misses the open unit ball ([`prune`]),
//! 3. score the remaining hyperbolic Delaunay graph by its share of edges
//!    joining the two sets ([`scores`]).
//!
//! Hyperbolic Chamfer and Wasserstein distances are provided as baselines,
//! together with a synthetic binary-tree dataset generator ([`synth`]) and
//! the command implementations behind the `hyperdga` binary ([`commands`]).

pub mod assignment;
pub mod commands;
pub mod error;
pub(crate) mod hull;
pub mod io;
pub mod models;
pub mod par;
pub mod power;
pub mod predicates;
pub mod prune;
pub mod qp;
pub mod scores;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};
pub use models::{Hyperbolic, HyperbolicPoint, Model};
pub use par::Execution;
pub use power::{klein_to_power_site, regular_triangulation, DelaunayComplex, DualFace, PowerSite};
pub use prune::{prune_complex, PruneOptions, PruneReport};
pub use scores::{LabeledPointSet, ScoreReport};
