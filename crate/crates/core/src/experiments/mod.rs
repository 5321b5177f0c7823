//! Seeded synthetic experiments behind the `cellsp` command line.
//!
//! Every experiment writes `results.csv`, `config.resolved.json` and
//! `plot.svg` into the output directory. Trial `t` draws its complex from
//! random stream `2t` and its signals from stream `2t + 1` of the master seed,
//! so results do not depend on how trials are scheduled across threads.

pub mod config;
pub mod filter;
pub mod generate;
mod run;
pub mod sample;
pub mod sparsify;
pub mod svg;

use std::fmt;

use serde::Serialize;

pub use config::{Experiment, ExperimentConfig, GeneratorKind, QStar};
pub use run::{run_experiment, RunSummary};

/// Spectral basis used to represent edge signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    /// Complex with the inferred (or planted) polygons of any length.
    Cell,
    /// Same pipeline with triangles only.
    Simplicial,
    /// Lower Laplacian of the bare graph.
    Graph,
}

impl BasisKind {
    pub const ALL: [BasisKind; 3] = [BasisKind::Cell, BasisKind::Simplicial, BasisKind::Graph];
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Cell => "cell",
            BasisKind::Simplicial => "simplicial",
            BasisKind::Graph => "graph",
        })
    }
}
