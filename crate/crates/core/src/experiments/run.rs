use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Experiment, ExperimentConfig, QStar};
use super::generate::{
    complex_basis, generate_complex, generate_signal_parts, stream_rng, ComplexSpec, SignalSpec,
};
use super::svg::LineChart;
use super::{filter, sample, sparsify};
use crate::complex::CellComplex;
use crate::cycles::{enumerate_candidates, CandidateCellSet};
use crate::error::{Error, Result};
use crate::incidence::{build_b1, IncidenceMatrix};
use crate::inference::{infer_b2, select_q_star};
use crate::signals::EdgeSignalBatch;
use crate::spectral::Component;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    /// One-line human-readable outcome.
    pub message: String,
}

/// Writes artifacts into one directory and remembers their names.
pub(crate) struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub(crate) fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub(crate) fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.path(name);
        let mut wtr = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.into()))?;
        for row in rows {
            wtr.serialize(row).map_err(|e| Error::Io(e.into()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub(crate) fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
        self.text(name, &(text + "\n"))
    }

    pub(crate) fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(path, contents)?;
        Ok(())
    }

    pub(crate) fn finish(self, experiment: Experiment, message: String) -> RunSummary {
        RunSummary {
            experiment,
            output_dir: self.dir,
            files: self.files,
            message,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let mut out = Output::create(&config.output_dir)?;
    let message = match config.experiment {
        Experiment::Gen => run_gen(config, &mut out)?,
        Experiment::Infer => run_infer(config, &mut out)?,
        Experiment::Sparsify => sparsify::run(config, &mut out)?,
        Experiment::Sample => sample::run(config, &mut out)?,
        Experiment::Filter => filter::run(config, &mut out)?,
    };
    out.json("config.resolved.json", config)?;
    Ok(out.finish(config.experiment, message))
}

/// The configured complex file, or the generated complex of `trial`.
pub(crate) fn trial_complex(config: &ExperimentConfig, trial: u64) -> Result<CellComplex> {
    match &config.complex_path {
        Some(path) => CellComplex::read(path),
        None => generate_complex(&ComplexSpec::from(config), &mut stream_rng(config.seed, 2 * trial)),
    }
}

pub(crate) fn signal_rng(config: &ExperimentConfig, trial: u64) -> rand_chacha::ChaCha8Rng {
    stream_rng(config.seed, 2 * trial + 1)
}

pub(crate) fn triangles_only(complex: &CellComplex) -> Result<CellComplex> {
    complex.with_polygons(complex.polygons().iter().filter(|p| p.len() == 3).cloned())
}

/// Number of cells to keep. `reference` is the polygon count of the known
/// complex, used in `planted` mode.
pub(crate) fn resolve_q_star(
    config: &ExperimentConfig,
    reference: usize,
    batch: &EdgeSignalBatch,
    b1: &IncidenceMatrix,
    candidates: &CandidateCellSet,
) -> Result<usize> {
    match config.q_star {
        QStar::Planted => Ok(reference),
        QStar::Fixed(q) => Ok(q),
        QStar::Auto => {
            let top = config.q_max.unwrap_or(candidates.len()).min(candidates.len());
            let grid: Vec<usize> = (0..=top).collect();
            select_q_star(batch, b1, candidates, config.holdout_fraction, &grid)
        }
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Serialize)]
struct GenRow {
    vertices: usize,
    edges: usize,
    polygons: usize,
    candidates: usize,
    harmonic_dim: usize,
    realizations: usize,
}

fn run_gen(config: &ExperimentConfig, out: &mut Output) -> Result<String> {
    let complex = trial_complex(config, 0)?;
    let basis = complex_basis(&complex)?;
    let parts = generate_signal_parts(
        &basis,
        &SignalSpec::from(config),
        config.realizations,
        &mut signal_rng(config, 0),
    )?;
    let candidates = enumerate_candidates(&complex.skeleton(), config.max_sides, config.max_candidates)?;
    out.text("complex.txt", &complex.to_text())?;
    let mut buf = Vec::new();
    parts.batch().to_csv(&mut buf)?;
    out.text("signals.csv", &String::from_utf8(buf).expect("csv output is utf-8"))?;
    out.csv(
        "results.csv",
        &[GenRow {
            vertices: complex.vertex_count(),
            edges: complex.edge_count(),
            polygons: complex.polygon_count(),
            candidates: candidates.len(),
            harmonic_dim: basis.count(Component::Harmonic),
            realizations: config.realizations,
        }],
    )?;

    let mut chart = LineChart::new("Edge Laplacian spectrum", "index", "eigenvalue");
    for c in [Component::Irrotational, Component::Solenoidal, Component::Harmonic] {
        let pts = basis
            .indices(c)
            .into_iter()
            .map(|i| (i as f64, basis.eigenvalues()[i]))
            .collect();
        chart.add_series(&format!("{c:?}").to_lowercase(), pts);
    }
    out.text("plot.svg", &chart.render())?;
    Ok(format!(
        "generated {} vertices, {} edges, {} polygons, {} realizations",
        complex.vertex_count(),
        complex.edge_count(),
        complex.polygon_count(),
        config.realizations
    ))
}

#[derive(Serialize)]
struct CandidateRow {
    candidate_index: usize,
    sides: usize,
    score: Option<f64>,
    selected: bool,
}

#[derive(Serialize)]
struct InferenceReport {
    q_star: usize,
    candidates: usize,
    energy_ratio: f64,
    used_b2_zero: bool,
    selected: Vec<Vec<usize>>,
    reference_polygons: usize,
    /// Against the polygons of the input complex, when it has any.
    precision: Option<f64>,
    recall: Option<f64>,
}

fn run_infer(config: &ExperimentConfig, out: &mut Output) -> Result<String> {
    let complex = trial_complex(config, 0)?;
    let batch = match &config.signals_path {
        Some(path) => EdgeSignalBatch::read(path)?,
        None => generate_signal_parts(
            &complex_basis(&complex)?,
            &SignalSpec::from(config),
            config.realizations,
            &mut signal_rng(config, 0),
        )?
        .batch(),
    };
    let graph = complex.skeleton();
    let b1 = build_b1(&graph);
    let candidates = enumerate_candidates(&graph, config.max_sides, config.max_candidates)?;
    let q_star = resolve_q_star(config, complex.polygon_count(), &batch, &b1, &candidates)?;
    let result = infer_b2(&batch, &b1, &candidates, q_star, config.energy_threshold)?;
    let inferred = result.inferred_complex(&graph, &candidates)?;

    let mut is_selected = vec![false; candidates.len()];
    for &i in &result.selected {
        is_selected[i] = true;
    }
    let rows: Vec<CandidateRow> = (0..candidates.len())
        .map(|i| CandidateRow {
            candidate_index: i,
            sides: candidates.cycles()[i].len(),
            score: result.scores.get(i).copied(),
            selected: is_selected[i],
        })
        .collect();

    let reference: std::collections::BTreeSet<&Vec<usize>> = complex.polygons().iter().collect();
    let found = inferred.polygons().iter().filter(|p| reference.contains(p)).count();
    let (precision, recall) = if reference.is_empty() {
        (None, None)
    } else {
        let precision = if inferred.polygon_count() == 0 {
            1.0
        } else {
            found as f64 / inferred.polygon_count() as f64
        };
        (Some(precision), Some(found as f64 / reference.len() as f64))
    };
    let report = InferenceReport {
        q_star,
        candidates: candidates.len(),
        energy_ratio: result.energy_ratio,
        used_b2_zero: result.used_b2_zero,
        selected: inferred.polygons().to_vec(),
        reference_polygons: reference.len(),
        precision,
        recall,
    };
    out.csv("results.csv", &rows)?;
    out.json("inference.json", &report)?;
    out.text("inferred.txt", &inferred.to_text())?;

    let mut sorted: Vec<f64> = result.scores.clone();
    sorted.sort_by(f64::total_cmp);
    let mut chart = LineChart::new("Candidate cell scores", "rank", "log10(score)");
    chart.add_series(
        "score",
        sorted
            .iter()
            .enumerate()
            .map(|(i, &s)| (i as f64, s.max(1e-300).log10()))
            .collect(),
    );
    out.text("plot.svg", &chart.render())?;

    let mut message = format!(
        "selected {} of {} candidates (energy ratio {:.3e})",
        result.selected.len(),
        candidates.len(),
        result.energy_ratio
    );
    if let (Some(p), Some(r)) = (precision, recall) {
        message += &format!(", precision {p:.3}, recall {r:.3}");
    }
    Ok(message)
}
