//! Sparsity versus approximation error of basis-pursuit codes under the
//! inferred cell basis, a triangles-only basis and the graph basis.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, QStar};
use super::generate::{complex_basis, generate_signal_parts, SignalSpec};
use super::run::{mean, resolve_q_star, signal_rng, trial_complex, Output};
use super::svg::LineChart;
use super::BasisKind;
use crate::cycles::enumerate_candidates;
use crate::error::Result;
use crate::incidence::build_b1;
use crate::inference::{graph_basis, infer_b2};
use crate::sampling::{sparsity_mse_curve, CurvePoint};
use crate::signals::EdgeSignalBatch;

#[derive(Debug, Clone)]
pub struct SparsifyTrial {
    /// One curve per basis, in `BasisKind::ALL` order, on a shared grid.
    pub curves: Vec<(BasisKind, Vec<CurvePoint>)>,
    /// Polygons of the inferred cell complex.
    pub inferred: Vec<Vec<usize>>,
    pub planted: Vec<Vec<usize>>,
}

/// `points` values evenly spaced on `[0, fraction * rms column norm]`.
pub fn epsilon_grid(batch: &EdgeSignalBatch, points: usize, fraction: f64) -> Vec<f64> {
    let rms = (batch.matrix().norm_squared() / batch.len() as f64).sqrt();
    let top = fraction * rms;
    if points == 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|k| top * k as f64 / (points - 1) as f64)
        .collect()
}

pub fn sparsify_trial(config: &ExperimentConfig, trial: u64) -> Result<SparsifyTrial> {
    let complex = trial_complex(config, trial)?;
    let batch = generate_signal_parts(
        &complex_basis(&complex)?,
        &SignalSpec::from(config),
        config.realizations,
        &mut signal_rng(config, trial),
    )?
    .batch();

    let graph = complex.skeleton();
    let b1 = build_b1(&graph);
    let candidates = enumerate_candidates(&graph, config.max_sides, config.max_candidates)?;
    let triangles = candidates.restrict_sides(3);

    let planted_triangles = complex.polygons().iter().filter(|p| p.len() == 3).count();
    let q_cell = resolve_q_star(config, complex.polygon_count(), &batch, &b1, &candidates)?
        .min(candidates.len());
    let q_tri = match config.q_star {
        QStar::Fixed(_) | QStar::Planted => {
            resolve_q_star(config, planted_triangles, &batch, &b1, &triangles)?
        }
        QStar::Auto => resolve_q_star(config, 0, &batch, &b1, &triangles)?,
    }
    .min(triangles.len());

    let cell = infer_b2(&batch, &b1, &candidates, q_cell, config.energy_threshold)?
        .inferred_complex(&graph, &candidates)?;
    let simplicial = infer_b2(&batch, &b1, &triangles, q_tri, config.energy_threshold)?
        .inferred_complex(&graph, &triangles)?;

    let bases: [(BasisKind, DMatrix<f64>); 3] = [
        (BasisKind::Cell, complex_basis(&cell)?.eigenvectors().clone()),
        (BasisKind::Simplicial, complex_basis(&simplicial)?.eigenvectors().clone()),
        (BasisKind::Graph, graph_basis(&b1)?.eigenvectors().clone()),
    ];
    let grid = epsilon_grid(&batch, config.epsilon_points, config.epsilon_max_fraction);
    let curves = bases
        .iter()
        .map(|(kind, v)| Ok((*kind, sparsity_mse_curve(&batch, v, &grid)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparsifyTrial {
        curves,
        inferred: cell.polygons().to_vec(),
        planted: complex.polygons().to_vec(),
    })
}

#[derive(Serialize)]
struct Row {
    basis: BasisKind,
    epsilon: f64,
    sparsity: f64,
    mse: f64,
}

#[derive(Serialize)]
struct BasisRow {
    epsilon: f64,
    sparsity: f64,
    mse: f64,
}

pub(crate) fn run(config: &ExperimentConfig, out: &mut Output) -> Result<String> {
    let trials = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| sparsify_trial(config, t))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut chart = LineChart::new("Sparsity vs. mean squared error", "mse", "mean support size");
    for (b, kind) in BasisKind::ALL.iter().enumerate() {
        let per_basis: Vec<BasisRow> = (0..config.epsilon_points)
            .map(|k| {
                let pts: Vec<CurvePoint> = trials.iter().map(|t| t.curves[b].1[k]).collect();
                BasisRow {
                    epsilon: mean(&pts.iter().map(|p| p.epsilon).collect::<Vec<_>>()),
                    sparsity: mean(&pts.iter().map(|p| p.sparsity).collect::<Vec<_>>()),
                    mse: mean(&pts.iter().map(|p| p.mse).collect::<Vec<_>>()),
                }
            })
            .collect();
        chart.add_series(&kind.to_string(), per_basis.iter().map(|r| (r.mse, r.sparsity)).collect());
        rows.extend(per_basis.iter().map(|r| Row {
            basis: *kind,
            epsilon: r.epsilon,
            sparsity: r.sparsity,
            mse: r.mse,
        }));
        out.csv(&format!("sparsity_{kind}.csv"), &per_basis)?;
    }
    out.csv("results.csv", &rows)?;
    out.text("plot.svg", &chart.render())?;

    let exact = trials.iter().filter(|t| {
        let mut a = t.inferred.clone();
        let mut b = t.planted.clone();
        a.sort();
        b.sort();
        a == b
    });
    Ok(format!(
        "{} trials, inferred complex equals planted in {}",
        trials.len(),
        exact.count()
    ))
}
