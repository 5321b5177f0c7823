//! Reconstruction error of bandlimited edge signals from MaxDet-placed
//! samples, for the cell, triangles-only and graph bases.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::generate::{complex_basis, generate_signal_parts, SignalSpec};
use super::run::{mean, median, signal_rng, trial_complex, triangles_only, Output};
use super::svg::LineChart;
use super::BasisKind;
use crate::error::Result;
use crate::incidence::build_b1;
use crate::inference::graph_basis;
use crate::sampling::{maxdet_select, reconstruct_from_samples};

/// The `f` columns of `basis` carrying the most energy of `training`, in
/// column order. Ties go to the lower column index.
pub fn energy_ranked_columns(basis: &DMatrix<f64>, training: &DMatrix<f64>, f: usize) -> DMatrix<f64> {
    let coeffs = basis.tr_mul(training);
    let energy: Vec<f64> = (0..basis.ncols()).map(|k| coeffs.row(k).norm_squared()).collect();
    let mut order: Vec<usize> = (0..basis.ncols()).collect();
    order.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]).then(a.cmp(&b)));
    let mut keep = order[..f.min(order.len())].to_vec();
    keep.sort_unstable();
    basis.select_columns(&keep)
}

#[derive(Debug, Clone)]
pub struct SampleTrial {
    pub bandwidth: usize,
    /// `(basis, number of samples, mean squared error per edge)`.
    pub rows: Vec<(BasisKind, usize, f64)>,
}

pub fn sample_counts(config: &ExperimentConfig, bandwidth: usize, edges: usize) -> Vec<usize> {
    let top = (bandwidth + config.sample_extra).min(edges);
    (bandwidth..=top).step_by(config.sample_step).collect()
}

pub fn sample_trial(config: &ExperimentConfig, trial: u64) -> Result<SampleTrial> {
    let complex = trial_complex(config, trial)?;
    let spec = SignalSpec::from(config);
    let bandwidth = spec.b_irr + spec.b_sol + spec.b_harm;
    let true_basis = complex_basis(&complex)?;
    let mut rng = signal_rng(config, trial);
    let training = generate_signal_parts(&true_basis, &spec, config.realizations, &mut rng)?;
    let test = generate_signal_parts(&true_basis, &spec, config.realizations, &mut rng)?;
    let observed = test.batch().into_matrix();
    let clean = test.clean();
    let training = training.batch().into_matrix();

    let e = complex.edge_count();
    let bases = [
        (BasisKind::Cell, true_basis.eigenvectors().clone()),
        (
            BasisKind::Simplicial,
            complex_basis(&triangles_only(&complex)?)?.eigenvectors().clone(),
        ),
        (BasisKind::Graph, graph_basis(&build_b1(&complex))?.eigenvectors().clone()),
    ];
    let mut rows = Vec::new();
    for (kind, full) in &bases {
        let u = energy_ranked_columns(full, &training, bandwidth);
        for m in sample_counts(config, bandwidth, e) {
            let samples = maxdet_select(&u, m)?;
            let mut errors = Vec::with_capacity(observed.ncols());
            for j in 0..observed.ncols() {
                let values = DVector::from_iterator(m, samples.indices.iter().map(|&i| observed[(i, j)]));
                let x = reconstruct_from_samples(&samples, &values, &u)?;
                errors.push((x - clean.column(j)).norm_squared() / e as f64);
            }
            rows.push((*kind, m, mean(&errors)));
        }
    }
    Ok(SampleTrial { bandwidth, rows })
}

#[derive(Serialize)]
struct Row {
    basis: BasisKind,
    num_samples: usize,
    mse: f64,
    median_mse: f64,
}

pub(crate) fn run(config: &ExperimentConfig, out: &mut Output) -> Result<String> {
    let trials = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| sample_trial(config, t))
        .collect::<Result<Vec<_>>>()?;
    let first = &trials[0];
    let mut rows = Vec::new();
    let mut chart = LineChart::new("Mean squared error vs. number of samples", "samples", "log10(mse)");
    for kind in BasisKind::ALL {
        let mut series = Vec::new();
        for (k, &(_, m, _)) in first.rows.iter().enumerate().filter(|(_, r)| r.0 == kind) {
            let values: Vec<f64> = trials.iter().map(|t| t.rows[k].2).collect();
            let row = Row {
                basis: kind,
                num_samples: m,
                mse: mean(&values),
                median_mse: median(&values),
            };
            series.push((m as f64, row.mse.max(1e-300).log10()));
            rows.push(row);
        }
        chart.add_series(&kind.to_string(), series);
    }
    out.csv("results.csv", &rows)?;
    out.text("plot.svg", &chart.render())?;
    Ok(format!("{} trials, bandwidth {}", trials.len(), first.bandwidth))
}
