//! Inference of the 2-cells of a complex from observed edge flows.
//!
//! The graph (and so `B1`) is known. Observations are first projected onto
//! the orthogonal complement of the gradient space `img(B1^T)`; each candidate
//! cell `n` is then scored by the energy of the projected flow circulating
//! around it,
//!
//! ```text
//! d_n = sum_i (b_n^T y_sH(i))^2,
//! ```
//!
//! and the `q*` cells with the smallest scores are kept. The objective
//! `sum_n q_n d_n` is separable, so this sorted selection is the exact
//! optimum over all `q*`-subsets.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::CellComplex;
use crate::cycles::CandidateCellSet;
use crate::error::{shape_err, Error, Result};
use crate::incidence::IncidenceMatrix;
use crate::signals::EdgeSignalBatch;
use crate::spectral::{build_laplacians, partition_basis, range_basis, Component, SpectralBasis};

pub const DEFAULT_ENERGY_THRESHOLD: f64 = 0.02;
pub const DEFAULT_HOLDOUT_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct InferenceResult {
    /// Candidate indices, in increasing score order.
    pub selected: Vec<usize>,
    /// `d_n` for every candidate (empty when the energy test short-circuits).
    pub scores: Vec<f64>,
    #[serde(skip)]
    pub b2_hat: IncidenceMatrix,
    /// `||Y_sH||_F / ||Y||_F`.
    pub energy_ratio: f64,
    pub used_b2_zero: bool,
}

impl InferenceResult {
    /// Value of the selection objective: the sum of the selected scores.
    pub fn objective(&self) -> f64 {
        let mut vals: Vec<f64> = self.selected.iter().map(|&i| self.scores[i]).collect();
        vals.sort_by(f64::total_cmp);
        vals.iter().sum()
    }

    /// The graph with the selected candidate cycles attached as 2-cells.
    pub fn inferred_complex(
        &self,
        graph: &CellComplex,
        candidates: &CandidateCellSet,
    ) -> Result<CellComplex> {
        graph.with_polygons(self.selected.iter().map(|&i| candidates.cycles()[i].clone()))
    }
}

/// Spectral basis of the bare graph (`L1` without upper part). Its
/// irrotational columns span `img(B1^T)`.
pub fn graph_basis(b1: &IncidenceMatrix) -> Result<SpectralBasis> {
    partition_basis(&build_laplacians(b1, &IncidenceMatrix::empty(b1.cols()))?, None)
}

/// `Y_sH = (I - U_irr U_irr^T) Y`.
pub fn project_out_irrotational(
    batch: &EdgeSignalBatch,
    basis: &SpectralBasis,
) -> Result<EdgeSignalBatch> {
    if batch.edge_count() != basis.len() {
        return Err(shape_err(
            "project_out_irrotational",
            basis.len(),
            batch.edge_count(),
        ));
    }
    let u_irr = basis.component_vectors(Component::Irrotational);
    let y = batch.matrix();
    Ok(EdgeSignalBatch::new(y - &u_irr * u_irr.tr_mul(y)))
}

/// `||Y_sH||_F / ||Y||_F`.
pub fn energy_ratio(original: &EdgeSignalBatch, projected: &EdgeSignalBatch) -> Result<f64> {
    let total = original.frobenius_norm();
    if total == 0.0 {
        return Err(Error::Degenerate("observed batch has zero energy".into()));
    }
    Ok(projected.frobenius_norm() / total)
}

/// True when the non-gradient energy is below `threshold`, meaning no 2-cells
/// are needed (`B2 = 0`).
pub fn energy_test(
    original: &EdgeSignalBatch,
    projected: &EdgeSignalBatch,
    threshold: f64,
) -> Result<bool> {
    if !(threshold >= 0.0) {
        return Err(Error::Argument(format!("threshold must be >= 0, got {threshold}")));
    }
    Ok(energy_ratio(original, projected)? < threshold)
}

/// Circulation energy `d_n` of the projected batch around each candidate.
pub fn score_cells(projected: &EdgeSignalBatch, candidates: &CandidateCellSet) -> Result<Vec<f64>> {
    let cols = candidates.columns();
    if projected.edge_count() != cols.rows() {
        return Err(shape_err("score_cells", cols.rows(), projected.edge_count()));
    }
    let y = projected.matrix();
    let m = y.ncols();
    Ok((0..cols.cols())
        .into_par_iter()
        .map(|n| {
            let mut circulation = vec![0.0; m];
            for &(e, s) in cols.column(n) {
                let s = s as f64;
                for (i, c) in circulation.iter_mut().enumerate() {
                    *c += s * y[(e, i)];
                }
            }
            circulation.iter().map(|c| c * c).sum()
        })
        .collect())
}

/// Indices of the `q` smallest scores; equal scores keep candidate order.
pub fn select_lowest(scores: &[f64], q: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    order.truncate(q);
    order
}

pub fn infer_b2(
    batch: &EdgeSignalBatch,
    b1: &IncidenceMatrix,
    candidates: &CandidateCellSet,
    q_star: usize,
    energy_threshold: f64,
) -> Result<InferenceResult> {
    if q_star > candidates.len() {
        return Err(Error::Argument(format!(
            "q* = {q_star} exceeds the {} available candidates",
            candidates.len()
        )));
    }
    let basis = graph_basis(b1)?;
    let projected = project_out_irrotational(batch, &basis)?;
    let ratio = energy_ratio(batch, &projected)?;
    if energy_test(batch, &projected, energy_threshold)? {
        return Ok(InferenceResult {
            selected: Vec::new(),
            scores: Vec::new(),
            b2_hat: IncidenceMatrix::empty(b1.cols()),
            energy_ratio: ratio,
            used_b2_zero: true,
        });
    }
    let scores = score_cells(&projected, candidates)?;
    let selected = select_lowest(&scores, q_star);
    Ok(InferenceResult {
        b2_hat: candidates.columns().select_columns(&selected),
        selected,
        scores,
        energy_ratio: ratio,
        used_b2_zero: false,
    })
}

/// Picks `q*` from `grid` by holdout validation. The last
/// `round(holdout_fraction * M)` columns are held out; for each `q` the cells
/// are inferred on the remaining columns and the holdout energy left after
/// projecting onto `img(B1^T) + img(B2_hat)` is measured. Residuals within
/// `1e-10 * ||holdout||^2` of the best count as ties, resolved to the smaller
/// `q`.
pub fn select_q_star(
    batch: &EdgeSignalBatch,
    b1: &IncidenceMatrix,
    candidates: &CandidateCellSet,
    holdout_fraction: f64,
    grid: &[usize],
) -> Result<usize> {
    if batch.len() < 2 {
        return Err(Error::Argument("validation needs at least two observations".into()));
    }
    if grid.is_empty() {
        return Err(Error::Argument("empty q* grid".into()));
    }
    if let Some(&q) = grid.iter().find(|&&q| q > candidates.len()) {
        return Err(Error::Argument(format!(
            "grid value {q} exceeds the {} candidates",
            candidates.len()
        )));
    }
    let m = batch.len();
    let holdout = (holdout_fraction * m as f64).round() as usize;
    if holdout == 0 || holdout >= m || !(0.0..1.0).contains(&holdout_fraction) {
        return Err(Error::Argument(format!(
            "holdout fraction {holdout_fraction} leaves an empty fit or holdout set for {m} observations"
        )));
    }
    let fit = batch.columns_range(0, m - holdout);
    let held = batch.columns_range(m - holdout, holdout);

    let basis = graph_basis(b1)?;
    let held_sh = project_out_irrotational(&held, &basis)?;
    let fit_sh = project_out_irrotational(&fit, &basis)?;
    let scores = score_cells(&fit_sh, candidates)?;

    let mut q_sorted: Vec<usize> = grid.to_vec();
    q_sorted.sort_unstable();
    q_sorted.dedup();
    let residuals: Vec<f64> = q_sorted
        .iter()
        .map(|&q| {
            let chosen = select_lowest(&scores, q);
            let b2 = candidates.columns().select_columns(&chosen).to_dense();
            let q_basis = range_basis(&(&b2 * b2.transpose()));
            let y = held_sh.matrix();
            let rest: DMatrix<f64> = y - &q_basis * q_basis.tr_mul(y);
            rest.norm_squared()
        })
        .collect();
    let best = residuals.iter().cloned().fold(f64::INFINITY, f64::min);
    let slack = 1e-10 * held.matrix().norm_squared();
    let pick = residuals
        .iter()
        .position(|&r| r <= best + slack)
        .expect("grid is nonempty");
    Ok(q_sorted[pick])
}
