//! Polynomial (FIR) edge filters over the lower and upper Laplacians.
//!
//! A filter is `sum_{k=1}^{K_l} a^I_k L_low^k + sum_{k=1}^{K_u} a^s_k L_up^k`.
//! There is no constant term, so harmonic flows always map to zero.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::linalg::Svd;
use crate::signals::EdgeSignalBatch;
use crate::spectral::LaplacianSet;

pub const DEFAULT_ORDER: usize = 5;
/// Relative gap below which two eigenvalues are treated as one node.
pub const DEDUP_TOLERANCE: f64 = 1e-8;
/// Value reported by [`output_snr`] for an error-free output.
pub const SNR_CAP_DB: f64 = 300.0;

/// Desired response `h(lambda)` on a grid of strictly positive eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMask {
    eigenvalues: Vec<f64>,
    response: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MaskRow {
    lambda: f64,
    response: f64,
}

impl SpectralMask {
    pub fn new(eigenvalues: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != response.len() {
            return Err(shape_err("spectral mask", eigenvalues.len(), response.len()));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::Argument(format!(
                "mask eigenvalues must be positive and finite, got {bad}"
            )));
        }
        if let Some(bad) = response.iter().find(|h| !h.is_finite()) {
            return Err(Error::Argument(format!("mask response must be finite, got {bad}")));
        }
        Ok(Self {
            eigenvalues,
            response,
        })
    }

    pub fn constant(eigenvalues: Vec<f64>, value: f64) -> Result<Self> {
        let response = vec![value; eigenvalues.len()];
        Self::new(eigenvalues, response)
    }

    pub fn from_fn(eigenvalues: Vec<f64>, h: impl Fn(f64) -> f64) -> Result<Self> {
        let response = eigenvalues.iter().map(|&l| h(l)).collect();
        Self::new(eigenvalues, response)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Parses CSV with header `lambda,response`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut eigenvalues = Vec::new();
        let mut response = Vec::new();
        for (i, row) in rdr.deserialize::<MaskRow>().enumerate() {
            let row = row.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })?;
            eigenvalues.push(row.lambda);
            response.push(row.response);
        }
        Self::new(eigenvalues, response)
    }

    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (&lambda, &response) in self.eigenvalues.iter().zip(&self.response) {
            wtr.serialize(MaskRow { lambda, response })
                .map_err(|e| Error::Io(e.into()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }
}

/// Positive eigenvalues above `zero_tolerance`, sorted and merged when
/// consecutive values differ by at most `DEDUP_TOLERANCE * max`. Each cluster
/// is represented by its mean.
pub fn dedup_spectrum(eigenvalues: &[f64], zero_tolerance: f64) -> Vec<f64> {
    let mut vals: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > zero_tolerance)
        .collect();
    vals.sort_by(f64::total_cmp);
    let Some(&top) = vals.last() else {
        return vals;
    };
    let gap = DEDUP_TOLERANCE * top;
    let mut out = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for v in vals {
        if cluster.last().is_some_and(|&last| v - last > gap) {
            out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            cluster.clear();
        }
        cluster.push(v);
    }
    out.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    out
}

/// Columns `lambda^1, ..., lambda^K`.
pub fn build_vandermonde(eigenvalues: &[f64], order: usize) -> Result<DMatrix<f64>> {
    if order == 0 {
        return Err(Error::Argument("filter order must be >= 1".into()));
    }
    if eigenvalues.contains(&0.0) {
        return Err(Error::Argument(
            "zero eigenvalue: the kernel cannot be shaped without a constant term".into(),
        ));
    }
    Ok(DMatrix::from_fn(eigenvalues.len(), order, |i, k| {
        eigenvalues[i].powi(k as i32 + 1)
    }))
}

/// Response `sum_k a_k lambda^k` of a coefficient vector.
pub fn polynomial_response(coeffs: &[f64], lambda: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| (acc + a) * lambda)
}

/// Minimum-norm least squares for `Phi a ~ h` where `Phi` has columns
/// `lambda^k`, solved on the grid `lambda / scale` and mapped back.
fn fit(rows: &[(f64, f64)], order: usize, scale: f64) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::Argument("filter order must be >= 1".into()));
    }
    let grid: Vec<f64> = rows.iter().map(|r| r.0 / scale).collect();
    let phi = build_vandermonde(&grid, order)?;
    let h = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let svd = Svd::new(&phi).ok_or_else(|| Error::Degenerate("SVD did not converge".into()))?;
    let cutoff = f64::EPSILON * rows.len().max(order) as f64 * svd.max();
    let scaled = svd.solve(&h, cutoff);
    Ok((0..order)
        .map(|k| scaled[k] / scale.powi(k as i32 + 1))
        .collect())
}

fn residual(mask: &SpectralMask, coeffs: &[f64]) -> f64 {
    mask.eigenvalues
        .iter()
        .zip(&mask.response)
        .map(|(&l, &h)| (h - polynomial_response(coeffs, l)).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn mask_max(mask: &SpectralMask) -> f64 {
    mask.eigenvalues.iter().copied().fold(0.0, f64::max)
}

fn rows(mask: &SpectralMask) -> Vec<(f64, f64)> {
    mask.eigenvalues
        .iter()
        .copied()
        .zip(mask.response.iter().copied())
        .collect()
}

/// Coefficients of the lower (irrotational) and upper (solenoidal) filters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterDesign {
    pub coeffs_irr: Vec<f64>,
    pub coeffs_sol: Vec<f64>,
    pub fit_residual_irr: f64,
    pub fit_residual_sol: f64,
}

impl FilterDesign {
    /// `sqrt(r_irr^2 + r_sol^2)`, comparable with a joint design's residual.
    pub fn stacked_residual(&self) -> f64 {
        self.fit_residual_irr.hypot(self.fit_residual_sol)
    }
}

/// Independent least-squares fits of the irrotational mask with order `k_l`
/// and the solenoidal mask with order `k_u`.
pub fn design_separate(
    mask_irr: &SpectralMask,
    mask_sol: &SpectralMask,
    k_l: usize,
    k_u: usize,
) -> Result<FilterDesign> {
    if mask_irr.is_empty() || mask_sol.is_empty() {
        return Err(Error::Argument("filter masks must be nonempty".into()));
    }
    let coeffs_irr = fit(&rows(mask_irr), k_l, mask_max(mask_irr))?;
    let coeffs_sol = fit(&rows(mask_sol), k_u, mask_max(mask_sol))?;
    Ok(FilterDesign {
        fit_residual_irr: residual(mask_irr, &coeffs_irr),
        fit_residual_sol: residual(mask_sol, &coeffs_sol),
        coeffs_irr,
        coeffs_sol,
    })
}

/// A single polynomial in `L_1` fitted to both masks at once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDesign {
    pub coeffs: Vec<f64>,
    pub fit_residual: f64,
}

impl JointDesign {
    /// The same polynomial applied to both Laplacians, which equals the
    /// polynomial in `L_1` because `L_low L_up = 0`.
    pub fn to_filter_design(&self, mask_irr: &SpectralMask, mask_sol: &SpectralMask) -> FilterDesign {
        FilterDesign {
            coeffs_irr: self.coeffs.clone(),
            coeffs_sol: self.coeffs.clone(),
            fit_residual_irr: residual(mask_irr, &self.coeffs),
            fit_residual_sol: residual(mask_sol, &self.coeffs),
        }
    }
}

/// Least-squares fit of the stacked system `[Phi_s; Phi_I] a ~ [h_s; h_I]`.
pub fn design_joint(mask_irr: &SpectralMask, mask_sol: &SpectralMask, k: usize) -> Result<JointDesign> {
    if mask_irr.is_empty() || mask_sol.is_empty() {
        return Err(Error::Argument("filter masks must be nonempty".into()));
    }
    let mut stacked = rows(mask_sol);
    stacked.extend(rows(mask_irr));
    let scale = mask_max(mask_irr).max(mask_max(mask_sol));
    let coeffs = fit(&stacked, k, scale)?;
    let fit_residual = residual(mask_sol, &coeffs).hypot(residual(mask_irr, &coeffs));
    Ok(JointDesign {
        coeffs,
        fit_residual,
    })
}

/// `sum_{k>=1} a_k L^k s` by Horner's rule with matrix-vector products only.
fn apply_polynomial(l: &DMatrix<f64>, coeffs: &[f64], s: &DVector<f64>) -> DVector<f64> {
    let Some((&last, rest)) = coeffs.split_last() else {
        return DVector::zeros(s.len());
    };
    let mut acc = s * last;
    for &a in rest.iter().rev() {
        let next = l * &acc;
        acc = next + s * a;
    }
    l * acc
}

pub fn apply_filter(
    signal: &DVector<f64>,
    lap: &LaplacianSet,
    design: &FilterDesign,
) -> Result<DVector<f64>> {
    if signal.len() != lap.edge_count() {
        return Err(shape_err("apply_filter", lap.edge_count(), signal.len()));
    }
    Ok(apply_polynomial(&lap.l1_low, &design.coeffs_irr, signal)
        + apply_polynomial(&lap.l1_up, &design.coeffs_sol, signal))
}

pub fn apply_filter_batch(
    batch: &EdgeSignalBatch,
    lap: &LaplacianSet,
    design: &FilterDesign,
) -> Result<EdgeSignalBatch> {
    let cols = (0..batch.len())
        .into_par_iter()
        .map(|i| apply_filter(&batch.column(i), lap, design))
        .collect::<Result<Vec<_>>>()?;
    EdgeSignalBatch::from_columns(batch.edge_count(), &cols)
}

/// `10 log10(||clean||^2 / ||filtered - clean||^2)`, capped at `SNR_CAP_DB`.
pub fn output_snr(clean: &DVector<f64>, filtered: &DVector<f64>) -> Result<f64> {
    if clean.len() != filtered.len() {
        return Err(shape_err("output_snr", clean.len(), filtered.len()));
    }
    let signal = clean.norm_squared();
    if signal == 0.0 {
        return Err(Error::Degenerate("clean component is zero".into()));
    }
    let noise = (filtered - clean).norm_squared();
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}
