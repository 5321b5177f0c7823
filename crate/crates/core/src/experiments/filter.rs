//! Solenoidal-component extraction with separately designed lower/upper
//! filters, a single joint filter, and a filter built on triangles only.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::generate::{complex_basis, generate_signal_parts, SignalSpec};
use super::run::{mean, signal_rng, trial_complex, triangles_only, Output};
use super::svg::LineChart;
use crate::complex::CellComplex;
use crate::error::Result;
use crate::filters::{
    apply_filter_batch, dedup_spectrum, design_joint, design_separate, output_snr, FilterDesign,
    SpectralMask,
};
use crate::incidence::{build_b1, build_b2};
use crate::signals::EdgeSignalBatch;
use crate::spectral::{build_laplacians, partition_basis, Component, LaplacianSet, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Separate,
    Joint,
    Simplicial,
}

impl DesignKind {
    pub const ALL: [DesignKind; 3] = [DesignKind::Separate, DesignKind::Joint, DesignKind::Simplicial];

    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Separate => "separate",
            DesignKind::Joint => "joint",
            DesignKind::Simplicial => "simplicial",
        }
    }
}

fn spectrum(values: &DVector<f64>, zero_tol: f64, dedup: bool) -> Vec<f64> {
    if dedup {
        return dedup_spectrum(values.as_slice(), zero_tol);
    }
    let mut v: Vec<f64> = values.iter().copied().filter(|&l| l > zero_tol).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Default masks: 0 on the nonzero lower spectrum, 1 on the nonzero upper
/// spectrum. Configured mask files replace either one.
fn masks(config: &ExperimentConfig, basis: &SpectralBasis) -> Result<(SpectralMask, Option<SpectralMask>)> {
    let tol = basis.zero_tolerance();
    let irr = match &config.mask_irr {
        Some(p) => SpectralMask::read(p)?,
        None => SpectralMask::constant(spectrum(&basis.lower_eigenvalues(), tol, config.dedup_spectrum), 0.0)?,
    };
    let sol = match &config.mask_sol {
        Some(p) => Some(SpectralMask::read(p)?),
        None => {
            let grid = spectrum(&basis.upper_eigenvalues(), tol, config.dedup_spectrum);
            (!grid.is_empty()).then(|| SpectralMask::constant(grid, 1.0)).transpose()?
        }
    };
    Ok((irr, sol))
}

struct FilterContext {
    lap: LaplacianSet,
    basis: SpectralBasis,
}

impl FilterContext {
    fn new(complex: &CellComplex) -> Result<Self> {
        let lap = build_laplacians(&build_b1(complex), &build_b2(complex)?)?;
        let basis = partition_basis(&lap, None)?;
        Ok(Self { lap, basis })
    }
}

/// Separate design, falling back to a zero upper filter when there is no
/// upper spectrum to fit.
fn separate(config: &ExperimentConfig, ctx: &FilterContext) -> Result<FilterDesign> {
    let (irr, sol) = masks(config, &ctx.basis)?;
    match sol {
        Some(sol) => design_separate(&irr, &sol, config.order_lower, config.order_upper),
        None => {
            let lower = design_separate(&irr, &irr, config.order_lower, 1)?;
            Ok(FilterDesign {
                coeffs_sol: Vec::new(),
                fit_residual_sol: 0.0,
                ..lower
            })
        }
    }
}

fn joint(config: &ExperimentConfig, ctx: &FilterContext) -> Result<FilterDesign> {
    let (irr, sol) = masks(config, &ctx.basis)?;
    let sol = sol.unwrap_or_else(|| irr.clone());
    Ok(design_joint(&irr, &sol, config.order_lower + config.order_upper)?.to_filter_design(&irr, &sol))
}

#[derive(Debug, Clone)]
pub struct FilterTrial {
    /// `(B_sol / B_irr, design, output SNR in dB)`.
    pub rows: Vec<(f64, DesignKind, f64)>,
    /// Whether the complex has a polygon with more than three sides.
    pub has_non_triangular: bool,
}

fn snr(clean: &nalgebra::DMatrix<f64>, filtered: &EdgeSignalBatch) -> Result<f64> {
    output_snr(
        &DVector::from_column_slice(clean.as_slice()),
        &DVector::from_column_slice(filtered.matrix().as_slice()),
    )
}

pub fn filter_trial(config: &ExperimentConfig, trial: u64) -> Result<FilterTrial> {
    let complex = trial_complex(config, trial)?;
    let full = FilterContext::new(&complex)?;
    let simplicial_ctx = FilterContext::new(&triangles_only(&complex)?)?;
    let mut designs = vec![(DesignKind::Separate, separate(config, &full)?, &full.lap)];
    if config.joint {
        designs.push((DesignKind::Joint, joint(config, &full)?, &full.lap));
    }
    designs.push((DesignKind::Simplicial, separate(config, &simplicial_ctx)?, &simplicial_ctx.lap));

    let basis = complex_basis(&complex)?;
    let dim_irr = basis.count(Component::Irrotational);
    let dim_sol = basis.count(Component::Solenoidal);
    let b_irr = config.b_irr.min(dim_irr).max(1);
    let mut rng = signal_rng(config, trial);
    let mut rows = Vec::new();
    for &ratio in &config.bandwidth_ratios {
        let b_sol = ((ratio * b_irr as f64).round() as usize).clamp(1, dim_sol.max(1));
        let spec = SignalSpec {
            b_irr,
            b_sol: b_sol.min(dim_sol),
            b_harm: config.b_harm,
            noise_variance: config.noise_variance,
        };
        let parts = generate_signal_parts(&basis, &spec, config.realizations, &mut rng)?;
        let observed = parts.batch();
        for (kind, design, lap) in &designs {
            let filtered = apply_filter_batch(&observed, lap, design)?;
            rows.push((ratio, *kind, snr(&parts.solenoidal, &filtered)?));
        }
    }
    Ok(FilterTrial {
        rows,
        has_non_triangular: complex.polygons().iter().any(|p| p.len() > 3),
    })
}

#[derive(Serialize)]
struct Row {
    ratio: f64,
    design: DesignKind,
    snr_db: f64,
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    ratio: f64,
    design: DesignKind,
    snr_db: f64,
}

pub(crate) fn run(config: &ExperimentConfig, out: &mut Output) -> Result<String> {
    let trials = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| filter_trial(config, t))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut chart = LineChart::new("SNR at the filter output", "B_sol / B_irr", "SNR (dB)");
    for kind in DesignKind::ALL {
        let mut series = Vec::new();
        for &ratio in &config.bandwidth_ratios {
            let values: Vec<f64> = trials
                .iter()
                .flat_map(|t| t.rows.iter())
                .filter(|r| r.0 == ratio && r.1 == kind)
                .map(|r| r.2)
                .collect();
            if values.is_empty() {
                continue;
            }
            let snr_db = mean(&values);
            series.push((ratio, snr_db));
            rows.push(Row {
                ratio,
                design: kind,
                snr_db,
            });
        }
        if !series.is_empty() {
            chart.add_series(kind.name(), series);
        }
    }
    let trial_rows: Vec<TrialRow> = trials
        .iter()
        .enumerate()
        .flat_map(|(t, tr)| {
            tr.rows.iter().map(move |&(ratio, design, snr_db)| TrialRow {
                trial: t as u64,
                ratio,
                design,
                snr_db,
            })
        })
        .collect();
    out.csv("results.csv", &rows)?;
    out.csv("trials.csv", &trial_rows)?;
    out.text("plot.svg", &chart.render())?;
    Ok(format!(
        "{} trials x {} bandwidth ratios",
        trials.len(),
        config.bandwidth_ratios.len()
    ))
}
