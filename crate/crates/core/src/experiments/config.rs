use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cycles::{DEFAULT_MAX_CANDIDATES, DEFAULT_MAX_SIDES};
use crate::error::{Error, Result};
use crate::filters::DEFAULT_ORDER;
use crate::inference::{DEFAULT_ENERGY_THRESHOLD, DEFAULT_HOLDOUT_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Gen,
    Infer,
    Sparsify,
    Sample,
    Filter,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Gen => "gen",
            Experiment::Infer => "infer",
            Experiment::Sparsify => "sparsify",
            Experiment::Sample => "sample",
            Experiment::Filter => "filter",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Triangulated grid with random diagonals and random edge deletions.
    Mesh,
    /// Random spanning tree plus uniformly random extra edges.
    ErdosRenyi,
    Complete,
    Cycle,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mesh" => Ok(Self::Mesh),
            "erdos_renyi" | "er" => Ok(Self::ErdosRenyi),
            "complete" => Ok(Self::Complete),
            "cycle" => Ok(Self::Cycle),
            _ => Err(Error::Argument(format!("unknown generator {s:?}"))),
        }
    }
}

/// How many cells inference keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QStar {
    /// The number of polygons in the reference complex.
    Planted,
    /// Holdout validation over `0..=q_max`.
    Auto,
    Fixed(usize),
}

impl FromStr for QStar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planted" => Ok(Self::Planted),
            "auto" => Ok(Self::Auto),
            n => n
                .parse()
                .map(Self::Fixed)
                .map_err(|_| Error::Argument(format!("q_star must be planted, auto or a count, got {n:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,

    /// Read the complex from this file instead of generating it.
    pub complex_path: Option<PathBuf>,
    /// Read the observations from this file instead of generating them.
    pub signals_path: Option<PathBuf>,
    pub generator: GeneratorKind,
    pub vertices: usize,
    pub edges: usize,
    pub planted: usize,
    pub max_sides: usize,
    pub max_candidates: usize,

    pub b_irr: usize,
    pub b_sol: usize,
    pub b_harm: usize,
    pub noise_variance: f64,
    pub realizations: usize,
    pub trials: usize,

    pub q_star: QStar,
    pub q_max: Option<usize>,
    pub energy_threshold: f64,
    pub holdout_fraction: f64,

    pub epsilon_points: usize,
    /// Largest epsilon as a fraction of the RMS observation norm.
    pub epsilon_max_fraction: f64,

    pub sample_extra: usize,
    pub sample_step: usize,

    pub order_lower: usize,
    pub order_upper: usize,
    pub joint: bool,
    pub dedup_spectrum: bool,
    pub bandwidth_ratios: Vec<f64>,
    pub mask_irr: Option<PathBuf>,
    pub mask_sol: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        // inference only separates cells when the non-gradient flow is
        // harmonic, so those experiments default to a harmonic data model
        let (b_sol, b_harm) = match experiment {
            Experiment::Gen | Experiment::Infer | Experiment::Sparsify => (0, 8),
            Experiment::Sample | Experiment::Filter => (5, 0),
        };
        Self {
            experiment,
            seed: 0,
            output_dir: PathBuf::from("out"),
            complex_path: None,
            signals_path: None,
            generator: GeneratorKind::Mesh,
            vertices: 30,
            edges: 60,
            planted: 12,
            max_sides: DEFAULT_MAX_SIDES,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            b_irr: 5,
            b_sol,
            b_harm,
            noise_variance: 0.01,
            realizations: 100,
            trials: if experiment == Experiment::Sample { 100 } else { 20 },
            q_star: QStar::Planted,
            q_max: None,
            energy_threshold: DEFAULT_ENERGY_THRESHOLD,
            holdout_fraction: DEFAULT_HOLDOUT_FRACTION,
            epsilon_points: 10,
            epsilon_max_fraction: 0.5,
            sample_extra: 20,
            sample_step: 2,
            order_lower: DEFAULT_ORDER,
            order_upper: DEFAULT_ORDER,
            joint: true,
            dedup_spectrum: true,
            bandwidth_ratios: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            mask_irr: None,
            mask_sol: None,
        }
    }

    /// Defaults overlaid with the `key = value` lines of `text`.
    pub fn parse(experiment: Experiment, text: &str) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn read(experiment: Experiment, path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(experiment, &std::fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Argument(format!("invalid value {value:?} for {key}")))
        }
        fn path(value: &str) -> Option<PathBuf> {
            (!value.is_empty() && value != "none").then(|| PathBuf::from(value))
        }
        match key {
            "experiment" => {
                let exp = <Experiment as clap::ValueEnum>::from_str(value, true)
                    .map_err(|_| Error::Argument(format!("unknown experiment {value:?}")))?;
                if exp != self.experiment {
                    return Err(Error::Argument(format!(
                        "config is for {exp}, but {} was requested",
                        self.experiment
                    )));
                }
            }
            "seed" => self.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "complex_path" => self.complex_path = path(value),
            "signals_path" => self.signals_path = path(value),
            "generator" => self.generator = value.parse()?,
            "vertices" => self.vertices = num(key, value)?,
            "edges" => self.edges = num(key, value)?,
            "planted" => self.planted = num(key, value)?,
            "max_sides" => self.max_sides = num(key, value)?,
            "max_candidates" => self.max_candidates = num(key, value)?,
            "b_irr" => self.b_irr = num(key, value)?,
            "b_sol" => self.b_sol = num(key, value)?,
            "b_harm" => self.b_harm = num(key, value)?,
            "noise_variance" => self.noise_variance = num(key, value)?,
            "realizations" => self.realizations = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "q_star" => self.q_star = value.parse()?,
            "q_max" => self.q_max = if value == "none" { None } else { Some(num(key, value)?) },
            "energy_threshold" => self.energy_threshold = num(key, value)?,
            "holdout_fraction" => self.holdout_fraction = num(key, value)?,
            "epsilon_points" => self.epsilon_points = num(key, value)?,
            "epsilon_max_fraction" => self.epsilon_max_fraction = num(key, value)?,
            "sample_extra" => self.sample_extra = num(key, value)?,
            "sample_step" => self.sample_step = num(key, value)?,
            "order_lower" => self.order_lower = num(key, value)?,
            "order_upper" => self.order_upper = num(key, value)?,
            "joint" => self.joint = num(key, value)?,
            "dedup_spectrum" => self.dedup_spectrum = num(key, value)?,
            "bandwidth_ratios" => {
                self.bandwidth_ratios = value
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<Result<_>>()?
            }
            "mask_irr" => self.mask_irr = path(value),
            "mask_sol" => self.mask_sol = path(value),
            _ => return Err(Error::Argument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let arg = |msg: String| Err(Error::Argument(msg));
        if !(self.noise_variance >= 0.0) {
            return arg(format!("noise_variance must be >= 0, got {}", self.noise_variance));
        }
        if self.realizations == 0 || self.trials == 0 {
            return arg("realizations and trials must be >= 1".into());
        }
        if self.max_sides < 3 {
            return arg(format!("max_sides must be >= 3, got {}", self.max_sides));
        }
        if self.epsilon_points == 0 || !(self.epsilon_max_fraction >= 0.0) {
            return arg("epsilon grid needs >= 1 point and a nonnegative range".into());
        }
        if self.sample_step == 0 {
            return arg("sample_step must be >= 1".into());
        }
        if self.order_lower == 0 || self.order_upper == 0 {
            return arg("filter orders must be >= 1".into());
        }
        if self.bandwidth_ratios.is_empty() || self.bandwidth_ratios.iter().any(|r| !(*r > 0.0)) {
            return arg("bandwidth_ratios must be a nonempty list of positive numbers".into());
        }
        Ok(())
    }
}
