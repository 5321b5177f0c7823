//! Signal processing on cell complexes: incidence matrices, Hodge Laplacians
//! and their spectra, inference of 2-cells from edge flows, sparse spectral
//! codes, sampling and FIR filtering of edge signals.

pub mod complex;
pub mod cycles;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod incidence;
pub mod inference;
mod linalg;
pub mod sampling;
pub mod signals;
pub mod spectral;

pub use complex::CellComplex;
pub use cycles::{enumerate_candidates, CandidateCellSet};
pub use error::{Error, Result};
pub use filters::{design_joint, design_separate, FilterDesign, SpectralMask};
pub use incidence::{build_b1, build_b2, IncidenceMatrix};
pub use inference::{infer_b2, InferenceResult};
pub use signals::EdgeSignalBatch;
pub use spectral::{build_laplacians, partition_basis, Component, LaplacianSet, SpectralBasis};
