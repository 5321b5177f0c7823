//! Combinatorial Laplacians, their eigenbases, the cell-complex Fourier
//! transform and the Hodge decomposition of edge signals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::incidence::{ensure_chain_property, IncidenceMatrix};

/// Relative factor applied to the largest eigenvalue to decide numerical zeros.
pub const DEFAULT_ZERO_FACTOR: f64 = 1e-8;

/// Maximum relative asymmetry accepted by [`eigendecompose`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Laplacians of a 2-dimensional complex.
#[derive(Debug, Clone)]
pub struct LaplacianSet {
    /// `B1 B1^T`, vertices x vertices.
    pub l0: DMatrix<f64>,
    /// Lower edge Laplacian `B1^T B1`.
    pub l1_low: DMatrix<f64>,
    /// Upper edge Laplacian `B2 B2^T`.
    pub l1_up: DMatrix<f64>,
    /// Hodge Laplacian `l1_low + l1_up`.
    pub l1: DMatrix<f64>,
    /// `B2^T B2`, polygons x polygons.
    pub l2: DMatrix<f64>,
}

impl LaplacianSet {
    pub fn edge_count(&self) -> usize {
        self.l1.nrows()
    }
}

pub fn build_laplacians(b1: &IncidenceMatrix, b2: &IncidenceMatrix) -> Result<LaplacianSet> {
    ensure_chain_property(b1, b2)?;
    let d1 = b1.to_dense();
    let d2 = b2.to_dense();
    let l1_low = d1.transpose() * &d1;
    let l1_up = &d2 * d2.transpose();
    Ok(LaplacianSet {
        l0: &d1 * d1.transpose(),
        l1: &l1_low + &l1_up,
        l2: d2.transpose() * &d2,
        l1_low,
        l1_up,
    })
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// orthonormal columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(shape_err(
            "eigendecompose",
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let scale = m.amax();
    if scale == 0.0 {
        return Ok(());
    }
    let asym = (m - m.transpose()).amax() / scale;
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Flips `v` so its entry of largest magnitude is positive. Entries within a
/// relative 1e-9 of the maximum count as ties; the lowest index wins.
fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let max = v.amax();
    if max == 0.0 {
        return v;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    if v[pivot] < 0.0 {
        v.neg_mut();
    }
    v
}

/// Sorted, sign-normalized decomposition without zero clamping.
fn raw_eigen(m: &DMatrix<f64>) -> Eigen {
    let n = m.nrows();
    if n == 0 {
        return Eigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let columns: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| fix_sign(eig.eigenvectors.column(i).into_owned()))
        .collect();
    Eigen {
        values,
        vectors: DMatrix::from_columns(&columns),
    }
}

/// Tolerance used when none is given: `1e-8 * largest eigenvalue`, or `1e-8`
/// for an all-zero spectrum.
pub fn default_zero_tolerance(largest_eigenvalue: f64) -> f64 {
    if largest_eigenvalue > 0.0 {
        DEFAULT_ZERO_FACTOR * largest_eigenvalue
    } else {
        DEFAULT_ZERO_FACTOR
    }
}

/// Symmetric eigendecomposition. Eigenvalues with magnitude below
/// `zero_tolerance` are reported as exact zeros. Each eigenvector's largest
/// entry (lowest index on ties) is positive.
pub fn eigendecompose(m: &DMatrix<f64>, zero_tolerance: f64) -> Result<Eigen> {
    check_symmetric(m)?;
    let mut eig = raw_eigen(m);
    for v in eig.values.iter_mut() {
        if v.abs() < zero_tolerance {
            *v = 0.0;
        }
    }
    Ok(eig)
}

/// Orthonormal basis of the range of a positive semidefinite Gram matrix
/// (e.g. `B1^T B1` spans `img(B1^T)`).
pub(crate) fn range_basis(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = raw_eigen(gram);
    let top = eig.values.iter().cloned().fold(0.0_f64, f64::max);
    let tol = default_zero_tolerance(top);
    let cols: Vec<DVector<f64>> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > tol)
        .map(|i| eig.vectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(gram.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Which Hodge subspace an eigenvector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// In `img(B1^T)`: gradient flows, zero curl.
    Irrotational,
    /// In `img(B2)`: curl flows, zero divergence.
    Solenoidal,
    /// In `ker(L1)`.
    Harmonic,
}

/// Eigenbasis of `L1` in which every column lies in exactly one Hodge subspace.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    labels: Vec<Component>,
    zero_tolerance: f64,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn labels(&self) -> &[Component] {
        &self.labels
    }

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count(&self, component: Component) -> usize {
        self.labels.iter().filter(|&&l| l == component).count()
    }

    /// Column indices carrying `component`, in ascending eigenvalue order.
    pub fn indices(&self, component: Component) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == component)
            .collect()
    }

    /// The eigenvectors of one component as an `E x n` matrix.
    pub fn component_vectors(&self, component: Component) -> DMatrix<f64> {
        let idx = self.indices(component);
        self.eigenvectors.select_columns(&idx)
    }

    pub fn component_eigenvalues(&self, component: Component) -> Vec<f64> {
        self.indices(component)
            .into_iter()
            .map(|i| self.eigenvalues[i])
            .collect()
    }

    /// Per-column eigenvalue of the lower Laplacian (zero unless irrotational).
    pub fn lower_eigenvalues(&self) -> DVector<f64> {
        self.masked_eigenvalues(Component::Irrotational)
    }

    /// Per-column eigenvalue of the upper Laplacian (zero unless solenoidal).
    pub fn upper_eigenvalues(&self) -> DVector<f64> {
        self.masked_eigenvalues(Component::Solenoidal)
    }

    fn masked_eigenvalues(&self, keep: Component) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            (0..self.len()).map(|i| {
                if self.labels[i] == keep {
                    self.eigenvalues[i]
                } else {
                    0.0
                }
            }),
        )
    }
}

/// Builds the labeled `L1` eigenbasis by decomposing the lower and upper
/// Laplacians separately and completing with an orthonormal basis of their
/// common kernel. `zero_tolerance` defaults to `1e-8` times the largest
/// eigenvalue of `L1`.
pub fn partition_basis(lap: &LaplacianSet, zero_tolerance: Option<f64>) -> Result<SpectralBasis> {
    check_symmetric(&lap.l1_low)?;
    check_symmetric(&lap.l1_up)?;
    let e = lap.edge_count();
    let low = raw_eigen(&lap.l1_low);
    let up = raw_eigen(&lap.l1_up);
    let top = low
        .values
        .iter()
        .chain(up.values.iter())
        .cloned()
        .fold(0.0_f64, f64::max);
    let tol = zero_tolerance.unwrap_or_else(|| default_zero_tolerance(top));

    let mut entries: Vec<(f64, Component, DVector<f64>)> = Vec::with_capacity(e);
    for (eig, label) in [(&low, Component::Irrotational), (&up, Component::Solenoidal)] {
        for i in 0..eig.values.len() {
            if eig.values[i] >= tol {
                entries.push((eig.values[i], label, eig.vectors.column(i).into_owned()));
            }
        }
    }

    // Harmonic part: the complement of the two ranges.
    let mut complement = DMatrix::<f64>::identity(e, e);
    for (_, _, v) in &entries {
        complement -= v * v.transpose();
    }
    let comp = raw_eigen(&complement);
    for i in 0..comp.values.len() {
        if comp.values[i] > 0.5 {
            entries.push((0.0, Component::Harmonic, comp.vectors.column(i).into_owned()));
        }
    }
    if entries.len() != e {
        return Err(Error::Degenerate(format!(
            "Hodge subspaces have total dimension {} on {e} edges; zero tolerance {tol:.3e} is inconsistent",
            entries.len()
        )));
    }

    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let eigenvalues = DVector::from_iterator(e, entries.iter().map(|x| x.0));
    let labels = entries.iter().map(|x| x.1).collect();
    let columns: Vec<DVector<f64>> = entries.into_iter().map(|x| x.2).collect();
    let eigenvectors = if e == 0 {
        DMatrix::zeros(0, 0)
    } else {
        DMatrix::from_columns(&columns)
    };
    Ok(SpectralBasis {
        eigenvalues,
        eigenvectors,
        labels,
        zero_tolerance: tol,
    })
}

/// Cell-complex Fourier transform `U^T s`.
pub fn cft(basis: &SpectralBasis, signal: &DVector<f64>) -> Result<DVector<f64>> {
    if signal.len() != basis.len() {
        return Err(shape_err("cft", basis.len(), signal.len()));
    }
    Ok(basis.eigenvectors.tr_mul(signal))
}

/// Synthesis `U s_hat`.
pub fn inverse_cft(basis: &SpectralBasis, coefficients: &DVector<f64>) -> Result<DVector<f64>> {
    if coefficients.len() != basis.len() {
        return Err(shape_err("inverse_cft", basis.len(), coefficients.len()));
    }
    Ok(&basis.eigenvectors * coefficients)
}

/// The three orthogonal parts of an edge signal.
#[derive(Debug, Clone)]
pub struct HodgeComponents {
    pub irrotational: DVector<f64>,
    pub solenoidal: DVector<f64>,
    pub harmonic: DVector<f64>,
}

impl HodgeComponents {
    pub fn sum(&self) -> DVector<f64> {
        &self.irrotational + &self.solenoidal + &self.harmonic
    }
}

/// Splits `signal` into its projections on `img(B1^T)` and `img(B2)` plus the
/// harmonic residual.
pub fn hodge_decompose(
    b1: &IncidenceMatrix,
    b2: &IncidenceMatrix,
    signal: &DVector<f64>,
) -> Result<HodgeComponents> {
    ensure_chain_property(b1, b2)?;
    if signal.len() != b1.cols() {
        return Err(shape_err("hodge_decompose", b1.cols(), signal.len()));
    }
    let d1 = b1.to_dense();
    let d2 = b2.to_dense();
    let grad_basis = range_basis(&(d1.transpose() * &d1));
    let curl_basis = range_basis(&(&d2 * d2.transpose()));
    let irrotational = &grad_basis * grad_basis.tr_mul(signal);
    let solenoidal = &curl_basis * curl_basis.tr_mul(signal);
    let harmonic = signal - &irrotational - &solenoidal;
    Ok(HodgeComponents {
        irrotational,
        solenoidal,
        harmonic,
    })
}
