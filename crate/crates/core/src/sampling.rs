//! Sparse spectral codes of edge signals, greedy sample placement and
//! bandlimited reconstruction from edge samples.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{shape_err, Error, Result};
use crate::linalg::Svd;
use crate::signals::EdgeSignalBatch;

/// Coefficients below this fraction of the largest magnitude are not counted
/// in the support.
pub const DEFAULT_SUPPORT_FACTOR: f64 = 1e-6;
/// Stopping threshold for the primal and dual residuals of the iterative solver.
pub const SOLVER_TOLERANCE: f64 = 1e-8;
pub const SOLVER_MAX_ITERATIONS: usize = 10_000;
/// Sampled rows whose condition number exceeds `1 / RANK_TOLERANCE` are
/// treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SparseCode {
    pub coefficients: DVector<f64>,
    pub support: Vec<usize>,
    /// `||y - V s||_2`.
    pub residual: f64,
    pub epsilon: f64,
    /// Iterations used; zero for the closed-form path.
    pub iterations: usize,
}

impl SparseCode {
    fn new(coefficients: DVector<f64>, residual: f64, epsilon: f64, iterations: usize) -> Self {
        let support = support_of(&coefficients, DEFAULT_SUPPORT_FACTOR);
        Self {
            coefficients,
            support,
            residual,
            epsilon,
            iterations,
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.lp_norm(1)
    }
}

/// Indices with `|s_i| > factor * ||s||_inf`.
pub fn support_of(coefficients: &DVector<f64>, factor: f64) -> Vec<usize> {
    let top = coefficients.amax();
    if top == 0.0 {
        return Vec::new();
    }
    (0..coefficients.len())
        .filter(|&i| coefficients[i].abs() > factor * top)
        .collect()
}

pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

fn is_orthonormal_square(v: &DMatrix<f64>) -> bool {
    v.is_square() && (v.tr_mul(v) - DMatrix::identity(v.ncols(), v.ncols())).amax() <= 1e-8
}

/// Solves `min ||s||_1` subject to `||y - V s||_2 <= epsilon`.
///
/// For square orthonormal `V` the answer is soft-thresholding of `V^T y` at
/// the smallest threshold that meets the constraint. Any other `V` goes
/// through [`basis_pursuit_iterative`].
pub fn basis_pursuit(y: &DVector<f64>, v: &DMatrix<f64>, epsilon: f64) -> Result<SparseCode> {
    check_bp_args(y, v, epsilon)?;
    if y.norm() <= epsilon {
        return Ok(SparseCode::new(DVector::zeros(v.ncols()), y.norm(), epsilon, 0));
    }
    if !is_orthonormal_square(v) {
        return basis_pursuit_iterative(y, v, epsilon);
    }
    let c = v.tr_mul(y);
    let tau = residual_threshold(&c, epsilon);
    let s = c.map(|x| soft_threshold(x, tau));
    let residual = (y - v * &s).norm();
    Ok(SparseCode::new(s, residual, epsilon, 0))
}

fn check_bp_args(y: &DVector<f64>, v: &DMatrix<f64>, epsilon: f64) -> Result<()> {
    if v.nrows() != y.len() {
        return Err(shape_err("basis_pursuit", v.nrows(), y.len()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Argument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(())
}

/// Smallest `tau >= 0` with `sum_i min(|c_i|, tau)^2 >= epsilon^2`.
///
/// The left side is piecewise quadratic in `tau` with breakpoints at the
/// sorted magnitudes; on the segment above the `k` smallest magnitudes it
/// equals `S_k + (n - k) tau^2`.
fn residual_threshold(c: &DVector<f64>, epsilon: f64) -> f64 {
    let mut mags: Vec<f64> = c.iter().map(|x| x.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    let target = epsilon * epsilon;
    let mut below = 0.0;
    for (k, &a) in mags.iter().enumerate() {
        let remaining = (n - k) as f64;
        if below + remaining * a * a >= target {
            return ((target - below) / remaining).max(0.0).sqrt();
        }
        below += a * a;
    }
    mags.last().copied().unwrap_or(0.0)
}

/// ADMM for `min ||x||_1` s.t. `||y - V s|| <= epsilon`, split as `x = s`,
/// `z = V s` with `z` in the ball around `y`. Stops when the primal and dual
/// residuals drop below `SOLVER_TOLERANCE * max(1, ||y||)`.
pub fn basis_pursuit_iterative(
    y: &DVector<f64>,
    v: &DMatrix<f64>,
    epsilon: f64,
) -> Result<SparseCode> {
    check_bp_args(y, v, epsilon)?;
    let n = v.ncols();
    if y.norm() <= epsilon {
        return Ok(SparseCode::new(DVector::zeros(n), y.norm(), epsilon, 0));
    }
    let scale = y.norm().max(1.0);
    let tol = SOLVER_TOLERANCE * scale;
    // penalty chosen so the shrinkage step is a fixed fraction of the data scale
    let rho = 10.0 / scale;

    let system = DMatrix::identity(n, n) + v.tr_mul(v);
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::Degenerate("I + V^T V is not positive definite".into()))?;

    let mut x = DVector::zeros(n);
    let mut z = y.clone();
    let mut u1 = DVector::zeros(n);
    let mut u2 = DVector::zeros(y.len());
    let mut iterations = 0;
    for it in 1..=SOLVER_MAX_ITERATIONS {
        iterations = it;
        let rhs = (&x - &u1) + v.tr_mul(&(&z - &u2));
        let s = chol.solve(&rhs);
        let vs = v * &s;

        let x_old = x.clone();
        x = (&s + &u1).map(|t| soft_threshold(t, 1.0 / rho));

        let z_old = z.clone();
        let w = &vs + &u2;
        let offset = &w - y;
        let dist = offset.norm();
        z = if dist <= epsilon {
            w
        } else {
            y + offset * (epsilon / dist)
        };

        let r1 = &s - &x;
        let r2 = &vs - &z;
        u1 += &r1;
        u2 += &r2;

        let primal = (r1.norm_squared() + r2.norm_squared()).sqrt();
        let dual = rho * ((&x - &x_old) + v.tr_mul(&(&z - &z_old))).norm();
        if primal <= tol && dual <= tol {
            break;
        }
    }
    let residual = (y - v * &x).norm();
    Ok(SparseCode::new(x, residual, epsilon, iterations))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    /// Mean support size over the batch.
    pub sparsity: f64,
    /// Mean of `||y - V s||^2 / E` over the batch.
    pub mse: f64,
}

/// Sparsity/error trade-off of `basis_pursuit` over a grid of `epsilon`,
/// rows sorted by `epsilon`.
pub fn sparsity_mse_curve(
    batch: &EdgeSignalBatch,
    v: &DMatrix<f64>,
    epsilon_grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    if epsilon_grid.is_empty() {
        return Err(Error::Argument("empty epsilon grid".into()));
    }
    if batch.is_empty() {
        return Err(Error::Argument("empty batch".into()));
    }
    let mut grid = epsilon_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let e = batch.edge_count() as f64;
    let m = batch.len() as f64;
    grid.into_iter()
        .map(|epsilon| {
            let mut support = 0usize;
            let mut sq_err = 0.0;
            for i in 0..batch.len() {
                let y = batch.column(i);
                let code = basis_pursuit(&y, v, epsilon)?;
                support += code.support.len();
                sq_err += code.residual * code.residual / e;
            }
            Ok(CurvePoint {
                epsilon,
                sparsity: support as f64 / m,
                mse: sq_err / m,
            })
        })
        .collect()
}

/// Edge indices chosen for sampling, in selection order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    pub indices: Vec<usize>,
    /// Number of basis columns the signal model retains.
    pub bandwidth: usize,
}

/// Greedy MaxDet placement of `m` samples for an `E x F` bandlimited basis.
///
/// Each step adds the row that maximizes, first, the rank of the sampled Gram
/// matrix and then its pseudo-determinant. While the rank grows the gain is
/// the squared norm of the row's component outside the span of the rows
/// already chosen; once the rank is saturated it is `1 + u^T G^-1 u`. Ties go
/// to the lowest index.
pub fn maxdet_select(basis: &DMatrix<f64>, m: usize) -> Result<SampleSet> {
    let (e, f) = basis.shape();
    if f == 0 {
        return Err(Error::Argument("bandlimited basis has no columns".into()));
    }
    if m == 0 {
        return Err(Error::Argument("sample count must be >= 1".into()));
    }
    if m > e {
        return Err(Error::Argument(format!("cannot place {m} samples on {e} edges")));
    }
    let row_scale = (0..e)
        .map(|i| basis.row(i).norm_squared())
        .fold(0.0_f64, f64::max);
    let rank_tol = RANK_TOLERANCE * row_scale.max(f64::MIN_POSITIVE);

    let mut chosen = vec![false; e];
    let mut indices = Vec::with_capacity(m);
    // rows with the span of the chosen rows removed
    let mut residual: Vec<DVector<f64>> = (0..e).map(|i| basis.row(i).transpose()).collect();
    let mut directions: Vec<DVector<f64>> = Vec::new();

    while indices.len() < m {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..e).filter(|&i| !chosen[i]) {
            let gain = residual[i].norm_squared();
            if gain > rank_tol && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        let Some((pick, _)) = best else { break };
        let dir = &residual[pick] / residual[pick].norm();
        for r in residual.iter_mut() {
            let proj = dir.dot(r);
            r.axpy(-proj, &dir, 1.0);
        }
        directions.push(dir);
        chosen[pick] = true;
        indices.push(pick);
    }

    if indices.len() < m {
        // rank saturated: work in coordinates of the spanned subspace
        let q = DMatrix::from_columns(&directions);
        let coords: Vec<DVector<f64>> = (0..e).map(|i| q.tr_mul(&basis.row(i).transpose())).collect();
        let r = directions.len();
        let mut gram = DMatrix::<f64>::zeros(r, r);
        for &i in &indices {
            gram += &coords[i] * coords[i].transpose();
        }
        while indices.len() < m {
            let chol = gram
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Degenerate("sampled Gram matrix lost definiteness".into()))?;
            let mut best: Option<(usize, f64)> = None;
            for i in (0..e).filter(|&i| !chosen[i]) {
                let gain = coords[i].dot(&chol.solve(&coords[i]));
                if best.is_none_or(|(_, g)| gain > g) {
                    best = Some((i, gain));
                }
            }
            let (pick, _) = best.expect("m <= E leaves an unchosen row");
            gram += &coords[pick] * coords[pick].transpose();
            chosen[pick] = true;
            indices.push(pick);
        }
    }
    Ok(SampleSet {
        indices,
        bandwidth: f,
    })
}

/// Product of the nonzero eigenvalues of `U_S^T U_S` for the rows `S`,
/// together with the number of such eigenvalues.
pub fn gram_pseudo_determinant(basis: &DMatrix<f64>, indices: &[usize]) -> (usize, f64) {
    let rows = basis.select_rows(indices);
    let gram = rows.tr_mul(&rows);
    let eig = nalgebra::SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let tol = RANK_TOLERANCE * top.max(f64::MIN_POSITIVE);
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > tol)
        .fold((0, 1.0), |(r, p), &l| (r + 1, p * l))
}

/// Least-squares bandlimited interpolation `U_F (D U_F)^+ y_sampled`.
pub fn reconstruct_from_samples(
    samples: &SampleSet,
    sampled_values: &DVector<f64>,
    basis: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let (e, f) = basis.shape();
    if sampled_values.len() != samples.indices.len() {
        return Err(shape_err(
            "reconstruct_from_samples",
            samples.indices.len(),
            sampled_values.len(),
        ));
    }
    let mut seen = vec![false; e];
    for &i in &samples.indices {
        if i >= e || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Argument(format!("sample index {i} is out of range or repeated")));
        }
    }
    if samples.indices.len() < f {
        return Err(Error::IllPosedSampling(format!(
            "{} samples cannot determine {f} coefficients",
            samples.indices.len()
        )));
    }
    let sampled = basis.select_rows(&samples.indices);
    let svd = Svd::new(&sampled).ok_or_else(|| Error::Degenerate("SVD did not converge".into()))?;
    let (smax, smin) = (svd.max(), svd.min());
    if smax == 0.0 || smin < RANK_TOLERANCE * smax {
        return Err(Error::IllPosedSampling(format!(
            "sampled rows are rank deficient (condition {:.3e}); add samples",
            smax / smin
        )));
    }
    let coef = svd.solve(sampled_values, 0.0);
    Ok(basis * coef)
}
