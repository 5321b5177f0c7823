//! Signed incidence (boundary) matrices `B1` (vertices x edges) and
//! `B2` (edges x polygons).

use nalgebra::DMatrix;

use crate::complex::CellComplex;
use crate::error::{shape_err, Error, Result};

/// Sparse signed integer matrix stored column by column. Every stored entry is
/// `+1` or `-1`; row indices inside a column are strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    columns: Vec<Vec<(usize, i8)>>,
}

impl IncidenceMatrix {
    /// Builds a matrix from sparse columns. Entries are sorted by row; repeated
    /// rows or values other than `+-1` are rejected.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, i8)>>) -> Result<Self> {
        let mut checked = Vec::with_capacity(columns.len());
        for (j, mut col) in columns.into_iter().enumerate() {
            col.sort_unstable_by_key(|&(r, _)| r);
            for w in col.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Argument(format!(
                        "column {j} has two entries in row {}",
                        w[0].0
                    )));
                }
            }
            for &(r, s) in &col {
                if r >= rows {
                    return Err(shape_err("incidence column", format!("row < {rows}"), r));
                }
                if s != 1 && s != -1 {
                    return Err(Error::Argument(format!(
                        "column {j} row {r} holds {s}, expected +-1"
                    )));
                }
            }
            checked.push(col);
        }
        Ok(Self {
            rows,
            columns: checked,
        })
    }

    pub fn empty(rows: usize) -> Self {
        Self {
            rows,
            columns: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, i8)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<(usize, i8)>] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Entry `(i, j)` as an integer.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.columns[j]
            .binary_search_by_key(&i, |&(r, _)| r)
            .map(|k| self.columns[j][k].1 as i64)
            .unwrap_or(0)
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        Self {
            rows: self.rows,
            columns: indices.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    pub fn to_dense_i64(&self) -> DMatrix<i64> {
        let mut m = DMatrix::zeros(self.rows, self.cols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = s as i64;
            }
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = s as f64;
            }
        }
        m
    }

    /// `self * other` in exact integer arithmetic.
    pub fn mul_int(&self, other: &IncidenceMatrix) -> Result<DMatrix<i64>> {
        if self.cols() != other.rows {
            return Err(shape_err(
                "incidence product",
                format!("inner dimension {}", self.cols()),
                other.rows,
            ));
        }
        let mut out = DMatrix::zeros(self.rows, other.cols());
        for (p, col) in other.columns.iter().enumerate() {
            for &(e, s) in col {
                for &(v, t) in &self.columns[e] {
                    out[(v, p)] += (s as i64) * (t as i64);
                }
            }
        }
        Ok(out)
    }
}

/// Vertex-edge incidence: column `j` for edge `(u, v)` has `-1` at `u` and
/// `+1` at `v`.
pub fn build_b1(complex: &CellComplex) -> IncidenceMatrix {
    let columns = complex
        .edges()
        .iter()
        .map(|&(u, v)| vec![(u, -1), (v, 1)])
        .collect();
    IncidenceMatrix {
        rows: complex.vertex_count(),
        columns,
    }
}

/// Edge-polygon incidence. Column `p` holds `+1` where the canonical walk of
/// polygon `p` follows an edge's orientation and `-1` where it runs against
/// it. Column order is the complex's polygon order (side count, then
/// lexicographic), so triangles come first, then quadrilaterals, and so on.
pub fn build_b2(complex: &CellComplex) -> Result<IncidenceMatrix> {
    let columns = complex
        .polygons()
        .iter()
        .map(|poly| {
            let mut col = complex.polygon_boundary(poly)?;
            col.sort_unstable_by_key(|&(r, _)| r);
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IncidenceMatrix {
        rows: complex.edge_count(),
        columns,
    })
}

/// True iff `B1 * B2` is exactly zero.
pub fn validate_chain_property(b1: &IncidenceMatrix, b2: &IncidenceMatrix) -> Result<bool> {
    Ok(first_chain_violation(b1, b2)?.is_none())
}

pub(crate) fn first_chain_violation(
    b1: &IncidenceMatrix,
    b2: &IncidenceMatrix,
) -> Result<Option<(usize, usize)>> {
    let product = b1.mul_int(b2)?;
    for p in 0..product.ncols() {
        for v in 0..product.nrows() {
            if product[(v, p)] != 0 {
                return Ok(Some((v, p)));
            }
        }
    }
    Ok(None)
}

pub(crate) fn ensure_chain_property(b1: &IncidenceMatrix, b2: &IncidenceMatrix) -> Result<()> {
    match first_chain_violation(b1, b2)? {
        None => Ok(()),
        Some((row, col)) => Err(Error::ChainViolation { row, col }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> CellComplex {
        CellComplex::new(3, [(0, 1), (0, 2), (1, 2)], [vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn single_edge_b1() {
        let c = CellComplex::graph(2, [(0, 1)]).unwrap();
        assert_eq!(build_b1(&c).to_dense_i64(), DMatrix::from_row_slice(2, 1, &[-1, 1]));
    }

    #[test]
    fn triangle_b1_and_b2() {
        let c = triangle();
        let b1 = build_b1(&c).to_dense_i64();
        assert_eq!(b1, DMatrix::from_row_slice(3, 3, &[-1, -1, 0, 1, 0, -1, 0, 1, 1]));
        let b2 = build_b2(&c).unwrap().to_dense_i64();
        assert_eq!(b2, DMatrix::from_row_slice(3, 1, &[1, -1, 1]));
    }

    #[test]
    fn path_b1() {
        let c = CellComplex::graph(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            build_b1(&c).to_dense_i64(),
            DMatrix::from_row_slice(3, 2, &[-1, 0, 1, -1, 0, 1])
        );
    }

    #[test]
    fn square_b2() {
        let c = CellComplex::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [vec![0, 1, 2, 3]]).unwrap();
        let b2 = build_b2(&c).unwrap().to_dense_i64();
        assert_eq!(b2, DMatrix::from_row_slice(4, 1, &[1, 1, 1, -1]));
    }

    #[test]
    fn no_polygons_gives_empty_b2() {
        let c = CellComplex::graph(3, [(0, 1), (1, 2)]).unwrap();
        let b2 = build_b2(&c).unwrap();
        assert_eq!((b2.rows(), b2.cols()), (2, 0));
        assert!(validate_chain_property(&build_b1(&c), &b2).unwrap());
    }

    #[test]
    fn b2_columns_follow_side_count_blocks() {
        let c = CellComplex::new(
            5,
            [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4)],
            [vec![0, 1, 2, 3], vec![0, 1, 4]],
        )
        .unwrap();
        let b2 = build_b2(&c).unwrap();
        assert_eq!(b2.column(0).len(), 3);
        assert_eq!(b2.column(1).len(), 4);
    }

    #[test]
    fn chain_property() {
        let c = triangle();
        let b1 = build_b1(&c);
        let b2 = build_b2(&c).unwrap();
        assert!(validate_chain_property(&b1, &b2).unwrap());

        let mut cols = b2.columns().to_vec();
        cols[0][1].1 = -cols[0][1].1;
        let flipped = IncidenceMatrix::from_columns(3, cols).unwrap();
        assert!(!validate_chain_property(&b1, &flipped).unwrap());
        let product = b1.mul_int(&flipped).unwrap();
        assert!(product.iter().any(|x| x.abs() == 2));

        let wrong = IncidenceMatrix::empty(5);
        assert!(matches!(
            validate_chain_property(&b1, &wrong),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn from_columns_rejects_bad_entries() {
        assert!(IncidenceMatrix::from_columns(2, vec![vec![(0, 2)]]).is_err());
        assert!(IncidenceMatrix::from_columns(2, vec![vec![(0, 1), (0, -1)]]).is_err());
        assert!(IncidenceMatrix::from_columns(2, vec![vec![(3, 1)]]).is_err());
    }
}
