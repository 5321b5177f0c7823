use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_err, Error, Result};

/// `E x M` matrix of `M` observed edge-flow realizations, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSignalBatch(DMatrix<f64>);

impl EdgeSignalBatch {
    pub fn new(data: DMatrix<f64>) -> Self {
        Self(data)
    }

    pub fn from_columns(edges: usize, columns: &[DVector<f64>]) -> Result<Self> {
        for c in columns {
            if c.len() != edges {
                return Err(shape_err("edge signal", edges, c.len()));
            }
        }
        if columns.is_empty() {
            return Ok(Self(DMatrix::zeros(edges, 0)));
        }
        Ok(Self(DMatrix::from_columns(columns)))
    }

    pub fn edge_count(&self) -> usize {
        self.0.nrows()
    }

    pub fn len(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.0.ncols() == 0
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.0.column(i).into_owned()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Columns `range`, as a new batch.
    pub fn columns_range(&self, start: usize, count: usize) -> Self {
        Self(self.0.columns(start, count).into_owned())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }

    /// Writes one row per edge: `edge,m0,m1,...`. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["edge".to_string()];
        header.extend((0..self.len()).map(|j| format!("m{j}")));
        wtr.write_record(&header).map_err(csv_err)?;
        for i in 0..self.edge_count() {
            let mut rec = vec![i.to_string()];
            rec.extend(self.0.row(i).iter().map(|x| x.to_string()));
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let width = rdr.headers().map_err(csv_err)?.len();
        if width == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            });
        }
        let mut values = Vec::new();
        let mut rows = 0;
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let parse = |field: &str| {
                field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{field:?}: {e}"),
                })
            };
            if parse(&rec[0])? != rows as f64 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected edge {rows}"),
                });
            }
            for field in rec.iter().skip(1) {
                values.push(parse(field)?);
            }
            rows += 1;
        }
        Ok(Self(DMatrix::from_row_slice(rows, width - 1, &values)))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_csv(std::fs::File::create(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

impl From<DMatrix<f64>> for EdgeSignalBatch {
    fn from(m: DMatrix<f64>) -> Self {
        Self(m)
    }
}
