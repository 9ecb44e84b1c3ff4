//! Document-by-feature matrices in compressed-sparse-row or dense storage.
//!
//! Text features are mostly zeros, so vectorizers emit CSR; reducers that
//! destroy sparsity (PCA, autoencoder) emit dense. Conversions between the
//! two storages preserve every value exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-compressed sparse matrix. Per row, column indices are strictly
/// increasing and no stored value is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row start offsets into `indices`/`values`; length `n_rows + 1`.
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|r| r.len() == n_cols));
        DenseMatrix {
            n_rows,
            n_cols,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` entries. Entries are sorted and
    /// zero values dropped, so the CSR invariants hold by construction.
    pub fn from_row_entries(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n_rows = rows.len();
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in row {
                debug_assert!(c < n_cols);
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.indptr[i]..self.indptr[i + 1]
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// Feature matrix in either storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureMatrix {
    Sparse(CsrMatrix),
    Dense(DenseMatrix),
}

impl FeatureMatrix {
    pub fn dense(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_rows * n_cols, "dense shape mismatch");
        FeatureMatrix::Dense(DenseMatrix {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn sparse_from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        FeatureMatrix::Sparse(CsrMatrix::from_row_entries(n_cols, rows))
    }

    pub fn n_rows(&self) -> usize {
        match self {
            FeatureMatrix::Sparse(m) => m.n_rows,
            FeatureMatrix::Dense(m) => m.n_rows,
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            FeatureMatrix::Sparse(m) => m.n_cols,
            FeatureMatrix::Dense(m) => m.n_cols,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    pub fn is_sparse_storage(&self) -> bool {
        matches!(self, FeatureMatrix::Sparse(_))
    }

    /// Fraction of zero entries.
    pub fn sparsity(&self) -> f64 {
        let total = self.n_rows() * self.n_cols();
        if total == 0 {
            return 0.0;
        }
        let nonzero = match self {
            FeatureMatrix::Sparse(m) => m.nnz(),
            FeatureMatrix::Dense(m) => m.values.iter().filter(|v| **v != 0.0).count(),
        };
        (total - nonzero) as f64 / total as f64
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            FeatureMatrix::Dense(m) => m.values[i * m.n_cols + j],
            FeatureMatrix::Sparse(m) => {
                let r = m.row_range(i);
                match m.indices[r.clone()].binary_search(&j) {
                    Ok(pos) => m.values[r.start + pos],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Nonzero `(column, value)` pairs of one row, columns ascending.
    pub fn row_nonzeros(&self, i: usize) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match self {
            FeatureMatrix::Sparse(m) => {
                let r = m.row_range(i);
                Box::new(
                    m.indices[r.clone()]
                        .iter()
                        .copied()
                        .zip(m.values[r].iter().copied()),
                )
            }
            FeatureMatrix::Dense(m) => Box::new(
                m.row(i)
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, v)| v != 0.0),
            ),
        }
    }

    /// Write row `i` into `out` (length `n_cols`), zero-filling first.
    pub fn copy_row_dense(&self, i: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n_cols());
        match self {
            FeatureMatrix::Dense(m) => out.copy_from_slice(m.row(i)),
            FeatureMatrix::Sparse(m) => {
                out.fill(0.0);
                for idx in m.row_range(i) {
                    out[m.indices[idx]] = m.values[idx];
                }
            }
        }
    }

    pub fn to_dense(&self) -> FeatureMatrix {
        match self {
            FeatureMatrix::Dense(_) => self.clone(),
            FeatureMatrix::Sparse(m) => {
                let mut dense = DenseMatrix::zeros(m.n_rows, m.n_cols);
                for i in 0..m.n_rows {
                    for idx in m.row_range(i) {
                        dense.values[i * m.n_cols + m.indices[idx]] = m.values[idx];
                    }
                }
                FeatureMatrix::Dense(dense)
            }
        }
    }

    pub fn to_sparse(&self) -> FeatureMatrix {
        match self {
            FeatureMatrix::Sparse(_) => self.clone(),
            FeatureMatrix::Dense(m) => {
                let rows = (0..m.n_rows)
                    .map(|i| {
                        m.row(i)
                            .iter()
                            .copied()
                            .enumerate()
                            .filter(|&(_, v)| v != 0.0)
                            .collect()
                    })
                    .collect();
                FeatureMatrix::Sparse(CsrMatrix::from_row_entries(m.n_cols, rows))
            }
        }
    }

    /// Borrow dense storage, materializing it if needed.
    pub fn densified(&self) -> std::borrow::Cow<'_, DenseMatrix> {
        match self {
            FeatureMatrix::Dense(m) => std::borrow::Cow::Borrowed(m),
            FeatureMatrix::Sparse(_) => match self.to_dense() {
                FeatureMatrix::Dense(m) => std::borrow::Cow::Owned(m),
                FeatureMatrix::Sparse(_) => unreachable!(),
            },
        }
    }

    pub fn ensure_width(&self, expected: usize) -> Result<()> {
        if self.n_cols() != expected {
            return Err(Error::Mismatch {
                expected,
                got: self.n_cols(),
            });
        }
        Ok(())
    }
}
