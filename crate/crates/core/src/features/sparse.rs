use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-sparse feature matrix. Each row lists `(feature, value)` pairs in
/// strictly increasing feature order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseFeatures {
    n_features: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseFeatures {
    pub fn new(n_features: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::param(format!("row {r} is not sorted by feature")));
            }
            if row.last().is_some_and(|&(j, _)| j >= n_features) {
                return Err(Error::param(format!("row {r} references a feature >= {n_features}")));
            }
        }
        Ok(Self { n_features, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Inner product of rows `i` and `j`.
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        sparse_dot(&self.rows[i], &self.rows[j])
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseFeatures {
        SparseFeatures {
            n_features: self.n_features,
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Number of distinct features with a non-zero value in the given rows.
    pub fn nonzero_features(&self, rows: &[usize]) -> usize {
        rows.iter()
            .flat_map(|&i| self.rows[i].iter().filter(|(_, v)| *v != 0.0).map(|(j, _)| *j))
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_features);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `row, feature, value` triplets with a header line.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["row", "feature", "value"])?;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

pub(crate) fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Sparse or dense design matrix produced by a feature map.
#[derive(Clone, Debug, PartialEq)]
pub enum Features {
    Sparse(SparseFeatures),
    Dense(DMatrix<f64>),
}

impl Features {
    pub fn n_rows(&self) -> usize {
        match self {
            Features::Sparse(s) => s.n_rows(),
            Features::Dense(d) => d.nrows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            Features::Sparse(s) => s.n_features(),
            Features::Dense(d) => d.ncols(),
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseFeatures> {
        match self {
            Features::Sparse(s) => Some(s),
            Features::Dense(_) => None,
        }
    }

    pub fn as_dense(&self) -> Option<&DMatrix<f64>> {
        match self {
            Features::Dense(d) => Some(d),
            Features::Sparse(_) => None,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Features {
        match self {
            Features::Sparse(s) => Features::Sparse(s.select_rows(rows)),
            Features::Dense(d) => Features::Dense(d.select_rows(rows)),
        }
    }

    /// Calls `f(feature, value)` for the stored entries of row `i`.
    pub fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut f: F) {
        match self {
            Features::Sparse(s) => s.row(i).iter().for_each(|&(j, v)| f(j, v)),
            Features::Dense(d) => d.row(i).iter().enumerate().for_each(|(j, &v)| f(j, v)),
        }
    }

    pub fn row_dot(&self, i: usize, w: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each_in_row(i, |j, v| s += v * w[j]);
        s
    }

    pub fn row_norm_squared(&self, i: usize) -> f64 {
        let mut s = 0.0;
        self.for_each_in_row(i, |_, v| s += v * v);
        s
    }

    /// `Z w`.
    pub fn mul(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row_dot(i, w)).collect()
    }

    /// `Z^T v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols()];
        for (i, &vi) in v.iter().enumerate() {
            self.for_each_in_row(i, |j, z| out[j] += z * vi);
        }
        out
    }

    /// `Z Z^T`.
    pub fn row_gram(&self) -> DMatrix<f64> {
        match self {
            Features::Dense(d) => d * d.transpose(),
            Features::Sparse(s) => {
                let n = s.n_rows();
                let mut g = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..=i {
                        let v = s.dot(i, j);
                        g[(i, j)] = v;
                        g[(j, i)] = v;
                    }
                }
                g
            }
        }
    }

    /// `Z^T Z`.
    pub fn column_gram(&self) -> DMatrix<f64> {
        match self {
            Features::Dense(d) => d.transpose() * d,
            Features::Sparse(s) => {
                let c = s.n_features();
                let mut g = DMatrix::zeros(c, c);
                for row in s.rows() {
                    for &(a, va) in row {
                        for &(b, vb) in row {
                            g[(a, b)] += va * vb;
                        }
                    }
                }
                g
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Features::Sparse(s) => s.to_dense(),
            Features::Dense(d) => d.clone(),
        }
    }
}
