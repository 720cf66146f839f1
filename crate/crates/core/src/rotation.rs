//! Haar-uniform rotations of `R^d`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An element of `SO(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self {
            matrix: DMatrix::identity(dim, dim),
        })
    }

    /// Wraps `matrix` after checking orthogonality and orientation to `tol`.
    pub fn from_matrix(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "rotation must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let r = Self { matrix };
        if r.orthogonality_defect() > tol || (r.determinant() - 1.0).abs() > tol {
            return Err(Error::param("matrix is not a rotation"));
        }
        Ok(r)
    }

    /// Rotation taking `e_1` to the unit vector `target` (Householder
    /// reflection composed with a sign flip to restore orientation).
    pub fn aligning_first_axis(target: &[f64]) -> Result<Self> {
        let d = target.len();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let norm = target.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param("target direction must be a finite non-zero vector"));
        }
        let t: Vec<f64> = target.iter().map(|v| v / norm).collect();
        if d == 1 {
            return if t[0] > 0.0 {
                Self::identity(1)
            } else {
                Err(Error::param("SO(1) cannot map e_1 to -e_1"))
            };
        }
        // H = I - 2uu^T with u = (e_1 - t)/|e_1 - t| maps e_1 to t; H has
        // det -1, so flip the last column (H e_d is orthogonal to t when d>1).
        let mut u = t.iter().map(|v| -v).collect::<Vec<_>>();
        u[0] += 1.0;
        let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut m = DMatrix::<f64>::identity(d, d);
        if un > 1e-12 {
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] -= 2.0 * u[i] * u[j] / (un * un);
                }
            }
            for i in 0..d {
                m[(i, d - 1)] = -m[(i, d - 1)];
            }
        }
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Column `i`, i.e. the image of the basis vector `e_i`.
    pub fn axis(&self, i: usize) -> Vec<f64> {
        self.matrix.column(i).iter().copied().collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation {
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn transpose(&self) -> Rotation {
        Rotation {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim();
        let g = self.matrix.transpose() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_rows(&self.matrix, s)
    }
}

/// Serializes a matrix as a list of rows.
pub(crate) fn serialize_rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Haar-distributed element of `SO(d)`.
///
/// Gaussian matrix, QR, column signs fixed by the diagonal of `R`, then one
/// column negated if the determinant is `-1`.
pub fn sample_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Rotation> {
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if dim == 1 {
        return Rotation::identity(1);
    }
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.clone().determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(Rotation { matrix: q })
}
