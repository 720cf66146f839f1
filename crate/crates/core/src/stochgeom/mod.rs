//! Typical cell of a superposition of `M` independently rotated Poisson
//! Manhattan tessellations.
//!
//! The typical cell is sampled exactly as an intersection of `M d` slabs
//! centred at the origin: rotation `n` contributes normals `R_n e_i`, and
//! every half-width is an independent `Exp(2 lambda / d)` variable. Windowed
//! simulation is avoided on purpose: the cell covering a fixed point is
//! size-biased and has a different law.

mod polytope;
mod report;
mod stats;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rotation::{sample_rotation, Rotation};

pub use polytope::{circumradius, vertices, volume};
pub use report::{
    sample_cells, typical_cell_stats, volume_bounds, write_samples_csv, CellSample, CircumradiusCheck, InradiusCheck,
    KsCheck, TypicalCellConfig, TypicalCellReport, VolumeCheck,
};
pub use stats::{circumradius_survival_bound, exponential_ks, ks_critical_1pct, ks_two_sample, mean_and_se};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slab {
    /// Unit normal.
    pub normal: Vec<f64>,
    pub half_width: f64,
}

/// `{x : |<a_k, x>| <= s_k for all k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlabIntersection {
    dim: usize,
    slabs: Vec<Slab>,
    rotations: Vec<Rotation>,
    lifetime: Option<f64>,
}

impl SlabIntersection {
    /// Cell from explicit slabs; normals are checked to unit length.
    pub fn new(dim: usize, slabs: Vec<Slab>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if slabs.is_empty() {
            return Err(Error::Empty("a cell needs at least one slab"));
        }
        for (k, s) in slabs.iter().enumerate() {
            if s.normal.len() != dim {
                return Err(Error::ShapeMismatch(format!("slab {k} normal has wrong dimension")));
            }
            let norm = s.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::param(format!("slab {k} normal has norm {norm}")));
            }
            if !(s.half_width > 0.0) || !s.half_width.is_finite() {
                return Err(Error::param(format!("slab {k} half-width must be positive")));
            }
        }
        Ok(Self {
            dim,
            slabs,
            rotations: Vec::new(),
            lifetime: None,
        })
    }

    /// Axis-aligned box `prod [-s_i, s_i]`.
    pub fn axis_box(half_widths: &[f64]) -> Result<Self> {
        let d = half_widths.len();
        let slabs = half_widths
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut normal = vec![0.0; d];
                normal[i] = 1.0;
                Slab { normal, half_width: s }
            })
            .collect();
        Self::new(d, slabs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slabs(&self) -> &[Slab] {
        &self.slabs
    }

    /// Rotations the slabs were drawn from (empty for explicit cells).
    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn lifetime(&self) -> Option<f64> {
        self.lifetime
    }

    /// The same normals with every half-width multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::param("scale must be positive"));
        }
        let mut out = self.clone();
        out.slabs.iter_mut().for_each(|s| s.half_width *= c);
        Ok(out)
    }
}

/// Draws the typical cell for `m` rotations at `lifetime` in dimension `dim`.
pub fn sample_typical_cell<R: Rng + ?Sized>(
    m: usize,
    lifetime: f64,
    dim: usize,
    rng: &mut R,
) -> Result<SlabIntersection> {
    sample_typical_cell_with(m, lifetime, dim, None, rng)
}

/// As [`sample_typical_cell`] with every rotation `R_n` replaced by
/// `R_n Q` for a fixed `Q`. The law is unchanged.
pub fn sample_typical_cell_with<R: Rng + ?Sized>(
    m: usize,
    lifetime: f64,
    dim: usize,
    pre: Option<&Rotation>,
    rng: &mut R,
) -> Result<SlabIntersection> {
    if m == 0 {
        return Err(Error::param("at least one rotation is required"));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(lifetime > 0.0) || !lifetime.is_finite() {
        return Err(Error::param(format!("lifetime must be positive, got {lifetime}")));
    }
    if let Some(q) = pre {
        if q.dim() != dim {
            return Err(Error::ShapeMismatch(format!("pre-rotation has dimension {}", q.dim())));
        }
    }
    let exp = Exp::new(2.0 * lifetime / dim as f64).map_err(|e| Error::param(e.to_string()))?;
    let mut rotations = Vec::with_capacity(m);
    let mut slabs = Vec::with_capacity(m * dim);
    for _ in 0..m {
        let mut r = sample_rotation(dim, rng)?;
        if let Some(q) = pre {
            r = r.compose(q);
        }
        for i in 0..dim {
            slabs.push(Slab {
                normal: r.axis(i),
                half_width: exp.sample(rng),
            });
        }
        rotations.push(r);
    }
    Ok(SlabIntersection {
        dim,
        slabs,
        rotations,
        lifetime: Some(lifetime),
    })
}

/// Radius of the largest ball inside the cell: the smallest half-width,
/// since the cell is symmetric about the origin and normals are unit.
pub fn inradius(cell: &SlabIntersection) -> f64 {
    cell.slabs.iter().map(|s| s.half_width).fold(f64::INFINITY, f64::min)
}

/// Stacked scaled frames `(1/sqrt(M)) (R_n e_i)^T`, an isometric embedding
/// of `R^d` into `R^{M d}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftMatrix {
    #[serde(serialize_with = "crate::rotation::serialize_rows")]
    matrix: DMatrix<f64>,
    rotations: Vec<Rotation>,
}

impl LiftMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    /// `max |T^T T - I|` entrywise.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.matrix.ncols();
        let g = self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d);
        g.amax()
    }
}

pub fn lift_matrix(rotations: &[Rotation]) -> Result<LiftMatrix> {
    let first = rotations
        .first()
        .ok_or(Error::Empty("lift needs at least one rotation"))?;
    let d = first.dim();
    if let Some(r) = rotations.iter().find(|r| r.dim() != d) {
        return Err(Error::ShapeMismatch(format!(
            "rotations of dimension {d} and {} mixed",
            r.dim()
        )));
    }
    let m = rotations.len();
    let scale = 1.0 / (m as f64).sqrt();
    let matrix = DMatrix::from_fn(m * d, d, |row, col| {
        let (n, i) = (row / d, row % d);
        scale * rotations[n].matrix()[(col, i)]
    });
    Ok(LiftMatrix {
        matrix,
        rotations: rotations.to_vec(),
    })
}
