use serde::Serialize;

use crate::error::{Error, Result};

/// Closed axis-aligned box `[lower, upper]`; zero widths are allowed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if lower.len() != upper.len() {
            return Err(Error::ShapeMismatch(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::param("box bounds must be finite with lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.width(i)).collect()
    }

    /// Sum of side lengths; the total cut rate of a Mondrian on this box.
    pub fn linear_dimension(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Splits at `location` along `dim` into (`x_dim <= location`, `x_dim >= location`).
    pub(crate) fn split(&self, dim: usize, location: f64) -> (AxisBox, AxisBox) {
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[dim] = location;
        right.lower[dim] = location;
        (left, right)
    }
}

/// Tight componentwise bounding box of `points`.
pub fn bounding_box<P: AsRef<[f64]>>(points: &[P]) -> Result<AxisBox> {
    let first = points.first().ok_or(Error::Empty("bounding_box needs a point"))?;
    let d = first.as_ref().len();
    let mut lower = first.as_ref().to_vec();
    let mut upper = lower.clone();
    for p in points {
        let p = p.as_ref();
        if p.len() != d {
            return Err(Error::ShapeMismatch(format!(
                "point of dimension {} among points of dimension {d}",
                p.len()
            )));
        }
        for i in 0..d {
            lower[i] = lower[i].min(p[i]);
            upper[i] = upper[i].max(p[i]);
        }
    }
    AxisBox::new(lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_degenerate_box() {
        let b = bounding_box(&[vec![0.5, -2.0]]).unwrap();
        assert_eq!(b.lower(), b.upper());
        assert_eq!(b.linear_dimension(), 0.0);
    }

    #[test]
    fn two_points() {
        let b = bounding_box(&[vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(b.lower(), &[0.0, 0.0]);
        assert_eq!(b.upper(), &[1.0, 2.0]);
    }

    #[test]
    fn rotated_unit_square() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let rotated: Vec<Vec<f64>> = corners
            .iter()
            .map(|p| vec![c * p[0] - c * p[1], c * p[0] + c * p[1]])
            .collect();
        let b = bounding_box(&rotated).unwrap();
        for w in b.widths() {
            assert!((w - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_ragged_rejected() {
        let none: [Vec<f64>; 0] = [];
        assert!(matches!(bounding_box(&none), Err(Error::Empty(_))));
        assert!(bounding_box(&[vec![0.0], vec![0.0, 1.0]]).is_err());
    }
}
