//! In-memory regression datasets and CSV ingestion.

use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    targets: Option<Vec<f64>>,
    columns: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, targets: Option<Vec<f64>>) -> Result<Self> {
        let d = points
            .first()
            .ok_or(Error::Empty("dataset needs at least one row"))?
            .len();
        if d == 0 {
            return Err(Error::InvalidDimension(0));
        }
        for (row, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "row {row} has {} columns, expected {d}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::param(format!("row {row} has a non-finite entry")));
            }
        }
        if let Some(t) = &targets {
            if t.len() != points.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} targets for {} rows",
                    t.len(),
                    points.len()
                )));
            }
            if let Some(row) = t.iter().position(|v| !v.is_finite()) {
                return Err(Error::param(format!("target in row {row} is not finite")));
            }
        }
        Ok(Self {
            points,
            targets,
            columns: None,
        })
    }

    pub fn with_columns(mut self, columns: Vec<String>) -> Self {
        self.columns = Some(columns);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn targets(&self) -> Option<&[f64]> {
        self.targets.as_deref()
    }

    /// Targets, or an error naming the dataset as unlabeled.
    pub fn require_targets(&self) -> Result<&[f64]> {
        self.targets
            .as_deref()
            .ok_or_else(|| Error::param("dataset has no target column"))
    }

    pub fn columns(&self) -> Option<&[String]> {
        self.columns.as_deref()
    }

    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let points = rows.iter().map(|&i| self.points[i].clone()).collect();
        let targets = self.targets.as_ref().map(|t| rows.iter().map(|&i| t[i]).collect());
        let mut out = Dataset::new(points, targets)?;
        out.columns = self.columns.clone();
        Ok(out)
    }

    /// Seeded shuffle followed by a cut into consecutive parts with the given
    /// fractions (the last part takes the remainder).
    pub fn split(&self, fractions: &[f64], rng: &SeededRng) -> Result<Vec<Dataset>> {
        if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::param("split fractions must be positive"));
        }
        let total: f64 = fractions.iter().sum();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut rng.stream());
        let mut parts = Vec::with_capacity(fractions.len());
        let mut start = 0;
        let mut acc = 0.0;
        for (k, f) in fractions.iter().enumerate() {
            acc += f / total;
            let end = if k + 1 == fractions.len() {
                self.len()
            } else {
                ((acc * self.len() as f64).round() as usize).min(self.len())
            };
            if end <= start {
                return Err(Error::param("split produced an empty part"));
            }
            parts.push(self.subset(&order[start..end])?);
            start = end;
        }
        Ok(parts)
    }
}

/// Reads a headed, comma-separated numeric CSV.
///
/// With `target_column`, that column becomes the target vector and is removed
/// from the points; the remaining columns keep file order.
pub fn load_csv(path: impl AsRef<Path>, target_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, target_column)
}

pub fn read_csv<R: std::io::Read>(reader: R, target_column: Option<&str>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let target_idx = match target_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_owned()))?,
        ),
        None => None,
    };
    let mut points = Vec::new();
    let mut targets = target_idx.map(|_| Vec::new());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let mut point = Vec::with_capacity(header.len());
        for (col, cell) in record.iter().enumerate() {
            let column = header.get(col).cloned().unwrap_or_else(|| col.to_string());
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: column.clone(),
                message: format!("`{cell}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    message: format!("`{cell}` is not finite"),
                });
            }
            if Some(col) == target_idx {
                targets.as_mut().expect("target column present").push(value);
            } else {
                point.push(value);
            }
        }
        points.push(point);
    }
    let columns = header
        .into_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != target_idx)
        .map(|(_, h)| h)
        .collect();
    Ok(Dataset::new(points, targets)?.with_columns(columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "a,b,y\n1,2,3\n4,5,6\n7,8,9\n";

    #[test]
    fn target_split_out() {
        let ds = read_csv(SMALL.as_bytes(), Some("y")).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 2));
        assert_eq!(ds.targets().unwrap(), &[3.0, 6.0, 9.0]);
        assert_eq!(ds.columns().unwrap(), &["a".to_string(), "b".to_string()]);
        assert_eq!(ds.points()[1], vec![4.0, 5.0]);
    }

    #[test]
    fn no_target() {
        let ds = read_csv(SMALL.as_bytes(), None).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 3));
        assert!(ds.targets().is_none());
    }

    #[test]
    fn missing_column_named() {
        let err = read_csv(SMALL.as_bytes(), Some("z")).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "z"));
    }

    #[test]
    fn nan_cell_reports_location() {
        let err = read_csv("a,b\n1,2\n3,NaN\n".as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn garbage_cell_reports_location() {
        let err = read_csv("a,b\nx,2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 0, ref column, .. } if column == "a"));
    }

    #[test]
    fn split_is_seeded_and_exhaustive() {
        let points: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ds = Dataset::new(points, None).unwrap();
        let parts = ds.split(&[0.6, 0.2, 0.2], &SeededRng::new(1)).unwrap();
        assert_eq!(parts.iter().map(Dataset::len).collect::<Vec<_>>(), vec![6, 2, 2]);
        let again = ds.split(&[0.6, 0.2, 0.2], &SeededRng::new(1)).unwrap();
        assert_eq!(parts, again);
        let mut all: Vec<f64> = parts.iter().flat_map(|p| p.points().iter().map(|r| r[0])).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(f64::from).collect::<Vec<_>>());
    }
}
