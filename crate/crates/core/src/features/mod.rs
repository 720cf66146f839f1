//! Random feature maps and their order-`M` kernel estimates.
//!
//! Four constructions share one interface:
//!
//! | method             | component                                     | limit                 |
//! |--------------------|-----------------------------------------------|-----------------------|
//! | `rotated-mondrian` | Haar rotation, then a Mondrian tree           | isotropic sphere mean |
//! | `mondrian`         | Mondrian tree on the raw coordinates          | Laplace               |
//! | `binning`          | randomly shifted grid, Gamma(2) pitches       | Laplace               |
//! | `fourier`          | `cos(<w, x> + b)`, Cauchy frequencies         | Laplace               |
//!
//! Partition methods and binning produce one-hot rows scaled by `1/sqrt(M)`,
//! so the inner product of two rows is exactly the fraction of components
//! in which the points share a cell.
//!
//! Component `m` draws only from the substream labelled `m`, so the first
//! `M'` components of a map of order `M` are the map of order `M'`.

mod sparse;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::mondrian::{build_mondrian_on_points, MondrianTree};
use crate::rng::SeededRng;
use crate::rotation::{sample_rotation, Rotation};

pub use sparse::{Features, SparseFeatures};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RotatedMondrian,
    Mondrian,
    Binning,
    Fourier,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Fourier,
        Method::Binning,
        Method::Mondrian,
        Method::RotatedMondrian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::RotatedMondrian => "rotated-mondrian",
            Method::Mondrian => "mondrian",
            Method::Binning => "binning",
            Method::Fourier => "fourier",
        }
    }

    /// Mondrian-based methods, whose trees can be read at any lifetime up
    /// to their horizon.
    pub fn is_partition(self) -> bool {
        matches!(self, Method::RotatedMondrian | Method::Mondrian)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown method `{s}`")))
    }
}

/// One rotation (identity for plain Mondrian) and the tree built on the
/// rotated construction points.
#[derive(Clone, Debug)]
pub struct PartitionComponent {
    rotation: Option<Rotation>,
    tree: MondrianTree,
}

impl PartitionComponent {
    pub fn rotation(&self) -> Option<&Rotation> {
        self.rotation.as_ref()
    }

    pub fn tree(&self) -> &MondrianTree {
        &self.tree
    }

    pub(crate) fn transform(&self, x: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(r) => r.apply(x),
            None => x.to_vec(),
        }
    }
}

/// Grid of one binning repetition at unit lifetime; pitches scale as
/// `1/lambda`.
#[derive(Clone, Debug)]
struct BinGrid {
    pitch: Vec<f64>,
    /// Offset as a fraction of the pitch, in `[0, 1)`.
    offset: Vec<f64>,
}

impl BinGrid {
    fn bin(&self, x: &[f64], lifetime: f64) -> Vec<i64> {
        x.iter()
            .zip(self.pitch.iter().zip(&self.offset))
            .map(|(&v, (&p, &u))| {
                let delta = p / lifetime;
                ((v - u * delta) / delta).floor() as i64
            })
            .collect()
    }
}

/// Frequency at unit lifetime (scales linearly with `lambda`) and phase.
#[derive(Clone, Debug)]
struct Wave {
    frequency: Vec<f64>,
    phase: f64,
}

impl Wave {
    fn value(&self, x: &[f64], lifetime: f64) -> f64 {
        let arg: f64 = self.frequency.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() * lifetime;
        (arg + self.phase).cos()
    }
}

#[derive(Clone, Debug)]
enum Components {
    Partition(Vec<PartitionComponent>),
    Binning(Vec<BinGrid>),
    Fourier(Vec<Wave>),
}

/// `M` independent random feature components of one method.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    method: Method,
    dim: usize,
    lifetime: f64,
    horizon: f64,
    components: Components,
}

/// Per-component cell codes (partition, binning) or cosine values (Fourier)
/// for a set of rows; the building block of order-`M` kernel estimates.
#[derive(Clone, Debug)]
pub enum ComponentTerms {
    /// `codes[m][i]`: cell of row `i` in component `m`.
    Codes(Vec<Vec<usize>>),
    /// `values[m][i]`: `cos(<w_m, x_i> + b_m)`.
    Values(Vec<Vec<f64>>),
}

impl ComponentTerms {
    pub fn n_components(&self) -> usize {
        match self {
            ComponentTerms::Codes(c) => c.len(),
            ComponentTerms::Values(v) => v.len(),
        }
    }

    /// Single-component kernel `k^(m)(x_i, x_j)`; averaging over `m` gives
    /// the order-`M` estimate.
    pub fn term(&self, m: usize, i: usize, j: usize) -> f64 {
        match self {
            ComponentTerms::Codes(c) => (c[m][i] == c[m][j]) as u8 as f64,
            ComponentTerms::Values(v) => 2.0 * v[m][i] * v[m][j],
        }
    }
}

fn check_positive_lifetime(lifetime: f64) -> Result<()> {
    if !(lifetime > 0.0) || !lifetime.is_finite() {
        return Err(Error::param(format!("lifetime must be positive, got {lifetime}")));
    }
    Ok(())
}

fn check_points<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    let d = points
        .first()
        .ok_or(Error::Empty("feature maps need at least one point"))?
        .as_ref()
        .len();
    if d == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if let Some(i) = points.iter().position(|p| p.as_ref().len() != d) {
        return Err(Error::ShapeMismatch(format!("row {i} does not have dimension {d}")));
    }
    Ok(d)
}

impl FeatureMap {
    /// Feature map of order `m` with trees (if any) generated to `lifetime`.
    ///
    /// `points` is the full set of rows that will ever be featurized; the
    /// partition methods bound their trees by it.
    pub fn build<P: AsRef<[f64]> + Sync>(
        points: &[P],
        method: Method,
        m: usize,
        lifetime: f64,
        rng: &SeededRng,
    ) -> Result<Self> {
        Self::build_with_horizon(points, method, m, lifetime, lifetime, rng)
    }

    /// As [`Self::build`] but generating trees up to `horizon >= lifetime`,
    /// so the map can later be read at any lifetime up to `horizon`.
    pub fn build_with_horizon<P: AsRef<[f64]> + Sync>(
        points: &[P],
        method: Method,
        m: usize,
        lifetime: f64,
        horizon: f64,
        rng: &SeededRng,
    ) -> Result<Self> {
        let dim = check_points(points)?;
        check_positive_lifetime(lifetime)?;
        if m == 0 {
            return Err(Error::param("number of components must be at least 1"));
        }
        if !(horizon >= lifetime) || !horizon.is_finite() {
            return Err(Error::param(format!(
                "horizon {horizon} must be finite and >= lifetime {lifetime}"
            )));
        }
        let components = match method {
            Method::RotatedMondrian | Method::Mondrian => {
                let rotate = method == Method::RotatedMondrian;
                let comps = (0..m)
                    .into_par_iter()
                    .map(|k| {
                        let mut stream = rng.derive(k as u64).stream();
                        let rotation = if rotate {
                            Some(sample_rotation(dim, &mut stream)?)
                        } else {
                            None
                        };
                        let tree = match &rotation {
                            Some(r) => {
                                let rotated: Vec<Vec<f64>> = points.iter().map(|p| r.apply(p.as_ref())).collect();
                                build_mondrian_on_points(&rotated, horizon, &mut stream)?
                            }
                            None => build_mondrian_on_points(points, horizon, &mut stream)?,
                        };
                        Ok(PartitionComponent { rotation, tree })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Components::Partition(comps)
            }
            Method::Binning => {
                let gamma = Gamma::new(2.0, 1.0).expect("valid Gamma parameters");
                let grids = (0..m)
                    .map(|k| {
                        let mut s = rng.derive(k as u64).stream();
                        let pitch: Vec<f64> = (0..dim).map(|_| gamma.sample(&mut s)).collect();
                        let offset: Vec<f64> = (0..dim).map(|_| s.gen::<f64>()).collect();
                        BinGrid { pitch, offset }
                    })
                    .collect();
                Components::Binning(grids)
            }
            Method::Fourier => {
                let cauchy = Cauchy::new(0.0, 1.0).expect("valid Cauchy parameters");
                let waves = (0..m)
                    .map(|k| {
                        let mut s = rng.derive(k as u64).stream();
                        let frequency = (0..dim).map(|_| cauchy.sample(&mut s)).collect();
                        let phase = s.gen::<f64>() * std::f64::consts::TAU;
                        Wave { frequency, phase }
                    })
                    .collect();
                Components::Fourier(waves)
            }
        };
        Ok(Self {
            method,
            dim,
            lifetime,
            horizon,
            components,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_components(&self) -> usize {
        match &self.components {
            Components::Partition(c) => c.len(),
            Components::Binning(g) => g.len(),
            Components::Fourier(w) => w.len(),
        }
    }

    pub fn partition_components(&self) -> Option<&[PartitionComponent]> {
        match &self.components {
            Components::Partition(c) => Some(c),
            _ => None,
        }
    }

    /// Root box of component `m` (partition methods only).
    pub fn root_box(&self, m: usize) -> Option<&AxisBox> {
        self.partition_components()
            .and_then(|c| c.get(m))
            .map(|c| c.tree.root_box())
    }

    /// The map restricted to its first `m` components.
    pub fn truncated(&self, m: usize) -> Result<FeatureMap> {
        if m == 0 || m > self.n_components() {
            return Err(Error::param(format!(
                "cannot keep {m} of {} components",
                self.n_components()
            )));
        }
        let components = match &self.components {
            Components::Partition(c) => Components::Partition(c[..m].to_vec()),
            Components::Binning(g) => Components::Binning(g[..m].to_vec()),
            Components::Fourier(w) => Components::Fourier(w[..m].to_vec()),
        };
        Ok(FeatureMap {
            components,
            ..self.clone()
        })
    }

    fn check_query<P: AsRef<[f64]>>(&self, points: &[P], lifetime: f64) -> Result<()> {
        if let Some(i) = points.iter().position(|p| p.as_ref().len() != self.dim) {
            return Err(Error::ShapeMismatch(format!(
                "row {i} does not have dimension {}",
                self.dim
            )));
        }
        if self.method.is_partition() {
            if !(0.0..=self.horizon).contains(&lifetime) {
                return Err(Error::param(format!(
                    "lifetime {lifetime} outside [0, {}]",
                    self.horizon
                )));
            }
        } else {
            check_positive_lifetime(lifetime)?;
        }
        Ok(())
    }

    /// Cell codes or cosine values of every row in every component.
    pub fn component_terms<P: AsRef<[f64]> + Sync>(&self, points: &[P], lifetime: f64) -> Result<ComponentTerms> {
        self.check_query(points, lifetime)?;
        match &self.components {
            Components::Partition(comps) => {
                let codes = comps
                    .par_iter()
                    .map(|c| partition_codes(c, points, lifetime))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ComponentTerms::Codes(codes.into_iter().map(|(c, _)| c).collect()))
            }
            Components::Binning(grids) => Ok(ComponentTerms::Codes(
                grids.iter().map(|g| binning_codes(g, points, lifetime).0).collect(),
            )),
            Components::Fourier(waves) => Ok(ComponentTerms::Values(
                waves
                    .iter()
                    .map(|w| points.iter().map(|p| w.value(p.as_ref(), lifetime)).collect())
                    .collect(),
            )),
        }
    }

    /// Feature matrix of `points` at `lifetime`.
    ///
    /// Partition methods: one-hot per component, global index = cumulative
    /// cell count of earlier components + leaf index. Binning: the same with
    /// bins numbered by first appearance among `points`. Fourier: dense
    /// `sqrt(2/M) cos(<w, x> + b)`.
    pub fn featurize<P: AsRef<[f64]> + Sync>(&self, points: &[P], lifetime: f64) -> Result<Features> {
        self.check_query(points, lifetime)?;
        let m = self.n_components();
        let n = points.len();
        let (codes, counts): (Vec<Vec<usize>>, Vec<usize>) = match &self.components {
            Components::Partition(comps) => comps
                .par_iter()
                .map(|c| partition_codes(c, points, lifetime))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip(),
            Components::Binning(grids) => grids.iter().map(|g| binning_codes(g, points, lifetime)).unzip(),
            Components::Fourier(waves) => {
                let scale = (2.0 / m as f64).sqrt();
                let dense = DMatrix::from_fn(n, m, |i, k| scale * waves[k].value(points[i].as_ref(), lifetime));
                return Ok(Features::Dense(dense));
            }
        };
        let value = 1.0 / (m as f64).sqrt();
        let mut offsets = Vec::with_capacity(m);
        let mut total = 0;
        for c in &counts {
            offsets.push(total);
            total += c;
        }
        let rows = (0..n)
            .map(|i| (0..m).map(|k| (offsets[k] + codes[k][i], value)).collect())
            .collect();
        Ok(Features::Sparse(SparseFeatures::new(total, rows)?))
    }

    /// Order-`M` kernel estimate `k_M(x, y)` at `lifetime`.
    pub fn kernel_estimate(&self, x: &[f64], y: &[f64], lifetime: f64) -> Result<f64> {
        self.check_query(&[x, y], lifetime)?;
        let m = self.n_components() as f64;
        let total: f64 = match &self.components {
            Components::Partition(comps) => {
                let mut shared = 0usize;
                for c in comps {
                    let (tx, ty) = (c.transform(x), c.transform(y));
                    let rows: Vec<usize> = [(0, &tx), (1, &ty)]
                        .iter()
                        .filter(|(_, p)| !c.tree.root_box().contains(p))
                        .map(|(i, _)| *i)
                        .collect();
                    if !rows.is_empty() {
                        return Err(Error::OutOfDomain { rows });
                    }
                    if c.tree.locate(&tx, lifetime) == c.tree.locate(&ty, lifetime) {
                        shared += 1;
                    }
                }
                shared as f64
            }
            Components::Binning(grids) => grids
                .iter()
                .filter(|g| g.bin(x, lifetime) == g.bin(y, lifetime))
                .count() as f64,
            Components::Fourier(waves) => waves
                .iter()
                .map(|w| 2.0 * w.value(x, lifetime) * w.value(y, lifetime))
                .sum(),
        };
        Ok(total / m)
    }
}

/// Leaf index of each row and the number of cells of one component.
fn partition_codes<P: AsRef<[f64]>>(
    c: &PartitionComponent,
    points: &[P],
    lifetime: f64,
) -> Result<(Vec<usize>, usize)> {
    let slice = c.tree.slice(lifetime)?;
    let mut outside = Vec::new();
    let mut codes = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let x = c.transform(p.as_ref());
        if !c.tree.root_box().contains(&x) {
            outside.push(i);
            continue;
        }
        let node = c.tree.locate(&x, lifetime);
        codes.push(slice.leaf_index(node).expect("located node is a leaf of the slice"));
    }
    if !outside.is_empty() {
        return Err(Error::OutOfDomain { rows: outside });
    }
    Ok((codes, slice.n_cells()))
}

/// Bin of each row, numbered by first appearance, and the number of bins.
fn binning_codes<P: AsRef<[f64]>>(g: &BinGrid, points: &[P], lifetime: f64) -> (Vec<usize>, usize) {
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let codes = points
        .iter()
        .map(|p| {
            let next = index.len();
            *index.entry(g.bin(p.as_ref(), lifetime)).or_insert(next)
        })
        .collect();
    (codes, index.len())
}

/// Dense Fourier features `sqrt(2/M) cos(<w, x> + b)` approximating the
/// Laplace kernel of the given lifetime.
pub fn fourier_features<P: AsRef<[f64]> + Sync>(
    points: &[P],
    m: usize,
    lifetime: f64,
    rng: &SeededRng,
) -> Result<DMatrix<f64>> {
    let map = FeatureMap::build(points, Method::Fourier, m, lifetime, rng)?;
    match map.featurize(points, lifetime)? {
        Features::Dense(d) => Ok(d),
        Features::Sparse(_) => unreachable!("Fourier features are dense"),
    }
}

/// Random binning features of order `m` at the given lifetime.
pub fn binning_features<P: AsRef<[f64]> + Sync>(
    points: &[P],
    m: usize,
    lifetime: f64,
    rng: &SeededRng,
) -> Result<SparseFeatures> {
    let map = FeatureMap::build(points, Method::Binning, m, lifetime, rng)?;
    match map.featurize(points, lifetime)? {
        Features::Sparse(s) => Ok(s),
        Features::Dense(_) => unreachable!("binning features are sparse"),
    }
}

#[cfg(test)]
mod tests;
