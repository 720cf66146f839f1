//! Mondrian partition trees.
//!
//! A [`MondrianTree`] is generated once up to a horizon `lambda_max` and can
//! be read at any lifetime `0 <= lambda <= lambda_max` by ignoring splits
//! whose time exceeds `lambda`. Two generators are provided:
//!
//! * [`build_mondrian`] runs the process on a whole box, so every node box is
//!   the true cell and the leaves tile the root box.
//! * [`build_mondrian_on_points`] runs it on the bounding box of a point set
//!   and, in every node, on the bounding box of the points that reached it.
//!   By the projectivity of the Mondrian process this yields exactly the
//!   law of the cell memberships of those points, while never creating empty
//!   cells. Feature maps use this generator.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{bounding_box, AxisBox};

/// An accepted cut of a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Split {
    pub dim: usize,
    pub location: f64,
    /// Lifetime at which the cut appears; the birth time of both children.
    pub time: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Node {
    /// Cell for box-built trees; extent of the construction points that
    /// reached this node for point-built trees.
    pub extent: AxisBox,
    pub birth_time: f64,
    pub split: Option<Split>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MondrianTree {
    root_box: AxisBox,
    lambda_max: f64,
    nodes: Vec<Node>,
}

/// Leaf numbering of a tree truncated at one lifetime.
///
/// Leaves are numbered depth-first, left child first.
#[derive(Clone, Debug)]
pub struct TreeSlice {
    lifetime: f64,
    leaf_of_node: Vec<u32>,
    n_cells: usize,
}

const NOT_A_LEAF: u32 = u32::MAX;

/// Samples the next cut of a node born at `birth` with the given extent.
///
/// One exponential with the total rate and a dimension chosen proportional
/// to its width: the same law as racing one exponential per dimension.
fn sample_cut<R: Rng + ?Sized>(
    extent: &AxisBox,
    birth: f64,
    lambda_max: f64,
    rng: &mut R,
) -> Option<(f64, usize, f64)> {
    let rate = extent.linear_dimension();
    if !(rate > 0.0) {
        return None;
    }
    let time = birth + Exp::new(rate).expect("positive rate").sample(rng);
    if time >= lambda_max {
        return None;
    }
    let mut u = rng.gen::<f64>() * rate;
    let mut dim = extent.dim() - 1;
    for i in 0..extent.dim() {
        let w = extent.width(i);
        if w > 0.0 && u < w {
            dim = i;
            break;
        }
        u -= w;
    }
    // Rounding in the cumulative walk can land on a zero-width tail.
    while extent.width(dim) <= 0.0 {
        dim -= 1;
    }
    let (lo, hi) = (extent.lower()[dim], extent.upper()[dim]);
    let location = loop {
        let v = rng.gen_range(lo..hi);
        if v > lo && v < hi {
            break v;
        }
    };
    Some((time, dim, location))
}

fn check_horizon(lambda_max: f64) -> Result<()> {
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(Error::param(format!(
            "lambda_max must be finite and non-negative, got {lambda_max}"
        )));
    }
    Ok(())
}

/// Mondrian process on `root_box` run to lifetime `lambda_max`.
pub fn build_mondrian<R: Rng + ?Sized>(root_box: AxisBox, lambda_max: f64, rng: &mut R) -> Result<MondrianTree> {
    check_horizon(lambda_max)?;
    let mut nodes = vec![Node {
        extent: root_box.clone(),
        birth_time: 0.0,
        split: None,
    }];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        let birth = nodes[id].birth_time;
        let Some((time, dim, location)) = sample_cut(&nodes[id].extent, birth, lambda_max, rng) else {
            continue;
        };
        let (l, r) = nodes[id].extent.split(dim, location);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node {
            extent: l,
            birth_time: time,
            split: None,
        });
        nodes.push(Node {
            extent: r,
            birth_time: time,
            split: None,
        });
        nodes[id].split = Some(Split {
            dim,
            location,
            time,
            left,
            right,
        });
        stack.push(right);
        stack.push(left);
    }
    Ok(MondrianTree {
        root_box,
        lambda_max,
        nodes,
    })
}

/// Mondrian process restricted to a finite point set (see module docs).
pub fn build_mondrian_on_points<P, R>(points: &[P], lambda_max: f64, rng: &mut R) -> Result<MondrianTree>
where
    P: AsRef<[f64]>,
    R: Rng + ?Sized,
{
    check_horizon(lambda_max)?;
    let root_box = bounding_box(points)?;
    let mut nodes = vec![Node {
        extent: root_box.clone(),
        birth_time: 0.0,
        split: None,
    }];
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, (0..points.len()).collect())];
    while let Some((id, members)) = stack.pop() {
        let birth = nodes[id].birth_time;
        let Some((time, dim, location)) = sample_cut(&nodes[id].extent, birth, lambda_max, rng) else {
            continue;
        };
        let (lm, rm): (Vec<usize>, Vec<usize>) =
            members.into_iter().partition(|&i| points[i].as_ref()[dim] <= location);
        let lbox = bounding_box(&lm.iter().map(|&i| points[i].as_ref()).collect::<Vec<_>>())?;
        let rbox = bounding_box(&rm.iter().map(|&i| points[i].as_ref()).collect::<Vec<_>>())?;
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node {
            extent: lbox,
            birth_time: time,
            split: None,
        });
        nodes.push(Node {
            extent: rbox,
            birth_time: time,
            split: None,
        });
        nodes[id].split = Some(Split {
            dim,
            location,
            time,
            left,
            right,
        });
        stack.push((right, rm));
        stack.push((left, lm));
    }
    Ok(MondrianTree {
        root_box,
        lambda_max,
        nodes,
    })
}

impl MondrianTree {
    pub fn root_box(&self) -> &AxisBox {
        &self.root_box
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.root_box.dim()
    }

    fn check_lifetime(&self, lifetime: f64) -> Result<()> {
        if !(0.0..=self.lambda_max).contains(&lifetime) {
            return Err(Error::param(format!(
                "lifetime {lifetime} outside [0, {}]",
                self.lambda_max
            )));
        }
        Ok(())
    }

    /// Node holding `point` once splits later than `lifetime` are ignored.
    ///
    /// Points on a cut go left. No domain check; see [`Self::cell_index`].
    pub fn locate(&self, point: &[f64], lifetime: f64) -> usize {
        let mut id = 0;
        while let Some(s) = self.nodes[id].split {
            if s.time > lifetime {
                break;
            }
            id = if point[s.dim] <= s.location { s.left } else { s.right };
        }
        id
    }

    /// Truncation of the tree at `lifetime`.
    pub fn slice(&self, lifetime: f64) -> Result<TreeSlice> {
        self.check_lifetime(lifetime)?;
        let mut leaf_of_node = vec![NOT_A_LEAF; self.nodes.len()];
        let mut next = 0u32;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id].split {
                Some(s) if s.time <= lifetime => {
                    stack.push(s.right);
                    stack.push(s.left);
                }
                _ => {
                    leaf_of_node[id] = next;
                    next += 1;
                }
            }
        }
        Ok(TreeSlice {
            lifetime,
            leaf_of_node,
            n_cells: next as usize,
        })
    }

    /// Depth-first leaf index of the cell containing `point` at `lifetime`.
    pub fn cell_index(&self, point: &[f64], lifetime: f64) -> Result<usize> {
        let slice = self.slice(lifetime)?;
        slice.cell_of(self, point)
    }

    /// Sorted split times; one per internal node.
    pub fn cut_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.nodes.iter().filter_map(|n| n.split.map(|s| s.time)).collect();
        t.sort_by(f64::total_cmp);
        t
    }

    pub fn n_cells(&self, lifetime: f64) -> usize {
        1 + self
            .nodes
            .iter()
            .filter(|n| n.split.is_some_and(|s| s.time <= lifetime))
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl TreeSlice {
    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Leaf index of a node that is a leaf of this slice.
    pub fn leaf_index(&self, node: usize) -> Option<usize> {
        match self.leaf_of_node.get(node) {
            Some(&i) if i != NOT_A_LEAF => Some(i as usize),
            _ => None,
        }
    }

    /// Leaf node ids in leaf-index order.
    pub fn leaf_nodes(&self) -> Vec<usize> {
        let mut nodes = vec![0; self.n_cells];
        for (node, &leaf) in self.leaf_of_node.iter().enumerate() {
            if leaf != NOT_A_LEAF {
                nodes[leaf as usize] = node;
            }
        }
        nodes
    }

    pub fn cell_of(&self, tree: &MondrianTree, point: &[f64]) -> Result<usize> {
        if !tree.root_box.contains(point) {
            return Err(Error::OutOfDomain { rows: vec![0] });
        }
        let node = tree.locate(point, self.lifetime);
        Ok(self.leaf_of_node[node] as usize)
    }
}
