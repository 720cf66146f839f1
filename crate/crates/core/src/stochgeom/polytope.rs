//! Vertices, volume and circumradius of slab intersections in `d = 2, 3`.

use nalgebra::{Matrix3, Vector3};

use super::SlabIntersection;
use crate::error::{Error, Result};

/// Triples whose normal matrix has Frobenius condition number above this
/// are treated as degenerate.
const MAX_CONDITION: f64 = 1e8;
/// Relative slack for feasibility and on-face tests.
const SLACK: f64 = 1e-9;

fn unsupported(d: usize) -> Error {
    Error::Unsupported(format!("polytope geometry is implemented for d = 2, 3, not d = {d}"))
}

/// Half-spaces `<a, x> <= s`, two per slab.
fn half_spaces(cell: &SlabIntersection) -> Vec<(Vec<f64>, f64)> {
    cell.slabs()
        .iter()
        .flat_map(|sl| {
            let neg: Vec<f64> = sl.normal.iter().map(|v| -v).collect();
            [(sl.normal.clone(), sl.half_width), (neg, sl.half_width)]
        })
        .collect()
}

/// Polygon vertices in counter-clockwise order, by clipping a large square
/// (side `10 * sum s`) with every half-plane.
fn polygon(cell: &SlabIntersection) -> Vec<[f64; 2]> {
    let h = 5.0 * cell.slabs().iter().map(|s| s.half_width).sum::<f64>();
    let mut poly = vec![[-h, -h], [h, -h], [h, h], [-h, h]];
    for (a, s) in half_spaces(cell) {
        let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - s;
        let mut out = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (fp, fq) = (side(&p), side(&q));
            if fp <= 0.0 {
                out.push(p);
            }
            if (fp <= 0.0) != (fq <= 0.0) {
                let t = fp / (fp - fq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        poly = out;
    }
    poly
}

/// Half-space `a . x <= s`.
type Plane = (Vector3<f64>, f64);

/// Half-spaces and vertices of a 3-d cell, by enumerating plane triples.
fn polytope3(cell: &SlabIntersection) -> (Vec<Plane>, Vec<Vector3<f64>>) {
    let planes: Vec<Plane> = half_spaces(cell)
        .into_iter()
        .map(|(a, s)| (Vector3::new(a[0], a[1], a[2]), s))
        .collect();
    let feasible = |v: &Vector3<f64>| planes.iter().all(|(a, s)| a.dot(v) <= s + SLACK * (1.0 + s));
    let mut verts: Vec<Vector3<f64>> = Vec::new();
    let n = planes.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = Matrix3::from_rows(&[
                    planes[i].0.transpose(),
                    planes[j].0.transpose(),
                    planes[k].0.transpose(),
                ]);
                let Some(inv) = m.try_inverse() else { continue };
                if m.norm() * inv.norm() >= MAX_CONDITION {
                    continue;
                }
                let v = inv * Vector3::new(planes[i].1, planes[j].1, planes[k].1);
                if !feasible(&v) {
                    continue;
                }
                let scale = 1.0 + v.norm();
                if verts.iter().all(|u| (u - v).norm() > SLACK * scale) {
                    verts.push(v);
                }
            }
        }
    }
    (planes, verts)
}

/// Vertices of the cell (`d = 2`: counter-clockwise; `d = 3`: unordered).
pub fn vertices(cell: &SlabIntersection) -> Result<Vec<Vec<f64>>> {
    match cell.dim() {
        2 => Ok(polygon(cell).into_iter().map(|p| p.to_vec()).collect()),
        3 => Ok(polytope3(cell).1.into_iter().map(|v| v.as_slice().to_vec()).collect()),
        d => Err(unsupported(d)),
    }
}

/// Largest vertex norm; the norm is convex, so its maximum over the cell is
/// attained at a vertex.
pub fn circumradius(cell: &SlabIntersection) -> Result<f64> {
    Ok(vertices(cell)?
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}

/// Lebesgue measure of the cell.
///
/// `d = 2`: shoelace formula. `d = 3`: sum over faces of
/// `distance * area / 3`, the fan of pyramids with apex at the origin.
pub fn volume(cell: &SlabIntersection) -> Result<f64> {
    match cell.dim() {
        2 => {
            let p = polygon(cell);
            let twice: f64 = (0..p.len())
                .map(|i| {
                    let (a, b) = (p[i], p[(i + 1) % p.len()]);
                    a[0] * b[1] - a[1] * b[0]
                })
                .sum();
            Ok(twice.abs() / 2.0)
        }
        3 => {
            let (planes, verts) = polytope3(cell);
            let mut vol = 0.0;
            for (a, s) in &planes {
                let face: Vec<Vector3<f64>> = verts
                    .iter()
                    .copied()
                    .filter(|v| (a.dot(v) - s).abs() <= SLACK * (1.0 + s))
                    .collect();
                vol += s * face_area(a, &face) / 3.0;
            }
            Ok(vol)
        }
        d => Err(unsupported(d)),
    }
}

/// Area of a convex planar polygon with unit normal `a`, vertices unordered.
fn face_area(a: &Vector3<f64>, face: &[Vector3<f64>]) -> f64 {
    if face.len() < 3 {
        return 0.0;
    }
    let c = face.iter().sum::<Vector3<f64>>() / face.len() as f64;
    let u = (face[0] - c).normalize();
    let w = a.cross(&u);
    let mut ordered: Vec<(f64, Vector3<f64>)> = face
        .iter()
        .map(|v| {
            let r = v - c;
            (r.dot(&w).atan2(r.dot(&u)), r)
        })
        .collect();
    ordered.sort_by(|x, y| x.0.total_cmp(&y.0));
    let k = ordered.len();
    (0..k)
        .map(|i| a.dot(&ordered[i].1.cross(&ordered[(i + 1) % k].1)))
        .sum::<f64>()
        .abs()
        / 2.0
}
