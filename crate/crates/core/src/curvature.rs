//! Mean curvature `H` and curvedness `R` from one-ring circular means.
//!
//! For a vertex `P` with unit normal `n` and ring vertices `Q_j`:
//!
//! ```text
//! k_j = 2 (Q_j − P)·n / |Q_j − P|²        d_j = (n(Q_j) − n(P)) / |Q_j − P|
//! H   = Σ w_j k_j                          R² = Σ w_j |d_j|²
//! ```
//!
//! with `w_j` the circular weights of the edge directions projected to the
//! tangent plane. With outward normals a convex surface gets negative `H`
//! (the unit sphere gives `H = −1`).

use crate::mesh::{cross, dot, norm, normalize, sub, TriMesh, Vec3};
use crate::weights::circular_weights;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("vertex {0} is out of range")]
    NoSuchVertex(usize),
    #[error("vertex {0} lies on the boundary or has a non-manifold ring")]
    BoundaryVertex(usize),
    #[error("vertex {0} has no normal")]
    NoNormal(usize),
    #[error("vertex {vertex}: projected edge to {neighbor} is degenerate")]
    DegenerateProjection { vertex: usize, neighbor: usize },
    #[error("vertex {0} has fewer than 3 ring neighbors")]
    TooFewNeighbors(usize),
}

/// Per-neighbor data of a one-ring, sorted by `angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSample {
    pub neighbor: usize,
    /// Tangent-plane angle from the first projected edge, in `[0, 2π)`.
    pub angle: f64,
    pub edge_length: f64,
    pub k: f64,
    pub d: Vec3,
}

pub fn ring_frame(mesh: &TriMesh, vertex: usize) -> Result<Vec<RingSample>, CurvatureError> {
    let ring = mesh.one_rings.get(vertex).ok_or(CurvatureError::NoSuchVertex(vertex))?;
    if !ring.closed {
        return Err(CurvatureError::BoundaryVertex(vertex));
    }
    if ring.neighbors.len() < 3 {
        return Err(CurvatureError::TooFewNeighbors(vertex));
    }
    let p = mesh.vertices[vertex];
    let n = mesh.normals[vertex].ok_or(CurvatureError::NoNormal(vertex))?;
    let mut e1: Option<Vec3> = None;
    let mut out = Vec::with_capacity(ring.neighbors.len());
    for &q in &ring.neighbors {
        let nq = mesh.normals[q].ok_or(CurvatureError::NoNormal(q))?;
        let pq = sub(mesh.vertices[q], p);
        let rho = norm(pq);
        let tangent = sub(pq, crate::mesh::scale(n, dot(pq, n)));
        if !(norm(tangent) > 1e-8 * rho) {
            return Err(CurvatureError::DegenerateProjection { vertex, neighbor: q });
        }
        let t = normalize(tangent).expect("checked nonzero");
        let e1 = *e1.get_or_insert(t);
        let e2 = cross(n, e1);
        let angle = dot(t, e2).atan2(dot(t, e1)).rem_euclid(2.0 * PI);
        out.push(RingSample {
            neighbor: q,
            angle,
            edge_length: rho,
            k: 2.0 * dot(pq, n) / (rho * rho),
            d: crate::mesh::scale(sub(nq, n), 1.0 / rho),
        });
    }
    out.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    Ok(out)
}

/// Outcome of the weight construction at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightStatus {
    Circular,
    /// The reduced angles left a gap of at least π/2 (or fewer than three
    /// distinct directions); uniform weights were used.
    UniformFallback,
}

/// Circular weights for ring angles taken as undirected lines (mod π).
/// Coincident lines share one weight equally.
pub fn ring_weights(angles: &[f64]) -> (Vec<f64>, WeightStatus) {
    let n = angles.len();
    let uniform = || (vec![1.0 / n as f64; n], WeightStatus::UniformFallback);
    let mut reduced: Vec<(f64, usize)> = angles
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let r = a.rem_euclid(PI);
            (if PI - r < 1e-12 { 0.0 } else { r }, i)
        })
        .collect();
    reduced.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (a, i) in reduced {
        match groups.last_mut() {
            Some((g, members)) if a - *g < 1e-12 => members.push(i),
            _ => groups.push((a, vec![i])),
        }
    }
    let distinct: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let Ok(set) = circular_weights(&distinct) else {
        return uniform();
    };
    let gw = set.weights.expect("circular weights are set");
    let mut w = vec![0.0; n];
    for ((_, members), g) in groups.iter().zip(gw) {
        for &i in members {
            w[i] = g / members.len() as f64;
        }
    }
    (w, WeightStatus::Circular)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCurvature {
    pub h: f64,
    pub r: f64,
    /// Circular weights applied; `false` for fallback values and for
    /// vertices where nothing could be computed (`h`, `r` are NaN then).
    pub valid: bool,
    pub status: Option<WeightStatus>,
}

impl VertexCurvature {
    fn invalid() -> Self {
        Self { h: f64::NAN, r: f64::NAN, valid: false, status: None }
    }
}

pub fn vertex_curvature(mesh: &TriMesh, vertex: usize) -> Result<VertexCurvature, CurvatureError> {
    let ring = ring_frame(mesh, vertex)?;
    let angles: Vec<f64> = ring.iter().map(|s| s.angle).collect();
    let (w, status) = ring_weights(&angles);
    let h = ring.iter().zip(&w).map(|(s, w)| w * s.k).sum();
    let r2: f64 = ring.iter().zip(&w).map(|(s, w)| w * dot(s.d, s.d)).sum();
    Ok(VertexCurvature {
        h,
        r: r2.sqrt(),
        valid: status == WeightStatus::Circular,
        status: Some(status),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSummary {
    pub vertices: usize,
    pub valid: usize,
    pub fallback: usize,
    pub median_h: f64,
    pub median_r: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Curvature at every vertex, in vertex order.
pub fn mesh_curvature(mesh: &TriMesh) -> (Vec<VertexCurvature>, CurvatureSummary) {
    let per: Vec<VertexCurvature> = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| vertex_curvature(mesh, v).unwrap_or_else(|_| VertexCurvature::invalid()))
        .collect();
    let valid: Vec<&VertexCurvature> = per.iter().filter(|c| c.valid).collect();
    let summary = CurvatureSummary {
        vertices: per.len(),
        valid: valid.len(),
        fallback: per.iter().filter(|c| c.status == Some(WeightStatus::UniformFallback)).count(),
        median_h: median(valid.iter().map(|c| c.h).collect()),
        median_r: median(valid.iter().map(|c| c.r).collect()),
    };
    (per, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cylinder, icosphere, plane_grid, TriMesh};
    use approx::assert_abs_diff_eq;

    fn rotation(ax: f64, ay: f64, az: f64) -> [[f64; 3]; 3] {
        let (sx, cx) = ax.sin_cos();
        let (sy, cy) = ay.sin_cos();
        let (sz, cz) = az.sin_cos();
        let rx = [[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]];
        let ry = [[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]];
        let rz = [[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]];
        let mul = |a: [[f64; 3]; 3], b: [[f64; 3]; 3]| {
            let mut c = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
                }
            }
            c
        };
        mul(rz, mul(ry, rx))
    }

    #[test]
    fn plane_is_flat() {
        let m = plane_grid(6, 0.3);
        let (per, s) = mesh_curvature(&m);
        assert_eq!(s.valid, 16);
        assert_eq!(s.fallback, 0);
        for c in per.iter().filter(|c| c.valid) {
            assert_eq!(c.h, 0.0);
            assert_eq!(c.r, 0.0);
        }
        assert!(!per[0].valid && per[0].h.is_nan());
        assert_eq!(ring_frame(&m, 0), Err(CurvatureError::BoundaryVertex(0)));
    }

    #[test]
    fn sphere_chords_give_minus_one() {
        let m = icosphere(2);
        let ring = ring_frame(&m, 0).unwrap();
        assert_eq!(ring.len(), 5);
        for s in &ring {
            assert_abs_diff_eq!(s.k, -1.0, epsilon = 0.02);
        }
        assert!(ring.windows(2).all(|w| w[0].angle <= w[1].angle));
        assert!(ring[0].angle < 1e-12);
    }

    #[test]
    fn icosphere_curvature() {
        let m = icosphere(4);
        let (per, s) = mesh_curvature(&m);
        assert_eq!(s.valid, m.vertex_count());
        assert_abs_diff_eq!(s.median_h, -1.0, epsilon = 0.05);
        assert_abs_diff_eq!(s.median_r, 1.0, epsilon = 0.05);
        // Estimated normals: the normal-difference quotient amplifies the
        // O(h²) normal error by 1/h, so R may dip slightly below |H|.
        for c in &per {
            assert!(c.h.abs() - c.r < 0.03);
        }
        let exact = TriMesh::with_normals(m.vertices.clone(), m.triangles.clone(), m.vertices.clone()).unwrap();
        let (per, _) = mesh_curvature(&exact);
        for c in &per {
            assert!(c.r >= c.h.abs() - 1e-9);
            assert_abs_diff_eq!(c.h, -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cylinder_curvature() {
        let m = cylinder(1.0, 96, 20, 0.06);
        let (per, _) = mesh_curvature(&m);
        let mid: Vec<&VertexCurvature> = per[96 * 8..96 * 12].iter().collect();
        for c in mid {
            assert!(c.valid);
            assert_abs_diff_eq!(c.h, -0.5, epsilon = 0.08);
            assert_abs_diff_eq!(c.r, 0.5f64.sqrt(), epsilon = 0.08);
        }
    }

    #[test]
    fn rigid_motion_and_scaling() {
        let m = icosphere(2);
        let (base, _) = mesh_curvature(&m);
        let moved = m.transformed(rotation(0.3, -1.1, 2.0), 1.0, [0.4, -2.0, 7.5]);
        let (rot, _) = mesh_curvature(&moved);
        let scaled = m.transformed(rotation(0.0, 0.0, 0.0), 2.5, [0.0; 3]);
        let (sc, _) = mesh_curvature(&scaled);
        for ((a, b), c) in base.iter().zip(&rot).zip(&sc) {
            assert!((a.h - b.h).abs() <= 1e-9 * a.h.abs());
            assert!((a.r - b.r).abs() <= 1e-9 * a.r.abs());
            assert!((a.h / 2.5 - c.h).abs() <= 1e-9 * a.h.abs());
            assert!((a.r / 2.5 - c.r).abs() <= 1e-9 * a.r.abs());
        }
    }

    #[test]
    fn exact_normal_cylinder_satisfies_r_ge_h() {
        let m = cylinder(1.0, 40, 10, 0.2);
        let normals = m.vertices.iter().map(|v| [v[0], v[1], 0.0]).collect();
        let m = TriMesh::with_normals(m.vertices.clone(), m.triangles.clone(), normals).unwrap();
        let (per, _) = mesh_curvature(&m);
        for c in per.iter().filter(|c| c.valid) {
            assert!(c.r >= c.h.abs() - 1e-9);
        }
    }

    #[test]
    fn ring_weights_cases() {
        // Regular hexagon: lines repeat every π/3 and merge pairwise.
        let hex: Vec<f64> = (0..6).map(|k| k as f64 * PI / 3.0).collect();
        let (w, st) = ring_weights(&hex);
        assert_eq!(st, WeightStatus::Circular);
        for x in w {
            assert_abs_diff_eq!(x, 1.0 / 6.0, epsilon = 1e-12);
        }
        let (w, st) = ring_weights(&[0.0, 0.2, 0.4, PI]);
        assert_eq!(st, WeightStatus::UniformFallback);
        assert_eq!(w, vec![0.25; 4]);
        let angles = [0.0, 0.9, 1.7, 2.2, 3.5, 4.4, 5.6];
        let (w, st) = ring_weights(&angles);
        assert_eq!(st, WeightStatus::Circular);
        let (re, im) = angles.iter().zip(&w).fold((0.0, 0.0), |(re, im), (a, w)| {
            (re + w * (2.0 * a).cos(), im + w * (2.0 * a).sin())
        });
        assert!(re.hypot(im) < 1e-10);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn icosphere_refinement_converges() {
        let errs: Vec<f64> = (2..5)
            .map(|s| {
                let (per, _) = mesh_curvature(&icosphere(s));
                median(per.iter().map(|c| (c.h + 1.0).abs()).collect())
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }
}
