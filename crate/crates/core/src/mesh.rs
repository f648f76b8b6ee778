//! Indexed triangle meshes with vertex normals and ordered one-rings.

use std::collections::HashMap;
use thiserror::Error;

pub type Vec3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {face} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: usize, count: usize },
    #[error("triangle {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("got {got} normals for {expected} vertices")]
    NormalCount { expected: usize, got: usize },
    #[error("supplied normal {index} has length {norm}")]
    BadNormal { index: usize, norm: f64 },
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Neighbors of a vertex in link order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OneRing {
    pub neighbors: Vec<usize>,
    /// The neighbors form a closed cycle (interior manifold vertex).
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// Unit normals; `None` for vertices without a non-degenerate face.
    pub normals: Vec<Option<Vec3>>,
    pub one_rings: Vec<OneRing>,
}

impl TriMesh {
    /// Builds the mesh, computing angle-weighted normals.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        validate(&vertices, &triangles)?;
        let normals = vertex_normals(&vertices, &triangles);
        let one_rings = one_rings(vertices.len(), &triangles);
        Ok(Self { vertices, triangles, normals, one_rings })
    }

    /// Builds the mesh with supplied normals (normalized on input).
    pub fn with_normals(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        normals: Vec<Vec3>,
    ) -> Result<Self, MeshError> {
        validate(&vertices, &triangles)?;
        if normals.len() != vertices.len() {
            return Err(MeshError::NormalCount { expected: vertices.len(), got: normals.len() });
        }
        let normals = normals
            .into_iter()
            .enumerate()
            .map(|(index, n)| {
                normalize(n).map(Some).ok_or(MeshError::BadNormal { index, norm: norm(n) })
            })
            .collect::<Result<_, _>>()?;
        let one_rings = one_rings(vertices.len(), &triangles);
        Ok(Self { vertices, triangles, normals, one_rings })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Mean length over undirected edges.
    pub fn mean_edge_length(&self) -> f64 {
        let mut seen = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                seen.entry(key).or_insert_with(|| norm(sub(self.vertices[a], self.vertices[b])));
            }
        }
        seen.values().sum::<f64>() / seen.len().max(1) as f64
    }

    /// Applies `p ↦ s·R p + t` to vertices and `n ↦ R n` to normals.
    pub fn transformed(&self, rotation: [[f64; 3]; 3], s: f64, t: Vec3) -> Self {
        let rot = |v: Vec3| -> Vec3 {
            [dot(rotation[0], v), dot(rotation[1], v), dot(rotation[2], v)]
        };
        Self {
            vertices: self.vertices.iter().map(|&v| add(scale(rot(v), s), t)).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.iter().map(|n| n.map(rot)).collect(),
            one_rings: self.one_rings.clone(),
        }
    }
}

fn validate(vertices: &[Vec3], triangles: &[[usize; 3]]) -> Result<(), MeshError> {
    for (face, t) in triangles.iter().enumerate() {
        for &index in t {
            if index >= vertices.len() {
                return Err(MeshError::IndexOutOfRange { face, index, count: vertices.len() });
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(MeshError::RepeatedVertex(face));
        }
    }
    Ok(())
}

fn angle_between(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Angle-weighted mean of incident face normals; zero-area faces are skipped.
pub fn vertex_normals(vertices: &[Vec3], triangles: &[[usize; 3]]) -> Vec<Option<Vec3>> {
    let mut acc = vec![[0.0; 3]; vertices.len()];
    for t in triangles {
        let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
        let Some(n) = normalize(cross(sub(p[1], p[0]), sub(p[2], p[0]))) else {
            continue;
        };
        for k in 0..3 {
            let e1 = sub(p[(k + 1) % 3], p[k]);
            let e2 = sub(p[(k + 2) % 3], p[k]);
            acc[t[k]] = add(acc[t[k]], scale(n, angle_between(e1, e2)));
        }
    }
    acc.into_iter().map(normalize).collect()
}

/// Orders each vertex's link. Each triangle `(v, a, b)` (rotated so `v`
/// leads) contributes the directed link edge `a → b`.
pub fn one_rings(vertex_count: usize, triangles: &[[usize; 3]]) -> Vec<OneRing> {
    let mut links: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertex_count];
    for t in triangles {
        for k in 0..3 {
            links[t[k]].push((t[(k + 1) % 3], t[(k + 2) % 3]));
        }
    }
    links.into_iter().map(|edges| order_link(&edges)).collect()
}

fn order_link(edges: &[(usize, usize)]) -> OneRing {
    if edges.is_empty() {
        return OneRing::default();
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut indeg: HashMap<usize, usize> = HashMap::new();
    let mut manifold = true;
    for &(a, b) in edges {
        if next.insert(a, b).is_some() {
            manifold = false;
        }
        *indeg.entry(b).or_default() += 1;
        indeg.entry(a).or_default();
    }
    if indeg.values().any(|&d| d > 1) {
        manifold = false;
    }
    let mut nodes: Vec<usize> = indeg.keys().copied().collect();
    nodes.sort_unstable();
    let start = nodes.iter().copied().find(|v| indeg[v] == 0);
    let first = start.unwrap_or_else(|| edges[0].0);
    let mut neighbors = vec![first];
    let mut cur = first;
    while let Some(&n) = next.get(&cur) {
        if n == first || neighbors.len() > edges.len() {
            break;
        }
        neighbors.push(n);
        cur = n;
    }
    let closed = manifold && start.is_none() && neighbors.len() == nodes.len();
    if neighbors.len() != nodes.len() {
        neighbors = nodes;
    }
    OneRing { neighbors, closed }
}

/// Unit icosphere: the icosahedron with each face split `subdivisions` times
/// into four, vertices projected to the sphere. Faces are outward (CCW).
pub fn icosphere(subdivisions: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&v| normalize(v).expect("nonzero"))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(normalize(scale(add(verts[a], verts[b]), 0.5)).expect("nonzero"));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.extend([[f[0], ab, ca], [f[1], bc, ab], [f[2], ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere is valid")
}

/// Flat `n × n` equilateral-triangle lattice in the plane `z = 0` with edge
/// length `h`; odd rows are shifted by `h/2`.
pub fn plane_grid(n: usize, h: f64) -> TriMesh {
    let dy = h * 3f64.sqrt() / 2.0;
    let mut verts = Vec::with_capacity(n * n);
    for j in 0..n {
        let shift = if j % 2 == 1 { 0.5 * h } else { 0.0 };
        for i in 0..n {
            verts.push([i as f64 * h + shift, j as f64 * dy, 0.0]);
        }
    }
    let mut faces = Vec::new();
    for j in 0..n.saturating_sub(1) {
        for i in 0..n - 1 {
            let v = j * n + i;
            if j % 2 == 0 {
                faces.push([v, v + 1, v + n]);
                faces.push([v + 1, v + n + 1, v + n]);
            } else {
                faces.push([v, v + n + 1, v + n]);
                faces.push([v, v + 1, v + n + 1]);
            }
        }
    }
    TriMesh::new(verts, faces).expect("grid is valid")
}

/// Open cylinder of the given radius around the z axis, `around` vertices
/// per ring and `rings` rings spaced `dz` apart, outward faces. Alternate
/// rings are rotated by half a step.
pub fn cylinder(radius: f64, around: usize, rings: usize, dz: f64) -> TriMesh {
    let step = 2.0 * std::f64::consts::PI / around as f64;
    let mut verts = Vec::with_capacity(around * rings);
    for r in 0..rings {
        let shift = if r % 2 == 1 { 0.5 * step } else { 0.0 };
        for k in 0..around {
            let a = k as f64 * step + shift;
            verts.push([radius * a.cos(), radius * a.sin(), r as f64 * dz]);
        }
    }
    let id = |r: usize, k: usize| r * around + k % around;
    let mut faces = Vec::new();
    for r in 0..rings.saturating_sub(1) {
        for k in 0..around {
            if r % 2 == 0 {
                faces.push([id(r, k), id(r, k + 1), id(r + 1, k)]);
                faces.push([id(r, k + 1), id(r + 1, k + 1), id(r + 1, k)]);
            } else {
                faces.push([id(r, k), id(r + 1, k + 1), id(r + 1, k)]);
                faces.push([id(r, k), id(r, k + 1), id(r + 1, k + 1)]);
            }
        }
    }
    TriMesh::new(verts, faces).expect("cylinder is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_normals() {
        for s in 0..3 {
            let m = icosphere(s);
            let f = 20 * 4usize.pow(s as u32);
            assert_eq!(m.triangles.len(), f);
            assert_eq!(m.vertex_count(), f / 2 + 2);
            for (v, n) in m.vertices.iter().zip(&m.normals) {
                let n = n.unwrap();
                assert!(dot(*v, n) > (2f64.to_radians()).cos());
            }
            assert!(m.one_rings.iter().all(|r| r.closed && (r.neighbors.len() == 5 || r.neighbors.len() == 6)));
        }
    }

    #[test]
    fn icosphere_edge_length_halves() {
        let l3 = icosphere(3).mean_edge_length();
        let l4 = icosphere(4).mean_edge_length();
        assert!(l4 < 0.1 && l3 > 0.1);
        assert!((l3 / l4 - 2.0).abs() < 0.05);
    }

    #[test]
    fn plane_normals_and_boundary() {
        let m = plane_grid(5, 0.5);
        assert!(m.normals.iter().all(|n| n.unwrap() == [0.0, 0.0, 1.0]));
        assert!(m.one_rings[12].closed);
        assert_eq!(m.one_rings[12].neighbors.len(), 6);
        assert!(!m.one_rings[0].closed);
        assert!(!m.one_rings[2].closed);
    }

    #[test]
    fn ring_is_cyclically_ordered() {
        let m = plane_grid(3, 1.0);
        let ring = &m.one_rings[4].neighbors;
        let center = m.vertices[4];
        let angles: Vec<f64> = ring
            .iter()
            .map(|&q| {
                let d = sub(m.vertices[q], center);
                d[1].atan2(d[0])
            })
            .collect();
        let mut turns = 0.0;
        for k in 0..angles.len() {
            let mut d = angles[(k + 1) % angles.len()] - angles[k];
            if d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            assert!(d > 0.0);
            turns += d;
        }
        assert!((turns - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn cylinder_normals_are_radial() {
        let m = cylinder(1.0, 48, 12, 0.1);
        for (v, n) in m.vertices.iter().zip(&m.normals).skip(48).take(48 * 10) {
            let n = n.unwrap();
            assert!(n[2].abs() < 2f64.to_radians().sin());
            assert!(dot([v[0], v[1], 0.0], n) > 2f64.to_radians().cos());
        }
        assert!(m.one_rings[48 * 5].closed);
        assert!(!m.one_rings[0].closed);
    }

    #[test]
    fn validation_and_isolated_vertices() {
        assert!(matches!(
            TriMesh::new(vec![[0.0; 3]; 3], vec![[0, 1, 3]]),
            Err(MeshError::IndexOutOfRange { face: 0, index: 3, count: 3 })
        ));
        assert_eq!(TriMesh::new(vec![[0.0; 3]; 3], vec![[0, 1, 1]]), Err(MeshError::RepeatedVertex(0)));
        let m = TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [5.0, 5.0, 5.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.normals[3], None);
        assert!(m.one_rings[3].neighbors.is_empty());
        assert!(matches!(
            TriMesh::with_normals(vec![[0.0; 3]; 3], vec![[0, 1, 2]], vec![[0.0; 3]; 3]),
            Err(MeshError::BadNormal { index: 0, .. })
        ));
    }
}
