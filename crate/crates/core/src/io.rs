//! File formats: PGM images, a subset of Wavefront OBJ, CSV tables and PPM
//! renders of per-vertex mesh values.

use crate::curvature::VertexCurvature;
use crate::diffusion::MassRecord;
use crate::grid::{Boundary, GridError, GridField};
use crate::mesh::{MeshError, TriMesh, Vec3};
use crate::stencils::Stencil3;
use crate::veronese::PolyBasis;
use crate::weights::DirectionSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("PGM: {0}")]
    Pgm(String),
    #[error("OBJ line {line}: {msg}")]
    Obj { line: usize, msg: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A grayscale image mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub field: GridField,
    pub maxval: u16,
}

struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_uint(&mut self, what: &str) -> Result<u32, IoError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::Pgm(format!("expected {what} at byte {start}")))
    }
}

/// Reads P2 (ASCII) or P5 (binary, 8 or 16 bit big-endian) data. The grid
/// spacing is 1 and the boundary policy `MirrorNeumann`.
pub fn read_pgm(data: &[u8]) -> Result<PgmImage, IoError> {
    if data.len() < 2 || data[0] != b'P' || !(data[1] == b'2' || data[1] == b'5') {
        return Err(IoError::Pgm("missing P2/P5 magic number".into()));
    }
    let binary = data[1] == b'5';
    let mut t = Tokens { data, pos: 2 };
    let width = t.next_uint("width")? as usize;
    let height = t.next_uint("height")? as usize;
    let maxval = t.next_uint("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(IoError::Pgm(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width * height;
    let mut raw = Vec::with_capacity(count);
    if binary {
        if t.pos >= data.len() || !data[t.pos].is_ascii_whitespace() {
            return Err(IoError::Pgm("missing whitespace before raster".into()));
        }
        let body = &data[t.pos + 1..];
        let bytes = if maxval < 256 { 1 } else { 2 };
        if body.len() < count * bytes {
            return Err(IoError::Pgm(format!("raster has {} bytes, need {}", body.len(), count * bytes)));
        }
        for k in 0..count {
            raw.push(if bytes == 1 {
                body[k] as u32
            } else {
                u16::from_be_bytes([body[2 * k], body[2 * k + 1]]) as u32
            });
        }
    } else {
        for _ in 0..count {
            raw.push(t.next_uint("sample")?);
        }
    }
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(IoError::Pgm(format!("sample {v} exceeds maxval {maxval}")));
    }
    let values = raw.iter().map(|&v| v as f64 / maxval as f64).collect();
    let field = GridField::new(width, height, 1.0, values, Boundary::MirrorNeumann)?;
    Ok(PgmImage { field, maxval: maxval as u16 })
}

/// Writes the field, clamped to `[0, 1]`, at the given depth.
pub fn write_pgm(field: &GridField, maxval: u16, binary: bool) -> Vec<u8> {
    let maxval = maxval.max(1);
    let q: Vec<u16> = field
        .values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * maxval as f64).round() as u16)
        .collect();
    let mut out = format!(
        "{}\n{} {}\n{}\n",
        if binary { "P5" } else { "P2" },
        field.width,
        field.height,
        maxval
    )
    .into_bytes();
    if binary {
        for v in q {
            if maxval < 256 {
                out.push(v as u8);
            } else {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
    } else {
        for row in q.chunks(field.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    out
}

fn parse_index(tok: &str, count: usize, line: usize, what: &str) -> Result<usize, IoError> {
    let err = |msg: String| IoError::Obj { line, msg };
    let i: i64 = tok.parse().map_err(|_| err(format!("bad {what} index '{tok}'")))?;
    let resolved = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        return Err(err(format!("{what} index 0 is invalid")));
    };
    if resolved < 0 || resolved as usize >= count {
        return Err(err(format!("{what} index {i} out of range ({count} defined)")));
    }
    Ok(resolved as usize)
}

/// Reads `v`, `vn` and `f` records (plus comments and blank lines); anything
/// else is rejected. Face corners are `i` or `i//n`; polygons are
/// fan-triangulated. When every vertex receives a normal through the faces,
/// those normals are used, otherwise normals are computed.
pub fn read_obj(text: &str) -> Result<TriMesh, IoError> {
    let mut verts: Vec<Vec3> = Vec::new();
    let mut vns: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut corner_normals: Vec<(usize, usize)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let tag = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        let floats = |n: usize| -> Result<Vec3, IoError> {
            if rest.len() != n && !(tag == "v" && rest.len() == 4) {
                return Err(IoError::Obj { line, msg: format!("'{tag}' needs {n} numbers") });
            }
            let mut v = [0.0f64; 3];
            for (slot, s) in v.iter_mut().zip(&rest) {
                *slot = s.parse().map_err(|_| IoError::Obj { line, msg: format!("bad number '{s}'") })?;
                if !slot.is_finite() {
                    return Err(IoError::Obj { line, msg: format!("non-finite number '{s}'") });
                }
            }
            Ok(v)
        };
        match tag {
            "v" => verts.push(floats(3)?),
            "vn" => vns.push(floats(3)?),
            "f" => {
                if rest.len() < 3 {
                    return Err(IoError::Obj { line, msg: "face needs at least 3 corners".into() });
                }
                let mut idx = Vec::with_capacity(rest.len());
                for c in &rest {
                    let (vi, ni) = match c.split_once("//") {
                        Some((a, b)) => (a, Some(b)),
                        None if c.contains('/') => {
                            return Err(IoError::Obj {
                                line,
                                msg: format!("texture coordinates are not supported ('{c}')"),
                            })
                        }
                        None => (*c, None),
                    };
                    let v = parse_index(vi, verts.len(), line, "vertex")?;
                    if let Some(ni) = ni {
                        corner_normals.push((v, parse_index(ni, vns.len(), line, "normal")?));
                    }
                    idx.push(v);
                }
                for j in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[j], idx[j + 1]]);
                }
            }
            other => {
                return Err(IoError::Obj { line, msg: format!("unsupported record '{other}'") });
            }
        }
    }
    let mut normals: Vec<Option<Vec3>> = vec![None; verts.len()];
    for (v, n) in corner_normals {
        normals[v].get_or_insert(vns[n]);
    }
    let mesh = if !verts.is_empty() && normals.iter().all(Option::is_some) {
        TriMesh::with_normals(verts, faces, normals.into_iter().flatten().collect())?
    } else {
        TriMesh::new(verts, faces)?
    };
    Ok(mesh)
}

/// Writes vertices, normals (when all are known) and faces.
pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
    }
    let with_normals = mesh.normals.iter().all(Option::is_some);
    if with_normals {
        for n in mesh.normals.iter().flatten() {
            let _ = writeln!(out, "vn {} {} {}", n[0], n[1], n[2]);
        }
    }
    for t in &mesh.triangles {
        if with_normals {
            let _ = writeln!(out, "f {0}//{0} {1}//{1} {2}//{2}", t[0] + 1, t[1] + 1, t[2] + 1);
        } else {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    out
}

/// `# key=value` lines.
pub fn header(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

/// Direction components then weight (empty when absent).
pub fn direction_set_csv(set: &DirectionSet) -> String {
    let mut out = String::new();
    let cols: Vec<String> = (0..set.ambient_dim).map(|i| format!("x{i}")).collect();
    let _ = writeln!(out, "{},weight", cols.join(","));
    for (k, d) in set.dirs.iter().enumerate() {
        let comps: Vec<String> = d.iter().map(|x| format!("{x:.17e}")).collect();
        let w = set.weights.as_ref().map(|w| format!("{:.17e}", w[k])).unwrap_or_default();
        let _ = writeln!(out, "{},{w}", comps.join(","));
    }
    out
}

/// The three kernel rows (prefactor folded in), with the spacing and
/// prefactor in a comment line.
pub fn stencil_csv(stencil: &Stencil3) -> String {
    let mut out = format!("# h={} scale={:.17e}\n", stencil.h, stencil.scale);
    for row in stencil.kernel() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:.17e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// One row per term: element index, exponent tuple, integer coefficient.
pub fn basis_csv(basis: &PolyBasis) -> String {
    let cols: Vec<String> = (0..basis.ambient_dim).map(|i| format!("a{i}")).collect();
    let mut out = format!("element,{},coefficient\n", cols.join(","));
    for (k, e) in basis.elements.iter().enumerate() {
        for (m, c) in &e.terms {
            let exps: Vec<String> = m.exponents.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{k},{},{c}", exps.join(","));
        }
    }
    out
}

pub fn curvature_csv(per: &[VertexCurvature]) -> String {
    let mut out = String::from("vertex,H,R,valid\n");
    for (i, c) in per.iter().enumerate() {
        let _ = writeln!(out, "{i},{:.17e},{:.17e},{}", c.h, c.r, c.valid as u8);
    }
    out
}

pub fn mass_log_csv(log: &[MassRecord]) -> String {
    let mut out = String::from("step,mass,min,max\n");
    for r in log {
        let _ = writeln!(out, "{},{:.17e},{:.17e},{:.17e}", r.step, r.mass, r.min, r.max);
    }
    out
}

/// Value at percentile `p` (0–100) of the finite entries, by nearest rank.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let idx = ((p / 100.0) * (v.len() - 1) as f64).round() as usize;
    Some(v[idx.min(v.len() - 1)])
}

/// Linear blue–white–red ramp on `t ∈ [0, 1]`.
fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (s, s, 1.0)
    } else {
        let s = (t - 0.5) / 0.5;
        (1.0, 1.0 - s, 1.0 - s)
    };
    [(r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8]
}

/// Orthographic view down the −z axis of the mesh, shaded by the per-vertex
/// `values` mapped linearly over their 2–98 percentile range. Vertices with
/// non-finite values paint gray; the background is black. Binary PPM.
pub fn render_mesh_ppm(mesh: &TriMesh, values: &[f64], size: usize) -> Vec<u8> {
    let size = size.max(2);
    let lo = percentile(values, 2.0).unwrap_or(0.0);
    let hi = percentile(values, 98.0).unwrap_or(1.0);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in &mesh.vertices {
        xmin = xmin.min(v[0]);
        xmax = xmax.max(v[0]);
        ymin = ymin.min(v[1]);
        ymax = ymax.max(v[1]);
    }
    let extent = (xmax - xmin).max(ymax - ymin).max(f64::MIN_POSITIVE);
    let to_px = |v: Vec3| -> (f64, f64) {
        (
            (v[0] - xmin) / extent * (size - 1) as f64,
            (ymax - v[1]) / extent * (size - 1) as f64,
        )
    };
    let mut depth = vec![f64::NEG_INFINITY; size * size];
    let mut img = vec![[0u8; 3]; size * size];
    for t in &mesh.triangles {
        let p: Vec<(f64, f64)> = t.iter().map(|&i| to_px(mesh.vertices[i])).collect();
        let z: Vec<f64> = t.iter().map(|&i| mesh.vertices[i][2]).collect();
        let val: Vec<f64> = t.iter().map(|&i| values.get(i).copied().unwrap_or(f64::NAN)).collect();
        let area = (p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1);
        if area.abs() < 1e-12 {
            continue;
        }
        let x0 = p.iter().map(|q| q.0).fold(f64::MAX, f64::min).floor().max(0.0) as usize;
        let x1 = (p.iter().map(|q| q.0).fold(f64::MIN, f64::max).ceil() as usize).min(size - 1);
        let y0 = p.iter().map(|q| q.1).fold(f64::MAX, f64::min).floor().max(0.0) as usize;
        let y1 = (p.iter().map(|q| q.1).fold(f64::MIN, f64::max).ceil() as usize).min(size - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let (x, y) = (px as f64, py as f64);
                let b0 = ((p[1].0 - x) * (p[2].1 - y) - (p[2].0 - x) * (p[1].1 - y)) / area;
                let b1 = ((p[2].0 - x) * (p[0].1 - y) - (p[0].0 - x) * (p[2].1 - y)) / area;
                let b2 = 1.0 - b0 - b1;
                if b0 < -1e-9 || b1 < -1e-9 || b2 < -1e-9 {
                    continue;
                }
                let zz = b0 * z[0] + b1 * z[1] + b2 * z[2];
                let k = py * size + px;
                if zz <= depth[k] {
                    continue;
                }
                depth[k] = zz;
                let v = b0 * val[0] + b1 * val[1] + b2 * val[2];
                img[k] = if v.is_finite() { ramp((v - lo) / span) } else { [128, 128, 128] };
            }
        }
    }
    let mut out = format!("P6\n{size} {size}\n255\n").into_bytes();
    for px in img {
        out.extend_from_slice(&px);
    }
    out
}
