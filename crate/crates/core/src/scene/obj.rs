//! Minimal Wavefront OBJ reader: `v` and `f` records only.

use std::path::Path;

use crate::error::{Error, Result};
use crate::Vec3;

/// Smallest triangle area accepted, in world units squared.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i as usize]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Center of the axis-aligned bounding box.
    pub fn bounds_center(&self) -> Vec3 {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo + hi) * 0.5
    }
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}

/// Parse OBJ text. Polygons are fan-triangulated; `path` only labels errors.
pub fn parse_obj(text: &str, path: &Path) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let bad = |msg: String| Error::format(path, format!("line {line_no}: {msg}"));
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .map(|f| f.parse::<f64>().map_err(|_| bad(format!("bad coordinate `{f}`"))))
                    .collect::<Result<_>>()?;
                if !(3..=4).contains(&coords.len()) || coords.iter().any(|c| !c.is_finite()) {
                    return Err(bad("vertex needs three finite coordinates".into()));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<i64> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or("");
                        head.parse::<i64>().map_err(|_| bad(format!("bad face index `{f}`")))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(bad("face needs at least three vertices".into()));
                }
                // Relative indices refer to vertices read so far.
                let resolved = idx
                    .into_iter()
                    .map(|i| match i {
                        0 => Err(bad("face index 0 (OBJ indices are 1-based)".into())),
                        i if i < 0 => Ok(vertices.len() as i64 + i + 1),
                        i => Ok(i),
                    })
                    .collect::<Result<Vec<_>>>()?;
                faces.push((line_no, resolved));
            }
            Some(other) => return Err(bad(format!("unsupported record `{other}`"))),
            None => {}
        }
    }

    let mut triangles = Vec::new();
    for (line_no, face) in faces {
        for &i in &face {
            if i < 1 || i as usize > vertices.len() {
                return Err(Error::format(
                    path,
                    format!(
                        "line {line_no}: face index {i} out of range (1..={})",
                        vertices.len()
                    ),
                ));
            }
        }
        let zero: Vec<u32> = face.iter().map(|&i| (i - 1) as u32).collect();
        for k in 1..zero.len() - 1 {
            triangles.push([zero[0], zero[k], zero[k + 1]]);
        }
    }
    let mesh = TriMesh { vertices, triangles };
    for t in 0..mesh.triangles.len() {
        if !(mesh.triangle_area(t) > MIN_TRIANGLE_AREA) {
            return Err(Error::validation(format!(
                "{}: triangle {t} {:?} is degenerate",
                path.display(),
                mesh.triangles[t]
            )));
        }
    }
    Ok(mesh)
}
