//! Wavefront OBJ import/export.
//!
//! Import keeps `v`, `vt` and `f` records, fan-triangulates polygons and
//! unifies every distinct (position, uv) index pair into one vertex. Normals,
//! groups and material statements are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Vector2, Vector3};

use super::{read_text, PersistError, Result};
use crate::geometry::{degenerate_triangles, Mesh};

/// Parsed OBJ data with unified indices, not yet validated as a [`Mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObjModel {
    pub positions: Vec<Vector3<f64>>,
    pub uvs: Vec<Vector2<f64>>,
    pub triangles: Vec<[u32; 3]>,
    /// `v` records in the file, before unification.
    pub source_positions: usize,
    /// `vt` records in the file, before unification.
    pub source_uvs: usize,
}

impl ObjModel {
    pub fn degenerate_triangles(&self) -> Vec<usize> {
        degenerate_triangles(&self.positions, &self.triangles)
    }

    pub fn into_mesh(self, path: &Path) -> Result<Mesh> {
        Mesh::new(self.positions, self.uvs, self.triangles).map_err(|source| PersistError::Mesh {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn floats<'a>(
    parts: impl Iterator<Item = &'a str>,
    path: &Path,
    line: usize,
) -> Result<Vec<f64>> {
    parts
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| PersistError::ObjSyntax {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid number {p:?}"),
                })
        })
        .collect()
}

fn resolve_index(token: &str, count: usize, kind: &str, path: &Path, line: usize) -> Result<usize> {
    let syntax = |message: String| PersistError::ObjSyntax {
        path: path.to_path_buf(),
        line,
        message,
    };
    let raw: i64 = token
        .parse()
        .map_err(|_| syntax(format!("invalid {kind} index {token:?}")))?;
    let resolved = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        return Err(syntax(format!("{kind} index 0 is not allowed")));
    };
    if resolved < 0 || resolved >= count as i64 {
        return Err(syntax(format!(
            "{kind} index {raw} out of range ({count} defined so far)"
        )));
    }
    Ok(resolved as usize)
}

/// Parses OBJ text. `path` only labels diagnostics.
pub fn parse_obj(text: &str, path: &Path) -> Result<ObjModel> {
    let mut positions = Vec::new();
    let mut tex = Vec::new();
    let mut unified: HashMap<(usize, usize), u32> = HashMap::new();
    let mut out_positions = Vec::new();
    let mut out_uvs = Vec::new();
    let mut triangles = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        let mut parts = line.split_whitespace();
        let Some(keyword) = parts.next() else { continue };
        let syntax = |message: String| PersistError::ObjSyntax {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        match keyword {
            "v" => {
                let v = floats(parts, path, line_no)?;
                if !(3..=4).contains(&v.len()) {
                    return Err(syntax(format!("vertex needs 3 coordinates, got {}", v.len())));
                }
                positions.push(Vector3::new(v[0], v[1], v[2]));
            }
            "vt" => {
                let v = floats(parts, path, line_no)?;
                if !(1..=3).contains(&v.len()) {
                    return Err(syntax(format!("texture coordinate needs 1 to 3 values, got {}", v.len())));
                }
                tex.push(Vector2::new(v[0], v.get(1).copied().unwrap_or(0.0)));
            }
            "f" => {
                let mut corners = Vec::new();
                for token in parts {
                    let mut fields = token.split('/');
                    let p = fields.next().unwrap_or("");
                    let t = fields.next().unwrap_or("");
                    if fields.nth(1).is_some() {
                        return Err(syntax(format!("malformed face vertex {token:?}")));
                    }
                    let pi = resolve_index(p, positions.len(), "position", path, line_no)?;
                    if t.is_empty() {
                        return Err(PersistError::NoUv {
                            path: path.to_path_buf(),
                            line: Some(line_no),
                        });
                    }
                    let ti = resolve_index(t, tex.len(), "texture", path, line_no)?;
                    let next = out_positions.len() as u32;
                    let v = *unified.entry((pi, ti)).or_insert_with(|| {
                        out_positions.push(positions[pi]);
                        out_uvs.push(tex[ti]);
                        next
                    });
                    corners.push(v);
                }
                if corners.len() < 3 {
                    return Err(syntax(format!("face needs at least 3 vertices, got {}", corners.len())));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if tex.is_empty() {
        return Err(PersistError::NoUv {
            path: path.to_path_buf(),
            line: None,
        });
    }
    Ok(ObjModel {
        positions: out_positions,
        uvs: out_uvs,
        triangles,
        source_positions: positions.len(),
        source_uvs: tex.len(),
    })
}

pub fn read_obj(path: &Path) -> Result<ObjModel> {
    parse_obj(&read_text(path)?, path)
}

/// Reads and validates a UV-mapped mesh.
pub fn load_obj(path: &Path) -> Result<Mesh> {
    read_obj(path)?.into_mesh(path)
}

/// OBJ text with one `v`/`vt` pair per mesh vertex. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_obj(mesh: &Mesh, mtl: Option<(&str, &str)>) -> String {
    let mut out = String::new();
    if let Some((lib, material)) = mtl {
        let _ = writeln!(out, "mtllib {lib}");
        let _ = writeln!(out, "usemtl {material}");
    }
    for p in mesh.positions() {
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    for uv in mesh.uvs() {
        let _ = writeln!(out, "vt {} {}", uv.x, uv.y);
    }
    for [a, b, c] in mesh.triangles() {
        let (a, b, c) = (a + 1, b + 1, c + 1);
        let _ = writeln!(out, "f {a}/{a} {b}/{b} {c}/{c}");
    }
    out
}
