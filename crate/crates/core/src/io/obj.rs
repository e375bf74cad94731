use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::{Frame, TriangleMesh, Vec3};
use crate::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn resolve_index(token: &str, line: usize, count: usize) -> Result<u32> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| parse_err(line, format!("bad face index `{token}`")))?;
    let resolved = match raw {
        0 => return Err(Error::IndexOutOfRange { line, index: 0, count }),
        r if r > 0 => r - 1,
        r => count as i64 + r,
    };
    if resolved < 0 || resolved >= count as i64 {
        return Err(Error::IndexOutOfRange { line, index: raw, count });
    }
    Ok(resolved as u32)
}

/// Parses `v` and `f` records; polygons become triangle fans around their
/// first vertex. Everything else is ignored.
pub fn parse_obj(text: &str, frame: Frame) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("bad coordinate `{t}`"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                if !coords.iter().all(|c| c.is_finite()) {
                    return Err(parse_err(line, "non-finite coordinate"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<u32> =
                    tokens.map(|t| resolve_index(t, line, vertices.len())).collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(line, "face needs at least three vertices"));
                }
                for i in 1..idx.len() - 1 {
                    let f = [idx[0], idx[i], idx[i + 1]];
                    if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                        return Err(parse_err(line, "face repeats a vertex"));
                    }
                    faces.push(f);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces, frame)
}

pub fn load_obj(path: impl AsRef<Path>, frame: Frame) -> Result<TriangleMesh> {
    parse_obj(&std::fs::read_to_string(path)?, frame)
}

/// Shortest decimal that reads back to the same `f64`.
pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::with_capacity(mesh.vertices.len() * 48 + mesh.faces.len() * 24);
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn save_obj(path: impl AsRef<Path>, mesh: &TriangleMesh) -> Result<()> {
    std::fs::write(path, write_obj(mesh))?;
    Ok(())
}
