//! Plain-text mesh format.
//!
//! ```text
//! Nv Nt Nb
//! x y            (Nv lines)
//! i j k          (Nt lines, 0-based, counter-clockwise)
//! i j D|N        (Nb lines)
//! ```
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{key, BoundaryLabel, Mesh};
use crate::{Error, Result};

pub fn write_mesh(mesh: &Mesh) -> String {
    let nb = mesh.edges().iter().filter(|e| e.boundary.is_some()).count();
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.num_vertices(), mesh.num_triangles(), nb);
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.17e} {:.17e}", p[0], p[1]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in mesh.edges() {
        if let Some(l) = e.boundary {
            let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], l.code());
        }
    }
    s
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.ok_or_else(|| Error::MeshFormat(format!("line {line}: missing field")))?
        .parse()
        .map_err(|_| Error::MeshFormat(format!("line {line}: bad number")))
}

/// Parses the text format. Triangle order and orientation are kept as given;
/// clockwise triangles are rejected.
pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines.next().ok_or_else(|| Error::MeshFormat("empty file".into()))?;
    let mut h = header.split_whitespace();
    let nv: usize = parse(h.next(), ln)?;
    let nt: usize = parse(h.next(), ln)?;
    let nb: usize = parse(h.next(), ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| Error::MeshFormat("truncated vertex block".into()))?;
        let mut f = l.split_whitespace();
        vertices.push([parse(f.next(), ln)?, parse(f.next(), ln)?]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines.next().ok_or_else(|| Error::MeshFormat("truncated triangle block".into()))?;
        let mut f = l.split_whitespace();
        triangles.push([parse(f.next(), ln)?, parse(f.next(), ln)?, parse(f.next(), ln)?]);
    }
    let mut labels = HashMap::new();
    for _ in 0..nb {
        let (ln, l) = lines.next().ok_or_else(|| Error::MeshFormat("truncated boundary block".into()))?;
        let mut f = l.split_whitespace();
        let a: usize = parse(f.next(), ln)?;
        let b: usize = parse(f.next(), ln)?;
        let label = match f.next() {
            Some("D") => BoundaryLabel::Dirichlet,
            Some("N") => BoundaryLabel::Neumann,
            _ => return Err(Error::MeshFormat(format!("line {ln}: label must be D or N"))),
        };
        labels.insert(key(a, b), label);
    }
    let mesh = Mesh::new(vertices, triangles, &labels, 1)?;
    for (&(a, b), _) in &labels {
        match mesh.find_edge(a, b) {
            Some(e) if mesh.edges()[e].boundary.is_some() => {}
            _ => return Err(Error::MeshFormat(format!("({a}, {b}) is not a boundary edge"))),
        }
    }
    Ok(mesh)
}

impl Mesh {
    pub fn load(path: &Path) -> Result<Mesh> {
        read_mesh(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, write_mesh(self))?;
        Ok(())
    }
}
