use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{key, BoundaryLabel, Mesh, Point};
use crate::{Error, Result};

/// The six benchmark domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Unit square, Dirichlet everywhere.
    Square,
    /// Unit square, Neumann on `x1 = 1`.
    SquareNeumann,
    /// Equilateral triangle with unit sides, Dirichlet everywhere.
    Triangle,
    /// `(-1,1)² \ [0,1]×[-1,0]`.
    LShape,
    /// Two vertical legs joined by a horizontal bar.
    HShape,
    /// `[-1,1]² \ (-0.5,0.5)²`, Neumann on `x1 = -1`.
    Hollow,
}

impl Domain {
    pub const ALL: [Domain; 6] =
        [Domain::Square, Domain::SquareNeumann, Domain::Triangle, Domain::LShape, Domain::HShape, Domain::Hollow];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::SquareNeumann => "square-neumann",
            Domain::Triangle => "triangle",
            Domain::LShape => "lshape",
            Domain::HShape => "hshape",
            Domain::Hollow => "hollow",
        }
    }

    /// Level-one triangulation.
    pub fn build(self) -> Mesh {
        let m = match self {
            Domain::Square => cells_mesh(&grid(0.0, 0.0, 1, 1, 1.0), |_, _| false),
            Domain::SquareNeumann => cells_mesh(&grid(0.0, 0.0, 1, 1, 1.0), |a, b| on_line(a, b, 0, 1.0)),
            Domain::LShape => {
                let mut c = grid(-1.0, 0.0, 2, 1, 1.0);
                c.extend(grid(-1.0, -1.0, 1, 1, 1.0));
                cells_mesh(&c, |_, _| false)
            }
            Domain::HShape => {
                let mut c = grid(-2.0, -2.0, 2, 8, 0.5);
                c.extend(grid(-1.0, -0.5, 4, 2, 0.5));
                c.extend(grid(1.0, -2.0, 2, 8, 0.5));
                cells_mesh(&c, |_, _| false)
            }
            Domain::Hollow => {
                let c: Vec<_> = grid(-1.0, -1.0, 4, 4, 0.5)
                    .into_iter()
                    .filter(|&(x, y, s)| {
                        !(x + 0.5 * s > -0.5 && x + 0.5 * s < 0.5 && y + 0.5 * s > -0.5 && y + 0.5 * s < 0.5)
                    })
                    .collect();
                cells_mesh(&c, |a, b| on_line(a, b, 0, -1.0))
            }
            Domain::Triangle => {
                let s = 3f64.sqrt();
                let v = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * s]];
                let m = Mesh::with_longest_edge_tags(v, vec![[0, 1, 2]], &HashMap::new(), 1).expect("valid triangle");
                let m = m.refine_uniform().refine_uniform();
                Mesh { level: 1, ..m }
            }
        };
        debug_assert_eq!(m.level(), 1);
        m
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL.into_iter().find(|d| d.name() == s).ok_or_else(|| Error::UnknownDomain(s.to_string()))
    }
}

/// Level-one mesh for the named domain.
pub fn build_domain(name: &str) -> Result<Mesh> {
    Ok(name.parse::<Domain>()?.build())
}

fn grid(x0: f64, y0: f64, nx: usize, ny: usize, s: f64) -> Vec<(f64, f64, f64)> {
    let mut c = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            c.push((x0 + i as f64 * s, y0 + j as f64 * s, s));
        }
    }
    c
}

fn on_line(a: Point, b: Point, axis: usize, v: f64) -> bool {
    (a[axis] - v).abs() < 1e-12 && (b[axis] - v).abs() < 1e-12
}

/// Squares `(x, y, size)` cut by their south-west to north-east diagonal.
/// Boundary edges for which `neumann` holds get the Neumann label.
fn cells_mesh(cells: &[(f64, f64, f64)], neumann: impl Fn(Point, Point) -> bool) -> Mesh {
    let mut vertices: Vec<Point> = Vec::new();
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vid = |p: Point| {
        let k = ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        *index.entry(k).or_insert_with(|| {
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::new();
    for &(x, y, s) in cells {
        let a = vid([x, y]);
        let b = vid([x + s, y]);
        let c = vid([x + s, y + s]);
        let d = vid([x, y + s]);
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
    }
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for i in 0..3 {
            *count.entry(key(t[i], t[(i + 1) % 3])).or_default() += 1;
        }
    }
    let mut labels = HashMap::new();
    for (&(a, b), &n) in &count {
        if n == 1 && neumann(vertices[a], vertices[b]) {
            labels.insert((a, b), BoundaryLabel::Neumann);
        }
    }
    Mesh::with_longest_edge_tags(vertices, triangles, &labels, 1).expect("domain meshes are valid")
}
