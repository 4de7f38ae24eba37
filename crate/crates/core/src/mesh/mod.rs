//! Conforming triangulations: storage, edges, geometry, refinement and I/O.

mod domains;
mod geometry;
mod io;
mod refine;

use std::collections::HashMap;

use crate::{Error, Result};

pub use domains::{build_domain, Domain};
pub use geometry::ElementGeometry;
pub use io::{read_mesh, write_mesh};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Dirichlet,
    Neumann,
}

impl BoundaryLabel {
    pub fn code(self) -> char {
        match self {
            BoundaryLabel::Dirichlet => 'D',
            BoundaryLabel::Neumann => 'N',
        }
    }
}

/// An edge with its (one or two) neighbouring triangles.
///
/// `k1` is the neighbour with the larger triangle label. The unit normal of
/// the edge points out of `k1`, so the jump `[v] = v|k1 - v|k2` and the normal
/// are consistent.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub k1: usize,
    pub k2: Option<usize>,
    pub boundary: Option<BoundaryLabel>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.k2.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    edge_lookup: HashMap<(usize, usize), usize>,
    geometry: Vec<ElementGeometry>,
    level: usize,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds a mesh from vertices, CCW triangles and labels for the boundary
    /// edges (keyed by unordered vertex pair). Boundary edges absent from
    /// `labels` default to Dirichlet.
    ///
    /// Local edge `i` of a triangle is the one opposite its vertex `i`; the
    /// newest-vertex refinement edge is local edge 0.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        labels: &HashMap<(usize, usize), BoundaryLabel>,
        level: usize,
    ) -> Result<Self> {
        let nv = vertices.len();
        let mut geometry = Vec::with_capacity(triangles.len());
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {k} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {k} repeats a vertex")));
            }
            let g = ElementGeometry::new(k, [vertices[t[0]], vertices[t[1]], vertices[t[2]]])?;
            geometry.push(g);
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut edge_lookup = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for i in 0..3 {
                let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                let id = *edge_lookup.entry(key(a, b)).or_insert_with(|| {
                    edges.push(Edge { vertices: [a, b], k1: k, k2: None, boundary: None });
                    edges.len() - 1
                });
                let e = &mut edges[id];
                if e.k1 != k {
                    if e.k2.is_some() {
                        return Err(Error::InvalidMesh(format!("edge ({a}, {b}) has more than two triangles")));
                    }
                    // triangles are visited in label order, so k is the larger one
                    e.k2 = Some(e.k1);
                    e.k1 = k;
                }
                te[i] = id;
            }
            tri_edges.push(te);
        }
        for e in &mut edges {
            if e.k2.is_none() {
                let (a, b) = (e.vertices[0], e.vertices[1]);
                e.boundary = Some(labels.get(&key(a, b)).copied().unwrap_or(BoundaryLabel::Dirichlet));
            }
        }
        Ok(Self { vertices, triangles, edges, tri_edges, edge_lookup, geometry, level })
    }

    /// Same as [`Mesh::new`] but first rotates every triangle so that its
    /// longest edge is opposite local vertex 0 (initial refinement-edge tag).
    pub fn with_longest_edge_tags(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        labels: &HashMap<(usize, usize), BoundaryLabel>,
        level: usize,
    ) -> Result<Self> {
        for t in &mut triangles {
            let len2 = |a: usize, b: usize| {
                let (p, q) = (vertices[a], vertices[b]);
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
            };
            let l = [len2(t[1], t[2]), len2(t[2], t[0]), len2(t[0], t[1])];
            let max = l.iter().cloned().fold(0.0, f64::max);
            let i = (0..3).find(|&i| l[i] >= max * (1.0 - 1e-12)).unwrap_or(0);
            t.rotate_left(i);
        }
        Self::new(vertices, triangles, labels, level)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn level(&self) -> usize {
        self.level
    }

    /// Edge ids of triangle `k`; entry `i` is the edge opposite vertex `i`.
    pub fn triangle_edges(&self, k: usize) -> [usize; 3] {
        self.tri_edges[k]
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn edge_points(&self, e: usize) -> (Point, Point) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let (a, b) = self.edge_points(e);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_points(e);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Unit normal pointing out of `k1`.
    pub fn edge_normal(&self, e: usize) -> [f64; 2] {
        let k = self.edges[e].k1;
        let i = self.local_edge_index(k, e).expect("edge belongs to k1");
        self.geometry[k].normals[i]
    }

    /// Unit tangent, counter-clockwise with respect to `k1`.
    pub fn edge_tangent(&self, e: usize) -> [f64; 2] {
        let n = self.edge_normal(e);
        [-n[1], n[0]]
    }

    pub fn local_edge_index(&self, k: usize, e: usize) -> Option<usize> {
        self.tri_edges[k].iter().position(|&x| x == e)
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_interior()).count()
    }

    /// Labels of all boundary edges keyed by unordered vertex pair.
    pub fn boundary_labels(&self) -> HashMap<(usize, usize), BoundaryLabel> {
        self.edges.iter().filter_map(|e| e.boundary.map(|l| (key(e.vertices[0], e.vertices[1]), l))).collect()
    }

    /// Vertices lying on at least one Dirichlet edge.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut d = vec![false; self.vertices.len()];
        for e in &self.edges {
            if e.boundary == Some(BoundaryLabel::Dirichlet) {
                d[e.vertices[0]] = true;
                d[e.vertices[1]] = true;
            }
        }
        d
    }

    /// Triangles sharing each vertex, in increasing label order.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut vt = vec![Vec::new(); self.vertices.len()];
        for (k, t) in self.triangles.iter().enumerate() {
            for &v in t {
                vt[v].push(k);
            }
        }
        vt
    }

    /// Brute-force conformity check: every edge has one or two triangles and
    /// no vertex lies inside an edge.
    pub fn check_conforming(&self) -> Result<()> {
        for (id, e) in self.edges.iter().enumerate() {
            let (a, b) = self.edge_points(id);
            let len = self.edge_length(id);
            for (v, p) in self.vertices.iter().enumerate() {
                if e.vertices.contains(&v) {
                    continue;
                }
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
                if cross.abs() <= 1e-12 * len * len && t > 1e-12 && t < 1.0 - 1e-12 {
                    return Err(Error::InvalidMesh(format!("hanging vertex {v} on edge {id}")));
                }
            }
        }
        Ok(())
    }

    pub fn refine_uniform(&self) -> Mesh {
        refine::red(self)
    }

    /// Newest-vertex bisection of the marked triangles plus closure.
    pub fn refine_marked(&self, marked: &[usize]) -> Mesh {
        refine::bisect_marked(self, marked)
    }
}
