//! P1, CR and ECR spaces: local bases, DOF maps, discrete fields and
//! canonical interpolation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::Matrix4;

use crate::mesh::{BoundaryLabel, ElementGeometry, Mesh, Point};
use crate::poly::{Field, Quadratic};
use crate::quadrature::{integrate_edge, TriangleRule};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpaceKind {
    P1,
    CR,
    ECR,
}

impl SpaceKind {
    pub fn local_dofs(self) -> usize {
        match self {
            SpaceKind::P1 | SpaceKind::CR => 3,
            SpaceKind::ECR => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::P1 => "P1",
            SpaceKind::CR => "CR",
            SpaceKind::ECR => "ECR",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(SpaceKind::P1),
            "CR" => Ok(SpaceKind::CR),
            "ECR" => Ok(SpaceKind::ECR),
            _ => Err(Error::Config(format!("unknown element `{s}`"))),
        }
    }
}

/// Mean of a quadratic over a segment (Simpson is exact).
fn edge_mean(q: &Quadratic, a: Point, b: Point) -> f64 {
    let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    (q.value(a) + 4.0 * q.value(m) + q.value(b)) / 6.0
}

/// Mean of a quadratic over a triangle (edge-midpoint rule is exact).
fn element_mean(q: &Quadratic, g: &ElementGeometry) -> f64 {
    (0..3).map(|i| q.value(g.edge_midpoint(i))).sum::<f64>() / 3.0
}

/// Local basis on one triangle, centred at its centroid.
///
/// P1: barycentric coordinates. CR: `1 - 2φ_i`, dual to the mean over edge `i`.
/// ECR: dual to the three edge means followed by the element mean.
pub fn local_basis(kind: SpaceKind, g: &ElementGeometry) -> Vec<Quadratic> {
    let c = g.centroid;
    let bary = |i: usize| Quadratic::affine(c, g.phi(i, c), g.grad_phi(i));
    match kind {
        SpaceKind::P1 => (0..3).map(bary).collect(),
        SpaceKind::CR => (0..3)
            .map(|i| {
                Quadratic::affine(c, 1.0 - 2.0 * g.phi(i, c), {
                    let d = g.grad_phi(i);
                    [-2.0 * d[0], -2.0 * d[1]]
                })
            })
            .collect(),
        SpaceKind::ECR => {
            let mono = ecr_monomials(c);
            let mut f = Matrix4::zeros();
            for (j, m) in mono.iter().enumerate() {
                for i in 0..3 {
                    let (a, b) = g.edge_endpoints(i);
                    f[(i, j)] = edge_mean(m, a, b);
                }
                f[(3, j)] = element_mean(m, g);
            }
            let inv = f.try_inverse().expect("ECR functionals are unisolvent");
            (0..4)
                .map(|j| {
                    let mut q = Quadratic::zero(c);
                    for (k, m) in mono.iter().enumerate() {
                        q.axpy(inv[(k, j)], m);
                    }
                    q
                })
                .collect()
        }
    }
}

fn ecr_monomials(c: Point) -> [Quadratic; 4] {
    [
        Quadratic::constant(c, 1.0),
        Quadratic::affine(c, 0.0, [1.0, 0.0]),
        Quadratic::affine(c, 0.0, [0.0, 1.0]),
        Quadratic { center: c, c: [0.0, 0.0, 0.0, 1.0, 0.0, 1.0] },
    ]
}

/// The local DOF functionals applied to a quadratic `q` on `g`.
pub fn local_functionals(kind: SpaceKind, g: &ElementGeometry, q: &Quadratic) -> Vec<f64> {
    match kind {
        SpaceKind::P1 => g.vertices.iter().map(|&p| q.value(p)).collect(),
        SpaceKind::CR | SpaceKind::ECR => {
            let mut v: Vec<f64> = (0..3)
                .map(|i| {
                    let (a, b) = g.edge_endpoints(i);
                    edge_mean(q, a, b)
                })
                .collect();
            if kind == SpaceKind::ECR {
                v.push(element_mean(q, g));
            }
            v
        }
    }
}

/// Canonical local interpolant of a quadratic, exact.
pub fn local_interpolant(kind: SpaceKind, g: &ElementGeometry, q: &Quadratic) -> Quadratic {
    let basis = local_basis(kind, g);
    let mut r = Quadratic::zero(g.centroid);
    for (b, v) in basis.iter().zip(local_functionals(kind, g, q)) {
        r.axpy(v, b);
    }
    r
}

/// `(I - Π_ECR)` applied to `(x1-M1)² - (x2-M2)²` (`which = 1`) or
/// `(x1-M1)(x2-M2)` (`which = 2`).
pub fn ecr_bubble(which: u8, g: &ElementGeometry) -> Quadratic {
    let c = g.centroid;
    let q = match which {
        1 => Quadratic { center: c, c: [0.0, 0.0, 0.0, 1.0, 0.0, -1.0] },
        2 => Quadratic { center: c, c: [0.0, 0.0, 0.0, 0.0, 1.0, 0.0] },
        _ => panic!("ecr_bubble: which must be 1 or 2"),
    };
    let mut r = q;
    r.axpy(-1.0, &local_interpolant(SpaceKind::ECR, g, &q));
    r
}

/// Global numbering of DOFs with Dirichlet constraints.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub kind: SpaceKind,
    n: usize,
    local: Vec<[usize; 4]>,
    constrained: Vec<bool>,
    free_index: Vec<Option<usize>>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn new(kind: SpaceKind, mesh: &Mesh) -> Self {
        let nt = mesh.num_triangles();
        let (n, local, constrained) = match kind {
            SpaceKind::P1 => {
                let local = mesh.triangles().iter().map(|t| [t[0], t[1], t[2], usize::MAX]).collect();
                (mesh.num_vertices(), local, mesh.dirichlet_vertices())
            }
            SpaceKind::CR | SpaceKind::ECR => {
                let ne = mesh.num_edges();
                let local = (0..nt)
                    .map(|k| {
                        let e = mesh.triangle_edges(k);
                        let x = if kind == SpaceKind::ECR { ne + k } else { usize::MAX };
                        [e[0], e[1], e[2], x]
                    })
                    .collect();
                let mut c: Vec<bool> =
                    mesh.edges().iter().map(|e| e.boundary == Some(BoundaryLabel::Dirichlet)).collect();
                let n = if kind == SpaceKind::ECR {
                    c.resize(ne + nt, false);
                    ne + nt
                } else {
                    ne
                };
                (n, local, c)
            }
        };
        let mut free_index = vec![None; n];
        let mut free = Vec::new();
        for i in 0..n {
            if !constrained[i] {
                free_index[i] = Some(free.len());
                free.push(i);
            }
        }
        Self { kind, n, local, constrained, free_index, free }
    }

    /// Total number of DOFs, constrained ones included.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Global DOF indices of triangle `k`.
    pub fn local(&self, k: usize) -> &[usize] {
        &self.local[k][..self.kind.local_dofs()]
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.constrained[i]
    }

    pub fn free_index(&self, i: usize) -> Option<usize> {
        self.free_index[i]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    /// Full-length vector with zeros on constrained DOFs.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.free.len());
        let mut full = vec![0.0; self.n];
        for (r, &i) in self.free.iter().enumerate() {
            full[i] = reduced[r];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

/// A finite element space on a mesh.
#[derive(Debug)]
pub struct Space {
    pub kind: SpaceKind,
    pub mesh: Arc<Mesh>,
    pub dofs: DofMap,
    bases: Vec<Vec<Quadratic>>,
}

impl Space {
    pub fn new(kind: SpaceKind, mesh: Arc<Mesh>) -> Arc<Self> {
        let dofs = DofMap::new(kind, &mesh);
        let bases = (0..mesh.num_triangles()).map(|k| local_basis(kind, mesh.geometry(k))).collect();
        Arc::new(Self { kind, mesh, dofs, bases })
    }

    pub fn basis(&self, k: usize) -> &[Quadratic] {
        &self.bases[k]
    }

    /// Values and gradients of the local basis of triangle `k` at `x`.
    pub fn shape_values(&self, k: usize, x: Point) -> Vec<(f64, [f64; 2])> {
        self.bases[k].iter().map(|b| (b.value(x), b.gradient(x))).collect()
    }
}

/// A coefficient vector over all DOFs of a space.
#[derive(Clone, Debug)]
pub struct DiscreteField {
    pub space: Arc<Space>,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn new(space: Arc<Space>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.dofs.len());
        Self { space, coeffs }
    }

    pub fn zero(space: Arc<Space>) -> Self {
        let n = space.dofs.len();
        Self { space, coeffs: vec![0.0; n] }
    }

    pub fn from_free(space: Arc<Space>, reduced: &[f64]) -> Self {
        let coeffs = space.dofs.expand(reduced);
        Self { space, coeffs }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.space.mesh
    }

    pub fn kind(&self) -> SpaceKind {
        self.space.kind
    }

    /// Restriction to triangle `k` as an explicit polynomial.
    pub fn local(&self, k: usize) -> Quadratic {
        let g = self.space.mesh.geometry(k);
        let mut q = Quadratic::zero(g.centroid);
        for (b, &i) in self.space.basis(k).iter().zip(self.space.dofs.local(k)) {
            q.axpy(self.coeffs[i], b);
        }
        q
    }

    pub fn value(&self, k: usize, x: Point) -> f64 {
        self.local(k).value(x)
    }

    pub fn gradient(&self, k: usize, x: Point) -> [f64; 2] {
        self.local(k).gradient(x)
    }

    pub fn l2_norm(&self) -> f64 {
        let rule = TriangleRule::degree4();
        let mesh = &self.space.mesh;
        (0..mesh.num_triangles())
            .map(|k| {
                let g = mesh.geometry(k);
                let q = self.local(k);
                rule.integrate(&g.vertices, g.area, |x| q.value(x).powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Broken H¹ seminorm.
    pub fn energy_norm(&self) -> f64 {
        let rule = TriangleRule::degree2();
        let mesh = &self.space.mesh;
        (0..mesh.num_triangles())
            .map(|k| {
                let g = mesh.geometry(k);
                let q = self.local(k);
                rule.integrate(&g.vertices, g.area, |x| {
                    let d = q.gradient(x);
                    d[0] * d[0] + d[1] * d[1]
                })
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

/// Canonical interpolation. Edge means use 3-point Gauss, element means a
/// degree-6 rule. Constrained DOFs are not zeroed.
pub fn interpolate(space: &Arc<Space>, f: &dyn Fn(Point) -> f64) -> DiscreteField {
    let mesh = &space.mesh;
    let mut coeffs = vec![0.0; space.dofs.len()];
    match space.kind {
        SpaceKind::P1 => {
            for (i, &p) in mesh.vertices().iter().enumerate() {
                coeffs[i] = f(p);
            }
        }
        SpaceKind::CR | SpaceKind::ECR => {
            for e in 0..mesh.num_edges() {
                let (a, b) = mesh.edge_points(e);
                coeffs[e] = integrate_edge(a, b, f) / mesh.edge_length(e);
            }
            if space.kind == SpaceKind::ECR {
                let rule = TriangleRule::collapsed(4);
                let ne = mesh.num_edges();
                for k in 0..mesh.num_triangles() {
                    let g = mesh.geometry(k);
                    coeffs[ne + k] = rule.integrate(&g.vertices, g.area, f) / g.area;
                }
            }
        }
    }
    DiscreteField::new(space.clone(), coeffs)
}

/// `max_K max_v |∫_K ∇(w - Πw)·∇v|` over local basis functions `v`.
pub fn commuting_check(space: &Arc<Space>, w: &dyn Field) -> f64 {
    let pi = interpolate(space, &|x| w.value(x));
    let mesh = &space.mesh;
    let rule = TriangleRule::collapsed(4);
    let mut worst: f64 = 0.0;
    for k in 0..mesh.num_triangles() {
        let g = mesh.geometry(k);
        let q = pi.local(k);
        for b in space.basis(k) {
            let r = rule.integrate(&g.vertices, g.area, |x| {
                let dw = w.gradient(x);
                let dp = q.gradient(x);
                let db = b.gradient(x);
                (dw[0] - dp[0]) * db[0] + (dw[1] - dp[1]) * db[1]
            });
            worst = worst.max(r.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;

    fn unit() -> ElementGeometry {
        ElementGeometry::new(0, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    fn gauss_edge_mean(q: &Quadratic, a: Point, b: Point) -> f64 {
        let l = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        integrate_edge(a, b, |x| q.value(x)) / l
    }

    #[test]
    fn p1_at_vertices() {
        let g = unit();
        let b = local_basis(SpaceKind::P1, &g);
        for (i, bi) in b.iter().enumerate() {
            for (j, &p) in g.vertices.iter().enumerate() {
                assert!((bi.value(p) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cr_edge_means_and_midpoints() {
        let g = ElementGeometry::new(0, [[0.1, 0.2], [1.4, -0.1], [0.3, 0.9]]).unwrap();
        let b = local_basis(SpaceKind::CR, &g);
        for (i, bi) in b.iter().enumerate() {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((bi.value(g.edge_midpoint(j)) - d).abs() < 1e-14);
                let (a, c) = g.edge_endpoints(j);
                assert!((gauss_edge_mean(bi, a, c) - d).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ecr_duality_with_quadrature() {
        let g = ElementGeometry::new(0, [[0.1, 0.2], [1.4, -0.1], [0.3, 0.9]]).unwrap();
        let b = local_basis(SpaceKind::ECR, &g);
        let rule = TriangleRule::collapsed(5);
        for (i, bi) in b.iter().enumerate() {
            for j in 0..3 {
                let (a, c) = g.edge_endpoints(j);
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((gauss_edge_mean(bi, a, c) - d).abs() < 1e-12);
            }
            let m = rule.integrate(&g.vertices, g.area, |x| bi.value(x)) / g.area;
            assert!((m - if i == 3 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn ecr_reproduces_r2() {
        let g = ElementGeometry::new(0, [[0.1, 0.2], [1.4, -0.1], [0.3, 0.9]]).unwrap();
        let q = Quadratic { center: [0.0, 0.0], c: [0.5, 1.0, -2.0, 3.0, 0.0, 3.0] };
        let p = local_interpolant(SpaceKind::ECR, &g, &q);
        for x in g.vertices {
            assert!((p.value(x) - q.value(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn bubbles_have_zero_means() {
        let g = ElementGeometry::new(0, [[0.1, 0.2], [1.4, -0.1], [0.3, 0.9]]).unwrap();
        for which in [1, 2] {
            let b = ecr_bubble(which, &g);
            for v in local_functionals(SpaceKind::ECR, &g, &b) {
                assert!(v.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interpolation_of_linear_is_exact() {
        let mesh = Arc::new(Domain::LShape.build().refine_uniform());
        let f = |x: Point| 1.0 + 2.0 * x[0] - 0.5 * x[1];
        for kind in [SpaceKind::P1, SpaceKind::CR, SpaceKind::ECR] {
            let s = Space::new(kind, mesh.clone());
            let u = interpolate(&s, &f);
            for k in 0..mesh.num_triangles() {
                for &p in &mesh.geometry(k).vertices {
                    assert!((u.value(k, p) - f(p)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn dof_counts() {
        let mesh = Arc::new(Domain::SquareNeumann.build().refine_uniform());
        let p1 = DofMap::new(SpaceKind::P1, &mesh);
        let cr = DofMap::new(SpaceKind::CR, &mesh);
        let ecr = DofMap::new(SpaceKind::ECR, &mesh);
        assert_eq!(p1.len(), 9);
        // vertices off the Dirichlet part: centre and the interior of x1 = 1
        assert_eq!(p1.num_free(), 2);
        assert_eq!(cr.len(), 16);
        assert_eq!(cr.num_free(), 16 - 6);
        assert_eq!(ecr.len(), 24);
        assert_eq!(ecr.num_free(), 24 - 6);
        let v: Vec<f64> = (0..ecr.num_free()).map(|i| i as f64 + 1.0).collect();
        assert_eq!(ecr.restrict(&ecr.expand(&v)), v);
    }
}
