//! Gradient recovery.
//!
//! * `K_h`: edge-midpoint averaging of broken gradients with linear
//!   extrapolation to boundary midpoints, for CR and ECR fields.
//! * PPR: least-squares quadratic fits on vertex patches; nodal gradients are
//!   interpolated linearly. Used for conforming P1 fields and, sampling CR
//!   fields at edge midpoints, on adaptive meshes.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{Matrix6, SymmetricEigen, Vector6};

use crate::mesh::{Mesh, Point};
use crate::quadrature::TriangleRule;
use crate::spaces::{DiscreteField, SpaceKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    KhCR,
    KhECR,
    PprP1,
    PprP1Star,
    PprAdaptive,
    /// Built from an arbitrary piecewise field (tests, oracles).
    Custom,
}

/// A vector field affine on each triangle, stored by its values at the three
/// edge midpoints (entry `i` at the midpoint of local edge `i`).
#[derive(Clone, Debug)]
pub struct RecoveredGradient {
    pub provenance: Provenance,
    pub mesh: Arc<Mesh>,
    values: Vec<[[f64; 2]; 3]>,
}

impl RecoveredGradient {
    pub fn from_midpoint_values(provenance: Provenance, mesh: Arc<Mesh>, values: Vec<[[f64; 2]; 3]>) -> Self {
        assert_eq!(values.len(), mesh.num_triangles());
        Self { provenance, mesh, values }
    }

    pub fn midpoint_values(&self, k: usize) -> &[[f64; 2]; 3] {
        &self.values[k]
    }

    /// Value on triangle `k` at `x`, using the CR basis `1 - 2φ_i`.
    pub fn value(&self, k: usize, x: Point) -> [f64; 2] {
        let g = self.mesh.geometry(k);
        let mut r = [0.0; 2];
        for i in 0..3 {
            let w = 1.0 - 2.0 * g.phi(i, x);
            r[0] += w * self.values[k][i][0];
            r[1] += w * self.values[k][i][1];
        }
        r
    }

    /// `H[a][b] = ∂_b g_a` on triangle `k`.
    pub fn hessian(&self, k: usize) -> [[f64; 2]; 2] {
        let g = self.mesh.geometry(k);
        let mut h = [[0.0; 2]; 2];
        for i in 0..3 {
            let d = g.grad_phi(i);
            for a in 0..2 {
                for b in 0..2 {
                    h[a][b] -= 2.0 * self.values[k][i][a] * d[b];
                }
            }
        }
        h
    }

    pub fn hessians(&self) -> RecoveredHessian {
        RecoveredHessian((0..self.mesh.num_triangles()).map(|k| self.hessian(k)).collect())
    }

    /// `‖self - f‖_{0,Ω}` for a field given per element.
    pub fn l2_distance(&self, f: &dyn Fn(usize, Point) -> [f64; 2], rule: &TriangleRule) -> f64 {
        (0..self.mesh.num_triangles())
            .map(|k| {
                let g = self.mesh.geometry(k);
                rule.integrate(&g.vertices, g.area, |x| {
                    let (a, b) = (self.value(k, x), f(k, x));
                    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
                })
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let values = self.values.iter().map(|v| v.map(|p| [s * p[0], s * p[1]])).collect();
        Self { provenance: self.provenance, mesh: self.mesh.clone(), values }
    }
}

/// Per-triangle constant Jacobians of a recovered gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredHessian(pub Vec<[[f64; 2]; 2]>);

pub fn recovered_hessian(g: &RecoveredGradient) -> RecoveredHessian {
    g.hessians()
}

/// `K_h` for a broken gradient given per element.
///
/// Boundary midpoints use `2 K_h q(m') - K_h q(m'')` where `e'` is the
/// interior edge of the boundary triangle with the smallest label and `e''`
/// the edge of the neighbour across `e'` that does not meet `e`. When `e''`
/// is itself a boundary edge, the neighbour's own value at `m''` is used.
pub fn recover_kh_piecewise(
    mesh: &Arc<Mesh>,
    q: &dyn Fn(usize, Point) -> [f64; 2],
    provenance: Provenance,
) -> Result<RecoveredGradient> {
    let ne = mesh.num_edges();
    let mut at_mid: Vec<Option<[f64; 2]>> = vec![None; ne];
    for (id, e) in mesh.edges().iter().enumerate() {
        if let Some(k2) = e.k2 {
            let m = mesh.edge_midpoint(id);
            let (a, b) = (q(e.k1, m), q(k2, m));
            at_mid[id] = Some([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        }
    }
    let mut boundary = vec![[0.0; 2]; ne];
    for (id, e) in mesh.edges().iter().enumerate() {
        if e.is_interior() {
            continue;
        }
        let k = e.k1;
        let ep = mesh
            .triangle_edges(k)
            .into_iter()
            .filter(|&x| mesh.edges()[x].is_interior())
            .min()
            .ok_or_else(|| Error::Unsupported(format!("boundary triangle {k} has no interior edge")))?;
        let epe = &mesh.edges()[ep];
        let kp = if epe.k1 == k { epe.k2.unwrap() } else { epe.k1 };
        let touches = |x: usize| {
            let v = mesh.edges()[x].vertices;
            v.iter().any(|w| e.vertices.contains(w))
        };
        let epp =
            mesh.triangle_edges(kp).into_iter().find(|&x| !touches(x)).expect("neighbour has an edge away from e");
        let vp = at_mid[ep].unwrap();
        let vpp = at_mid[epp].unwrap_or_else(|| q(kp, mesh.edge_midpoint(epp)));
        boundary[id] = [2.0 * vp[0] - vpp[0], 2.0 * vp[1] - vpp[1]];
    }
    let values =
        (0..mesh.num_triangles()).map(|k| mesh.triangle_edges(k).map(|e| at_mid[e].unwrap_or(boundary[e]))).collect();
    Ok(RecoveredGradient { provenance, mesh: mesh.clone(), values })
}

/// `K_h ∇_h u` for a CR or ECR field.
pub fn recover_kh(u: &DiscreteField) -> Result<RecoveredGradient> {
    let provenance = match u.kind() {
        SpaceKind::CR => Provenance::KhCR,
        SpaceKind::ECR => Provenance::KhECR,
        SpaceKind::P1 => return Err(Error::Unsupported("K_h is defined for CR and ECR fields".into())),
    };
    let local: Vec<_> = (0..u.mesh().num_triangles()).map(|k| u.local(k)).collect();
    recover_kh_piecewise(&u.space.mesh, &|k, x| local[k].gradient(x), provenance)
}

/// Sample points and values for least-squares fitting.
struct Nodes {
    points: Vec<Point>,
    values: Vec<f64>,
    /// Node ids touched by each triangle.
    of_triangle: Vec<Vec<usize>>,
}

const COND_LIMIT: f64 = 1e8;
const MAX_PATCH_LEVEL: usize = 3;

/// Least-squares quadratic at `z` from the nodes of the given triangles;
/// `None` when fewer than six nodes or ill-conditioned.
fn fit(z: Point, nodes: &Nodes, tris: &BTreeSet<usize>) -> Option<Vector6<f64>> {
    let ids: BTreeSet<usize> = tris.iter().flat_map(|&k| nodes.of_triangle[k].iter().copied()).collect();
    if ids.len() < 6 {
        return None;
    }
    let hp = ids
        .iter()
        .map(|&i| {
            let p = nodes.points[i];
            ((p[0] - z[0]).powi(2) + (p[1] - z[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    let mut m = Matrix6::zeros();
    let mut rhs = Vector6::zeros();
    for &i in &ids {
        let p = nodes.points[i];
        let (s, t) = ((p[0] - z[0]) / hp, (p[1] - z[1]) / hp);
        let row = Vector6::new(1.0, s, t, s * s, s * t, t * t);
        m += row * row.transpose();
        rhs += row * nodes.values[i];
    }
    let e = SymmetricEigen::new(m);
    let (lo, hi) = e.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo > 0.0) || hi / lo > COND_LIMIT {
        return None;
    }
    let c = m.cholesky()?.solve(&rhs);
    // back to unscaled coordinates
    Some(Vector6::new(c[0], c[1] / hp, c[2] / hp, c[3] / (hp * hp), c[4] / (hp * hp), c[5] / (hp * hp)))
}

/// Gradient at each vertex from growing vertex-star patches.
fn vertex_gradients(mesh: &Mesh, nodes: &Nodes) -> Result<Vec<[f64; 2]>> {
    let vt = mesh.vertex_triangles();
    let mut grads = Vec::with_capacity(mesh.num_vertices());
    for z in 0..mesh.num_vertices() {
        let p = mesh.vertices()[z];
        let mut tris: BTreeSet<usize> = vt[z].iter().copied().collect();
        let mut level = 1;
        let c = loop {
            if let Some(c) = fit(p, nodes, &tris) {
                break c;
            }
            if level == MAX_PATCH_LEVEL {
                return Err(Error::RankDeficientPatch(z));
            }
            let verts: BTreeSet<usize> = tris.iter().flat_map(|&k| mesh.triangles()[k]).collect();
            tris = verts.iter().flat_map(|&v| vt[v].iter().copied()).collect();
            level += 1;
        };
        grads.push([c[1], c[2]]);
    }
    Ok(grads)
}

fn from_vertex_gradients(mesh: &Arc<Mesh>, grads: &[[f64; 2]], provenance: Provenance) -> RecoveredGradient {
    let values = (0..mesh.num_triangles())
        .map(|k| {
            let t = mesh.triangles()[k];
            let mut v = [[0.0; 2]; 3];
            for i in 0..3 {
                let (a, b) = (grads[t[(i + 1) % 3]], grads[t[(i + 2) % 3]]);
                v[i] = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            }
            v
        })
        .collect();
    RecoveredGradient { provenance, mesh: mesh.clone(), values }
}

/// PPR of a conforming P1 field.
pub fn recover_ppr(u: &DiscreteField, provenance: Provenance) -> Result<RecoveredGradient> {
    if u.kind() != SpaceKind::P1 {
        return Err(Error::Unsupported("PPR expects a P1 field".into()));
    }
    let mesh = &u.space.mesh;
    let nodes = Nodes {
        points: mesh.vertices().to_vec(),
        values: u.coeffs.clone(),
        of_triangle: mesh.triangles().iter().map(|t| t.to_vec()).collect(),
    };
    let g = vertex_gradients(mesh, &nodes)?;
    Ok(from_vertex_gradients(mesh, &g, provenance))
}

/// PPR-type recovery of a CR field from its edge-midpoint values, for
/// meshes without the local symmetry `K_h` relies on.
pub fn recover_ppr_cr(u: &DiscreteField) -> Result<RecoveredGradient> {
    if u.kind() != SpaceKind::CR {
        return Err(Error::Unsupported("midpoint PPR expects a CR field".into()));
    }
    let mesh = &u.space.mesh;
    let nodes = Nodes {
        points: (0..mesh.num_edges()).map(|e| mesh.edge_midpoint(e)).collect(),
        values: u.coeffs.clone(),
        of_triangle: (0..mesh.num_triangles()).map(|k| mesh.triangle_edges(k).to_vec()).collect(),
    };
    let g = vertex_gradients(mesh, &nodes)?;
    Ok(from_vertex_gradients(mesh, &g, Provenance::PprAdaptive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Domain;
    use crate::spaces::{interpolate, Space};

    #[test]
    fn two_sided_average() {
        let mesh = Arc::new(Domain::Square.build());
        let g = recover_kh_piecewise(&mesh, &|k, _| if k == 0 { [1.0, 0.0] } else { [0.0, 1.0] }, Provenance::Custom)
            .unwrap();
        let diag = mesh.edges().iter().position(|e| e.is_interior()).unwrap();
        let k = mesh.edges()[diag].k1;
        let i = mesh.local_edge_index(k, diag).unwrap();
        assert_eq!(g.midpoint_values(k)[i], [0.5, 0.5]);
    }

    #[test]
    fn kh_reproduces_affine_fields() {
        let mesh = Arc::new(Domain::LShape.build().refine_uniform().refine_uniform());
        let q = |x: Point| [1.0 + 2.0 * x[0] - x[1], -0.5 + 0.3 * x[0] + 4.0 * x[1]];
        let g = recover_kh_piecewise(&mesh, &|_, x| q(x), Provenance::Custom).unwrap();
        for k in 0..mesh.num_triangles() {
            for i in 0..3 {
                let m = mesh.geometry(k).edge_midpoint(i);
                let (a, b) = (g.midpoint_values(k)[i], q(m));
                assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            }
            let h = g.hessian(k);
            assert!((h[0][0] - 2.0).abs() < 1e-10 && (h[0][1] + 1.0).abs() < 1e-10);
            assert!((h[1][0] - 0.3).abs() < 1e-10 && (h[1][1] - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_triangle_unsupported() {
        let m = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], &Default::default(), 1);
        let mesh = Arc::new(m.unwrap());
        let r = recover_kh_piecewise(&mesh, &|_, _| [0.0, 0.0], Provenance::Custom);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn ppr_preserves_quadratics() {
        let mesh = Arc::new(Domain::Square.build().refine_uniform().refine_uniform().refine_uniform());
        let w = |x: Point| 0.3 + x[0] - 2.0 * x[1] + 1.5 * x[0] * x[0] - x[0] * x[1] + 0.7 * x[1] * x[1];
        let dw = |x: Point| [1.0 + 3.0 * x[0] - x[1], -2.0 - x[0] + 1.4 * x[1]];
        let s = Space::new(SpaceKind::P1, mesh.clone());
        let u = interpolate(&s, &w);
        let g = recover_ppr(&u, Provenance::PprP1).unwrap();
        for k in 0..mesh.num_triangles() {
            for x in mesh.geometry(k).vertices {
                let (a, b) = (g.value(k, x), dw(x));
                assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
            }
        }
        let cr = Space::new(SpaceKind::CR, mesh.clone());
        let u = interpolate(&cr, &|x| 1.0 + 2.0 * x[0] - 3.0 * x[1]);
        let g = recover_ppr_cr(&u).unwrap();
        let a = g.value(5, mesh.geometry(5).centroid);
        assert!((a[0] - 2.0).abs() < 1e-10 && (a[1] + 3.0).abs() < 1e-10);
    }
}
