//! Adaptive refinement driven by a residual indicator for CR eigenpairs.

use std::sync::Arc;

use crate::eigensolve::{solve_space, EigenOptions};
use crate::estimators::estimate_type2;
use crate::mesh::{BoundaryLabel, Mesh};
use crate::quadrature::{edge_gauss3, TriangleRule};
use crate::recovery::recover_ppr_cr;
use crate::spaces::{DiscreteField, Space, SpaceKind};
use crate::{Error, Result};

/// Per-element `η_K` for a CR eigenpair.
///
/// Boundary edges: Dirichlet edges contribute the tangential trace only,
/// Neumann edges the normal trace only.
pub fn indicator(lambda: f64, u: &DiscreteField) -> Result<Vec<f64>> {
    if u.kind() != SpaceKind::CR {
        return Err(Error::Unsupported("the residual indicator expects a CR field".into()));
    }
    let mesh = u.mesh();
    let local: Vec<_> = (0..mesh.num_triangles()).map(|k| u.local(k)).collect();
    let rule = TriangleRule::degree4();
    let mut eta2: Vec<f64> = (0..mesh.num_triangles())
        .map(|k| {
            let g = mesh.geometry(k);
            let m = rule.integrate(&g.vertices, g.area, |x| local[k].value(x).powi(2));
            (lambda * g.diameter).powi(2) * m
        })
        .collect();
    let (s, w) = edge_gauss3();
    for (id, e) in mesh.edges().iter().enumerate() {
        let n = mesh.edge_normal(id);
        let t = mesh.edge_tangent(id);
        let (a, b) = mesh.edge_points(id);
        let len = mesh.edge_length(id);
        let mut sum = 0.0;
        for (si, wi) in s.iter().zip(w) {
            let x = [a[0] + si * (b[0] - a[0]), a[1] + si * (b[1] - a[1])];
            let mut d = local[e.k1].gradient(x);
            if let Some(k2) = e.k2 {
                let d2 = local[k2].gradient(x);
                d = [d[0] - d2[0], d[1] - d2[1]];
            }
            let jn = d[0] * n[0] + d[1] * n[1];
            let jt = d[0] * t[0] + d[1] * t[1];
            sum += wi
                * len
                * match e.boundary {
                    None => jn * jn + jt * jt,
                    Some(BoundaryLabel::Dirichlet) => jt * jt,
                    Some(BoundaryLabel::Neumann) => jn * jn,
                };
        }
        eta2[e.k1] += len * sum;
        if let Some(k2) = e.k2 {
            eta2[k2] += len * sum;
        }
    }
    Ok(eta2.into_iter().map(f64::sqrt).collect())
}

/// Elements with `η_K > θ max η`.
pub fn mark(eta: &[f64], theta: f64) -> Vec<usize> {
    let max = eta.iter().fold(0.0f64, |m, &v| m.max(v));
    (0..eta.len()).filter(|&k| eta[k] > theta * max).collect()
}

#[derive(Clone, Debug)]
pub struct AdaptOptions {
    pub theta: f64,
    pub max_iter: usize,
    /// Stop once `η <= eta_stop * η_0`.
    pub eta_stop: f64,
    /// 1-based eigenvalue index driving refinement.
    pub index: usize,
    pub eigen: EigenOptions,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self { theta: 0.3, max_iter: 25, eta_stop: 1e-3, index: 1, eigen: EigenOptions::default() }
    }
}

/// One iteration of the adaptive loop.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptRecord {
    pub k: usize,
    pub ndof: usize,
    pub lambda: f64,
    pub eta: f64,
    /// `F_CR,2` with the `G_h` recovery.
    pub f_cr2: f64,
    pub marked: usize,
    pub triangles: usize,
}

impl AdaptRecord {
    pub fn recovered(&self) -> f64 {
        self.lambda + self.f_cr2
    }
}

#[derive(Debug)]
pub struct AdaptState {
    pub mesh: Arc<Mesh>,
    pub k: usize,
    pub lambda: f64,
    pub u: Option<DiscreteField>,
    pub eta_k: Vec<f64>,
    pub eta: f64,
    pub history: Vec<AdaptRecord>,
    /// Meshes of every iteration, kept when requested.
    pub meshes: Vec<Arc<Mesh>>,
    /// Set when the loop ended on an error; the history is partial.
    pub failure: Option<Error>,
}

pub const HISTORY_HEADER: &str = "k,ndof,lambda,eta,F_CR2_Gh,R_CR2_Gh";

impl AdaptState {
    pub fn history_csv(&self) -> String {
        let mut s = String::from(HISTORY_HEADER);
        s.push('\n');
        for r in &self.history {
            s.push_str(&format!(
                "{},{},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                r.k,
                r.ndof,
                r.lambda,
                r.eta,
                r.f_cr2,
                r.recovered()
            ));
        }
        s
    }
}

fn step(mesh: &Arc<Mesh>, opts: &AdaptOptions) -> Result<(f64, DiscreteField, Vec<f64>, f64, usize)> {
    let space = Space::new(SpaceKind::CR, mesh.clone());
    let modes = solve_space(&space, opts.index, &opts.eigen)?;
    let m = modes.into_iter().nth(opts.index - 1).expect("requested index solved");
    let g = recover_ppr_cr(&m.u)?;
    let f = estimate_type2(m.value, &m.u, &g)?;
    let eta_k = indicator(m.value, &m.u)?;
    Ok((m.value, m.u, eta_k, f, space.dofs.num_free()))
}

/// Solve, estimate, mark and refine until `η` is small or `max_iter` is hit.
pub fn adapt_loop(initial: Mesh, opts: &AdaptOptions, keep_meshes: bool) -> AdaptState {
    assert!(opts.theta > 0.0 && opts.theta < 1.0, "theta must lie in (0, 1)");
    assert!(opts.index >= 1);
    let mut st = AdaptState {
        mesh: Arc::new(initial),
        k: 0,
        lambda: f64::NAN,
        u: None,
        eta_k: Vec::new(),
        eta: f64::NAN,
        history: Vec::new(),
        meshes: Vec::new(),
        failure: None,
    };
    let mut eta0 = None;
    loop {
        let (lambda, u, eta_k, f, ndof) = match step(&st.mesh, opts) {
            Ok(v) => v,
            Err(e) => {
                st.failure = Some(e);
                return st;
            }
        };
        let eta = eta_k.iter().map(|v| v * v).sum::<f64>().sqrt();
        let eta0 = *eta0.get_or_insert(eta);
        let marked = mark(&eta_k, opts.theta);
        st.history.push(AdaptRecord {
            k: st.k,
            ndof,
            lambda,
            eta,
            f_cr2: f,
            marked: marked.len(),
            triangles: st.mesh.num_triangles(),
        });
        if keep_meshes {
            st.meshes.push(st.mesh.clone());
        }
        st.lambda = lambda;
        st.u = Some(u);
        st.eta_k = eta_k;
        st.eta = eta;
        if eta <= opts.eta_stop * eta0 || st.k >= opts.max_iter {
            return st;
        }
        st.mesh = Arc::new(st.mesh.refine_marked(&marked));
        st.k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marking() {
        assert_eq!(mark(&[1.0, 0.2, 0.4], 0.3), vec![0, 2]);
        assert_eq!(mark(&[0.5; 4], 0.3), vec![0, 1, 2, 3]);
        assert_eq!(mark(&[1.0, 0.99999, 1.0], 0.999999), vec![0, 2]);
    }
}
