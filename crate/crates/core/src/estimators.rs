//! A posteriori eigenvalue error estimates and the eigenvalues built from them.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::eigensolve::{solve_space, EigenOptions, Mode};
use crate::mesh::{ElementGeometry, Mesh};
use crate::poly::Quadratic;
use crate::quadrature::{edge_gauss3, TriangleRule};
use crate::recovery::{recover_kh, recover_ppr, Provenance, RecoveredGradient};
use crate::spaces::{ecr_bubble, DiscreteField, Space, SpaceKind};
use crate::{Error, Result};

fn sym_parts(h: &[[f64; 2]; 2]) -> (f64, f64, f64) {
    (h[0][0], h[1][1], 0.5 * (h[0][1] + h[1][0]))
}

/// Quadratic on `g` reproducing `(I - Π)w` for a quadratic `w` with Hessian `h`.
pub fn p_polynomial(kind: SpaceKind, g: &ElementGeometry, h: &[[f64; 2]; 2]) -> Quadratic {
    let c = g.centroid;
    match kind {
        SpaceKind::P1 => {
            let phi = |j: usize| Quadratic::affine(c, g.phi(j, c), g.grad_phi(j));
            let mut p = Quadratic::zero(c);
            for i in 0..3 {
                let t = g.tangents[i];
                let tht = t[0] * (h[0][0] * t[0] + h[0][1] * t[1]) + t[1] * (h[1][0] * t[0] + h[1][1] * t[1]);
                let prod = Quadratic::product_of_affine(&phi((i + 1) % 3), &phi((i + 2) % 3));
                p.axpy(-0.5 * g.edge_lengths[i].powi(2) * tht, &prod);
            }
            p
        }
        SpaceKind::CR | SpaceKind::ECR => {
            let (h11, h22, h12) = sym_parts(h);
            let mut p = ecr_bubble(1, g).scale(0.25 * (h11 - h22));
            p.axpy(h12, &ecr_bubble(2, g));
            if kind == SpaceKind::CR {
                let a = 0.5 * g.a_k;
                let coef = (a + g.h_k) / 144.0 * h11 + (g.h_k - a) / 144.0 * h22 + g.b_k / 36.0 * h12;
                let s = -36.0 / g.h_k;
                let phi3 = Quadratic { center: c, c: [2.0, 0.0, 0.0, s, 0.0, s] };
                p.axpy(-coef, &phi3);
            }
            p
        }
    }
}

fn same_mesh(u: &DiscreteField, g: &RecoveredGradient) -> Result<()> {
    let (a, b) = (&u.space.mesh, &g.mesh);
    if Arc::ptr_eq(a, b) || (a.vertices() == b.vertices() && a.triangles() == b.triangles()) {
        Ok(())
    } else {
        Err(Error::InvalidMesh("recovered gradient lives on a different mesh".into()))
    }
}

/// `‖g - ∇_h u‖²_{0,Ω}`.
pub fn gradient_defect(u: &DiscreteField, g: &RecoveredGradient) -> Result<f64> {
    same_mesh(u, g)?;
    let rule = TriangleRule::degree4();
    let mesh = &u.space.mesh;
    Ok((0..mesh.num_triangles())
        .map(|k| {
            let geo = mesh.geometry(k);
            let q = u.local(k);
            rule.integrate(&geo.vertices, geo.area, |x| {
                let (a, b) = (g.value(k, x), q.gradient(x));
                (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
            })
        })
        .sum())
}

fn nonconforming(u: &DiscreteField) -> Result<SpaceKind> {
    match u.kind() {
        SpaceKind::P1 => Err(Error::Unsupported("expected a CR or ECR field".into())),
        k => Ok(k),
    }
}

/// First-type estimate: defect minus `2λ Σ_K ∫_K P(∇g) u`.
pub fn estimate_type1(lambda: f64, u: &DiscreteField, g: &RecoveredGradient) -> Result<f64> {
    let kind = nonconforming(u)?;
    let defect = gradient_defect(u, g)?;
    let rule = TriangleRule::degree4();
    let mesh = &u.space.mesh;
    let mut vol = 0.0;
    for k in 0..mesh.num_triangles() {
        let geo = mesh.geometry(k);
        let p = p_polynomial(kind, geo, &g.hessian(k));
        let q = u.local(k);
        vol += rule.integrate(&geo.vertices, geo.area, |x| p.value(x) * q.value(x));
    }
    Ok(defect - 2.0 * lambda * vol)
}

/// Second-type estimate, using the conforming P1 interpolation error.
pub fn estimate_type2(lambda: f64, u: &DiscreteField, g: &RecoveredGradient) -> Result<f64> {
    nonconforming(u)?;
    let defect = gradient_defect(u, g)?;
    let mesh = &u.space.mesh;
    let local: Vec<Quadratic> = (0..mesh.num_triangles()).map(|k| u.local(k)).collect();
    let p: Vec<Quadratic> =
        (0..mesh.num_triangles()).map(|k| p_polynomial(SpaceKind::P1, mesh.geometry(k), &g.hessian(k))).collect();
    let (s, w) = edge_gauss3();
    let mut edge = 0.0;
    for (id, e) in mesh.edges().iter().enumerate() {
        let Some(k2) = e.k2 else { continue };
        let k1 = e.k1;
        let n = mesh.edge_normal(id);
        let (a, b) = mesh.edge_points(id);
        let len = mesh.edge_length(id);
        for (si, wi) in s.iter().zip(w) {
            let x = [a[0] + si * (b[0] - a[0]), a[1] + si * (b[1] - a[1])];
            let avg = 0.5 * (p[k1].value(x) + p[k2].value(x));
            let (d1, d2) = (local[k1].gradient(x), local[k2].gradient(x));
            let jump = (d1[0] - d2[0]) * n[0] + (d1[1] - d2[1]) * n[1];
            edge += wi * len * avg * jump;
        }
    }
    let rule = TriangleRule::degree4();
    let mut vol = 0.0;
    for k in 0..mesh.num_triangles() {
        let geo = mesh.geometry(k);
        let q = &local[k];
        let lap = q.laplacian();
        vol += rule.integrate(&geo.vertices, geo.area, |x| p[k].value(x) * (lap + lambda * q.value(x)));
    }
    Ok(defect + 2.0 * edge - 2.0 * vol)
}

/// `‖g - ∇u‖²` for a conforming field.
pub fn estimate_conforming(u: &DiscreteField, g: &RecoveredGradient) -> Result<f64> {
    if u.kind() != SpaceKind::P1 {
        return Err(Error::Unsupported("expected a conforming P1 field".into()));
    }
    gradient_defect(u, g)
}

/// Vertex averaging of a CR field into P1, normalized, with its Rayleigh quotient.
pub fn average_projection(u: &DiscreteField, p1: &Arc<Space>) -> Result<(DiscreteField, f64)> {
    if u.kind() != SpaceKind::CR || p1.kind != SpaceKind::P1 {
        return Err(Error::Unsupported("average projection maps CR to P1".into()));
    }
    let mesh = &u.space.mesh;
    let mut sum = vec![0.0; mesh.num_vertices()];
    let mut count = vec![0usize; mesh.num_vertices()];
    for (k, t) in mesh.triangles().iter().enumerate() {
        let q = u.local(k);
        for &v in t {
            sum[v] += q.value(mesh.vertices()[v]);
            count[v] += 1;
        }
    }
    let dirichlet = mesh.dirichlet_vertices();
    let coeffs = (0..sum.len()).map(|v| if dirichlet[v] { 0.0 } else { sum[v] / count[v] as f64 }).collect();
    let f = DiscreteField::new(p1.clone(), coeffs);
    let norm = f.l2_norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let f = f.scaled(1.0 / norm);
    let e = f.energy_norm();
    Ok((f, e * e))
}

/// Whether a base eigenvalue bounds from below or above.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

pub fn recovered_eigenvalue(bound: Bound, lambda: f64, f: f64) -> f64 {
    match bound {
        Bound::Lower => lambda + f,
        Bound::Upper => lambda - f,
    }
}

/// Weights `(w_up, w_low)`: the upper bound is weighted by the lower bound's estimate.
pub fn combined_weights(f_low: f64, f_up: f64) -> Result<(f64, f64)> {
    let d = f_low + f_up;
    if d == 0.0 || !d.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok((f_low / d, f_up / d))
}

pub fn combined_eigenvalue(lambda_low: f64, f_low: f64, lambda_up: f64, f_up: f64) -> Result<f64> {
    let (wu, wl) = combined_weights(f_low, f_up)?;
    Ok(wu * lambda_up + wl * lambda_low)
}

pub fn extrapolate(lambda_h: f64, lambda_2h: f64) -> f64 {
    (4.0 * lambda_h - lambda_2h) / 3.0
}

/// `∫_Ω a b` for two fields on the same mesh.
pub fn l2_inner(a: &DiscreteField, b: &DiscreteField) -> f64 {
    let rule = TriangleRule::degree4();
    let mesh = &a.space.mesh;
    (0..mesh.num_triangles())
        .map(|k| {
            let g = mesh.geometry(k);
            let (p, q) = (a.local(k), b.local(k));
            rule.integrate(&g.vertices, g.area, |x| p.value(x) * q.value(x))
        })
        .sum()
}

const COLLINEAR: f64 = 0.9;

/// The field among `candidates` that represents the same eigenfunction as
/// `base` (index `j`), sign-aligned with `base`. Without a clear match
/// the span of candidates `j-2..=j+2` is used.
pub fn match_field(base: &DiscreteField, candidates: &[DiscreteField], j: usize) -> Result<DiscreteField> {
    if candidates.is_empty() {
        return Err(Error::MissingQuantity("no candidate eigenfunctions".into()));
    }
    let lo = j.saturating_sub(2);
    let hi = (j + 2).min(candidates.len() - 1);
    let inner: Vec<f64> = (lo..=hi).map(|i| l2_inner(base, &candidates[i])).collect();
    let (best, &ip) = inner.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
    if ip.abs() > COLLINEAR {
        return Ok(candidates[lo + best].scaled(ip.signum()));
    }
    let mut coeffs = vec![0.0; candidates[0].coeffs.len()];
    for (i, c) in inner.iter().enumerate() {
        for (a, b) in coeffs.iter_mut().zip(&candidates[lo + i].coeffs) {
            *a += c * b;
        }
    }
    let f = DiscreteField::new(candidates[0].space.clone(), coeffs);
    let n = f.l2_norm();
    if !(n > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(f.scaled(1.0 / n))
}

/// Base eigenvalue tags.
pub const LAMBDA_TAGS: [&str; 4] = ["lambda_CR", "lambda_ECR", "lambda_P1", "lambda_P1star"];

/// Estimator tags with their base eigenvalue.
pub const ESTIMATOR_TAGS: [(&str, &str); 14] = [
    ("F_CR1_CR", "lambda_CR"),
    ("F_CR2_CR", "lambda_CR"),
    ("F_CR1_P1", "lambda_CR"),
    ("F_CR2_P1", "lambda_CR"),
    ("F_CR1_P1star", "lambda_CR"),
    ("F_CR2_P1star", "lambda_CR"),
    ("F_ECR1_ECR", "lambda_ECR"),
    ("F_ECR2_ECR", "lambda_ECR"),
    ("F_P1_CR", "lambda_P1"),
    ("F_P1_P1", "lambda_P1"),
    ("F_P1_P1star", "lambda_P1"),
    ("F_P1star_CR", "lambda_P1star"),
    ("F_P1star_P1", "lambda_P1star"),
    ("F_P1star_P1star", "lambda_P1star"),
];

fn bound_of(base: &str) -> Bound {
    match base {
        "lambda_CR" | "lambda_ECR" => Bound::Lower,
        _ => Bound::Upper,
    }
}

/// Tag of the combined eigenvalue with upper bound `up` (`P1` or `P1star`),
/// lower-bound gradient, upper-bound gradient and estimator type.
pub fn combined_tag(up: &str, lowgrad: &str, upgrad: &str, ty: u8) -> String {
    format!("C_{up}_{lowgrad}_{upgrad}_{ty}")
}

/// All combined eigenvalues as `(tag, F_low tag, upper λ tag, F_up tag)`.
pub fn combined_definitions() -> Vec<(String, String, String, String)> {
    let mut v = Vec::new();
    for (up, upgrads) in [("P1", &["CR", "P1"][..]), ("P1star", &["CR", "P1", "P1star"][..])] {
        for ty in [1u8, 2] {
            for lowgrad in ["CR", "P1"] {
                for upgrad in upgrads {
                    v.push((
                        combined_tag(up, lowgrad, upgrad, ty),
                        format!("F_CR{ty}_{lowgrad}"),
                        format!("lambda_{up}"),
                        format!("F_{up}_{upgrad}"),
                    ));
                }
            }
        }
    }
    v
}

/// Quantities for one eigenvalue index on one mesh, in insertion order.
#[derive(Clone, Debug, Default)]
pub struct EigenRecord {
    pub index: usize,
    pub quantities: Vec<(String, f64)>,
}

impl EigenRecord {
    pub fn get(&self, tag: &str) -> Option<f64> {
        self.quantities.iter().find(|(t, _)| t == tag).map(|(_, v)| *v)
    }

    pub fn require(&self, tag: &str) -> Result<f64> {
        self.get(tag).ok_or_else(|| Error::MissingQuantity(tag.to_string()))
    }

    fn push(&mut self, tag: impl Into<String>, v: f64) {
        self.quantities.push((tag.into(), v));
    }

    /// Recovered eigenvalue for a base tag and estimator tag.
    pub fn recovered(&self, base: &str, estimator: &str) -> Result<f64> {
        let ok = ESTIMATOR_TAGS.iter().any(|(f, b)| *f == estimator && *b == base);
        if !ok {
            return Err(Error::TagMismatch { base: base.into(), estimator: estimator.into() });
        }
        Ok(recovered_eigenvalue(bound_of(base), self.require(base)?, self.require(estimator)?))
    }
}

/// Recovered tag for an estimator tag: `F_X` becomes `R_X`.
pub fn recovered_tag(estimator: &str) -> String {
    format!("R_{}", &estimator[2..])
}

/// Everything computed on one mesh.
#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub level: usize,
    pub h: f64,
    pub ndof: BTreeMap<SpaceKind, usize>,
    pub records: Vec<EigenRecord>,
}

/// Eigenpairs per space on one mesh, with a few spare modes for matching.
pub struct LevelSolution {
    pub mesh: Arc<Mesh>,
    pub nev: usize,
    pub modes: BTreeMap<SpaceKind, Vec<Mode>>,
}

const SPARE: usize = 2;

impl LevelSolution {
    pub fn solve(mesh: Arc<Mesh>, elements: &[SpaceKind], nev: usize, opts: &EigenOptions) -> Result<Self> {
        let mut modes = BTreeMap::new();
        for &kind in elements {
            let space = Space::new(kind, mesh.clone());
            let n = space.dofs.num_free();
            let want = (nev + SPARE).min(n);
            if want < nev {
                return Err(Error::TooManyEigenpairs { nev, n });
            }
            modes.insert(kind, solve_space(&space, want, opts)?);
        }
        Ok(Self { mesh, nev, modes })
    }

    fn fields(&self, kind: SpaceKind) -> Option<Vec<DiscreteField>> {
        self.modes.get(&kind).map(|m| m.iter().map(|m| m.u.clone()).collect())
    }
}

impl EstimateReport {
    pub fn compute(sol: &LevelSolution) -> Result<Self> {
        let mesh = &sol.mesh;
        let cr = sol.modes.get(&SpaceKind::CR);
        let ecr = sol.modes.get(&SpaceKind::ECR);
        let p1 = sol.modes.get(&SpaceKind::P1);
        let cr_fields = sol.fields(SpaceKind::CR);
        let p1_fields = sol.fields(SpaceKind::P1);
        let p1_space = Space::new(SpaceKind::P1, mesh.clone());

        // P1* from every CR mode, including spares, for matching
        let star: Option<Vec<(DiscreteField, f64)>> = match cr {
            Some(cr) => Some(cr.iter().map(|m| average_projection(&m.u, &p1_space)).collect::<Result<_>>()?),
            None => None,
        };
        let star_fields: Option<Vec<DiscreteField>> = star.as_ref().map(|s| s.iter().map(|(f, _)| f.clone()).collect());

        let mut records = Vec::with_capacity(sol.nev);
        for j in 0..sol.nev {
            let mut r = EigenRecord { index: j + 1, ..Default::default() };
            let mut fs: Vec<(&str, f64)> = Vec::new();
            if let Some(cr) = cr {
                r.push("lambda_CR", cr[j].value);
            }
            if let Some(ecr) = ecr {
                r.push("lambda_ECR", ecr[j].value);
            }
            if let Some(p1) = p1 {
                r.push("lambda_P1", p1[j].value);
            }
            if let Some(star) = &star {
                r.push("lambda_P1star", star[j].1);
            }
            if let Some(cr) = cr {
                let u = &cr[j].u;
                let l = cr[j].value;
                let kh = recover_kh(u)?;
                fs.push(("F_CR1_CR", estimate_type1(l, u, &kh)?));
                fs.push(("F_CR2_CR", estimate_type2(l, u, &kh)?));
                if let Some(p1f) = &p1_fields {
                    let g = recover_ppr(&match_field(u, p1f, j)?, Provenance::PprP1)?;
                    fs.push(("F_CR1_P1", estimate_type1(l, u, &g)?));
                    fs.push(("F_CR2_P1", estimate_type2(l, u, &g)?));
                }
                let sf = star_fields.as_ref().unwrap();
                let g = recover_ppr(&sf[j], Provenance::PprP1Star)?;
                fs.push(("F_CR1_P1star", estimate_type1(l, u, &g)?));
                fs.push(("F_CR2_P1star", estimate_type2(l, u, &g)?));
            }
            if let Some(ecr) = ecr {
                let u = &ecr[j].u;
                let kh = recover_kh(u)?;
                fs.push(("F_ECR1_ECR", estimate_type1(ecr[j].value, u, &kh)?));
                fs.push(("F_ECR2_ECR", estimate_type2(ecr[j].value, u, &kh)?));
            }
            if let Some(p1) = p1 {
                let u = &p1[j].u;
                if let Some(crf) = &cr_fields {
                    let g = recover_kh(&match_field(u, crf, j)?)?;
                    fs.push(("F_P1_CR", estimate_conforming(u, &g)?));
                }
                fs.push(("F_P1_P1", estimate_conforming(u, &recover_ppr(u, Provenance::PprP1)?)?));
                if let Some(sf) = &star_fields {
                    let g = recover_ppr(&match_field(u, sf, j)?, Provenance::PprP1Star)?;
                    fs.push(("F_P1_P1star", estimate_conforming(u, &g)?));
                }
            }
            if let Some(sf) = &star_fields {
                let u = &sf[j];
                let crf = cr_fields.as_ref().unwrap();
                fs.push(("F_P1star_CR", estimate_conforming(u, &recover_kh(&crf[j])?)?));
                if let Some(p1f) = &p1_fields {
                    let g = recover_ppr(&match_field(u, p1f, j)?, Provenance::PprP1)?;
                    fs.push(("F_P1star_P1", estimate_conforming(u, &g)?));
                }
                fs.push(("F_P1star_P1star", estimate_conforming(u, &recover_ppr(u, Provenance::PprP1Star)?)?));
            }
            for (t, v) in &fs {
                r.push(*t, *v);
            }
            for (t, _) in &fs {
                let base = ESTIMATOR_TAGS.iter().find(|(f, _)| f == t).unwrap().1;
                let v = r.recovered(base, t)?;
                r.push(recovered_tag(t), v);
            }
            for (tag, flow, up, fup) in combined_definitions() {
                let (Some(fl), Some(lu), Some(fu), Some(ll)) =
                    (r.get(&flow), r.get(&up), r.get(&fup), r.get("lambda_CR"))
                else {
                    continue;
                };
                let v = combined_eigenvalue(ll, fl, lu, fu).unwrap_or(0.5 * (ll + lu));
                r.push(tag, v);
            }
            records.push(r);
        }
        let ndof =
            sol.modes.iter().map(|(k, m)| (*k, m.first().map(|m| m.u.space.dofs.num_free()).unwrap_or(0))).collect();
        Ok(Self { level: mesh.level(), h: mesh.h(), ndof, records })
    }

    /// DOF count of the space a tag is computed in.
    pub fn ndof_for(&self, tag: &str) -> usize {
        let kind = if tag.contains("ECR") {
            SpaceKind::ECR
        } else if tag.starts_with("lambda_P1") || tag.starts_with("F_P1") || tag.starts_with("R_P1") || tag == "EXP_P1"
        {
            SpaceKind::P1
        } else {
            SpaceKind::CR
        };
        self.ndof.get(&kind).copied().unwrap_or(0)
    }
}
