mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use nceig::adaptivity::mark;
use nceig::estimators::{
    average_projection, combined_eigenvalue, combined_weights, estimate_type2, extrapolate, p_polynomial,
};
use nceig::experiment::{
    mesh_at_level, parse_reference_file, run_uniform, triangle_mode, triangle_mode_derivatives, triangle_mode_norm,
    verify_triangle_geometry, ExperimentConfig, ReferenceMode,
};
use nceig::recovery::{recover_kh, recover_kh_piecewise, Provenance};
use nceig::spaces::interpolate;
use nceig::{DiscreteField, Domain, ElementGeometry, Mesh, Space, SpaceKind};

fn kind_strategy() -> impl Strategy<Value = SpaceKind> {
    prop_oneof![Just(SpaceKind::P1), Just(SpaceKind::CR), Just(SpaceKind::ECR)]
}

proptest! {
    #[test]
    fn interpolation_error_is_the_p_polynomial(seed in any::<u64>(), kind in kind_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_triangle(&mut rng);
        let w = Quad::random(&mut rng);
        let hess = w.hessian();
        let g = ElementGeometry::new(0, t).unwrap();
        let pi = interpolant(kind, &t, &|x| w.eval(x));
        let p = p_polynomial(kind, &g, &hess);
        let scale = hess.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())) * diameter(&t).powi(2);
        for x in sample_points(&t) {
            prop_assert!((w.eval(x) - pi(x) - p.value(x)).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn nonconforming_interpolants_commute_with_gradient(seed in any::<u64>(), ecr in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_triangle(&mut rng);
        let w = Quad::random(&mut rng);
        let kind = if ecr { SpaceKind::ECR } else { SpaceKind::CR };
        let gp = interpolant_grad(kind, &t, &|x| w.eval(x));
        for dir in [[1.0, 0.0], [0.0, 1.0]] {
            let r = area(&t) * element_mean(&|x| {
                let (a, b) = (w.grad(x), gp(x));
                (a[0] - b[0]) * dir[0] + (a[1] - b[1]) * dir[1]
            }, &t);
            prop_assert!(r.abs() <= 1e-12);
        }
    }

    #[test]
    fn marking_shrinks_as_theta_grows(eta in prop::collection::vec(0.0f64..10.0, 1..60), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (m_lo, m_hi) = (mark(&eta, lo), mark(&eta, hi));
        prop_assert!(m_hi.iter().all(|k| m_lo.contains(k)));
        let max = eta.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 && hi < 1.0 {
            let arg = eta.iter().position(|&v| v == max).unwrap();
            prop_assert!(m_hi.contains(&arg));
        }
    }

    #[test]
    fn combined_weights_are_convex(f_low in 1e-12f64..1.0, f_up in 1e-12f64..1.0, lo in 1.0f64..20.0, gap in 0.0f64..1.0) {
        let (wu, wl) = combined_weights(f_low, f_up).unwrap();
        prop_assert!((wu + wl - 1.0).abs() <= 1e-15);
        let up = lo + gap;
        let c = combined_eigenvalue(lo, f_low, up, f_up).unwrap();
        prop_assert!(c >= lo - 1e-12 && c <= up + 1e-12);
    }

    #[test]
    fn combined_eigenvalue_is_affine_equivariant(
        f_low in 1e-9f64..1.0, f_up in 1e-9f64..1.0, lo in 1.0f64..20.0, up in 1.0f64..20.0,
        s in 0.1f64..10.0, shift in -5.0f64..5.0, fs in 0.1f64..10.0,
    ) {
        let c = combined_eigenvalue(lo, f_low, up, f_up).unwrap();
        let c2 = combined_eigenvalue(s * lo + shift, fs * f_low, s * up + shift, fs * f_up).unwrap();
        prop_assert!((c2 - (s * c + shift)).abs() <= 1e-11 * (1.0 + c2.abs()));
    }

    #[test]
    fn extrapolation_removes_second_order_term(l in 1.0f64..100.0, c in -10.0f64..10.0) {
        prop_assert!((extrapolate(l, l) - l).abs() <= 1e-13 * l);
        prop_assert!((extrapolate(l + c / 4.0, l + c) - l).abs() <= 1e-12 * (l + c.abs()));
    }

    #[test]
    fn reference_file_round_trips(map in prop::collection::btree_map(1usize..50, -1e6f64..1e6, 0..10), comment in any::<bool>()) {
        let mut text = String::new();
        if comment {
            text.push_str("# computed on a fine mesh\n\n");
        }
        for (i, v) in &map {
            text.push_str(&format!("{i} {v:e}\n"));
        }
        prop_assert_eq!(parse_reference_file(&text).unwrap(), map);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kh_reproduces_affine_gradients(c in prop::array::uniform6(-3.0f64..3.0), lshape in any::<bool>()) {
        let w = Quad(c);
        let domain = if lshape { Domain::LShape } else { Domain::Square };
        let mesh = Arc::new(mesh_at_level(domain, 3));
        let g = recover_kh_piecewise(&mesh, &|_, x| w.grad(x), Provenance::Custom).unwrap();
        for k in 0..mesh.num_triangles() {
            for (i, &e) in mesh.triangle_edges(k).iter().enumerate() {
                let (got, want) = (g.midpoint_values(k)[i], w.grad(mesh.edge_midpoint(e)));
                prop_assert!((got[0] - want[0]).abs() + (got[1] - want[1]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn type2_estimate_ignores_triangle_labels(c in prop::array::uniform6(-3.0f64..3.0), lambda in 1.0f64..50.0) {
        let m = mesh_at_level(Domain::Square, 3);
        let mut tris = m.triangles().to_vec();
        tris.reverse();
        let r = Mesh::new(m.vertices().to_vec(), tris, &m.boundary_labels(), m.level()).unwrap();
        let w = Quad(c);
        let f = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin() * (1.0 + x[0] * x[1]);
        let est = |mesh: Mesh| {
            let mesh = Arc::new(mesh);
            let u = interpolate(&Space::new(SpaceKind::CR, mesh.clone()), &f);
            let g = recover_kh_piecewise(&mesh, &|_, x| w.grad(x), Provenance::Custom).unwrap();
            estimate_type2(lambda, &u, &g).unwrap()
        };
        let (a, b) = (est(m), est(r));
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()));
    }

    #[test]
    fn cr_fields_satisfy_elementwise_green_identity(seed in any::<u64>()) {
        let mesh = Arc::new(mesh_at_level(Domain::Square, 3));
        let space = Space::new(SpaceKind::CR, mesh.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reduced: Vec<f64> = (0..space.dofs.num_free()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let u = DiscreteField::from_free(space, &reduced);
        let w = |x: [f64; 2]| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
        let gw = |x: [f64; 2]| [(1.0 - 2.0 * x[0]) * x[1] * (1.0 - x[1]), x[0] * (1.0 - x[0]) * (1.0 - 2.0 * x[1])];
        let mut lhs = 0.0;
        for k in 0..mesh.num_triangles() {
            let t = mesh.geometry(k).vertices;
            let gu = u.gradient(k, t[0]);
            lhs += area(&t) * element_mean(&|x| { let g = gw(x); gu[0] * g[0] + gu[1] * g[1] }, &t);
        }
        let mut rhs = 0.0;
        for (id, e) in mesh.edges().iter().enumerate() {
            let Some(k2) = e.k2 else { continue };
            let (a, b) = mesh.edge_points(id);
            let n = mesh.edge_normal(id);
            let (g1, g2) = (u.gradient(e.k1, a), u.gradient(k2, a));
            let jump = (g1[0] - g2[0]) * n[0] + (g1[1] - g2[1]) * n[1];
            rhs += mesh.edge_length(id) * edge_mean(&w, a, b) * jump;
        }
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
    }

    #[test]
    fn average_projection_keeps_continuous_fields(seed in any::<u64>()) {
        let mesh = Arc::new(mesh_at_level(Domain::Square, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dirichlet = mesh.dirichlet_vertices();
        let vals: Vec<f64> = dirichlet.iter().map(|&d| if d { 0.0 } else { rand::Rng::random_range(&mut rng, -1.0..1.0) }).collect();
        // an edge mean of a piecewise linear function is the mean of its endpoint values
        let coeffs: Vec<f64> = mesh.edges().iter().map(|e| 0.5 * (vals[e.vertices[0]] + vals[e.vertices[1]])).collect();
        let u = DiscreteField::new(Space::new(SpaceKind::CR, mesh.clone()), coeffs);
        let (p, _) = average_projection(&u, &Space::new(SpaceKind::P1, mesh.clone())).unwrap();
        let norm = DiscreteField::new(p.space.clone(), vals.clone()).l2_norm();
        for (v, want) in vals.iter().enumerate() {
            prop_assert!((p.coeffs[v] - want / norm).abs() <= 1e-12 / norm);
        }
    }
}

#[test]
fn average_projection_rayleigh_quotient_bounds_from_above() {
    let mesh = Arc::new(mesh_at_level(Domain::Square, 4));
    let cr = Space::new(SpaceKind::CR, mesh.clone());
    let modes = nceig::eigensolve::solve_space(&cr, 1, &Default::default()).unwrap();
    let (_, lambda) = average_projection(&modes[0].u, &Space::new(SpaceKind::P1, mesh)).unwrap();
    assert!(lambda > 2.0 * PI * PI);
}

#[test]
fn kh_of_the_square_eigenfunction_superconverges_at_midpoints() {
    let mut errs = Vec::new();
    for level in 3..=5 {
        let mesh = Arc::new(mesh_at_level(Domain::Square, level));
        let s = Space::new(SpaceKind::CR, mesh.clone());
        let exact = |x: [f64; 2]| 2.0 * (PI * x[0]).sin() * (PI * x[1]).sin();
        let u = interpolate(&s, &exact);
        let g = recover_kh(&u).unwrap();
        let mut worst = 0.0f64;
        for (id, e) in mesh.edges().iter().enumerate() {
            if e.k2.is_none() {
                continue;
            }
            let x = mesh.edge_midpoint(id);
            let want =
                [2.0 * PI * (PI * x[0]).cos() * (PI * x[1]).sin(), 2.0 * PI * (PI * x[0]).sin() * (PI * x[1]).cos()];
            let i = mesh.local_edge_index(e.k1, id).unwrap();
            let got = g.midpoint_values(e.k1)[i];
            worst = worst.max((got[0] - want[0]).abs().max((got[1] - want[1]).abs()));
        }
        errs.push((mesh.h(), worst));
    }
    assert!(slope(&errs) > 1.8, "{errs:?}");
}

/// Splits a triangle into `4^depth` congruent pieces.
fn subdivide(t: Tri, depth: u32) -> Vec<Tri> {
    if depth == 0 {
        return vec![t];
    }
    let m = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let (a, b, c) = (m(t[0], t[1]), m(t[1], t[2]), m(t[2], t[0]));
    [[t[0], a, c], [a, t[1], b], [c, b, t[2]], [a, b, c]].into_iter().flat_map(|s| subdivide(s, depth - 1)).collect()
}

#[test]
fn triangle_eigenfunction_is_normalized_and_solves_the_pde() {
    let (chosen, _) = verify_triangle_geometry().unwrap();
    let t = chosen.candidate.vertices;
    let pieces = subdivide(t, 6);
    let norm2: f64 = pieces.iter().map(|p| area(p) * element_mean(&|x| triangle_mode(x).powi(2), p)).sum();
    assert!((norm2.sqrt() - 1.0).abs() < 1e-6, "{}", norm2.sqrt());
    assert!((triangle_mode_norm(&t) - 1.0).abs() < 1e-12);

    let lambda = 16.0 * PI * PI / 3.0;
    let h = 1e-2;
    // sixth-order central second difference
    let d2 = |f: &dyn Fn(f64) -> f64| {
        (2.0 * f(3.0 * h) - 27.0 * f(2.0 * h) + 270.0 * f(h) - 490.0 * f(0.0) + 270.0 * f(-h) - 27.0 * f(-2.0 * h)
            + 2.0 * f(-3.0 * h))
            / (180.0 * h * h)
    };
    let mut umax = 0.0f64;
    let mut worst = 0.0f64;
    for p in &pieces {
        let x = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let lap = d2(&|s| triangle_mode([x[0] + s, x[1]])) + d2(&|s| triangle_mode([x[0], x[1] + s]));
        umax = umax.max(triangle_mode(x).abs());
        worst = worst.max((lap + lambda * triangle_mode(x)).abs());
        assert!((triangle_mode_derivatives(x).1 - lap).abs() < 1e-6 * lambda);
    }
    assert!(worst / (lambda * umax) < 1e-8, "{worst}");
    for i in 0..3 {
        let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
        for s in [0.1, 0.35, 0.5, 0.8] {
            let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            assert!(triangle_mode(x).abs() < 1e-12 || chosen.candidate.neumann.contains(&i));
        }
    }
}

#[test]
fn uniform_runs_are_deterministic() {
    let cfg = ExperimentConfig {
        domain: Domain::Square,
        elements: vec![SpaceKind::CR, SpaceKind::P1],
        levels: (2, 3),
        nev: 2,
        reference: Some(ReferenceMode::Exact),
        ..Default::default()
    };
    let a = run_uniform(&cfg).unwrap().to_csv();
    let b = run_uniform(&cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with(nceig::experiment::CSV_HEADER));
}

#[test]
fn exact_square_references() {
    let r: BTreeMap<usize, f64> = nceig::experiment::exact_eigenvalues(Domain::Square, 4);
    let want = [2.0, 5.0, 5.0, 8.0];
    for (i, w) in want.iter().enumerate() {
        assert!((r[&(i + 1)] - w * PI * PI).abs() < 1e-12);
    }
}
