//! Oracles shared by the integration tests. Nothing here calls the
//! library's interpolation, quadrature or eigensolver code.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector3, Vector4};
use rand::Rng;

use nceig::{Point, SpaceKind};

pub type Tri = [Point; 3];

pub fn area(t: &Tri) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

pub fn diameter(t: &Tri) -> f64 {
    (0..3)
        .map(|i| {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn min_angle(t: &Tri) -> f64 {
    (0..3)
        .map(|i| {
            let (a, b, c) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let cos = (u[0] * v[0] + u[1] * v[1]) / ((u[0].hypot(u[1])) * (v[0].hypot(v[1])));
            cos.clamp(-1.0, 1.0).acos()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Counter-clockwise triangle with all angles above 15 degrees, diameter
/// between 0.05 and 2.
pub fn random_triangle<R: Rng>(rng: &mut R) -> Tri {
    loop {
        let s: f64 = 10f64.powf(rng.random_range(-1.3..0.3));
        let o = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let mut t: Tri = [[0.0; 2]; 3];
        for p in &mut t {
            *p = [o[0] + s * rng.random_range(-1.0..1.0), o[1] + s * rng.random_range(-1.0..1.0)];
        }
        if area(&t) < 0.0 {
            t.swap(1, 2);
        }
        if min_angle(&t) > 15f64.to_radians() {
            return t;
        }
    }
}

/// `w(x) = c0 + c1 x + c2 y + c3 x² + c4 xy + c5 y²`.
#[derive(Clone, Copy, Debug)]
pub struct Quad(pub [f64; 6]);

impl Quad {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut c = [0.0; 6];
        for v in &mut c {
            *v = rng.random_range(-3.0..3.0);
        }
        Quad(c)
    }

    pub fn eval(&self, x: Point) -> f64 {
        let c = &self.0;
        c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1]
    }

    pub fn grad(&self, x: Point) -> [f64; 2] {
        let c = &self.0;
        [c[1] + 2.0 * c[3] * x[0] + c[4] * x[1], c[2] + c[4] * x[0] + 2.0 * c[5] * x[1]]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let c = &self.0;
        [[2.0 * c[3], c[4]], [c[4], 2.0 * c[5]]]
    }
}

fn mid(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Simpson's rule, exact for quadratics.
pub fn edge_mean(f: &dyn Fn(Point) -> f64, a: Point, b: Point) -> f64 {
    (f(a) + 4.0 * f(mid(a, b)) + f(b)) / 6.0
}

/// Edge-midpoint rule, exact for quadratics.
pub fn element_mean(f: &dyn Fn(Point) -> f64, t: &Tri) -> f64 {
    (f(mid(t[0], t[1])) + f(mid(t[1], t[2])) + f(mid(t[2], t[0]))) / 3.0
}

/// Canonical interpolant by solving the DOF equations on monomials. Edge `i`
/// is opposite vertex `i`. Coefficients in the centred basis {1, x-c, y-c, |x-c|^2}.
pub fn interpolant_coeffs(kind: SpaceKind, t: &Tri, w: &dyn Fn(Point) -> f64) -> (Point, [f64; 4]) {
    let c = [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
    let edges = |i: usize| (t[(i + 1) % 3], t[(i + 2) % 3]);
    match kind {
        SpaceKind::P1 | SpaceKind::CR => {
            let mut m = Matrix3::zeros();
            let mut r = Vector3::zeros();
            for i in 0..3 {
                let p = if kind == SpaceKind::P1 {
                    r[i] = w(t[i]);
                    t[i]
                } else {
                    let (a, b) = edges(i);
                    r[i] = edge_mean(w, a, b);
                    mid(a, b)
                };
                m[(i, 0)] = 1.0;
                m[(i, 1)] = p[0] - c[0];
                m[(i, 2)] = p[1] - c[1];
            }
            let s = m.lu().solve(&r).expect("unisolvent");
            (c, [s[0], s[1], s[2], 0.0])
        }
        SpaceKind::ECR => {
            let mono: [Box<dyn Fn(Point) -> f64>; 4] = [
                Box::new(|_| 1.0),
                Box::new(move |x| x[0] - c[0]),
                Box::new(move |x| x[1] - c[1]),
                Box::new(move |x| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)),
            ];
            let mut m = Matrix4::zeros();
            let mut r = Vector4::zeros();
            for i in 0..3 {
                let (a, b) = edges(i);
                r[i] = edge_mean(w, a, b);
                for j in 0..4 {
                    m[(i, j)] = edge_mean(&mono[j], a, b);
                }
            }
            r[3] = element_mean(w, t);
            for j in 0..4 {
                m[(3, j)] = element_mean(&mono[j], t);
            }
            let s = m.lu().solve(&r).expect("unisolvent");
            (c, [s[0], s[1], s[2], s[3]])
        }
    }
}

pub fn interpolant(kind: SpaceKind, t: &Tri, w: &dyn Fn(Point) -> f64) -> Box<dyn Fn(Point) -> f64> {
    let (c, s) = interpolant_coeffs(kind, t, w);
    Box::new(move |x| {
        let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
        s[0] + s[1] * dx + s[2] * dy + s[3] * (dx * dx + dy * dy)
    })
}

pub fn interpolant_grad(kind: SpaceKind, t: &Tri, w: &dyn Fn(Point) -> f64) -> Box<dyn Fn(Point) -> [f64; 2]> {
    let (c, s) = interpolant_coeffs(kind, t, w);
    Box::new(move |x| [s[1] + 2.0 * s[3] * (x[0] - c[0]), s[2] + 2.0 * s[3] * (x[1] - c[1])])
}

/// Vertices, edge midpoints, centroid and interior points.
pub fn sample_points(t: &Tri) -> Vec<Point> {
    let bary = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [0.7, 0.2, 0.1],
        [0.1, 0.15, 0.75],
        [0.25, 0.6, 0.15],
    ];
    bary.iter()
        .map(|l| [l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0], l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1]])
        .collect()
}

/// All eigenvalues of `A x = λ B x` by Cholesky reduction and a symmetric
/// eigen-solve, ascending.
pub fn pencil_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let l = b.clone().cholesky().expect("B positive definite").l();
    let li = l.clone().try_inverse().expect("invertible");
    let c = &li * a * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut v: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Least-squares slope of `log|e|` against `log h`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(h, e)| (h.ln(), e.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Round to `n` significant digits.
pub fn sig(x: f64, n: i32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let e = x.abs().log10().floor() as i32;
    let f = 10f64.powi(n - 1 - e);
    (x * f).round() / f
}
