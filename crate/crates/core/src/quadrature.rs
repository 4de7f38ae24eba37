//! Quadrature on triangles (barycentric rules) and on segments.

use crate::mesh::Point;

/// Barycentric nodes `(λ0, λ1, λ2)` with weights summing to one.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Edge-midpoint rule, exact for degree 2.
    pub fn degree2() -> Self {
        Self { points: vec![[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]], weights: vec![1.0 / 3.0; 3] }
    }

    /// Six-point symmetric rule, exact for degree 4.
    pub fn degree4() -> Self {
        let (a, wa) = (0.445_948_490_915_964_886, 0.223_381_589_678_011_466);
        let (b, wb) = (0.091_576_213_509_770_743, 0.109_951_743_655_321_867);
        let (a2, b2) = (1.0 - 2.0 * a, 1.0 - 2.0 * b);
        Self {
            points: vec![[a2, a, a], [a, a2, a], [a, a, a2], [b2, b, b], [b, b2, b], [b, b, b2]],
            weights: vec![wa, wa, wa, wb, wb, wb],
        }
    }

    /// Collapsed Gauss–Legendre product rule with `n²` points, exact for degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let s = 0.5 * (x[i] + 1.0);
            for j in 0..n {
                let t = 0.5 * (x[j] + 1.0);
                // Duffy map from the unit square.
                let l1 = s;
                let l2 = (1.0 - s) * t;
                points.push([1.0 - l1 - l2, l1, l2]);
                // reference triangle has area 1/2; weights are relative to area.
                weights.push(0.25 * w[i] * w[j] * (1.0 - s) * 2.0);
            }
        }
        Self { points, weights }
    }

    /// `∫_K f` for a triangle with vertices `v`.
    pub fn integrate<F: FnMut(Point) -> f64>(&self, v: &[Point; 3], area: f64, mut f: F) -> f64 {
        let mut s = 0.0;
        for (l, w) in self.points.iter().zip(&self.weights) {
            s += w * f(bary_to_point(v, l));
        }
        s * area
    }
}

pub fn bary_to_point(v: &[Point; 3], l: &[f64; 3]) -> Point {
    [l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]]
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Three-point Gauss rule on a segment, parameters in `[0, 1]`, weights sum to one.
pub fn edge_gauss3() -> ([f64; 3], [f64; 3]) {
    let a = 0.5 * (0.6f64).sqrt();
    ([0.5 - a, 0.5, 0.5 + a], [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
}

/// `∫_e f` over the segment `a → b`.
pub fn integrate_edge<F: FnMut(Point) -> f64>(a: Point, b: Point, mut f: F) -> f64 {
    let (t, w) = edge_gauss3();
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut s = 0.0;
    for k in 0..3 {
        let x = [a[0] + t[k] * (b[0] - a[0]), a[1] + t[k] * (b[1] - a[1])];
        s += w[k] * f(x);
    }
    s * len
}
