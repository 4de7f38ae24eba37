//! Quadratic polynomials in monomials centred at a point.
//!
//! Every local function in this crate (P1/CR/ECR shape functions, their
//! canonical interpolants, the Taylor-expansion polynomials) is at most
//! quadratic, so one representation is enough.

use crate::mesh::Point;

/// `c[0] + c[1] dx + c[2] dy + c[3] dx² + c[4] dx dy + c[5] dy²` with
/// `(dx, dy) = x - center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic {
    pub center: Point,
    pub c: [f64; 6],
}

impl Quadratic {
    pub fn zero(center: Point) -> Self {
        Self { center, c: [0.0; 6] }
    }

    pub fn constant(center: Point, v: f64) -> Self {
        let mut q = Self::zero(center);
        q.c[0] = v;
        q
    }

    /// Affine function `v0 + g · (x - center)`.
    pub fn affine(center: Point, v0: f64, g: [f64; 2]) -> Self {
        Self { center, c: [v0, g[0], g[1], 0.0, 0.0, 0.0] }
    }

    /// `(x - center)ᵀ H (x - center) / 2` for a symmetric part of `h`.
    pub fn from_hessian(center: Point, h: [[f64; 2]; 2]) -> Self {
        let off = 0.5 * (h[0][1] + h[1][0]);
        Self { center, c: [0.0, 0.0, 0.0, 0.5 * h[0][0], off, 0.5 * h[1][1]] }
    }

    #[inline]
    pub fn value(&self, x: Point) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let c = &self.c;
        c[0] + c[1] * dx + c[2] * dy + c[3] * dx * dx + c[4] * dx * dy + c[5] * dy * dy
    }

    #[inline]
    pub fn gradient(&self, x: Point) -> [f64; 2] {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        let c = &self.c;
        [c[1] + 2.0 * c[3] * dx + c[4] * dy, c[2] + c[4] * dx + 2.0 * c[5] * dy]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let c = &self.c;
        [[2.0 * c[3], c[4]], [c[4], 2.0 * c[5]]]
    }

    pub fn laplacian(&self) -> f64 {
        2.0 * (self.c[3] + self.c[5])
    }

    /// Same polynomial expanded about another centre.
    pub fn recenter(&self, center: Point) -> Self {
        let c = &self.c;
        let g = self.gradient(center);
        Self { center, c: [self.value(center), g[0], g[1], c[3], c[4], c[5]] }
    }

    /// Product of two affine functions (quadratic terms of the inputs are ignored,
    /// callers pass linear polynomials).
    pub fn product_of_affine(a: &Quadratic, b: &Quadratic) -> Self {
        debug_assert!(a.c[3..].iter().chain(&b.c[3..]).all(|v| *v == 0.0));
        let b = b.recenter(a.center);
        let (a0, a1, a2) = (a.c[0], a.c[1], a.c[2]);
        let (b0, b1, b2) = (b.c[0], b.c[1], b.c[2]);
        Self {
            center: a.center,
            c: [a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a2 * b0, a1 * b1, a1 * b2 + a2 * b1, a2 * b2],
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut q = *self;
        q.c.iter_mut().for_each(|v| *v *= s);
        q
    }

    /// `self + s * other`; both must share a centre.
    pub fn axpy(&mut self, s: f64, other: &Quadratic) {
        let other = if other.center == self.center { *other } else { other.recenter(self.center) };
        for (a, b) in self.c.iter_mut().zip(other.c) {
            *a += s * b;
        }
    }

    pub fn is_affine(&self) -> bool {
        self.c[3] == 0.0 && self.c[4] == 0.0 && self.c[5] == 0.0
    }
}

/// Scalar field with a gradient, evaluable in physical coordinates.
pub trait Field {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
}

impl Field for Quadratic {
    fn value(&self, x: Point) -> f64 {
        Quadratic::value(self, x)
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        Quadratic::gradient(self, x)
    }
}

/// A field built from a value closure and a gradient closure.
pub struct FnField<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> FnField<F, G>
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> [f64; 2],
{
    pub fn new(value: F, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<F, G> Field for FnField<F, G>
where
    F: Fn(Point) -> f64,
    G: Fn(Point) -> [f64; 2],
{
    fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: Point) -> [f64; 2] {
        (self.gradient)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recenter_preserves_values() {
        let q = Quadratic { center: [0.3, -0.2], c: [1.0, 2.0, -1.0, 0.5, 0.25, -0.75] };
        let r = q.recenter([1.0, 2.0]);
        for x in [[0.0, 0.0], [1.5, -3.0], [0.2, 0.9]] {
            assert!((q.value(x) - r.value(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let a = Quadratic::affine([0.1, 0.2], 1.0, [2.0, -1.0]);
        let b = Quadratic::affine([0.5, 0.5], -0.5, [0.3, 0.7]);
        let p = Quadratic::product_of_affine(&a, &b);
        for x in [[0.0, 0.0], [1.0, -2.0], [0.4, 0.8]] {
            assert!((p.value(x) - a.value(x) * b.value(x)).abs() < 1e-13);
        }
    }
}
