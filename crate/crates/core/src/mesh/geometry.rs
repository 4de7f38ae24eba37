use super::Point;
use crate::{Error, Result};

/// Per-triangle constants.
///
/// Local edge `i` joins vertices `i+1` and `i+2` (indices mod 3), so it is
/// opposite vertex `i`. Tangents run counter-clockwise, normals point outward.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    pub diameter: f64,
    pub centroid: Point,
    pub edge_lengths: [f64; 3],
    pub tangents: [[f64; 2]; 3],
    pub normals: [[f64; 2]; 3],
    /// `φ_i(x) = bary[i][0] + bary[i][1] x1 + bary[i][2] x2`.
    pub bary: [[f64; 3]; 3],
    pub a_k: f64,
    pub b_k: f64,
    pub h_k: f64,
}

impl ElementGeometry {
    pub fn new(label: usize, p: [Point; 3]) -> Result<Self> {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let scale = (0..3)
            .map(|i| (p[i][0] - p[(i + 1) % 3][0]).powi(2) + (p[i][1] - p[(i + 1) % 3][1]).powi(2))
            .fold(0.0, f64::max);
        if !(det > 1e-14 * scale) || !det.is_finite() {
            return Err(Error::DegenerateTriangle { triangle: label, area: 0.5 * det });
        }
        let area = 0.5 * det;
        let centroid = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];

        let mut edge_lengths = [0.0; 3];
        let mut tangents = [[0.0; 2]; 3];
        let mut normals = [[0.0; 2]; 3];
        let mut bary = [[0.0; 3]; 3];
        for i in 0..3 {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let l = (d[0] * d[0] + d[1] * d[1]).sqrt();
            edge_lengths[i] = l;
            tangents[i] = [d[0] / l, d[1] / l];
            normals[i] = [d[1] / l, -d[0] / l];
            bary[i] = [(a[0] * b[1] - b[0] * a[1]) / det, (a[1] - b[1]) / det, (b[0] - a[0]) / det];
        }
        let diameter = edge_lengths.iter().cloned().fold(0.0, f64::max);
        let h_k = edge_lengths.iter().map(|l| l * l).sum();

        let mut a_k = 0.0;
        let mut b_k = 0.0;
        for i in 0..3 {
            b_k += 2.0 * p[i][0] * p[i][1];
            for j in 0..3 {
                if i != j {
                    a_k += (p[i][0] - p[j][0]).powi(2) - (p[i][1] - p[j][1]).powi(2);
                    b_k -= p[i][0] * p[j][1];
                }
            }
        }

        Ok(Self { vertices: p, area, diameter, centroid, edge_lengths, tangents, normals, bary, a_k, b_k, h_k })
    }

    #[inline]
    pub fn phi(&self, i: usize, x: Point) -> f64 {
        let b = &self.bary[i];
        b[0] + b[1] * x[0] + b[2] * x[1]
    }

    #[inline]
    pub fn grad_phi(&self, i: usize) -> [f64; 2] {
        [self.bary[i][1], self.bary[i][2]]
    }

    pub fn edge_midpoint(&self, i: usize) -> Point {
        let (a, b) = (self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Two endpoints of local edge `i`, counter-clockwise.
    pub fn edge_endpoints(&self, i: usize) -> (Point, Point) {
        (self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3])
    }

    /// Smallest interior angle in radians.
    pub fn min_angle(&self) -> f64 {
        let l = self.edge_lengths;
        (0..3)
            .map(|i| {
                let (a, b, c) = (l[i], l[(i + 1) % 3], l[(i + 2) % 3]);
                ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    }
}
