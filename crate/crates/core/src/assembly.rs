//! Stiffness and mass matrices with Dirichlet DOFs eliminated.

use std::fmt::Write as _;

use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

use crate::quadrature::TriangleRule;
use crate::spaces::Space;

/// Symmetric matrix in compressed sparse row form (both triangles stored).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// Sums duplicate `(i, j, v)` entries. The caller provides both `(i, j)`
    /// and `(j, i)` with identical values.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `xᵀ M y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Lower triangle as a faer column-major matrix (enough for a Cholesky).
    pub fn to_faer_lower(&self) -> SparseColMat<usize, f64> {
        let mut t = Vec::with_capacity(self.nnz() / 2 + self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j <= i {
                    t.push(Triplet::new(i, j, v));
                }
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &t).expect("valid triplets")
    }

    /// Coordinate dump, one `i j value` line per stored entry.
    pub fn to_coo_string(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{i} {j} {v:.17e}");
            }
        }
        s
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }
}

/// Local matrix `[∫_K a(ψ_i, ψ_j)]`, computed on the upper triangle and mirrored.
fn local_matrices(space: &Space, k: usize, stiffness: bool) -> Vec<Vec<f64>> {
    let g = space.mesh.geometry(k);
    let basis = space.basis(k);
    let n = basis.len();
    let rule = if stiffness { TriangleRule::degree2() } else { TriangleRule::degree4() };
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rule.integrate(&g.vertices, g.area, |x| {
                if stiffness {
                    let (a, b) = (basis[i].gradient(x), basis[j].gradient(x));
                    a[0] * b[0] + a[1] * b[1]
                } else {
                    basis[i].value(x) * basis[j].value(x)
                }
            });
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

fn assemble(space: &Space, stiffness: bool, reduced: bool) -> SparseSymMatrix {
    let dofs = &space.dofs;
    let n = if reduced { dofs.num_free() } else { dofs.len() };
    let nl = space.kind.local_dofs();
    let mut t = Vec::with_capacity(space.mesh.num_triangles() * nl * nl);
    for k in 0..space.mesh.num_triangles() {
        let m = local_matrices(space, k, stiffness);
        let idx: Vec<Option<usize>> =
            dofs.local(k).iter().map(|&i| if reduced { dofs.free_index(i) } else { Some(i) }).collect();
        for a in 0..nl {
            let Some(i) = idx[a] else { continue };
            for b in 0..nl {
                let Some(j) = idx[b] else { continue };
                t.push((i, j, m[a][b]));
            }
        }
    }
    SparseSymMatrix::from_triplets(n, t)
}

/// Stiffness matrix on the free DOFs.
pub fn assemble_stiffness(space: &Space) -> SparseSymMatrix {
    assemble(space, true, true)
}

/// Mass matrix on the free DOFs.
pub fn assemble_mass(space: &Space) -> SparseSymMatrix {
    assemble(space, false, true)
}

/// Stiffness matrix over all DOFs, no elimination.
pub fn assemble_stiffness_full(space: &Space) -> SparseSymMatrix {
    assemble(space, true, false)
}

pub fn assemble_mass_full(space: &Space) -> SparseSymMatrix {
    assemble(space, false, false)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;
    use std::sync::Arc;

    use super::*;
    use crate::mesh::{Domain, Mesh};
    use crate::spaces::SpaceKind;

    fn single() -> Arc<Mesh> {
        let m = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], &HashMap::new(), 1);
        Arc::new(m.unwrap())
    }

    #[test]
    fn p1_square_level_one_has_no_free_dofs() {
        let s = Space::new(SpaceKind::P1, Arc::new(Domain::Square.build()));
        assert_eq!(assemble_stiffness(&s).n(), 0);
    }

    #[test]
    fn cr_single_triangle() {
        let s = Space::new(SpaceKind::CR, single());
        let a = assemble_stiffness_full(&s);
        for i in 0..3 {
            assert!(a.row(i).map(|(_, v)| v).sum::<f64>().abs() < 1e-14);
        }
        let b = assemble_mass_full(&s);
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 0.5 / 3.0 } else { 0.0 };
                assert!((b.get(i, j) - d).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mass_of_ones_is_area() {
        let mesh = Arc::new(Domain::LShape.build().refine_uniform());
        for kind in [SpaceKind::P1, SpaceKind::CR] {
            let s = Space::new(kind, mesh.clone());
            let b = assemble_mass_full(&s);
            let ones = vec![1.0; b.n()];
            assert!((b.inner(&ones, &ones) - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn symmetric_and_coo() {
        let s = Space::new(SpaceKind::ECR, Arc::new(Domain::Hollow.build()));
        let a = assemble_stiffness(&s);
        assert_eq!(a.max_asymmetry(), 0.0);
        let coo = a.to_coo_string();
        assert_eq!(coo.lines().count(), a.nnz());
    }
}
