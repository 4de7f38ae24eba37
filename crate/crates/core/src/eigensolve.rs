//! Smallest eigenpairs of `A x = λ B x` for symmetric positive definite `A`, `B`.
//!
//! Large problems use shift-invert subspace iteration (shift 0) over a sparse
//! Cholesky factor of `A`, with a Rayleigh–Ritz step per sweep. Small
//! problems go through a dense Cholesky reduction.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble_mass, assemble_stiffness, SparseSymMatrix};
use crate::spaces::{DiscreteField, Space};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Bound on `‖Ax - λBx‖ / (λ ‖Bx‖)` per pair.
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Dimension up to which the dense path is used.
    pub dense_threshold: usize,
    /// Use subspace iteration regardless of size.
    pub force_iterative: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_sweeps: 500, seed: 0x5eed, dense_threshold: 300, force_iterative: false }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    /// B-normalized vector over the free DOFs.
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// An eigenpair lifted to a field on the full DOF set.
#[derive(Clone, Debug)]
pub struct Mode {
    pub value: f64,
    pub u: DiscreteField,
    pub residual: f64,
}

fn relative_residual(a: &SparseSymMatrix, b: &SparseSymMatrix, lambda: f64, x: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let bx = b.matvec(x);
    let r: f64 = ax.iter().zip(&bx).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = bx.iter().map(|v| v * v).sum::<f64>().sqrt();
    r / (lambda.abs().max(f64::MIN_POSITIVE) * nb.max(f64::MIN_POSITIVE))
}

/// Flip so that the first entry that is not negligible is positive.
fn canonical_sign(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(v) = x.iter().find(|v| v.abs() > 1e-8 * max) {
        if *v < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// `nev` smallest eigenpairs, ascending, B-orthonormal.
pub fn solve_smallest(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    nev: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = a.n();
    if nev == 0 || nev > n {
        return Err(Error::TooManyEigenpairs { nev, n });
    }
    let mut pairs = if n <= opts.dense_threshold && !opts.force_iterative {
        dense(a, b, nev)?
    } else {
        subspace_iteration(a, b, nev, opts)?
    };
    for p in &mut pairs {
        canonical_sign(&mut p.vector);
        p.residual = relative_residual(a, b, p.value, &p.vector);
    }
    Ok(pairs)
}

/// Generalized eigenproblem of a small dense pencil via Cholesky reduction.
/// Returns all pairs ascending with B-orthonormal columns.
pub fn dense_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let l =
        b.clone().cholesky().ok_or_else(|| Error::Factorization("mass matrix is not positive definite".into()))?.l();
    let li = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let mut c = &li * a * li.transpose();
    c = 0.5 * (&c + c.transpose());
    let e = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]);
    let x = li.transpose() * y;
    Ok((vals, x))
}

fn dense(a: &SparseSymMatrix, b: &SparseSymMatrix, nev: usize) -> Result<Vec<EigenPair>> {
    let (vals, x) = dense_pencil(&a.to_dense(), &b.to_dense())?;
    Ok((0..nev)
        .map(|j| EigenPair { value: vals[j], vector: x.column(j).iter().copied().collect(), residual: 0.0 })
        .collect())
}

/// B-orthonormalize the columns of `y` (two passes of modified Gram–Schmidt).
fn b_orthonormalize(y: &mut [Vec<f64>], b: &SparseSymMatrix) -> Result<()> {
    for _ in 0..2 {
        for j in 0..y.len() {
            for i in 0..j {
                let by = b.matvec(&y[i]);
                let c: f64 = y[j].iter().zip(&by).map(|(p, q)| p * q).sum();
                let (lo, hi) = y.split_at_mut(j);
                for (v, w) in hi[0].iter_mut().zip(&lo[i]) {
                    *v -= c * w;
                }
            }
            let nrm = b.inner(&y[j], &y[j]).sqrt();
            if !(nrm > 0.0) || !nrm.is_finite() {
                return Err(Error::Factorization("subspace collapsed".into()));
            }
            y[j].iter_mut().for_each(|v| *v /= nrm);
        }
    }
    Ok(())
}

fn subspace_iteration(
    a: &SparseSymMatrix,
    b: &SparseSymMatrix,
    nev: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = a.n();
    let p = (nev + 5).min(n);
    let llt = a.to_faer_lower().sp_cholesky(faer::Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    b_orthonormalize(&mut x, b)?;

    let mut residuals = vec![f64::INFINITY; nev];
    for _sweep in 0..opts.max_sweeps {
        // Y = A⁻¹ B X
        let mut rhs = Mat::<f64>::zeros(n, p);
        for (j, xj) in x.iter().enumerate() {
            let bx = b.matvec(xj);
            for i in 0..n {
                rhs[(i, j)] = bx[i];
            }
        }
        llt.solve_in_place(rhs.as_mut());
        let mut y: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| rhs[(i, j)]).collect()).collect();
        b_orthonormalize(&mut y, b)?;

        // Rayleigh–Ritz in the B-orthonormal basis
        let ay: Vec<Vec<f64>> = y.iter().map(|v| a.matvec(v)).collect();
        let mut h = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v: f64 = y[i].iter().zip(&ay[j]).map(|(s, t)| s * t).sum();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let e = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
        x = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (k, yk) in y.iter().enumerate() {
                    let s = e.eigenvectors[(k, c)];
                    for (vi, yi) in v.iter_mut().zip(yk) {
                        *vi += s * yi;
                    }
                }
                v
            })
            .collect();
        let values: Vec<f64> = order.iter().map(|&c| e.eigenvalues[c]).collect();
        for j in 0..nev {
            residuals[j] = relative_residual(a, b, values[j], &x[j]);
        }
        if residuals.iter().all(|r| *r <= opts.tol) {
            return Ok((0..nev)
                .map(|j| EigenPair { value: values[j], vector: x[j].clone(), residual: residuals[j] })
                .collect());
        }
    }
    Err(Error::NoConvergence { sweeps: opts.max_sweeps, residuals })
}

/// `xᵀAx / xᵀBx`.
pub fn rayleigh_quotient(x: &[f64], a: &SparseSymMatrix, b: &SparseSymMatrix) -> Result<f64> {
    let d = b.inner(x, x);
    if !(d > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(a.inner(x, x) / d)
}

/// Assemble and solve on a space; vectors come back as full-length fields.
pub fn solve_space(space: &Arc<Space>, nev: usize, opts: &EigenOptions) -> Result<Vec<Mode>> {
    let a = assemble_stiffness(space);
    let b = assemble_mass(space);
    let pairs = solve_smallest(&a, &b, nev, opts)?;
    Ok(pairs
        .into_iter()
        .map(|p| Mode { value: p.value, u: DiscreteField::from_free(space.clone(), &p.vector), residual: p.residual })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> SparseSymMatrix {
        SparseSymMatrix::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    #[test]
    fn diagonal_pencil() {
        let a = diag(&[3.0, 2.0]);
        let b = diag(&[1.0, 1.0]);
        for force in [false, true] {
            let opts = EigenOptions { force_iterative: force, ..Default::default() };
            let p = solve_smallest(&a, &b, 2, &opts).unwrap();
            assert!((p[0].value - 2.0).abs() < 1e-12 && (p[1].value - 3.0).abs() < 1e-12);
            assert!((p[0].vector[1] - 1.0).abs() < 1e-10 && p[0].vector[0].abs() < 1e-10);
            assert!((p[1].vector[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn too_many() {
        let a = diag(&[1.0]);
        assert!(matches!(
            solve_smallest(&a, &a, 2, &EigenOptions::default()),
            Err(Error::TooManyEigenpairs { nev: 2, n: 1 })
        ));
    }

    #[test]
    fn rayleigh_homogeneous() {
        let a = diag(&[1.0, 4.0, 9.0]);
        let b = diag(&[1.0, 2.0, 1.0]);
        let x = [0.3, -1.0, 2.0];
        let y: Vec<f64> = x.iter().map(|v| 5.0 * v).collect();
        let (p, q) = (rayleigh_quotient(&x, &a, &b).unwrap(), rayleigh_quotient(&y, &a, &b).unwrap());
        assert!((p - q).abs() < 1e-14 * p);
        assert!(matches!(rayleigh_quotient(&[0.0; 3], &a, &b), Err(Error::ZeroNorm)));
    }
}
