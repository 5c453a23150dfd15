//! Linear solvers for interior Dirichlet systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric sparse matrix stored by rows, diagonal included.
#[derive(Clone, Debug)]
pub(crate) struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub(crate) fn new(n: usize) -> Self {
        SparseRows {
            rows: vec![Vec::new(); n],
        }
    }

    pub(crate) fn push(&mut self, i: usize, j: usize, v: f64) {
        self.rows[i].push((j, v));
    }

    pub(crate) fn dim(&self) -> usize {
        self.rows.len()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().filter(|(j, _)| *j == i).map(|(_, v)| v).sum())
            .collect()
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    pub(crate) fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }
}

pub(crate) fn dense_lu(a: &SparseRows, b: &[f64]) -> Result<Vec<f64>> {
    let lu = a.to_dense().lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::Internal("interior matrix is singular".into()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient. Returns the solution and the
/// iteration count; a non-positive curvature direction means the matrix is
/// not positive definite.
pub(crate) fn conjugate_gradient(
    a: &SparseRows,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for iter in 1..=max_iter {
        a.mul(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 {
            return Err(Error::Precondition(
                "interior operator is not positive definite (CG met non-positive curvature)".into(),
            ));
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            // recompute the true residual to guard against drift
            let mut ax = vec![0.0; n];
            a.mul(&x, &mut ax);
            let true_res: f64 = b.iter().zip(&ax).map(|(b, y)| (b - y) * (b - y)).sum::<f64>().sqrt();
            if true_res <= 10.0 * rel_tol * b_norm {
                return Ok((x, iter));
            }
            r = b.iter().zip(&ax).map(|(b, y)| b - y).collect();
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Numeric(format!(
        "conjugate gradient did not reach relative residual {rel_tol:e} in {max_iter} iterations"
    )))
}
