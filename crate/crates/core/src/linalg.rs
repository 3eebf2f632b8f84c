//! Small dense vector helpers and the `LinearMap` type.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    scale(a, 1.0 / n)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Determinant of a square matrix given by rows.
pub fn det_rows(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    match n {
        0 => 1.0,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => {
            let r = rows;
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        }
        _ => DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant(),
    }
}

/// Solve `A x = b` with `A` given by rows; `None` when numerically singular.
pub fn solve_rows(rows: &[&[f64]], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a = [[0.0f64; 5]; 4];
    for (i, r) in rows.iter().enumerate() {
        a[i][..n].copy_from_slice(&r[..n]);
        a[i][n] = rhs[i];
    }
    let scale = rows.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            for j in col..=n {
                a[i][j] -= f * a[col][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][n] - s) / a[i][i];
    }
    Some(x)
}

/// Unit vector orthogonal to the `n-1` difference vectors (generalized cross product).
pub fn normal_of(diffs: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = diffs.len() + 1;
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate() {
        let minor: Vec<Vec<f64>> = diffs.iter().map(|d| (0..n).filter(|&j| j != k).map(|j| d[j]).collect()).collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *o = sign * det_rows(&minor);
    }
    let len = norm(&out);
    let scale: f64 = diffs.iter().map(|d| norm(d)).product::<f64>().max(1e-300);
    if len <= 1e-12 * scale {
        return None;
    }
    Some(scale_vec(out, 1.0 / len))
}

fn scale_vec(mut v: Vec<f64>, s: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x *= s);
    v
}

/// Orthonormal basis of the orthogonal complement of unit vector `u`.
pub fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let skip = (0..n).max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in (0..n).filter(|&k| k != skip) {
        let mut v = unit(n, k);
        let c = dot(&v, u);
        v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
        }
        let l = norm(&v);
        basis.push(scale_vec(v, 1.0 / l));
    }
    basis
}

/// Rank of a set of vectors by Gram-Schmidt with relative tolerance.
pub fn rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
        }
        let l = norm(&w);
        if l > tol {
            basis.push(scale_vec(w, 1.0 / l));
        }
    }
    basis.len()
}

/// An n×n real matrix with cached determinant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    rows: Vec<Vec<f64>>,
    det: f64,
}

impl LinearMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::config("linear map must be a square matrix"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::config("linear map has non-finite entries"));
        }
        let det = det_rows(&rows);
        Ok(Self { rows, det })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|k| unit(n, k)).collect()).expect("identity")
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        Self::new((0..n).map(|k| scale(&unit(n, k), d[k])).collect())
    }

    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(vec![vec![c, -s], vec![s, c]]).expect("rotation")
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::new((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.rows[i][j])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| self.rows[i][j] * x[i]).sum()).collect()
    }

    pub fn is_invertible(&self) -> bool {
        let scale = self.rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        self.det.abs() > 1e-12 * scale.powi(self.dim() as i32)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible() {
            return Err(Error::config("linear map is singular"));
        }
        let inv = self.matrix().try_inverse().ok_or_else(|| Error::config("linear map is singular"))?;
        Self::from_matrix(&inv)
    }

    pub fn transpose(&self) -> Self {
        Self::from_matrix(&self.matrix().transpose()).expect("transpose")
    }

    pub fn compose(&self, other: &LinearMap) -> Self {
        Self::from_matrix(&(self.matrix() * other.matrix())).expect("compose")
    }

    pub fn frobenius_distance(&self, other: &LinearMap) -> f64 {
        (self.matrix() - other.matrix()).norm()
    }
}

pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
