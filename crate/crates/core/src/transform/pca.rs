//! Channel PCA. The basis comes from the eigen-decomposition of the
//! channel Gram matrix `R^T R / m`, i.e. the right singular vectors of the
//! (uncentered) data, so projection is a plain rotation `R V`.

use crate::error::{Error, Result};

/// `n x q` matrix of orthonormal principal directions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    n: usize,
    q: usize,
    v: Vec<f32>,
}

impl PcaBasis {
    pub fn identity(n: usize, q: usize) -> Self {
        let mut v = vec![0.0; n * q];
        for i in 0..q.min(n) {
            v[i * q + i] = 1.0;
        }
        PcaBasis { n, q, v }
    }

    pub fn from_matrix(n: usize, q: usize, v: Vec<f32>) -> Result<Self> {
        if q == 0 || q > n {
            return Err(Error::invalid(format!(
                "PCA rank {q} invalid for {n} channels"
            )));
        }
        if v.len() != n * q {
            return Err(Error::shape(format!(
                "PCA matrix needs {} values, got {}",
                n * q,
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::corrupt("non-finite PCA basis entry"));
        }
        Ok(PcaBasis { n, q, v })
    }

    pub fn channels(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.q
    }

    /// Row-major `n x q` entries.
    pub fn matrix(&self) -> &[f32] {
        &self.v
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.v[row * self.q + col]
    }

    /// Column `j`.
    pub fn direction(&self, j: usize) -> Vec<f32> {
        (0..self.n).map(|i| self.at(i, j)).collect()
    }

    /// `out = row . V`.
    #[inline]
    pub fn project_row(&self, row: &[f32], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate().take(self.q) {
            let mut acc = 0.0f64;
            for (i, r) in row.iter().enumerate() {
                acc += f64::from(*r) * f64::from(self.v[i * self.q + j]);
            }
            *o = acc;
        }
    }

    /// `out = row . V^T`.
    #[inline]
    pub fn backproject_row(&self, row: &[f32], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0f64;
            for (j, r) in row.iter().enumerate() {
                acc += f64::from(*r) * f64::from(self.v[i * self.q + j]);
            }
            *o = acc;
        }
    }

    /// Projects an `m x n` row-major matrix to `m x q`.
    pub fn project(&self, rows: &[f32]) -> Result<Vec<f32>> {
        if !rows.len().is_multiple_of(self.n) {
            return Err(Error::shape(format!(
                "{} values is not a whole number of {}-channel rows",
                rows.len(),
                self.n
            )));
        }
        let mut buf = vec![0.0; self.q];
        let mut out = Vec::with_capacity(rows.len() / self.n * self.q);
        for row in rows.chunks_exact(self.n) {
            self.project_row(row, &mut buf);
            out.extend(buf.iter().map(|v| *v as f32));
        }
        Ok(out)
    }

    /// Maps an `m x q` matrix back to `m x n`.
    pub fn backproject(&self, rows: &[f32]) -> Result<Vec<f32>> {
        if !rows.len().is_multiple_of(self.q) {
            return Err(Error::shape(format!(
                "{} values is not a whole number of rank-{} rows",
                rows.len(),
                self.q
            )));
        }
        let mut buf = vec![0.0; self.n];
        let mut out = Vec::with_capacity(rows.len() / self.q * self.n);
        for row in rows.chunks_exact(self.q) {
            self.backproject_row(row, &mut buf);
            out.extend(buf.iter().map(|v| *v as f32));
        }
        Ok(out)
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.q {
            for b in 0..self.q {
                let dot: f64 = (0..self.n)
                    .map(|i| f64::from(self.at(i, a)) * f64::from(self.at(i, b)))
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).abs());
            }
        }
        worst
    }
}

/// Accumulates `R^T R` one row at a time.
#[derive(Debug, Clone)]
pub(crate) struct Gram {
    n: usize,
    sum: Vec<f64>,
    rows: usize,
}

impl Gram {
    pub(crate) fn new(n: usize) -> Self {
        Gram {
            n,
            sum: vec![0.0; n * n],
            rows: 0,
        }
    }

    pub(crate) fn add_row(&mut self, row: &[f32]) {
        for i in 0..self.n {
            let ri = f64::from(row[i]);
            if ri == 0.0 {
                continue;
            }
            for (j, rj) in row.iter().enumerate().skip(i) {
                self.sum[i * self.n + j] += ri * f64::from(*rj);
            }
        }
        self.rows += 1;
    }

    pub(crate) fn into_basis(mut self, q: usize) -> PcaBasis {
        let n = self.n;
        let scale = if self.rows > 0 {
            1.0 / self.rows as f64
        } else {
            0.0
        };
        for i in 0..n {
            for j in i..n {
                let v = self.sum[i * n + j] * scale;
                self.sum[i * n + j] = v;
                self.sum[j * n + i] = v;
            }
        }
        basis_from_symmetric(self.sum, n, q)
    }
}

/// Fits a rank-`q` basis to an `m x n` row-major matrix. Columns are
/// ordered by descending eigenvalue and signed so that each column's
/// largest-magnitude entry is positive. An all-zero input yields identity.
pub fn pca_fit(matrix: &[f32], n: usize, q: usize) -> Result<PcaBasis> {
    if n == 0 || q == 0 || q > n {
        return Err(Error::invalid(format!(
            "PCA rank {q} invalid for {n} channels"
        )));
    }
    if !matrix.len().is_multiple_of(n) || matrix.is_empty() {
        return Err(Error::shape(format!(
            "PCA input of {} values is not a nonempty set of {n}-channel rows",
            matrix.len()
        )));
    }
    let mut gram = Gram::new(n);
    for row in matrix.chunks_exact(n) {
        gram.add_row(row);
    }
    Ok(gram.into_basis(q))
}

fn basis_from_symmetric(mut a: Vec<f64>, n: usize, q: usize) -> PcaBasis {
    let mut vecs = vec![0.0f64; n * n];
    for i in 0..n {
        vecs[i * n + i] = 1.0;
    }
    jacobi_eigen(&mut a, &mut vecs, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]).then(x.cmp(&y)));

    let mut v = vec![0.0f32; n * q];
    for (col, &src) in order.iter().take(q).enumerate() {
        let mut pivot = 0;
        for i in 0..n {
            if vecs[i * n + src].abs() > vecs[pivot * n + src].abs() {
                pivot = i;
            }
        }
        let sign = if vecs[pivot * n + src] < 0.0 {
            -1.0
        } else {
            1.0
        };
        for i in 0..n {
            v[i * q + col] = (sign * vecs[i * n + src]) as f32;
        }
    }
    PcaBasis { n, q, v }
}

/// Cyclic Jacobi rotations. On return `a` is (numerically) diagonal with
/// the eigenvalues and the columns of `vecs` are the eigenvectors.
fn jacobi_eigen(a: &mut [f64], vecs: &mut [f64], n: usize) {
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * norm {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[p * n + r];
                if apr.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let arr = a[r * n + r];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    a[k * n + p] = c * akp - s * akr;
                    a[k * n + r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let ark = a[r * n + k];
                    a[p * n + k] = c * apk - s * ark;
                    a[r * n + k] = s * apk + c * ark;
                }
                for k in 0..n {
                    let vkp = vecs[k * n + p];
                    let vkr = vecs[k * n + r];
                    vecs[k * n + p] = c * vkp - s * vkr;
                    vecs[k * n + r] = s * vkp + c * vkr;
                }
            }
        }
    }
}
