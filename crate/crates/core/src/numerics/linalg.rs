//! Dense symmetric positive-definite linear algebra: Cholesky factorization,
//! triangular solves and SPD inversion. Row-major storage throughout.

use crate::error::{Error, Result};

/// Dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    /// Builds the matrix from rows, checking symmetry to 1e-12 relative.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn add_to_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Lower-triangular Cholesky factor L with A = L L^T.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// L x
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n).map(|i| (0..=i).map(|j| self.get(i, j) * x[j]).sum()).collect())
    }

    /// L L^T, mostly for checking factorizations.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        SymMatrix::from_fn(n, |i, j| (0..=j.min(i)).map(|k| self.get(i, k) * self.get(j, k)).sum())
    }

    /// Solves L z = b in place.
    fn forward(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.data[i * self.n..i * self.n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
            b[i] = (b[i] - s) / self.get(i, i);
        }
    }

    /// Solves L^T x = z in place.
    fn backward(&self, z: &mut [f64]) {
        for i in (0..self.n).rev() {
            let mut s = z[i];
            for k in i + 1..self.n {
                s -= self.get(k, i) * z[k];
            }
            z[i] = s / self.get(i, i);
        }
    }

    /// Inverse of A = L L^T as a dense symmetric matrix.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        let mut cols = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.forward(&mut e);
            self.backward(&mut e);
            cols[j * n..(j + 1) * n].copy_from_slice(&e);
        }
        SymMatrix::from_fn(n, |i, j| 0.5 * (cols[j * n + i] + cols[i * n + j]))
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.get(i, i).ln()).sum::<f64>()
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
pub fn cholesky(a: &SymMatrix) -> Result<LowerTriangular> {
    let n = a.dim();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, pivot: d });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(LowerTriangular { n, data: l })
}

/// Cholesky with one retry after adding `1e-10 * trace / n` to the diagonal.
/// Returns the factor and the jitter that was applied (0 when none).
pub fn cholesky_jittered(a: &SymMatrix) -> Result<(LowerTriangular, f64)> {
    match cholesky(a) {
        Ok(l) => Ok((l, 0.0)),
        Err(Error::NotPositiveDefinite { .. }) => {
            let jitter = 1e-10 * a.trace() / a.dim().max(1) as f64;
            let mut b = a.clone();
            b.add_to_diagonal(jitter);
            cholesky(&b).map(|l| (l, jitter))
        }
        Err(e) => Err(e),
    }
}

/// Solves (L L^T) x = b.
pub fn chol_solve(l: &LowerTriangular, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: b.len() });
    }
    let mut x = b.to_vec();
    l.forward(&mut x);
    l.backward(&mut x);
    Ok(x)
}
