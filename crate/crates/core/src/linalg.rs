//! Dense linear algebra for the tiny matrices of this crate (dimensions <= 8).
//!
//! Everything is written directly: cyclic Jacobi for symmetric eigenproblems,
//! an SVD assembled from the Jacobi eigendecomposition of `du^T du`, and LU
//! with partial pivoting for determinants and inverses.

use crate::error::{Error, Result};

/// Maximum sweeps for the Jacobi iterations.
pub const JACOBI_SWEEP_CAP: usize = 100;
/// Off-diagonal tolerance (relative to the Frobenius norm) for Jacobi.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-14;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, a| acc.max(a.abs()))
    }

    /// Largest |A_ij - A_ji|.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Exact symmetrization (A + A^T)/2.
    pub fn symmetrized(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return 0.0;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in (col + 1)..n {
                let f = a[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in (col + 1)..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(Error::DecompositionFailure("singular matrix in inverse".into()));
            }
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                    inv.data.swap(col * n + c, piv * n + c);
                }
            }
            let d = a[col * n + col];
            for c in 0..n {
                a[col * n + c] /= d;
                inv.data[col * n + c] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a[r * n + c] -= f * a[col * n + c];
                    inv.data[r * n + c] -= f * inv.data[col * n + c];
                }
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition `A = Q diag(w) Q^T` of a symmetric matrix by cyclic
/// Jacobi rotations. Eigenvalues are sorted descending; `Q` holds the
/// eigenvectors as columns.
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

pub fn jacobi_eigen_sym(a: &Mat) -> Result<SymEig> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.symmetrized();
    let mut q = Mat::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    let tol = JACOBI_OFFDIAG_TOL * scale;

    let mut converged = n <= 1;
    for _sweep in 0..JACOBI_SWEEP_CAP {
        let mut off = 0.0f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off = off.max(m[(p, r)].abs());
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = m[(p, r)];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(r, r)];
                // Rotation angle zeroing the (p,r) entry.
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, r)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(r, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, r)] = s * qkp + c * qkq;
                }
            }
        }
    }
    if !converged {
        // Final check after the capped sweeps.
        let mut off = 0.0f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off = off.max(m[(p, r)].abs());
            }
        }
        if off > tol {
            return Err(Error::DecompositionFailure(format!(
                "Jacobi eigen failed to converge in {JACOBI_SWEEP_CAP} sweeps (off = {off:e})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, newcol)] = q[(k, oldcol)];
        }
    }
    Ok(SymEig { values, vectors })
}

/// SVD of an m x n matrix: `a = U diag(s) V^T` with U (m x m), V (n x n)
/// orthogonal and the singular values sorted descending (padded with zeros
/// up to min(m, n)). Assembled from the Jacobi eigendecomposition of a^T a.
pub struct Svd {
    pub u: Mat,
    pub singular: Vec<f64>,
    pub v: Mat,
}

pub fn jacobi_svd(a: &Mat) -> Result<Svd> {
    let (m, n) = (a.rows, a.cols);
    let ata = a.transpose().matmul(a);
    let eig = jacobi_eigen_sym(&ata)?;
    let v = eig.vectors;
    let scale = a.max_abs();
    let cutoff = 1e-13 * scale.max(1e-300);

    let mut singular = vec![0.0; n.min(m)];
    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(m);
    for k in 0..n.min(m) {
        let s = eig.values[k].max(0.0).sqrt();
        if s > cutoff {
            singular[k] = s;
            let vk: Vec<f64> = (0..n).map(|i| v[(i, k)]).collect();
            let col: Vec<f64> = a.matvec(&vk).iter().map(|x| x / s).collect();
            ucols.push(col);
        }
    }
    // Complete U to an orthonormal basis of R^m with canonical fill.
    let mut basis = ucols;
    let mut cand = 0usize;
    while basis.len() < m {
        let mut w = vec![0.0; m];
        w[cand] = 1.0;
        cand += 1;
        for b in &basis {
            let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= d * bi;
            }
        }
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
        }
        if cand > 2 * m + 2 {
            return Err(Error::DecompositionFailure("failed to complete U basis".into()));
        }
    }
    let mut u = Mat::zeros(m, m);
    for (k, col) in basis.iter().enumerate() {
        for i in 0..m {
            u[(i, k)] = col[i];
        }
    }
    Ok(Svd { u, singular, v })
}

/// Random orthogonal matrix from a product of Givens rotations with random
/// angles and signs. Deterministic given the RNG state.
pub fn random_orthogonal<R: rand::Rng>(rng: &mut R, n: usize) -> Mat {
    let mut q = Mat::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = theta.sin_cos();
            for k in 0..n {
                let qki = q[(k, i)];
                let qkj = q[(k, j)];
                q[(k, i)] = c * qki - s * qkj;
                q[(k, j)] = s * qki + c * qkj;
            }
        }
        if rng.gen::<bool>() {
            for k in 0..n {
                q[(k, i)] = -q[(k, i)];
            }
        }
    }
    q
}
