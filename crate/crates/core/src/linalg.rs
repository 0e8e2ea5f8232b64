//! Dense column-major matrices and the factorizations the fits rely on.
//!
//! Everything is sized for desk-scale regression problems (M up to 60,
//! n up to a few thousand), so the implementations favor clarity and
//! numerical robustness over blocking.

use crate::error::{Error, Result};

/// Relative pivot threshold below which a column is declared dependent.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds from a closure evaluated at (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[c * rows + r] = f(r, c);
            }
        }
        m
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            m.data[c * rows..(c + 1) * rows].copy_from_slice(col);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.rows + r] = v;
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// New matrix made of the given columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for (new_c, &c) in idx.iter().enumerate() {
            let src = self.column(c);
            m.data[new_c * self.rows..(new_c + 1) * self.rows].copy_from_slice(src);
        }
        m
    }

    /// y = A x for a length-cols vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            let col = self.column(c);
            for r in 0..self.rows {
                y[r] += xc * col[r];
            }
        }
        y
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Householder QR with column pivoting of an n×p matrix, p <= n.
///
/// Stores the reflectors in the lower triangle, R in the upper triangle,
/// and the pivot permutation. `rss_prefix[k]` is the squared residual norm
/// of the response after projecting out the first k processed columns, so
/// a single factorization yields every nested-prefix fit.
pub struct PivotedQr {
    factors: Matrix,
    pivots: Vec<usize>,
    qty: Vec<f64>,
    rss_prefix: Vec<f64>,
}

impl PivotedQr {
    /// Factorizes `a` while transforming `y` along. When `pivot` is false
    /// columns are processed in their given order (needed when the order
    /// itself is meaningful, as for nested families).
    pub fn factorize(a: &Matrix, y: &[f64], pivot: bool) -> PivotedQr {
        let n = a.rows();
        let p = a.cols();
        assert!(y.len() == n, "response length mismatch");
        let mut fac = a.clone();
        let mut qty = y.to_vec();
        let mut pivots: Vec<usize> = (0..p).collect();
        let mut rss_prefix = Vec::with_capacity(p + 1);
        rss_prefix.push(norm_sq(&qty));

        // Running squared norms of the trailing parts of each column.
        let mut col_norms: Vec<f64> = (0..p).map(|c| norm_sq(fac.column(c))).collect();

        for k in 0..p {
            if pivot {
                // Pick the remaining column with the largest trailing norm.
                let (best, _) = col_norms
                    .iter()
                    .enumerate()
                    .skip(k)
                    .fold((k, f64::NEG_INFINITY), |acc, (i, &v)| {
                        if v > acc.1 {
                            (i, v)
                        } else {
                            acc
                        }
                    });
                if best != k {
                    swap_columns(&mut fac, k, best);
                    pivots.swap(k, best);
                    col_norms.swap(k, best);
                }
            }

            // Householder vector for rows k.. of column k.
            let (tau, beta) = make_householder(&mut fac, k, n);

            if tau != 0.0 {
                apply_householder(&mut fac, &mut qty, k, n, tau);
            }
            fac.set(k, k, beta);

            // Deflate trailing norms for pivoting.
            if pivot {
                for c in (k + 1)..p {
                    let v = fac.get(k, c);
                    col_norms[c] = (col_norms[c] - v * v).max(0.0);
                }
            }

            let tail = norm_sq(&qty[(k + 1)..]);
            rss_prefix.push(tail);
        }
        PivotedQr { factors: fac, pivots, qty, rss_prefix }
    }

    /// Numerical rank check: every pivot must stay above
    /// `RANK_REL_TOL` × the leading pivot.
    pub fn is_full_rank(&self) -> bool {
        let p = self.factors.cols();
        if p == 0 {
            return true;
        }
        let lead = self.factors.get(0, 0).abs();
        if lead == 0.0 {
            return false;
        }
        (0..p).all(|k| self.factors.get(k, k).abs() > RANK_REL_TOL * lead)
    }


    /// Residual sum of squares of the full fit.
    pub fn rss(&self) -> f64 {
        *self.rss_prefix.last().expect("prefix list is never empty")
    }

    /// RSS after fitting only the first k processed columns, k = 0..=p.
    /// Only meaningful without pivoting (the processed order is the model
    /// order).
    pub fn rss_prefix(&self) -> &[f64] {
        &self.rss_prefix
    }

    /// Least-squares coefficients in the original column order.
    pub fn solve(&self) -> Vec<f64> {
        let p = self.factors.cols();
        let mut beta_piv = vec![0.0; p];
        for k in (0..p).rev() {
            let mut s = self.qty[k];
            for j in (k + 1)..p {
                s -= self.factors.get(k, j) * beta_piv[j];
            }
            beta_piv[k] = s / self.factors.get(k, k);
        }
        let mut beta = vec![0.0; p];
        for k in 0..p {
            beta[self.pivots[k]] = beta_piv[k];
        }
        beta
    }

    /// Diagonal of (AᵀA)⁻¹ in the original column order, via rows of R⁻¹.
    pub fn inverse_gram_diag(&self) -> Vec<f64> {
        let p = self.factors.cols();
        // Back-substitute for R⁻¹ one column at a time.
        let mut rinv = Matrix::zeros(p, p);
        for col in 0..p {
            let mut x = vec![0.0; p];
            x[col] = 1.0;
            for k in (0..=col).rev() {
                let mut s = x[k];
                for j in (k + 1)..=col {
                    s -= self.factors.get(k, j) * rinv.get(j, col);
                }
                rinv.set(k, col, s / self.factors.get(k, k));
                x[k] = 0.0;
            }
        }
        // diag((AᵀA)⁻¹) permuted back: row norms of R⁻¹.
        let mut diag = vec![0.0; p];
        for k in 0..p {
            let mut s = 0.0;
            for j in k..p {
                let v = rinv.get(k, j);
                s += v * v;
            }
            diag[self.pivots[k]] = s;
        }
        diag
    }
}

fn swap_columns(m: &mut Matrix, a: usize, b: usize) {
    let rows = m.rows();
    for r in 0..rows {
        let va = m.get(r, a);
        let vb = m.get(r, b);
        m.set(r, a, vb);
        m.set(r, b, va);
    }
}

/// Builds the Householder reflector for rows k.. of column k in place.
/// Returns (tau, beta) where beta is the resulting diagonal of R.
fn make_householder(fac: &mut Matrix, k: usize, n: usize) -> (f64, f64) {
    let mut norm = 0.0;
    for r in k..n {
        let v = fac.get(r, k);
        norm += v * v;
    }
    let norm = norm.sqrt();
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let alpha = fac.get(k, k);
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = alpha - beta;
    for r in (k + 1)..n {
        let v = fac.get(r, k) / scale;
        fac.set(r, k, v);
    }
    let tau = (beta - alpha) / beta;
    (tau, beta)
}

/// Applies the reflector stored in column k to the trailing columns and the
/// transformed response.
fn apply_householder(fac: &mut Matrix, qty: &mut [f64], k: usize, n: usize, tau: f64) {
    let p = fac.cols();
    for c in (k + 1)..p {
        let mut s = fac.get(k, c);
        for r in (k + 1)..n {
            s += fac.get(r, k) * fac.get(r, c);
        }
        s *= tau;
        let head = fac.get(k, c) - s;
        fac.set(k, c, head);
        for r in (k + 1)..n {
            let v = fac.get(r, c) - s * fac.get(r, k);
            fac.set(r, c, v);
        }
    }
    let mut s = qty[k];
    for r in (k + 1)..n {
        s += fac.get(r, k) * qty[r];
    }
    s *= tau;
    qty[k] -= s;
    for r in (k + 1)..n {
        qty[r] -= s * fac.get(r, k);
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky needs a square matrix");
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let v = l.get(j, k);
            d -= v * v;
        }
        if d <= 0.0 {
            return Err(Error::Domain(format!(
                "matrix not positive definite at pivot {j} (d={d})"
            )));
        }
        let dj = d.sqrt();
        l.set(j, j, dj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / dj);
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_simple_system() {
        // y = 2 + 3x on x = 0,1,2 with an explicit intercept column.
        let a = Matrix::from_columns(3, &[vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let y = [2.0, 5.0, 8.0];
        let qr = PivotedQr::factorize(&a, &y, true);
        assert!(qr.is_full_rank());
        let beta = qr.solve();
        assert!((beta[0] - 2.0).abs() < 1e-12);
        assert!((beta[1] - 3.0).abs() < 1e-12);
        assert!(qr.rss() < 1e-20);
    }

    #[test]
    fn qr_prefix_rss_matches_refits() {
        let a = Matrix::from_columns(
            5,
            &[
                vec![1.0, 1.0, 1.0, 1.0, 1.0],
                vec![0.0, 1.0, 2.0, 3.0, 4.0],
                vec![0.3, -0.5, 2.0, 0.7, -1.1],
            ],
        );
        let y = [1.0, 0.4, -0.2, 2.5, 1.9];
        let qr = PivotedQr::factorize(&a, &y, false);
        let prefix = qr.rss_prefix().to_vec();
        assert_eq!(prefix.len(), 4);
        assert!((prefix[0] - norm_sq(&y)).abs() < 1e-12);
        for k in 1..=3 {
            let sub = a.select_columns(&(0..k).collect::<Vec<_>>());
            let qk = PivotedQr::factorize(&sub, &y, true);
            assert!(
                (prefix[k] - qk.rss()).abs() <= 1e-10 * (1.0 + qk.rss()),
                "prefix {k}: {} vs {}",
                prefix[k],
                qk.rss()
            );
        }
    }

    #[test]
    fn qr_detects_dependent_columns() {
        let c = vec![1.0, 2.0, 3.0, 4.0];
        let twice: Vec<f64> = c.iter().map(|v| 2.0 * v).collect();
        let a = Matrix::from_columns(4, &[c, twice]);
        let y = [1.0, 0.0, 1.0, 0.0];
        let qr = PivotedQr::factorize(&a, &y, true);
        assert!(!qr.is_full_rank());
    }

    #[test]
    fn inverse_gram_diag_matches_direct_inverse() {
        let a = Matrix::from_columns(
            4,
            &[
                vec![1.0, 1.0, 1.0, 1.0],
                vec![0.5, -1.0, 2.0, 0.0],
            ],
        );
        let y = [0.0; 4];
        let qr = PivotedQr::factorize(&a, &y, true);
        let diag = qr.inverse_gram_diag();
        // Direct 2x2 inverse of AᵀA.
        let g11 = dot(a.column(0), a.column(0));
        let g12 = dot(a.column(0), a.column(1));
        let g22 = dot(a.column(1), a.column(1));
        let det = g11 * g22 - g12 * g12;
        assert!((diag[0] - g22 / det).abs() < 1e-12);
        assert!((diag[1] - g11 / det).abs() < 1e-12);
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Matrix::from_fn(3, 3, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()));
        let l = cholesky(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += l.get(i, k) * l.get(j, k);
                }
                assert!((s - a.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Matrix::zeros(2, 2);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        assert!(cholesky(&a).is_err());
    }
}
