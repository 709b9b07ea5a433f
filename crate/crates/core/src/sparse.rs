//! Sparse matrices and the linear solvers behind the solution operator.
//!
//! Small and medium systems are factored once with a banded LU (no
//! pivoting; M-matrices admit it with positive pivots). Large systems, and
//! any system whose band factorization breaks down, go through BiCGSTAB
//! preconditioned with ILU(0).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("zero or tiny pivot {pivot:e} in row {row}")]
    SingularPivot { row: usize, pivot: f64 },
    #[error("iterative solve stopped after {iterations} iterations at backward error {backward_error:e}")]
    NotConverged {
        iterations: usize,
        backward_error: f64,
    },
    #[error("right-hand side has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Compressed sparse row matrix with sorted, duplicate-free columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square `n × n` matrix from `(row, col, value)` triplets; duplicates
    /// are summed and explicit zeros are kept out.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> CsrMatrix {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k] != 0.0 || self.col_idx[k] == r {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.n) {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.n {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    pub fn scaled(&self, factor: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }

    /// Positive diagonal and nonpositive off-diagonal entries.
    pub fn has_m_matrix_signs(&self) -> bool {
        (0..self.n).all(|r| {
            self.row(r)
                .all(|(c, v)| if c == r { v > 0.0 } else { v <= 0.0 })
        })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol))
    }

    /// Normwise backward error ‖b − Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞) of `x`.
    pub fn backward_error(&self, x: &[f64], b: &[f64], norm_a: f64) -> f64 {
        let mut r = vec![0.0; self.n];
        self.mul_vec(x, &mut r);
        let res = r
            .iter()
            .zip(b)
            .map(|(ax, bi)| (bi - ax).abs())
            .fold(0.0, f64::max);
        let scale = norm_a * sup(x) + sup(b);
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// LU factors of a banded matrix, stored row by row over the band.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<f64>,
}

impl BandedLu {
    /// Storage the factorization of `a` would need, in `f64` entries.
    pub fn storage_for(a: &CsrMatrix) -> usize {
        let (kl, ku) = a.bandwidths();
        a.dim() * (kl + ku + 1)
    }

    pub fn factor(a: &CsrMatrix) -> Result<BandedLu, LinearSolveError> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let w = kl + ku + 1;
        let mut band = vec![0.0; n * w];
        for r in 0..n {
            for (c, v) in a.row(r) {
                band[r * w + c + kl - r] = v;
            }
        }
        let tiny = 1e-14 * a.norm_inf();
        for k in 0..n {
            let pivot = band[k * w + kl];
            if !(pivot.abs() > tiny) {
                return Err(LinearSolveError::SingularPivot { row: k, pivot });
            }
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let (head, tail) = band.split_at_mut((k + 1) * w);
            let pivot_row = &head[k * w..];
            for i in k + 1..=last_row {
                let row_i = &mut tail[(i - k - 1) * w..(i - k) * w];
                let lik = row_i[k + kl - i];
                if lik == 0.0 {
                    continue;
                }
                let l = lik / pivot;
                row_i[k + kl - i] = l;
                // columns k+1..=last_col, offsets in row i and row k
                let off_i = k + 1 + kl - i;
                let off_k = k + 1 + kl - k;
                let len = last_col - k;
                for (dst, src) in row_i[off_i..off_i + len]
                    .iter_mut()
                    .zip(&pivot_row[off_k..off_k + len])
                {
                    *dst -= l * src;
                }
            }
        }
        Ok(BandedLu { n, kl, ku, band })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = kl + ku + 1;
        for i in 0..n {
            let start = i.saturating_sub(kl);
            let row = &self.band[i * w..];
            let mut s = b[i];
            for j in start..i {
                s -= row[j + kl - i] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let end = (i + ku).min(n - 1);
            let row = &self.band[i * w..];
            let mut s = b[i];
            for j in i + 1..=end {
                s -= row[j + kl - i] * b[j];
            }
            b[i] = s / row[kl];
        }
    }
}

/// Incomplete LU with the sparsity pattern of the matrix itself.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Ilu0, LinearSolveError> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag_pos = vec![usize::MAX; n];
        for r in 0..n {
            for k in lu.row_ptr[r]..lu.row_ptr[r + 1] {
                if lu.col_idx[k] == r {
                    diag_pos[r] = k;
                }
            }
            if diag_pos[r] == usize::MAX {
                return Err(LinearSolveError::SingularPivot { row: r, pivot: 0.0 });
            }
        }
        let mut marker = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                marker[lu.col_idx[k]] = k;
            }
            for k in start..end {
                let j = lu.col_idx[k];
                if j >= i {
                    break;
                }
                let pivot = lu.values[diag_pos[j]];
                if pivot == 0.0 {
                    return Err(LinearSolveError::SingularPivot { row: j, pivot });
                }
                let l = lu.values[k] / pivot;
                lu.values[k] = l;
                for m in diag_pos[j] + 1..lu.row_ptr[j + 1] {
                    let c = lu.col_idx[m];
                    let slot = marker[c];
                    if slot != usize::MAX && slot >= start && slot < end {
                        lu.values[slot] -= l * lu.values[m];
                    }
                }
            }
            for k in start..end {
                marker[lu.col_idx[k]] = usize::MAX;
            }
            if lu.values[diag_pos[i]] == 0.0 {
                return Err(LinearSolveError::SingularPivot { row: i, pivot: 0.0 });
            }
        }
        Ok(Ilu0 { lu, diag_pos })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.lu.n;
        z.copy_from_slice(r);
        for i in 0..n {
            let mut s = z[i];
            for k in self.lu.row_ptr[i]..self.diag_pos[i] {
                s -= self.lu.values[k] * z[self.lu.col_idx[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..self.lu.row_ptr[i + 1] {
                s -= self.lu.values[k] * z[self.lu.col_idx[k]];
            }
            z[i] = s / self.lu.values[self.diag_pos[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Right-preconditioned BiCGSTAB. Iterates until the normwise backward
/// error drops to `tol`; `x` holds the starting guess on entry.
pub fn bicgstab(
    a: &CsrMatrix,
    precond: &Ilu0,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize, LinearSolveError> {
    let n = a.dim();
    let norm_a = a.norm_inf();
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut berr = a.backward_error(x, b, norm_a);
    if berr <= tol {
        return Ok(0);
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        precond.apply(&p, &mut p_hat);
        a.mul_vec(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        precond.apply(&s, &mut s_hat);
        a.mul_vec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for k in 0..n {
            x[k] += alpha * p_hat[k] + omega * s_hat[k];
            r[k] = s[k] - omega * t[k];
        }
        // recompute the true residual now and then to avoid drift
        if it % 25 == 0 || sup(&r) <= tol * (norm_a * sup(x) + sup(b)) {
            a.mul_vec(x, &mut r);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
            berr = sup(&r) / (norm_a * sup(x) + sup(b));
            if berr <= tol {
                return Ok(it);
            }
        }
    }
    berr = a.backward_error(x, b, norm_a);
    if berr <= tol {
        return Ok(max_iter);
    }
    Err(LinearSolveError::NotConverged {
        iterations: max_iter,
        backward_error: berr,
    })
}
