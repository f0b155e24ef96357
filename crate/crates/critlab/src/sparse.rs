//! Minimal sparse matrix support: CSR storage built from triplets and a
//! deterministic profile (skyline) LDU factorization without pivoting.
//!
//! The systems assembled here are small (desk scale) and structurally
//! symmetric with narrow profiles, so an envelope solver factors them in
//! O(n * bandwidth^2) with fully reproducible results. A vanishing pivot is
//! reported instead of repaired: for shifted solves it means the shift is an
//! eigenvalue.

use crate::error::{Error, Result};

/// Triplet accumulator; duplicate entries are summed on build.
#[derive(Clone, Debug)]
pub struct Triplets {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Triplets { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix {
        // Stable order => deterministic summation independent of insertion
        // order.
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
            row_ptr[r + 1] = values.len();
        }
        for i in 1..=self.n_rows {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        CsrMatrix { n_rows: self.n_rows, n_cols: self.n_cols, row_ptr, col_idx, values }
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] = acc;
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                t.push(*c, i, *v);
            }
        }
        t.build()
    }

    /// `self + alpha * other`, matching shapes required.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut t = Triplets::new(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                t.push(i, *c, *v);
            }
            let (cols, vals) = other.row(i);
            for (c, v) in cols.iter().zip(vals) {
                t.push(i, *c, alpha * *v);
            }
        }
        t.build()
    }

    pub fn symmetric_part(&self) -> CsrMatrix {
        let t = self.transpose();
        let mut sum = self.add_scaled(&t, 1.0);
        for v in sum.values.iter_mut() {
            *v *= 0.5;
        }
        sum
    }

    /// Congruence with a diagonal matrix: entries `d[i] * a_ij * d[j]`.
    pub fn diag_congruence(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.n_rows);
        assert_eq!(d.len(), self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[p] = d[i] * self.values[p] * d[self.col_idx[p]];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_rows);
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                m[(i, *c)] = *v;
            }
        }
        m
    }

    /// Coordinate text dump: header `% rows cols nnz`, then `i j value`.
    pub fn dump_coordinate(&self) -> String {
        let mut out = format!("% {} {} {}\n", self.n_rows, self.n_cols, self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                out.push_str(&format!("{i} {c} {v}\n"));
            }
        }
        out
    }
}

/// Profile LDU factorization (no pivoting) of a square CSR matrix.
pub struct ProfileLu {
    n: usize,
    /// first profile column/row per index
    first: Vec<usize>,
    /// offsets into `ld` / `u`
    start: Vec<usize>,
    /// `L[i][k] * D[k]` stored by rows (cols `first[i]..i`)
    ld: Vec<f64>,
    /// `U[k][j]` stored by columns (rows `first[j]..j`)
    u: Vec<f64>,
    d: Vec<f64>,
}

impl ProfileLu {
    /// Factors `a`, failing with `ResolventAtSpectrum` when some pivot falls
    /// to or below `pivot_tol` relative to the matrix scale.
    pub fn factor(a: &CsrMatrix, pivot_tol: f64) -> Result<Self> {
        assert_eq!(a.n_rows, a.n_cols);
        let n = a.n_rows;
        if n == 0 {
            return Err(Error::Numerical("cannot factor an empty matrix".into()));
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        // symmetric profile: first[i] = min over row i and column i
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let (cols, _) = a.row(i);
            for &c in cols {
                if c < first[i] {
                    first[i] = c;
                }
                if i < first[c] {
                    first[c] = i;
                }
            }
        }
        // enforce monotone profile feasibility: first[i] <= i always holds
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut ld = vec![0.0; start[n]];
        let mut u = vec![0.0; start[n]];
        let mut d = vec![0.0; n];
        // initialize with matrix entries
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let (c, v) = (*c, *v);
                use std::cmp::Ordering::*;
                match c.cmp(&i) {
                    Less => ld[start[i] + (c - first[i])] = v,
                    Equal => d[i] = v,
                    Greater => u[start[c] + (i - first[c])] = v,
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                // ld[i][j] -= sum_k ld[i][k] * u[k][j],  k in lo..j
                let mut s_l = ld[start[i] + (j - fi)];
                let mut s_u = u[start[i] + (j - fi)];
                for k in lo..j {
                    let lik = ld[start[i] + (k - fi)];
                    let ukj = u[start[j] + (k - fj)];
                    s_l -= lik * ukj;
                    let ljk = ld[start[j] + (k - fj)];
                    let uki = u[start[i] + (k - fi)];
                    s_u -= ljk * uki;
                }
                ld[start[i] + (j - fi)] = s_l;
                u[start[i] + (j - fi)] = s_u / d[j];
            }
            let mut dd = d[i];
            for k in fi..i {
                dd -= ld[start[i] + (k - fi)] * u[start[i] + (k - fi)];
            }
            if dd.abs() <= pivot_tol * scale {
                return Err(Error::ResolventAtSpectrum { shift: f64::NAN, pivot: dd });
            }
            d[i] = dd;
        }
        Ok(ProfileLu { n, first, start, ld, u, d })
    }

    /// Signs of the pivots; for symmetric input the number of negative
    /// pivots equals the number of eigenvalues below zero (Sylvester).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&p| p < 0.0).count()
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, p| m.min(p.abs()))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // forward: w = D^-1 L^-1 b  (using ld = L * D)
        let mut w = vec![0.0; n];
        for i in 0..n {
            let fi = self.first[i];
            let mut acc = b[i];
            for k in fi..i {
                acc -= self.ld[self.start[i] + (k - fi)] * w[k];
            }
            w[i] = acc / self.d[i];
        }
        // backward: U x = w, U stored by columns
        let mut x = w;
        for j in (0..n).rev() {
            let xj = x[j];
            let fj = self.first[j];
            for k in fj..j {
                x[k] -= self.u[self.start[j] + (k - fj)] * xj;
            }
        }
        x
    }
}

/// Dense Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        // Dirichlet Laplacian on n interior nodes, h = 1/(n+1), scaled by h
        let h = 1.0 / (n as f64 + 1.0);
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0 / h);
            if i > 0 {
                t.push(i, i - 1, -1.0 / h);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0 / h);
            }
        }
        t.build()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.5);
        t.push(1, 0, -1.0);
        let m = t.build();
        assert_eq!(m.get(0, 0), 3.5);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn profile_lu_solves() {
        let a = laplacian_1d(50);
        let lu = ProfileLu::factor(&a, 1e-13).unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.matvec(&x_true);
        let x = lu.solve(&b);
        let err: f64 = x
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        let m = t.build();
        assert!(matches!(
            ProfileLu::factor(&m, 1e-13),
            Err(Error::ResolventAtSpectrum { .. })
        ));
    }

    #[test]
    fn nonsymmetric_values_solve() {
        let mut t = Triplets::new(3, 3);
        // structurally symmetric, value-nonsymmetric
        t.push(0, 0, 4.0);
        t.push(0, 1, -1.0);
        t.push(1, 0, -2.0);
        t.push(1, 1, 4.0);
        t.push(1, 2, -1.0);
        t.push(2, 1, -3.0);
        t.push(2, 2, 4.0);
        let m = t.build();
        let lu = ProfileLu::factor(&m, 1e-13).unwrap();
        let b = vec![1.0, 0.0, 2.0];
        let x = lu.solve(&b);
        let r = m.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_and_symmetric_part() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 1, 2.0);
        t.push(1, 0, 4.0);
        let m = t.build();
        let mt = m.transpose();
        assert_eq!(mt.get(1, 0), 2.0);
        assert_eq!(mt.get(0, 1), 4.0);
        let s = m.symmetric_part();
        assert_eq!(s.get(0, 1), 3.0);
        assert_eq!(s.get(1, 0), 3.0);
    }

    #[test]
    fn negative_pivot_count_matches_inertia() {
        // diag(1, -2, 3): one negative eigenvalue
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(1, 1, -2.0);
        t.push(2, 2, 3.0);
        let lu = ProfileLu::factor(&t.build(), 1e-16).unwrap();
        assert_eq!(lu.negative_pivots(), 1);
    }
}
