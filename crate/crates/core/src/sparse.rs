//! Compressed-sparse-row storage for symmetric matrices.

use crate::dense::DenseMatrix;
use crate::error::{dim_mismatch, Result};

/// Symmetric matrix in CSR form. Both triangles are stored; column indices
/// are sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Assemble from `(row, col, value)` triplets covering both triangles.
    /// Duplicates are summed. Entries that cancel to exactly zero are kept
    /// so the sparsity pattern stays symmetric.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for n = {n}");
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in row {
                if last == Some(j) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Assemble from `(i, j, value)` with each off-diagonal pair listed once;
    /// the mirror entry is added automatically.
    pub fn from_symmetric_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        Self::from_triplets(
            n,
            entries.into_iter().flat_map(|(i, j, v)| {
                let mirror = if i != j { Some((j, i, v)) } else { None };
                std::iter::once((i, j, v)).chain(mirror)
            }),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[a..b].binary_search(&j) {
            Ok(k) => self.values[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in a..b {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(dim_mismatch(self.n, x.len()));
        }
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// Sparse-times-dense, column by column.
    pub fn matmul_dense(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.rows() != self.n {
            return Err(dim_mismatch(self.n, m.rows()));
        }
        let mut out = DenseMatrix::zeros(self.n, m.cols());
        for i in 0..self.n {
            let out_row = out.row_mut(i);
            for (j, v) in self.row(i) {
                for (o, x) in out_row.iter_mut().zip(m.row(j)) {
                    *o += v * x;
                }
            }
        }
        Ok(out)
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        crate::dense::dot(x, &y)
    }

    /// `shift·I + scale·self`.
    pub fn scaled_plus_identity(&self, scale: f64, shift: f64) -> Self {
        Self::from_triplets(
            self.n,
            (0..self.n)
                .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, scale * v)))
                .chain((0..self.n).map(|i| (i, i, shift))),
        )
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d.set(i, j, v);
            }
        }
        d
    }

    /// Structural and numerical symmetry, with sorted unique columns.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            let cols = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for (j, v) in self.row(i) {
                let (a, b) = (self.row_ptr[j], self.row_ptr[j + 1]);
                match self.col_idx[a..b].binary_search(&i) {
                    Ok(k) if (self.values[a + k] - v).abs() <= tol => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Row-wise diagonal dominance: `A_kk ≥ Σ_{i≠k} |A_ki|` for every row.
    pub fn is_diagonally_dominant(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    diag = v;
                } else {
                    off += v.abs();
                }
            }
            diag + tol >= off
        })
    }

    /// Congruence `S A S` with `S = diag(s)`.
    pub fn diagonal_congruence(&self, s: &[f64]) -> Self {
        Self::from_triplets(
            self.n,
            (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, s[i] * v * s[j]))),
        )
    }

    /// Gershgorin upper bound on the largest eigenvalue. With `scaling = s`
    /// the discs of `S⁻¹AS` are used instead (same spectrum, any `s > 0`);
    /// the smaller of the plain and scaled bounds is returned.
    pub fn gershgorin_upper_bound(&self, scaling: Option<&[f64]>) -> f64 {
        let plain = (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| if j == i { v } else { v.abs() }).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let scaled = scaling.map(|s| {
            (0..self.n)
                .map(|i| {
                    self.row(i)
                        .map(|(j, v)| if j == i { v } else { v.abs() * s[j] / s[i] })
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        });
        let bound = match scaled {
            Some(b) => plain.min(b),
            None => plain,
        };
        if self.n == 0 {
            0.0
        } else {
            bound
        }
    }
}
