use super::DenseMatrix;

/// Compressed sparse row matrix of `f64`.
///
/// Column indices are sorted within each row and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a CSR matrix from `(row, col, value)` triplets.
    ///
    /// Triplets may arrive in any order; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted = triplets.to_vec();
        for &(r, c, _) in &sorted {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
        }
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            col_indices.push(c);
            values.push(v);
            row_offsets[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Builds a matrix directly from CSR arrays, checking the structural invariants.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(row_offsets.len(), rows + 1, "row_offsets must have rows + 1 entries");
        assert_eq!(row_offsets[0], 0);
        assert_eq!(*row_offsets.last().unwrap(), col_indices.len());
        assert_eq!(col_indices.len(), values.len());
        for r in 0..rows {
            assert!(row_offsets[r] <= row_offsets[r + 1], "row_offsets decrease at {r}");
            let cols_in_row = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            assert!(
                cols_in_row.windows(2).all(|w| w[0] < w[1]),
                "column indices of row {r} are not strictly increasing"
            );
            assert!(cols_in_row.iter().all(|&c| c < cols));
        }
        assert!(values.iter().all(|v| !v.is_nan()), "NaN in sparse values");
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_offsets: vec![0; rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values stored in row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Stored value at `(r, c)`, or 0 when the entry is structurally absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |k| vals[k])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[(r, c)] = v;
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, r, v));
            }
        }
        SparseMatrix::from_triplets(self.cols, self.rows, &triplets)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }
}

/// Sparse-dense product `s * d`.
pub fn spmm(s: &SparseMatrix, d: &DenseMatrix) -> DenseMatrix {
    assert_eq!(
        s.cols(),
        d.rows(),
        "spmm: ({}x{}) * ({}x{})",
        s.rows(),
        s.cols(),
        d.rows(),
        d.cols()
    );
    let n = d.cols();
    let mut out = DenseMatrix::zeros(s.rows(), n);
    let dv = d.as_slice();
    let ov = out.as_mut_slice();
    for r in 0..s.rows() {
        let (cols, vals) = s.row(r);
        let out_row = &mut ov[r * n..(r + 1) * n];
        for (&c, &w) in cols.iter().zip(vals) {
            let d_row = &dv[c * n..(c + 1) * n];
            for (o, &x) in out_row.iter_mut().zip(d_row) {
                *o += w * x;
            }
        }
    }
    out
}
