//! Compressed sparse row storage and the O(faces) assembly used for stiffness matrices.

/// Square sparse matrix in CSR form with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles `sum_e P_e^T K_e P_e` from element blocks of a fixed arity.
    ///
    /// Entries are bucketed per row, then each (short) row is sorted and merged,
    /// so the cost is linear in the number of elements. Duplicate entries are
    /// summed in element order, which keeps the result bit-reproducible.
    pub fn from_element_blocks<const K: usize>(n: usize, elements: &[([usize; K], [[f64; K]; K])]) -> Self {
        let mut count = vec![0usize; n + 1];
        for (idx, _) in elements {
            for &r in idx {
                count[r + 1] += K;
            }
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let total = count[n];
        let mut tmp: Vec<(usize, f64)> = vec![(0, 0.0); total];
        for (idx, block) in elements {
            for (a, &r) in idx.iter().enumerate() {
                for (b, &c) in idx.iter().enumerate() {
                    tmp[fill[r]] = (c, block[a][b]);
                    fill[r] += 1;
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::with_capacity(total / 2);
        let mut val = Vec::with_capacity(total / 2);
        row_ptr.push(0);
        for r in 0..n {
            let row = &mut tmp[count[r]..count[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut s = 0.0;
                while i < row.len() && row[i].0 == c {
                    s += row[i].1;
                    i += 1;
                }
                col.push(c);
                val.push(s);
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    /// Builds from rows of `(column, value)` pairs (already merged).
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Row-wise sum of |a_ij x_j|: the natural rounding scale of `A x`.
    pub fn abs_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, a)| (a * x[j]).abs()).sum()).collect()
    }

    /// Restriction to `rows x cols` (given as index maps into the full matrix).
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut local = vec![usize::MAX; self.n];
        for (k, &c) in cols.iter().enumerate() {
            local[c] = k;
        }
        let mut row_ptr = vec![0];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for &r in rows {
            for (c, v) in self.row(r) {
                if local[c] != usize::MAX {
                    col.push(local[c]);
                    val.push(v);
                }
            }
            row_ptr.push(col.len());
        }
        CsrMatrix { n: rows.len(), row_ptr, col, val }
    }

    /// Like [`CsrMatrix::block`] but for a rectangular block; multiplication maps `cols` space into `rows` space.
    pub fn rect_block(&self, rows: &[usize], cols: &[usize]) -> RectCsr {
        let inner = self.block(rows, cols);
        RectCsr { inner, ncols: cols.len() }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }
}

/// Rectangular CSR block (rows may reference a column space of different size).
#[derive(Debug, Clone)]
pub struct RectCsr {
    inner: CsrMatrix,
    ncols: usize,
}

impl RectCsr {
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        self.inner.mul_vec(x)
    }
}
