use crate::error::{check_len, Error, Result};

/// Column store for Krylov or Gram-Schmidt basis vectors.
///
/// Storage is contiguous and column-major. The leading `normalized` columns have
/// unit norm; trailing columns may still be waiting on a lagged normalization
/// (at most two: the lagged column and a freshly appended one).
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovBasis {
    n: usize,
    capacity: usize,
    n_cols: usize,
    normalized: usize,
    data: Vec<f64>,
}

impl KrylovBasis {
    pub fn new(n: usize, capacity: usize) -> Self {
        Self {
            n,
            capacity,
            n_cols: 0,
            normalized: 0,
            data: vec![0.0; n * capacity],
        }
    }

    /// Builds a basis whose columns are `cols`, all marked normalized.
    pub fn from_columns(n: usize, cols: &[Vec<f64>]) -> Result<Self> {
        let mut basis = Self::new(n, cols.len());
        for c in cols {
            basis.push(c)?;
        }
        basis.normalized = basis.n_cols;
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of leading columns with unit norm.
    pub fn normalized(&self) -> usize {
        self.normalized
    }

    /// Number of trailing columns not yet normalized.
    pub fn lag(&self) -> usize {
        self.n_cols - self.normalized
    }

    pub(crate) fn set_normalized(&mut self, count: usize) {
        debug_assert!(count <= self.n_cols);
        self.normalized = count;
    }

    /// Appends an (un-normalized) column.
    pub fn push(&mut self, col: &[f64]) -> Result<()> {
        check_len("KrylovBasis::push", self.n, col.len())?;
        if self.n_cols == self.capacity {
            return Err(Error::CapacityExceeded {
                capacity: self.capacity,
            });
        }
        let start = self.n_cols * self.n;
        self.data[start..start + self.n].copy_from_slice(col);
        self.n_cols += 1;
        Ok(())
    }

    /// Drops columns beyond `n_cols`.
    pub fn truncate(&mut self, n_cols: usize) {
        if n_cols < self.n_cols {
            self.n_cols = n_cols;
            self.normalized = self.normalized.min(n_cols);
        }
    }

    pub fn clear(&mut self) {
        self.n_cols = 0;
        self.normalized = 0;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        assert!(j < self.n_cols, "column {j} out of range ({})", self.n_cols);
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        assert!(j < self.n_cols, "column {j} out of range ({})", self.n_cols);
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    /// Read-only view of the leading `p` columns.
    pub fn leading(&self, p: usize) -> Columns<'_> {
        assert!(p <= self.n_cols, "requested {p} of {} columns", self.n_cols);
        Columns {
            n: self.n,
            p,
            data: &self.data[..p * self.n],
        }
    }

    pub fn all(&self) -> Columns<'_> {
        self.leading(self.n_cols)
    }

    /// Splits into the leading `j` columns and a mutable borrow of column `j`.
    pub fn split_at_column_mut(&mut self, j: usize) -> (Columns<'_>, &mut [f64]) {
        assert!(j < self.n_cols, "column {j} out of range ({})", self.n_cols);
        let n = self.n;
        let (head, tail) = self.data.split_at_mut(j * n);
        (Columns { n, p: j, data: head }, &mut tail[..n])
    }

    pub fn to_columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_cols).map(|j| self.column(j).to_vec()).collect()
    }
}

/// Borrowed block of `p` contiguous column vectors of length `n`.
#[derive(Debug, Clone, Copy)]
pub struct Columns<'a> {
    n: usize,
    p: usize,
    data: &'a [f64],
}

impl<'a> Columns<'a> {
    /// Wraps column-major data holding `data.len() / n` columns.
    pub fn new(n: usize, data: &'a [f64]) -> Self {
        assert!(n > 0 && data.len().is_multiple_of(n) || data.is_empty());
        let p = data.len().checked_div(n).unwrap_or(0);
        Self { n, p, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        self.p == 0
    }

    pub fn column(&self, j: usize) -> &'a [f64] {
        assert!(j < self.p);
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn leading(&self, p: usize) -> Columns<'a> {
        assert!(p <= self.p);
        Columns {
            n: self.n,
            p,
            data: &self.data[..p * self.n],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        let n = self.n.max(1);
        self.data.chunks_exact(n).take(self.p)
    }
}
