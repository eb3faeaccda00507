use crate::Scalar;

/// Square matrix stored as per-row lists of `(column, value)` pairs.
///
/// Jacobians of pPDA-derived systems have a handful of non-zeros per row, so
/// power iteration on the sparse form stays linear in the number of terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Builds from row lists. Entries within a row are sorted by column and
    /// duplicate columns are summed; explicit zeros are dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let n = rows.len();
        let rows = rows
            .into_iter()
            .map(|mut row| {
                assert!(row.iter().all(|(j, _)| *j < n), "column out of range");
                row.sort_by_key(|(j, _)| *j);
                let mut merged: Vec<(usize, T)> = Vec::with_capacity(row.len());
                for (j, v) in row {
                    match merged.last_mut() {
                        Some((last, acc)) if *last == j => *acc = acc.clone() + v,
                        _ => merged.push((j, v)),
                    }
                }
                merged.retain(|(_, v)| !v.is_zero());
                merged
            })
            .collect();
        SparseMatrix { n, rows }
    }

    pub fn from_dense(dense: &[Vec<T>]) -> Self {
        let rows = dense
            .iter()
            .map(|row| {
                assert_eq!(row.len(), dense.len(), "matrix must be square");
                row.iter().cloned().enumerate().collect()
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            rows: (0..n).map(|i| vec![(i, T::one())]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .map(|pos| self.rows[i][pos].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                out[i][*j] = v.clone();
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(T::zero(), |acc, (j, v)| acc + v.clone() * x[*j].clone())
            })
            .collect()
    }

    /// `self + c * I`.
    pub fn shifted(&self, c: T) -> Self {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut row = row.clone();
                row.push((i, c.clone()));
                row
            })
            .collect();
        Self::from_rows(rows)
    }

    /// Maximum absolute row sum. Entries are assumed non-negative.
    pub fn norm_inf(&self) -> T {
        self.rows
            .iter()
            .map(|row| row.iter().fold(T::zero(), |acc, (_, v)| acc + v.clone()))
            .fold(T::zero(), T::max_of)
    }
}
