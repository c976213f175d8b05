//! Sparse F2 columns: strictly increasing lists of row indices.

use super::{BitVec, F2Matrix};

/// `a += b`, both sorted. `scratch` is reused to avoid allocation.
pub fn add_sorted(a: &mut Vec<u32>, b: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    scratch.reserve(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(a, scratch);
}

/// Sorts and cancels duplicate indices in pairs.
pub fn normalize(v: &mut Vec<u32>) {
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    *v = out;
}

/// Column-major sparse matrix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    columns: Vec<Vec<u32>>,
}

impl SparseMatrix {
    pub fn new(nrows: usize) -> Self {
        SparseMatrix { nrows, columns: Vec::new() }
    }

    pub fn from_columns(nrows: usize, columns: Vec<Vec<u32>>) -> Self {
        debug_assert!(columns.iter().all(|c| c.windows(2).all(|w| w[0] < w[1])));
        debug_assert!(columns.iter().all(|c| c.last().is_none_or(|&r| (r as usize) < nrows)));
        SparseMatrix { nrows, columns }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// `self * x` for a sparse vector `x` of column indices.
    pub fn mul_sparse(&self, x: &[u32]) -> Vec<u32> {
        let mut out = Vec::new();
        for &j in x {
            out.extend_from_slice(&self.columns[j as usize]);
        }
        normalize(&mut out);
        out
    }

    /// `self * other` is zero.
    pub fn composes_to_zero(&self, other: &SparseMatrix) -> bool {
        other.columns.iter().all(|c| self.mul_sparse(c).is_empty())
    }

    pub fn to_dense(&self) -> F2Matrix {
        let cols: Vec<BitVec> =
            self.columns.iter().map(|c| BitVec::from_ones(self.nrows, c.iter().map(|&r| r as usize))).collect();
        F2Matrix::from_columns(self.nrows, &cols).expect("consistent sizes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_addition() {
        let mut a = vec![1, 3, 5];
        let mut s = Vec::new();
        add_sorted(&mut a, &[0, 3, 6], &mut s);
        assert_eq!(a, vec![0, 1, 5, 6]);
        let mut v = vec![4, 1, 4, 2, 4];
        normalize(&mut v);
        assert_eq!(v, vec![1, 2, 4]);
    }

    #[test]
    fn dense_round_trip() {
        let m = SparseMatrix::from_columns(3, vec![vec![0, 2], vec![], vec![1]]);
        let d = m.to_dense();
        assert_eq!(d, F2Matrix::parse(&["100", "001", "100"]));
        assert_eq!(m.mul_sparse(&[0, 2]), vec![0, 1, 2]);
    }
}
