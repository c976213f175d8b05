//! Linear algebra over F2.
//!
//! Dense vectors and matrices are bit-packed into 64-bit words. Large cobar
//! differentials are handled by the sparse column format in [`sparse`].

use std::fmt;

use thiserror::Error;

pub mod sparse;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subspace not contained in ambient subspace (complex is not a complex?)")]
    NotContained,
}

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A bit-packed vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; words_for(len)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, other characters ignored.
    pub fn parse(s: &str) -> Self {
        let bits: Vec<bool> = s.chars().filter(|c| *c == '0' || *c == '1').map(|c| c == '1').collect();
        Self::from_bits(&bits)
    }

    pub fn from_ones<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if b {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, o: &BitVec) {
        debug_assert_eq!(self.len, o.len);
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * WORD + b)
            })
        })
    }

    pub fn dot(&self, o: &BitVec) -> bool {
        debug_assert_eq!(self.len, o.len);
        self.words.iter().zip(&o.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Row-major bit-packed matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix { rows, cols, data: vec![BitVec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self, LinalgError> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch { expected: cols, got: r.len() });
        }
        Ok(F2Matrix { rows: rows.len(), cols, data: rows })
    }

    /// Matrix from strings of `0`/`1`, one per row.
    pub fn parse(rows: &[&str]) -> Self {
        let data: Vec<BitVec> = rows.iter().map(|r| BitVec::parse(r)).collect();
        let cols = data.first().map_or(0, BitVec::len);
        Self::from_rows(cols, data).expect("ragged rows")
    }

    /// Matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(LinalgError::DimensionMismatch { expected: rows, got: c.len() });
            }
            for i in c.ones() {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.data[i].set(j, b)
    }

    pub fn column(&self, j: usize) -> BitVec {
        BitVec::from_ones(self.rows, (0..self.rows).filter(|&i| self.get(i, j)))
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.cols, self.rows);
        for (i, r) in self.data.iter().enumerate() {
            for j in r.ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        Ok(BitVec::from_ones(self.rows, (0..self.rows).filter(|&i| self.data[i].dot(x))))
    }

    pub fn mul(&self, o: &F2Matrix) -> Result<F2Matrix, LinalgError> {
        if o.rows != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, got: o.rows });
        }
        let mut out = F2Matrix::zeros(self.rows, o.cols);
        for (i, r) in self.data.iter().enumerate() {
            for k in r.ones() {
                out.data[i].xor_assign(&o.data[k]);
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    pub fn rank(&self) -> usize {
        SubspaceBasis::from_vectors(self.cols, self.data.iter().cloned()).dim()
    }
}

/// A subspace of `F2^ambient_dim` held in reduced row-echelon form.
///
/// Pivots are lowest set bits and strictly increase along `vectors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl SubspaceBasis {
    pub fn zero(ambient_dim: usize) -> Self {
        SubspaceBasis { ambient_dim, vectors: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::from_vectors(ambient_dim, (0..ambient_dim).map(|i| BitVec::unit(ambient_dim, i)))
    }

    pub fn from_vectors<I: IntoIterator<Item = BitVec>>(ambient_dim: usize, vs: I) -> Self {
        let mut b = Self::zero(ambient_dim);
        for v in vs {
            b.insert(v);
        }
        b
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[BitVec] {
        &self.vectors
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after clearing every pivot position.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut r = v.clone();
        for (b, &p) in self.vectors.iter().zip(&self.pivots) {
            if r.get(p) {
                r.xor_assign(b);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Coordinates of `v` in `vectors`, if `v` lies in the span.
    pub fn coordinates(&self, v: &BitVec) -> Option<BitVec> {
        if !self.contains(v) {
            return None;
        }
        Some(BitVec::from_ones(self.dim(), self.pivots.iter().enumerate().filter(|(_, &p)| v.get(p)).map(|(k, _)| k)))
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: BitVec) -> bool {
        assert_eq!(v.len(), self.ambient_dim, "vector length differs from ambient dimension");
        let r = self.reduce(&v);
        let Some(p) = r.first_one() else {
            return false;
        };
        for b in &mut self.vectors {
            if b.get(p) {
                b.xor_assign(&r);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.vectors.insert(at, r);
        true
    }

    pub fn is_subspace_of(&self, o: &SubspaceBasis) -> bool {
        self.vectors.iter().all(|v| o.contains(v))
    }
}

/// Column echelon form of a matrix, remembering which input columns produce
/// each reduced column.
struct ColumnEchelon {
    rows: usize,
    /// pivot row -> (reduced column, combination of original columns)
    by_pivot: Vec<Option<(BitVec, BitVec)>>,
    kernel: Vec<BitVec>,
}

impl ColumnEchelon {
    fn new(m: &F2Matrix) -> Self {
        let t = m.transpose();
        let mut by_pivot: Vec<Option<(BitVec, BitVec)>> = vec![None; m.rows()];
        let mut kernel = Vec::new();
        for j in 0..m.cols() {
            let mut v = t.row(j).clone();
            let mut track = BitVec::unit(m.cols(), j);
            loop {
                match v.first_one() {
                    None => {
                        kernel.push(track);
                        break;
                    }
                    Some(p) => match &by_pivot[p] {
                        Some((w, tw)) => {
                            v.xor_assign(w);
                            track.xor_assign(tw);
                        }
                        None => {
                            by_pivot[p] = Some((v, track));
                            break;
                        }
                    },
                }
            }
        }
        ColumnEchelon { rows: m.rows(), by_pivot, kernel }
    }

    fn solve(&self, b: &BitVec, cols: usize) -> Option<BitVec> {
        let mut v = b.clone();
        let mut x = BitVec::zeros(cols);
        while let Some(p) = v.first_one() {
            let (w, tw) = self.by_pivot[p].as_ref()?;
            v.xor_assign(w);
            x.xor_assign(tw);
        }
        Some(x)
    }

    fn image_vectors(&self) -> impl Iterator<Item = BitVec> + '_ {
        self.by_pivot.iter().flatten().map(|(w, _)| w.clone())
    }
}

/// Result of [`rank_kernel_image`].
#[derive(Clone, Debug)]
pub struct RankKernelImage {
    pub rank: usize,
    pub kernel: SubspaceBasis,
    pub image: SubspaceBasis,
}

pub fn rank_kernel_image(m: &F2Matrix) -> RankKernelImage {
    let e = ColumnEchelon::new(m);
    let image = SubspaceBasis::from_vectors(e.rows, e.image_vectors());
    let kernel = SubspaceBasis::from_vectors(m.cols(), e.kernel.iter().cloned());
    RankKernelImage { rank: image.dim(), kernel, image }
}

/// Some `x` with `m * x = b`, or `None` if there is none.
pub fn solve(m: &F2Matrix, b: &BitVec) -> Result<Option<BitVec>, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch { expected: m.rows(), got: b.len() });
    }
    Ok(ColumnEchelon::new(m).solve(b, m.cols()))
}

/// Cycle representatives completing `boundaries` to a basis of `cycles`.
pub fn quotient_basis(cycles: &SubspaceBasis, boundaries: &SubspaceBasis) -> Result<SubspaceBasis, LinalgError> {
    if cycles.ambient_dim() != boundaries.ambient_dim() {
        return Err(LinalgError::DimensionMismatch { expected: cycles.ambient_dim(), got: boundaries.ambient_dim() });
    }
    if !boundaries.is_subspace_of(cycles) {
        return Err(LinalgError::NotContained);
    }
    let mut span = boundaries.clone();
    let mut reps = Vec::new();
    for c in cycles.vectors() {
        let r = span.reduce(c);
        if !r.is_zero() {
            span.insert(r.clone());
            reps.push(r);
        }
    }
    Ok(SubspaceBasis::from_vectors(cycles.ambient_dim(), reps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_vectors(n: usize) -> impl Iterator<Item = BitVec> {
        (0u32..(1 << n)).map(move |k| BitVec::from_ones(n, (0..n).filter(|i| k >> i & 1 == 1)))
    }

    #[test]
    fn identity_and_zero() {
        let r = rank_kernel_image(&F2Matrix::identity(3));
        assert_eq!((r.rank, r.kernel.dim(), r.image.dim()), (3, 0, 3));
        let r = rank_kernel_image(&F2Matrix::zeros(2, 5));
        assert_eq!((r.rank, r.kernel.dim()), (0, 5));
    }

    #[test]
    fn cyclic_rows_match_brute_force() {
        let m = F2Matrix::parse(&["110", "011", "101"]);
        let r = rank_kernel_image(&m);
        assert_eq!(r.rank, 2);
        let brute: Vec<BitVec> = all_vectors(3).filter(|v| m.mul_vec(v).unwrap().is_zero()).collect();
        assert_eq!(brute, vec![BitVec::parse("000"), BitVec::parse("111")]);
        assert_eq!(r.kernel.vectors(), &[BitVec::parse("111")]);
    }

    #[test]
    fn solving() {
        let b = BitVec::parse("101");
        assert_eq!(solve(&F2Matrix::identity(3), &b).unwrap(), Some(b.clone()));
        assert_eq!(solve(&F2Matrix::zeros(3, 3), &b).unwrap(), None);
        let m = F2Matrix::parse(&["110", "011"]);
        let target = BitVec::parse("10");
        let x = solve(&m, &target).unwrap().unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), target);
        let brute: Vec<BitVec> = all_vectors(3).filter(|v| m.mul_vec(v).unwrap() == target).collect();
        assert!(brute.contains(&x));
        assert_eq!(brute.len(), 2);
        assert!(matches!(solve(&m, &BitVec::zeros(3)), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn quotients() {
        let full = SubspaceBasis::full(3);
        assert_eq!(quotient_basis(&full, &SubspaceBasis::zero(3)).unwrap().dim(), 3);
        assert_eq!(quotient_basis(&full, &full).unwrap().dim(), 0);

        let cycles = SubspaceBasis::from_vectors(3, [BitVec::parse("100"), BitVec::parse("010")]);
        let bounds = SubspaceBasis::from_vectors(3, [BitVec::parse("110")]);
        let q = quotient_basis(&cycles, &bounds).unwrap();
        assert_eq!(q.dim(), 1);
        let rep = &q.vectors()[0];
        // brute-force coset check: rep + every boundary is nonzero
        for k in 0..2u32 {
            let mut v = rep.clone();
            if k == 1 {
                v.xor_assign(&BitVec::parse("110"));
            }
            assert!(!v.is_zero());
        }
        assert!(cycles.contains(rep));

        let bad = SubspaceBasis::from_vectors(3, [BitVec::parse("001")]);
        assert_eq!(quotient_basis(&cycles, &bad), Err(LinalgError::NotContained));
    }

    #[test]
    fn rref_pivots_increase() {
        let s = SubspaceBasis::from_vectors(4, [BitVec::parse("0110"), BitVec::parse("1100"), BitVec::parse("1010")]);
        assert_eq!(s.dim(), 2);
        assert!(s.pivots().windows(2).all(|w| w[0] < w[1]));
        for (v, &p) in s.vectors().iter().zip(s.pivots()) {
            assert_eq!(v.first_one(), Some(p));
            for &q in s.pivots().iter().filter(|&&q| q != p) {
                assert!(!v.get(q));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = F2Matrix> {
            (1usize..9, 1usize..9).prop_flat_map(|(r, c)| {
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
                    .prop_map(move |rows| F2Matrix::from_rows(c, rows.iter().map(|b| BitVec::from_bits(b)).collect()).unwrap())
            })
        }

        proptest! {
            #[test]
            fn rank_is_transpose_invariant(m in matrix()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn kernel_and_image_are_honest(m in matrix()) {
                let r = rank_kernel_image(&m);
                prop_assert_eq!(r.rank + r.kernel.dim(), m.cols());
                for v in r.kernel.vectors() {
                    prop_assert!(m.mul_vec(v).unwrap().is_zero());
                }
                for w in r.image.vectors() {
                    let x = solve(&m, w).unwrap();
                    prop_assert!(x.is_some());
                    prop_assert_eq!(&m.mul_vec(&x.unwrap()).unwrap(), w);
                }
            }

            #[test]
            fn quotient_reps_independent(m in matrix(), n in matrix()) {
                // cycles = ker m, boundaries = a random subspace of ker m
                let cyc = rank_kernel_image(&m).kernel;
                let picks: Vec<BitVec> = cyc.vectors().iter().enumerate()
                    .filter(|(i, _)| n.cols() > *i && n.get(0, *i))
                    .map(|(_, v)| v.clone()).collect();
                let bnd = SubspaceBasis::from_vectors(m.cols(), picks);
                let q = quotient_basis(&cyc, &bnd).unwrap();
                prop_assert_eq!(q.dim() + bnd.dim(), cyc.dim());
                let mut all = bnd.clone();
                for v in q.vectors() {
                    prop_assert!(all.insert(v.clone()));
                }
            }
        }
    }
}
