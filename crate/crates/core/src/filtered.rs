//! Reduction of a finite filtered cochain complex.
//!
//! One slice of a cochain complex `C^0 -> C^1 -> ... -> C^{top+1}` whose
//! terms carry a decreasing filtration by subcomplexes. Basis elements of
//! each `C^s` are listed with non-decreasing filtration level, so `F^p` is
//! spanned by a suffix of the basis.
//!
//! Columns are reduced in decreasing order of level, each against columns
//! with level at least its own, with the pivot of a column being its lowest
//! row. The result pairs basis elements `(x in C^s, y in C^{s+1})` so that
//! the pair kills each other on page `level(y) - level(x)`; unpaired
//! elements are the cohomology. Ext dimensions, cocycle representatives,
//! coboundary tests and every page of the spectral sequence of the
//! filtration are read off this single pass.

use std::collections::HashMap;

use crate::f2_linalg::sparse::{add_sorted, SparseMatrix};
use crate::f2_linalg::BitVec;

/// A materialized filtered slice.
#[derive(Clone, Debug, Default)]
pub struct FilteredComplex {
    /// `levels[s][i]`: filtration level of basis element `i` of `C^s`.
    pub levels: Vec<Vec<u32>>,
    /// `d[s] : C^s -> C^{s+1}`.
    pub d: Vec<SparseMatrix>,
}

impl FilteredComplex {
    pub fn dim(&self, s: usize) -> usize {
        self.levels.get(s).map_or(0, Vec::len)
    }

    /// Highest `s` whose outgoing differential is present.
    pub fn top(&self) -> Option<usize> {
        self.d.len().checked_sub(1)
    }

    pub fn check_shape(&self) -> Result<(), String> {
        if self.levels.len() != self.d.len() + 1 {
            return Err(format!("{} terms but {} differentials", self.levels.len(), self.d.len()));
        }
        for (s, d) in self.d.iter().enumerate() {
            if d.ncols() != self.dim(s) || d.nrows() != self.dim(s + 1) {
                return Err(format!("d[{s}] has shape {}x{}", d.nrows(), d.ncols()));
            }
            for (j, col) in d.columns().iter().enumerate() {
                if let Some(&low) = col.first() {
                    if self.levels[s + 1][low as usize] < self.levels[s][j] {
                        return Err(format!("d[{s}] lowers filtration at column {j}"));
                    }
                }
            }
        }
        for lv in &self.levels {
            if lv.windows(2).any(|w| w[0] > w[1]) {
                return Err("levels not sorted".into());
            }
        }
        Ok(())
    }

    pub fn squares_to_zero(&self) -> bool {
        self.d.windows(2).all(|w| w[1].composes_to_zero(&w[0]))
    }

    /// Renumbers the basis: element `i` of `C^s` moves to `perm[s][i]`.
    pub fn permuted(&self, perm: &[Vec<u32>]) -> FilteredComplex {
        let levels = self
            .levels
            .iter()
            .zip(perm)
            .map(|(lv, p)| {
                let mut out = vec![0; lv.len()];
                for (i, &l) in lv.iter().enumerate() {
                    out[p[i] as usize] = l;
                }
                out
            })
            .collect();
        let d = self
            .d
            .iter()
            .enumerate()
            .map(|(s, m)| {
                let mut cols = vec![Vec::new(); m.ncols()];
                for (j, col) in m.columns().iter().enumerate() {
                    let mut c: Vec<u32> = col.iter().map(|&r| perm[s + 1][r as usize]).collect();
                    c.sort_unstable();
                    cols[perm[s][j] as usize] = c;
                }
                SparseMatrix::from_columns(m.nrows(), cols)
            })
            .collect();
        FilteredComplex { levels, d }
    }
}

/// Pairing data for the basis of one `C^s`.
#[derive(Clone, Debug, Default)]
struct Degree {
    /// Partner in `C^{s-1}` (this element is the pivot of its reduced column).
    below: Vec<Option<u32>>,
    /// Partner in `C^{s+1}` (pivot of this element's reduced column).
    above: Vec<Option<u32>>,
    /// Whether `above` is known, i.e. `d[s]` has been reduced.
    above_known: bool,
    /// Reduced columns of `d[s-1]` keyed by pivot, spanning the coboundaries.
    boundaries: HashMap<u32, Vec<u32>>,
    /// Cocycle representatives of essential elements, keyed by leading index.
    reps: Vec<(u32, Vec<u32>)>,
    reps_known: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expressed {
    Boundary,
    Class(BitVec),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("element is not a cocycle")]
    NotCocycle,
    #[error("degree {0} is not reduced far enough")]
    NotComputed(usize),
}

/// A finite page spot: cohomological degree and filtration level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spot {
    pub s: usize,
    pub level: u32,
}

/// A pair `x -> y` in the canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pair {
    pub s: usize,
    pub source: u32,
    pub target: u32,
    pub source_level: u32,
    pub target_level: u32,
}

impl Pair {
    pub fn length(&self) -> u32 {
        self.target_level - self.source_level
    }
}

#[derive(Clone, Debug)]
pub struct SliceReduction {
    levels: Vec<Vec<u32>>,
    degrees: Vec<Degree>,
}

/// Which degrees get cocycle representatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reps {
    None,
    UpTo(usize),
    All,
}

impl Reps {
    fn wants(self, s: usize) -> bool {
        match self {
            Reps::None => false,
            Reps::UpTo(k) => s <= k,
            Reps::All => true,
        }
    }
}

impl SliceReduction {
    pub fn new(c: &FilteredComplex, reps: Reps) -> Self {
        let n = c.levels.len();
        let mut degrees: Vec<Degree> = c
            .levels
            .iter()
            .map(|lv| Degree { below: vec![None; lv.len()], above: vec![None; lv.len()], ..Default::default() })
            .collect();
        for (s, d) in c.d.iter().enumerate() {
            let track = reps.wants(s);
            let (lower, upper) = degrees.split_at_mut(s + 1);
            reduce_degree(d, &mut lower[s], &mut upper[0], track);
        }
        if let Some(last) = degrees.last_mut() {
            last.above_known = false;
        }
        debug_assert_eq!(degrees.len(), n);
        SliceReduction { levels: c.levels.clone(), degrees }
    }

    pub fn top(&self) -> Option<usize> {
        self.degrees.iter().rposition(|d| d.above_known)
    }

    pub fn dim(&self, s: usize) -> usize {
        self.levels.get(s).map_or(0, Vec::len)
    }

    pub fn level(&self, s: usize, i: u32) -> u32 {
        self.levels[s][i as usize]
    }

    fn degree(&self, s: usize) -> Result<&Degree, ReductionError> {
        match self.degrees.get(s) {
            Some(d) if d.above_known => Ok(d),
            _ => Err(ReductionError::NotComputed(s)),
        }
    }

    /// Essential (unpaired) basis elements of `C^s`, ascending.
    pub fn essential(&self, s: usize) -> Result<Vec<u32>, ReductionError> {
        let d = self.degree(s)?;
        Ok((0..d.below.len() as u32)
            .filter(|&i| d.below[i as usize].is_none() && d.above[i as usize].is_none())
            .collect())
    }

    pub fn ext_dim(&self, s: usize) -> Result<usize, ReductionError> {
        Ok(self.essential(s)?.len())
    }

    /// Cocycle representatives, one per essential element, ascending by
    /// leading index.
    pub fn representatives(&self, s: usize) -> Result<Vec<Vec<u32>>, ReductionError> {
        let d = self.degree(s)?;
        if !d.reps_known {
            return Err(ReductionError::NotComputed(s));
        }
        Ok(d.reps.iter().map(|(_, v)| v.clone()).collect())
    }

    /// Whether a cochain `x` of `C^s` is a coboundary. Needs only `d[s-1]`.
    pub fn is_boundary(&self, s: usize, x: &[u32]) -> Result<bool, ReductionError> {
        if s == 0 {
            return Ok(x.is_empty());
        }
        self.degrees.get(s - 1).filter(|d| d.above_known).ok_or(ReductionError::NotComputed(s - 1))?;
        let d = &self.degrees[s];
        let mut v = x.to_vec();
        let mut scratch = Vec::new();
        while let Some(&p) = v.first() {
            match d.boundaries.get(&p) {
                Some(b) => add_sorted(&mut v, b, &mut scratch),
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Coordinates of the class of the cocycle `x` in the representative basis.
    pub fn express(&self, s: usize, x: &[u32]) -> Result<Expressed, ReductionError> {
        let d = self.degree(s)?;
        if !d.reps_known {
            return Err(ReductionError::NotComputed(s));
        }
        let rep_pos: HashMap<u32, usize> = d.reps.iter().enumerate().map(|(k, (lead, _))| (*lead, k)).collect();
        let mut coords = BitVec::zeros(d.reps.len());
        let mut v = x.to_vec();
        let mut scratch = Vec::new();
        while let Some(&p) = v.first() {
            if let Some(b) = d.boundaries.get(&p) {
                add_sorted(&mut v, b, &mut scratch);
            } else if let Some(&k) = rep_pos.get(&p) {
                add_sorted(&mut v, &d.reps[k].1, &mut scratch);
                coords.flip(k);
            } else {
                return Err(ReductionError::NotCocycle);
            }
        }
        Ok(if coords.is_zero() { Expressed::Boundary } else { Expressed::Class(coords) })
    }

    /// All pairs `C^s -> C^{s+1}` of the canonical form.
    pub fn pairs(&self, s: usize) -> Result<Vec<Pair>, ReductionError> {
        let d = self.degree(s)?;
        Ok(d.above
            .iter()
            .enumerate()
            .filter_map(|(j, a)| {
                a.map(|i| Pair {
                    s,
                    source: j as u32,
                    target: i,
                    source_level: self.levels[s][j],
                    target_level: self.levels[s + 1][i as usize],
                })
            })
            .collect())
    }

    /// Remaining lifetime of an element of `C^s`: the page on which it is
    /// hit or supports a differential, `None` if it survives forever.
    fn lifetime(&self, s: usize, i: usize) -> Option<u32> {
        let d = &self.degrees[s];
        if let Some(k) = d.below[i] {
            return Some(self.levels[s][i] - self.levels[s - 1][k as usize]);
        }
        d.above[i].map(|k| self.levels[s + 1][k as usize] - self.levels[s][i])
    }

    /// Fate of every basis element of `C^s` for `s` up to the top, in basis
    /// order: `Some((r, true))` if it supports `d_r`, `Some((r, false))` if
    /// it is hit by `d_r`, `None` if it survives.
    pub fn fates(&self) -> Result<Vec<(Spot, Option<(u32, bool)>)>, ReductionError> {
        let top = self.top().ok_or(ReductionError::NotComputed(0))?;
        let mut out = Vec::new();
        for s in 0..=top {
            let d = &self.degrees[s];
            for i in 0..self.dim(s) {
                let level = self.levels[s][i];
                let fate = match (d.below[i], d.above[i]) {
                    (Some(k), _) => Some((level - self.levels[s - 1][k as usize], false)),
                    (None, Some(k)) => Some((self.levels[s + 1][k as usize] - level, true)),
                    (None, None) => None,
                };
                out.push((Spot { s, level }, fate));
            }
        }
        Ok(out)
    }

    /// Dimension of `E_r` at every spot with `s` at most the top, as a map
    /// from spot to dimension (zero spots omitted). Page `r = 0` is the
    /// associated graded complex.
    pub fn page_dims(&self, r: u32) -> Result<Vec<(Spot, usize)>, ReductionError> {
        let top = self.top().ok_or(ReductionError::NotComputed(0))?;
        let mut out: Vec<(Spot, usize)> = Vec::new();
        for s in 0..=top {
            for i in 0..self.dim(s) {
                let alive = match self.lifetime(s, i) {
                    None => true,
                    Some(l) => l >= r,
                };
                if alive {
                    let spot = Spot { s, level: self.levels[s][i] };
                    match out.last_mut() {
                        Some((sp, n)) if *sp == spot => *n += 1,
                        _ => out.push((spot, 1)),
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rank of `d_r` between spots, as `(source, target, rank)` triples.
    pub fn page_differentials(&self, r: u32) -> Result<Vec<(Spot, Spot, usize)>, ReductionError> {
        let top = self.top().ok_or(ReductionError::NotComputed(0))?;
        let mut counts: std::collections::BTreeMap<(Spot, Spot), usize> = Default::default();
        for s in 0..=top {
            for p in self.pairs(s)? {
                if p.length() == r {
                    let a = Spot { s, level: p.source_level };
                    let b = Spot { s: s + 1, level: p.target_level };
                    *counts.entry((a, b)).or_default() += 1;
                }
            }
        }
        Ok(counts.into_iter().map(|((a, b), n)| (a, b, n)).collect())
    }

    /// Longest differential length occurring in the slice.
    pub fn max_length(&self) -> Result<Option<u32>, ReductionError> {
        let top = self.top().ok_or(ReductionError::NotComputed(0))?;
        let mut m = None;
        for s in 0..=top {
            for p in self.pairs(s)? {
                m = m.max(Some(p.length()));
            }
        }
        Ok(m)
    }
}

fn reduce_degree(d: &SparseMatrix, here: &mut Degree, next: &mut Degree, track: bool) {
    let ncols = d.ncols();
    let mut reduced: Vec<Option<Vec<u32>>> = vec![None; ncols];
    let mut tracks: Vec<Option<Vec<u32>>> = vec![None; ncols];
    let mut owner: HashMap<u32, u32> = HashMap::new();
    let mut scratch = Vec::new();
    for j in (0..ncols).rev() {
        if here.below[j].is_some() {
            // Clearing: this element is already a coboundary target.
            continue;
        }
        let mut col = d.column(j).to_vec();
        let mut v = if track { vec![j as u32] } else { Vec::new() };
        while let Some(&p) = col.first() {
            match owner.get(&p) {
                Some(&k) => {
                    add_sorted(&mut col, reduced[k as usize].as_ref().expect("owner has column"), &mut scratch);
                    if track {
                        add_sorted(&mut v, tracks[k as usize].as_ref().expect("tracked"), &mut scratch);
                    }
                }
                None => break,
            }
        }
        if let Some(&p) = col.first() {
            owner.insert(p, j as u32);
            here.above[j] = Some(p);
            next.below[p as usize] = Some(j as u32);
            reduced[j] = Some(col);
            if track {
                tracks[j] = Some(v);
            }
        } else {
            reduced[j] = Some(Vec::new());
            if track {
                v.sort_unstable();
                here.reps.push((j as u32, v.clone()));
                tracks[j] = Some(v);
            }
        }
    }
    here.above_known = true;
    here.reps_known = track;
    here.reps.sort_by_key(|(lead, _)| *lead);
    for (p, j) in owner {
        next.boundaries.insert(p, reduced[j as usize].take().expect("pivot column"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A tiny filtered complex: C^0 = <a (level 0)>, C^1 = <b (level 0), c (level 2)>,
    /// C^2 = <e (level 3)>, d(a) = c, d(b) = e.
    fn toy() -> FilteredComplex {
        FilteredComplex {
            levels: vec![vec![0], vec![0, 2], vec![3]],
            d: vec![SparseMatrix::from_columns(2, vec![vec![1]]), SparseMatrix::from_columns(1, vec![vec![0], vec![]])],
        }
    }

    #[test]
    fn toy_pages() {
        let c = toy();
        c.check_shape().unwrap();
        assert!(c.squares_to_zero());
        let red = SliceReduction::new(&c, Reps::All);
        assert_eq!(red.ext_dim(0).unwrap(), 0);
        assert_eq!(red.ext_dim(1).unwrap(), 0);
        assert_eq!(red.page_differentials(2).unwrap(), vec![(Spot { s: 0, level: 0 }, Spot { s: 1, level: 2 }, 1)]);
        assert_eq!(red.page_differentials(3).unwrap(), vec![(Spot { s: 1, level: 0 }, Spot { s: 2, level: 3 }, 1)]);
        assert_eq!(red.page_dims(1).unwrap().len(), 3);
        assert!(red.page_dims(4).unwrap().is_empty());
        assert_eq!(red.is_boundary(1, &[1]), Ok(true));
        assert_eq!(red.express(1, &[1]), Ok(Expressed::Boundary));
        assert_eq!(red.express(1, &[0]), Err(ReductionError::NotCocycle));
    }
}
