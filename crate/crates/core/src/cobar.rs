//! The reduced cobar complex of `(M2, Gamma)`.
//!
//! A cochain of degree `s` is an `F2`-combination of terms `a [g_1|...|g_s]`
//! with `a` an `M2` monomial written on the far left and each `g_i` a
//! non-unit normal monomial. Coefficients produced inside a word are moved
//! left through the right unit: `g (x) a h = g eta_R(a) (x) h`.
//!
//! For `a [w]`,
//! `d(a [w]) = [eta_R(a) - a | w] + a * sum_i [w_1|...|psi'(w_i)|...|w_s]`
//! where `psi'` is the coproduct with both unit terms removed.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::algebroid::{Algebroid, AlgebroidError, AlgebroidSpec, Family, GammaElement, GammaMonomial, RawProduct};
use crate::f2_linalg::sparse::{normalize, SparseMatrix};
use crate::f2_linalg::{solve, BitVec, F2Matrix};
use crate::filtered::{FilteredComplex, Reps, SliceReduction};
use crate::ground::{BiDegree, M2Element, M2Monomial, TriDegree};

/// Letters are indices into [`Algebroid::monomials`]; index 0 (the unit)
/// never occurs.
pub type Word = SmallVec<[u8; 16]>;

pub const MAX_WORD_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CobarError {
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("elements live over different algebroids")]
    SpecMismatch,
    #[error("term {0} is not in the slice basis")]
    NotInBasis(String),
    #[error("products not bounding: {0} is not a coboundary")]
    NotBounding(String),
    #[error("{0} is not a cocycle")]
    NotCocycle(String),
    #[error("words longer than {MAX_WORD_LEN} letters are not supported")]
    WordTooLong,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("quotient map needs an A-family source")]
    NotAFamily,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CobarTerm {
    pub coeff: M2Monomial,
    pub word: Word,
}

impl CobarTerm {
    pub fn new(coeff: M2Monomial, word: &[u8]) -> Self {
        CobarTerm { coeff, word: Word::from_slice(word) }
    }

    pub fn s(&self) -> usize {
        self.word.len()
    }

    pub fn internal(&self, alg: &Algebroid) -> BiDegree {
        self.word.iter().fold(self.coeff.bidegree(), |b, &l| b + alg.bidegree(l))
    }

    pub fn tridegree(&self, alg: &Algebroid) -> TriDegree {
        TriDegree::from_internal(self.s() as i32, self.internal(alg))
    }

    /// Identifies the word; the coefficient is fixed by the slice degree.
    pub fn key(&self) -> u128 {
        word_key(&self.word)
    }
}

fn word_key(w: &[u8]) -> u128 {
    debug_assert!(w.len() <= MAX_WORD_LEN);
    w.iter().enumerate().fold(0u128, |k, (i, &l)| k | (l as u128) << (8 * i))
}

/// An `F2`-combination of cobar terms over one algebroid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CobarElement {
    spec: AlgebroidSpec,
    terms: Vec<CobarTerm>,
}

impl CobarElement {
    pub fn zero(spec: AlgebroidSpec) -> Self {
        CobarElement { spec, terms: Vec::new() }
    }

    pub fn one(spec: AlgebroidSpec) -> Self {
        Self::from_terms(spec, vec![CobarTerm::new(M2Monomial::ONE, &[])])
    }

    /// Sums the given terms (equal terms cancel in pairs).
    pub fn from_terms(spec: AlgebroidSpec, mut terms: Vec<CobarTerm>) -> Self {
        if spec.rho_killed {
            terms.retain(|t| t.coeff.rho_exp == 0);
        }
        crate::algebroid::normalize_terms_by(&mut terms);
        CobarElement { spec, terms }
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.spec
    }

    pub fn terms(&self) -> &[CobarTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &CobarElement) -> Result<CobarElement, CobarError> {
        if self.spec != o.spec {
            return Err(CobarError::SpecMismatch);
        }
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        Ok(Self::from_terms(self.spec, t))
    }

    /// Multiplies every coefficient by the monomial `c` (left action).
    pub fn scale(&self, c: M2Monomial) -> CobarElement {
        Self::from_terms(self.spec, self.terms.iter().map(|t| CobarTerm { coeff: c.mul(t.coeff), word: t.word.clone() }).collect())
    }

    /// Tridegree of a nonzero homogeneous element.
    pub fn tridegree(&self) -> Result<Option<TriDegree>, CobarError> {
        let alg = Algebroid::shared(self.spec)?;
        let mut it = self.terms.iter().map(|t| t.tridegree(&alg));
        let Some(first) = it.next() else {
            return Ok(None);
        };
        if it.all(|d| d == first) {
            Ok(Some(first))
        } else {
            Err(CobarError::NotHomogeneous)
        }
    }

    /// Writes the element with named letters.
    pub fn display(&self) -> String {
        let Ok(alg) = Algebroid::shared(self.spec) else {
            return "?".into();
        };
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|t| {
                let word: Vec<String> = t.word.iter().map(|&l| alg.monomial(l).to_string()).collect();
                match (t.coeff.is_one(), word.is_empty()) {
                    (_, true) => t.coeff.to_string(),
                    (true, false) => format!("[{}]", word.join("|")),
                    (false, false) => format!("{}*[{}]", t.coeff, word.join("|")),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Parses expressions such as `tau^2*[tau0] + tau*rho*[tau0^2] + rho^2*[tau0^3]`
    /// or `[tau1|tau0*xi1]`. Letters may be arbitrary products of generators;
    /// they are normalized and their coefficients moved to the left.
    pub fn parse(spec: AlgebroidSpec, src: &str) -> Result<CobarElement, CobarError> {
        let alg = Algebroid::shared(spec)?;
        let mut total = CobarElement::zero(spec);
        let src = src.trim();
        if src == "0" {
            return Ok(total);
        }
        for part in split_top(src, '+') {
            let part = part.trim();
            let (coef_src, word_src) = match part.find('[') {
                Some(i) => {
                    let end = part.rfind(']').ok_or_else(|| CobarError::Parse(format!("unclosed bracket in {part}")))?;
                    (part[..i].trim().trim_end_matches('*').trim(), Some(&part[i + 1..end]))
                }
                None => (part, None),
            };
            let coeff = parse_m2(coef_src)?;
            let mut acc = CobarElement::from_terms(spec, vec![CobarTerm::new(coeff, &[])]);
            if let Some(ws) = word_src {
                for letter in ws.split('|') {
                    let g = parse_letter(spec, letter.trim())?;
                    let l = letter_element(&alg, &g);
                    acc = concat_with(&alg, &acc, &l)?;
                }
            }
            total = total.add(&acc)?;
        }
        Ok(total)
    }
}

impl fmt::Debug for CobarElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.spec, self.display())
    }
}

impl fmt::Display for CobarElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_power(tok: &str) -> Result<(&str, u32), CobarError> {
    match tok.split_once('^') {
        Some((b, e)) => Ok((b.trim(), e.trim().parse().map_err(|_| CobarError::Parse(format!("bad exponent in {tok}")))?)),
        None => Ok((tok.trim(), 1)),
    }
}

fn parse_m2(src: &str) -> Result<M2Monomial, CobarError> {
    let mut m = M2Monomial::ONE;
    if src.is_empty() {
        return Ok(m);
    }
    for tok in src.split('*') {
        let (base, e) = parse_power(tok)?;
        m = match base {
            "1" => m,
            "tau" => m.mul(M2Monomial::new(e, 0)),
            "rho" => m.mul(M2Monomial::new(0, e)),
            _ => return Err(CobarError::Parse(format!("unknown coefficient {base}"))),
        };
    }
    Ok(m)
}

fn parse_letter(spec: AlgebroidSpec, src: &str) -> Result<GammaElement, CobarError> {
    let mut tau = vec![0u32; spec.num_tau()];
    let mut xi = vec![0u32; spec.num_xi()];
    let mut coeff = M2Monomial::ONE;
    for tok in src.split('*') {
        let (base, e) = parse_power(tok)?;
        let bad = || CobarError::Parse(format!("unknown letter {base}"));
        if base == "1" {
            continue;
        } else if base == "tau" || base == "rho" {
            coeff = coeff.mul(parse_m2(tok)?);
        } else if let Some(i) = base.strip_prefix("tau") {
            let i: usize = i.parse().map_err(|_| bad())?;
            *tau.get_mut(i).ok_or_else(bad)? += e;
        } else if let Some(i) = base.strip_prefix("xi") {
            let i: usize = i.parse().map_err(|_| bad())?;
            if i == 0 {
                return Err(bad());
            }
            *xi.get_mut(i - 1).ok_or_else(bad)? += e;
        } else {
            return Err(bad());
        }
    }
    Ok(crate::algebroid::normal_form(&RawProduct::new(coeff.into(), &tau, &xi), &spec)?)
}

/// A length-one cochain from an element of `Gamma`, unit terms dropped.
pub fn letter_element(alg: &Algebroid, g: &GammaElement) -> CobarElement {
    let terms = g
        .iter()
        .filter(|(_, m)| !m.is_one())
        .map(|(c, m)| CobarTerm::new(c, &[alg.index_of(&m).expect("normal monomial")]))
        .collect();
    CobarElement::from_terms(alg.spec(), terms)
}

/// Moves `e` (sitting just right of `prefix`) to the far left, multiplying
/// the result by `base`, and appends `suffix`.
fn cascade(
    alg: &Algebroid,
    prefix: &[u8],
    e: M2Monomial,
    suffix: &mut Word,
    base: M2Monomial,
    out: &mut Vec<(M2Monomial, Word)>,
) {
    if e.is_one() {
        let mut w = Word::from_slice(prefix);
        w.extend(suffix.iter().rev().copied());
        out.push((base, w));
        return;
    }
    let Some((&last, rest)) = prefix.split_last() else {
        let mut w = Word::new();
        w.extend(suffix.iter().rev().copied());
        out.push((base.mul(e), w));
        return;
    };
    for (f, m) in alg.right_mul(last, e) {
        debug_assert_ne!(m, 0, "right action left the augmentation ideal");
        suffix.push(m);
        cascade(alg, rest, f, suffix, base, out);
        suffix.pop();
    }
}

/// `d(coeff [word])`, unnormalized (terms may repeat).
pub fn differential_raw(alg: &Algebroid, coeff: M2Monomial, word: &[u8], out: &mut Vec<(M2Monomial, Word)>) {
    for (e, m) in alg.right_unit_terms(coeff) {
        if m != 0 {
            let mut w = Word::with_capacity(word.len() + 1);
            w.push(m);
            w.extend_from_slice(word);
            out.push((e, w));
        }
    }
    let mut suffix = Word::new();
    for i in 0..word.len() {
        for &(e, l, r) in alg.reduced_coproduct(word[i]) {
            suffix.clear();
            suffix.extend(word[i + 1..].iter().rev().copied());
            suffix.push(r);
            suffix.push(l);
            cascade(alg, &word[..i], e, &mut suffix, coeff, out);
        }
    }
}

fn sum_raw(spec: AlgebroidSpec, raw: Vec<(M2Monomial, Word)>) -> CobarElement {
    CobarElement::from_terms(spec, raw.into_iter().map(|(coeff, word)| CobarTerm { coeff, word }).collect())
}

pub fn differential_with(alg: &Algebroid, x: &CobarElement) -> Result<CobarElement, CobarError> {
    if x.spec != alg.spec() {
        return Err(CobarError::SpecMismatch);
    }
    let mut raw = Vec::new();
    for t in &x.terms {
        if t.word.len() >= MAX_WORD_LEN {
            return Err(CobarError::WordTooLong);
        }
        differential_raw(alg, t.coeff, &t.word, &mut raw);
    }
    Ok(sum_raw(x.spec, raw))
}

/// The cobar differential. Raises `s` by one and preserves `(t, u)`.
pub fn differential(x: &CobarElement) -> Result<CobarElement, CobarError> {
    x.tridegree()?;
    let alg = Algebroid::shared(x.spec)?;
    differential_with(&alg, x)
}

fn concat_with(alg: &Algebroid, x: &CobarElement, y: &CobarElement) -> Result<CobarElement, CobarError> {
    if x.spec != y.spec {
        return Err(CobarError::SpecMismatch);
    }
    let mut raw = Vec::new();
    let mut suffix = Word::new();
    for a in &x.terms {
        for b in &y.terms {
            if a.word.len() + b.word.len() > MAX_WORD_LEN {
                return Err(CobarError::WordTooLong);
            }
            suffix.clear();
            suffix.extend(b.word.iter().rev().copied());
            cascade(alg, &a.word, b.coeff, &mut suffix, a.coeff, &mut raw);
        }
    }
    Ok(sum_raw(x.spec, raw))
}

/// Concatenation product; realizes the product in Ext.
pub fn concat_product(x: &CobarElement, y: &CobarElement) -> Result<CobarElement, CobarError> {
    let alg = Algebroid::shared(x.spec)?;
    concat_with(&alg, x, y)
}

/// All basis terms of `C^s` in internal bidegree `(t, u)`, ordered by
/// coefficient (rho exponent first) and then lexicographically by letters.
pub fn cobar_basis(s: usize, t: i32, u: i32, spec: &AlgebroidSpec) -> Result<Vec<CobarTerm>, CobarError> {
    let alg = Algebroid::shared(*spec)?;
    basis_with(&alg, s, t, u)
}

pub fn basis_with(alg: &Algebroid, s: usize, t: i32, u: i32) -> Result<Vec<CobarTerm>, CobarError> {
    if s > MAX_WORD_LEN {
        return Err(CobarError::WordTooLong);
    }
    let target = BiDegree::new(t, u);
    let mut out = Vec::new();
    let mut word = Word::new();
    // letter index -> (T, U - T)
    let letters: Vec<(u8, i32, i32)> =
        (1..alg.len() as u8).map(|i| (i, alg.bidegree(i).t, alg.bidegree(i).u - alg.bidegree(i).t)).collect();
    let max_drop = letters.iter().map(|l| l.2).max().unwrap_or(-1);
    fn rec(
        alg: &Algebroid,
        letters: &[(u8, i32, i32)],
        max_drop: i32,
        remaining: usize,
        acc: BiDegree,
        target: BiDegree,
        word: &mut Word,
        out: &mut Vec<CobarTerm>,
    ) {
        // U - T only decreases, by at least -max_drop per letter
        if (acc.u - acc.t) + max_drop * (remaining as i32) < target.u - target.t {
            return;
        }
        if alg.spec().rho_killed && acc.t > target.t {
            return;
        }
        if remaining == 0 {
            if let Some(c) = M2Monomial::of_bidegree(target - acc) {
                if !alg.spec().rho_killed || c.rho_exp == 0 {
                    out.push(CobarTerm { coeff: c, word: word.clone() });
                }
            }
            return;
        }
        for &(l, _, _) in letters {
            word.push(l);
            rec(alg, letters, max_drop, remaining - 1, acc + alg.bidegree(l), target, word, out);
            word.pop();
        }
    }
    rec(alg, &letters, max_drop, s, BiDegree::ZERO, target, &mut word, &mut out);
    out.sort();
    Ok(out)
}

/// Counts words by total bidegree, for size estimates before materializing.
#[derive(Clone, Debug)]
pub struct WordCounter {
    alg: Arc<Algebroid>,
    layers: Vec<HashMap<BiDegree, u64>>,
}

impl WordCounter {
    pub fn new(alg: Arc<Algebroid>) -> Self {
        let mut first = HashMap::new();
        first.insert(BiDegree::ZERO, 1u64);
        WordCounter { alg, layers: vec![first] }
    }

    fn layer(&mut self, s: usize) -> &HashMap<BiDegree, u64> {
        while self.layers.len() <= s {
            let prev = self.layers.last().expect("nonempty");
            let mut next: HashMap<BiDegree, u64> = HashMap::new();
            for (&b, &n) in prev {
                for l in 1..self.alg.len() as u8 {
                    *next.entry(b + self.alg.bidegree(l)).or_default() += n;
                }
            }
            self.layers.push(next);
        }
        &self.layers[s]
    }

    /// `dim C^s` in internal bidegree `(t, u)`.
    pub fn count(&mut self, s: usize, t: i32, u: i32) -> u64 {
        let rho_killed = self.alg.spec().rho_killed;
        let target = BiDegree::new(t, u);
        self.layer(s)
            .iter()
            .filter(|(b, _)| {
                M2Monomial::of_bidegree(target - **b).is_some_and(|c| !rho_killed || c.rho_exp == 0)
            })
            .map(|(_, n)| *n)
            .sum()
    }
}

/// The cobar complex restricted to one internal bidegree `(t, u)`, with
/// terms `C^0 .. C^{top+1}` and differentials `d^0 .. d^top`.
#[derive(Clone, Debug)]
pub struct ComplexSlice {
    alg: Arc<Algebroid>,
    pub t: i32,
    pub u: i32,
    bases: Vec<Vec<CobarTerm>>,
    index: Vec<HashMap<u128, u32>>,
    matrices: Vec<SparseMatrix>,
}

impl ComplexSlice {
    pub fn build(alg: Arc<Algebroid>, t: i32, u: i32, top: usize) -> Result<Self, CobarError> {
        let mut bases = Vec::with_capacity(top + 2);
        for s in 0..=top + 1 {
            bases.push(basis_with(&alg, s, t, u)?);
        }
        let index: Vec<HashMap<u128, u32>> =
            bases.iter().map(|b| b.iter().enumerate().map(|(i, term)| (term.key(), i as u32)).collect()).collect();
        let mut matrices = Vec::with_capacity(top + 1);
        let mut raw = Vec::new();
        for s in 0..=top {
            let mut cols = Vec::with_capacity(bases[s].len());
            for term in &bases[s] {
                raw.clear();
                differential_raw(&alg, term.coeff, &term.word, &mut raw);
                let mut col: Vec<u32> = raw
                    .iter()
                    .map(|(c, w)| {
                        let i = *index[s + 1].get(&word_key(w)).unwrap_or_else(|| panic!("differential left the slice at s={s}"));
                        debug_assert_eq!(bases[s + 1][i as usize].coeff, *c);
                        i
                    })
                    .collect();
                normalize(&mut col);
                cols.push(col);
            }
            matrices.push(SparseMatrix::from_columns(bases[s + 1].len(), cols));
        }
        Ok(ComplexSlice { alg, t, u, bases, index, matrices })
    }

    pub fn algebroid(&self) -> &Arc<Algebroid> {
        &self.alg
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.alg.spec()
    }

    pub fn top(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn basis(&self, s: usize) -> &[CobarTerm] {
        &self.bases[s]
    }

    pub fn dim(&self, s: usize) -> usize {
        self.bases.get(s).map_or(0, Vec::len)
    }

    pub fn matrix(&self, s: usize) -> &SparseMatrix {
        &self.matrices[s]
    }

    pub fn dense_matrix(&self, s: usize) -> F2Matrix {
        self.matrices[s].to_dense()
    }

    pub fn squares_to_zero(&self) -> bool {
        self.matrices.windows(2).all(|w| w[1].composes_to_zero(&w[0]))
    }

    /// The rho-adic filtration: level of a basis term is its rho exponent.
    pub fn filtered(&self) -> FilteredComplex {
        FilteredComplex {
            levels: self.bases.iter().map(|b| b.iter().map(|t| t.coeff.rho_exp).collect()).collect(),
            d: self.matrices.clone(),
        }
    }

    pub fn reduce(&self, reps: Reps) -> SliceReduction {
        SliceReduction::new(&self.filtered(), reps)
    }

    /// Sparse coordinates of a homogeneous element of `C^s` in this slice.
    pub fn vector(&self, x: &CobarElement) -> Result<(usize, Vec<u32>), CobarError> {
        if x.spec != self.spec() {
            return Err(CobarError::SpecMismatch);
        }
        let Some(first) = x.terms.first() else {
            return Ok((0, Vec::new()));
        };
        let s = first.s();
        let mut v = Vec::with_capacity(x.terms.len());
        for t in &x.terms {
            let idx = (t.s() == s)
                .then(|| self.index.get(s).and_then(|m| m.get(&t.key())))
                .flatten()
                .filter(|&&i| self.bases[s][i as usize].coeff == t.coeff)
                .ok_or_else(|| CobarError::NotInBasis(CobarElement::from_terms(x.spec, vec![t.clone()]).display()))?;
            v.push(*idx);
        }
        normalize(&mut v);
        Ok((s, v))
    }

    /// Index in `C^s` of the basis term with word key `key`.
    pub fn find_key(&self, s: usize, key: u128) -> Option<u32> {
        self.index.get(s).and_then(|m| m.get(&key)).copied()
    }

    pub fn element(&self, s: usize, v: &[u32]) -> CobarElement {
        CobarElement::from_terms(self.spec(), v.iter().map(|&i| self.bases[s][i as usize].clone()).collect())
    }
}

fn internal_of(x: &CobarElement) -> Result<Option<(usize, BiDegree)>, CobarError> {
    Ok(x.tridegree()?.map(|d| (d.s as usize, d.internal())))
}

/// Solves `dX = y` for a coboundary `y`, `None` if `y` is not one.
pub fn bounding_chain(y: &CobarElement) -> Result<Option<CobarElement>, CobarError> {
    let Some((s, b)) = internal_of(y)? else {
        return Ok(Some(CobarElement::zero(y.spec)));
    };
    if s == 0 {
        return Ok(None);
    }
    let slice = ComplexSlice::build(Algebroid::shared(y.spec)?, b.t, b.u, s - 1)?;
    let (_, v) = slice.vector(y)?;
    let m = slice.dense_matrix(s - 1);
    let rhs = BitVec::from_ones(m.rows(), v.iter().map(|&i| i as usize));
    let x = solve(&m, &rhs).expect("sizes agree");
    Ok(x.map(|x| slice.element(s - 1, &x.ones().map(|i| i as u32).collect::<Vec<_>>())))
}

/// Cocycle representatives of Ext in the tridegree of internal `(t, u)`, degree `s`.
pub fn ext_representatives(spec: AlgebroidSpec, s: usize, t: i32, u: i32) -> Result<Vec<CobarElement>, CobarError> {
    let slice = ComplexSlice::build(Algebroid::shared(spec)?, t, u, s)?;
    let red = slice.reduce(Reps::UpTo(s));
    Ok(red.representatives(s).expect("reduced").iter().map(|v| slice.element(s, v)).collect())
}

/// A Massey product `<a, b, c> = X c + a Y` with `dX = ab`, `dY = bc`.
#[derive(Clone, Debug)]
pub struct MasseyProduct {
    pub representative: CobarElement,
    /// Cocycles spanning `a * Ext + Ext * c` in the target tridegree.
    pub indeterminacy: Vec<CobarElement>,
}

pub fn massey_triple(a: &CobarElement, b: &CobarElement, c: &CobarElement) -> Result<MasseyProduct, CobarError> {
    let spec = a.spec;
    if b.spec != spec || c.spec != spec {
        return Err(CobarError::SpecMismatch);
    }
    for x in [a, b, c] {
        if !differential(x)?.is_zero() {
            return Err(CobarError::NotCocycle(x.display()));
        }
    }
    let ab = concat_product(a, b)?;
    let bc = concat_product(b, c)?;
    let x = bounding_chain(&ab)?.ok_or_else(|| CobarError::NotBounding(ab.display()))?;
    let y = bounding_chain(&bc)?.ok_or_else(|| CobarError::NotBounding(bc.display()))?;
    let representative = concat_product(&x, c)?.add(&concat_product(a, &y)?)?;

    let mut indeterminacy = Vec::new();
    let alg = Algebroid::shared(spec)?;
    let da = a.tridegree()?.unwrap_or_default();
    let db = b.tridegree()?.unwrap_or_default();
    let dc = c.tridegree()?.unwrap_or_default();
    let unit = TriDegree::new(1, -1, 0);
    // Y lives in tridegree(b) + tridegree(c) with s lowered by one
    let ty = db + dc + unit;
    let tx = da + db + unit;
    if ty.s >= 0 && !a.is_zero() {
        for r in ext_representatives(spec, ty.s as usize, ty.t(), ty.u)? {
            indeterminacy.push(concat_with(&alg, a, &r)?);
        }
    }
    if tx.s >= 0 && !c.is_zero() {
        for r in ext_representatives(spec, tx.s as usize, tx.t(), tx.u)? {
            indeterminacy.push(concat_with(&alg, &r, c)?);
        }
    }
    Ok(MasseyProduct { representative, indeterminacy })
}

/// Letterwise quotient `A(n) -> E(n)`: words containing a `xi` die.
pub fn induced_map(x: &CobarElement) -> Result<CobarElement, CobarError> {
    if x.spec.family != Family::A {
        return Err(CobarError::NotAFamily);
    }
    let from = Algebroid::shared(x.spec)?;
    let to_spec = AlgebroidSpec { family: Family::E, ..x.spec };
    let to = Algebroid::shared(to_spec)?;
    let mut terms = Vec::new();
    'outer: for t in &x.terms {
        let mut w = Word::new();
        for &l in &t.word {
            let m: GammaMonomial = from.monomial(l);
            if m.has_xi() {
                continue 'outer;
            }
            w.push(to.index_of(&m).expect("xi-free monomials exist in E(n)"));
        }
        terms.push(CobarTerm { coeff: t.coeff, word: w });
    }
    Ok(CobarElement::from_terms(to_spec, terms))
}

/// The element `a` of `M2` as a 0-cochain.
pub fn scalar(spec: AlgebroidSpec, a: &M2Element) -> CobarElement {
    CobarElement::from_terms(spec, a.terms().map(|c| CobarTerm::new(*c, &[])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(spec: AlgebroidSpec, s: &str) -> CobarElement {
        CobarElement::parse(spec, s).unwrap()
    }

    const E1: AlgebroidSpec = AlgebroidSpec::e(1);
    const A1: AlgebroidSpec = AlgebroidSpec::a(1);

    #[test]
    fn basis_examples() {
        assert_eq!(cobar_basis(0, 0, 0, &E1).unwrap(), vec![CobarTerm::new(M2Monomial::ONE, &[])]);
        let alg = Algebroid::shared(E1).unwrap();
        let b = cobar_basis(1, 1, 0, &E1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(alg.monomial(b[0].word[0]), GammaMonomial::tau(0));
        assert!(b[0].coeff.is_one());
    }

    #[test]
    fn basis_matches_brute_force() {
        for spec in [E1, A1, AlgebroidSpec::e(2), A1.complex()] {
            let alg = Algebroid::shared(spec).unwrap();
            for s in 0..=3usize {
                // every word of length s over all letters, bucketed by slice
                let mut all: HashMap<(i32, i32), Vec<CobarTerm>> = HashMap::new();
                let n = alg.len() - 1;
                for k in 0..n.pow(s as u32) {
                    let mut w = Word::new();
                    let mut r = k;
                    for _ in 0..s {
                        w.push((r % n + 1) as u8);
                        r /= n;
                    }
                    let b = w.iter().fold(BiDegree::ZERO, |b, &l| b + alg.bidegree(l));
                    for a in 0..40u32 {
                        for c in 0..40u32 {
                            if spec.rho_killed && c > 0 {
                                continue;
                            }
                            let co = M2Monomial::new(a, c);
                            let tot = b + co.bidegree();
                            all.entry((tot.t, tot.u)).or_default().push(CobarTerm { coeff: co, word: w.clone() });
                        }
                    }
                }
                for t in -2..5 {
                    for u in -3..3 {
                        let mut brute = all.remove(&(t, u)).unwrap_or_default();
                        brute.sort();
                        assert_eq!(basis_with(&alg, s, t, u).unwrap(), brute, "{spec} s={s} ({t},{u})");
                    }
                }
            }
        }
    }

    #[test]
    fn counter_agrees_with_enumeration() {
        for spec in [E1, A1, A1.complex()] {
            let alg = Algebroid::shared(spec).unwrap();
            let mut wc = WordCounter::new(Arc::clone(&alg));
            for s in 0..4 {
                for t in -2..8 {
                    for u in -6..4 {
                        assert_eq!(wc.count(s, t, u) as usize, basis_with(&alg, s, t, u).unwrap().len());
                    }
                }
            }
        }
    }

    #[test]
    fn differential_examples() {
        for spec in [E1, A1] {
            assert_eq!(differential(&p(spec, "tau")).unwrap(), p(spec, "rho*[tau0]"));
            assert!(differential(&p(spec, "[tau0]")).unwrap().is_zero());
        }
        assert_eq!(differential(&p(E1, "tau^2")).unwrap(), p(E1, "rho^3*[tau1]"));
        assert!(differential(&p(A1, "[tau0^2]")).unwrap().is_zero());
        assert!(differential(&p(A1, "tau^4")).unwrap().is_zero());
        assert!(differential(&p(E1, "tau^4")).unwrap().is_zero());
    }

    #[test]
    fn tau_period_is_a_cocycle_power() {
        for n in 0..=3 {
            for spec in [AlgebroidSpec::e(n), AlgebroidSpec::a(n.min(2))] {
                let alg = Algebroid::shared(spec).unwrap();
                assert_eq!(alg.right_unit_period(), spec.tau_period(), "{spec}");
                let x = scalar(spec, &M2Monomial::new(spec.tau_period(), 0).into());
                assert!(differential(&x).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let a = p(A1, "tau^2*[tau0] + tau*rho*[tau0^2] + rho^2*[tau0^3]");
        assert_eq!(a.tridegree().unwrap(), Some(TriDegree::new(0, 1, -2)));
        assert!(differential(&a).unwrap().is_zero());
        let q = p(A1, &a.display());
        assert_eq!(q, a);
        assert!(CobarElement::parse(A1, "[tau7]").is_err());
    }

    #[test]
    fn products() {
        let v0 = p(E1, "[tau0]");
        assert_eq!(concat_product(&v0, &v0).unwrap(), p(E1, "[tau0|tau0]"));
        assert_eq!(concat_product(&CobarElement::one(E1), &v0).unwrap(), v0);
        // [xi1][tau0^2] and [tau0^2][xi1] differ by a coboundary
        let x = p(A1, "[xi1]");
        let y = p(A1, "[tau0^2]");
        let diff = concat_product(&x, &y).unwrap().add(&concat_product(&y, &x).unwrap()).unwrap();
        assert!(!diff.is_zero());
        assert!(bounding_chain(&diff).unwrap().is_some());
        // tau * [tau0] has the coefficient moved through eta_R
        let t = scalar(A1, &M2Element::tau());
        assert_eq!(concat_product(&v0_a1(), &t).unwrap(), p(A1, "tau*[tau0] + rho*[tau0^2]"));
    }

    fn v0_a1() -> CobarElement {
        p(A1, "[tau0]")
    }

    #[test]
    fn slices_are_complexes() {
        for spec in [E1, A1, AlgebroidSpec::e(2), A1.complex(), AlgebroidSpec::a(2)] {
            let alg = Algebroid::shared(spec).unwrap();
            for t in -2..7 {
                for u in -6..4 {
                    let slice = ComplexSlice::build(Arc::clone(&alg), t, u, 3).unwrap();
                    assert!(slice.squares_to_zero(), "{spec} ({t},{u})");
                    slice.filtered().check_shape().unwrap();
                }
            }
        }
    }

    #[test]
    fn massey_examples() {
        let rho = p(A1, "rho");
        let v0 = p(A1, "[tau0]");
        let eta = p(A1, "[xi1]");
        let m = massey_triple(&rho, &v0, &eta).unwrap();
        assert!(differential(&m.representative).unwrap().is_zero());
        let zero = CobarElement::zero(A1);
        let z = massey_triple(&v0, &zero, &eta).unwrap();
        assert!(z.representative.is_zero());
    }

    #[test]
    fn induced_map_examples() {
        assert_eq!(induced_map(&p(A1, "[tau1]")).unwrap(), p(E1, "[tau1]"));
        assert!(induced_map(&p(A1, "[xi1]")).unwrap().is_zero());
        assert!(induced_map(&p(E1, "[tau1]")).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn element(spec: AlgebroidSpec, max_s: usize) -> impl Strategy<Value = CobarElement> {
            let alg = Algebroid::shared(spec).unwrap();
            let n = alg.len() as u8;
            proptest::collection::vec(
                ((0u32..5), (0u32..3), proptest::collection::vec(1u8..n, 0..=max_s)),
                1..4,
            )
            .prop_map(move |terms| {
                CobarElement::from_terms(spec, terms.into_iter().map(|(a, c, w)| CobarTerm::new(M2Monomial::new(a, c), &w)).collect())
            })
        }

        fn spec() -> impl Strategy<Value = AlgebroidSpec> {
            prop_oneof![Just(E1), Just(A1), Just(AlgebroidSpec::e(2)), Just(A1.complex())]
        }

        proptest! {
            #[test]
            fn d_squared_vanishes(x in spec().prop_flat_map(|s| element(s, 4))) {
                let alg = Algebroid::shared(x.spec()).unwrap();
                let dx = differential_with(&alg, &x).unwrap();
                prop_assert!(differential_with(&alg, &dx).unwrap().is_zero());
            }

            #[test]
            fn leibniz((x, y) in spec().prop_flat_map(|s| (element(s, 3), element(s, 3)))) {
                let alg = Algebroid::shared(x.spec()).unwrap();
                let d = |e: &CobarElement| differential_with(&alg, e).unwrap();
                let xy = concat_product(&x, &y).unwrap();
                let lhs = d(&xy);
                let rhs = concat_product(&d(&x), &y).unwrap().add(&concat_product(&x, &d(&y)).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn differential_keeps_rho_valuation(x in spec().prop_flat_map(|s| element(s, 4))) {
                let alg = Algebroid::shared(x.spec()).unwrap();
                let v = x.terms().iter().map(|t| t.coeff.rho_exp).min().unwrap_or(0);
                let dx = differential_with(&alg, &x).unwrap();
                prop_assert!(dx.terms().iter().all(|t| t.coeff.rho_exp >= v));
            }

            #[test]
            fn induced_map_is_a_chain_map(x in element(A1, 4)) {
                let lhs = induced_map(&differential_with(&Algebroid::shared(A1).unwrap(), &x).unwrap()).unwrap();
                let dx_e = differential_with(&Algebroid::shared(E1).unwrap(), &induced_map(&x).unwrap()).unwrap();
                prop_assert_eq!(lhs, dx_e);
            }
        }
    }
}
