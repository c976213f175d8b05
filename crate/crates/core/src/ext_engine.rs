//! Ext over an algebroid in a window of tridegrees.
//!
//! Everything here runs on a [`ChainModel`]: a source of `(t, u)` slices of
//! some rho-filtered cochain complex computing Ext. The cobar complex is one
//! model; the dual of a minimal resolution is another (see `resolution`).
//! [`ExtEngine`] adds what only the cobar model can do: explicit cocycles,
//! named classes, products and relations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::algebroid::{Algebroid, AlgebroidError, AlgebroidSpec, Family};
use crate::cobar::{
    concat_product, differential_with, massey_triple, CobarElement, CobarError, CobarTerm, ComplexSlice,
    WordCounter,
};
use crate::f2_linalg::{BitVec, F2Matrix};
use crate::filtered::{Expressed, FilteredComplex, ReductionError, Reps, SliceReduction};
use crate::ground::{BiDegree, M2Monomial, TriDegree};

#[derive(Debug, thiserror::Error)]
pub enum ExtError {
    #[error(transparent)]
    Cobar(#[from] CobarError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("slice (t={t}, u={u}) has {size} cochains in degree {s}, over the limit of {limit}")]
    ResourceLimit { t: i32, u: i32, s: usize, size: u64, limit: u64 },
    #[error("unknown class {0:?}")]
    UnknownName(String),
    #[error("cannot bind {name}: {reason}")]
    Catalog { name: String, reason: String },
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("{0} is not a cocycle")]
    NotCocycle(String),
    #[error("{0} is not homogeneous")]
    NotHomogeneous(String),
}

/// An inclusive integer range, empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub lo: i32,
    pub hi: i32,
}

impl Span {
    pub const fn new(lo: i32, hi: i32) -> Self {
        Span { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, x: i32) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for Span {
    type Err = ExtError;

    /// `A..B`, `A..=B` or a single integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExtError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                Ok(Span::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
            }
            None => {
                let x = s.parse().map_err(|_| bad())?;
                Ok(Span::new(x, x))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExtWindow {
    pub spec: AlgebroidSpec,
    pub stems: Span,
    pub s: Span,
    pub weights: Span,
}

impl ExtWindow {
    pub const DEFAULT_STEMS: Span = Span::new(0, 12);
    pub const DEFAULT_S: Span = Span::new(0, 8);
    pub const DEFAULT_WEIGHTS: Span = Span::new(-12, 8);

    pub fn new(spec: AlgebroidSpec, stems: Span, s: Span, weights: Span) -> Result<Self, ExtError> {
        spec.validate()?;
        if !s.is_empty() && s.lo < 0 {
            return Err(ExtError::InvalidWindow(format!("negative s range {s}")));
        }
        Ok(ExtWindow { spec, stems, s, weights })
    }

    pub fn default_for(spec: AlgebroidSpec) -> Self {
        ExtWindow { spec, stems: Self::DEFAULT_STEMS, s: Self::DEFAULT_S, weights: Self::DEFAULT_WEIGHTS }
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty() || self.s.is_empty() || self.weights.is_empty()
    }

    pub fn contains(&self, d: &TriDegree) -> bool {
        self.stems.contains(d.stem) && self.s.contains(d.s) && self.weights.contains(d.u)
    }

    /// All tridegrees of the window in ascending order.
    pub fn tridegrees(&self) -> Vec<TriDegree> {
        let mut v = Vec::new();
        if self.is_empty() {
            return v;
        }
        for stem in self.stems.iter() {
            for s in self.s.iter() {
                for u in self.weights.iter() {
                    v.push(TriDegree::new(stem, s, u));
                }
            }
        }
        v
    }

    /// Internal bidegrees `(t, u)` with a possibly nonzero group in the
    /// window, each with the largest `s` needed there. Cochains vanish for
    /// `s > t - u`, so those slices are skipped.
    pub fn slices(&self) -> BTreeMap<(i32, i32), usize> {
        let mut out: BTreeMap<(i32, i32), usize> = BTreeMap::new();
        for d in self.tridegrees() {
            let (t, u) = (d.t(), d.u);
            if d.s <= t - u {
                let e = out.entry((t, u)).or_default();
                *e = (*e).max(d.s as usize);
            }
        }
        out
    }
}

/// How far rho-torsion orders are searched for a class in `d`: down to the
/// bottom weight of the window, and at least one tau period. Torsion orders
/// over `E(n)` and `A(1)` are below the period, so a class that survives
/// this many rho multiplications is free.
pub fn torsion_probe(w: &ExtWindow, d: TriDegree) -> u32 {
    (d.u - w.weights.lo).max(w.spec.tau_period() as i32).max(0) as u32
}

/// A rho-filtered cochain complex model, one `(t, u)` slice at a time.
///
/// Levels are rho exponents, so multiplication by rho maps basis elements
/// to basis elements: the element with key `k` at `(t, u)` goes to the one
/// with the same key at `(t - 1, u - 1)`.
pub trait ChainModel {
    type Slice: SliceData;

    fn spec(&self) -> AlgebroidSpec;

    /// Terms `C^0 .. C^{top+1}` of the slice at internal `(t, u)`.
    fn slice(&mut self, t: i32, u: i32, top: usize) -> Result<Self::Slice, ExtError>;
}

pub trait SliceData {
    fn filtered(&self) -> FilteredComplex;
    fn key(&self, s: usize, i: u32) -> u128;
    fn find(&self, s: usize, key: u128) -> Option<u32>;

    /// Whether consecutive differentials compose to zero.
    fn squares_to_zero(&self) -> bool {
        self.filtered().squares_to_zero()
    }
}

/// The cobar complex as a chain model, with a cap on slice sizes.
pub struct CobarModel {
    alg: Arc<Algebroid>,
    counter: WordCounter,
    limit: u64,
}

impl CobarModel {
    pub const DEFAULT_LIMIT: u64 = 400_000;

    pub fn new(spec: AlgebroidSpec, limit: u64) -> Result<Self, ExtError> {
        let alg = Algebroid::shared(spec)?;
        Ok(CobarModel { counter: WordCounter::new(alg.clone()), alg, limit })
    }

    pub fn algebroid(&self) -> &Arc<Algebroid> {
        &self.alg
    }

    /// Largest `dim C^s` over `s <= top + 1` at `(t, u)`.
    pub fn size(&mut self, t: i32, u: i32, top: usize) -> (usize, u64) {
        (0..=top + 1).map(|s| (s, self.counter.count(s, t, u))).max_by_key(|p| p.1).unwrap_or((0, 0))
    }
}

impl ChainModel for CobarModel {
    type Slice = ComplexSlice;

    fn spec(&self) -> AlgebroidSpec {
        self.alg.spec()
    }

    fn slice(&mut self, t: i32, u: i32, top: usize) -> Result<ComplexSlice, ExtError> {
        let (s, size) = self.size(t, u, top);
        if size > self.limit {
            return Err(ExtError::ResourceLimit { t, u, s, size, limit: self.limit });
        }
        Ok(ComplexSlice::build(self.alg.clone(), t, u, top)?)
    }
}

impl SliceData for ComplexSlice {
    fn filtered(&self) -> FilteredComplex {
        ComplexSlice::filtered(self)
    }

    fn key(&self, s: usize, i: u32) -> u128 {
        self.basis(s)[i as usize].key()
    }

    fn find(&self, s: usize, key: u128) -> Option<u32> {
        self.find_key(s, key)
    }

    fn squares_to_zero(&self) -> bool {
        ComplexSlice::squares_to_zero(self)
    }
}

pub struct SliceEntry<S> {
    pub data: S,
    pub reduction: SliceReduction,
    top: usize,
    reps: bool,
}

/// Slice cache and the model-independent parts of Ext: dimensions,
/// coordinates, rho multiplication.
pub struct ExtComputer<M: ChainModel> {
    model: M,
    cache: HashMap<(i32, i32), SliceEntry<M::Slice>>,
}

impl<M: ChainModel> ExtComputer<M> {
    pub fn new(model: M) -> Self {
        ExtComputer { model, cache: HashMap::new() }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut M {
        &mut self.model
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.model.spec()
    }

    pub fn clear(&mut self) {
        self.cache.clear();
    }

    /// Number of slices built so far, and those where `d∘d ≠ 0`.
    pub fn check_materialized(&self) -> (usize, Vec<(i32, i32)>) {
        let mut bad: Vec<(i32, i32)> = self.cache.iter().filter(|(_, e)| !e.data.squares_to_zero()).map(|(k, _)| *k).collect();
        bad.sort();
        (self.cache.len(), bad)
    }

    /// The slice at `(t, u)` reduced through `d^top`, with cocycle
    /// representatives if `reps`.
    pub fn entry(&mut self, t: i32, u: i32, top: usize, reps: bool) -> Result<&SliceEntry<M::Slice>, ExtError> {
        let key = (t, u);
        let fresh = self.cache.get(&key).is_none_or(|e| e.top < top || (reps && !e.reps));
        if fresh {
            let (top, reps) = match self.cache.get(&key) {
                Some(e) => (e.top.max(top), e.reps || reps),
                None => (top, reps),
            };
            let data = self.model.slice(t, u, top)?;
            let reduction = SliceReduction::new(&data.filtered(), if reps { Reps::All } else { Reps::None });
            self.cache.insert(key, SliceEntry { data, reduction, top, reps });
        }
        Ok(&self.cache[&key])
    }

    pub fn ext_dim(&mut self, d: TriDegree) -> Result<usize, ExtError> {
        let (t, u) = (d.t(), d.u);
        if d.s < 0 || d.s > t - u {
            return Ok(0);
        }
        Ok(self.entry(t, u, d.s as usize, false)?.reduction.ext_dim(d.s as usize)?)
    }

    /// Dimensions over a window, every tridegree included.
    pub fn dims(&mut self, w: &ExtWindow) -> Result<BTreeMap<TriDegree, usize>, ExtError> {
        let mut out: BTreeMap<TriDegree, usize> = w.tridegrees().into_iter().map(|d| (d, 0)).collect();
        for ((t, u), top) in w.slices() {
            let e = self.entry(t, u, top, false)?;
            for s in w.s.iter().filter(|&s| s <= top as i32) {
                let d = TriDegree::from_internal(s, BiDegree::new(t, u));
                if w.contains(&d) {
                    out.insert(d, e.reduction.ext_dim(s as usize)?);
                }
            }
        }
        Ok(out)
    }

    /// Cocycle representatives as sparse coordinate vectors.
    pub fn representatives(&mut self, d: TriDegree) -> Result<Vec<Vec<u32>>, ExtError> {
        let (t, u) = (d.t(), d.u);
        if d.s < 0 || d.s > t - u {
            return Ok(Vec::new());
        }
        Ok(self.entry(t, u, d.s as usize, true)?.reduction.representatives(d.s as usize)?)
    }

    pub fn express(&mut self, d: TriDegree, v: &[u32]) -> Result<Expressed, ExtError> {
        if v.is_empty() {
            return Ok(Expressed::Boundary);
        }
        let s = d.s as usize;
        Ok(self.entry(d.t(), d.u, s, true)?.reduction.express(s, v)?)
    }

    /// Whether the cochain `v` in tridegree `d` is a coboundary.
    pub fn is_boundary(&mut self, d: TriDegree, v: &[u32]) -> Result<bool, ExtError> {
        if v.is_empty() {
            return Ok(true);
        }
        let s = d.s as usize;
        if s == 0 {
            return Ok(false);
        }
        let (t, u) = (d.t(), d.u);
        let top = match self.cache.get(&(t, u)) {
            Some(e) if e.top >= s - 1 => e.top,
            _ => s - 1,
        };
        Ok(self.entry(t, u, top, false)?.reduction.is_boundary(s, v)?)
    }

    /// `rho^k v` for a cochain `v` in tridegree `d`.
    pub fn rho_shift(&mut self, d: TriDegree, v: &[u32], k: u32) -> Result<Vec<u32>, ExtError> {
        if k == 0 {
            return Ok(v.to_vec());
        }
        if self.spec().rho_killed {
            return Ok(Vec::new());
        }
        let s = d.s as usize;
        let keys: Vec<u128> = {
            let e = self.entry(d.t(), d.u, s, false)?;
            v.iter().map(|&i| e.data.key(s, i)).collect()
        };
        let k = k as i32;
        let target = self.entry(d.t() - k, d.u - k, s, false)?;
        let mut out: Vec<u32> = keys
            .iter()
            .map(|&key| target.data.find(s, key).expect("rho multiples stay in the basis"))
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    fn coordinates(&mut self, d: TriDegree, v: &[u32]) -> Result<BitVec, ExtError> {
        let dim = self.ext_dim(d)?;
        Ok(match self.express(d, v)? {
            Expressed::Boundary => BitVec::zeros(dim),
            Expressed::Class(c) => c,
        })
    }

    /// The matrix of `rho^k : Ext(d) -> Ext(d - k(1,0,1))` in the
    /// representative bases.
    pub fn rho_matrix(&mut self, d: TriDegree, k: u32) -> Result<F2Matrix, ExtError> {
        let target = d + TriDegree::new(-(k as i32), 0, -(k as i32));
        let reps = self.representatives(d)?;
        let rows = self.ext_dim(target)?;
        let mut cols = Vec::with_capacity(reps.len());
        for r in &reps {
            let w = self.rho_shift(d, r, k)?;
            cols.push(self.coordinates(target, &w)?);
        }
        Ok(F2Matrix::from_columns(rows, &cols).expect("consistent sizes"))
    }

    /// Rho-torsion orders of a basis of `Ext(d)` adapted to the kernels of
    /// `rho^k`, ascending; `None` for classes that survive `rho^kmax`.
    pub fn rho_torsion_orders(&mut self, d: TriDegree, kmax: u32) -> Result<Vec<Option<u32>>, ExtError> {
        let dim = self.ext_dim(d)?;
        let mut out = Vec::with_capacity(dim);
        let mut killed = 0;
        for k in 1..=kmax {
            if killed == dim {
                break;
            }
            let m = self.rho_matrix(d, k)?;
            let now = dim - m.rank();
            out.extend(std::iter::repeat_n(Some(k), now - killed));
            killed = now;
        }
        out.extend(std::iter::repeat_n(None, dim - killed));
        Ok(out)
    }

    /// Rank of `rho : Ext(d + (1,0,1)) -> Ext(d)`.
    pub fn rho_image_rank(&mut self, d: TriDegree) -> Result<usize, ExtError> {
        Ok(self.rho_matrix(d + TriDegree::new(1, 0, 1), 1)?.rank())
    }
}

impl<M: ChainModel> crate::oracle::ExtData for ExtComputer<M> {
    fn dim(&mut self, d: TriDegree) -> Result<usize, crate::oracle::OracleError> {
        self.ext_dim(d).map_err(|e| crate::oracle::OracleError::Data(e.to_string()))
    }

    fn rho_rank(&mut self, d: TriDegree, k: u32) -> Result<usize, crate::oracle::OracleError> {
        if self.ext_dim(d).map_err(|e| crate::oracle::OracleError::Data(e.to_string()))? == 0 {
            return Ok(0);
        }
        Ok(self.rho_matrix(d, k).map_err(|e| crate::oracle::OracleError::Data(e.to_string()))?.rank())
    }
}

/// An Ext group with cocycle representatives of a basis.
#[derive(Clone, Debug)]
pub struct ExtGroup {
    pub tridegree: TriDegree,
    pub dim: usize,
    pub representatives: Vec<CobarElement>,
}

#[derive(Clone, Debug)]
pub struct ExtClass {
    pub name: String,
    pub tridegree: TriDegree,
    pub representative: CobarElement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorsionOrder {
    Finite(u32),
    FreeInWindow,
}

impl fmt::Display for TorsionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorsionOrder::Finite(k) => write!(f, "{k}"),
            TorsionOrder::FreeInWindow => f.write_str("free"),
        }
    }
}

/// How a catalog name gets its representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    /// An explicit cochain, checked to be a nonzero class.
    Cochain(String),
    /// The unique nonzero class of a one-dimensional group.
    Unique,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: String,
    pub tridegree: TriDegree,
    pub binding: Binding,
}

impl CatalogEntry {
    fn new(name: impl Into<String>, stem: i32, s: i32, u: i32, binding: Binding) -> Self {
        CatalogEntry { name: name.into(), tridegree: TriDegree::new(stem, s, u), binding }
    }
}

/// Named classes of Ext over `spec`.
pub fn catalog(spec: AlgebroidSpec) -> Vec<CatalogEntry> {
    use Binding::*;
    let mut v = Vec::new();
    let p = spec.tau_period() as i32;
    if !spec.rho_killed {
        v.push(CatalogEntry::new("rho", -1, 0, -1, Cochain("rho".into())));
        v.push(CatalogEntry::new(format!("tau^{p}"), 0, 0, -p, Cochain(format!("tau^{p}"))));
    } else {
        v.push(CatalogEntry::new("tau", 0, 0, -1, Cochain("tau".into())));
    }
    match spec.family {
        Family::E => {
            for i in 0..=spec.n {
                let (t, u) = ((1 << (i + 1)) - 1, (1 << i) - 1);
                v.push(CatalogEntry::new(format!("v{i}"), t - 1, 1, u, Cochain(format!("[tau{i}]"))));
            }
        }
        Family::A => {
            v.push(CatalogEntry::new("v0", 0, 1, 0, Cochain("[tau0]".into())));
            if spec.n >= 1 {
                v.push(CatalogEntry::new("eta", 1, 1, 1, Cochain("[xi1]".into())));
                v.push(CatalogEntry::new("eta0", 1, 1, 0, Cochain("[tau0^2]".into())));
                if !spec.rho_killed {
                    v.push(CatalogEntry::new(
                        "a",
                        0,
                        1,
                        -2,
                        Cochain("tau^2*[tau0] + tau*rho*[tau0^2] + rho^2*[tau0^3]".into()),
                    ));
                }
            }
            if spec.n == 1 {
                v.push(CatalogEntry::new("x", 4, 3, 2, Unique));
                if !spec.rho_killed {
                    v.push(CatalogEntry::new("b", 4, 3, 0, Unique));
                }
                v.push(CatalogEntry::new("v1^4", 8, 4, 4, Unique));
            }
        }
    }
    v
}

/// The cobar model with explicit cocycles, names and products.
pub struct ExtEngine {
    alg: Arc<Algebroid>,
    computer: ExtComputer<CobarModel>,
    named: BTreeMap<String, ExtClass>,
}

impl ExtEngine {
    pub fn new(spec: AlgebroidSpec) -> Result<Self, ExtError> {
        Self::with_limit(spec, CobarModel::DEFAULT_LIMIT)
    }

    pub fn with_limit(spec: AlgebroidSpec, limit: u64) -> Result<Self, ExtError> {
        let model = CobarModel::new(spec, limit)?;
        Ok(ExtEngine { alg: model.algebroid().clone(), computer: ExtComputer::new(model), named: BTreeMap::new() })
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.alg.spec()
    }

    pub fn computer(&mut self) -> &mut ExtComputer<CobarModel> {
        &mut self.computer
    }

    pub fn group(&mut self, d: TriDegree) -> Result<ExtGroup, ExtError> {
        let reps = self.computer.representatives(d)?;
        let representatives = if reps.is_empty() {
            Vec::new()
        } else {
            let e = self.computer.entry(d.t(), d.u, d.s as usize, true)?;
            reps.iter().map(|v| e.data.element(d.s as usize, v)).collect()
        };
        Ok(ExtGroup { tridegree: d, dim: representatives.len(), representatives })
    }

    /// Every tridegree of the window, zero groups included.
    pub fn compute_ext(&mut self, w: &ExtWindow) -> Result<BTreeMap<TriDegree, ExtGroup>, ExtError> {
        if w.spec != self.spec() {
            return Err(ExtError::Cobar(CobarError::SpecMismatch));
        }
        for ((t, u), top) in w.slices() {
            self.computer.entry(t, u, top, true)?;
        }
        let mut out = BTreeMap::new();
        for d in w.tridegrees() {
            out.insert(d, self.group(d)?);
        }
        Ok(out)
    }

    fn locate(&mut self, x: &CobarElement) -> Result<Option<(TriDegree, Vec<u32>)>, ExtError> {
        if x.spec() != self.spec() {
            return Err(ExtError::Cobar(CobarError::SpecMismatch));
        }
        let Some(d) = x.tridegree()? else {
            return Ok(None);
        };
        let s = d.s as usize;
        let e = self.computer.entry(d.t(), d.u, s.saturating_sub(1), false)?;
        let (_, v) = e.data.vector(x)?;
        Ok(Some((d, v)))
    }

    fn check_cocycle(&self, x: &CobarElement) -> Result<(), ExtError> {
        if differential_with(&self.alg, x)?.is_zero() {
            Ok(())
        } else {
            Err(ExtError::NotCocycle(x.display()))
        }
    }

    /// Coordinates of the class of the cocycle `x` against [`Self::group`]
    /// of its tridegree.
    pub fn express(&mut self, x: &CobarElement) -> Result<Expressed, ExtError> {
        self.check_cocycle(x)?;
        match self.locate(x)? {
            None => Ok(Expressed::Boundary),
            Some((d, v)) => self.computer.express(d, &v),
        }
    }

    /// Whether the cocycle `x` is zero in Ext. Needs one degree less than
    /// [`Self::express`].
    pub fn is_zero_class(&mut self, x: &CobarElement) -> Result<bool, ExtError> {
        self.check_cocycle(x)?;
        match self.locate(x)? {
            None => Ok(true),
            Some((d, v)) => self.computer.is_boundary(d, &v),
        }
    }

    pub fn catalog(&self) -> Vec<CatalogEntry> {
        catalog(self.spec())
    }

    /// Binds every catalog name, in catalog order.
    pub fn identify_named_classes(&mut self) -> Result<Vec<ExtClass>, ExtError> {
        let names: Vec<String> = self.catalog().into_iter().map(|e| e.name).collect();
        names.iter().map(|n| self.class(n)).collect()
    }

    pub fn class(&mut self, name: &str) -> Result<ExtClass, ExtError> {
        if let Some(c) = self.named.get(name) {
            return Ok(c.clone());
        }
        let entry = self
            .catalog()
            .into_iter()
            .find(|e| e.name == name)
            .ok_or_else(|| ExtError::UnknownName(name.to_string()))?;
        let fail = |reason: String| ExtError::Catalog { name: name.to_string(), reason };
        let representative = match &entry.binding {
            Binding::Cochain(src) => {
                let x = CobarElement::parse(self.spec(), src)?;
                if x.tridegree()? != Some(entry.tridegree) {
                    return Err(fail(format!("{src} does not lie in {}", entry.tridegree)));
                }
                if self.is_zero_class(&x)? {
                    return Err(fail(format!("{src} is zero in Ext")));
                }
                x
            }
            Binding::Unique => {
                let g = self.group(entry.tridegree)?;
                if g.dim != 1 {
                    return Err(fail(format!("Ext in {} has dimension {}, expected 1", entry.tridegree, g.dim)));
                }
                g.representatives[0].clone()
            }
        };
        let c = ExtClass { name: entry.name.clone(), tridegree: entry.tridegree, representative };
        self.named.insert(entry.name, c.clone());
        Ok(c)
    }

    /// A cochain from a sum of products of named classes and ground ring
    /// monomials, e.g. `rho*eta*eta0 + tau^4*v0`.
    pub fn evaluate(&mut self, expr: &str) -> Result<CobarElement, ExtError> {
        let spec = self.spec();
        let mut total = CobarElement::zero(spec);
        let expr = expr.trim();
        if expr == "0" {
            return Ok(total);
        }
        for summand in expr.split('+') {
            let mut prod = CobarElement::one(spec);
            for factor in summand.split('*') {
                let f = self.factor(factor.trim())?;
                prod = concat_product(&prod, &f)?;
            }
            total = total.add(&prod)?;
        }
        Ok(total)
    }

    fn factor(&mut self, f: &str) -> Result<CobarElement, ExtError> {
        if f.is_empty() {
            return Err(ExtError::Parse(f.to_string()));
        }
        if f == "1" {
            return Ok(CobarElement::one(self.spec()));
        }
        if self.catalog().iter().any(|e| e.name == f) {
            return Ok(self.class(f)?.representative);
        }
        let (base, exp) = match f.rsplit_once('^') {
            Some((b, e)) => (b, e.parse::<u32>().map_err(|_| ExtError::Parse(f.to_string()))?),
            None => (f, 1),
        };
        let single = match base {
            "rho" => CobarElement::from_terms(self.spec(), vec![CobarTerm::new(M2Monomial::RHO, &[])]),
            "tau" => CobarElement::from_terms(self.spec(), vec![CobarTerm::new(M2Monomial::TAU, &[])]),
            _ if self.catalog().iter().any(|e| e.name == base) => self.class(base)?.representative,
            _ => return Err(ExtError::UnknownName(base.to_string())),
        };
        let mut out = CobarElement::one(self.spec());
        for _ in 0..exp {
            out = concat_product(&out, &single)?;
        }
        Ok(out)
    }

    /// Whether `lhs = rhs` holds in Ext.
    pub fn verify_relation(&mut self, lhs: &str, rhs: &str) -> Result<bool, ExtError> {
        let z = self.evaluate(lhs)?.add(&self.evaluate(rhs)?)?;
        if z.tridegree().is_err() {
            return Err(ExtError::NotHomogeneous(format!("{lhs} - {rhs}")));
        }
        self.is_zero_class(&z)
    }

    /// The least `k` with `rho^k c = 0`, trying every `k` up to
    /// [`torsion_probe`].
    pub fn rho_torsion_order(&mut self, c: &ExtClass, w: &ExtWindow) -> Result<TorsionOrder, ExtError> {
        self.check_cocycle(&c.representative)?;
        if self.is_zero_class(&c.representative)? {
            return Ok(TorsionOrder::Finite(0));
        }
        let kmax = torsion_probe(w, c.tridegree);
        let rho = CobarElement::from_terms(self.spec(), vec![CobarTerm::new(M2Monomial::RHO, &[])]);
        let mut x = c.representative.clone();
        for k in 1..=kmax {
            x = concat_product(&rho, &x)?;
            if self.is_zero_class(&x)? {
                return Ok(TorsionOrder::Finite(k));
            }
        }
        Ok(TorsionOrder::FreeInWindow)
    }

    /// Whether `<a, b, c>` contains `target` modulo its indeterminacy.
    pub fn massey_contains(&mut self, a: &str, b: &str, c: &str, target: &str) -> Result<bool, ExtError> {
        let (a, b, c) = (self.evaluate(a)?, self.evaluate(b)?, self.evaluate(c)?);
        let target = self.evaluate(target)?;
        let m = massey_triple(&a, &b, &c)?;
        let diff = m.representative.add(&target)?;
        let Some(d) = diff.tridegree()? else {
            return Ok(true);
        };
        let dim = self.computer.ext_dim(d)?;
        let mut span = Vec::new();
        for x in &m.indeterminacy {
            span.push(self.coordinates(x, dim)?);
        }
        let goal = self.coordinates(&diff, dim)?;
        let m = F2Matrix::from_columns(dim, &span).expect("consistent sizes");
        Ok(crate::f2_linalg::solve(&m, &goal).expect("sizes agree").is_some())
    }

    fn coordinates(&mut self, x: &CobarElement, dim: usize) -> Result<BitVec, ExtError> {
        Ok(match self.express(x)? {
            Expressed::Boundary => BitVec::zeros(dim),
            Expressed::Class(c) => c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(stem: i32, s: i32, u: i32) -> TriDegree {
        TriDegree::new(stem, s, u)
    }

    #[test]
    fn span_parsing() {
        assert_eq!("0..12".parse::<Span>().unwrap(), Span::new(0, 12));
        assert_eq!("-12..=8".parse::<Span>().unwrap(), Span::new(-12, 8));
        assert_eq!("3".parse::<Span>().unwrap(), Span::new(3, 3));
        assert!("a..b".parse::<Span>().is_err());
        assert!(Span::new(2, 1).is_empty());
    }

    #[test]
    fn window_slices_respect_vanishing_line() {
        let w = ExtWindow::new(AlgebroidSpec::e(1), Span::new(0, 1), Span::new(0, 2), Span::new(0, 1)).unwrap();
        assert_eq!(w.tridegrees().len(), 12);
        for ((t, u), top) in w.slices() {
            assert!(top as i32 <= t - u);
        }
        assert!(ExtWindow::new(AlgebroidSpec::e(1), Span::new(0, 1), Span::new(-1, 2), Span::new(0, 1)).is_err());
    }

    #[test]
    fn small_groups() {
        let mut e1 = ExtEngine::new(AlgebroidSpec::e(1)).unwrap();
        assert_eq!(e1.group(tri(0, 1, 0)).unwrap().dim, 1);
        assert_eq!(e1.group(tri(-1, 1, -1)).unwrap().dim, 0);
        assert_eq!(e1.group(tri(0, 0, 0)).unwrap().dim, 1);
        let mut a1 = ExtEngine::new(AlgebroidSpec::a(1)).unwrap();
        assert_eq!(a1.group(tri(1, 1, 1)).unwrap().dim, 1);
        assert_eq!(a1.group(tri(0, 0, 0)).unwrap().dim, 1);
    }

    #[test]
    fn express_examples() {
        let mut a1 = ExtEngine::new(AlgebroidSpec::a(1)).unwrap();
        let v0 = a1.class("v0").unwrap();
        let g = a1.group(v0.tridegree).unwrap();
        // v0 and rho*eta
        assert_eq!(g.dim, 2);
        assert!(matches!(a1.express(&v0.representative).unwrap(), Expressed::Class(_)));
        for (k, r) in g.representatives.iter().enumerate() {
            assert_eq!(a1.express(r).unwrap(), Expressed::Class(BitVec::unit(2, k)));
        }
        let prod = a1.evaluate("v0*eta").unwrap();
        assert_eq!(prod.tridegree().unwrap(), Some(tri(1, 2, 1)));
        assert_eq!(a1.express(&prod).unwrap(), Expressed::Boundary);
        let bound = crate::cobar::differential(&CobarElement::parse(AlgebroidSpec::a(1), "tau*[xi1]").unwrap()).unwrap();
        assert_eq!(a1.express(&bound).unwrap(), Expressed::Boundary);
        let not_cocycle = CobarElement::parse(AlgebroidSpec::a(1), "tau*[tau0]").unwrap();
        assert!(matches!(a1.express(&not_cocycle), Err(ExtError::NotCocycle(_))));
    }

    #[test]
    fn named_classes_bind() {
        let mut a1 = ExtEngine::new(AlgebroidSpec::a(1)).unwrap();
        for c in a1.identify_named_classes().unwrap() {
            assert_eq!(c.representative.tridegree().unwrap(), Some(c.tridegree), "{}", c.name);
        }
        let mut e2 = ExtEngine::new(AlgebroidSpec::e(2)).unwrap();
        let names: Vec<String> = e2.identify_named_classes().unwrap().into_iter().map(|c| c.name).collect();
        assert_eq!(names, ["rho", "tau^8", "v0", "v1", "v2"]);
    }

    #[test]
    fn torsion_orders() {
        let w = ExtWindow::default_for(AlgebroidSpec::e(1));
        let mut e1 = ExtEngine::new(AlgebroidSpec::e(1)).unwrap();
        let v0 = e1.class("v0").unwrap();
        let v1 = e1.class("v1").unwrap();
        assert_eq!(e1.rho_torsion_order(&v0, &w).unwrap(), TorsionOrder::Finite(1));
        assert_eq!(e1.rho_torsion_order(&v1, &w).unwrap(), TorsionOrder::Finite(3));
        assert_eq!(e1.computer().rho_torsion_orders(v1.tridegree, 12).unwrap(), vec![Some(3)]);
    }

    #[test]
    fn relation_in_low_degree() {
        let mut a1 = ExtEngine::new(AlgebroidSpec::a(1)).unwrap();
        assert!(a1.verify_relation("v0*eta0", "rho*eta*eta0").unwrap());
        assert!(!a1.verify_relation("v0*eta0", "0").unwrap());
        assert!(a1.verify_relation("eta*v0", "0").unwrap());
        assert!(matches!(a1.verify_relation("nope", "0"), Err(ExtError::UnknownName(_))));
    }

    #[test]
    fn scrambled_basis_gives_same_dimensions() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let alg = Algebroid::shared(AlgebroidSpec::a(1)).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for (t, u) in [(4, 1), (7, 2), (5, -1), (3, -3)] {
            let slice = ComplexSlice::build(alg.clone(), t, u, 4).unwrap();
            let c = slice.filtered();
            let red = SliceReduction::new(&c, Reps::None);
            let perms: Vec<Vec<u32>> = c
                .levels
                .iter()
                .map(|lv| {
                    // shuffle within each run of equal levels
                    let mut p: Vec<u32> = (0..lv.len() as u32).collect();
                    for run in p.chunk_by_mut(|&a, &b| lv[a as usize] == lv[b as usize]) {
                        run.shuffle(&mut rng);
                    }
                    p
                })
                .collect();
            let scrambled = c.permuted(&perms);
            scrambled.check_shape().unwrap();
            assert!(scrambled.squares_to_zero());
            let red2 = SliceReduction::new(&scrambled, Reps::None);
            for s in 0..=4 {
                assert_eq!(red.ext_dim(s).unwrap(), red2.ext_dim(s).unwrap(), "({t},{u}) s={s}");
            }
        }
    }
}
