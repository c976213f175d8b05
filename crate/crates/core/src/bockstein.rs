//! The rho-Bockstein spectral sequence.
//!
//! Each `(t, u)` slice of a chain model is filtered by rho exponent, and the
//! canonical pairing of its filtered reduction gives every page at once: a
//! pair `x -> y` of length `r` is a `d_r` from the spot of `x` to the spot
//! of `y`, and an element is present on `E_r` while its pair length is at
//! least `r`. A spot is a tridegree together with a filtration level `k`;
//! on `E_1` it holds `rho^k` times complex-point Ext in tridegree
//! `(stem + k, s, u + k)`.
//!
//! Names come from a complex-point presentation of `E_1`: a spot whose
//! `E_1` group is spanned by a single monomial carries that monomial's name,
//! so every nonzero class on a later page there is that class.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::algebroid::{AlgebroidSpec, Family};
use crate::ext_engine::{ChainModel, ExtComputer, ExtError, ExtWindow};
use crate::f2_linalg::F2Matrix;
use crate::ground::TriDegree;
use crate::oracle::{self, Monomial, OracleError, RingPresentation};

#[derive(Debug, thiserror::Error)]
pub enum BocksteinError {
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("the rho-Bockstein spectral sequence needs a real form, got {0}")]
    ComplexPoint(AlgebroidSpec),
    #[error("page {0} is not defined; pages start at 1")]
    BadPage(u32),
}

/// A tridegree and a rho-filtration level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PageSpot {
    pub tridegree: TriDegree,
    pub level: u32,
}

impl PageSpot {
    pub const fn new(tridegree: TriDegree, level: u32) -> Self {
        PageSpot { tridegree, level }
    }

    /// Tridegree of the complex-point class this spot is `rho^level` times.
    pub fn complex_tridegree(&self) -> TriDegree {
        let k = self.level as i32;
        self.tridegree + TriDegree::new(k, 0, k)
    }

    /// Where `d_r` from this spot lands.
    pub fn target(&self, r: u32) -> PageSpot {
        PageSpot::new(self.tridegree + TriDegree::new(-1, 1, 0), self.level + r)
    }
}

impl fmt::Display for PageSpot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.tridegree, self.level)
    }
}

/// What happens to a basis element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Fate {
    Supports(u32),
    Hit(u32),
    Permanent,
}

impl Fate {
    fn alive_on(self, r: u32) -> bool {
        match self {
            Fate::Permanent => true,
            Fate::Supports(l) | Fate::Hit(l) => l >= r,
        }
    }
}

/// The spectral sequence over a window: fates of every cochain at every
/// spot of the window, and all differentials leaving the window's spots.
#[derive(Clone, Debug)]
pub struct BocksteinSS {
    spec: AlgebroidSpec,
    window: ExtWindow,
    fates: BTreeMap<PageSpot, BTreeMap<Fate, usize>>,
    diffs: BTreeMap<(u32, PageSpot), usize>,
}

/// Dimensions of one page at the window's spots, zeros omitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Page {
    pub r: u32,
    pub dims: BTreeMap<PageSpot, usize>,
}

impl Page {
    pub fn total(&self, d: TriDegree) -> usize {
        self.dims.iter().filter(|(s, _)| s.tridegree == d).map(|(_, n)| n).sum()
    }
}

/// `d_r` between two spots. In the bases of `E_r` adapted to the pairing
/// its matrix is an identity block of size `rank`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PageDifferential {
    pub r: u32,
    pub source: PageSpot,
    pub target: PageSpot,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

impl PageDifferential {
    pub fn matrix(&self) -> F2Matrix {
        let mut m = F2Matrix::zeros(self.target_dim, self.source_dim);
        for i in 0..self.rank {
            m.set(i, i, true);
        }
        m
    }
}

impl BocksteinSS {
    /// Reduce every slice the window touches.
    pub fn compute<M: ChainModel>(computer: &mut ExtComputer<M>, window: &ExtWindow) -> Result<Self, BocksteinError> {
        let spec = computer.spec();
        if spec.rho_killed {
            return Err(BocksteinError::ComplexPoint(spec));
        }
        let mut fates: BTreeMap<PageSpot, BTreeMap<Fate, usize>> = BTreeMap::new();
        let mut diffs: BTreeMap<(u32, PageSpot), usize> = BTreeMap::new();
        for ((t, u), top) in window.slices() {
            let entry = computer.entry(t, u, top, false)?;
            for (spot, fate) in entry.reduction.fates().map_err(ExtError::from)? {
                let d = TriDegree::new(t - spot.s as i32, spot.s as i32, u);
                if !window.contains(&d) {
                    continue;
                }
                let p = PageSpot::new(d, spot.level);
                let fate = match fate {
                    None => Fate::Permanent,
                    Some((r, true)) => Fate::Supports(r),
                    Some((r, false)) => Fate::Hit(r),
                };
                *fates.entry(p).or_default().entry(fate).or_default() += 1;
                // Length-zero pairs cancel on E_0 and never show up on a page.
                if let Fate::Supports(r @ 1..) = fate {
                    *diffs.entry((r, p)).or_default() += 1;
                }
            }
        }
        Ok(BocksteinSS { spec, window: *window, fates, diffs })
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.spec
    }

    pub fn window(&self) -> &ExtWindow {
        &self.window
    }

    /// Dimension of `E_r` at a spot of the window.
    pub fn dim(&self, r: u32, spot: PageSpot) -> usize {
        self.fates.get(&spot).map_or(0, |f| f.iter().filter(|(x, _)| x.alive_on(r)).map(|(_, n)| n).sum())
    }

    /// `E_r`, for `r >= 1`.
    pub fn compute_page(&self, r: u32) -> Result<Page, BocksteinError> {
        if r == 0 {
            return Err(BocksteinError::BadPage(r));
        }
        let dims = self
            .fates
            .keys()
            .map(|&s| (s, self.dim(r, s)))
            .filter(|(_, n)| *n > 0)
            .collect();
        Ok(Page { r, dims })
    }

    /// `d_r` out of `source`; rank zero when nothing leaves it.
    pub fn page_differential(&self, r: u32, source: PageSpot) -> PageDifferential {
        let target = source.target(r);
        let target_dim = match self.fates.get(&target) {
            Some(_) => self.dim(r, target),
            // Outside the window: count what the differential hits.
            None => self.diffs.get(&(r, source)).copied().unwrap_or(0),
        };
        PageDifferential {
            r,
            source,
            target,
            source_dim: self.dim(r, source),
            target_dim,
            rank: self.diffs.get(&(r, source)).copied().unwrap_or(0),
        }
    }

    /// Every nonzero differential, by page then source.
    pub fn differentials(&self) -> Vec<PageDifferential> {
        self.diffs.keys().map(|&(r, s)| self.page_differential(r, s)).collect()
    }

    /// Longest differential in the window; pages from one past it on are `E_infinity`.
    pub fn max_length(&self) -> u32 {
        self.diffs.keys().map(|(r, _)| *r).max().unwrap_or(0)
    }

    pub fn infinity_page(&self) -> Page {
        self.compute_page(self.max_length() + 1).expect("page index is positive")
    }

    /// Lengths of nonzero differentials.
    pub fn lengths(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.diffs.keys().map(|(r, _)| *r).collect();
        v.dedup();
        v
    }

    /// Spots of the window with their fates, for reporting.
    pub fn spots(&self) -> impl Iterator<Item = (&PageSpot, &BTreeMap<Fate, usize>)> + '_ {
        self.fates.iter()
    }

    /// Consistency of consecutive pages: `dim E_{r+1} = dim E_r - rank in - rank out`
    /// at every spot whose incoming differentials start inside the window.
    pub fn check_page_homology(&self, r: u32) -> Vec<PageSpot> {
        let mut bad = Vec::new();
        for &spot in self.fates.keys() {
            let out = self.diffs.get(&(r, spot)).copied().unwrap_or(0);
            let incoming = self.fates[&spot].get(&Fate::Hit(r)).copied().unwrap_or(0);
            if self.dim(r + 1, spot) + out + incoming != self.dim(r, spot) {
                bad.push(spot);
            }
        }
        bad
    }
}

/// Names for spots from a complex-point presentation of `E_1`.
#[derive(Clone, Debug)]
pub struct Naming {
    complex: RingPresentation,
    aliases: Vec<(Monomial, String)>,
    generators: Vec<(String, TriDegree, bool)>,
    cache: HashMap<TriDegree, Vec<Monomial>>,
}

impl Naming {
    /// The complex-point presentation, page-level aliases for products
    /// (`eta0 = tau*eta` and so on) and the named page generators with a
    /// flag for classes with classical cobar representatives.
    pub fn for_spec(spec: AlgebroidSpec) -> Self {
        match spec.family {
            Family::E => {
                let complex = oracle::e_complex(spec.n);
                let mut generators = Vec::new();
                for i in 0..=spec.n + 1 {
                    generators.push((tau_power(1 << i), TriDegree::new(0, 0, -(1 << i)), false));
                }
                for i in 0..=spec.n {
                    generators.push((oracle::v_name(i, 0), oracle::v_degree(i, 0), true));
                }
                Naming { complex, aliases: Vec::new(), generators, cache: HashMap::new() }
            }
            Family::A => {
                assert_eq!(spec.n, 1, "names exist for A(1) only");
                let complex = oracle::a1_complex();
                let alias = |m: &str, name: &str| (complex.parse_monomial(m).expect("valid"), name.to_string());
                let aliases = vec![alias("tau^3*eta^2", "c"), alias("tau^2*x", "b"), alias("tau^2*v0", "a"), alias("tau*eta", "eta0")];
                let g = |n: &str, stem, s, u, classical| (n.to_string(), TriDegree::new(stem, s, u), classical);
                let generators = vec![
                    g("tau", 0, 0, -1, false),
                    g("tau^2", 0, 0, -2, false),
                    g("tau^4", 0, 0, -4, false),
                    g("v0", 0, 1, 0, true),
                    g("a", 0, 1, -2, false),
                    g("eta", 1, 1, 1, true),
                    g("eta0", 1, 1, 0, false),
                    g("c", 2, 2, -1, false),
                    g("x", 4, 3, 2, true),
                    g("b", 4, 3, 0, false),
                    g("v1^4", 8, 4, 4, true),
                ];
                Naming { complex, aliases, generators, cache: HashMap::new() }
            }
        }
    }

    pub fn complex(&self) -> &RingPresentation {
        &self.complex
    }

    /// Named page generators: name, tridegree (level 0), classical flag.
    pub fn generators(&self) -> &[(String, TriDegree, bool)] {
        &self.generators
    }

    /// Complex-point monomials spanning `E_1` at a spot.
    pub fn e1_monomials(&mut self, spot: PageSpot) -> Result<Vec<Monomial>, OracleError> {
        let d = spot.complex_tridegree();
        if let Some(v) = self.cache.get(&d) {
            return Ok(v.clone());
        }
        let v = self.complex.expand(d)?;
        self.cache.insert(d, v.clone());
        Ok(v)
    }

    /// Name of `rho^level * m`, using aliases where they divide.
    pub fn display(&self, level: u32, m: &[u32]) -> String {
        let mut rest = m.to_vec();
        let mut parts = Vec::new();
        match level {
            0 => {}
            1 => parts.push("rho".to_string()),
            k => parts.push(format!("rho^{k}")),
        }
        for (p, name) in &self.aliases {
            let mut e = 0;
            while rest.iter().zip(p).all(|(a, b)| a >= b) {
                rest.iter_mut().zip(p).for_each(|(a, b)| *a -= b);
                e += 1;
            }
            match e {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(format!("{name}^{e}")),
            }
        }
        if rest.iter().any(|&e| e > 0) {
            parts.push(self.complex.display(&rest));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// The name of the class at a spot, if `E_1` there is one-dimensional.
    pub fn spot_name(&mut self, spot: PageSpot) -> Result<Option<String>, OracleError> {
        let ms = self.e1_monomials(spot)?;
        Ok(match ms.as_slice() {
            [m] => Some(self.display(spot.level, m)),
            _ => None,
        })
    }
}

fn tau_power(k: u32) -> String {
    if k == 1 {
        "tau".into()
    } else {
        format!("tau^{k}")
    }
}

/// A differential whose source and target spots both carry names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamedDifferential {
    pub r: u32,
    pub source: String,
    pub target: String,
    pub source_spot: PageSpot,
    pub target_spot: PageSpot,
}

impl fmt::Display for NamedDifferential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}({}) = {}", self.r, self.source, self.target)
    }
}

/// All differentials with named ends, up to page `max_page`.
pub fn named_differentials(ss: &BocksteinSS, naming: &mut Naming, max_page: u32) -> Result<Vec<NamedDifferential>, OracleError> {
    let mut out = Vec::new();
    for d in ss.differentials() {
        if d.r > max_page {
            continue;
        }
        if let (Some(a), Some(b)) = (naming.spot_name(d.source)?, naming.spot_name(d.target)?) {
            out.push(NamedDifferential { r: d.r, source: a, target: b, source_spot: d.source, target_spot: d.target });
        }
    }
    Ok(out)
}

/// A differential on one of the named page generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorDifferential {
    pub generator: String,
    pub r: u32,
    /// Name of the target when its spot is one-dimensional on `E_1`.
    pub target: Option<String>,
    /// Whether other classes share the generator's spot on `E_1`, so the
    /// differential might start on one of them.
    pub ambiguous: bool,
}

impl fmt::Display for GeneratorDifferential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}({}) = {}", self.r, self.generator, self.target.as_deref().unwrap_or("?"))?;
        if self.ambiguous {
            f.write_str(" (spot shared)")?;
        }
        Ok(())
    }
}

/// Nonzero differentials out of the spots of the named page generators.
pub fn generator_differentials(ss: &BocksteinSS, naming: &mut Naming) -> Result<Vec<GeneratorDifferential>, OracleError> {
    let mut out = Vec::new();
    let gens = naming.generators.clone();
    for (name, d, _) in gens {
        let spot = PageSpot::new(d, 0);
        if !ss.window.contains(&d) {
            continue;
        }
        let ambiguous = naming.e1_monomials(spot)?.len() > 1;
        for r in ss.lengths() {
            if ss.diffs.contains_key(&(r, spot)) {
                out.push(GeneratorDifferential { generator: name.clone(), r, target: naming.spot_name(spot.target(r))?, ambiguous });
            }
        }
    }
    Ok(out)
}

/// Survival of a named class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Survival {
    Permanent,
    /// Supports `d_r` and is gone from `E_{r+1}`.
    Supports(u32),
    /// Hit by `d_r`.
    Hit(u32),
    /// `E_1` at the spot has more than one class.
    Ambiguous,
    OutsideWindow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurvivalRecord {
    pub name: String,
    pub spot: PageSpot,
    pub classical: bool,
    pub survival: Survival,
}

/// Fate of each named page generator. Classes flagged classical have
/// cobar representatives free of rho and tau and must be permanent.
pub fn permanent_cycle_report(ss: &BocksteinSS, naming: &mut Naming) -> Result<Vec<SurvivalRecord>, OracleError> {
    let mut out = Vec::new();
    let gens = naming.generators.clone();
    for (name, d, classical) in gens {
        let spot = PageSpot::new(d, 0);
        let survival = if !ss.window.contains(&d) {
            Survival::OutsideWindow
        } else if naming.e1_monomials(spot)?.len() != 1 {
            Survival::Ambiguous
        } else {
            match ss.fates.get(&spot).and_then(|f| f.keys().next().copied()) {
                Some(Fate::Supports(r)) => Survival::Supports(r),
                Some(Fate::Hit(r)) => Survival::Hit(r),
                _ => Survival::Permanent,
            }
        };
        out.push(SurvivalRecord { name, spot, classical, survival });
    }
    Ok(out)
}

/// A later differential touching a multiple of a truncated class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationViolation {
    /// The differential `d_r(x) = rho^r a` that truncated `a`.
    pub truncation: String,
    pub spot: PageSpot,
    pub r: u32,
    pub supports: bool,
}

/// For every named `d_r(x) = rho^r a` with `x` on level 0, check that no
/// class of `a * E_{r+1}` supports or receives a `d_s` with `s > r`.
///
/// A spot counts as a class of `a * E_{r+1}` when `E_1` there is spanned by
/// one monomial `a * m`, the spot of `rho^k m` is likewise spanned by `m`
/// and `m` and `a` are still alive on `E_{r+1}`. Spots whose factors fall
/// outside the window are skipped.
pub fn truncation_cycle_check(ss: &BocksteinSS, naming: &mut Naming) -> Result<Vec<TruncationViolation>, OracleError> {
    let mut out = Vec::new();
    let mut hit: BTreeMap<PageSpot, Vec<u32>> = BTreeMap::new();
    for &(r, s) in ss.diffs.keys() {
        hit.entry(s.target(r)).or_default().push(r);
    }
    let spots: Vec<PageSpot> = ss.fates.keys().copied().collect();
    for d in ss.differentials() {
        if d.source.level != 0 {
            continue;
        }
        let ms = naming.e1_monomials(d.target)?;
        let [a] = ms.as_slice() else { continue };
        let a = a.clone();
        let a_deg = naming.complex.degree(&a);
        let a_spot = PageSpot::new(a_deg, 0);
        if !ss.window.contains(&a_deg) || ss.dim(d.r + 1, a_spot) == 0 {
            continue;
        }
        let label = format!(
            "d{}({}) = {}",
            d.r,
            naming.spot_name(d.source)?.unwrap_or_else(|| d.source.to_string()),
            naming.display(d.target.level, &a)
        );
        for &spot in &spots {
            if ss.dim(d.r + 1, spot) == 0 {
                continue;
            }
            let ms = naming.e1_monomials(spot)?;
            let [big] = ms.as_slice() else { continue };
            if !big.iter().zip(&a).all(|(x, y)| x >= y) {
                continue;
            }
            let m: Monomial = big.iter().zip(&a).map(|(x, y)| x - y).collect();
            let m_spot = PageSpot::new(spot.tridegree - a_deg, spot.level);
            if !ss.window.contains(&m_spot.tridegree) || ss.dim(d.r + 1, m_spot) == 0 {
                continue;
            }
            if naming.e1_monomials(m_spot)? != [m] {
                continue;
            }
            for &(r2, s2) in ss.diffs.keys() {
                if s2 == spot && r2 > d.r {
                    out.push(TruncationViolation { truncation: label.clone(), spot, r: r2, supports: true });
                }
            }
            for &r2 in hit.get(&spot).into_iter().flatten() {
                if r2 > d.r {
                    out.push(TruncationViolation { truncation: label.clone(), spot, r: r2, supports: false });
                }
            }
        }
    }
    Ok(out)
}

/// Number of classes of `a * E_{r+1}` the truncation check covers, for
/// reporting that it is not vacuous.
pub fn truncation_coverage(ss: &BocksteinSS, naming: &mut Naming, a: &str, r: u32) -> Result<usize, OracleError> {
    let a = naming.complex.parse_monomial(a)?;
    let a_deg = naming.complex.degree(&a);
    let spots: Vec<PageSpot> = ss.fates.keys().copied().collect();
    let mut n = 0;
    for spot in spots {
        if ss.dim(r + 1, spot) == 0 {
            continue;
        }
        let ms = naming.e1_monomials(spot)?;
        let [big] = ms.as_slice() else { continue };
        if !big.iter().zip(&a).all(|(x, y)| x >= y) {
            continue;
        }
        let m: Monomial = big.iter().zip(&a).map(|(x, y)| x - y).collect();
        let m_spot = PageSpot::new(spot.tridegree - a_deg, spot.level);
        if ss.window.contains(&m_spot.tridegree) && ss.dim(r + 1, m_spot) > 0 && naming.e1_monomials(m_spot)? == [m] {
            n += 1;
        }
    }
    Ok(n)
}

/// Where `E_1` disagrees with the complex-point presentation with rho adjoined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct E1Mismatch {
    pub spot: PageSpot,
    pub expected: usize,
    pub computed: usize,
}

/// Compare `E_1` at every spot of the window with the complex-point input.
/// Levels run up to the largest at which complex-point Ext can be nonzero
/// (`u <= t/2` there).
pub fn e1_check(ss: &BocksteinSS, naming: &mut Naming) -> Result<Vec<E1Mismatch>, OracleError> {
    let mut out = Vec::new();
    for d in ss.window.tridegrees() {
        let kmax = d.stem + d.s - 2 * d.u;
        for k in 0..=kmax.max(0) as u32 {
            let spot = PageSpot::new(d, k);
            let expected = naming.e1_monomials(spot)?.len();
            let computed = ss.dim(1, spot);
            if expected != computed {
                out.push(E1Mismatch { spot, expected, computed });
            }
        }
    }
    for &spot in ss.fates.keys() {
        if spot.level as i32 > (spot.tridegree.stem + spot.tridegree.s - 2 * spot.tridegree.u).max(0) && ss.dim(1, spot) > 0 {
            out.push(E1Mismatch { spot, expected: 0, computed: ss.dim(1, spot) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext_engine::{CobarModel, Span};
    use crate::resolution::ResolutionModel;

    fn small(spec: AlgebroidSpec) -> ExtWindow {
        ExtWindow::new(spec, Span::new(-1, 6), Span::new(0, 4), Span::new(-6, 4)).unwrap()
    }

    #[test]
    fn e1_differentials_in_a_small_window() {
        let spec = AlgebroidSpec::e(1);
        let w = small(spec);
        let mut c = ExtComputer::new(CobarModel::new(spec, CobarModel::DEFAULT_LIMIT).unwrap());
        let ss = BocksteinSS::compute(&mut c, &w).unwrap();
        let mut names = Naming::for_spec(spec);
        let gd: Vec<String> = generator_differentials(&ss, &mut names).unwrap().iter().map(|d| d.to_string()).collect();
        assert_eq!(gd, vec!["d1(tau) = rho*v0", "d3(tau^2) = rho^3*v1"]);
        assert_eq!(ss.lengths(), vec![1, 3]);
        assert!(e1_check(&ss, &mut names).unwrap().is_empty());
        for r in 1..=4 {
            assert!(ss.check_page_homology(r).is_empty());
        }
    }

    #[test]
    fn infinity_page_is_ext() {
        for spec in [AlgebroidSpec::e(1), AlgebroidSpec::a(1)] {
            let w = small(spec);
            let mut c = ExtComputer::new(ResolutionModel::new(spec, ResolutionModel::DEFAULT_MAX_X).unwrap());
            let ss = BocksteinSS::compute(&mut c, &w).unwrap();
            let inf = ss.infinity_page();
            for (d, n) in c.dims(&w).unwrap() {
                assert_eq!(inf.total(d), n, "{spec} {d}");
            }
        }
    }

    #[test]
    fn models_give_the_same_pages() {
        let spec = AlgebroidSpec::a(1);
        let w = ExtWindow::new(spec, Span::new(0, 5), Span::new(0, 3), Span::new(-4, 3)).unwrap();
        let mut a = ExtComputer::new(CobarModel::new(spec, CobarModel::DEFAULT_LIMIT).unwrap());
        let mut b = ExtComputer::new(ResolutionModel::new(spec, ResolutionModel::DEFAULT_MAX_X).unwrap());
        let sa = BocksteinSS::compute(&mut a, &w).unwrap();
        let sb = BocksteinSS::compute(&mut b, &w).unwrap();
        for r in 1..=5 {
            assert_eq!(sa.compute_page(r).unwrap(), sb.compute_page(r).unwrap(), "page {r}");
        }
        assert_eq!(sa.differentials(), sb.differentials());
    }

    #[test]
    fn differentials_square_to_zero() {
        let spec = AlgebroidSpec::a(1);
        let w = small(spec);
        let mut c = ExtComputer::new(ResolutionModel::new(spec, ResolutionModel::DEFAULT_MAX_X).unwrap());
        let ss = BocksteinSS::compute(&mut c, &w).unwrap();
        for d in ss.differentials() {
            let next = ss.page_differential(d.r, d.target);
            if next.source_dim == d.target_dim && next.rank > 0 {
                assert!(next.matrix().mul(&d.matrix()).unwrap().is_zero(), "{d:?}");
            }
            // Pair targets never support the same page's differential.
            assert!(next.rank + d.rank <= d.target_dim.max(next.source_dim));
        }
    }

    #[test]
    fn complex_point_is_rejected() {
        let spec = AlgebroidSpec::e(1).complex();
        let mut c = ExtComputer::new(CobarModel::new(spec, CobarModel::DEFAULT_LIMIT).unwrap());
        assert!(matches!(BocksteinSS::compute(&mut c, &small(spec)), Err(BocksteinError::ComplexPoint(_))));
    }

    #[test]
    fn empty_window() {
        let spec = AlgebroidSpec::a(1);
        let w = ExtWindow::new(spec, Span::new(0, -1), Span::new(0, 3), Span::new(0, 0)).unwrap();
        let mut c = ExtComputer::new(ResolutionModel::new(spec, ResolutionModel::DEFAULT_MAX_X).unwrap());
        let ss = BocksteinSS::compute(&mut c, &w).unwrap();
        let mut names = Naming::for_spec(spec);
        assert!(ss.differentials().is_empty());
        assert!(truncation_cycle_check(&ss, &mut names).unwrap().is_empty());
    }

    #[test]
    fn alias_names() {
        let n = Naming::for_spec(AlgebroidSpec::a(1));
        let m = n.complex().parse_monomial("tau^3*eta^2").unwrap();
        assert_eq!(n.display(0, &m), "c");
        let m = n.complex().parse_monomial("tau*eta").unwrap();
        assert_eq!(n.display(2, &m), "rho^2*eta0");
        let m = n.complex().parse_monomial("tau^5*v0").unwrap();
        assert_eq!(n.display(1, &m), "rho*a*tau^3");
    }
}
