//! Closed-form ring presentations, expanded independently of the cochain
//! machinery.
//!
//! A presentation is a commutative polynomial ring over F2 on trigraded
//! generators modulo homogeneous relations. In each tridegree the oracle
//! lists every monomial, spans the ideal by all monomial multiples of the
//! relations and keeps the monomials that are not leading terms of the
//! reduced ideal basis. That set is the normal-form basis; its size is the
//! dimension of the quotient, whatever order the relations are applied in.
//!
//! Nothing here calls into the cobar complex or the shared linear algebra,
//! so agreement with computed Ext is an independent check.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ext_engine::ExtWindow;
use crate::ground::TriDegree;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("relation {0:?} is not homogeneous")]
    NotHomogeneous(String),
    #[error("generator {0:?} has s = 0 but no negative weight, so its powers are unbounded")]
    Unbounded(String),
    #[error("duplicate generator {0:?}")]
    Duplicate(String),
    #[error("tridegree {0} has more than {1} monomials")]
    ResourceLimit(TriDegree, usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("ext data: {0}")]
    Data(String),
}

/// Serialized form: `generators[{name, stem, s, weight}], relations[{lhs, rhs}]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationFile {
    #[serde(default)]
    pub name: String,
    pub generators: Vec<GeneratorSpec>,
    pub relations: Vec<RelationSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub stem: i32,
    pub s: i32,
    pub weight: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub lhs: String,
    pub rhs: String,
}

/// Exponent vector over the generators.
pub type Monomial = Vec<u32>;

/// A homogeneous polynomial, as a sorted list of distinct monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly {
    terms: Vec<Monomial>,
    degree: Option<TriDegree>,
}

#[derive(Clone, Debug)]
pub struct RingPresentation {
    name: String,
    generators: Vec<(String, TriDegree)>,
    relations: Vec<Poly>,
    source: Vec<RelationSpec>,
    limit: usize,
}

/// Bound on the monomial count of one tridegree.
pub const MONOMIAL_LIMIT: usize = 200_000;

impl RingPresentation {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<(String, TriDegree)>,
        relations: Vec<RelationSpec>,
    ) -> Result<Self, OracleError> {
        for (i, (g, d)) in generators.iter().enumerate() {
            if generators[..i].iter().any(|(h, _)| h == g) {
                return Err(OracleError::Duplicate(g.clone()));
            }
            if d.s < 0 || (d.s == 0 && (d.u >= 0 || d.stem > 0)) {
                return Err(OracleError::Unbounded(g.clone()));
            }
        }
        let mut p = RingPresentation {
            name: name.into(),
            generators,
            relations: Vec::new(),
            source: relations.clone(),
            limit: MONOMIAL_LIMIT,
        };
        for r in &relations {
            let mut poly = p.parse_poly(&r.lhs)?;
            let rhs = p.parse_poly(&r.rhs)?;
            for m in rhs.terms {
                toggle(&mut poly.terms, m);
            }
            let mut degree = None;
            for m in &poly.terms {
                let d = p.degree(m);
                if degree.is_some_and(|e| e != d) {
                    return Err(OracleError::NotHomogeneous(format!("{} = {}", r.lhs, r.rhs)));
                }
                degree = Some(d);
            }
            poly.degree = degree;
            if !poly.terms.is_empty() {
                p.relations.push(poly);
            }
        }
        Ok(p)
    }

    pub fn from_file(f: PresentationFile) -> Result<Self, OracleError> {
        let gens = f.generators.into_iter().map(|g| (g.name, TriDegree::new(g.stem, g.s, g.weight))).collect();
        RingPresentation::new(f.name, gens, f.relations)
    }

    pub fn from_json(src: &str) -> Result<Self, OracleError> {
        RingPresentation::from_file(serde_json::from_str(src)?)
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        RingPresentation::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> PresentationFile {
        PresentationFile {
            name: self.name.clone(),
            generators: self
                .generators
                .iter()
                .map(|(n, d)| GeneratorSpec { name: n.clone(), stem: d.stem, s: d.s, weight: d.u })
                .collect(),
            relations: self.source.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain data serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[(String, TriDegree)] {
        &self.generators
    }

    pub fn relations(&self) -> &[RelationSpec] {
        &self.source
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    /// The same ring without the relations whose source matches `pred`.
    pub fn without(&self, pred: impl Fn(&RelationSpec) -> bool) -> Result<Self, OracleError> {
        let keep = self.source.iter().filter(|r| !pred(r)).cloned().collect();
        RingPresentation::new(self.name.clone(), self.generators.clone(), keep)
    }

    /// Adjoin a polynomial generator.
    pub fn adjoin(&self, name: &str, d: TriDegree) -> Result<Self, OracleError> {
        let mut gens = self.generators.clone();
        gens.push((name.to_string(), d));
        RingPresentation::new(self.name.clone(), gens, self.source.clone())
    }

    pub fn degree(&self, m: &[u32]) -> TriDegree {
        m.iter().zip(&self.generators).fold(TriDegree::default(), |acc, (&e, (_, d))| {
            let e = e as i32;
            acc + TriDegree::new(d.stem * e, d.s * e, d.u * e)
        })
    }

    pub fn display(&self, m: &[u32]) -> String {
        let parts: Vec<String> = m
            .iter()
            .zip(&self.generators)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, (n, _))| if e == 1 { n.clone() } else if n.contains('^') { format!("({n})^{e}") } else { format!("{n}^{e}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|(n, _)| n == name)
    }

    /// A factor is a generator name, `name^e`, `(name)^e`, or `1`. A power
    /// of a generator that is itself written as a power (`v1^4`) may be
    /// given by its total exponent (`v1^8`).
    fn parse_factor(&self, f: &str, m: &mut Monomial) -> Result<(), OracleError> {
        let bad = || OracleError::Parse(f.to_string());
        if f == "1" {
            return Ok(());
        }
        if let Some(i) = self.index(f) {
            m[i] += 1;
            return Ok(());
        }
        let (base, exp) = f.rsplit_once('^').ok_or_else(|| OracleError::UnknownGenerator(f.into()))?;
        let exp: u32 = exp.parse().map_err(|_| bad())?;
        let base = base.strip_prefix('(').and_then(|b| b.strip_suffix(')')).unwrap_or(base);
        if let Some(i) = self.index(base) {
            m[i] += exp;
            return Ok(());
        }
        for (i, (n, _)) in self.generators.iter().enumerate() {
            if let Some((b, k)) = n.rsplit_once('^') {
                if b == base {
                    if let Ok(k) = k.parse::<u32>() {
                        if k > 0 && exp.is_multiple_of(k) {
                            m[i] += exp / k;
                            return Ok(());
                        }
                    }
                }
            }
        }
        Err(OracleError::UnknownGenerator(base.into()))
    }

    fn parse_poly(&self, src: &str) -> Result<Poly, OracleError> {
        let mut terms = Vec::new();
        let src = src.trim();
        if src == "0" {
            return Ok(Poly { terms, degree: None });
        }
        for term in src.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(OracleError::Parse(src.into()));
            }
            let mut m = vec![0; self.generators.len()];
            for f in term.split('*') {
                self.parse_factor(f.trim(), &mut m)?;
            }
            toggle(&mut terms, m);
        }
        Ok(Poly { terms, degree: None })
    }

    /// Parse a monomial such as `rho^2*eta0`.
    pub fn parse_monomial(&self, src: &str) -> Result<Monomial, OracleError> {
        let mut m = vec![0; self.generators.len()];
        for f in src.split('*') {
            self.parse_factor(f.trim(), &mut m)?;
        }
        Ok(m)
    }

    /// Every monomial of tridegree `d`, ascending.
    pub fn monomials(&self, d: TriDegree) -> Result<Vec<Monomial>, OracleError> {
        let mut out = Vec::new();
        if d.s < 0 {
            return Ok(out);
        }
        let mut m = vec![0; self.generators.len()];
        let positive: Vec<usize> = (0..self.generators.len()).filter(|&i| self.generators[i].1.s > 0).collect();
        let zero: Vec<usize> = (0..self.generators.len()).filter(|&i| self.generators[i].1.s == 0).collect();
        self.positive_part(&positive, 0, d, &zero, &mut m, &mut out)?;
        out.sort();
        Ok(out)
    }

    fn positive_part(
        &self,
        gens: &[usize],
        k: usize,
        rest: TriDegree,
        zero: &[usize],
        m: &mut Monomial,
        out: &mut Vec<Monomial>,
    ) -> Result<(), OracleError> {
        if rest.s == 0 {
            return self.zero_part(zero, 0, rest, m, out);
        }
        if k == gens.len() {
            return Ok(());
        }
        let g = gens[k];
        let d = self.generators[g].1;
        let mut e = 0;
        let mut r = rest;
        loop {
            m[g] = e;
            self.positive_part(gens, k + 1, r, zero, m, out)?;
            r = r - d;
            e += 1;
            if r.s < 0 {
                break;
            }
        }
        m[g] = 0;
        Ok(())
    }

    /// Weight-negative degree-zero generators fill in the rest; the weight
    /// bounds every exponent.
    fn zero_part(&self, gens: &[usize], k: usize, rest: TriDegree, m: &mut Monomial, out: &mut Vec<Monomial>) -> Result<(), OracleError> {
        if k == gens.len() {
            if rest == TriDegree::default() {
                if out.len() >= self.limit {
                    return Err(OracleError::ResourceLimit(self.degree(m), self.limit));
                }
                out.push(m.clone());
            }
            return Ok(());
        }
        let g = gens[k];
        let d = self.generators[g].1;
        let mut e = 0;
        let mut r = rest;
        while r.u <= 0 {
            m[g] = e;
            self.zero_part(gens, k + 1, r, m, out)?;
            r = r - d;
            e += 1;
        }
        m[g] = 0;
        Ok(())
    }

    /// Normal-form basis at `d`: the monomials that are not leading terms of
    /// the ideal in that tridegree, under lexicographic order on exponent
    /// vectors.
    pub fn expand(&self, d: TriDegree) -> Result<Vec<Monomial>, OracleError> {
        self.expand_ordered(d, &mut |_: &mut Vec<Vec<usize>>| {})
    }

    /// [`expand`](Self::expand) with a hook that may reorder the ideal
    /// generators before elimination.
    pub fn expand_ordered(&self, d: TriDegree, reorder: &mut dyn FnMut(&mut Vec<Vec<usize>>)) -> Result<Vec<Monomial>, OracleError> {
        let basis = self.monomials(d)?;
        if basis.is_empty() {
            return Ok(basis);
        }
        let pos: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for rel in &self.relations {
            let Some(rd) = rel.degree else { continue };
            for mult in self.monomials(d - rd)? {
                let mut row: Vec<usize> = rel
                    .terms
                    .iter()
                    .map(|t| pos[&t.iter().zip(&mult).map(|(a, b)| a + b).collect::<Monomial>()])
                    .collect();
                row.sort_unstable();
                rows.push(row);
            }
        }
        reorder(&mut rows);
        let lead = eliminate(rows);
        Ok(basis.into_iter().enumerate().filter(|(i, _)| !lead.contains_key(i)).map(|(_, m)| m).collect())
    }

    pub fn dim(&self, d: TriDegree) -> Result<usize, OracleError> {
        Ok(self.expand(d)?.len())
    }

    /// Dimensions over every tridegree of a window, zeros included.
    pub fn dims(&self, w: &ExtWindow) -> Result<BTreeMap<TriDegree, usize>, OracleError> {
        w.tridegrees().into_iter().map(|d| Ok((d, self.dim(d)?))).collect()
    }

    /// Normal-form basis at `d` as display strings.
    pub fn basis_names(&self, d: TriDegree) -> Result<Vec<String>, OracleError> {
        Ok(self.expand(d)?.iter().map(|m| self.display(m)).collect())
    }
}

impl fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn toggle(terms: &mut Vec<Monomial>, m: Monomial) {
    match terms.binary_search(&m) {
        Ok(i) => {
            terms.remove(i);
        }
        Err(i) => terms.insert(i, m),
    }
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Row echelon form keyed by leading (largest) index.
fn eliminate(rows: Vec<Vec<usize>>) -> HashMap<usize, Vec<usize>> {
    let mut lead: HashMap<usize, Vec<usize>> = HashMap::new();
    for mut r in rows {
        while let Some(&top) = r.last() {
            match lead.get(&top) {
                Some(p) => r = xor_sorted(&r, p),
                None => {
                    lead.insert(top, r);
                    break;
                }
            }
        }
    }
    lead
}

fn gen(name: impl Into<String>, stem: i32, s: i32, u: i32) -> (String, TriDegree) {
    (name.into(), TriDegree::new(stem, s, u))
}

fn rel(lhs: impl Into<String>, rhs: impl Into<String>) -> RelationSpec {
    RelationSpec { lhs: lhs.into(), rhs: rhs.into() }
}

/// Name of `v_i(j)`; `v_i(0)` is plain `v_i`.
pub fn v_name(i: u32, j: u32) -> String {
    if j == 0 {
        format!("v{i}")
    } else {
        format!("v{i}({j})")
    }
}

/// Tridegree of `v_i(j)`.
pub fn v_degree(i: u32, j: i64) -> TriDegree {
    let i = i as i64;
    TriDegree::new(((1i64 << (i + 1)) - 2) as i32, 1, ((1i64 << i) - 1 - (1i64 << (i + 1)) * j) as i32)
}

/// Ext over `E(n)` over the reals: `F2[rho, tau^P, v_i(j)]` with
/// `P = 2^(n+1)`, `rho^(2^(i+1)-1) v_i(j) = 0`, the product relation for
/// `i <= k` and `v_i(j) = tau^P v_i(j - 2^(n-i))`. The last relation is used
/// to drop `v_i(j)` for `j >= 2^(n-i)` from the generators.
pub fn e_real(n: u32) -> RingPresentation {
    let p = 1i32 << (n + 1);
    let tau = format!("tau^{p}");
    let mut gens = vec![gen("rho", -1, 0, -1), gen(tau.clone(), 0, 0, -p)];
    let mut rels = Vec::new();
    for i in 0..=n {
        for j in 0..(1u32 << (n - i)) {
            let d = v_degree(i, j as i64);
            gens.push(gen(v_name(i, j), d.stem, d.s, d.u));
            let e = (1u32 << (i + 1)) - 1;
            let rho = if e == 1 { "rho".to_string() } else { format!("rho^{e}") };
            rels.push(rel(format!("{rho}*{}", v_name(i, j)), "0"));
        }
    }
    // v_i(J) in terms of the kept generators.
    let reduced = |i: u32, big_j: u32| -> String {
        let period = 1u32 << (n - i);
        let (q, r) = (big_j / period, big_j % period);
        match q {
            0 => v_name(i, r),
            _ => format!("{tau}^{q}*{}", v_name(i, r)),
        }
    };
    for i in 0..=n {
        for k in i..=n {
            for j in 0..(1u32 << (n - i)) {
                for l in 1..(1u32 << (n - k)) {
                    if i == k && l < j {
                        continue;
                    }
                    let big_j = j + (1u32 << (k - i)) * l;
                    rels.push(rel(
                        format!("{}*{}", v_name(i, j), v_name(k, l)),
                        format!("{}*{}", reduced(i, big_j), v_name(k, 0)),
                    ));
                }
            }
        }
    }
    RingPresentation::new(format!("Ext over E({n})"), gens, rels).expect("well-formed")
}

/// Ext over `E(n)` at the complex point: `F2[tau, v_0, ..., v_n]`.
pub fn e_complex(n: u32) -> RingPresentation {
    let mut gens = vec![gen("tau", 0, 0, -1)];
    for i in 0..=n {
        let d = v_degree(i, 0);
        gens.push(gen(v_name(i, 0), d.stem, d.s, d.u));
    }
    RingPresentation::new(format!("Ext over E({n}) at the complex point"), gens, vec![]).expect("well-formed")
}

/// Ext over `A(1)` at the complex point:
/// `F2[tau, v0, eta, x, v1^4] / (v0 eta, tau eta^3, eta x, x^2 - v0^2 v1^4)`.
pub fn a1_complex() -> RingPresentation {
    let gens = vec![
        gen("tau", 0, 0, -1),
        gen("v0", 0, 1, 0),
        gen("eta", 1, 1, 1),
        gen("x", 4, 3, 2),
        gen("v1^4", 8, 4, 4),
    ];
    let rels = vec![rel("v0*eta", "0"), rel("tau*eta^3", "0"), rel("eta*x", "0"), rel("x^2", "v0^2*v1^4")];
    RingPresentation::new("Ext over A(1) at the complex point", gens, rels).expect("well-formed")
}

/// Ext over `A(1)` over the reals.
///
/// Differs from the printed ring in four places, each checked on cocycles:
/// `tau^4 eta^3` equals `rho b` rather than zero (forced by
/// `tau^4 eta^4 = rho^4 v1^4`), `b^2` carries the correction term
/// `rho^2 tau^4 eta^2 v1^4`, and the relations `rho^2 eta0 = 0` and
/// `a x = v0 b` are added; without them the ring is too big.
pub fn a1_real() -> RingPresentation {
    let gens = vec![
        gen("rho", -1, 0, -1),
        gen("tau^4", 0, 0, -4),
        gen("v0", 0, 1, 0),
        gen("a", 0, 1, -2),
        gen("eta", 1, 1, 1),
        gen("eta0", 1, 1, 0),
        gen("x", 4, 3, 2),
        gen("b", 4, 3, 0),
        gen("v1^4", 8, 4, 4),
    ];
    let rels = vec![
        rel("v0*rho", "0"),
        rel("v0*eta", "0"),
        rel("a*rho", "0"),
        rel("a*eta0", "0"),
        rel("eta*x", "0"),
        rel("tau^4*eta^3", "rho*b"),
        rel("eta0*x", "0"),
        rel("eta0*b", "0"),
        rel("eta0*eta^2", "0"),
        rel("eta0^3", "0"),
        rel("rho^3*x", "0"),
        rel("x^2", "v0^2*v1^4"),
        rel("a*b", "tau^4*v0*x"),
        rel("x*b", "a*v0*v1^4"),
        rel("b^2", "a^2*v1^4 + rho^2*tau^4*eta^2*v1^4"),
        rel("a^2", "v0^2*tau^4"),
        rel("eta*b", "rho^3*v1^4"),
        rel("v0*eta0", "rho*eta*eta0"),
        rel("eta*eta0^2", "rho*x"),
        rel("a*eta", "rho*eta0^2"),
        rel("rho^2*eta0", "0"),
        rel("a*x", "v0*b"),
    ];
    RingPresentation::new("Ext over A(1)", gens, rels).expect("well-formed")
}

/// The `E_1` page of the rho-Bockstein spectral sequence: complex-point
/// Ext with a polynomial `rho` adjoined.
pub fn bockstein_e1(complex: &RingPresentation) -> RingPresentation {
    complex.adjoin("rho", TriDegree::new(-1, 0, -1)).expect("rho is new")
}

/// A tridegree where computed and expected dimensions differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub tridegree: TriDegree,
    pub expected: usize,
    pub computed: usize,
}

/// Compare a presentation with computed dimensions; empty means agreement.
pub fn compare(p: &RingPresentation, computed: &BTreeMap<TriDegree, usize>) -> Result<Vec<Mismatch>, OracleError> {
    let mut out = Vec::new();
    for (&d, &c) in computed {
        let e = p.dim(d)?;
        if e != c {
            out.push(Mismatch { tridegree: d, expected: e, computed: c });
        }
    }
    Ok(out)
}

/// Number of normal-form monomials in the tridegree of `v_i(j) v_k(l)`.
/// The degree-uniqueness lemmas say it is one.
pub fn uniqueness_count(p: &RingPresentation, i: u32, j: u32, k: u32, l: u32) -> Result<usize, OracleError> {
    p.dim(v_degree(i, j as i64) + v_degree(k, l as i64))
}

pub fn uniqueness_check(p: &RingPresentation, i: u32, j: u32, k: u32, l: u32) -> Result<bool, OracleError> {
    Ok(uniqueness_count(p, i, j, k, l)? == 1)
}

/// What the collapse checker needs to know about computed Ext.
pub trait ExtData {
    fn dim(&mut self, d: TriDegree) -> Result<usize, OracleError>;
    /// Rank of `rho^k : Ext(d) -> Ext(d - k(1,0,1))`.
    fn rho_rank(&mut self, d: TriDegree, k: u32) -> Result<usize, OracleError>;
}

/// A possible Adams differential on an algebra generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PossibleDifferential {
    pub generator: String,
    pub r: i32,
    pub source: TriDegree,
    pub target: TriDegree,
    /// Dimension of the subspace of the target group a differential could hit.
    pub room: usize,
}

/// Sparseness check for an Adams spectral sequence with `E_2` given by the
/// computed Ext.
///
/// An Adams `d_r` goes `(stem, s, u) -> (stem - 1, s + r, u)` and is a
/// derivation, so the spectral sequence collapses once no algebra generator
/// can support one: then `d_2` vanishes, `E_3 = E_2`, and so on. When the
/// complex-point spectral sequence collapses (`rho_divisible`), targets must
/// also reduce to zero mod rho, i.e. lie in the image of rho, and since
/// `d_r` is rho-linear, a generator killed by `rho^m` can only hit classes
/// killed by `rho^m`. The room left in each target is
/// `dim(im rho ∩ ker rho^m)`. Every generator and page with nonzero room
/// inside the window is listed; an empty list certifies collapse there.
pub fn collapse_check(
    data: &mut dyn ExtData,
    generators: &[(String, TriDegree)],
    window: &ExtWindow,
    rho_divisible: bool,
) -> Result<Vec<PossibleDifferential>, OracleError> {
    let mut out = Vec::new();
    let step = TriDegree::new(1, 0, 1);
    for (name, g) in generators {
        if data.dim(*g)? == 0 {
            continue;
        }
        let torsion = if rho_divisible { rho_killing_power(data, *g, window)? } else { None };
        for r in 2..=(window.s.hi - g.s).max(1) {
            let target = TriDegree::new(g.stem - 1, g.s + r, g.u);
            if !window.contains(&target) {
                continue;
            }
            let dim = data.dim(target)?;
            if dim == 0 {
                continue;
            }
            let room = if rho_divisible {
                let above = target + step;
                let image = data.rho_rank(above, 1)?;
                match torsion {
                    Some(m) if image > 0 => image - data.rho_rank(above, m + 1)?,
                    _ => image,
                }
            } else {
                dim
            };
            if room > 0 {
                out.push(PossibleDifferential { generator: name.clone(), r, source: *g, target, room });
            }
        }
    }
    Ok(out)
}

/// Least `m` with `rho^m` zero on `Ext(g)`, searched while the weight stays
/// in the window.
fn rho_killing_power(data: &mut dyn ExtData, g: TriDegree, window: &ExtWindow) -> Result<Option<u32>, OracleError> {
    let kmax = (g.u - window.weights.lo).max(0) as u32;
    for k in 1..=kmax {
        if data.rho_rank(g, k)? == 0 {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
