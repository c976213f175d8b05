//! Gradings and the ground ring `M2 = F2[tau, rho]`.
//!
//! Everything is stored in homological convention: `tau` sits in bidegree
//! `(0,-1)` and `rho` in `(-1,-1)`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Internal bidegree `(t, u)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BiDegree {
    pub t: i32,
    pub u: i32,
}

impl BiDegree {
    pub const ZERO: BiDegree = BiDegree { t: 0, u: 0 };
    pub const TAU: BiDegree = BiDegree { t: 0, u: -1 };
    pub const RHO: BiDegree = BiDegree { t: -1, u: -1 };

    pub const fn new(t: i32, u: i32) -> Self {
        BiDegree { t, u }
    }
}

impl Add for BiDegree {
    type Output = BiDegree;
    fn add(self, o: BiDegree) -> BiDegree {
        BiDegree::new(self.t + o.t, self.u + o.u)
    }
}

impl Sub for BiDegree {
    type Output = BiDegree;
    fn sub(self, o: BiDegree) -> BiDegree {
        BiDegree::new(self.t - o.t, self.u - o.u)
    }
}

impl Neg for BiDegree {
    type Output = BiDegree;
    fn neg(self) -> BiDegree {
        BiDegree::new(-self.t, -self.u)
    }
}

impl fmt::Display for BiDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.t, self.u)
    }
}

/// Adams grading `(stem, s, u)` with `stem = t - s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriDegree {
    pub stem: i32,
    pub s: i32,
    pub u: i32,
}

impl TriDegree {
    pub const fn new(stem: i32, s: i32, u: i32) -> Self {
        TriDegree { stem, s, u }
    }

    pub fn from_internal(s: i32, b: BiDegree) -> Self {
        TriDegree::new(b.t - s, s, b.u)
    }

    pub fn t(&self) -> i32 {
        self.stem + self.s
    }

    pub fn internal(&self) -> BiDegree {
        BiDegree::new(self.t(), self.u)
    }
}

impl Add for TriDegree {
    type Output = TriDegree;
    fn add(self, o: TriDegree) -> TriDegree {
        TriDegree::new(self.stem + o.stem, self.s + o.s, self.u + o.u)
    }
}

impl Sub for TriDegree {
    type Output = TriDegree;
    fn sub(self, o: TriDegree) -> TriDegree {
        TriDegree::new(self.stem - o.stem, self.s - o.s, self.u - o.u)
    }
}

impl fmt::Display for TriDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.stem, self.s, self.u)
    }
}

/// `tau^tau_exp * rho^rho_exp`.
///
/// Ordered by rho exponent first, which is the filtration order used
/// throughout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct M2Monomial {
    pub tau_exp: u32,
    pub rho_exp: u32,
}

impl Ord for M2Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rho_exp, self.tau_exp).cmp(&(other.rho_exp, other.tau_exp))
    }
}

impl PartialOrd for M2Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl M2Monomial {
    pub const ONE: M2Monomial = M2Monomial { tau_exp: 0, rho_exp: 0 };
    pub const TAU: M2Monomial = M2Monomial { tau_exp: 1, rho_exp: 0 };
    pub const RHO: M2Monomial = M2Monomial { tau_exp: 0, rho_exp: 1 };

    pub const fn new(tau_exp: u32, rho_exp: u32) -> Self {
        M2Monomial { tau_exp, rho_exp }
    }

    pub fn is_one(&self) -> bool {
        self.tau_exp == 0 && self.rho_exp == 0
    }

    pub fn bidegree(&self) -> BiDegree {
        let a = self.tau_exp as i32;
        let c = self.rho_exp as i32;
        BiDegree::new(-c, -a - c)
    }

    pub fn checked_mul(self, o: M2Monomial) -> Option<M2Monomial> {
        Some(M2Monomial {
            tau_exp: self.tau_exp.checked_add(o.tau_exp)?,
            rho_exp: self.rho_exp.checked_add(o.rho_exp)?,
        })
    }

    /// Product of monomials. Panics on exponent overflow.
    pub fn mul(self, o: M2Monomial) -> M2Monomial {
        self.checked_mul(o).expect("M2 exponent overflow")
    }

    /// `self / o` when `o` divides `self`.
    pub fn div(self, o: M2Monomial) -> Option<M2Monomial> {
        Some(M2Monomial {
            tau_exp: self.tau_exp.checked_sub(o.tau_exp)?,
            rho_exp: self.rho_exp.checked_sub(o.rho_exp)?,
        })
    }

    /// The unique monomial of bidegree `b`, if any.
    pub fn of_bidegree(b: BiDegree) -> Option<M2Monomial> {
        let c = -b.t;
        let a = -b.u - c;
        (c >= 0 && a >= 0).then(|| M2Monomial::new(a as u32, c as u32))
    }
}

impl fmt::Display for M2Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.tau_exp {
            0 => {}
            1 => parts.push("tau".to_string()),
            k => parts.push(format!("tau^{k}")),
        }
        match self.rho_exp {
            0 => {}
            1 => parts.push("rho".to_string()),
            k => parts.push(format!("rho^{k}")),
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// An element of `M2`, as the set of monomials with coefficient one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct M2Element {
    terms: BTreeSet<M2Monomial>,
}

impl M2Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        M2Monomial::ONE.into()
    }

    pub fn tau() -> Self {
        M2Monomial::TAU.into()
    }

    pub fn rho() -> Self {
        M2Monomial::RHO.into()
    }

    pub fn from_monomials<I: IntoIterator<Item = M2Monomial>>(it: I) -> Self {
        let mut e = Self::zero();
        for m in it {
            e.toggle(m);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &M2Monomial> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, m: &M2Monomial) -> bool {
        self.terms.contains(m)
    }

    /// Adds a single monomial (symmetric difference).
    pub fn toggle(&mut self, m: M2Monomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add_assign(&mut self, o: &M2Element) {
        for m in &o.terms {
            self.toggle(*m);
        }
    }

    pub fn add(&self, o: &M2Element) -> M2Element {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    /// Bidegree if the element is a nonzero homogeneous element.
    pub fn bidegree(&self) -> Option<BiDegree> {
        let mut it = self.terms.iter().map(M2Monomial::bidegree);
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }
}

impl From<M2Monomial> for M2Element {
    fn from(m: M2Monomial) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(m);
        M2Element { terms }
    }
}

impl fmt::Display for M2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Ring product in `F2[tau, rho]`.
pub fn m2_mul(a: &M2Element, b: &M2Element) -> M2Element {
    let mut out = M2Element::zero();
    for x in a.terms() {
        for y in b.terms() {
            out.toggle(x.mul(*y));
        }
    }
    out
}

/// Monomial basis of `M2` in bidegree `b` (length at most one).
pub fn m2_basis(b: BiDegree) -> Vec<M2Monomial> {
    M2Monomial::of_bidegree(b).into_iter().collect()
}

/// Smallest rho exponent among the terms, `None` standing for infinity.
pub fn rho_valuation(a: &M2Element) -> Option<u32> {
    a.terms().map(|m| m.rho_exp).min()
}
