//! Ext through a minimal resolution over the dual ring.
//!
//! `D = Hom_M2(Gamma, M2)` (left linear maps) is an `M2`-ring with basis
//! `a m*` over `F2`, where `(a m*)(g) = coeff_m(g) a`. With the coproduct
//! `psi(g) = sum c l (x) r` the product is
//!
//! ```text
//! (f * g)(q) = sum c g(l eta_R(f(r)))
//! ```
//!
//! and `M2` is a right `D`-module by `a . f = f(eta_R(a))`. Right comodules
//! over `Gamma` are right `D`-modules, so `Ext_D(M2, M2)` is the cobar Ext.
//! Gradings here are cohomological: `a m*` with `a = tau^i rho^j` sits in
//! `(T_m + j, U_m + i + j)` where `(T_m, U_m)` is the degree of `m`.
//!
//! Generators of the minimal resolution satisfy `y <= x/2`: they are dual
//! to Ext over `D/(tau, rho)` with coefficients in `F2`, computed by a cobar
//! complex whose letters all satisfy `2u <= t`. Only those bidegrees are
//! processed, and the Hom complex in internal `(t, u)` only sees generators
//! with `x <= 2(t - u)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebroid::{Algebroid, AlgebroidSpec};
use crate::ext_engine::{ChainModel, ExtError, SliceData};
use crate::f2_linalg::sparse::{normalize, SparseMatrix};
use crate::f2_linalg::{rank_kernel_image, BitVec, F2Matrix, SubspaceBasis};
use crate::filtered::FilteredComplex;
use crate::ground::M2Monomial;

/// Terms `c n*` of an element of `D`.
pub type DualTerms = Vec<(M2Monomial, u8)>;

/// Structure constants of `D`.
pub struct DualAlgebra {
    alg: Arc<Algebroid>,
    period: u32,
    /// `table[r][p][m] = (tau^r p*) * m*`.
    table: Vec<Vec<Vec<DualTerms>>>,
}

impl DualAlgebra {
    pub fn new(alg: Arc<Algebroid>) -> Self {
        let n = alg.len();
        let period = alg.right_unit_period();
        let mut table = vec![vec![vec![DualTerms::new(); n]; n]; period as usize];
        for q in 0..n as u8 {
            for &(c, l, r) in alg.coproduct(q) {
                for tr in 0..period {
                    for (e, m) in alg.right_mul(l, M2Monomial::new(tr, 0)) {
                        table[tr as usize][r as usize][m as usize].push((c.mul(e), q));
                    }
                }
            }
        }
        for v in table.iter_mut().flatten().flatten() {
            crate::algebroid::normalize_terms(v);
        }
        DualAlgebra { alg, period, table }
    }

    pub fn algebroid(&self) -> &Arc<Algebroid> {
        &self.alg
    }

    /// `(a p*) * m*`.
    pub fn product(&self, a: M2Monomial, p: u8, m: u8) -> impl Iterator<Item = (M2Monomial, u8)> + '_ {
        let killed = self.alg.spec().rho_killed && a.rho_exp > 0;
        let r = a.tau_exp % self.period;
        let lead = M2Monomial::new(a.tau_exp - r, a.rho_exp);
        let terms: &[(M2Monomial, u8)] = if killed { &[] } else { &self.table[r as usize][p as usize][m as usize] };
        terms.iter().map(move |&(c, n)| (lead.mul(c), n))
    }

    /// Product of two general elements.
    pub fn multiply(&self, f: &[(M2Monomial, u8)], g: &[(M2Monomial, u8)]) -> DualTerms {
        let mut out = Vec::new();
        for &(a, p) in f {
            for &(b, m) in g {
                out.extend(self.product(a, p, m).map(|(c, n)| (b.mul(c), n)));
            }
        }
        crate::algebroid::normalize_terms(&mut out);
        out
    }

    /// `a . f = f(eta_R(a))` as a list of monomials (an `M2` element).
    pub fn act(&self, a: M2Monomial, f: &[(M2Monomial, u8)]) -> Vec<M2Monomial> {
        let eta = self.alg.right_unit_terms(a);
        let mut out = Vec::new();
        for &(c, p) in f {
            for &(e, q) in &eta {
                if q == p {
                    out.push(e.mul(c));
                }
            }
        }
        out.sort();
        let mut dedup: Vec<M2Monomial> = Vec::new();
        for m in out {
            if dedup.last() == Some(&m) {
                dedup.pop();
            } else {
                dedup.push(m);
            }
        }
        dedup
    }

    /// Cohomological degree of `a m*`.
    pub fn degree(&self, a: M2Monomial, m: u8) -> (i32, i32) {
        let b = self.alg.bidegree(m);
        (b.t + a.rho_exp as i32, b.u + (a.tau_exp + a.rho_exp) as i32)
    }
}

/// A generator of `F_s` with `d(g) = sum g_k (a p*)` over `F_{s-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub x: i32,
    pub y: i32,
    pub d: Vec<(u32, M2Monomial, u8)>,
}

/// A minimal free resolution of `M2` over `D`, grown on demand.
pub struct Resolution {
    dual: DualAlgebra,
    gens: Vec<Vec<Generator>>,
    /// Stage `s` (the kernel of `d_s`) is done through `x = done[s]`.
    done: Vec<i32>,
    /// `rev[s][g]`: generators of `F_{s+1}` whose differential involves `g`.
    rev: Vec<Vec<Vec<(u32, M2Monomial, u8)>>>,
    rev_valid: bool,
}

type Cell = (u32, M2Monomial, u8);

impl Resolution {
    pub fn new(spec: AlgebroidSpec) -> Result<Self, ExtError> {
        let dual = DualAlgebra::new(Algebroid::shared(spec)?);
        Ok(Resolution {
            dual,
            gens: vec![vec![Generator { x: 0, y: 0, d: Vec::new() }]],
            done: Vec::new(),
            rev: Vec::new(),
            rev_valid: false,
        })
    }

    pub fn spec(&self) -> AlgebroidSpec {
        self.dual.alg.spec()
    }

    pub fn dual(&self) -> &DualAlgebra {
        &self.dual
    }

    pub fn generators(&self, s: usize) -> &[Generator] {
        self.gens.get(s).map_or(&[], Vec::as_slice)
    }

    /// Highest `s` and `x` such that `F_0..F_s` are known through `x`.
    pub fn extent(&self) -> (usize, i32) {
        let x = self.done.iter().copied().min().unwrap_or(-1);
        (self.done.len(), x)
    }

    /// Makes generators of `F_0 .. F_{stages}` known through `x <= max_x`.
    pub fn extend(&mut self, stages: usize, max_x: i32) {
        for s in 0..stages {
            if self.gens.len() <= s + 1 {
                self.gens.push(Vec::new());
            }
            if self.done.len() <= s {
                self.done.push(-1);
            }
            let from = self.done[s] + 1;
            for x in from..=max_x {
                for y in 0..=x / 2 {
                    self.step(s, x, y);
                }
            }
            if max_x > self.done[s] {
                self.done[s] = max_x;
                self.rev_valid = false;
            }
        }
    }

    /// `F2`-basis of `F_s` in `(x, y)`: `(g, a, m)` for `g a m*`.
    fn basis(&self, s: usize, x: i32, y: i32) -> Vec<Cell> {
        let alg = &self.dual.alg;
        let killed = alg.spec().rho_killed;
        let mut out = Vec::new();
        for (gi, g) in self.generators(s).iter().enumerate() {
            if g.x > x || g.y > y {
                continue;
            }
            for m in 0..alg.len() as u8 {
                let b = alg.bidegree(m);
                let j = x - g.x - b.t;
                let i = y - g.y - b.u - j;
                if j >= 0 && i >= 0 && !(killed && j > 0) {
                    out.push((gi as u32, M2Monomial::new(i as u32, j as u32), m));
                }
            }
        }
        out
    }

    /// `d(g a m*)` in `F_{s-1}`, unreduced.
    fn differential(&self, s: usize, (g, a, m): Cell, out: &mut Vec<Cell>) {
        for &(k, c, p) in &self.gens[s][g as usize].d {
            for (e, n) in self.dual.product(c, p, m) {
                out.push((k, a.mul(e), n));
            }
        }
    }

    fn column(&self, s: usize, cell: Cell, index: &HashMap<(u32, u8), usize>, rows: usize) -> BitVec {
        let mut terms = Vec::new();
        self.differential(s, cell, &mut terms);
        let mut v = BitVec::zeros(rows);
        for (k, _, n) in terms {
            v.flip(*index.get(&(k, n)).expect("differential stays in degree"));
        }
        v
    }

    fn step(&mut self, s: usize, x: i32, y: i32) {
        let source = self.basis(s, x, y);
        if source.is_empty() {
            return;
        }
        let kernel: Vec<BitVec> = if s == 0 {
            // the augmentation sends a 1* to a and kills the rest
            (0..source.len()).filter(|&i| source[i].2 != 0).map(|i| BitVec::unit(source.len(), i)).collect()
        } else {
            let target = self.basis(s - 1, x, y);
            let index: HashMap<(u32, u8), usize> =
                target.iter().enumerate().map(|(i, &(g, _, m))| ((g, m), i)).collect();
            let cols: Vec<BitVec> = source.iter().map(|&c| self.column(s, c, &index, target.len())).collect();
            let m = F2Matrix::from_columns(target.len(), &cols).expect("consistent sizes");
            rank_kernel_image(&m).kernel.vectors().to_vec()
        };
        if kernel.is_empty() {
            return;
        }
        let index: HashMap<(u32, u8), usize> = source.iter().enumerate().map(|(i, &(g, _, m))| ((g, m), i)).collect();
        let above = self.basis(s + 1, x, y);
        let mut image = SubspaceBasis::from_vectors(
            source.len(),
            above.iter().map(|&c| self.column(s + 1, c, &index, source.len())),
        );
        for v in kernel {
            if image.insert(v.clone()) {
                let d = v.ones().map(|i| source[i]).collect();
                self.gens[s + 1].push(Generator { x, y, d });
            }
        }
    }

    fn rebuild_rev(&mut self) {
        if self.rev_valid {
            return;
        }
        self.rev = (0..self.gens.len())
            .map(|s| {
                let mut r = vec![Vec::new(); self.gens[s].len()];
                if let Some(up) = self.gens.get(s + 1) {
                    for (gi, g) in up.iter().enumerate() {
                        for &(k, a, p) in &g.d {
                            r[k as usize].push((gi as u32, a, p));
                        }
                    }
                }
                r
            })
            .collect();
        self.rev_valid = true;
    }

    /// The Hom complex `Hom_D(F, M2)` in internal `(t, u)`, degrees
    /// `0..=top+1`. The resolution must be extended far enough.
    pub fn hom_slice(&mut self, t: i32, u: i32, top: usize) -> HomSlice {
        self.rebuild_rev();
        let killed = self.spec().rho_killed;
        let mut bases = Vec::with_capacity(top + 2);
        for s in 0..=top + 1 {
            let mut b: Vec<(u32, M2Monomial)> = Vec::new();
            for (gi, g) in self.generators(s).iter().enumerate() {
                let j = g.x - t;
                let i = g.y - u - j;
                if j >= 0 && i >= 0 && !(killed && j > 0) {
                    b.push((gi as u32, M2Monomial::new(i as u32, j as u32)));
                }
            }
            b.sort_by_key(|&(g, a)| (a.rho_exp, g));
            bases.push(b);
        }
        let index: Vec<HashMap<u32, u32>> = bases
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, &(g, _))| (g, i as u32)).collect())
            .collect();
        let alg = self.dual.alg.clone();
        let mut matrices = Vec::with_capacity(top + 1);
        for s in 0..=top {
            let mut cols = Vec::with_capacity(bases[s].len());
            for &(g, a) in &bases[s] {
                let eta = alg.right_unit_terms(a);
                let mut col = Vec::new();
                for &(g2, c, p) in &self.rev[s][g as usize] {
                    for &(e, q) in &eta {
                        if q == p {
                            let row = index[s + 1][&g2];
                            debug_assert_eq!(bases[s + 1][row as usize].1, e.mul(c));
                            col.push(row);
                        }
                    }
                }
                normalize(&mut col);
                cols.push(col);
            }
            matrices.push(SparseMatrix::from_columns(bases[s + 1].len(), cols));
        }
        HomSlice { t, u, bases, index, matrices }
    }
}

/// One `(t, u)` slice of the Hom complex. Basis element `(g, a)` is the
/// map sending the generator `g` to `a` and the others to zero.
#[derive(Clone, Debug)]
pub struct HomSlice {
    pub t: i32,
    pub u: i32,
    bases: Vec<Vec<(u32, M2Monomial)>>,
    index: Vec<HashMap<u32, u32>>,
    matrices: Vec<SparseMatrix>,
}

impl HomSlice {
    pub fn basis(&self, s: usize) -> &[(u32, M2Monomial)] {
        &self.bases[s]
    }

    pub fn dim(&self, s: usize) -> usize {
        self.bases.get(s).map_or(0, Vec::len)
    }

    pub fn matrix(&self, s: usize) -> &SparseMatrix {
        &self.matrices[s]
    }
}

impl SliceData for HomSlice {
    fn filtered(&self) -> FilteredComplex {
        FilteredComplex {
            levels: self.bases.iter().map(|b| b.iter().map(|(_, a)| a.rho_exp).collect()).collect(),
            d: self.matrices.clone(),
        }
    }

    fn key(&self, s: usize, i: u32) -> u128 {
        self.bases[s][i as usize].0 as u128
    }

    fn find(&self, s: usize, key: u128) -> Option<u32> {
        self.index.get(s).and_then(|m| m.get(&(key as u32))).copied()
    }
}

/// The resolution as a chain model.
pub struct ResolutionModel {
    res: Resolution,
    max_x: i32,
}

impl ResolutionModel {
    pub const DEFAULT_MAX_X: i32 = 96;

    pub fn new(spec: AlgebroidSpec, max_x: i32) -> Result<Self, ExtError> {
        Ok(ResolutionModel { res: Resolution::new(spec)?, max_x })
    }

    pub fn resolution(&self) -> &Resolution {
        &self.res
    }
}

impl ChainModel for ResolutionModel {
    type Slice = HomSlice;

    fn spec(&self) -> AlgebroidSpec {
        self.res.spec()
    }

    fn slice(&mut self, t: i32, u: i32, top: usize) -> Result<HomSlice, ExtError> {
        let need = 2 * (t - u).max(0);
        if need > self.max_x {
            return Err(ExtError::ResourceLimit {
                t,
                u,
                s: top + 1,
                size: need as u64,
                limit: self.max_x as u64,
            });
        }
        let (stages, x) = self.res.extent();
        if stages < top + 1 || x < need {
            self.res.extend((top + 1).max(stages), need.max(x));
        }
        Ok(self.res.hom_slice(t, u, top))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext_engine::{ExtComputer, ExtWindow, Span};
    use crate::ext_engine::CobarModel;
    use proptest::prelude::*;

    fn dual(spec: AlgebroidSpec) -> DualAlgebra {
        DualAlgebra::new(Algebroid::shared(spec).unwrap())
    }

    fn element(d: &DualAlgebra, raw: &[(u32, u32, u8)]) -> DualTerms {
        let n = d.alg.len() as u8;
        let mut v: DualTerms = raw.iter().map(|&(i, j, m)| (M2Monomial::new(i, j), m % n)).collect();
        crate::algebroid::normalize_terms(&mut v);
        v
    }

    #[test]
    fn unit_of_dual() {
        for spec in [AlgebroidSpec::e(1), AlgebroidSpec::a(1), AlgebroidSpec::a(1).complex()] {
            let d = dual(spec);
            let one = vec![(M2Monomial::ONE, 0u8)];
            for m in 0..d.alg.len() as u8 {
                let f = vec![(M2Monomial::new(3, u32::from(!spec.rho_killed)), m)];
                assert_eq!(d.multiply(&one, &f), f);
                assert_eq!(d.multiply(&f, &one), f);
            }
        }
    }

    fn raw_strategy() -> impl Strategy<Value = Vec<(u32, u32, u8)>> {
        prop::collection::vec((0u32..6, 0u32..3, 0u8..32), 1..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dual_is_associative(f in raw_strategy(), g in raw_strategy(), h in raw_strategy(), which in 0usize..3) {
            let spec = [AlgebroidSpec::e(1), AlgebroidSpec::a(1), AlgebroidSpec::e(2)][which];
            let d = dual(spec);
            let (f, g, h) = (element(&d, &f), element(&d, &g), element(&d, &h));
            prop_assert_eq!(d.multiply(&d.multiply(&f, &g), &h), d.multiply(&f, &d.multiply(&g, &h)));
        }

        #[test]
        fn ground_ring_is_a_module(a in (0u32..9, 0u32..3), f in raw_strategy(), g in raw_strategy(), which in 0usize..2) {
            let spec = [AlgebroidSpec::e(1), AlgebroidSpec::a(1)][which];
            let d = dual(spec);
            let (f, g) = (element(&d, &f), element(&d, &g));
            let a = M2Monomial::new(a.0, a.1);
            let left: Vec<M2Monomial> = d.act(a, &d.multiply(&f, &g));
            let mut right = Vec::new();
            for b in d.act(a, &f) {
                right.extend(d.act(b, &g));
            }
            right.sort();
            let mut norm: Vec<M2Monomial> = Vec::new();
            for m in right {
                if norm.last() == Some(&m) { norm.pop(); } else { norm.push(m); }
            }
            prop_assert_eq!(left, norm);
        }
    }

    #[test]
    fn resolution_squares_to_zero() {
        let mut res = Resolution::new(AlgebroidSpec::a(1)).unwrap();
        res.extend(4, 14);
        for s in 2..=4 {
            for g in res.generators(s).to_vec() {
                // d(d(g)) = sum over terms of d(g_k a p*)
                let mut twice = Vec::new();
                for &cell in &g.d {
                    res.differential(s - 1, cell, &mut twice);
                }
                let mut keyed: Vec<(u32, u8, M2Monomial)> = twice.iter().map(|&(k, a, n)| (k, n, a)).collect();
                crate::algebroid::normalize_terms(&mut keyed);
                assert!(keyed.is_empty(), "d^2 != 0 on a generator of F_{s}");
            }
        }
    }

    #[test]
    fn generators_stay_below_half_slope() {
        // process every y, not just y <= x/2, and confirm nothing appears above
        let mut res = Resolution::new(AlgebroidSpec::a(1)).unwrap();
        for s in 0..3 {
            res.gens.push(Vec::new());
            for x in 0..=10 {
                for y in 0..=12 {
                    res.step(s, x, y);
                }
            }
        }
        for s in 0..=3 {
            assert!(res.generators(s).iter().all(|g| 2 * g.y <= g.x), "F_{s}");
        }
        let first: Vec<(i32, i32)> = res.generators(1).iter().map(|g| (g.x, g.y)).collect();
        // v0, eta, then tau_1-type v1 and so on; the first two are forced
        assert_eq!(&first[..2], &[(1, 0), (2, 1)]);
    }

    #[test]
    fn agrees_with_cobar() {
        for (spec, stems, s, weights) in [
            (AlgebroidSpec::e(1), Span::new(0, 8), Span::new(0, 5), Span::new(-6, 5)),
            (AlgebroidSpec::a(1), Span::new(0, 6), Span::new(0, 3), Span::new(-4, 4)),
            (AlgebroidSpec::e(2), Span::new(0, 6), Span::new(0, 3), Span::new(-4, 4)),
            (AlgebroidSpec::a(1).complex(), Span::new(0, 8), Span::new(0, 4), Span::new(0, 5)),
        ] {
            let w = ExtWindow::new(spec, stems, s, weights).unwrap();
            let mut cobar = ExtComputer::new(CobarModel::new(spec, 2_000_000).unwrap());
            let mut res = ExtComputer::new(ResolutionModel::new(spec, 64).unwrap());
            let a = cobar.dims(&w).unwrap();
            let b = res.dims(&w).unwrap();
            for (d, n) in &a {
                assert_eq!(b[d], *n, "{spec} at {d}");
            }
        }
    }
}
