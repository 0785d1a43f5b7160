//! Exact intersection theory on `F = P(Sym^2 I*) x_G P(Sym^(d-4) I*)` over
//! the Grassmannian `G` of lines in P^3.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChowError {
    #[error("degree {0} is below 4")]
    DegreeTooSmall(u32),
}

/// Schubert basis of the Chow ring of G(2,4), in this order.
pub const SCHUBERT_NAMES: [&str; 6] = ["1", "s1", "s2", "s11", "s21", "s22"];
const SCHUBERT_DEGREE: [usize; 6] = [0, 1, 2, 2, 3, 4];

// index products of basis elements: (a, b) -> list of (index, coefficient)
fn basis_product(a: usize, b: usize) -> &'static [(usize, i64)] {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 0) => &[(0, 1)],
        (0, 1) => &[(1, 1)],
        (0, 2) => &[(2, 1)],
        (0, 3) => &[(3, 1)],
        (0, 4) => &[(4, 1)],
        (0, 5) => &[(5, 1)],
        (1, 1) => &[(2, 1), (3, 1)],
        (1, 2) | (1, 3) => &[(4, 1)],
        (1, 4) => &[(5, 1)],
        (2, 2) | (3, 3) => &[(5, 1)],
        _ => &[],
    }
}

/// Integer combination of the Schubert basis of G(2,4).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SchubertClass(pub [BigInt; 6]);

impl SchubertClass {
    pub fn zero() -> Self {
        SchubertClass::default()
    }

    pub fn basis(i: usize) -> Self {
        let mut c = Self::zero();
        c.0[i] = BigInt::one();
        c
    }

    pub fn one() -> Self {
        Self::basis(0)
    }

    pub fn from_ints(c: [i64; 6]) -> Self {
        SchubertClass(c.map(BigInt::from))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        SchubertClass(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        SchubertClass(std::array::from_fn(|i| &self.0[i] * k))
    }

    /// Part of degree `k`.
    pub fn part(&self, k: usize) -> Self {
        SchubertClass(std::array::from_fn(|i| if SCHUBERT_DEGREE[i] == k { self.0[i].clone() } else { BigInt::zero() }))
    }

    /// Degree of the coefficient of `s22`.
    pub fn integral(&self) -> BigInt {
        self.0[5].clone()
    }
}

impl fmt::Debug for SchubertClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = (0..6)
            .filter(|&i| !self.0[i].is_zero())
            .map(|i| format!("{}*{}", self.0[i], SCHUBERT_NAMES[i]))
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

pub fn schubert_mul(a: &SchubertClass, b: &SchubertClass) -> SchubertClass {
    let mut out = SchubertClass::zero();
    for i in 0..6 {
        if a.0[i].is_zero() {
            continue;
        }
        for j in 0..6 {
            if b.0[j].is_zero() {
                continue;
            }
            for &(k, c) in basis_product(i, j) {
                out.0[k] += &a.0[i] * &b.0[j] * c;
            }
        }
    }
    out
}

/// Total Chern class of a bundle on G(2,4), by degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernVector {
    pub bundle: String,
    pub classes: Vec<SchubertClass>,
}

impl ChernVector {
    pub fn rank(&self) -> usize {
        self.classes.len() - 1
    }

    /// `c_i`, zero beyond the rank.
    pub fn c(&self, i: usize) -> SchubertClass {
        self.classes.get(i).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> SchubertClass {
        self.classes.iter().fold(SchubertClass::zero(), |acc, c| acc.add(c))
    }
}

/// `c(Sym^k I*)`. The roots `i a + (k - i) b` pair up into factors
/// `1 + k s1 + i(k-i) s1^2 + (k-2i)^2 s11`, plus `1 + (k/2) s1` in the middle
/// when `k` is even.
pub fn chern_sym(k: usize) -> ChernVector {
    let s1 = SchubertClass::basis(1);
    let s11 = SchubertClass::basis(3);
    let s1sq = schubert_mul(&s1, &s1);
    let mut total = SchubertClass::one();
    for i in 0..=k / 2 {
        let j = k - i;
        let factor = if i == j {
            SchubertClass::one().add(&s1.scale(&BigInt::from(i)))
        } else {
            let ii = BigInt::from(i);
            let kk = BigInt::from(k);
            let diff = BigInt::from(j as i64 - i as i64);
            SchubertClass::one()
                .add(&s1.scale(&kk))
                .add(&s1sq.scale(&(&ii * BigInt::from(j))))
                .add(&s11.scale(&(&diff * &diff)))
        };
        total = schubert_mul(&total, &factor);
    }
    let rank = k + 1;
    let classes = (0..=rank.min(4)).map(|deg| total.part(deg)).chain((5..=rank).map(|_| SchubertClass::zero())).collect();
    ChernVector {
        bundle: format!("Sym^{k} I*"),
        classes,
    }
}

/// `sigma * zL^i * zM^j`, indexing a monomial of the Chow ring of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub schubert: usize,
    pub zl: usize,
    pub zm: usize,
}

impl Monomial {
    pub fn degree(&self) -> usize {
        SCHUBERT_DEGREE[self.schubert] + self.zl + self.zm
    }

    pub fn name(&self) -> String {
        format!("{}*zL^{}*zM^{}", SCHUBERT_NAMES[self.schubert], self.zl, self.zm)
    }
}

/// An element of the Chow ring of `F` for a given `d`; [`reduce`] brings it
/// to the normal form with `zL^i`, `i <= 2`, and `zM^j`, `j <= d - 4`.
#[derive(Clone, PartialEq, Eq)]
pub struct ChowClass {
    degree_d: u32,
    terms: BTreeMap<Monomial, BigInt>,
}

impl fmt::Debug for ChowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(m, c)| (m.name(), c.to_string()))).finish()
    }
}

/// The ring data for one `d`: Chern classes of the two fibre bundles.
#[derive(Debug, Clone)]
pub struct ChowRing {
    pub d: u32,
    sym2: ChernVector,
    symh: ChernVector,
}

impl ChowRing {
    pub fn new(d: u32) -> Result<Self, ChowError> {
        if d < 4 {
            return Err(ChowError::DegreeTooSmall(d));
        }
        Ok(ChowRing {
            d,
            sym2: chern_sym(2),
            symh: chern_sym(d as usize - 4),
        })
    }

    /// Fibre dimension of the second factor.
    fn m_top(&self) -> usize {
        self.d as usize - 4
    }

    pub fn dim(&self) -> usize {
        self.d as usize + 2
    }

    pub fn zero(&self) -> ChowClass {
        ChowClass {
            degree_d: self.d,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(&self, m: Monomial, c: impl Into<BigInt>) -> ChowClass {
        let mut out = self.zero();
        out.add_term(m, c.into());
        out
    }

    pub fn pullback(&self, s: &SchubertClass) -> ChowClass {
        let mut out = self.zero();
        for (i, c) in s.0.iter().enumerate() {
            out.add_term(Monomial { schubert: i, zl: 0, zm: 0 }, c.clone());
        }
        out
    }

    pub fn zeta_l(&self) -> ChowClass {
        self.monomial(Monomial { schubert: 0, zl: 1, zm: 0 }, 1)
    }

    pub fn zeta_m(&self) -> ChowClass {
        if self.d == 4 {
            return self.zero();
        }
        self.monomial(Monomial { schubert: 0, zl: 0, zm: 1 }, 1)
    }

    /// Normal form under the Schubert table and the two Grothendieck
    /// relations `sum_i zL^(3-i) c_i(Sym^2 I*) = 0` and
    /// `sum_i zM^(d-3-i) c_i(Sym^(d-4) I*) = 0`.
    pub fn reduce(&self, c: &ChowClass) -> ChowClass {
        let mut pending: Vec<(Monomial, BigInt)> = c.terms.iter().map(|(m, v)| (*m, v.clone())).collect();
        let mut out = self.zero();
        let mtop = self.m_top();
        while let Some((m, v)) = pending.pop() {
            if v.is_zero() || m.degree() > self.dim() {
                continue;
            }
            if self.d == 4 && m.zm > 0 {
                continue;
            }
            if m.zl >= 3 {
                // zL^3 = -(c1 zL^2 + c2 zL + c3)
                for i in 1..=3 {
                    let ci = self.sym2.c(i);
                    for (s, coef) in ci.0.iter().enumerate() {
                        if coef.is_zero() {
                            continue;
                        }
                        for &(k, e) in basis_product(m.schubert, s) {
                            let nm = Monomial {
                                schubert: k,
                                zl: m.zl - i,
                                zm: m.zm,
                            };
                            pending.push((nm, -(&v * coef * e)));
                        }
                    }
                }
                continue;
            }
            if self.d > 4 && m.zm > mtop {
                let r = mtop + 1;
                for i in 1..=r {
                    let ci = self.symh.c(i);
                    for (s, coef) in ci.0.iter().enumerate() {
                        if coef.is_zero() {
                            continue;
                        }
                        for &(k, e) in basis_product(m.schubert, s) {
                            let nm = Monomial {
                                schubert: k,
                                zl: m.zl,
                                zm: m.zm - i,
                            };
                            pending.push((nm, -(&v * coef * e)));
                        }
                    }
                }
                continue;
            }
            out.add_term(m, v);
        }
        out
    }

    pub fn mul(&self, a: &ChowClass, b: &ChowClass) -> ChowClass {
        let mut out = self.zero();
        for (ma, va) in &a.terms {
            for (mb, vb) in &b.terms {
                for &(k, e) in basis_product(ma.schubert, mb.schubert) {
                    let m = Monomial {
                        schubert: k,
                        zl: ma.zl + mb.zl,
                        zm: ma.zm + mb.zm,
                    };
                    out.add_term(m, va * vb * e);
                }
            }
        }
        self.reduce(&out)
    }

    pub fn pow(&self, a: &ChowClass, n: usize) -> ChowClass {
        (0..n).fold(self.monomial(Monomial { schubert: 0, zl: 0, zm: 0 }, 1), |acc, _| self.mul(&acc, a))
    }

    /// Coefficient of `s22 zL^2 zM^(d-4)` of the normal form.
    pub fn integrate(&self, c: &ChowClass) -> BigInt {
        let top = Monomial {
            schubert: 5,
            zl: 2,
            zm: self.m_top(),
        };
        self.reduce(c).terms.get(&top).cloned().unwrap_or_default()
    }

    /// Total Chern class of `R = pi* Sym^d I* / (L^-2 (x) M^-1)`, through
    /// degree `dim F`.
    pub fn chern_r(&self) -> ChowClass {
        let base = self.pullback(&chern_sym(self.d as usize).total());
        let x = self.zeta_l().scale(2).add(&self.zeta_m());
        // 1 / (1 - x) truncated at dim F
        let mut inv = self.zero();
        let mut power = self.monomial(Monomial { schubert: 0, zl: 0, zm: 0 }, 1);
        for _ in 0..=self.dim() {
            inv = inv.add(&power);
            power = self.mul(&power, &x);
        }
        self.mul(&base, &inv)
    }
}

impl ChowClass {
    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn degree_d(&self) -> u32 {
        self.degree_d
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &ChowClass) -> ChowClass {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn scale(&self, k: i64) -> ChowClass {
        let mut out = ChowClass {
            degree_d: self.degree_d,
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            out.add_term(*m, c * k);
        }
        out
    }

    /// Homogeneous part of graded degree `k`.
    pub fn part(&self, k: usize) -> ChowClass {
        ChowClass {
            degree_d: self.degree_d,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == k).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Largest graded degree of a term (0 for the zero class).
    pub fn top_degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Monomial names and coefficients, for reports.
    pub fn named_terms(&self) -> BTreeMap<String, BigInt> {
        self.terms.iter().map(|(m, c)| (m.name(), c.clone())).collect()
    }

    pub fn has_negative(&self) -> bool {
        self.terms.values().any(Signed::is_negative)
    }
}

/// `[S(Y)] = c_d(R)` in normal form.
pub fn class_of_s(d: u32) -> Result<ChowClass, ChowError> {
    let ring = ChowRing::new(d)?;
    Ok(ring.chern_r().part(d as usize))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bidegree {
    pub degree: u32,
    /// Lines of the congruence through a general point.
    pub order: BigInt,
    /// Lines of the congruence in a general plane.
    pub class: BigInt,
    pub class_of_s: ChowClass,
}

pub fn bidegree(d: u32) -> Result<Bidegree, ChowError> {
    let ring = ChowRing::new(d)?;
    let s = ring.chern_r().part(d as usize);
    let against = |i: usize| ring.integrate(&ring.mul(&s, &ring.pullback(&SchubertClass::basis(i))));
    Ok(Bidegree {
        degree: d,
        order: against(2),
        class: against(3),
        class_of_s: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(c: [i64; 6]) -> SchubertClass {
        SchubertClass::from_ints(c)
    }

    #[test]
    fn schubert_table() {
        let s = |i| SchubertClass::basis(i);
        assert_eq!(schubert_mul(&s(1), &s(1)), sc([0, 0, 1, 1, 0, 0]));
        assert!(schubert_mul(&s(2), &s(3)).is_zero());
        assert_eq!(schubert_mul(&s(2), &s(2)), s(5));
        assert_eq!(schubert_mul(&s(3), &s(3)), s(5));
        assert_eq!(schubert_mul(&s(1), &s(4)), s(5));
        let s1_4 = (0..4).fold(SchubertClass::one(), |acc, _| schubert_mul(&acc, &s(1)));
        assert_eq!(s1_4.integral(), BigInt::from(2));
    }

    #[test]
    fn symmetric_power_chern_classes() {
        assert_eq!(chern_sym(0).total(), SchubertClass::one());
        assert_eq!(chern_sym(1).total(), sc([1, 1, 0, 1, 0, 0]));
        assert_eq!(chern_sym(2).c(1), sc([0, 3, 0, 0, 0, 0]));
        assert_eq!(chern_sym(2).rank(), 3);
        // c_top(Sym^3 I*) counts lines on a cubic surface
        assert_eq!(chern_sym(3).c(4).integral(), BigInt::from(27));
    }

    #[test]
    fn relation_and_idempotence() {
        for d in [4, 5, 7] {
            let ring = ChowRing::new(d).unwrap();
            let zl3 = ring.pow(&ring.zeta_l(), 3);
            let c = chern_sym(2);
            let mut want = ring.zero();
            for (i, zl) in [(1, 2), (2, 1), (3, 0)] {
                let ci = ring.pullback(&c.c(i));
                want = want.add(&ring.mul(&ci, &ring.pow(&ring.zeta_l(), zl)).scale(-1));
            }
            assert_eq!(zl3, want);
            assert_eq!(ring.reduce(&zl3), zl3);
            let a = ring.mul(&zl3, &ring.zeta_m());
            let b = ring.mul(&ring.pow(&ring.zeta_l(), 2), &ring.mul(&ring.zeta_l(), &ring.zeta_m()));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn segre_normalization_and_push_pull() {
        for d in 4..9 {
            let ring = ChowRing::new(d).unwrap();
            let fibre = ring.mul(&ring.pow(&ring.zeta_l(), 2), &ring.pow(&ring.zeta_m(), d as usize - 4));
            for (gamma, want) in [(sc([0, 0, 0, 0, 0, 1]), 1), (sc([0, 0, 0, 0, 0, 3]), 3)] {
                let top = ring.mul(&fibre, &ring.pullback(&gamma));
                assert_eq!(ring.integrate(&top), BigInt::from(want));
            }
        }
    }

    #[test]
    fn known_bidegrees() {
        let b = bidegree(4).unwrap();
        assert_eq!((b.order, b.class), (BigInt::from(12), BigInt::from(28)));
        let b = bidegree(5).unwrap();
        assert_eq!((b.order, b.class), (BigInt::from(60), BigInt::from(120)));
        assert_eq!(bidegree(3).unwrap_err(), ChowError::DegreeTooSmall(3));
    }

    #[test]
    fn rank_of_r_bounds_its_chern_classes() {
        for d in 4..8 {
            let ring = ChowRing::new(d).unwrap();
            let c = ring.chern_r();
            for k in d as usize + 1..=ring.dim() {
                assert!(c.part(k).is_zero(), "c_{k}(R) nonzero for d = {d}");
            }
            assert_eq!(class_of_s(d).unwrap().top_degree(), d as usize);
        }
    }

    #[test]
    fn whitney_formula() {
        for d in 4..8 {
            let ring = ChowRing::new(d).unwrap();
            let one = ring.monomial(Monomial { schubert: 0, zl: 0, zm: 0 }, 1);
            let line = one.add(&ring.zeta_l().scale(-2)).add(&ring.zeta_m().scale(-1));
            let prod = ring.mul(&ring.chern_r(), &line);
            let sym = ring.pullback(&chern_sym(d as usize).total());
            for k in 0..=d as usize {
                assert_eq!(prod.part(k), ring.reduce(&sym).part(k));
            }
        }
    }

    fn class_strategy(d: u32) -> impl Strategy<Value = ChowClass> {
        let ring = ChowRing::new(d).unwrap();
        prop::collection::vec((0usize..6, 0usize..3, 0..=(d as usize - 4), -4i64..5), 0..6).prop_map(move |terms| {
            terms.into_iter().fold(ring.zero(), |acc, (s, i, j, c)| {
                acc.add(&ring.monomial(Monomial { schubert: s, zl: i, zm: j }, c))
            })
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in class_strategy(6), b in class_strategy(6), c in class_strategy(6)) {
            let ring = ChowRing::new(6).unwrap();
            prop_assert_eq!(ring.mul(&a, &b), ring.mul(&b, &a));
            prop_assert_eq!(ring.mul(&ring.mul(&a, &b), &c), ring.mul(&a, &ring.mul(&b, &c)));
            prop_assert_eq!(ring.mul(&a, &b.add(&c)), ring.mul(&a, &b).add(&ring.mul(&a, &c)));
        }

        #[test]
        fn products_beyond_the_dimension_vanish(a in class_strategy(5), b in class_strategy(5)) {
            let ring = ChowRing::new(5).unwrap();
            let p = ring.mul(&a, &b);
            prop_assert!(p.top_degree() <= ring.dim());
            let high = ring.mul(&a.part(4), &ring.mul(&b.part(4), &ring.zeta_l()));
            prop_assert!(high.is_zero());
        }
    }
}
