use num_rational::BigRational;
use rand::Rng;

use crate::forms::{monomials, BinaryForm, Exponent, QuaternaryForm};
use crate::linalg::Matrix;
use crate::lines::{FanoPoint, ParamLine};
use crate::scalar::Scalar;

type Q = BigRational;

/// A surface built around a prescribed point of its congruence: the base
/// line `t2 = t3 = 0` with divisors `g`, `h`, and
/// `f = g^2 h + t2 gbar + t3 hbar` where `gbar` is free of `t3`. The
/// coefficients of `gbar` and `hbar` are the `x` and `y` of the adapted frame.
#[derive(Debug, Clone)]
pub struct Planted {
    pub d: u32,
    pub g: BinaryForm<Q>,
    pub h: BinaryForm<Q>,
    pub gbar: QuaternaryForm<Q>,
    pub hbar: QuaternaryForm<Q>,
}

impl Planted {
    /// `gbar`, `hbar` filled with random integers in `[-5, 5]`.
    pub fn new(d: u32, g: BinaryForm<Q>, h: BinaryForm<Q>, rng: &mut impl Rng) -> Self {
        Self::with_bound(d, g, h, 5, rng)
    }

    /// Random filler in `[-bound, bound]`. Small bounds hit special
    /// coefficient coincidences often; large ones give generic instances.
    pub fn with_bound(d: u32, g: BinaryForm<Q>, h: BinaryForm<Q>, bound: i64, rng: &mut impl Rng) -> Self {
        let mut p = Self::bare(d, g, h);
        for e in monomials(d - 1) {
            if e[3] == 0 {
                p.gbar.set_coeff(e, Q::from_i64(rng.random_range(-bound..=bound)));
            }
            p.hbar.set_coeff(e, Q::from_i64(rng.random_range(-bound..=bound)));
        }
        p
    }

    pub fn bare(d: u32, g: BinaryForm<Q>, h: BinaryForm<Q>) -> Self {
        Planted {
            d,
            g,
            h,
            gbar: QuaternaryForm::zero(d - 1),
            hbar: QuaternaryForm::zero(d - 1),
        }
    }

    /// Sets the coefficient of `t0^i0 t1^i1 t2^i2` in `gbar`.
    pub fn x(&mut self, e: [u32; 3], v: Q) -> &mut Self {
        self.gbar.set_coeff([e[0], e[1], e[2], 0], v);
        self
    }

    pub fn y(&mut self, e: Exponent, v: Q) -> &mut Self {
        self.hbar.set_coeff(e, v);
        self
    }

    pub fn surface(&self) -> QuaternaryForm<Q> {
        let t2 = QuaternaryForm::variable(2);
        let t3 = QuaternaryForm::variable(3);
        QuaternaryForm::from_binary(&self.g.mul(&self.g).mul(&self.h))
            .add(&t2.mul(&self.gbar))
            .add(&t3.mul(&self.hbar))
    }

    pub fn point(&self) -> FanoPoint<Q> {
        FanoPoint::new(ParamLine::base(), self.g.clone(), self.h.clone(), self.d).expect("degrees match d")
    }

    /// The same configuration after the coordinate change `x = c s`.
    pub fn moved(&self, c: &Matrix<Q>) -> (QuaternaryForm<Q>, FanoPoint<Q>) {
        let inv = c.inverse(0.0).expect("invertible change");
        (self.surface().substitute(&inv), self.point().transform(c))
    }
}
