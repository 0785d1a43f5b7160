use std::fmt;

use num_complex::Complex64;

use super::binary::BinaryForm;
use super::FormsError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub type Exponent = [u32; 4];

/// All exponents of total degree `d` in the fixed order: `t0`-exponent
/// descending, then `t1`, then `t2`.
pub fn monomials(d: u32) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(monomial_count(d));
    for i0 in (0..=d).rev() {
        for i1 in (0..=d - i0).rev() {
            for i2 in (0..=d - i0 - i1).rev() {
                out.push([i0, i1, i2, d - i0 - i1 - i2]);
            }
        }
    }
    out
}

pub fn monomial_count(d: u32) -> usize {
    let d = d as usize;
    (d + 1) * (d + 2) * (d + 3) / 6
}

/// Position of `e` in [`monomials`].
pub fn monomial_index(e: Exponent) -> usize {
    let d = e.iter().sum::<u32>() as usize;
    let (a, b, c) = (e[0] as usize, e[1] as usize, e[2] as usize);
    let mut idx = 0;
    // blocks with a larger t0-exponent
    for k in a + 1..=d {
        let r = d - k;
        idx += (r + 1) * (r + 2) / 2;
    }
    let r = d - a;
    for j in b + 1..=r {
        idx += r - j + 1;
    }
    idx + (r - b - c)
}

/// A homogeneous quartic-variable form of degree `d`, stored densely in the
/// order of [`monomials`].
#[derive(Clone, PartialEq)]
pub struct QuaternaryForm<S> {
    degree: u32,
    coeffs: Vec<S>,
}

impl<S: Scalar> QuaternaryForm<S> {
    pub fn zero(degree: u32) -> Self {
        QuaternaryForm {
            degree,
            coeffs: vec![S::zero(); monomial_count(degree)],
        }
    }

    pub fn monomial(e: Exponent, c: S) -> Self {
        let mut f = Self::zero(e.iter().sum());
        f.coeffs[monomial_index(e)] = c;
        f
    }

    /// The variable `t_k`.
    pub fn variable(k: usize) -> Self {
        let mut e = [0; 4];
        e[k] = 1;
        Self::monomial(e, S::one())
    }

    pub fn linear(c: [S; 4]) -> Self {
        QuaternaryForm {
            degree: 1,
            coeffs: c.to_vec(),
        }
    }

    /// Rejects exponents of the wrong total degree and repeated exponents,
    /// naming the offending entry by its position.
    pub fn from_terms(degree: u32, terms: impl IntoIterator<Item = (Exponent, S)>) -> Result<Self, FormsError> {
        let mut f = Self::zero(degree);
        let mut seen = vec![false; f.coeffs.len()];
        for (pos, (e, c)) in terms.into_iter().enumerate() {
            let sum: u32 = e.iter().sum();
            if sum != degree {
                return Err(FormsError::ExponentSum { entry: pos, exponents: e, degree });
            }
            let i = monomial_index(e);
            if seen[i] {
                return Err(FormsError::DuplicateExponent { entry: pos, exponents: e });
            }
            seen[i] = true;
            f.coeffs[i] = c;
        }
        Ok(f)
    }

    /// Form from `(exponent, integer)` pairs; panics on malformed input.
    pub fn from_int_terms(degree: u32, terms: &[(Exponent, i64)]) -> Self {
        Self::from_terms(degree, terms.iter().map(|(e, c)| (*e, S::from_i64(*c))))
            .expect("well-formed terms")
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeff(&self, e: Exponent) -> &S {
        debug_assert_eq!(e.iter().sum::<u32>(), self.degree);
        &self.coeffs[monomial_index(e)]
    }

    pub fn set_coeff(&mut self, e: Exponent, c: S) {
        assert_eq!(e.iter().sum::<u32>(), self.degree, "exponent of wrong degree");
        self.coeffs[monomial_index(e)] = c;
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Non-zero terms in monomial order.
    pub fn terms(&self) -> Vec<(Exponent, S)> {
        monomials(self.degree)
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e, c.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(S::is_zero)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.coeffs.iter().map(S::magnitude).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        QuaternaryForm {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        QuaternaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        let ea = monomials(self.degree);
        let eb = monomials(other.degree);
        for (a, ca) in ea.iter().zip(&self.coeffs) {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in eb.iter().zip(&other.coeffs) {
                if cb.is_zero() {
                    continue;
                }
                let i = monomial_index([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
                out.coeffs[i] = out.coeffs[i].clone() + ca.clone() * cb.clone();
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = QuaternaryForm::monomial([0; 4], S::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[S; 4]) -> S {
        let d = self.degree as usize;
        let pows: Vec<Vec<S>> = x
            .iter()
            .map(|v| {
                std::iter::successors(Some(S::one()), |p| Some(p.clone() * v.clone()))
                    .take(d + 1)
                    .collect()
            })
            .collect();
        monomials(self.degree)
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .fold(S::zero(), |acc, (e, c)| {
                acc + c.clone()
                    * pows[0][e[0] as usize].clone()
                    * pows[1][e[1] as usize].clone()
                    * pows[2][e[2] as usize].clone()
                    * pows[3][e[3] as usize].clone()
            })
    }

    /// `d f / d t_k`; the derivative of a constant is the zero constant.
    pub fn partial(&self, k: usize) -> Self {
        if self.degree == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.degree - 1);
        for (e, c) in monomials(self.degree).iter().zip(&self.coeffs) {
            if e[k] == 0 || c.is_zero() {
                continue;
            }
            let mut e2 = *e;
            e2[k] -= 1;
            out.coeffs[monomial_index(e2)] = c.clone() * S::from_i64(e[k] as i64);
        }
        out
    }

    pub fn gradient(&self) -> [Self; 4] {
        [self.partial(0), self.partial(1), self.partial(2), self.partial(3)]
    }

    pub fn gradient_at(&self, x: &[S; 4]) -> [S; 4] {
        let g = self.gradient();
        [g[0].eval(x), g[1].eval(x), g[2].eval(x), g[3].eval(x)]
    }

    pub fn hessian_at(&self, x: &[S; 4]) -> Matrix<S> {
        let g = self.gradient();
        let second: Vec<[Self; 4]> = g.iter().map(|p| p.gradient()).collect();
        Matrix::from_fn(4, 4, |i, j| second[i][j].eval(x))
    }

    /// `f(B s)`: each `t_k` is replaced by `sum_j B[k][j] s_j`.
    pub fn substitute(&self, b: &Matrix<S>) -> Self {
        assert_eq!((b.rows(), b.cols()), (4, 4), "substitution needs a 4x4 matrix");
        let d = self.degree;
        let lin: Vec<Self> = (0..4)
            .map(|k| Self::linear([b[(k, 0)].clone(), b[(k, 1)].clone(), b[(k, 2)].clone(), b[(k, 3)].clone()]))
            .collect();
        let pows: Vec<Vec<Self>> = lin
            .iter()
            .map(|l| std::iter::successors(Some(Self::monomial([0; 4], S::one())), |p| Some(p.mul(l))).take(d as usize + 1).collect())
            .collect();
        let mut out = Self::zero(d);
        // Products share prefixes in monomial order; cache the last (e0, e1)
        // and (e0, e1, e2) partial products.
        let mut cache01: Option<([u32; 2], Self)> = None;
        let mut cache012: Option<([u32; 3], Self)> = None;
        for (e, c) in monomials(d).iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let p01 = match &cache01 {
                Some((k, p)) if *k == [e[0], e[1]] => p.clone(),
                _ => {
                    let p = pows[0][e[0] as usize].mul(&pows[1][e[1] as usize]);
                    cache01 = Some(([e[0], e[1]], p.clone()));
                    p
                }
            };
            let p012 = match &cache012 {
                Some((k, p)) if *k == [e[0], e[1], e[2]] => p.clone(),
                _ => {
                    let p = p01.mul(&pows[2][e[2] as usize]);
                    cache012 = Some(([e[0], e[1], e[2]], p.clone()));
                    p
                }
            };
            let term = p012.mul(&pows[3][e[3] as usize]);
            for (o, t) in out.coeffs.iter_mut().zip(&term.coeffs) {
                if !t.is_zero() {
                    *o = o.clone() + c.clone() * t.clone();
                }
            }
        }
        out
    }

    /// `f(t0 p + t1 q)` as a binary form.
    pub fn restrict(&self, p: &[S; 4], q: &[S; 4]) -> BinaryForm<S> {
        let d = self.degree as usize;
        let lin: Vec<BinaryForm<S>> = (0..4).map(|k| BinaryForm::linear(p[k].clone(), q[k].clone())).collect();
        let pows: Vec<Vec<BinaryForm<S>>> = lin
            .iter()
            .map(|l| {
                std::iter::successors(Some(BinaryForm::constant(S::one())), |x| Some(x.mul(l)))
                    .take(d + 1)
                    .collect()
            })
            .collect();
        let mut out = vec![S::zero(); d + 1];
        for (e, c) in monomials(self.degree).iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let term = pows[0][e[0] as usize]
                .mul(&pows[1][e[1] as usize])
                .mul(&pows[2][e[2] as usize])
                .mul(&pows[3][e[3] as usize]);
            for (o, t) in out.iter_mut().zip(term.coeffs()) {
                *o = o.clone() + c.clone() * t.clone();
            }
        }
        BinaryForm::new(out)
    }

    /// Splits off the terms divisible by `t_k`: returns `(rest, quotient)` with
    /// `self = rest + t_k * quotient` and `rest` free of `t_k`.
    pub fn split_by_variable(&self, k: usize) -> (Self, Self) {
        let mut rest = Self::zero(self.degree);
        let mut quot = Self::zero(self.degree.saturating_sub(1));
        for (e, c) in monomials(self.degree).iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            if e[k] > 0 {
                let mut e2 = *e;
                e2[k] -= 1;
                quot.coeffs[monomial_index(e2)] = c.clone();
            } else {
                rest.coeffs[monomial_index(*e)] = c.clone();
            }
        }
        (rest, quot)
    }

    /// The binary form `f(t0, t1, 0, 0)`.
    pub fn on_base_line(&self) -> BinaryForm<S> {
        let d = self.degree;
        BinaryForm::new((0..=d).map(|i| self.coeff([d - i, i, 0, 0]).clone()).collect())
    }

    /// Lifts a binary form in `t0, t1` to a quaternary form.
    pub fn from_binary(b: &BinaryForm<S>) -> Self {
        let k = b.degree() as u32;
        let mut f = Self::zero(k);
        for (i, c) in b.coeffs().iter().enumerate() {
            f.coeffs[monomial_index([k - i as u32, i as u32, 0, 0])] = c.clone();
        }
        f
    }

    pub fn normalized(&self) -> Self {
        let big = self
            .coeffs
            .iter()
            .max_by(|a, b| a.magnitude().total_cmp(&b.magnitude()))
            .cloned()
            .unwrap_or_else(S::zero);
        if big.is_zero() {
            return self.clone();
        }
        self.scale(&(S::one() / big))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> QuaternaryForm<T> {
        QuaternaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn to_c64(&self) -> QuaternaryForm<Complex64> {
        self.map(S::to_c64)
    }
}

impl<S: fmt::Debug> fmt::Debug for QuaternaryForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(monomials(self.degree).into_iter().zip(&self.coeffs)).finish()
    }
}
