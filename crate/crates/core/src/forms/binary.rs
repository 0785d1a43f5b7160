use std::fmt;

use num_complex::Complex64;
use crate::scalar::{Scalar, ScalarParseError, ScalarRepr};

/// A homogeneous polynomial in `t0, t1`. Index `i` holds the coefficient of
/// `t0^(k-i) t1^i`, so index order is the fixed monomial order
/// `t0^k > t0^(k-1) t1 > ... > t1^k`.
#[derive(Clone, PartialEq)]
pub struct BinaryForm<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> BinaryForm<S> {
    /// `coeffs.len() - 1` is the degree; panics on an empty vector.
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a binary form needs degree + 1 coefficients");
        BinaryForm { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        BinaryForm {
            coeffs: vec![S::zero(); degree + 1],
        }
    }

    pub fn constant(c: S) -> Self {
        BinaryForm { coeffs: vec![c] }
    }

    /// `t0^(degree - i) t1^i`.
    pub fn monomial(degree: usize, i: usize) -> Self {
        assert!(i <= degree);
        let mut f = Self::zero(degree);
        f.coeffs[i] = S::one();
        f
    }

    /// `a t0 + b t1`.
    pub fn linear(a: S, b: S) -> Self {
        BinaryForm { coeffs: vec![a, b] }
    }

    /// The linear form vanishing at `[r0 : r1]`.
    pub fn vanishing_at(r0: S, r1: S) -> Self {
        Self::linear(r1, -r0)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| S::from_i64(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &S {
        &self.coeffs[i]
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Exact zero test (every coefficient is `0`).
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(S::is_zero)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.coeffs.iter().map(S::magnitude).fold(0.0, f64::max)
    }

    /// Zero test at a relative tolerance on float backends.
    pub fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(scale, tol))
    }

    pub fn mul(&self, other: &BinaryForm<S>) -> BinaryForm<S> {
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        BinaryForm { coeffs: out }
    }

    pub fn pow(&self, n: u32) -> BinaryForm<S> {
        let mut acc = BinaryForm::constant(S::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Panics on a degree mismatch.
    pub fn add(&self, other: &BinaryForm<S>) -> BinaryForm<S> {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &BinaryForm<S>) -> BinaryForm<S> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> BinaryForm<S> {
        BinaryForm {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// Value at `(t0, t1)`, by Horner in both variables.
    pub fn eval(&self, t0: &S, t1: &S) -> S {
        let k = self.degree();
        let mut acc = S::zero();
        let mut t1_pow = S::one();
        let t0_pows: Vec<S> = std::iter::successors(Some(S::one()), |p| Some(p.clone() * t0.clone()))
            .take(k + 1)
            .collect();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc = acc + c.clone() * t0_pows[k - i].clone() * t1_pow.clone();
            t1_pow = t1_pow * t1.clone();
        }
        acc
    }

    /// `self(m00 s0 + m01 s1, m10 s0 + m11 s1)`.
    pub fn substitute(&self, m: &[[S; 2]; 2]) -> BinaryForm<S> {
        let k = self.degree();
        let l0 = BinaryForm::linear(m[0][0].clone(), m[0][1].clone());
        let l1 = BinaryForm::linear(m[1][0].clone(), m[1][1].clone());
        let p0: Vec<_> = (0..=k as u32).map(|e| l0.pow(e)).collect();
        let p1: Vec<_> = (0..=k as u32).map(|e| l1.pow(e)).collect();
        let mut out = BinaryForm::zero(k);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&p0[k - i].mul(&p1[i]).scale(c));
        }
        out
    }

    /// Partial derivatives `(d/dt0, d/dt1)`.
    pub fn partials(&self) -> (BinaryForm<S>, BinaryForm<S>) {
        let k = self.degree();
        if k == 0 {
            return (BinaryForm::zero(0), BinaryForm::zero(0));
        }
        let d0 = (0..k)
            .map(|i| self.coeffs[i].clone() * S::from_i64((k - i) as i64))
            .collect();
        let d1 = (0..k)
            .map(|i| self.coeffs[i + 1].clone() * S::from_i64((i + 1) as i64))
            .collect();
        (BinaryForm::new(d0), BinaryForm::new(d1))
    }

    /// Division by the linear form vanishing at `[r0 : r1]`; returns the
    /// quotient when the division is exact (remainder negligible).
    pub fn divide_by_root(&self, r0: &S, r1: &S, tol: f64) -> Option<BinaryForm<S>> {
        let k = self.degree();
        if k == 0 {
            return None;
        }
        // self = (r1 t0 - r0 t1) * q; solve from whichever end has the
        // larger pivot.
        let mut q = vec![S::zero(); k];
        if r1.magnitude() >= r0.magnitude() {
            // forward: c_i = r1 q_i - r0 q_{i-1}
            let mut prev = S::zero();
            for (qi, c) in q.iter_mut().zip(&self.coeffs) {
                *qi = (c.clone() + r0.clone() * prev.clone()) / r1.clone();
                prev = qi.clone();
            }
            let rem = self.coeffs[k].clone() + r0.clone() * prev;
            if !rem.is_negligible(self.max_magnitude().max(1e-300), tol) {
                return None;
            }
        } else {
            // backward: c_{i+1} = r1 q_{i+1} - r0 q_i
            let mut next = S::zero();
            for i in (0..k).rev() {
                let qi = (r1.clone() * next.clone() - self.coeffs[i + 1].clone()) / r0.clone();
                q[i] = qi.clone();
                next = qi;
            }
            let rem = self.coeffs[0].clone() - r1.clone() * next;
            if !rem.is_negligible(self.max_magnitude().max(1e-300), tol) {
                return None;
            }
        }
        Some(BinaryForm::new(q))
    }

    /// Order of vanishing at `[r0 : r1]`.
    pub fn multiplicity_at(&self, r0: &S, r1: &S, tol: f64) -> usize {
        let mut f = self.clone();
        let mut m = 0;
        while f.degree() > 0 && !f.is_zero() {
            match f.divide_by_root(r0, r1, tol) {
                Some(q) => {
                    f = q;
                    m += 1;
                }
                None => break,
            }
        }
        m
    }

    /// Exact quotient by `divisor` when it divides `self` (long division in
    /// the chart `t0 = 1`, from the top power of `t1`); `None` otherwise.
    pub fn divide_exact(&self, divisor: &BinaryForm<S>, tol: f64) -> Option<BinaryForm<S>> {
        let (n, k) = (self.degree(), divisor.degree());
        if k > n {
            return None;
        }
        // divisor = t0^shift * D where D has a nonzero t1^top term
        let top = (0..=k).rev().find(|&i| !divisor.coeffs[i].is_zero())?;
        let shift = k - top;
        let scale = self.max_magnitude().max(1e-300);
        if (n - shift + 1..=n).any(|i| !self.coeffs[i].is_negligible(scale, tol)) {
            return None;
        }
        let d: Vec<S> = divisor.coeffs[..=top].to_vec();
        let mut rem: Vec<S> = self.coeffs[..=n - shift].to_vec();
        let qlen = rem.len() - top;
        let mut q = vec![S::zero(); qlen];
        for j in (0..qlen).rev() {
            let c = rem[j + top].clone() / d[top].clone();
            for (i, di) in d.iter().enumerate() {
                rem[j + i] = rem[j + i].clone() - c.clone() * di.clone();
            }
            q[j] = c;
        }
        if rem.iter().all(|r| r.is_negligible(scale, tol)) {
            Some(BinaryForm::new(q))
        } else {
            None
        }
    }

    /// Roots of a binary quadratic in the coefficient field, when they lie
    /// there (always on the complex backend; for rationals only when the
    /// discriminant is a square).
    pub fn quadratic_roots(&self) -> Option<[[S; 2]; 2]> {
        assert_eq!(self.degree(), 2, "quadratic_roots needs a quadratic");
        let (a, b, c) = (self.coeffs[0].clone(), self.coeffs[1].clone(), self.coeffs[2].clone());
        let two = S::from_i64(2);
        if c.is_zero() {
            // t0 (a t0 + b t1): roots [0:1] and [b : -a]
            return Some([[S::zero(), S::one()], [b, -a]]);
        }
        if a.is_zero() {
            // t1 (b t0 + c t1): roots [1:0] and [c : -b]
            return Some([[S::one(), S::zero()], [c, -b]]);
        }
        // roots [t0 : t1] with a t0^2 + b t0 t1 + c t1^2 = 0: t0/t1 = (-b +- sqrt(D)) / 2a
        let disc = b.clone() * b.clone() - S::from_i64(4) * a.clone() * c;
        let r = disc.sqrt_checked()?;
        let den = two * a;
        Some([[-b.clone() + r.clone(), den.clone()], [-b - r, den]])
    }

    /// Rescaled so that the largest-magnitude coefficient is `1`.
    pub fn normalized(&self) -> BinaryForm<S> {
        let Some(big) = self
            .coeffs
            .iter()
            .max_by(|a, b| a.magnitude().total_cmp(&b.magnitude()))
            .filter(|c| !c.is_zero())
        else {
            return self.clone();
        };
        self.scale(&(S::one() / big.clone()))
    }

    pub fn to_c64(&self) -> BinaryForm<Complex64> {
        BinaryForm {
            coeffs: self.coeffs.iter().map(S::to_c64).collect(),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> BinaryForm<T> {
        BinaryForm {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn to_repr(&self) -> Vec<ScalarRepr> {
        self.coeffs.iter().map(S::to_repr).collect()
    }

    pub fn from_repr(values: &[ScalarRepr]) -> Result<Self, ScalarParseError> {
        let coeffs = values.iter().map(S::from_repr).collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(ScalarParseError::MalformedRational("empty coefficient list".into()));
        }
        Ok(BinaryForm { coeffs })
    }
}

impl BinaryForm<Complex64> {
    /// `prod (r1 t0 - r0 t1)^m` over the given roots.
    pub fn from_roots(roots: &[([Complex64; 2], usize)]) -> Self {
        roots.iter().fold(BinaryForm::constant(Complex64::new(1.0, 0.0)), |acc, (r, m)| {
            acc.mul(&BinaryForm::vanishing_at(r[0], r[1]).pow(*m as u32))
        })
    }

    /// Minimum over unit phases of the max-norm distance between the two
    /// forms after each is scaled to unit max coefficient. Zero iff the forms
    /// are proportional.
    pub fn projective_distance(&self, other: &BinaryForm<Complex64>) -> f64 {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        let a = self.normalized();
        let b = other.normalized();
        // Best complex multiplier in least squares, then projected onto the
        // unit circle (both vectors already have unit max entry).
        let inner: Complex64 = b.coeffs.iter().zip(&a.coeffs).map(|(x, y)| x.conj() * y).sum();
        let phase = if inner.norm() > 0.0 {
            inner / inner.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - phase * y).norm())
            .fold(0.0, f64::max)
    }
}

impl<S: fmt::Debug> fmt::Debug for BinaryForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn bf(c: &[i64]) -> BinaryForm<Q> {
        BinaryForm::from_ints(c)
    }

    #[test]
    fn products() {
        // (t0 t1)(t0 + t1) = t0^2 t1 + t0 t1^2
        assert_eq!(bf(&[0, 1, 0]).mul(&bf(&[1, 1])), bf(&[0, 1, 1, 0]));
        assert!(bf(&[3, -1, 2]).mul(&BinaryForm::zero(2)).is_zero());
        assert_eq!(bf(&[1, 1]).pow(2), bf(&[1, 2, 1]));
    }

    #[test]
    fn substitution_and_division() {
        // t0^2 - t1^2 under t0 -> s0 + s1, t1 -> s0 - s1 is 4 s0 s1
        let f = bf(&[1, 0, -1]);
        let m = [[Q::from_i64(1), Q::from_i64(1)], [Q::from_i64(1), Q::from_i64(-1)]];
        assert_eq!(f.substitute(&m), bf(&[0, 4, 0]));
        // (t0 - 2 t1)^3 (t0 + t1) vanishes to order 3 at [2:1]
        let l = bf(&[1, -2]);
        let f = l.pow(3).mul(&bf(&[1, 1]));
        assert_eq!(f.multiplicity_at(&Q::from_i64(2), &Q::from_i64(1), 0.0), 3);
        assert_eq!(f.multiplicity_at(&Q::from_i64(-1), &Q::from_i64(1), 0.0), 1);
        assert_eq!(f.multiplicity_at(&Q::from_i64(1), &Q::from_i64(0), 0.0), 0);
        // roots at infinity go through the backward branch
        let g = bf(&[0, 0, 1]);
        assert_eq!(g.multiplicity_at(&Q::from_i64(1), &Q::from_i64(0), 0.0), 2);
    }

    #[test]
    fn exact_division_and_quadratic_roots() {
        let g = bf(&[1, 0, -2]); // t0^2 - 2 t1^2, irrational roots
        let h = g.mul(&bf(&[3, 1]));
        assert_eq!(h.divide_exact(&g, 0.0), Some(bf(&[3, 1])));
        assert_eq!(h.add(&bf(&[0, 0, 0, 1])).divide_exact(&g, 0.0), None);
        assert!(g.quadratic_roots().is_none());
        for g in [bf(&[2, -3, 1]), bf(&[1, 0, 0]), bf(&[0, 0, 3]), bf(&[0, 1, 0]), bf(&[2, 1, 0]), bf(&[0, 1, 5])] {
            let roots = g.quadratic_roots().unwrap();
            for r in &roots {
                assert!(num_traits::Zero::is_zero(&g.eval(&r[0], &r[1])));
                assert!(!(num_traits::Zero::is_zero(&r[0]) && num_traits::Zero::is_zero(&r[1])));
            }
        }
        // t1 divides t0 t1^2
        assert_eq!(bf(&[0, 0, 1, 0]).divide_exact(&bf(&[0, 1]), 0.0), Some(bf(&[0, 1, 0])));
        assert_eq!(bf(&[0, 0, 1]).divide_exact(&bf(&[1, 0]), 0.0), None);
    }

    #[test]
    fn eval_matches_expansion() {
        let f = bf(&[2, -3, 0, 5]);
        let v = f.eval(&Q::from_i64(2), &Q::from_i64(-1));
        // 2*8 - 3*4*(-1) + 0 + 5*(-1) = 16 + 12 - 5
        assert_eq!(v, Q::from_i64(23));
    }
}
