//! Coefficient fields.
//!
//! Everything above this module is written against [`Scalar`], which is
//! implemented for exact rationals ([`BigRational`]), real doubles and complex
//! doubles ([`Complex64`]). The exact backend answers every zero test exactly;
//! the float backends compare against a caller-supplied relative tolerance.
//! Rank decisions go through [`Scalar::row_basis`] and [`Scalar::null_space`],
//! which use exact elimination or an SVD depending on the backend.

use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Matrix};

/// Serialized form of a scalar: rationals as `"p/q"` strings, floats as
/// `{re, im}` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Rational(String),
    Complex { re: f64, im: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalarParseError {
    #[error("malformed rational '{0}'")]
    MalformedRational(String),
    #[error("backend mismatch: expected {expected} value, found {found}")]
    BackendMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("non-real value {re}+{im}i for a real backend")]
    NotReal { re: f64, im: f64 },
}

pub trait Scalar: Num + Neg<Output = Self> + Clone + Debug + Send + Sync + 'static {
    /// Whether zero tests are exact.
    const EXACT: bool;
    /// Backend name used in file formats.
    const BACKEND: &'static str;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// One-way conversion from an exact rational.
    fn from_rational(r: &BigRational) -> Self;

    fn to_c64(&self) -> Complex64;

    /// Absolute value (modulus), as a double.
    fn magnitude(&self) -> f64;

    /// Zero test. Exact backends ignore `scale` and `tol`.
    fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol * scale
        }
    }

    /// Square root inside the field, when one exists.
    fn sqrt_checked(&self) -> Option<Self>;

    /// Rows spanning the same row space as `rows`, in reduced echelon form.
    /// Float backends decide the rank from singular values below
    /// `rel_tol * sigma_max`.
    fn row_basis(rows: &Matrix<Self>, rel_tol: f64) -> Matrix<Self> {
        linalg::rref_rows(rows, rel_tol)
    }

    /// Basis of `{x : m x = 0}`, one vector per row of the result.
    fn null_space(m: &Matrix<Self>, rel_tol: f64) -> Matrix<Self> {
        linalg::rref_null_space(m, rel_tol)
    }

    fn to_repr(&self) -> ScalarRepr;

    fn from_repr(repr: &ScalarRepr) -> Result<Self, ScalarParseError>;
}

pub fn parse_rational(s: &str) -> Result<BigRational, ScalarParseError> {
    let err = || ScalarParseError::MalformedRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "exact";

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| BigRational::new(n, d))
    }

    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Rational(format_rational(self))
    }

    fn from_repr(repr: &ScalarRepr) -> Result<Self, ScalarParseError> {
        match repr {
            ScalarRepr::Rational(s) => parse_rational(s),
            ScalarRepr::Complex { .. } => Err(ScalarParseError::BackendMismatch {
                expected: "rational",
                found: "complex",
            }),
        }
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "float";

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn sqrt_checked(&self) -> Option<Self> {
        Some(self.sqrt())
    }

    fn row_basis(rows: &Matrix<Self>, rel_tol: f64) -> Matrix<Self> {
        svd_row_basis(rows, rel_tol)
    }

    fn null_space(m: &Matrix<Self>, rel_tol: f64) -> Matrix<Self> {
        svd_null_space(m, rel_tol)
    }

    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Complex {
            re: self.re,
            im: self.im,
        }
    }

    fn from_repr(repr: &ScalarRepr) -> Result<Self, ScalarParseError> {
        match repr {
            ScalarRepr::Complex { re, im } => Ok(Complex64::new(*re, *im)),
            ScalarRepr::Rational(_) => Err(ScalarParseError::BackendMismatch {
                expected: "complex",
                found: "rational",
            }),
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "real";

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn sqrt_checked(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn row_basis(rows: &Matrix<Self>, rel_tol: f64) -> Matrix<Self> {
        svd_row_basis(rows, rel_tol)
    }

    fn null_space(m: &Matrix<Self>, rel_tol: f64) -> Matrix<Self> {
        svd_null_space(m, rel_tol)
    }

    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Complex { re: *self, im: 0.0 }
    }

    fn from_repr(repr: &ScalarRepr) -> Result<Self, ScalarParseError> {
        match repr {
            ScalarRepr::Complex { re, im } if *im == 0.0 => Ok(*re),
            ScalarRepr::Complex { re, im } => Err(ScalarParseError::NotReal { re: *re, im: *im }),
            ScalarRepr::Rational(_) => Err(ScalarParseError::BackendMismatch {
                expected: "real",
                found: "rational",
            }),
        }
    }
}

/// Float types the SVD paths can hand to nalgebra.
trait SvdField: Scalar + nalgebra::ComplexField<RealField = f64> + Copy {
    fn conj_value(self) -> Self;
}

impl SvdField for Complex64 {
    fn conj_value(self) -> Self {
        self.conj()
    }
}

impl SvdField for f64 {
    fn conj_value(self) -> Self {
        self
    }
}

fn to_dmatrix<S: SvdField>(m: &Matrix<S>, min_rows: usize) -> DMatrix<S> {
    let rows = m.rows().max(min_rows);
    DMatrix::from_fn(rows, m.cols(), |i, j| {
        if i < m.rows() {
            m[(i, j)]
        } else {
            S::zero()
        }
    })
}

/// Numerical rank from a list of singular values.
pub fn numerical_rank(singular_values: &[f64], rel_tol: f64) -> usize {
    let max = singular_values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Singular values of a float matrix, largest first.
pub fn singular_values(m: &Matrix<Complex64>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = to_dmatrix(m, 0).singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn svd_row_basis<S: SvdField>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    if m.rows() == 0 || m.cols() == 0 {
        return Matrix::zeros(0, m.cols());
    }
    let svd = to_dmatrix(m, 0).svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let rank = numerical_rank(&sv, rel_tol);
    let mut keep: Vec<usize> = (0..sv.len()).collect();
    keep.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let basis = Matrix::from_fn(rank, m.cols(), |i, j| v_t[(keep[i], j)]);
    // The rows are orthonormal, so elimination with partial pivoting is stable.
    let reduced = linalg::rref_rows(&basis, 1e-12);
    debug_assert_eq!(reduced.rows(), rank);
    reduced
}

fn svd_null_space<S: SvdField>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    let n = m.cols();
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    if m.rows() == 0 {
        return Matrix::identity(n);
    }
    // Pad to at least n rows so that V is square.
    let svd = to_dmatrix(m, n).svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let null: Vec<usize> = (0..sv.len())
        .filter(|&i| max == 0.0 || sv[i] <= rel_tol * max)
        .collect();
    Matrix::from_fn(null.len(), n, |i, j| v_t[(null[i], j)].conj_value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_and_lowest_terms() {
        let r = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&r), "-3/2");
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(format_rational(&parse_rational("10").unwrap()), "10");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn exact_sqrt_only_for_squares() {
        let q = BigRational::new(9.into(), 4.into());
        assert_eq!(q.sqrt_checked(), Some(BigRational::new(3.into(), 2.into())));
        assert_eq!(BigRational::from_i64(2).sqrt_checked(), None);
        assert_eq!(BigRational::from_i64(-4).sqrt_checked(), None);
    }

    #[test]
    fn backends_do_not_mix() {
        let repr = Complex64::new(1.0, 2.0).to_repr();
        assert!(BigRational::from_repr(&repr).is_err());
        let repr = BigRational::from_i64(3).to_repr();
        assert!(Complex64::from_repr(&repr).is_err());
    }

    #[test]
    fn svd_null_space_of_wide_matrix() {
        let m = Matrix::from_rows(vec![vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ]]);
        let ns = Complex64::null_space(&m, 1e-9);
        assert_eq!(ns.rows(), 2);
        for i in 0..2 {
            let dot: Complex64 = (0..3).map(|j| m[(0, j)] * ns[(i, j)]).sum();
            assert!(dot.norm() < 1e-12);
        }
    }
}
