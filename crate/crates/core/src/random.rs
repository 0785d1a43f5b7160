//! Seeded random instances: surfaces, frames, coordinate changes.

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::forms::{monomials, BinaryForm, QuaternaryForm};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vec(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

fn multinomial(e: &[u32; 4]) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(e.iter().sum()) / e.iter().map(|&k| fact(k)).product::<f64>()
}

/// Unitarily invariant random form: coefficient of `t^e` is complex Gaussian
/// with variance equal to the multinomial coefficient.
pub fn kostlan_surface(d: u32, rng: &mut impl Rng) -> QuaternaryForm<Complex64> {
    let terms = monomials(d)
        .into_iter()
        .map(|e| {
            let c = complex_gaussian(rng) * multinomial(&e).sqrt();
            (e, c)
        })
        .collect::<Vec<_>>();
    QuaternaryForm::from_terms(d, terms).expect("well-formed")
}

pub fn small_rational(rng: &mut impl Rng, bound: i64) -> BigRational {
    BigRational::from_i64(rng.random_range(-bound..=bound))
}

/// Random form with integer coefficients in `[-bound, bound]`.
pub fn integer_surface<S: Scalar>(d: u32, bound: i64, rng: &mut impl Rng) -> QuaternaryForm<S> {
    let terms = monomials(d)
        .into_iter()
        .map(|e| (e, S::from_i64(rng.random_range(-bound..=bound))))
        .collect::<Vec<_>>();
    QuaternaryForm::from_terms(d, terms).expect("well-formed")
}

pub fn integer_binary<S: Scalar>(k: usize, bound: i64, rng: &mut impl Rng) -> BinaryForm<S> {
    BinaryForm::new((0..=k).map(|_| S::from_i64(rng.random_range(-bound..=bound))).collect())
}

/// Random invertible integer 4x4 matrix with small entries.
pub fn integer_change<S: Scalar>(bound: i64, rng: &mut impl Rng) -> Matrix<S> {
    loop {
        let m = Matrix::from_fn(4, 4, |_, _| S::from_i64(rng.random_range(-bound..=bound)));
        if !m.determinant().is_zero() {
            return m;
        }
    }
}

/// Random complex 4x4 matrix (invertible with probability one).
pub fn gaussian_change(rng: &mut impl Rng) -> Matrix<Complex64> {
    Matrix::from_fn(4, 4, |_, _| complex_gaussian(rng))
}

pub fn gaussian_point(rng: &mut impl Rng) -> [Complex64; 4] {
    std::array::from_fn(|_| complex_gaussian(rng))
}
