//! Binary forms, quaternary forms, spans of binary forms and root clusters.

mod binary;
mod quaternary;
mod roots;
mod span;

pub use binary::BinaryForm;
pub use quaternary::{monomial_count, monomial_index, monomials, Exponent, QuaternaryForm};
pub use roots::{chordal_distance, normalize_point, root_divisor, RootCluster};
pub use span::{multiples, FormSpan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormsError {
    #[error("the zero form has no root divisor")]
    ZeroForm,
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("entry {entry}: exponents {exponents:?} do not sum to the degree {degree}")]
    ExponentSum { entry: usize, exponents: Exponent, degree: u32 },
    #[error("entry {entry}: exponents {exponents:?} appear more than once")]
    DuplicateExponent { entry: usize, exponents: Exponent },
}
