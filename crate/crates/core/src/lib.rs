//! Fano congruences of bitangent lines to surfaces in P^3.
//!
//! The crate is generic over the coefficient field (see [`scalar::Scalar`]):
//! exact rationals for certificates and intersection numbers, complex doubles
//! for numerical enumeration. Concrete aliases for both are re-exported here.

pub mod chow;
pub mod config;
pub mod forms;
pub mod io;
pub mod linalg;
pub mod lines;
pub mod local;
pub mod pencil;
pub mod random;
pub mod scalar;
pub mod solve;

pub use num_complex::Complex64;
pub use num_rational::BigRational;

pub use config::RunConfig;
pub use forms::{BinaryForm, FormSpan, QuaternaryForm};
pub use lines::{FanoPoint, LineChart, ParamLine, PluckerLine, SchubertSlice};
pub use scalar::Scalar;

/// A surface in P^3 is its defining quaternary form.
pub type Surface<S> = QuaternaryForm<S>;

pub type ExactBinaryForm = BinaryForm<BigRational>;
pub type FloatBinaryForm = BinaryForm<Complex64>;
pub type ExactSurface = Surface<BigRational>;
pub type FloatSurface = Surface<Complex64>;
pub type ExactFanoPoint = FanoPoint<BigRational>;
pub type FloatFanoPoint = FanoPoint<Complex64>;
