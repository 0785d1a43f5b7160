use super::binary::BinaryForm;
use super::FormsError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A subspace of degree-`k` binary forms, held as a reduced echelon basis in
/// coefficient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSpan<S> {
    degree: usize,
    basis: Matrix<S>,
}

impl<S: Scalar> FormSpan<S> {
    /// Spans the given forms; an empty list gives the zero span of `degree`.
    /// Panics if the forms disagree on degree.
    pub fn new(degree: usize, forms: &[BinaryForm<S>], rel_tol: f64) -> Self {
        for f in forms {
            assert_eq!(f.degree(), degree, "degree mismatch in span");
        }
        let m = Matrix::from_fn(forms.len(), degree + 1, |i, j| forms[i].coeff(j).clone());
        FormSpan {
            degree,
            basis: S::row_basis(&m, rel_tol),
        }
    }

    /// All of `C[t0,t1]_k`.
    pub fn full(degree: usize) -> Self {
        FormSpan {
            degree,
            basis: Matrix::identity(degree + 1),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.degree + 1
    }

    pub fn basis(&self) -> Vec<BinaryForm<S>> {
        (0..self.basis.rows()).map(|i| BinaryForm::new(self.basis.row(i).to_vec())).collect()
    }

    pub fn basis_matrix(&self) -> &Matrix<S> {
        &self.basis
    }

    pub fn join(&self, other: &FormSpan<S>, rel_tol: f64) -> Result<FormSpan<S>, FormsError> {
        if self.degree != other.degree {
            return Err(FormsError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(FormSpan {
            degree: self.degree,
            basis: S::row_basis(&self.basis.stack(&other.basis), rel_tol),
        })
    }

    pub fn contains(&self, f: &BinaryForm<S>, rel_tol: f64) -> bool {
        let one = FormSpan::new(self.degree, std::slice::from_ref(f), rel_tol);
        self.join(&one, rel_tol).map(|j| j.dim() == self.dim()).unwrap_or(false)
    }

    /// Subspace equality.
    pub fn same_as(&self, other: &FormSpan<S>, rel_tol: f64) -> bool {
        if self.degree != other.degree || self.dim() != other.dim() {
            return false;
        }
        self.join(other, rel_tol).map(|j| j.dim() == self.dim()).unwrap_or(false)
    }
}

/// `g * C[t0,t1]_k` as a list of generators.
pub fn multiples<S: Scalar>(g: &BinaryForm<S>, k: usize) -> Vec<BinaryForm<S>> {
    (0..=k).map(|i| g.mul(&BinaryForm::monomial(k, i))).collect()
}
