//! Small dense matrices over a [`Scalar`] and Gauss-Jordan elimination.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::scalar::{Scalar, ScalarRepr};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let n = rows.len();
        Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(S::zero(), |acc, k| {
                acc + self[(i, k)].clone() * other[(k, j)].clone()
            })
        })
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// Rows stacked below `self`.
    pub fn stack(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.cols, "dimension mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(S::magnitude).fold(0.0, f64::max)
    }

    /// Rank by the backend's rank-revealing reduction.
    pub fn rank(&self, rel_tol: f64) -> usize {
        S::row_basis(self, rel_tol).rows()
    }

    /// Solves `self x = rhs` for square `self` by elimination with partial
    /// pivoting; `None` when a pivot is negligible.
    pub fn solve(&self, rhs: &[S], rel_tol: f64) -> Option<Vec<S>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        let n = self.rows;
        let scale = self.max_magnitude();
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| {
                a[(i, col)].magnitude().total_cmp(&a[(j, col)].magnitude())
            })?;
            if a[(piv, col)].is_negligible(scale, rel_tol) {
                return None;
            }
            a.swap_rows(piv, col);
            b.swap(piv, col);
            let p = a[(col, col)].clone();
            for i in col + 1..n {
                let factor = a[(i, col)].clone() / p.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)].clone() * factor.clone();
                    a[(i, j)] = a[(i, j)].clone() - v;
                }
                b[i] = b[i].clone() - b[col].clone() * factor;
            }
        }
        let mut x = vec![S::zero(); n];
        for i in (0..n).rev() {
            let mut acc = b[i].clone();
            for j in i + 1..n {
                acc = acc - a[(i, j)].clone() * x[j].clone();
            }
            x[i] = acc / a[(i, i)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self, rel_tol: f64) -> Option<Matrix<S>> {
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        // Column-by-column solve keeps the code small; these matrices are 4x4.
        for j in 0..n {
            let e: Vec<S> = (0..n).map(|i| if i == j { S::one() } else { S::zero() }).collect();
            cols.push(self.solve(&e, rel_tol)?);
        }
        Some(Matrix::from_columns(&cols))
    }

    pub fn determinant(&self) -> S {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&i| !a[(i, col)].is_zero()) else {
                return S::zero();
            };
            if piv != col {
                a.swap_rows(piv, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det = det * p.clone();
            for i in col + 1..n {
                let factor = a[(i, col)].clone() / p.clone();
                for j in col..n {
                    let v = a[(col, j)].clone() * factor.clone();
                    a[(i, j)] = a[(i, j)].clone() - v;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_repr(&self) -> Vec<Vec<ScalarRepr>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(S::to_repr).collect())
            .collect()
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Serializable matrix payload used in certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRepr {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<ScalarRepr>>,
}

impl<S: Scalar> From<&Matrix<S>> for MatrixRepr {
    fn from(m: &Matrix<S>) -> Self {
        MatrixRepr {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.to_repr(),
        }
    }
}

/// Reduced row echelon form; returns the pivot columns alongside.
pub fn rref<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> (Matrix<S>, Vec<usize>) {
    let mut a = m.clone();
    let scale = m.max_magnitude();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..a.cols {
        if r == a.rows {
            break;
        }
        let best = (r..a.rows)
            .max_by(|&i, &j| a[(i, col)].magnitude().total_cmp(&a[(j, col)].magnitude()))
            .expect("non-empty range");
        if a[(best, col)].is_negligible(scale, rel_tol) {
            if !S::EXACT {
                for i in r..a.rows {
                    a[(i, col)] = S::zero();
                }
            }
            continue;
        }
        a.swap_rows(best, r);
        let p = a[(r, col)].clone();
        for j in 0..a.cols {
            a[(r, j)] = a[(r, j)].clone() / p.clone();
        }
        for i in 0..a.rows {
            if i == r || a[(i, col)].is_zero() {
                continue;
            }
            let factor = a[(i, col)].clone();
            for j in 0..a.cols {
                let v = a[(r, j)].clone() * factor.clone();
                a[(i, j)] = a[(i, j)].clone() - v;
            }
            a[(i, col)] = S::zero();
        }
        pivots.push(col);
        r += 1;
    }
    (a, pivots)
}

/// Non-zero rows of the reduced echelon form.
pub fn rref_rows<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    let (a, pivots) = rref(m, rel_tol);
    Matrix::from_fn(pivots.len(), m.cols(), |i, j| a[(i, j)].clone())
}

/// Kernel basis read off the reduced echelon form.
pub fn rref_null_space<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> Matrix<S> {
    let (a, pivots) = rref(m, rel_tol);
    let n = m.cols();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    Matrix::from_fn(free.len(), n, |k, j| {
        let f = free[k];
        if j == f {
            S::one()
        } else if let Some(pr) = pivots.iter().position(|&p| p == j) {
            -a[(pr, f)].clone()
        } else {
            S::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_i64(n)
    }

    #[test]
    fn exact_rank_and_kernel() {
        let m = Matrix::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(1), q(0), q(1)],
        ]);
        assert_eq!(m.rank(0.0), 2);
        let k = BigRational::null_space(&m, 0.0);
        assert_eq!(k.rows(), 1);
        assert!(m.mul_vec(k.row(0)).iter().all(|x| x == &q(0)));
    }

    #[test]
    fn solve_inverse_determinant() {
        let m = Matrix::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(3)]]);
        assert_eq!(m.determinant(), q(5));
        let inv = m.inverse(0.0).unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        let x = m.solve(&[q(3), q(4)], 0.0).unwrap();
        assert_eq!(x, vec![q(1), q(1)]);
        let singular = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert!(singular.solve(&[q(1), q(1)], 0.0).is_none());
    }
}
