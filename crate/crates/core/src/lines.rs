//! Lines in P^3, Fano points and Schubert slices.

use num_complex::Complex64;

use crate::forms::{chordal_distance, BinaryForm, QuaternaryForm};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinesError {
    #[error("the line lies on the surface")]
    LineInY,
    #[error("degenerate line: spanning points are dependent")]
    DegenerateLine,
    #[error("g must have degree 2 and h degree {expected}, got {g} and {h}")]
    WrongDegrees { g: usize, h: usize, expected: usize },
    #[error("g or h is the zero form")]
    ZeroForm,
}

/// The line `t2 = a0 t0 + a1 t1, t3 = b0 t0 + b1 t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineChart<S> {
    pub a0: S,
    pub a1: S,
    pub b0: S,
    pub b1: S,
}

impl<S: Scalar> LineChart<S> {
    pub fn new(a0: S, a1: S, b0: S, b1: S) -> Self {
        LineChart { a0, a1, b0, b1 }
    }

    /// Spanned by `(1, 0, a0, b0)` and `(0, 1, a1, b1)`; the parameter
    /// `(t0 : t1)` of the resulting [`ParamLine`] is the chart's own.
    pub fn to_param(&self) -> ParamLine<S> {
        let (z, o) = (S::zero(), S::one());
        ParamLine {
            p: [o.clone(), z.clone(), self.a0.clone(), self.b0.clone()],
            q: [z, o, self.a1.clone(), self.b1.clone()],
        }
    }

    pub fn to_plucker(&self) -> PluckerLine<S> {
        self.to_param().plucker()
    }
}

/// A line given by two spanning points; its points are `t0 p + t1 q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLine<S> {
    pub p: [S; 4],
    pub q: [S; 4],
}

impl<S: Scalar> ParamLine<S> {
    pub fn new(p: [S; 4], q: [S; 4]) -> Self {
        ParamLine { p, q }
    }

    /// The base line `t2 = t3 = 0`.
    pub fn base() -> Self {
        LineChart::new(S::zero(), S::zero(), S::zero(), S::zero()).to_param()
    }

    pub fn point_at(&self, t0: &S, t1: &S) -> [S; 4] {
        std::array::from_fn(|k| t0.clone() * self.p[k].clone() + t1.clone() * self.q[k].clone())
    }

    pub fn plucker(&self) -> PluckerLine<S> {
        let (x, y) = (&self.p, &self.q);
        let m = |i: usize, j: usize| x[i].clone() * y[j].clone() - x[j].clone() * y[i].clone();
        PluckerLine {
            coords: [m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3)],
        }
    }

    /// `f(t0 p + t1 q)`.
    pub fn restrict(&self, f: &QuaternaryForm<S>) -> BinaryForm<S> {
        f.restrict(&self.p, &self.q)
    }

    /// The chart of this line when it is transverse to `t0 = t1 = 0`. The
    /// chart's parameter differs from this line's by an invertible 2x2 change.
    pub fn chart(&self, rel_tol: f64) -> Option<LineChart<S>> {
        self.plucker().chart(rel_tol)
    }

    /// Image under `x -> B^{-1} x`, i.e. the same line in the coordinates `s`
    /// with `x = B s`. The parameter is unchanged.
    pub fn transform(&self, b_inv: &Matrix<S>) -> Self {
        let map = |v: &[S; 4]| {
            let w = b_inv.mul_vec(v);
            [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()]
        };
        ParamLine {
            p: map(&self.p),
            q: map(&self.q),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ParamLine<T> {
        ParamLine {
            p: std::array::from_fn(|k| f(&self.p[k])),
            q: std::array::from_fn(|k| f(&self.q[k])),
        }
    }

    pub fn to_c64(&self) -> ParamLine<Complex64> {
        self.map(S::to_c64)
    }
}

/// Plücker coordinates `(p01, p02, p03, p12, p13, p23)` up to scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerLine<S> {
    pub coords: [S; 6],
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl<S: Scalar> PluckerLine<S> {
    /// `p01 p23 - p02 p13 + p03 p12`.
    pub fn relation(&self) -> S {
        let c = &self.coords;
        c[0].clone() * c[5].clone() - c[1].clone() * c[4].clone() + c[2].clone() * c[3].clone()
    }

    /// Relation value after scaling to unit max entry.
    pub fn relation_residual(&self) -> f64 {
        let m = self.coords.iter().map(S::magnitude).fold(0.0, f64::max);
        if m == 0.0 {
            return f64::INFINITY;
        }
        self.relation().magnitude() / (m * m)
    }

    pub fn is_degenerate(&self) -> bool {
        self.coords.iter().all(S::is_zero)
    }

    /// `p_ij` with antisymmetry.
    pub fn get(&self, i: usize, j: usize) -> S {
        if i == j {
            return S::zero();
        }
        let (a, b, sign) = if i < j { (i, j, false) } else { (j, i, true) };
        let k = PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair");
        if sign {
            -self.coords[k].clone()
        } else {
            self.coords[k].clone()
        }
    }

    /// Chart recovery: `a0 = -p12/p01, a1 = p02/p01, b0 = -p13/p01, b1 = p03/p01`.
    pub fn chart(&self, rel_tol: f64) -> Option<LineChart<S>> {
        let scale = self.coords.iter().map(S::magnitude).fold(0.0, f64::max);
        let p01 = self.coords[0].clone();
        if p01.is_negligible(scale, rel_tol.max(if S::EXACT { 0.0 } else { 1e-12 })) {
            return None;
        }
        let c = &self.coords;
        Some(LineChart {
            a0: -c[3].clone() / p01.clone(),
            a1: c[1].clone() / p01.clone(),
            b0: -c[4].clone() / p01.clone(),
            b1: c[2].clone() / p01,
        })
    }

    /// Two spanning points read off the largest coordinate `p_ij`: the
    /// vectors `(p_ik)_k` and `(p_jk)_k` both lie on the line.
    pub fn to_param(&self) -> Option<ParamLine<S>> {
        let (k, _) = self
            .coords
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.magnitude().total_cmp(&b.1.magnitude()))?;
        if self.coords[k].is_zero() {
            return None;
        }
        let (i, j) = PAIRS[k];
        Some(ParamLine {
            p: std::array::from_fn(|m| self.get(i, m)),
            q: std::array::from_fn(|m| self.get(j, m)),
        })
    }

    /// Unit vector with the largest entry real positive (float comparison).
    pub fn normalized_c64(&self) -> [Complex64; 6] {
        let c: Vec<Complex64> = self.coords.iter().map(S::to_c64).collect();
        normalize_vec(&c).try_into().expect("six entries")
    }
}

pub(crate) fn normalize_vec(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return v.to_vec();
    }
    let big = v.iter().cloned().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("non-empty");
    let phase = big.conj() / big.norm();
    v.iter().map(|x| x * phase / n).collect()
}

/// Chordal distance between two points of a projective space.
pub fn projective_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let cos2 = (inner.norm() / (na * nb)).min(1.0).powi(2);
    (1.0 - cos2).max(0.0).sqrt()
}

/// A point of the Fano congruence: a line with a degree-2 divisor `[g]` and a
/// degree-`(d-4)` divisor `[h]`, both written in the line's parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct FanoPoint<S> {
    pub line: ParamLine<S>,
    pub g: BinaryForm<S>,
    pub h: BinaryForm<S>,
}

impl<S: Scalar> FanoPoint<S> {
    pub fn new(line: ParamLine<S>, g: BinaryForm<S>, h: BinaryForm<S>, d: u32) -> Result<Self, LinesError> {
        let expected = d as usize - 4;
        if g.degree() != 2 || h.degree() != expected {
            return Err(LinesError::WrongDegrees {
                g: g.degree(),
                h: h.degree(),
                expected,
            });
        }
        if g.is_zero() || h.is_zero() {
            return Err(LinesError::ZeroForm);
        }
        Ok(FanoPoint { line, g, h })
    }

    pub fn degree(&self) -> u32 {
        self.h.degree() as u32 + 4
    }

    /// `g^2 h`.
    pub fn divisor_form(&self) -> BinaryForm<S> {
        self.g.mul(&self.g).mul(&self.h)
    }

    /// The same point in coordinates `s` with `x = B s`.
    pub fn transform(&self, b_inv: &Matrix<S>) -> Self {
        FanoPoint {
            line: self.line.transform(b_inv),
            g: self.g.clone(),
            h: self.h.clone(),
        }
    }

    /// Reparametrize by `t = m s`: the line becomes `s0 p' + s1 q'` with
    /// `p' = m00 p + m10 q, q' = m01 p + m11 q`, and the forms are substituted.
    pub fn reparametrize(&self, m: &[[S; 2]; 2]) -> Self {
        let l = &self.line;
        let p = std::array::from_fn(|k| m[0][0].clone() * l.p[k].clone() + m[1][0].clone() * l.q[k].clone());
        let q = std::array::from_fn(|k| m[0][1].clone() * l.p[k].clone() + m[1][1].clone() * l.q[k].clone());
        FanoPoint {
            line: ParamLine { p, q },
            g: self.g.substitute(m),
            h: self.h.substitute(m),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> FanoPoint<T> {
        FanoPoint {
            line: self.line.map(f),
            g: self.g.map(f),
            h: self.h.map(f),
        }
    }

    pub fn to_c64(&self) -> FanoPoint<Complex64> {
        self.map(S::to_c64)
    }
}

/// `f|l` vanishes identically, relative to the size of `f` and the line.
pub fn line_in_surface<S: Scalar>(f: &QuaternaryForm<S>, line: &ParamLine<S>) -> bool {
    let b = line.restrict(f);
    if S::EXACT {
        return b.is_zero();
    }
    let pn = line.p.iter().map(S::magnitude).fold(0.0, f64::max);
    let qn = line.q.iter().map(S::magnitude).fold(0.0, f64::max);
    let scale = f.max_magnitude() * (pn + qn).powi(f.degree() as i32);
    b.max_magnitude() <= 1e-12 * scale
}

/// Distance of `P` from the Fano congruence of `Y`: both `f|l` and `g^2 h`
/// are scaled to unit max coefficient, and the max-norm mismatch is taken at
/// the best unit phase. Zero exactly when `P` lies on `S(Y)`.
pub fn membership_residual<S: Scalar>(f: &QuaternaryForm<S>, point: &FanoPoint<S>) -> Result<f64, LinesError> {
    if line_in_surface(f, &point.line) {
        return Err(LinesError::LineInY);
    }
    let b = point.line.restrict(f);
    if S::EXACT {
        // Exact proportionality check, reported as 0 or the float distance.
        let target = point.divisor_form();
        let k = (0..b.coeffs().len()).find(|&i| !target.coeff(i).is_zero());
        if let Some(k) = k {
            let lambda = b.coeff(k).clone() / target.coeff(k).clone();
            if b.sub(&target.scale(&lambda)).is_zero() {
                return Ok(0.0);
            }
        }
    }
    Ok(b.to_c64().projective_distance(&point.divisor_form().to_c64()))
}

/// A two-parameter family of lines realizing a Schubert condition.
#[derive(Debug, Clone, PartialEq)]
pub enum SchubertSlice<S> {
    /// Lines through `point`: `span(point, w0 + u0 w1 + u1 w2)`, where the
    /// `w` complete `point` to a basis.
    ThroughPoint { point: [S; 4], frame: [[S; 4]; 3] },
    /// Lines in the plane `plane . x = 0`: `span(w1 + u0 w0, w2 + u1 w0)`,
    /// where the `w` span the plane.
    InPlane { plane: [S; 4], frame: [[S; 4]; 3] },
}

fn unit<S: Scalar>(k: usize) -> [S; 4] {
    std::array::from_fn(|i| if i == k { S::one() } else { S::zero() })
}

impl<S: Scalar> SchubertSlice<S> {
    /// Lines through `q`, with the standard basis vectors other than the
    /// largest entry of `q` as the complement.
    pub fn through_point(q: [S; 4]) -> Self {
        let big = (0..4).max_by(|&a, &b| q[a].magnitude().total_cmp(&q[b].magnitude())).expect("4 entries");
        let others: Vec<usize> = (0..4).filter(|&k| k != big).collect();
        SchubertSlice::ThroughPoint {
            point: q,
            frame: [unit(others[0]), unit(others[1]), unit(others[2])],
        }
    }

    /// Lines in the plane `H . x = 0`.
    pub fn in_plane(h: [S; 4]) -> Self {
        let big = (0..4).max_by(|&a, &b| h[a].magnitude().total_cmp(&h[b].magnitude())).expect("4 entries");
        let others: Vec<usize> = (0..4).filter(|&k| k != big).collect();
        // e_k - (h_k / h_big) e_big lies in the plane
        let w = |k: usize| -> [S; 4] {
            std::array::from_fn(|i| {
                if i == k {
                    S::one()
                } else if i == big {
                    -h[k].clone() / h[big].clone()
                } else {
                    S::zero()
                }
            })
        };
        let frame = [w(others[0]), w(others[1]), w(others[2])];
        SchubertSlice::InPlane { plane: h, frame }
    }

    /// The line with chart parameter `u`. Chart `c` in `0..3` rotates which
    /// frame vector is the base, so the three charts together cover every
    /// line of the slice.
    pub fn line(&self, u: &[S; 2], c: usize) -> ParamLine<S> {
        let comb = |base: &[S; 4], a: &[S; 4], b: &[S; 4], ua: &S, ub: &S| -> [S; 4] {
            std::array::from_fn(|i| base[i].clone() + ua.clone() * a[i].clone() + ub.clone() * b[i].clone())
        };
        let z = S::zero();
        match self {
            SchubertSlice::ThroughPoint { point, frame } => {
                let w = rotate(frame, c);
                ParamLine {
                    p: point.clone(),
                    q: comb(&w[0], &w[1], &w[2], &u[0], &u[1]),
                }
            }
            SchubertSlice::InPlane { frame, .. } => {
                let w = rotate(frame, c);
                ParamLine {
                    p: comb(&w[1], &w[0], &w[2], &u[0], &z),
                    q: comb(&w[2], &w[0], &w[1], &u[1], &z),
                }
            }
        }
    }

    /// Incidence of a line with the slice's defining point or plane.
    pub fn incidence_residual(&self, line: &ParamLine<S>) -> S {
        match self {
            SchubertSlice::ThroughPoint { point, .. } => {
                // rank of [p; q; point] is 2: all 3x3 minors vanish; sum of
                // squares would need conjugation, so return the largest minor.
                let m = Matrix::from_rows(vec![line.p.to_vec(), line.q.to_vec(), point.to_vec()]);
                let mut worst = S::zero();
                for skip in 0..4 {
                    let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
                    let sub = Matrix::from_fn(3, 3, |i, j| m[(i, cols[j])].clone());
                    let det = sub.determinant();
                    if det.magnitude() > worst.magnitude() {
                        worst = det;
                    }
                }
                worst
            }
            SchubertSlice::InPlane { plane, .. } => {
                let dot = |v: &[S; 4]| (0..4).fold(S::zero(), |acc, i| acc + plane[i].clone() * v[i].clone());
                let (a, b) = (dot(&line.p), dot(&line.q));
                if a.magnitude() >= b.magnitude() {
                    a
                } else {
                    b
                }
            }
        }
    }

    pub fn is_through_point(&self) -> bool {
        matches!(self, SchubertSlice::ThroughPoint { .. })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> SchubertSlice<T> {
        let v = |x: &[S; 4]| -> [T; 4] { std::array::from_fn(|i| f(&x[i])) };
        match self {
            SchubertSlice::ThroughPoint { point, frame } => SchubertSlice::ThroughPoint {
                point: v(point),
                frame: [v(&frame[0]), v(&frame[1]), v(&frame[2])],
            },
            SchubertSlice::InPlane { plane, frame } => SchubertSlice::InPlane {
                plane: v(plane),
                frame: [v(&frame[0]), v(&frame[1]), v(&frame[2])],
            },
        }
    }
}

fn rotate<S: Clone>(w: &[[S; 4]; 3], c: usize) -> [[S; 4]; 3] {
    let c = c % 3;
    [w[c].clone(), w[(c + 1) % 3].clone(), w[(c + 2) % 3].clone()]
}

/// Chordal distance between two lines via normalized Plücker vectors.
pub fn line_distance(a: &PluckerLine<Complex64>, b: &PluckerLine<Complex64>) -> f64 {
    projective_distance(&a.coords, &b.coords)
}

/// Chordal distance of two points of P^1 given as arrays.
pub fn p1_distance(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    chordal_distance(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    #[test]
    fn base_chart_plucker() {
        let pl = LineChart::new(q(0), q(0), q(0), q(0)).to_plucker();
        assert_eq!(pl.coords, [q(1), q(0), q(0), q(0), q(0), q(0)]);
        let pl = LineChart::new(q(1), q(0), q(0), q(0)).to_plucker();
        // span of (1,0,1,0), (0,1,0,0)
        assert_eq!(pl.coords, [q(1), q(0), q(0), q(-1), q(0), q(0)]);
    }

    #[test]
    fn chart_round_trip() {
        let c = LineChart::new(q(3), Q::from_ratio(-1, 2), q(7), q(2));
        let pl = c.to_plucker();
        assert!(pl.relation().is_zero());
        assert_eq!(pl.chart(0.0).unwrap(), c);
    }

    #[test]
    fn slice_examples() {
        let s = SchubertSlice::through_point([q(1), q(0), q(0), q(0)]);
        let l = s.line(&[q(0), q(0)], 0);
        assert_eq!(l.plucker().chart(0.0).unwrap(), LineChart::new(q(0), q(0), q(0), q(0)));
        let s = SchubertSlice::in_plane([q(0), q(0), q(0), q(1)]);
        let pl = s.line(&[q(2), q(-5)], 0).plucker();
        assert!(pl.coords[2].is_zero() && pl.coords[4].is_zero() && pl.coords[5].is_zero());
    }

    #[test]
    fn plucker_to_param_spans_same_line() {
        let l = ParamLine::new([q(1), q(2), q(0), q(-1)], [q(0), q(3), q(1), q(1)]);
        let back = l.plucker().to_param().unwrap();
        let a = l.plucker();
        let b = back.plucker();
        // proportional Plücker vectors
        let k = (0..6).find(|&i| !a.coords[i].is_zero()).unwrap();
        let r = b.coords[k].clone() / a.coords[k].clone();
        for i in 0..6 {
            assert_eq!(b.coords[i], a.coords[i].clone() * r.clone());
        }
    }
}
