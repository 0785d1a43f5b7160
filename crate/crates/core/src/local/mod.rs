//! Local theory at a Fano point: adapted frames, the spans `A_P` and `B_Y`,
//! the case matrices `M_Y`, singularity classification, the cusp certificate
//! and the quadratic form at nodal degenerations.

mod cases;
mod cusp;
mod planted;
mod rank_two;

use rand::Rng;
use thiserror::Error;

use crate::config::RunConfig;
use crate::forms::{multiples, BinaryForm, FormSpan, QuaternaryForm};
use crate::linalg::Matrix;
use crate::lines::{line_in_surface, FanoPoint, LinesError};
use crate::scalar::Scalar;

pub use cases::{classify_singularity, contacts, CaseTag, Contacts, SingularityReport, Verdict};
pub use cusp::{cusp_certificate, CuspCertificate};
pub use planted::Planted;
pub use rank_two::{rank_two_form, RankTwoReport};

/// Float decompositions accept points within this projective distance of the
/// congruence.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LocalError {
    #[error("the line lies on the surface")]
    LineInY,
    #[error("the point is off the congruence (distance {0:e})")]
    NotAMember(f64),
    #[error("the surface is singular at a contact point")]
    SingularAtContact,
    #[error("incidence pattern {found} where {needed} is required")]
    WrongCase { found: CaseTag, needed: &'static str },
    #[error("the frame is not valid: {0}")]
    InvalidFrame(&'static str),
    #[error("the given point is not a singular contact point of the line")]
    NotANode,
    #[error("dim V = {0}, expected 3")]
    DegenerateV(usize),
    #[error(transparent)]
    Lines(#[from] LinesError),
}

/// Coordinates `x = B s` in which the line is `s2 = s3 = 0`, together with
/// complements of `g` in degree 2 and of `h` in degree `d - 4`.
#[derive(Debug, Clone)]
pub struct AdaptedFrame<S> {
    pub point: FanoPoint<S>,
    pub change: Matrix<S>,
    pub change_inv: Matrix<S>,
    pub r: [BinaryForm<S>; 2],
    pub s: Vec<BinaryForm<S>>,
}

/// Optional overrides for [`make_frame_with`]; unset fields get the default
/// choices of [`make_frame`].
#[derive(Debug, Clone)]
pub struct FrameChoice<S> {
    pub normals: Option<[[S; 4]; 2]>,
    pub r: Option<[BinaryForm<S>; 2]>,
    pub s: Option<Vec<BinaryForm<S>>>,
}

impl<S> Default for FrameChoice<S> {
    fn default() -> Self {
        FrameChoice {
            normals: None,
            r: None,
            s: None,
        }
    }
}

impl<S: Scalar> AdaptedFrame<S> {
    pub fn degree(&self) -> u32 {
        self.point.degree()
    }

    pub fn g(&self) -> &BinaryForm<S> {
        &self.point.g
    }

    pub fn h(&self) -> &BinaryForm<S> {
        &self.point.h
    }

    /// The surface in frame coordinates.
    pub fn pull_back(&self, f: &QuaternaryForm<S>) -> QuaternaryForm<S> {
        f.substitute(&self.change)
    }
}

/// Monomials of degree `k` other than the pivot of `b` (its largest
/// coefficient, first on ties).
fn echelon_complement<S: Scalar>(b: &BinaryForm<S>) -> Vec<BinaryForm<S>> {
    let k = b.degree();
    let mut pivot = 0;
    for i in 0..=k {
        if b.coeff(i).magnitude() > b.coeff(pivot).magnitude() {
            pivot = i;
        }
    }
    (0..=k).filter(|&i| i != pivot).map(|i| BinaryForm::monomial(k, i)).collect()
}

pub fn make_frame<S: Scalar>(f: &QuaternaryForm<S>, point: &FanoPoint<S>) -> Result<AdaptedFrame<S>, LocalError> {
    make_frame_with(f, point, FrameChoice::default())
}

pub fn make_frame_with<S: Scalar>(
    f: &QuaternaryForm<S>,
    point: &FanoPoint<S>,
    choice: FrameChoice<S>,
) -> Result<AdaptedFrame<S>, LocalError> {
    if line_in_surface(f, &point.line) {
        return Err(LocalError::LineInY);
    }
    let (p, q) = (&point.line.p, &point.line.q);
    let column = |v: &[S; 4]| v.to_vec();
    let normals = match choice.normals {
        Some(n) => n,
        None => {
            // the pair of unit vectors completing p, q best
            let unit = |i: usize| std::array::from_fn(|k| if k == i { S::one() } else { S::zero() });
            let mut best: Option<(f64, [[S; 4]; 2])> = None;
            for i in 0..4 {
                for j in i + 1..4 {
                    let n = [unit(i), unit(j)];
                    let m = Matrix::from_columns(&[column(p), column(q), column(&n[0]), column(&n[1])]);
                    let det = m.determinant().magnitude();
                    if best.as_ref().is_none_or(|(b, _)| det > *b) {
                        best = Some((det, n));
                    }
                }
            }
            best.expect("six pairs").1
        }
    };
    let change = Matrix::from_columns(&[column(p), column(q), column(&normals[0]), column(&normals[1])]);
    if change.determinant().is_negligible(1.0, 1e-12) {
        return Err(LocalError::InvalidFrame("line and normals do not span"));
    }
    let change_inv = change.inverse(1e-14).ok_or(LocalError::InvalidFrame("singular change"))?;
    let r = match choice.r {
        Some(r) => r,
        None => {
            let c = echelon_complement(&point.g);
            [c[0].clone(), c[1].clone()]
        }
    };
    let s = choice.s.unwrap_or_else(|| echelon_complement(&point.h));
    let tol = 1e-10;
    let mut gr = vec![point.g.clone()];
    gr.extend(r.iter().cloned());
    if r.iter().any(|x| x.degree() != 2) || FormSpan::new(2, &gr, tol).dim() != 3 {
        return Err(LocalError::InvalidFrame("g, r1, r2 do not span"));
    }
    let k = point.h.degree();
    let mut hs = vec![point.h.clone()];
    hs.extend(s.iter().cloned());
    if s.len() != k || s.iter().any(|x| x.degree() != k) || FormSpan::new(k, &hs, tol).dim() != k + 1 {
        return Err(LocalError::InvalidFrame("h, s_j do not span"));
    }
    Ok(AdaptedFrame {
        point: point.clone(),
        change,
        change_inv,
        r,
        s,
    })
}

/// Random valid overrides with small integer entries: normals, complements
/// of `g` and complements of `h`.
pub fn random_frame_choice<S: Scalar>(point: &FanoPoint<S>, rng: &mut impl Rng) -> FrameChoice<S> {
    let int = |rng: &mut dyn rand::RngCore| S::from_i64(rng.random_range(-3..=3));
    let normals = [std::array::from_fn(|_| int(rng)), std::array::from_fn(|_| int(rng))];
    let rand_form = |k: usize, rng: &mut dyn rand::RngCore| BinaryForm::new((0..=k).map(|_| int(rng)).collect());
    let r = [rand_form(2, rng), rand_form(2, rng)];
    let k = point.h.degree();
    let s = (0..k).map(|_| rand_form(k, rng)).collect();
    FrameChoice {
        normals: Some(normals),
        r: Some(r),
        s: Some(s),
    }
}

/// `f = lambda g^2 h + t2 gbar + t3 hbar` in frame coordinates, with `gbar`
/// free of `t3`.
#[derive(Debug, Clone)]
pub struct FrameDecomposition<S> {
    pub lambda: S,
    pub gbar: QuaternaryForm<S>,
    pub hbar: QuaternaryForm<S>,
    /// `gbar(t0, t1, 0)`.
    pub g_line: BinaryForm<S>,
    /// `hbar(t0, t1, 0, 0)`.
    pub h_line: BinaryForm<S>,
    /// Size of whatever is left on the line itself (zero on exact input).
    pub residual: f64,
}

impl<S: Scalar> FrameDecomposition<S> {
    pub fn degree(&self) -> u32 {
        self.gbar.degree() + 1
    }

    /// `x_{i0,i1,i2}`, the coefficient of `t0^i0 t1^i1 t2^i2` in `gbar`.
    pub fn x(&self, i0: u32, i1: u32, i2: u32) -> S {
        self.gbar.coeff([i0, i1, i2, 0]).clone()
    }

    /// `y_{i0,i1,i2,i3}`, the coefficient in `hbar`.
    pub fn y(&self, i0: u32, i1: u32, i2: u32, i3: u32) -> S {
        self.hbar.coeff([i0, i1, i2, i3]).clone()
    }

    /// `lambda g^2 h + t2 gbar + t3 hbar`, in frame coordinates.
    pub fn reconstruct(&self, point: &FanoPoint<S>) -> QuaternaryForm<S> {
        let t2 = QuaternaryForm::variable(2);
        let t3 = QuaternaryForm::variable(3);
        QuaternaryForm::from_binary(&point.divisor_form())
            .scale(&self.lambda)
            .add(&t2.mul(&self.gbar))
            .add(&t3.mul(&self.hbar))
    }
}

pub fn frame_decompose<S: Scalar>(
    f: &QuaternaryForm<S>,
    frame: &AdaptedFrame<S>,
) -> Result<FrameDecomposition<S>, LocalError> {
    let big = frame.pull_back(f);
    let on_line = big.on_base_line();
    if on_line.is_zero() {
        return Err(LocalError::LineInY);
    }
    let target = frame.point.divisor_form();
    let mut k = 0;
    for i in 0..on_line.coeffs().len() {
        if on_line.coeff(i).magnitude() > on_line.coeff(k).magnitude() {
            k = i;
        }
    }
    if target.coeff(k).is_zero() {
        return Err(LocalError::NotAMember(1.0));
    }
    let lambda = on_line.coeff(k).clone() / target.coeff(k).clone();
    let left = on_line.sub(&target.scale(&lambda));
    let distance = if S::EXACT {
        if left.is_zero() {
            0.0
        } else {
            on_line.to_c64().projective_distance(&target.to_c64())
        }
    } else {
        on_line.to_c64().projective_distance(&target.to_c64())
    };
    if distance > MEMBERSHIP_TOL || (S::EXACT && distance > 0.0) {
        return Err(LocalError::NotAMember(distance));
    }
    let rest = big.sub(&QuaternaryForm::from_binary(&target).scale(&lambda));
    let (rest, hbar) = rest.split_by_variable(3);
    let (along, gbar) = rest.split_by_variable(2);
    let residual = along.max_magnitude() / big.max_magnitude();
    let g_line = gbar.on_base_line();
    let h_line = hbar.on_base_line();
    Ok(FrameDecomposition {
        lambda,
        gbar,
        hbar,
        g_line,
        h_line,
        residual,
    })
}

/// Generators of `A_P`: `g^2 h`, `g r_i h`, `g^2 s_j`.
pub fn a_generators<S: Scalar>(frame: &AdaptedFrame<S>) -> Vec<BinaryForm<S>> {
    let (g, h) = (frame.g(), frame.h());
    let g2 = g.mul(g);
    let mut out = vec![g2.mul(h)];
    out.extend(frame.r.iter().map(|r| g.mul(r).mul(h)));
    out.extend(frame.s.iter().map(|s| g2.mul(s)));
    out
}

/// Generators of `B_Y`: `g^2 h`, `t0 g_{d-1}`, `t1 g_{d-1}`, `t0 h_{d-1}`, `t1 h_{d-1}`.
pub fn b_generators<S: Scalar>(dec: &FrameDecomposition<S>, frame: &AdaptedFrame<S>) -> Vec<BinaryForm<S>> {
    let mut out = vec![frame.point.divisor_form()];
    for line in [&dec.g_line, &dec.h_line] {
        out.extend(multiples(line, 1));
    }
    out
}

pub fn subspace_a<S: Scalar>(frame: &AdaptedFrame<S>, rel_tol: f64) -> FormSpan<S> {
    FormSpan::new(frame.degree() as usize, &a_generators(frame), rel_tol)
}

pub fn subspace_b<S: Scalar>(dec: &FrameDecomposition<S>, frame: &AdaptedFrame<S>, rel_tol: f64) -> FormSpan<S> {
    FormSpan::new(frame.degree() as usize, &b_generators(dec, frame), rel_tol)
}

/// Float spans are measured on rescaled generators so that the rank
/// threshold does not see the overall size of `f`, `g` or `h`.
fn span_of<S: Scalar>(degree: usize, forms: &[BinaryForm<S>], rel_tol: f64) -> FormSpan<S> {
    if S::EXACT {
        return FormSpan::new(degree, forms, rel_tol);
    }
    let scaled: Vec<BinaryForm<S>> = forms
        .iter()
        .filter(|b| b.max_magnitude() > 0.0)
        .map(|b| b.normalized())
        .collect();
    FormSpan::new(degree, &scaled, rel_tol)
}

#[derive(Debug, Clone)]
pub struct SmoothnessCertificate<S> {
    pub degree: u32,
    pub dim_a: usize,
    pub dim_ab: usize,
    pub immersed: bool,
    pub smooth: bool,
    pub case: CaseTag,
    /// The tabulated matrix of the incidence case, when the contact points
    /// are defined over the coefficient field.
    pub matrix_my: Option<Matrix<S>>,
    pub rank_my: Option<usize>,
    pub required_rank: Option<usize>,
}

pub fn smoothness_certificate<S: Scalar>(
    f: &QuaternaryForm<S>,
    point: &FanoPoint<S>,
    cfg: &RunConfig,
) -> Result<SmoothnessCertificate<S>, LocalError> {
    let d = point.degree();
    let frame = make_frame(f, point)?;
    let dec = frame_decompose(f, &frame)?;
    let deg = d as usize;
    let a_gens = a_generators(&frame);
    let dim_a = span_of(deg, &a_gens, cfg.rank_tol).dim();
    let mut all = a_gens;
    all.extend(b_generators(&dec, &frame));
    let dim_ab = span_of(deg, &all, cfg.rank_tol).dim();
    let found = contacts(point, cfg.root_cluster);
    let case = found.case_tag();
    let tabulated = cases::case_matrix(f, point, &found, cfg)?;
    let (matrix_my, rank_my, required_rank) = match tabulated {
        Some((m, need)) => {
            let r = cases::matrix_rank(&m, cfg.rank_tol);
            (Some(m), Some(r), Some(need))
        }
        None => (None, None, None),
    };
    Ok(SmoothnessCertificate {
        degree: d,
        dim_a,
        dim_ab,
        immersed: dim_a == deg - 1,
        smooth: dim_ab == deg + 1,
        case,
        matrix_my,
        rank_my,
        required_rank,
    })
}
