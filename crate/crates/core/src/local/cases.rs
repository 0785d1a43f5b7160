use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{frame_decompose, make_frame, smoothness_certificate, LocalError};
use crate::config::RunConfig;
use crate::forms::{chordal_distance, root_divisor, BinaryForm, QuaternaryForm};
use crate::linalg::Matrix;
use crate::lines::{line_in_surface, membership_residual, FanoPoint};
use crate::scalar::{numerical_rank, singular_values, Scalar};

/// Incidence pattern of the contact points `p1, p2` (roots of `g`) with the
/// points `q_j` (roots of `h`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    Disjoint,
    #[serde(rename = "Case1-1")]
    Case11,
    #[serde(rename = "Case1-2")]
    Case12,
    #[serde(rename = "Case2-1")]
    Case21,
    #[serde(rename = "Case2-2")]
    Case22,
    LineInY,
    SingularAtContact,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Disjoint => "Disjoint",
            CaseTag::Case11 => "Case1-1",
            CaseTag::Case12 => "Case1-2",
            CaseTag::Case21 => "Case2-1",
            CaseTag::Case22 => "Case2-2",
            CaseTag::LineInY => "LineInY",
            CaseTag::SingularAtContact => "SingularAtContact",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Smooth,
    SingularIsolatedCandidate,
    Excluded,
}

/// Roots of `g` and how often each is a root of `h`.
#[derive(Debug, Clone)]
pub enum Contacts<S> {
    Distinct { points: [[S; 2]; 2], mult_h: [usize; 2] },
    Double { point: [S; 2], mult_h: usize },
    /// Exact backend only: the roots of `g` are conjugate irrationals. Either
    /// both or neither divide `h`.
    Conjugate { divides_h: bool },
}

impl<S: Scalar> Contacts<S> {
    pub fn case_tag(&self) -> CaseTag {
        match self {
            Contacts::Distinct { mult_h, .. } => match mult_h.iter().filter(|&&m| m > 0).count() {
                0 => CaseTag::Disjoint,
                1 => CaseTag::Case11,
                _ => CaseTag::Case12,
            },
            Contacts::Double { mult_h, .. } => match mult_h {
                0 => CaseTag::Disjoint,
                1 => CaseTag::Case21,
                _ => CaseTag::Case22,
            },
            Contacts::Conjugate { divides_h: false } => CaseTag::Disjoint,
            Contacts::Conjugate { divides_h: true } => CaseTag::Case12,
        }
    }

    /// Reparametrization `t = m s` after which `g` is a multiple of `t0 t1`
    /// (the shared point, if exactly one, at `(0:1)`) or of `t0^2`.
    pub fn normalizing_matrix(&self) -> Option<[[S; 2]; 2]> {
        match self {
            Contacts::Distinct { points, mult_h } => {
                let (a, b) = if mult_h[0] > 0 && mult_h[1] == 0 {
                    (&points[1], &points[0])
                } else {
                    (&points[0], &points[1])
                };
                Some([[a[0].clone(), b[0].clone()], [a[1].clone(), b[1].clone()]])
            }
            Contacts::Double { point, .. } => {
                // complete the root to a basis with the better unit vector
                let c = if point[1].magnitude() >= point[0].magnitude() {
                    [S::one(), S::zero()]
                } else {
                    [S::zero(), S::one()]
                };
                Some([[c[0].clone(), point[0].clone()], [c[1].clone(), point[1].clone()]])
            }
            Contacts::Conjugate { .. } => None,
        }
    }
}

fn multiplicity_in<S: Scalar>(h: &BinaryForm<S>, root: &[S; 2], radius: f64) -> usize {
    if h.degree() == 0 {
        return 0;
    }
    if S::EXACT {
        return h.multiplicity_at(&root[0], &root[1], 0.0);
    }
    let r = [root[0].to_c64(), root[1].to_c64()];
    root_divisor(h, radius)
        .map(|clusters| {
            clusters
                .iter()
                .filter(|c| chordal_distance(&c.point, &r) <= radius.sqrt())
                .map(|c| c.multiplicity)
                .sum()
        })
        .unwrap_or(0)
}

/// Reads the incidence pattern off the root divisors of `g` and `h`. Float
/// roots closer than `radius` (chordal) are the same point.
pub fn contacts<S: Scalar>(point: &FanoPoint<S>, radius: f64) -> Contacts<S> {
    let (g, h) = (&point.g, &point.h);
    match g.quadratic_roots() {
        Some(points) => {
            let a = [points[0][0].to_c64(), points[0][1].to_c64()];
            let b = [points[1][0].to_c64(), points[1][1].to_c64()];
            let same = if S::EXACT {
                // roots are equal exactly when the discriminant vanishes
                let c = g.coeffs();
                (c[1].clone() * c[1].clone() - S::from_i64(4) * c[0].clone() * c[2].clone()).is_zero()
            } else {
                chordal_distance(&a, &b) < radius
            };
            if same {
                let [p, _] = points;
                let mult_h = multiplicity_in(h, &p, radius);
                Contacts::Double { point: p, mult_h }
            } else {
                let mult_h = [multiplicity_in(h, &points[0], radius), multiplicity_in(h, &points[1], radius)];
                Contacts::Distinct { points, mult_h }
            }
        }
        None => Contacts::Conjugate {
            divides_h: h.divide_exact(g, 1e-10).is_some(),
        },
    }
}

/// Whether `f` is singular at the point of the line with parameter `root`.
pub(super) fn singular_at<S: Scalar>(f: &QuaternaryForm<S>, point: &FanoPoint<S>, root: &[S; 2], tol: f64) -> bool {
    let x = point.line.point_at(&root[0], &root[1]);
    let grad = f.gradient_at(&x);
    let size = x.iter().map(S::magnitude).fold(0.0, f64::max);
    let scale = f.max_magnitude() * size.powi(f.degree() as i32 - 1);
    grad.iter().all(|c| c.is_negligible(scale, tol))
}

/// Singular at one of the contact points, including conjugate pairs (both
/// are singular when `g` divides every restricted partial).
pub(super) fn singular_at_contact<S: Scalar>(f: &QuaternaryForm<S>, point: &FanoPoint<S>, found: &Contacts<S>, tol: f64) -> bool {
    match found {
        Contacts::Distinct { points, .. } => points.iter().any(|r| singular_at(f, point, r, tol)),
        Contacts::Double { point: r, .. } => singular_at(f, point, r, tol),
        Contacts::Conjugate { .. } => (0..4).all(|k| {
            let partial = point.line.restrict(&f.partial(k));
            partial.is_zero() || partial.divide_exact(&point.g, tol).is_some()
        }),
    }
}

pub(super) fn matrix_rank<S: Scalar>(m: &Matrix<S>, rel_tol: f64) -> usize {
    if S::EXACT {
        return m.rank(rel_tol);
    }
    // rows scaled to unit size so the threshold is relative per equation
    let rows: Vec<Vec<Complex64>> = (0..m.rows())
        .filter_map(|i| {
            let row: Vec<Complex64> = m.row(i).iter().map(S::to_c64).collect();
            let big = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
            (big > 0.0).then(|| row.iter().map(|c| c / big).collect())
        })
        .collect();
    if rows.is_empty() {
        return 0;
    }
    numerical_rank(&singular_values(&Matrix::from_rows(rows)), rel_tol)
}

/// The tabulated matrix `M_Y` of the incidence case together with the rank
/// at which it certifies smoothness. `None` for untabulated patterns or
/// contact points outside the coefficient field.
pub(super) fn case_matrix<S: Scalar>(
    f: &QuaternaryForm<S>,
    point: &FanoPoint<S>,
    found: &Contacts<S>,
    _cfg: &RunConfig,
) -> Result<Option<(Matrix<S>, usize)>, LocalError> {
    let Some(m) = found.normalizing_matrix() else {
        return Ok(None);
    };
    let normal = point.reparametrize(&m);
    let frame = make_frame(f, &normal)?;
    let dec = frame_decompose(f, &frame)?;
    let d = normal.degree();
    let zero = S::zero;
    let x = |a: u32, b: u32| dec.x(a, b, 0);
    let y = |a: u32, b: u32| dec.y(a, b, 0, 0);
    let case = found.case_tag();
    let double = matches!(found, Contacts::Double { .. });
    let rows: Vec<Vec<S>> = match (case, double) {
        (CaseTag::Disjoint, false) => vec![
            vec![x(d - 1, 0), zero()],
            vec![zero(), x(0, d - 1)],
            vec![y(d - 1, 0), zero()],
            vec![zero(), y(0, d - 1)],
        ],
        (CaseTag::Disjoint, true) => vec![
            vec![x(0, d - 1), zero()],
            vec![x(1, d - 2), x(0, d - 1)],
            vec![y(0, d - 1), zero()],
            vec![y(1, d - 2), y(0, d - 1)],
        ],
        (CaseTag::Case11, _) => vec![
            vec![x(d - 1, 0), x(0, d - 1), zero()],
            vec![zero(), x(1, d - 2), x(0, d - 1)],
            vec![y(d - 1, 0), y(0, d - 1), zero()],
            vec![zero(), y(1, d - 2), y(0, d - 1)],
        ],
        (CaseTag::Case12, _) => vec![
            vec![x(d - 1, 0), x(d - 2, 1), x(0, d - 1), zero()],
            vec![zero(), x(d - 1, 0), x(1, d - 2), x(0, d - 1)],
            vec![y(d - 1, 0), y(d - 2, 1), y(0, d - 1), zero()],
            vec![zero(), y(d - 1, 0), y(1, d - 2), y(0, d - 1)],
        ],
        (CaseTag::Case21, _) => vec![
            vec![x(1, d - 2), x(0, d - 1), zero()],
            vec![x(2, d - 3), x(1, d - 2), x(0, d - 1)],
            vec![y(1, d - 2), y(0, d - 1), zero()],
            vec![y(2, d - 3), y(1, d - 2), y(0, d - 1)],
        ],
        (CaseTag::Case22, _) => vec![
            vec![x(2, d - 3), x(1, d - 2), x(0, d - 1), zero()],
            vec![x(3, d - 4), x(2, d - 3), x(1, d - 2), x(0, d - 1)],
            vec![y(2, d - 3), y(1, d - 2), y(0, d - 1), zero()],
            vec![y(3, d - 4), y(2, d - 3), y(1, d - 2), y(0, d - 1)],
        ],
        _ => return Ok(None),
    };
    let need = rows[0].len();
    Ok(Some((Matrix::from_rows(rows), need)))
}

#[derive(Debug, Clone)]
pub struct SingularityReport<S> {
    pub case_tag: CaseTag,
    pub matrix_my: Option<Matrix<S>>,
    pub rank_my: Option<usize>,
    pub required_rank: Option<usize>,
    pub verdict: Verdict,
    pub dim_a: Option<usize>,
    pub dim_ab: Option<usize>,
    /// `h` has no repeated root. Points with colliding `q_j` are reported as
    /// candidates without a finer claim.
    pub distinct_q: bool,
    /// `Y` is singular at a contact point.
    pub singular_contact: bool,
}

impl<S> SingularityReport<S> {
    fn excluded(case_tag: CaseTag) -> Self {
        SingularityReport {
            case_tag,
            matrix_my: None,
            rank_my: None,
            required_rank: None,
            verdict: Verdict::Excluded,
            dim_a: None,
            dim_ab: None,
            distinct_q: false,
            singular_contact: false,
        }
    }
}

/// Degree of the gcd of two polynomials given by coefficient lists (index =
/// power of the variable), by exact Euclid.
fn poly_gcd_degree<S: Scalar>(mut a: Vec<S>, mut b: Vec<S>) -> usize {
    let trim = |v: &mut Vec<S>| {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a <- a mod b
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let c = a.last().expect("nonempty").clone() / b.last().expect("nonempty").clone();
            for (i, bi) in b.iter().enumerate() {
                a[i + shift] = a[i + shift].clone() - c.clone() * bi.clone();
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

fn distinct_roots<S: Scalar>(h: &BinaryForm<S>, radius: f64) -> bool {
    let k = h.degree();
    if k <= 1 {
        return true;
    }
    if S::EXACT {
        // a double root at (1:0) means t0^2 | h; affine roots are roots of
        // h(1, t1), repeated exactly when they are shared with the derivative
        if h.coeff(k).is_zero() && h.coeff(k - 1).is_zero() {
            return false;
        }
        let p = h.coeffs().to_vec();
        let dp: Vec<S> = (1..=k).map(|i| S::from_i64(i as i64) * p[i].clone()).collect();
        return poly_gcd_degree(p, dp) == 0;
    }
    root_divisor(h, radius).map(|c| c.iter().all(|r| r.multiplicity == 1)).unwrap_or(false)
}

/// Places `P` in the singularity taxonomy. Points on lines inside `Y` and
/// points where `Y` is singular at a contact point are tagged and excluded
/// rather than rejected, so that callers can report them.
pub fn classify_singularity<S: Scalar>(
    f: &QuaternaryForm<S>,
    point: &FanoPoint<S>,
    cfg: &RunConfig,
) -> Result<SingularityReport<S>, LocalError> {
    if line_in_surface(f, &point.line) {
        return Ok(SingularityReport::excluded(CaseTag::LineInY));
    }
    let distance = membership_residual(f, point)?;
    if distance > super::MEMBERSHIP_TOL {
        return Err(LocalError::NotAMember(distance));
    }
    let found = contacts(point, cfg.root_cluster);
    let singular_contact = singular_at_contact(f, point, &found, 1e-10);
    let cert = smoothness_certificate(f, point, cfg)?;
    if singular_contact && cert.case == CaseTag::Disjoint {
        // nodal degenerations: the pencil analysis takes these
        let mut report = SingularityReport::excluded(CaseTag::SingularAtContact);
        report.singular_contact = true;
        report.dim_a = Some(cert.dim_a);
        report.dim_ab = Some(cert.dim_ab);
        return Ok(report);
    }
    let verdict = match (cert.rank_my, cert.required_rank) {
        (Some(r), Some(need)) if r >= need => Verdict::Smooth,
        (Some(_), Some(_)) => Verdict::SingularIsolatedCandidate,
        _ if cert.smooth => Verdict::Smooth,
        _ => Verdict::SingularIsolatedCandidate,
    };
    Ok(SingularityReport {
        case_tag: cert.case,
        matrix_my: cert.matrix_my,
        rank_my: cert.rank_my,
        required_rank: cert.required_rank,
        verdict,
        dim_a: Some(cert.dim_a),
        dim_ab: Some(cert.dim_ab),
        distinct_q: distinct_roots(&point.h, cfg.root_cluster),
        singular_contact,
    })
}
