use super::cases::{contacts, singular_at_contact, CaseTag, Contacts};
use super::{frame_decompose, make_frame, LocalError};
use crate::config::RunConfig;
use crate::forms::{BinaryForm, QuaternaryForm};
use crate::lines::FanoPoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct CuspCertificate<S> {
    pub tangent_planes_equal: bool,
    pub cuspidal_section: bool,
    /// The tangent plane at the shared contact point, as a covector in the
    /// original coordinates.
    pub plane: [S; 4],
    /// The three 2x2 minors of the tangent data at the two contact points.
    pub minors: [S; 3],
    /// 2-jet of the plane section at the shared contact point, in the
    /// coordinates `(t0, w)` of the plane.
    pub quadratic: BinaryForm<S>,
    /// Whether the cubic term is off the square root of the quadratic term;
    /// only evaluated in strict mode.
    pub cubic_transverse: Option<bool>,
}

/// Tangent-plane and plane-section certificate at a Case 1-1 point. With
/// `strict` the section must also have a nondegenerate 3-jet.
pub fn cusp_certificate<S: Scalar>(
    f: &QuaternaryForm<S>,
    point: &FanoPoint<S>,
    cfg: &RunConfig,
    strict: bool,
) -> Result<CuspCertificate<S>, LocalError> {
    let found = contacts(point, cfg.root_cluster);
    let case = found.case_tag();
    if case != CaseTag::Case11 || !matches!(found, Contacts::Distinct { .. }) {
        return Err(LocalError::WrongCase {
            found: case,
            needed: "Case1-1",
        });
    }
    if singular_at_contact(f, point, &found, 1e-10) {
        return Err(LocalError::SingularAtContact);
    }
    // shared point at (0:1), the other at (1:0)
    let m = found.normalizing_matrix().expect("distinct roots are in the field");
    let normal = point.reparametrize(&m);
    let frame = make_frame(f, &normal)?;
    let dec = frame_decompose(f, &frame)?;
    let d = normal.degree();
    let (x0, y0) = (dec.x(0, d - 1, 0), dec.y(0, d - 1, 0, 0));
    let (xe, ye) = (dec.x(d - 1, 0, 0), dec.y(d - 1, 0, 0, 0));
    let (x1, y1) = (dec.x(1, d - 2, 0), dec.y(1, d - 2, 0, 0));
    let minor = |a: &S, b: &S, c: &S, e: &S| a.clone() * e.clone() - b.clone() * c.clone();
    let minors = [minor(&x0, &xe, &y0, &ye), minor(&x0, &x1, &y0, &y1), minor(&xe, &x1, &ye, &y1)];
    let size = [&x0, &y0, &xe, &ye, &x1, &y1].iter().map(|c| c.magnitude()).fold(0.0, f64::max);
    let tol = cfg.rank_tol;
    let tangent_planes_equal = minors.iter().all(|c| c.is_negligible(size * size, tol));

    // plane x0 s2 + y0 s3 = 0, pulled back through s = B^-1 x
    let cov = [S::zero(), S::zero(), x0.clone(), y0.clone()];
    let plane = std::array::from_fn(|j| {
        (0..4).fold(S::zero(), |acc, i| acc + cov[i].clone() * frame.change_inv[(i, j)].clone())
    });

    // jets of the section in the chart t1 = 1 at (0,1,0,0), along
    // (t2, t3) = w (y0, -x0)
    let big = frame.pull_back(f);
    let jet = |k: u32| -> BinaryForm<S> {
        let coeffs = (0..=k)
            .map(|j| {
                (0..=j).fold(S::zero(), |acc, b| {
                    let c = j - b;
                    let coef = big.coeff([k - j, d - k, b, c]).clone();
                    acc + coef * pow(&y0, b) * pow(&(-x0.clone()), c)
                })
            })
            .collect();
        BinaryForm::new(coeffs)
    };
    let quadratic = jet(2);
    let [alpha, beta, gamma] = [quadratic.coeff(0).clone(), quadratic.coeff(1).clone(), quadratic.coeff(2).clone()];
    let qsize = quadratic.max_magnitude();
    let disc = beta.clone() * beta.clone() - S::from_i64(4) * alpha.clone() * gamma.clone();
    let nonzero = !quadratic.is_negligible(big.max_magnitude() * size * size, tol);
    let square = nonzero && disc.is_negligible(qsize * qsize, tol);
    let cubic_transverse = (strict && square).then(|| {
        // square root l0 t0 + l1 w of the quadratic; its zero is (l1, -l0)
        let two = S::from_i64(2);
        let (l0, l1) = if alpha.magnitude() >= gamma.magnitude() {
            (two * alpha.clone(), beta.clone())
        } else {
            (beta.clone(), two * gamma.clone())
        };
        let cubic = jet(3);
        let at = cubic.eval(&l1, &(-l0.clone()));
        let lsize = l0.magnitude().max(l1.magnitude());
        !at.is_negligible(cubic.max_magnitude() * lsize.powi(3), tol)
    });
    let cuspidal_section = square && cubic_transverse.unwrap_or(true);
    Ok(CuspCertificate {
        tangent_planes_equal,
        cuspidal_section,
        plane,
        minors,
        quadratic,
        cubic_transverse,
    })
}

fn pow<S: Scalar>(x: &S, n: u32) -> S {
    (0..n).fold(S::one(), |acc, _| acc * x.clone())
}
