use super::cases::matrix_rank;
use super::{frame_decompose, make_frame, LocalError, MEMBERSHIP_TOL};
use crate::config::RunConfig;
use crate::forms::{BinaryForm, QuaternaryForm};
use crate::linalg::Matrix;
use crate::lines::{membership_residual, FanoPoint};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RankTwoReport<S> {
    pub dim_v: usize,
    /// The quadratic form on `V` in the basis `v_basis`.
    pub q_star: Matrix<S>,
    pub rank_q_star: usize,
    /// Rows: a basis of `V` in the coordinates
    /// `(a0, a1, b0, b1, u1, u2, v1, .., v_{d-4}, mu)`.
    pub v_basis: Matrix<S>,
    /// Rank of the Hessian of `f` at the node (3 for an ordinary node).
    pub hessian_rank: usize,
}

/// The fibre of the congruence over the local coordinates
/// `(a0, a1, b0, b1, u1, u2, v_j, mu)` near `P`: the line moves to
/// `t2 = a0 t0 + a1 t1, t3 = b0 t0 + b1 t1`, `g` to `g + sum u_i r_i`, `h` to
/// `h + sum v_j s_j` and `lambda` to `lambda + mu`. The map is
/// `F(z) = f|l(z) - (lambda + mu) g(z)^2 h(z)`; `V` is the kernel of its
/// differential and `Q*` the second derivative paired with the cokernel.
/// Only the quadratic truncation enters.
pub fn rank_two_form<S: Scalar>(
    f: &QuaternaryForm<S>,
    node: &[S; 4],
    point: &FanoPoint<S>,
    cfg: &RunConfig,
) -> Result<RankTwoReport<S>, LocalError> {
    let distance = membership_residual(f, point)?;
    if distance > MEMBERSHIP_TOL {
        return Err(LocalError::NotAMember(distance));
    }
    let frame = make_frame(f, point)?;
    let tol = 1e-8;
    // the node in frame coordinates must sit on the line at a root of g
    let s = frame.change_inv.mul_vec(node);
    let size = s.iter().map(S::magnitude).fold(0.0, f64::max);
    if !(s[2].is_negligible(size, tol) && s[3].is_negligible(size, tol)) {
        return Err(LocalError::NotANode);
    }
    let gval = point.g.eval(&s[0], &s[1]);
    if !gval.is_negligible(point.g.max_magnitude() * size * size, tol) {
        return Err(LocalError::NotANode);
    }
    let grad = f.gradient_at(node);
    let nsize = node.iter().map(S::magnitude).fold(0.0, f64::max);
    let gscale = f.max_magnitude() * nsize.powi(f.degree() as i32 - 1);
    if !grad.iter().all(|c| c.is_negligible(gscale, tol)) {
        return Err(LocalError::NotANode);
    }
    let hk = point.h.degree() as i32;
    if point.h.eval(&s[0], &s[1]).is_negligible(point.h.max_magnitude() * size.powi(hk), tol) {
        return Err(LocalError::WrongCase {
            found: super::CaseTag::Case11,
            needed: "a node away from the roots of h",
        });
    }
    let hessian_rank = matrix_rank(&f.hessian_at(node), cfg.rank_tol);

    let dec = frame_decompose(f, &frame)?;
    let d = point.degree() as usize;
    let (g, h, lambda) = (&point.g, &point.h, dec.lambda.clone());
    let g2 = g.mul(g);
    let t = [BinaryForm::<S>::monomial(1, 0), BinaryForm::monomial(1, 1)];
    let k = d - 4;
    let n = d + 3;
    let (u0, v0, mu) = (4, 6, d + 2);
    let two = S::from_i64(2);

    // first derivatives
    let mut cols: Vec<BinaryForm<S>> = Vec::with_capacity(n);
    for line in [&dec.g_line, &dec.h_line] {
        for ti in &t {
            cols.push(ti.mul(line));
        }
    }
    for r in &frame.r {
        cols.push(g.mul(r).mul(h).scale(&(-(two.clone() * lambda.clone()))));
    }
    for sj in &frame.s {
        cols.push(g2.mul(sj).scale(&(-lambda.clone())));
    }
    cols.push(g2.mul(h).scale(&(-S::one())));
    let jac = Matrix::from_fn(d + 1, n, |i, j| cols[j].coeff(i).clone());

    let rel = cfg.rank_tol;
    let v_basis = S::null_space(&jac, rel);
    if v_basis.rows() != 3 {
        return Err(LocalError::DegenerateV(v_basis.rows()));
    }
    let coker = S::null_space(&jac.transpose(), rel);
    if coker.rows() != 1 {
        return Err(LocalError::DegenerateV(v_basis.rows()));
    }
    let omega: Vec<S> = coker.row(0).to_vec();

    // second derivatives of the line part
    let big = frame.pull_back(f);
    let second = |a: usize, b: usize| big.partial(a).partial(b).on_base_line();
    let (f22, f23, f33) = (second(2, 2), second(2, 3), second(3, 3));
    // direction of t2 and t3 under unknown i
    let moves = |i: usize| -> (Option<&BinaryForm<S>>, Option<&BinaryForm<S>>) {
        match i {
            0 | 1 => (Some(&t[i]), None),
            2 | 3 => (None, Some(&t[i - 2])),
            _ => (None, None),
        }
    };
    let zero = BinaryForm::zero(d);
    let pair = |i: usize, j: usize| -> BinaryForm<S> {
        let (ai, bi) = moves(i);
        let (aj, bj) = moves(j);
        let mut out = zero.clone();
        if let (Some(x), Some(y)) = (ai, aj) {
            out = out.add(&f22.mul(x).mul(y));
        }
        if let (Some(x), Some(y)) = (ai, bj) {
            out = out.add(&f23.mul(x).mul(y));
        }
        if let (Some(x), Some(y)) = (aj, bi) {
            out = out.add(&f23.mul(x).mul(y));
        }
        if let (Some(x), Some(y)) = (bi, bj) {
            out = out.add(&f33.mul(x).mul(y));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let is_u = |x: usize| (u0..u0 + 2).contains(&x);
        let is_v = |x: usize| (v0..v0 + k).contains(&x);
        let phi = if is_u(lo) && is_u(hi) {
            frame.r[lo - u0].mul(&frame.r[hi - u0]).mul(h).scale(&(two.clone() * lambda.clone()))
        } else if is_u(lo) && is_v(hi) {
            g.mul(&frame.r[lo - u0]).mul(&frame.s[hi - v0]).scale(&(two.clone() * lambda.clone()))
        } else if is_u(lo) && hi == mu {
            g.mul(&frame.r[lo - u0]).mul(h).scale(&two)
        } else if is_v(lo) && hi == mu {
            g2.mul(&frame.s[lo - v0])
        } else {
            zero.clone()
        };
        out.sub(&phi)
    };
    let pairing = |b: &BinaryForm<S>| (0..=d).fold(S::zero(), |acc, i| acc + omega[i].clone() * b.coeff(i).clone());
    let q = Matrix::from_fn(n, n, |i, j| pairing(&pair(i, j)));
    let q_star = v_basis.mul(&q).mul(&v_basis.transpose());
    let rank_q_star = matrix_rank(&q_star, rel);
    Ok(RankTwoReport {
        dim_v: 3,
        q_star,
        rank_q_star,
        v_basis,
        hessian_rank,
    })
}
