//! Nodal members of a pencil of surfaces, the curve of bitangents with a
//! contact point at the node, and the rank of the congruence's double points
//! along it.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;
use crate::forms::{BinaryForm, QuaternaryForm};
use crate::linalg::Matrix;
use crate::lines::{membership_residual, projective_distance, FanoPoint, ParamLine};
use crate::local::{rank_two_form, LocalError, RankTwoReport};
use crate::random::{complex_gaussian, gaussian_vec, kostlan_surface, rng_for};
use crate::scalar::{numerical_rank, singular_values};
use crate::solve::{canonical_projection, conv, dedup_key, key_distance, newton, norm, Restrictor, SquareSystem};

type C = Complex64;

#[derive(Debug, Error)]
pub enum PencilError {
    #[error("pencil members have degrees {0} and {1}")]
    DegreeMismatch(u32, u32),
    #[error("pencil members are proportional")]
    Dependent,
    #[error("the point is not a singular point of the surface")]
    NotANode,
    #[error(transparent)]
    Local(#[from] LocalError),
}

/// The line of surfaces `Y0 + b Y1`.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub y0: QuaternaryForm<C>,
    pub y1: QuaternaryForm<C>,
}

impl Pencil {
    pub fn new(y0: QuaternaryForm<C>, y1: QuaternaryForm<C>) -> Result<Self, PencilError> {
        if y0.degree() != y1.degree() {
            return Err(PencilError::DegreeMismatch(y0.degree(), y1.degree()));
        }
        let a: Vec<C> = y0.coeffs().to_vec();
        let b: Vec<C> = y1.coeffs().to_vec();
        if norm(&a) == 0.0 || norm(&b) == 0.0 || projective_distance(&a, &b) < 1e-12 {
            return Err(PencilError::Dependent);
        }
        Ok(Pencil { y0, y1 })
    }

    pub fn random(d: u32, rng: &mut impl Rng) -> Self {
        Pencil {
            y0: kostlan_surface(d, rng),
            y1: kostlan_surface(d, rng),
        }
    }

    pub fn degree(&self) -> u32 {
        self.y0.degree()
    }

    pub fn member(&self, b: C) -> QuaternaryForm<C> {
        self.y0.add(&self.y1.scale(&b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodalMember {
    pub b: C,
    /// Unit vector.
    pub node: [C; 4],
    pub hessian_rank: usize,
    /// `|f_b(node)|` with `f_b` scaled to unit largest coefficient.
    pub value: f64,
    /// `|grad f_b(node)|`, same scaling.
    pub gradient: f64,
    pub start: usize,
}

#[derive(Debug, Clone)]
pub struct NodalSearch {
    /// Distinct members with a node (Hessian rank 3), in order of discovery.
    pub members: Vec<NodalMember>,
    /// Singular members whose singularity is worse than a node: the pencil is
    /// not Lefschetz-general.
    pub flagged: Vec<NodalMember>,
    pub starts: usize,
    pub converged: usize,
}

/// `grad(f0 + b f1)(x) = 0`, `c . x = 1`; unknowns `(x, b)`.
struct NodalSystem {
    grad0: Vec<QuaternaryForm<C>>,
    grad1: Vec<QuaternaryForm<C>>,
    hess0: Vec<Vec<QuaternaryForm<C>>>,
    hess1: Vec<Vec<QuaternaryForm<C>>>,
    c: [C; 4],
}

impl NodalSystem {
    fn new(pencil: &Pencil, c: [C; 4]) -> Self {
        let grads = |f: &QuaternaryForm<C>| f.gradient().to_vec();
        let hess = |f: &QuaternaryForm<C>| f.gradient().iter().map(|g| g.gradient().to_vec()).collect();
        NodalSystem {
            grad0: grads(&pencil.y0),
            grad1: grads(&pencil.y1),
            hess0: hess(&pencil.y0),
            hess1: hess(&pencil.y1),
            c,
        }
    }
}

fn point4(z: &[C]) -> [C; 4] {
    [z[0], z[1], z[2], z[3]]
}

impl SquareSystem for NodalSystem {
    fn unknowns(&self) -> usize {
        5
    }

    fn residual(&self, z: &[C]) -> Vec<C> {
        let x = point4(z);
        let mut out: Vec<C> = (0..4).map(|k| self.grad0[k].eval(&x) + z[4] * self.grad1[k].eval(&x)).collect();
        out.push((0..4).map(|k| self.c[k] * x[k]).sum::<C>() - 1.0);
        out
    }

    fn jacobian(&self, z: &[C]) -> (Vec<C>, Vec<Vec<C>>) {
        let x = point4(z);
        let b = z[4];
        let mut rows = Vec::with_capacity(5);
        for k in 0..4 {
            let mut row: Vec<C> = (0..4).map(|j| self.hess0[k][j].eval(&x) + b * self.hess1[k][j].eval(&x)).collect();
            row.push(self.grad1[k].eval(&x));
            rows.push(row);
        }
        let mut last: Vec<C> = self.c.to_vec();
        last.push(C::new(0.0, 0.0));
        rows.push(last);
        (self.residual(z), rows)
    }
}

fn unit(v: &[C; 4]) -> [C; 4] {
    let n = norm(v);
    let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("4 entries");
    let phase = big.conj() / big.norm();
    v.map(|x| x * phase / n)
}

/// Rank of the Hessian of `f` at `x`, relative to its largest singular value.
pub fn hessian_rank(f: &QuaternaryForm<C>, x: &[C; 4], rank_tol: f64) -> usize {
    let h = f.hessian_at(x);
    numerical_rank(&singular_values(&h), rank_tol)
}

/// Value and gradient size of `f` at `x` with `f` and `x` normalized.
fn singular_residuals(f: &QuaternaryForm<C>, x: &[C; 4]) -> (f64, f64) {
    let f = f.normalized();
    let x = unit(x);
    let grad = f.gradient_at(&x);
    (f.eval(&x).norm(), norm(&grad))
}

/// Multi-start Newton on `grad f_b = 0`. Each start draws its own
/// normalization hyperplane; converged pairs are checked independently,
/// deduplicated and sorted into nodes and worse singularities.
pub fn find_nodal_members(pencil: &Pencil, starts: usize, cfg: &RunConfig) -> NodalSearch {
    let scale0 = pencil.y0.max_magnitude().max(pencil.y1.max_magnitude());
    let pencil = Pencil {
        y0: pencil.y0.scale(&C::new(1.0 / scale0, 0.0)),
        y1: pencil.y1.scale(&C::new(1.0 / scale0, 0.0)),
    };
    let outcomes: Vec<Option<NodalMember>> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.seed, i as u64);
            let c: [C; 4] = std::array::from_fn(|_| complex_gaussian(&mut rng));
            let sys = NodalSystem::new(&pencil, c);
            let mut z0 = gaussian_vec(&mut rng, 5);
            // start on the normalization hyperplane
            let dot: C = (0..4).map(|k| c[k] * z0[k]).sum();
            for x in z0.iter_mut().take(4) {
                *x /= dot;
            }
            let out = newton(&sys, z0, 60);
            if !out.converged {
                return None;
            }
            let node = point4(&out.z);
            let b = out.z[4];
            let member = pencil.member(b);
            let (value, gradient) = singular_residuals(&member, &node);
            if value > 1e-10 || gradient > 1e-9 {
                return None;
            }
            let node = unit(&node);
            Some(NodalMember {
                b,
                node,
                hessian_rank: hessian_rank(&member.normalized(), &node, cfg.rank_tol.max(1e-7)),
                value,
                gradient,
                start: i,
            })
        })
        .collect();
    let converged = outcomes.iter().filter(|o| o.is_some()).count();
    let mut members: Vec<NodalMember> = Vec::new();
    let mut flagged: Vec<NodalMember> = Vec::new();
    for m in outcomes.into_iter().flatten() {
        let same = |o: &NodalMember| {
            (o.b - m.b).norm() <= cfg.dedup_radius * (1.0 + m.b.norm()) && projective_distance(&o.node, &m.node) <= cfg.dedup_radius
        };
        if members.iter().any(same) || flagged.iter().any(same) {
            continue;
        }
        if m.hessian_rank == 3 {
            members.push(m);
        } else {
            flagged.push(m);
        }
    }
    NodalSearch {
        members,
        flagged,
        starts,
        converged,
    }
}

/// Lines `span(node, w0 + u0 w1 + u1 w2)` with `g = t1 (a t0 + b t1)` pinned
/// to vanish at the node, `h` and `(a : b)` in random affine charts, and one
/// random affine hyperplane in the unknowns to cut the curve to points.
/// Unknowns: `u0, u1, x, y_1..y_(d-4), lambda`; equations: the coefficients
/// of `t0^(d-k) t1^k`, `k >= 2`, of `f|l - lambda g^2 h` (the first two
/// vanish at a singular point) and the hyperplane.
struct GammaSystem {
    rest: Arc<Restrictor>,
    d: usize,
    node: [C; 4],
    frame: [[C; 4]; 3],
    g_chart: [[C; 2]; 2],
    h_chart: Vec<Vec<C>>,
    plane: Vec<C>,
    offset: C,
}

impl GammaSystem {
    fn new(rest: Arc<Restrictor>, d: usize, node: [C; 4], rng: &mut impl Rng) -> Self {
        let mut v4 = || -> [C; 4] { std::array::from_fn(|_| complex_gaussian(rng)) };
        let frame = [v4(), v4(), v4()];
        let g_chart = [[complex_gaussian(rng), complex_gaussian(rng)], [complex_gaussian(rng), complex_gaussian(rng)]];
        let h_chart = (0..d - 3).map(|_| gaussian_vec(rng, d - 3)).collect();
        let plane = gaussian_vec(rng, d);
        let through = gaussian_vec(rng, d);
        let offset = plane.iter().zip(&through).map(|(a, b)| a * b).sum();
        GammaSystem {
            rest,
            d,
            node,
            frame,
            g_chart,
            h_chart,
            plane,
            offset,
        }
    }

    fn line(&self, z: &[C]) -> ParamLine<C> {
        let q = std::array::from_fn(|k| self.frame[0][k] + z[0] * self.frame[1][k] + z[1] * self.frame[2][k]);
        ParamLine { p: self.node, q }
    }

    fn g(&self, z: &[C]) -> Vec<C> {
        let a = self.g_chart[0][0] + z[2] * self.g_chart[1][0];
        let b = self.g_chart[0][1] + z[2] * self.g_chart[1][1];
        vec![C::new(0.0, 0.0), a, b]
    }

    fn h(&self, z: &[C]) -> Vec<C> {
        let mut v = self.h_chart[0].clone();
        for (c, dir) in z[3..self.d - 1].iter().zip(&self.h_chart[1..]) {
            for (a, b) in v.iter_mut().zip(dir) {
                *a += c * b;
            }
        }
        v
    }

    fn fano_point(&self, z: &[C]) -> FanoPoint<C> {
        FanoPoint {
            line: self.line(z),
            g: BinaryForm::new(self.g(z)),
            h: BinaryForm::new(self.h(z)),
        }
    }
}

impl SquareSystem for GammaSystem {
    fn unknowns(&self) -> usize {
        self.d
    }

    fn residual(&self, z: &[C]) -> Vec<C> {
        let l = self.line(z);
        let r = self.rest.restrict(&l.p, &l.q);
        let g = self.g(z);
        let t = conv(&conv(&g, &g), &self.h(z));
        let lam = z[self.d - 1];
        let mut out: Vec<C> = (2..=self.d).map(|i| r[i] - lam * t[i]).collect();
        out.push(self.plane.iter().zip(z).map(|(a, b)| a * b).sum::<C>() - self.offset);
        out
    }

    fn jacobian(&self, z: &[C]) -> (Vec<C>, Vec<Vec<C>>) {
        let d = self.d;
        let l = self.line(z);
        let zero4 = [C::new(0.0, 0.0); 4];
        let moves = [(zero4, self.frame[1]), (zero4, self.frame[2])];
        let (_, dlines) = self.rest.restrict_with_moves(&l.p, &l.q, &moves);
        let g = self.g(z);
        let h = self.h(z);
        let lam = z[d - 1];
        let g2 = conv(&g, &g);
        let t = conv(&g2, &h);
        let mut cols: Vec<Vec<C>> = dlines;
        let gh = conv(&g, &h);
        let dg = [C::new(0.0, 0.0), self.g_chart[1][0], self.g_chart[1][1]];
        cols.push(conv(&gh, &dg).iter().map(|x| -2.0 * lam * x).collect());
        for dir in &self.h_chart[1..] {
            cols.push(conv(&g2, dir).iter().map(|x| -lam * x).collect());
        }
        cols.push(t.iter().map(|x| -x).collect());
        let mut rows: Vec<Vec<C>> = (2..=d).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        rows.push(self.plane.clone());
        (self.residual(z), rows)
    }
}

#[derive(Debug, Clone)]
pub struct GammaSamples {
    pub points: Vec<FanoPoint<C>>,
    pub requested: usize,
    pub attempts: usize,
    /// Fewer than `requested` distinct points were found.
    pub partial: bool,
}

/// Whether `f` is singular at `node` (scaled as in [`NodalMember`]).
pub fn is_singular_point(f: &QuaternaryForm<C>, node: &[C; 4]) -> bool {
    let (value, gradient) = singular_residuals(f, node);
    value <= 1e-10 && gradient <= 1e-9
}

/// Distinct points of the congruence with a contact point pinned at `node`.
/// Attempts run in parallel batches and merge in attempt order, so the
/// output depends only on the seed.
pub fn sample_gamma(f: &QuaternaryForm<C>, node: &[C; 4], n: usize, cfg: &RunConfig) -> Result<GammaSamples, PencilError> {
    if !is_singular_point(f, node) {
        return Err(PencilError::NotANode);
    }
    let d = f.degree() as usize;
    let f = f.normalized();
    let node = unit(node);
    let rest = Arc::new(Restrictor::new(&f));
    let pi = canonical_projection(cfg.seed);
    let max_attempts = 200 * n.max(1);
    let batch = 64;
    let mut points: Vec<FanoPoint<C>> = Vec::new();
    let mut keys = Vec::new();
    let mut attempts = 0;
    while points.len() < n && attempts < max_attempts {
        let found: Vec<Option<FanoPoint<C>>> = (attempts..attempts + batch)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(cfg.seed, i as u64);
                let sys = GammaSystem::new(Arc::clone(&rest), d, node, &mut rng);
                let z0 = gaussian_vec(&mut rng, d);
                let out = newton(&sys, z0, 80);
                if !out.converged {
                    return None;
                }
                let p = sys.fano_point(&out.z);
                gamma_conditions(&f, &node, &p).then_some(p)
            })
            .collect();
        attempts += batch;
        for p in found.into_iter().flatten() {
            if points.len() >= n {
                break;
            }
            let key = dedup_key(&p, &pi);
            if keys.iter().any(|k| key_distance(k, &key) <= cfg.dedup_radius) {
                continue;
            }
            keys.push(key);
            points.push(p);
        }
    }
    Ok(GammaSamples {
        partial: points.len() < n,
        points,
        requested: n,
        attempts,
    })
}

/// Independent check of a sample: on the congruence, and the node is on the
/// line at a root of `g`.
pub fn gamma_conditions(f: &QuaternaryForm<C>, node: &[C; 4], p: &FanoPoint<C>) -> bool {
    let Ok(distance) = membership_residual(f, p) else {
        return false;
    };
    if distance > 1e-8 {
        return false;
    }
    // node = s0 p + s1 q with s2 = s3 = 0 in any completing frame
    let m = Matrix::from_columns(&[p.line.p.to_vec(), p.line.q.to_vec(), node.to_vec()]);
    if numerical_rank(&singular_values(&m), 1e-9) != 2 {
        return false;
    }
    let Some(s) = solve_on_line(&p.line, node) else {
        return false;
    };
    let gval = p.g.eval(&s[0], &s[1]).norm();
    let sn = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
    gval <= 1e-8 * p.g.max_magnitude() * sn * sn
}

/// Parameter of `x` on the line, by least squares.
fn solve_on_line(line: &ParamLine<C>, x: &[C; 4]) -> Option<[C; 2]> {
    let a = nalgebra::DMatrix::from_fn(4, 2, |i, j| if j == 0 { line.p[i] } else { line.q[i] });
    let b = nalgebra::DVector::from_iterator(4, x.iter().copied());
    let s = a.svd(true, true).solve(&b, 1e-12).ok()?;
    Some([s[0], s[1]])
}

#[derive(Debug, Clone)]
pub enum RankTwoOutcome {
    Checked(RankTwoReport<C>),
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct RankTwoSummary {
    pub outcomes: Vec<RankTwoOutcome>,
    pub checked: usize,
    /// Samples with `(dim V, rank Q*) = (3, 2)`.
    pub rank_two: usize,
    pub rank_three: usize,
    pub fraction_rank_two: f64,
}

pub fn verify_rank_two(f: &QuaternaryForm<C>, node: &[C; 4], samples: &[FanoPoint<C>], cfg: &RunConfig) -> Result<RankTwoSummary, PencilError> {
    if !is_singular_point(f, node) {
        return Err(PencilError::NotANode);
    }
    let outcomes: Vec<RankTwoOutcome> = samples
        .par_iter()
        .map(|p| match rank_two_form(f, node, p, cfg) {
            Ok(r) => RankTwoOutcome::Checked(r),
            Err(e) => RankTwoOutcome::Skipped(e.to_string()),
        })
        .collect();
    let reports: Vec<&RankTwoReport<C>> = outcomes
        .iter()
        .filter_map(|o| match o {
            RankTwoOutcome::Checked(r) => Some(r),
            RankTwoOutcome::Skipped(_) => None,
        })
        .collect();
    let checked = reports.len();
    let rank_two = reports.iter().filter(|r| r.dim_v == 3 && r.rank_q_star == 2).count();
    let rank_three = reports.iter().filter(|r| r.rank_q_star == 3).count();
    Ok(RankTwoSummary {
        checked,
        rank_two,
        rank_three,
        fraction_rank_two: if samples.is_empty() { 0.0 } else { rank_two as f64 / samples.len() as f64 },
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng_for;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn planted_node_is_recovered() {
        // y0 singular at (1,0,0,0): no terms t0^d, t0^(d-1) t_k
        let mut rng = rng_for(3, 0);
        let d = 4;
        let mut y0 = kostlan_surface(d, &mut rng);
        for e in [[4, 0, 0, 0], [3, 1, 0, 0], [3, 0, 1, 0], [3, 0, 0, 1]] {
            y0.set_coeff(e, c(0.0));
        }
        let pencil = Pencil::new(y0, kostlan_surface(d, &mut rng)).unwrap();
        let search = find_nodal_members(&pencil, 3000, &RunConfig::default());
        let hit = search
            .members
            .iter()
            .find(|m| m.b.norm() < 1e-8 && projective_distance(&m.node, &[c(1.0), c(0.0), c(0.0), c(0.0)]) < 1e-8);
        assert!(hit.is_some(), "found {} members", search.members.len());
        assert!(search.flagged.is_empty());
    }

    #[test]
    fn smooth_member_is_refused() {
        let mut rng = rng_for(4, 0);
        let f = kostlan_surface(5, &mut rng);
        let x = [c(1.0), c(0.5), c(0.0), c(0.0)];
        assert!(matches!(sample_gamma(&f, &x, 3, &RunConfig::default()), Err(PencilError::NotANode)));
        assert!(matches!(verify_rank_two(&f, &x, &[], &RunConfig::default()), Err(PencilError::NotANode)));
    }

    #[test]
    fn proportional_members_are_rejected() {
        let mut rng = rng_for(5, 0);
        let f = kostlan_surface(4, &mut rng);
        assert!(matches!(Pencil::new(f.clone(), f.scale(&c(2.0))), Err(PencilError::Dependent)));
    }
}
