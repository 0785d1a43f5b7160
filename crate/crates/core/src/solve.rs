//! Numerical enumeration of Fano points on Schubert slices by multi-start
//! damped Newton, and the numerical Jacobian rank of the local system.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::forms::{chordal_distance, monomials, root_divisor, BinaryForm, Exponent, QuaternaryForm};
use crate::linalg::Matrix;
use crate::lines::{membership_residual, normalize_vec, projective_distance, FanoPoint, LinesError, ParamLine, SchubertSlice};
use crate::random::{complex_gaussian, gaussian_vec, rng_for};
use crate::scalar::{numerical_rank, singular_values, Scalar};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("membership residual {0:e} exceeds 1e-8")]
    NotAMember(f64),
    #[error(transparent)]
    Lines(#[from] LinesError),
    #[error("degree {0} is below 4")]
    DegreeTooSmall(u32),
}

pub(crate) fn conv(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Restricts a fixed float form to lines `t0 p + t1 q`, optionally with the
/// derivatives along moves of `(p, q)`. Values are taken at the points
/// `p + w^k q` for the `(d+1)`-th roots of unity `w^k` and converted back to
/// coefficients by an inverse DFT.
#[derive(Debug, Clone)]
pub struct Restrictor {
    d: usize,
    exps: Vec<[usize; 4]>,
    coeffs: Vec<C>,
    /// Per variable: exponents and coefficients of the partial derivative.
    partials: [(Vec<[usize; 4]>, Vec<C>); 4],
    nodes: Vec<C>,
}

impl Restrictor {
    pub fn new(f: &QuaternaryForm<C>) -> Self {
        let d = f.degree();
        assert!((1..16).contains(&d), "degree out of range");
        let to_us = |e: &Exponent| [e[0] as usize, e[1] as usize, e[2] as usize, e[3] as usize];
        let sparse = |g: &QuaternaryForm<C>| -> (Vec<[usize; 4]>, Vec<C>) {
            monomials(g.degree())
                .iter()
                .zip(g.coeffs())
                .filter(|(_, c)| **c != ZERO)
                .map(|(e, c)| (to_us(e), *c))
                .unzip()
        };
        let (exps, coeffs) = sparse(f);
        let grads = f.gradient();
        let n = d as usize + 1;
        Restrictor {
            d: d as usize,
            exps,
            coeffs,
            partials: std::array::from_fn(|k| sparse(&grads[k])),
            nodes: (0..n)
                .map(|k| C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect(),
        }
    }

    fn powers(&self, x: &[C; 4]) -> [[C; 16]; 4] {
        let mut pw = [[ZERO; 16]; 4];
        for k in 0..4 {
            pw[k][0] = C::new(1.0, 0.0);
            for e in 1..=self.d {
                pw[k][e] = pw[k][e - 1] * x[k];
            }
        }
        pw
    }

    fn eval(pw: &[[C; 16]; 4], exps: &[[usize; 4]], coeffs: &[C]) -> C {
        let mut acc = ZERO;
        for (e, c) in exps.iter().zip(coeffs) {
            acc += c * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]] * pw[3][e[3]];
        }
        acc
    }

    fn interpolate(&self, vals: &[C]) -> Vec<C> {
        let n = self.d + 1;
        (0..n)
            .map(|i| {
                let mut acc = ZERO;
                for (k, v) in vals.iter().enumerate() {
                    acc += v * self.nodes[(n - (k * i) % n) % n];
                }
                acc / n as f64
            })
            .collect()
    }

    fn point(&self, p: &[C; 4], q: &[C; 4], k: usize) -> [C; 4] {
        std::array::from_fn(|i| p[i] + self.nodes[k] * q[i])
    }

    pub fn restrict(&self, p: &[C; 4], q: &[C; 4]) -> Vec<C> {
        let vals: Vec<C> = (0..=self.d)
            .map(|k| Self::eval(&self.powers(&self.point(p, q, k)), &self.exps, &self.coeffs))
            .collect();
        self.interpolate(&vals)
    }

    /// `f|l` and, for each move `(dp, dq)` of the spanning points, the
    /// derivative `sum_k (df/dt_k)|l * (dp_k t0 + dq_k t1)`.
    pub fn restrict_with_moves(&self, p: &[C; 4], q: &[C; 4], moves: &[([C; 4], [C; 4])]) -> (Vec<C>, Vec<Vec<C>>) {
        let n = self.d + 1;
        let mut vals = Vec::with_capacity(n);
        let mut dvals = vec![Vec::with_capacity(n); moves.len()];
        for k in 0..n {
            let pw = self.powers(&self.point(p, q, k));
            vals.push(Self::eval(&pw, &self.exps, &self.coeffs));
            let grad: [C; 4] = std::array::from_fn(|i| Self::eval(&pw, &self.partials[i].0, &self.partials[i].1));
            for (m, (dp, dq)) in moves.iter().enumerate() {
                let mut acc = ZERO;
                for i in 0..4 {
                    acc += grad[i] * (dp[i] + self.nodes[k] * dq[i]);
                }
                dvals[m].push(acc);
            }
        }
        (self.interpolate(&vals), dvals.iter().map(|v| self.interpolate(v)).collect())
    }
}

/// The square system `f|l(u) = lambda g^2 h` on a Schubert slice, with `g`
/// and `h` in random affine charts of their projective spaces.
#[derive(Debug, Clone)]
pub struct BitangentSystem {
    pub surface: QuaternaryForm<C>,
    pub slice: SchubertSlice<C>,
    pub chart: usize,
    d: usize,
    rest: Arc<Restrictor>,
    base: ParamLine<C>,
    dline: [ParamLine<C>; 2],
    g_chart: Vec<Vec<C>>,
    h_chart: Vec<Vec<C>>,
}

/// Random affine chart of P^(n-1): an offset and `n-1` directions.
fn random_chart(n: usize, rng: &mut impl Rng) -> Vec<Vec<C>> {
    (0..n).map(|_| gaussian_vec(rng, n)).collect()
}

fn affine(chart: &[Vec<C>], x: &[C]) -> Vec<C> {
    let mut v = chart[0].clone();
    for (c, dir) in x.iter().zip(&chart[1..]) {
        for (a, b) in v.iter_mut().zip(dir) {
            *a += c * b;
        }
    }
    v
}

fn sub_line(a: &ParamLine<C>, b: &ParamLine<C>) -> ParamLine<C> {
    ParamLine {
        p: std::array::from_fn(|k| a.p[k] - b.p[k]),
        q: std::array::from_fn(|k| a.q[k] - b.q[k]),
    }
}

/// Builds the slice system; the `g` and `h` charts are drawn from `seed`.
pub fn build_system(surface: &QuaternaryForm<C>, slice: &SchubertSlice<C>, chart: usize, seed: u64) -> BitangentSystem {
    let d = surface.degree() as usize;
    assert!(d >= 4, "bitangent systems need degree at least 4");
    let surface = surface.normalized();
    let mut rng = rng_for(seed, u64::MAX);
    let rest = Arc::new(Restrictor::new(&surface));
    assemble(surface, rest, slice.clone(), chart, &mut rng)
}

fn assemble(
    surface: QuaternaryForm<C>,
    rest: Arc<Restrictor>,
    slice: SchubertSlice<C>,
    chart: usize,
    rng: &mut impl Rng,
) -> BitangentSystem {
    let d = surface.degree() as usize;
    let z2 = [ZERO, ZERO];
    let base = slice.line(&z2, chart);
    let one = C::new(1.0, 0.0);
    let dline = [
        sub_line(&slice.line(&[one, ZERO], chart), &base),
        sub_line(&slice.line(&[ZERO, one], chart), &base),
    ];
    BitangentSystem {
        rest,
        surface,
        slice,
        chart,
        d,
        base,
        dline,
        g_chart: random_chart(3, rng),
        h_chart: random_chart(d - 3, rng),
    }
}

/// The same slice with a fresh random frame: same point or plane, new
/// complement vectors.
pub fn reframe(slice: &SchubertSlice<C>, rng: &mut impl Rng) -> SchubertSlice<C> {
    let mut v = || -> [C; 4] { std::array::from_fn(|_| complex_gaussian(rng)) };
    match slice {
        SchubertSlice::ThroughPoint { point, .. } => SchubertSlice::ThroughPoint {
            point: *point,
            frame: [v(), v(), v()],
        },
        SchubertSlice::InPlane { plane, .. } => {
            let big = (0..4).max_by(|&a, &b| plane[a].norm().total_cmp(&plane[b].norm())).expect("4 entries");
            let mut w = || -> [C; 4] {
                let mut x = v();
                let dot: C = (0..4).map(|i| plane[i] * x[i]).sum();
                x[big] -= dot / plane[big];
                x
            };
            let frame = [w(), w(), w()];
            SchubertSlice::InPlane { plane: *plane, frame }
        }
    }
}

impl BitangentSystem {
    pub fn unknowns(&self) -> usize {
        self.d + 1
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn line(&self, z: &[C]) -> ParamLine<C> {
        let (u0, u1) = (z[0], z[1]);
        ParamLine {
            p: std::array::from_fn(|k| self.base.p[k] + u0 * self.dline[0].p[k] + u1 * self.dline[1].p[k]),
            q: std::array::from_fn(|k| self.base.q[k] + u0 * self.dline[0].q[k] + u1 * self.dline[1].q[k]),
        }
    }

    pub fn g(&self, z: &[C]) -> Vec<C> {
        affine(&self.g_chart, &z[2..4])
    }

    pub fn h(&self, z: &[C]) -> Vec<C> {
        affine(&self.h_chart, &z[4..self.d])
    }

    pub fn lambda(&self, z: &[C]) -> C {
        z[self.d]
    }

    pub fn residual(&self, z: &[C]) -> Vec<C> {
        let l = self.line(z);
        let r = self.rest.restrict(&l.p, &l.q);
        let g = self.g(z);
        let t = conv(&conv(&g, &g), &self.h(z));
        let lam = self.lambda(z);
        r.iter().zip(&t).map(|(a, b)| a - lam * b).collect()
    }

    /// Residual and Jacobian (rows: coefficients, columns: unknowns).
    pub fn jacobian(&self, z: &[C]) -> (Vec<C>, Vec<Vec<C>>) {
        let n = self.d + 1;
        let l = self.line(z);
        let moves = [(self.dline[0].p, self.dline[0].q), (self.dline[1].p, self.dline[1].q)];
        let (r, dlines) = self.rest.restrict_with_moves(&l.p, &l.q, &moves);
        let g = self.g(z);
        let h = self.h(z);
        let lam = self.lambda(z);
        let g2 = conv(&g, &g);
        let t = conv(&g2, &h);
        let f: Vec<C> = r.iter().zip(&t).map(|(a, b)| a - lam * b).collect();
        let mut cols: Vec<Vec<C>> = dlines;
        let gh = conv(&g, &h);
        for dir in &self.g_chart[1..] {
            // d/dx (-lam g^2 h) = -2 lam g h dir
            cols.push(conv(&gh, dir).iter().map(|x| -2.0 * lam * x).collect());
        }
        for dir in &self.h_chart[1..] {
            cols.push(conv(&g2, dir).iter().map(|x| -lam * x).collect());
        }
        cols.push(t.iter().map(|x| -x).collect());
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        (f, rows)
    }

    /// The Fano point encoded by `z`, with `g`, `h` in the line's parameter.
    pub fn fano_point(&self, z: &[C]) -> FanoPoint<C> {
        FanoPoint {
            line: self.line(z),
            g: BinaryForm::new(self.g(z)),
            h: BinaryForm::new(self.h(z)),
        }
    }

    fn random_start(&self, rng: &mut impl Rng) -> Vec<C> {
        (0..self.d + 1).map(|_| complex_gaussian(rng)).collect()
    }

    /// A copy with a fresh slice frame and fresh `g`, `h` charts. Solutions
    /// far out in one chart are near the origin of another, so starts spread
    /// over charts reach every solution.
    pub fn rechart(&self, rng: &mut impl Rng) -> BitangentSystem {
        let slice = reframe(&self.slice, rng);
        assemble(self.surface.clone(), Arc::clone(&self.rest), slice, 0, rng)
    }
}

pub(crate) fn norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub z: Vec<C>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// A square polynomial system for [`newton`].
pub trait SquareSystem {
    fn unknowns(&self) -> usize;
    fn residual(&self, z: &[C]) -> Vec<C>;
    /// Residual and Jacobian (rows: equations, columns: unknowns).
    fn jacobian(&self, z: &[C]) -> (Vec<C>, Vec<Vec<C>>);
}

impl SquareSystem for BitangentSystem {
    fn unknowns(&self) -> usize {
        BitangentSystem::unknowns(self)
    }

    fn residual(&self, z: &[C]) -> Vec<C> {
        BitangentSystem::residual(self, z)
    }

    fn jacobian(&self, z: &[C]) -> (Vec<C>, Vec<Vec<C>>) {
        BitangentSystem::jacobian(self, z)
    }
}

/// Damped Newton: full steps are halved until the residual norm decreases.
pub fn newton<Sys: SquareSystem>(sys: &Sys, z0: Vec<C>, max_iter: usize) -> NewtonOutcome {
    let n = sys.unknowns();
    let mut z = z0;
    let mut fz = sys.residual(&z);
    let mut fnorm = norm(&fz);
    let mut quiet = 0;
    for it in 0..max_iter {
        let (f, rows) = sys.jacobian(&z);
        let jm = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let rhs = DVector::from_iterator(n, f.iter().map(|x| -x));
        let Some(dz) = jm.lu().solve(&rhs) else {
            return NewtonOutcome { z, iterations: it, residual: fnorm, converged: false };
        };
        let step = dz.norm();
        let znorm = norm(&z);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1.0 / 128.0 {
            let cand: Vec<C> = z.iter().zip(dz.iter()).map(|(a, b)| a + b * t).collect();
            let fc = sys.residual(&cand);
            let nc = norm(&fc);
            if nc < fnorm || (nc <= 1e-14 && fnorm <= 1e-14) {
                z = cand;
                fz = fc;
                fnorm = nc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // At the noise floor a failed decrease is convergence.
            let ok = step <= 1e-9 * (1.0 + znorm);
            return NewtonOutcome { z, iterations: it, residual: fnorm, converged: ok };
        }
        if norm(&z) > 1e8 {
            return NewtonOutcome { z, iterations: it, residual: fnorm, converged: false };
        }
        if t == 1.0 && step <= 1e-11 * (1.0 + znorm) {
            quiet += 1;
            if quiet >= 2 {
                return NewtonOutcome { z, iterations: it + 1, residual: fnorm, converged: true };
            }
        }
    }
    let _ = fz;
    NewtonOutcome { z, iterations: max_iter, residual: fnorm, converged: false }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: FanoPoint<C>,
    pub lambda: C,
    pub start: usize,
    pub iterations: usize,
    pub newton_residual: f64,
    /// Independent check by [`membership_residual`].
    pub membership: f64,
    /// How many starts converged here.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    /// `g` has a double root: contact of order four.
    GSquare,
    /// A root of `g` is also a root of `h`: contact of order three.
    GHCollision,
    /// Residual check failed after convergence.
    Residual(f64),
    /// The line lies on the surface.
    LineInY,
}

impl RejectReason {
    pub fn label(&self) -> String {
        match self {
            RejectReason::GSquare => "g-square".into(),
            RejectReason::GHCollision => "g-h-collision".into(),
            RejectReason::Residual(r) => format!("residual {r:e}"),
            RejectReason::LineInY => "line-in-surface".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub point: FanoPoint<C>,
    pub start: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub points: Vec<Solution>,
    pub rejected: Vec<Rejected>,
    pub starts: usize,
    pub converged: usize,
    pub diverged: usize,
    pub duplicates: usize,
    /// Set when too few starts converged to trust the count.
    pub inconclusive: bool,
}

impl SolutionSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

/// Below this fraction of converged starts a count is not reported as stable.
pub const CONVERGENCE_FLOOR: f64 = 0.02;

/// Fixed generic projection `C^4 -> C^2`; restricted to a line it gives a
/// parameter that does not depend on how the line was spanned.
pub(crate) fn canonical_projection(seed: u64) -> [[C; 4]; 2] {
    let mut rng = rng_for(seed, u64::MAX - 1);
    [std::array::from_fn(|_| complex_gaussian(&mut rng)), std::array::from_fn(|_| complex_gaussian(&mut rng))]
}

/// `[g]`, `[h]` rewritten in the projected parameter of the line.
fn canonical_forms(p: &FanoPoint<C>, pi: &[[C; 4]; 2]) -> (BinaryForm<C>, BinaryForm<C>) {
    let dot = |a: &[C; 4], b: &[C; 4]| -> C { (0..4).map(|k| a[k] * b[k]).sum() };
    // s = A t with A = pi [p q]; t = A^{-1} s
    let a = [[dot(&pi[0], &p.line.p), dot(&pi[0], &p.line.q)], [dot(&pi[1], &p.line.p), dot(&pi[1], &p.line.q)]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    (p.g.substitute(&inv), p.h.substitute(&inv))
}

/// Projective key used for deduplication: normalized Plücker vector and the
/// canonical `g`, `h`.
pub(crate) fn dedup_key(p: &FanoPoint<C>, pi: &[[C; 4]; 2]) -> [Vec<C>; 3] {
    let (g, h) = canonical_forms(p, pi);
    [normalize_vec(&p.line.plucker().coords), normalize_vec(g.coeffs()), normalize_vec(h.coeffs())]
}

pub(crate) fn key_distance(a: &[Vec<C>; 3], b: &[Vec<C>; 3]) -> f64 {
    (0..3).map(|i| projective_distance(&a[i], &b[i])).fold(0.0, f64::max)
}

/// Classifies the contact pattern of a converged point.
pub fn root_pattern(p: &FanoPoint<C>, radius: f64) -> Option<RejectReason> {
    let g = root_divisor(&p.g, radius).ok()?;
    if g.len() != 2 {
        return Some(RejectReason::GSquare);
    }
    if p.h.degree() > 0 {
        let h = root_divisor(&p.h, radius).ok()?;
        for a in &g {
            if h.iter().any(|b| chordal_distance(&a.point, &b.point) <= radius) {
                return Some(RejectReason::GHCollision);
            }
        }
    }
    None
}

/// Runs Newton from `starts` seeded random starts and reduces the converged
/// points in start order: deduplication, independent membership check and
/// the root-pattern filter.
pub fn enumerate(sys: &BitangentSystem, starts: usize, cfg: &RunConfig) -> SolutionSet {
    let outcomes: Vec<(NewtonOutcome, Option<FanoPoint<C>>, C)> = (0..starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg.seed, i as u64);
            let local = sys.rechart(&mut rng);
            let o = newton(&local, local.random_start(&mut rng), 80);
            let point = o.converged.then(|| local.fano_point(&o.z));
            let lambda = local.lambda(&o.z);
            (o, point, lambda)
        })
        .collect();
    let mut set = SolutionSet {
        points: Vec::new(),
        rejected: Vec::new(),
        starts,
        converged: 0,
        diverged: 0,
        duplicates: 0,
        inconclusive: false,
    };
    let mut keys: Vec<[Vec<C>; 3]> = Vec::new();
    let mut rejected_keys: Vec<[Vec<C>; 3]> = Vec::new();
    let projection = canonical_projection(cfg.seed);
    for (i, (o, point, lambda)) in outcomes.into_iter().enumerate() {
        let Some(point) = point else {
            set.diverged += 1;
            continue;
        };
        set.converged += 1;
        let key = dedup_key(&point, &projection);
        if let Some(k) = keys.iter().position(|k| key_distance(k, &key) <= cfg.dedup_radius) {
            set.points[k].hits += 1;
            set.duplicates += 1;
            continue;
        }
        if rejected_keys.iter().any(|k| key_distance(k, &key) <= cfg.dedup_radius) {
            set.duplicates += 1;
            continue;
        }
        let reason = match membership_residual(&sys.surface, &point) {
            Err(_) => Some(RejectReason::LineInY),
            Ok(r) if r > 1e-8 => Some(RejectReason::Residual(r)),
            Ok(_) => root_pattern(&point, cfg.root_cluster),
        };
        if let Some(reason) = reason {
            rejected_keys.push(key);
            set.rejected.push(Rejected { point, start: i, reason });
            continue;
        }
        let membership = membership_residual(&sys.surface, &point).unwrap_or(f64::INFINITY);
        keys.push(key);
        set.points.push(Solution {
            lambda,
            point,
            start: i,
            iterations: o.iterations,
            newton_residual: o.residual,
            membership,
            hits: 1,
        });
    }
    set.inconclusive = starts == 0 || (set.converged as f64) < CONVERGENCE_FLOOR * starts as f64;
    set
}

/// Which Schubert condition a count refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKind {
    /// Lines through a general point (order).
    Order,
    /// Lines in a general plane (class).
    Class,
}

impl CountKind {
    pub fn name(&self) -> &'static str {
        match self {
            CountKind::Order => "order",
            CountKind::Class => "class",
        }
    }
}

/// A slice of the given kind with random point/plane and random frame.
pub fn random_slice(kind: CountKind, rng: &mut impl Rng) -> SchubertSlice<C> {
    let v = |rng: &mut dyn FnMut() -> C| -> [C; 4] { std::array::from_fn(|_| rng()) };
    let mut gen = || complex_gaussian(rng);
    match kind {
        CountKind::Order => SchubertSlice::ThroughPoint {
            point: v(&mut gen),
            frame: [v(&mut gen), v(&mut gen), v(&mut gen)],
        },
        CountKind::Class => {
            let plane = v(&mut gen);
            let big = (0..4).max_by(|&a, &b| plane[a].norm().total_cmp(&plane[b].norm())).expect("4 entries");
            let mut w = || -> [C; 4] {
                let mut x = v(&mut gen);
                let dot: C = (0..4).map(|i| plane[i] * x[i]).sum();
                x[big] -= dot / plane[big];
                x
            };
            let frame = [w(), w(), w()];
            SchubertSlice::InPlane { plane, frame }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunCount {
    pub slice: usize,
    pub seed: u64,
    pub count: usize,
    pub converged: usize,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub kind: CountKind,
    /// The common count when every run agreed and none was inconclusive.
    pub count: Option<usize>,
    pub runs: Vec<RunCount>,
    pub residuals: Vec<f64>,
    pub agreement: bool,
    /// Solutions of the first run, for reporting.
    pub first: SolutionSet,
}

/// Repeats [`enumerate`] over `slices` random slices and `seeds` seeds each
/// (derived from `cfg.seed`) and checks that the counts agree.
pub fn count_with_certificate(
    surface: &QuaternaryForm<C>,
    kind: CountKind,
    slices: usize,
    seeds: usize,
    cfg: &RunConfig,
) -> CountReport {
    let mut runs = Vec::new();
    let mut residuals = Vec::new();
    let mut first = None;
    for s in 0..slices {
        let mut rng = rng_for(cfg.seed, 1_000_000 + s as u64);
        let slice = random_slice(kind, &mut rng);
        let sys = build_system(surface, &slice, 0, cfg.seed.wrapping_add(s as u64));
        for k in 0..seeds {
            let run_seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add((s * seeds + k) as u64);
            let run_cfg = RunConfig { seed: run_seed, ..cfg.clone() };
            let set = enumerate(&sys, cfg.starts, &run_cfg);
            residuals.extend(set.points.iter().map(|p| p.membership));
            runs.push(RunCount {
                slice: s,
                seed: run_seed,
                count: set.count(),
                converged: set.converged,
                inconclusive: set.inconclusive,
            });
            if first.is_none() {
                first = Some(set);
            }
        }
    }
    let agreement = !runs.is_empty() && runs.iter().all(|r| r.count == runs[0].count && !r.inconclusive);
    CountReport {
        kind,
        count: agreement.then(|| runs[0].count),
        runs,
        residuals,
        agreement,
        first: first.unwrap_or(SolutionSet {
            points: Vec::new(),
            rejected: Vec::new(),
            starts: 0,
            converged: 0,
            diverged: 0,
            duplicates: 0,
            inconclusive: true,
        }),
    }
}

/// Numerical rank of the local system at a Fano point.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianRank {
    pub rank: usize,
    /// Singular values of the reduced `d x (d+2)` Jacobian, largest first.
    pub singular_values: Vec<f64>,
    /// `sigma_d / sigma_1`: the gap that decides full rank.
    pub relative_gap: f64,
}

fn unit_vec(v: &[C]) -> Vec<C> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

/// Hermitian orthogonal complement of the given vectors.
fn complement(vs: &[Vec<C>], n: usize, rel_tol: f64) -> Vec<Vec<C>> {
    let m = Matrix::from_fn(vs.len(), n, |i, j| vs[i][j].conj());
    let ns = C::null_space(&m, rel_tol);
    (0..ns.rows()).map(|i| ns.row(i).to_vec()).collect()
}

/// Jacobian of the unsliced system `f|l' = lambda' g'^2 h'` at `P`, in the
/// unknowns (line 4, g 2, h d-4, lambda), with `lambda` eliminated.
pub fn local_jacobian(f: &QuaternaryForm<C>, point: &FanoPoint<C>) -> Matrix<C> {
    let d = f.degree() as usize;
    let f = f.normalized();
    let p: [C; 4] = unit_vec(&point.line.p).try_into().expect("4");
    // orthonormalize q against p so that the parametrization is balanced
    let pq: C = (0..4).map(|i| p[i].conj() * point.line.q[i]).sum();
    let q_raw: Vec<C> = (0..4).map(|i| point.line.q[i] - pq * p[i]).collect();
    let qn = norm(&q_raw);
    let q: [C; 4] = unit_vec(&q_raw).try_into().expect("4");
    // forms in the new parameter: t = M s with old = s0 p_old... keep it simple
    // by expressing g, h in the parameter of (p, q): x = s0 p + s1 q with
    // p = p_old / |p_old|, q = (q_old - pq p) / qn.
    let pn = norm(&point.line.p);
    // old parameter (t0, t1) satisfies t0 p_old + t1 q_old = s0 p + s1 q:
    // t1 = s1 / qn, t0 = (s0 - pq * s1 / qn) / pn.
    let m = [[C::new(1.0 / pn, 0.0), -pq / (qn * pn)], [ZERO, C::new(1.0 / qn, 0.0)]];
    let g = point.g.substitute(&m).normalized();
    let h = point.h.substitute(&m).normalized();
    let normals = complement(&[p.to_vec(), q.to_vec()], 4, 1e-12);
    let zero4 = [ZERO; 4];
    let mut moves = Vec::new();
    for n in &normals {
        let n4: [C; 4] = n.clone().try_into().expect("4");
        moves.push((n4, zero4));
        moves.push((zero4, n4));
    }
    let (r, line_cols) = Restrictor::new(&f).restrict_with_moves(&p, &q, &moves);
    let g2 = conv(g.coeffs(), g.coeffs());
    let t = conv(&g2, h.coeffs());
    // lambda from the largest coefficient of g^2 h
    let k = (0..=d).max_by(|&a, &b| t[a].norm().total_cmp(&t[b].norm())).expect("nonempty");
    let lam = r[k] / t[k];
    let mut cols: Vec<Vec<C>> = line_cols;
    let gh = conv(g.coeffs(), h.coeffs());
    for r in complement(&[g.coeffs().to_vec()], 3, 1e-12) {
        cols.push(conv(&gh, &r).iter().map(|x| -2.0 * lam * x).collect());
    }
    if d > 4 {
        for s in complement(&[h.coeffs().to_vec()], d - 3, 1e-12) {
            cols.push(conv(&g2, &s).iter().map(|x| -lam * x).collect());
        }
    }
    // eliminate lambda (column -t) with row k
    let rows: Vec<usize> = (0..=d).filter(|&i| i != k).collect();
    Matrix::from_fn(d, cols.len(), |a, j| {
        let i = rows[a];
        cols[j][i] - t[i] / t[k] * cols[j][k]
    })
}

/// Rank of [`local_jacobian`] at the declared threshold; requires `P` on
/// `S(Y)` up to `1e-8`.
pub fn jacobian_rank(f: &QuaternaryForm<C>, point: &FanoPoint<C>, rank_tol: f64) -> Result<JacobianRank, SolveError> {
    let r = membership_residual(f, point)?;
    if r > 1e-8 {
        return Err(SolveError::NotAMember(r));
    }
    let j = local_jacobian(f, point);
    let sv = singular_values(&j);
    let rank = numerical_rank(&sv, rank_tol);
    let d = f.degree() as usize;
    let relative_gap = if sv.is_empty() || sv[0] == 0.0 { 0.0 } else { sv.get(d - 1).copied().unwrap_or(0.0) / sv[0] };
    Ok(JacobianRank { rank, singular_values: sv, relative_gap })
}

/// Whether a relative gap is close enough to the threshold that the rank
/// decision is not trusted: within two decades either side.
pub fn in_tolerance_band(relative_gap: f64, rank_tol: f64) -> bool {
    relative_gap > rank_tol * 1e-2 && relative_gap < rank_tol * 1e2
}
