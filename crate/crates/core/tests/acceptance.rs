//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see them; each test also asserts its criterion.

use std::sync::OnceLock;
use std::time::Instant;

use bitangent_core::chow::{bidegree, chern_sym, schubert_mul, ChowRing, Monomial, SchubertClass};
use bitangent_core::lines::membership_residual;
use bitangent_core::local::{
    classify_singularity, contacts, cusp_certificate, frame_decompose, make_frame, make_frame_with, random_frame_choice,
    smoothness_certificate, subspace_a, subspace_b, CaseTag, Planted, Verdict,
};
use bitangent_core::forms::multiples;
use bitangent_core::pencil::{find_nodal_members, gamma_conditions, sample_gamma, verify_rank_two, Pencil};
use bitangent_core::random::{integer_binary, integer_change, kostlan_surface, rng_for};
use bitangent_core::solve::{count_with_certificate, in_tolerance_band, jacobian_rank, CountKind, CountReport};
use bitangent_core::{BigRational, BinaryForm, ExactFanoPoint, ExactSurface, FloatSurface, FormSpan, RunConfig, Scalar};
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Q = BigRational;
type Instance = (ExactSurface, ExactFanoPoint);

fn report(n: u32, pass: bool, detail: impl std::fmt::Display) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_chow_identities() {
    let t = Instant::now();
    let sc = |i: usize| SchubertClass::basis(i);
    let int = |a: &SchubertClass, b: &SchubertClass| schubert_mul(a, b).integral();
    let s1 = sc(1);
    let s1_4 = schubert_mul(&schubert_mul(&s1, &s1), &schubert_mul(&s1, &s1));
    let mut ok = int(&sc(2), &sc(2)) == BigInt::from(1)
        && int(&sc(3), &sc(3)) == BigInt::from(1)
        && int(&sc(2), &sc(3)) == BigInt::from(0)
        && s1_4.integral() == BigInt::from(2);
    for d in 4..=6u32 {
        let ring = ChowRing::new(d).unwrap();
        let fibre = ring.mul(&ring.pow(&ring.zeta_l(), 2), &ring.pow(&ring.zeta_m(), d as usize - 4));
        ok &= ring.integrate(&ring.mul(&fibre, &ring.pullback(&sc(5)))) == BigInt::from(1);
        let one = ring.monomial(Monomial { schubert: 0, zl: 0, zm: 0 }, 1);
        let line = one.add(&ring.zeta_l().scale(-2)).add(&ring.zeta_m().scale(-1));
        let prod = ring.mul(&ring.chern_r(), &line);
        let sym = ring.reduce(&ring.pullback(&chern_sym(d as usize).total()));
        ok &= (0..=d as usize).all(|k| prod.part(k) == sym.part(k));
    }
    let elapsed = t.elapsed();
    let pass = ok && elapsed.as_secs_f64() < 1.0;
    report(1, pass, format!("identities exact for d = 4, 5, 6 in {elapsed:?}"));
    assert!(pass);
}

// ---------------------------------------------------------------- 2, 3, 4

fn starts(d: u32, kind: CountKind) -> usize {
    let base = if d == 4 { 4000 } else { 18000 };
    match kind {
        CountKind::Order => base,
        CountKind::Class => 2 * base,
    }
}

fn counts(f: &FloatSurface, kind: CountKind, slices: usize, seeds: usize, seed: u64) -> CountReport {
    let cfg = RunConfig {
        starts: starts(f.degree(), kind),
        ..RunConfig::with_seed(seed)
    };
    count_with_certificate(f, kind, slices, seeds, &cfg)
}

fn run_counts(n: u32, d: u32, surfaces: usize, slices: usize, seeds: usize, budget_s: f64) {
    let t = Instant::now();
    let b = bidegree(d).unwrap();
    let want = (b.order.try_into().unwrap(), b.class.try_into().unwrap());
    let mut ok = true;
    let mut seen = Vec::new();
    for i in 0..surfaces {
        let f = kostlan_surface(d, &mut rng_for(100 + d as u64, i as u64));
        let order = counts(&f, CountKind::Order, slices, seeds, 7 + i as u64);
        let class = counts(&f, CountKind::Class, slices, seeds, 7 + i as u64);
        let got = (order.count, class.count);
        ok &= got == (Some(want.0), Some(want.1));
        seen.push(got);
    }
    let elapsed = t.elapsed();
    let pass = ok && elapsed.as_secs_f64() < budget_s;
    report(
        n,
        pass,
        format!(
            "d = {d}: Chow ({}, {}), numeric {:?} over {slices} slices x {seeds} seeds, {elapsed:?}",
            want.0, want.1, seen
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_quartic_bidegree() {
    run_counts(2, 4, 2, 3, 3, 300.0);
}

/// Quintic runs shared by criteria 3 and 4.
struct QuinticRuns {
    surfaces: Vec<FloatSurface>,
    reports: Vec<(CountReport, CountReport)>,
    seconds: f64,
}

fn quintic_runs() -> &'static QuinticRuns {
    static RUNS: OnceLock<QuinticRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let t = Instant::now();
        let surfaces: Vec<FloatSurface> = (0..3).map(|i| kostlan_surface(5, &mut rng_for(105, i))).collect();
        let reports = surfaces
            .iter()
            .enumerate()
            .map(|(i, f)| (counts(f, CountKind::Order, 2, 1, 30 + i as u64), counts(f, CountKind::Class, 2, 1, 30 + i as u64)))
            .collect();
        QuinticRuns {
            surfaces,
            reports,
            seconds: t.elapsed().as_secs_f64(),
        }
    })
}

#[test]
fn criterion_3_quintic_bidegree() {
    let runs = quintic_runs();
    let b = bidegree(5).unwrap();
    let want: (usize, usize) = (b.order.try_into().unwrap(), b.class.try_into().unwrap());
    let seen: Vec<_> = runs.reports.iter().map(|(o, c)| (o.count, c.count)).collect();
    let pass = seen.iter().all(|&s| s == (Some(want.0), Some(want.1))) && runs.seconds < 1200.0;
    report(3, pass, format!("d = 5: Chow {want:?}, numeric {seen:?} on 3 quintics, {:.1}s", runs.seconds));
    assert!(pass);
}

#[test]
fn criterion_4_certificate_matches_jacobian() {
    let t = Instant::now();
    let runs = quintic_runs();
    let cfg = RunConfig::default();
    let (mut total, mut agree, mut band, mut disagree_outside) = (0, 0, 0, 0);
    for (f, (order, class)) in runs.surfaces.iter().zip(&runs.reports) {
        for sol in order.first.points.iter().chain(&class.first.points) {
            let cert = smoothness_certificate(f, &sol.point, &cfg).unwrap();
            let jac = jacobian_rank(f, &sol.point, cfg.rank_tol).unwrap();
            total += 1;
            let in_band = in_tolerance_band(jac.relative_gap, cfg.rank_tol);
            band += in_band as usize;
            if cert.smooth == (jac.rank == 5) {
                agree += 1;
            } else if !in_band {
                disagree_outside += 1;
            }
        }
    }
    let occupancy = band as f64 / total as f64;
    let pass = total >= 200 && disagree_outside == 0 && occupancy < 0.02 && t.elapsed().as_secs_f64() < 600.0;
    report(
        4,
        pass,
        format!("{agree}/{total} agree, {disagree_outside} disagreements outside the band, band occupancy {:.2}%", 100.0 * occupancy),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 5

fn has_root(b: &BinaryForm<Q>, at: [i64; 2]) -> bool {
    b.eval(&q(at[0]), &q(at[1])) == q(0)
}

/// Random exact point with disjoint contact support, in random coordinates.
fn disjoint_instance(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let d = rng.random_range(5..=6);
        let g = integer_binary::<Q>(2, 4, rng);
        let h = integer_binary::<Q>(d as usize - 4, 4, rng);
        if g.is_zero() || h.is_zero() || g.coeff(0) == &q(0) && g.coeff(1) == &q(0) {
            continue;
        }
        let planted = Planted::new(d, g, h, rng);
        let point = planted.point();
        if contacts(&point, 1e-6).case_tag() != CaseTag::Disjoint || !squarefree_g(&planted.g) {
            continue;
        }
        let (f, p) = planted.moved(&integer_change(2, rng));
        if membership_residual(&f, &p).is_err() {
            continue;
        }
        return (f, p);
    }
}

fn squarefree_g(g: &BinaryForm<Q>) -> bool {
    let (a, b, c) = (g.coeff(0).clone(), g.coeff(1).clone(), g.coeff(2).clone());
    b.clone() * b - q(4) * a * c != q(0)
}

fn a_certificate(f: &ExactSurface, p: &ExactFanoPoint) -> (usize, bool) {
    let d = p.degree() as usize;
    let frame = make_frame(f, p).unwrap();
    let a = subspace_a(&frame, 0.0);
    let expected = FormSpan::new(d, &multiples(&p.g, d - 2), 0.0);
    (a.dim(), a.same_as(&expected, 0.0))
}

fn disjoint_instances() -> &'static Vec<Instance> {
    static SET: OnceLock<Vec<Instance>> = OnceLock::new();
    SET.get_or_init(|| {
        let mut rng = rng_for(500, 0);
        (0..500).map(|_| disjoint_instance(&mut rng)).collect()
    })
}

#[test]
fn criterion_5_a_dimension_law() {
    let set = disjoint_instances();
    let good = set
        .iter()
        .filter(|(f, p)| a_certificate(f, p) == (p.degree() as usize - 1, true))
        .count();
    let pass = set.len() >= 500 && good == set.len();
    report(5, pass, format!("{good}/{} disjoint points with dim A = d-1 and A = g C[t0,t1]_(d-2)", set.len()));
    assert!(pass);
}

// ---------------------------------------------------------------- 6

/// `g` and the forced part of `h` for each tabulated case; the root at
/// `(0:1)` is `t0 = 0`.
fn case_instance(tag: CaseTag, rng: &mut ChaCha8Rng) -> Planted {
    let t0 = BinaryForm::from_ints(&[1, 0]);
    let t0t1 = BinaryForm::from_ints(&[0, 1, 0]);
    let t0sq = BinaryForm::from_ints(&[1, 0, 0]);
    let (g, forced, min_d) = match tag {
        CaseTag::Case11 => (t0t1.clone(), t0.clone(), 5),
        CaseTag::Case12 => (t0t1.clone(), t0t1.clone(), 6),
        CaseTag::Case21 => (t0sq.clone(), t0.clone(), 5),
        CaseTag::Case22 => (t0sq.clone(), t0sq.clone(), 6),
        _ => unreachable!(),
    };
    loop {
        let d: u32 = rng.random_range(min_d..=min_d + 1);
        let k = d as usize - 4 - forced.degree();
        let cofactor = integer_binary::<Q>(k, 3, rng);
        if has_root(&cofactor, [0, 1]) || has_root(&cofactor, [1, 0]) {
            continue;
        }
        let mut planted = Planted::new(d, g.clone(), forced.mul(&cofactor), rng);
        // half the instances get sparse first-order data (gbar, hbar on the
        // line), so rank drops occur
        if rng.random_bool(0.5) {
            for i0 in 0..d {
                let e = [i0, d - 1 - i0, 0, 0];
                if rng.random_bool(0.5) {
                    planted.x([e[0], e[1], 0], q(0));
                }
                if rng.random_bool(0.5) {
                    planted.y(e, q(0));
                }
            }
        }
        if contacts(&planted.point(), 1e-6).case_tag() == tag {
            return planted;
        }
    }
}

struct CaseTally {
    evaluated: usize,
    agree: usize,
    full_rank: usize,
    skipped: usize,
}

fn case_instances() -> &'static Vec<(CaseTag, Vec<Instance>)> {
    static SET: OnceLock<Vec<(CaseTag, Vec<Instance>)>> = OnceLock::new();
    SET.get_or_init(|| {
        [CaseTag::Case11, CaseTag::Case12, CaseTag::Case21, CaseTag::Case22]
            .into_iter()
            .enumerate()
            .map(|(i, tag)| {
                let mut rng = rng_for(600, i as u64);
                let items = (0..240).map(|_| case_instance(tag, &mut rng).moved(&integer_change(2, &mut rng))).collect();
                (tag, items)
            })
            .collect()
    })
}

#[test]
fn criterion_6_case_matrix_consistency() {
    let cfg = RunConfig::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (tag, items) in case_instances() {
        let mut tally = CaseTally { evaluated: 0, agree: 0, full_rank: 0, skipped: 0 };
        for (f, p) in items {
            let Ok(cert) = smoothness_certificate(f, p, &cfg) else {
                tally.skipped += 1;
                continue;
            };
            let (Some(rank), Some(need)) = (cert.rank_my, cert.required_rank) else {
                tally.skipped += 1;
                continue;
            };
            tally.evaluated += 1;
            tally.full_rank += (rank >= need) as usize;
            tally.agree += ((rank >= need) == cert.smooth) as usize;
        }
        pass &= tally.evaluated >= 200 && tally.agree == tally.evaluated;
        lines.push(format!(
            "{tag} {}/{} agree, {} at threshold, {} skipped",
            tally.agree, tally.evaluated, tally.full_rank, tally.skipped
        ));
    }
    report(6, pass, lines.join("; "));
    assert!(pass);
}

// ---------------------------------------------------------------- 7

/// Tangent data at both contact points and `(x_{1,d-2,0}, y_{1,d-2,0,0})`
/// all proportional, everything else random from a wide range so that no
/// further coincidence (a vanishing 2-jet, say) is planted by accident.
fn cusp_instance(rng: &mut ChaCha8Rng) -> Instance {
    let d = 5;
    let mut planted = Planted::with_bound(d, BinaryForm::from_ints(&[0, 1, 0]), BinaryForm::from_ints(&[1, 0]), GENERIC, rng);
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let v: i64 = rng.random_range(-6..=6);
        if v != 0 {
            return q(v);
        }
    };
    let (a, b) = (nonzero(rng), nonzero(rng));
    for e in [[0, d - 1, 0], [d - 1, 0, 0], [1, d - 2, 0]] {
        let c = nonzero(rng);
        planted.x(e, a.clone() * c.clone());
        planted.y([e[0], e[1], e[2], 0], b.clone() * c);
    }
    planted.moved(&integer_change(2, rng))
}

const GENERIC: i64 = 1_000_000;

fn generic_case11(rng: &mut ChaCha8Rng) -> Instance {
    let planted = Planted::with_bound(5, BinaryForm::from_ints(&[0, 1, 0]), BinaryForm::from_ints(&[1, 0]), GENERIC, rng);
    planted.moved(&integer_change(2, rng))
}

fn cusp_instances() -> &'static (Vec<Instance>, Vec<Instance>) {
    static SET: OnceLock<(Vec<Instance>, Vec<Instance>)> = OnceLock::new();
    SET.get_or_init(|| {
        let mut rng = rng_for(700, 0);
        let planted = (0..25).map(|_| cusp_instance(&mut rng)).collect();
        let generic = (0..25).map(|_| generic_case11(&mut rng)).collect();
        (planted, generic)
    })
}

#[test]
fn criterion_7_cusp_certificate() {
    let cfg = RunConfig::default();
    let (planted, generic) = cusp_instances();
    let cusp = |(f, p): &Instance| cusp_certificate(f, p, &cfg, true).unwrap();
    let hits = planted.iter().map(cusp).filter(|c| c.tangent_planes_equal && c.cuspidal_section).count();
    let mut clean = 0;
    let mut rank3 = 0;
    for inst in generic {
        let cert = smoothness_certificate(&inst.0, &inst.1, &cfg).unwrap();
        if cert.rank_my == Some(3) {
            rank3 += 1;
            let c = cusp(inst);
            clean += (!c.tangent_planes_equal && !c.cuspidal_section) as usize;
        }
    }
    let pass = planted.len() >= 20 && hits == planted.len() && rank3 >= 20 && clean == rank3;
    report(
        7,
        pass,
        format!("{hits}/{} planted instances certified, {clean}/{rank3} rank-3 instances clear", planted.len()),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_rank_two_along_gamma() {
    let t = Instant::now();
    let cfg = RunConfig::with_seed(8);
    let pencil = Pencil::random(5, &mut rng_for(800, 0));
    let search = find_nodal_members(&pencil, 2500, &cfg);
    let lefschetz = search.flagged.is_empty() && !search.members.is_empty();
    let m = &search.members[0];
    let f = pencil.member(m.b);
    let samples = sample_gamma(&f, &m.node, 24, &cfg).unwrap();
    let valid = samples.points.iter().all(|p| gamma_conditions(&f.normalized(), &m.node, p));
    let summary = verify_rank_two(&f, &m.node, &samples.points, &cfg).unwrap();
    let pass = lefschetz
        && valid
        && samples.points.len() >= 20
        && summary.fraction_rank_two >= 0.95
        && summary.rank_three == 0
        && t.elapsed().as_secs_f64() < 1800.0;
    report(
        8,
        pass,
        format!(
            "{} nodal members, {} samples, {}/{} with (dim V, rank Q*) = (3, 2), {} with rank 3, {:?}",
            search.members.len(),
            samples.points.len(),
            summary.rank_two,
            samples.points.len(),
            summary.rank_three,
            t.elapsed()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 9

/// Everything a certificate decides, in comparable form.
#[derive(Debug, PartialEq)]
struct Verdicts {
    dim_a: usize,
    dim_ab: usize,
    case: CaseTag,
    smooth: bool,
    meets_threshold: Option<bool>,
    verdict: Verdict,
    cusp: Option<(bool, bool)>,
}

fn verdicts(f: &ExactSurface, p: &ExactFanoPoint, cfg: &RunConfig) -> Verdicts {
    let cert = smoothness_certificate(f, p, cfg).unwrap();
    let sing = classify_singularity(f, p, cfg).unwrap();
    let cusp = (cert.case == CaseTag::Case11)
        .then(|| cusp_certificate(f, p, cfg, true).ok().map(|c| (c.tangent_planes_equal, c.cuspidal_section)))
        .flatten();
    Verdicts {
        dim_a: cert.dim_a,
        dim_ab: cert.dim_ab,
        case: cert.case,
        smooth: cert.smooth,
        meets_threshold: cert.rank_my.zip(cert.required_rank).map(|(r, n)| r >= n),
        verdict: sing.verdict,
        cusp,
    }
}

fn frame_dims(f: &ExactSurface, p: &ExactFanoPoint, rng: &mut ChaCha8Rng) -> (usize, usize) {
    loop {
        let Ok(frame) = make_frame_with(f, p, random_frame_choice(p, rng)) else {
            continue;
        };
        let dec = frame_decompose(f, &frame).unwrap();
        let a = subspace_a(&frame, 0.0);
        let ab = a.join(&subspace_b(&dec, &frame, 0.0), 0.0).unwrap();
        return (a.dim(), ab.dim());
    }
}

#[test]
fn criterion_9_frame_independence() {
    let cfg = RunConfig::default();
    let mut rng = rng_for(900, 0);
    let mut instances: Vec<&Instance> = disjoint_instances().iter().take(100).collect();
    for (_, items) in case_instances() {
        instances.extend(items.iter().filter(|(f, p)| smoothness_certificate(f, p, &cfg).is_ok()).take(50));
    }
    let (planted, generic) = cusp_instances();
    instances.extend(planted.iter().chain(generic));
    let mut stable = 0;
    for (f, p) in &instances {
        let base = verdicts(f, p, &cfg);
        let mut same = (0..5).all(|_| frame_dims(f, p, &mut rng) == (base.dim_a, base.dim_ab));
        for _ in 0..3 {
            let c = integer_change::<Q>(2, &mut rng);
            let inv = c.inverse(0.0).unwrap();
            same &= verdicts(&f.substitute(&inv), &p.transform(&c), &cfg) == base;
        }
        stable += same as usize;
    }
    let pass = stable == instances.len();
    report(9, pass, format!("{stable}/{} instances unchanged under 5 frames and 3 coordinate changes", instances.len()));
    assert!(pass);
}
