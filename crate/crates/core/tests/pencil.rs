use std::time::Instant;

use bitangent_core::pencil::{find_nodal_members, gamma_conditions, sample_gamma, verify_rank_two, Pencil, RankTwoOutcome};
use bitangent_core::random::{gaussian_change, kostlan_surface, rng_for};
use bitangent_core::{BinaryForm, FanoPoint, ParamLine};
use bitangent_core::RunConfig;

#[test]
fn nodal_quintic_has_rank_two_along_gamma() {
    let t = Instant::now();
    let cfg = RunConfig::with_seed(11);
    let pencil = Pencil::random(5, &mut rng_for(11, 900));
    let search = find_nodal_members(&pencil, 400, &cfg);
    assert!(search.flagged.is_empty());
    let m = &search.members[0];
    println!("members {} after {:?}", search.members.len(), t.elapsed());
    let f = pencil.member(m.b);
    let samples = sample_gamma(&f, &m.node, 20, &cfg).unwrap();
    println!("samples {} attempts {} after {:?}", samples.points.len(), samples.attempts, t.elapsed());
    assert!(!samples.partial);
    assert!(samples.points.iter().all(|p| gamma_conditions(&f.normalized(), &m.node, p)));
    let summary = verify_rank_two(&f, &m.node, &samples.points, &cfg).unwrap();
    for o in &summary.outcomes {
        match o {
            RankTwoOutcome::Checked(r) => println!("dimV {} rank {}", r.dim_v, r.rank_q_star),
            RankTwoOutcome::Skipped(s) => println!("skipped: {s}"),
        }
    }
    assert!(summary.fraction_rank_two >= 0.95);
    assert_eq!(summary.rank_three, 0);
}

fn rank_pattern(f: &bitangent_core::FloatSurface, node: &[bitangent_core::Complex64; 4], cfg: &RunConfig) -> (usize, usize, usize) {
    let samples = sample_gamma(f, node, 12, cfg).unwrap();
    assert!(!samples.partial);
    let s = verify_rank_two(f, node, &samples.points, cfg).unwrap();
    (s.outcomes.len(), s.rank_two, s.rank_three)
}

#[test]
fn rank_summary_survives_coordinate_change() {
    let cfg = RunConfig::with_seed(5);
    let pencil = Pencil::random(5, &mut rng_for(5, 901));
    let search = find_nodal_members(&pencil, 200, &cfg);
    let m = &search.members[0];
    let f = pencil.member(m.b);
    let base = rank_pattern(&f, &m.node, &cfg);
    assert_eq!(base, (12, 12, 0));
    let c = gaussian_change(&mut rng_for(5, 902));
    let moved = f.substitute(&c.inverse(1e-12).unwrap());
    let node: [bitangent_core::Complex64; 4] = c.mul_vec(&m.node).try_into().unwrap();
    assert_eq!(rank_pattern(&moved, &node, &RunConfig::with_seed(6)), base);
}

/// Node at (1,0,0,0) on the line t2 = t3 = 0 with g = t0 t1, and the
/// coefficients of t1^4 t2, t1^4 t3 removed: the tangent data at the second
/// contact point degenerate, so the rank computation must refuse the sample.
#[test]
fn degenerate_sample_is_skipped_with_reason() {
    let cfg = RunConfig::default();
    let mut f = kostlan_surface(5, &mut rng_for(7, 0));
    let zero = bitangent_core::Complex64::new(0.0, 0.0);
    for e in [[5, 0, 0, 0], [4, 1, 0, 0], [1, 4, 0, 0], [0, 5, 0, 0], [4, 0, 1, 0], [4, 0, 0, 1], [0, 4, 1, 0], [0, 4, 0, 1]] {
        f.set_coeff(e, zero);
    }
    let one = bitangent_core::Complex64::new(1.0, 0.0);
    let node = [one, zero, zero, zero];
    let line = ParamLine::new(node, [zero, one, zero, zero]);
    let r = line.restrict(&f);
    let h = BinaryForm::new(r.coeffs()[2..=3].to_vec());
    let p = FanoPoint::new(line, BinaryForm::new(vec![zero, one, zero]), h, 5).unwrap();
    let summary = verify_rank_two(&f, &node, &[p], &cfg).unwrap();
    assert_eq!(summary.checked, 0);
    match &summary.outcomes[0] {
        RankTwoOutcome::Skipped(reason) => assert!(reason.contains("dim V = 4"), "{reason}"),
        RankTwoOutcome::Checked(r) => panic!("checked with dim V = {}", r.dim_v),
    }
}
