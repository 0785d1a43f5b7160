use bitangent_core::io::{parse_surface, to_json, AnySurface, FanoPointFile, SurfaceFile};
use bitangent_core::lines::membership_residual;
use bitangent_core::local::{classify_singularity, frame_decompose, make_frame, smoothness_certificate, Planted};
use bitangent_core::random::{integer_binary, integer_change, integer_surface, rng_for};
use bitangent_core::{BigRational, ExactFanoPoint, FanoPoint, QuaternaryForm, RunConfig, Scalar};
use proptest::prelude::*;

type Q = BigRational;

fn instance(seed: u64, d: u32) -> Option<(QuaternaryForm<Q>, ExactFanoPoint)> {
    let mut rng = rng_for(seed, d as u64);
    let g = integer_binary::<Q>(2, 3, &mut rng);
    let h = integer_binary::<Q>(d as usize - 4, 3, &mut rng);
    if g.is_zero() || h.is_zero() || g.degree() != 2 {
        return None;
    }
    let planted = Planted::new(d, g, h, &mut rng);
    let (f, p) = planted.moved(&integer_change(2, &mut rng));
    membership_residual(&f, &p).ok().map(|_| (f, p))
}

fn ratio(n: i64, m: i64) -> Q {
    Q::from_i64(n) / Q::from_i64(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_reconstructs_exactly(seed in 0u64..10_000, d in 4u32..=6) {
        if let Some((f, p)) = instance(seed, d) {
            let frame = make_frame(&f, &p).unwrap();
            let dec = frame_decompose(&f, &frame).unwrap();
            prop_assert_eq!(frame.pull_back(&f), dec.reconstruct(&frame.point));
            prop_assert!(dec.gbar.terms().iter().all(|(e, _)| e[3] == 0));
        }
    }

    #[test]
    fn certificates_ignore_scaling(seed in 0u64..10_000, d in 5u32..=6, a in 1i64..9, b in 1i64..9, c in 1i64..9) {
        if let Some((f, p)) = instance(seed, d) {
            let cfg = RunConfig::default();
            let scaled_f = f.scale(&ratio(-a, 3));
            let scaled_p = FanoPoint::new(p.line.clone(), p.g.scale(&ratio(b, 2)), p.h.scale(&ratio(-5, c)), d).unwrap();
            let (Ok(x), Ok(y)) = (smoothness_certificate(&f, &p, &cfg), smoothness_certificate(&scaled_f, &scaled_p, &cfg)) else {
                return Ok(());
            };
            prop_assert_eq!((x.dim_a, x.dim_ab, x.case, x.rank_my, x.required_rank), (y.dim_a, y.dim_ab, y.case, y.rank_my, y.required_rank));
            let (u, v) = (classify_singularity(&f, &p, &cfg).unwrap(), classify_singularity(&scaled_f, &scaled_p, &cfg).unwrap());
            prop_assert_eq!((u.case_tag, u.verdict), (v.case_tag, v.verdict));
        }
    }

    #[test]
    fn files_round_trip(seed in 0u64..10_000, d in 4u32..=6) {
        let mut rng = rng_for(seed, 0);
        let f: QuaternaryForm<Q> = integer_surface(d, 50, &mut rng).scale(&ratio(1, 1 + (seed % 97) as i64));
        prop_assert_eq!(parse_surface(&to_json(&SurfaceFile::from_surface(&f))).unwrap(), AnySurface::Exact(f));
        if let Some((_, p)) = instance(seed, d) {
            let text = to_json(&FanoPointFile::from_point(&p));
            let back: FanoPointFile = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_point::<Q>().unwrap(), p);
        }
    }
}

#[test]
fn binary_forms_survive_scaling_of_the_line() {
    // reparametrizing the line by a diagonal matrix moves nothing
    let (f, p) = instance(3, 5).unwrap();
    let m = [[ratio(2, 1), ratio(0, 1)], [ratio(0, 1), ratio(-1, 3)]];
    let moved = p.reparametrize(&m);
    let cfg = RunConfig::default();
    let a = smoothness_certificate(&f, &p, &cfg).unwrap();
    let b = smoothness_certificate(&f, &moved, &cfg).unwrap();
    assert_eq!((a.dim_a, a.dim_ab, a.case), (b.dim_a, b.dim_ab, b.case));
    assert_eq!(membership_residual(&f, &moved).unwrap(), 0.0);
}
