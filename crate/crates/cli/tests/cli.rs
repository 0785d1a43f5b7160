use std::path::PathBuf;
use std::process::{Command, Output};

use bitangent_core::io::{to_json, FanoPointFile, SurfaceFile};
use bitangent_core::local::Planted;
use bitangent_core::random::{integer_change, kostlan_surface, rng_for};
use bitangent_core::{BigRational, BinaryForm, Complex64, QuaternaryForm, Scalar};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bitangent"))
}

fn fixture(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn surface_fixture<S: Scalar>(name: &str, f: &QuaternaryForm<S>) -> PathBuf {
    fixture(name, &to_json(&SurfaceFile::from_surface(f)))
}

fn run(cmd: &mut Command) -> (i32, Value, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    let json = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    (status.code().unwrap(), json, String::from_utf8_lossy(&stderr).into_owned())
}

fn q(n: i64) -> BigRational {
    BigRational::from_i64(n)
}

#[test]
fn bidegree_of_quartics_and_bad_degree() {
    let (code, json, _) = run(bin().args(["bidegree", "--degree", "4"]));
    assert_eq!(code, 0);
    assert_eq!(json["order"], 12);
    assert_eq!(json["class"], 28);
    assert_eq!(json["schema"], "bitangent/bidegree/1");
    let (code, json, _) = run(bin().args(["bidegree", "--degree", "5"]));
    assert_eq!(code, 0);
    assert_eq!((json["order"].as_u64(), json["class"].as_u64()), (Some(60), Some(120)));
    let (code, _, err) = run(bin().args(["bidegree", "--degree", "3"]));
    assert_eq!(code, 1);
    assert!(err.contains("degree 3"), "{err}");
}

#[test]
fn quartic_count_is_twelve_and_reproducible() {
    let f = kostlan_surface(4, &mut rng_for(21, 0));
    let path = surface_fixture("quartic.json", &f);
    let args = ["count", "--surface", path.to_str().unwrap(), "--slice", "point", "--slices", "1", "--seeds", "2", "--seed", "4"];
    let first = bin().args(args).output().unwrap();
    let json: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(json["count"], 12);
    assert_eq!(json["config"]["seed"], 4);
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
    let second = bin().args(args).env("BITANGENT_THREADS", "1").output().unwrap();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn malformed_surface_names_the_entry() {
    let text = r#"{"schema":"bitangent/surface/1","degree":4,"backend":"exact",
        "coefficients":[{"exponents":[4,0,0,0],"value":"1"},{"exponents":[2,1,0,0],"value":"3/2"}]}"#;
    let path = fixture("malformed.json", text);
    let (code, _, err) = run(bin().args(["count", "--surface", path.to_str().unwrap(), "--slice", "plane"]));
    assert_eq!(code, 1);
    assert!(err.contains("entry 1") && err.contains("[2, 1, 0, 0]"), "{err}");
}

fn classify(name: &str, f: &QuaternaryForm<BigRational>, p: &bitangent_core::ExactFanoPoint) -> (i32, Value, String) {
    let s = surface_fixture(&format!("{name}-surface.json"), f);
    let pt = fixture(&format!("{name}-point.json"), &to_json(&FanoPointFile::from_point(p)));
    run(bin().args(["classify", "--surface", s.to_str().unwrap(), "--point", pt.to_str().unwrap(), "--strict"]))
}

#[test]
fn classify_disjoint_point_is_smooth() {
    let mut rng = rng_for(22, 0);
    let planted = Planted::new(5, BinaryForm::from_ints(&[0, 1, 0]), BinaryForm::from_ints(&[1, 2]), &mut rng);
    let (f, p) = planted.moved(&integer_change(2, &mut rng));
    let (code, json, err) = classify("disjoint", &f, &p);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json["smoothness"]["smooth"], true);
    assert_eq!(json["smoothness"]["dimA"], 4);
    assert_eq!(json["singularity"]["verdict"], "Smooth");
    assert!(json["cusp"].is_null());
}

#[test]
fn classify_planted_cusp() {
    let d = 5;
    let mut rng = rng_for(23, 0);
    let mut planted = Planted::new(d, BinaryForm::from_ints(&[0, 1, 0]), BinaryForm::from_ints(&[1, 0]), &mut rng);
    for (e, c) in [([0, d - 1, 0], 1), ([d - 1, 0, 0], 2), ([1, d - 2, 0], -1)] {
        planted.x(e, q(2 * c));
        planted.y([e[0], e[1], e[2], 0], q(-3 * c));
    }
    let (f, p) = planted.moved(&integer_change(2, &mut rng));
    let (code, json, err) = classify("cusp", &f, &p);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json["singularity"]["case"], "Case1-1");
    assert_eq!(json["singularity"]["verdict"], "SingularIsolatedCandidate");
    assert_eq!(json["cusp"]["tangent_planes_equal"], true);
    assert_eq!(json["cusp"]["cuspidal_section"], true);
}

#[test]
fn classify_rejects_non_members() {
    let mut rng = rng_for(24, 0);
    let planted = Planted::new(5, BinaryForm::from_ints(&[0, 1, 0]), BinaryForm::from_ints(&[1, 2]), &mut rng);
    let mut f = planted.surface();
    f.set_coeff([4, 1, 0, 0], q(7));
    let (code, _, err) = classify("nonmember", &f, &planted.point());
    assert_eq!(code, 1);
    assert!(err.contains("residual"), "{err}");
}

#[test]
fn pencil_recovers_planted_node() {
    let mut rng = rng_for(25, 0);
    let zero = Complex64::new(0.0, 0.0);
    let mut y0 = kostlan_surface(5, &mut rng);
    for e in [[5, 0, 0, 0], [4, 1, 0, 0], [4, 0, 1, 0], [4, 0, 0, 1]] {
        y0.set_coeff(e, zero);
    }
    let y1 = kostlan_surface(5, &mut rng);
    let a = surface_fixture("pencil0.json", &y0);
    let b = surface_fixture("pencil1.json", &y1);
    let (code, json, err) = run(bin().args(["pencil", "--surface0", a.to_str().unwrap(), "--surface1", b.to_str().unwrap(), "--samples", "20"]));
    assert_eq!(code, 0, "{err}");
    let members = json["members"].as_array().unwrap();
    let planted = members.iter().any(|m| {
        let b = m["b"]["re"].as_f64().unwrap().hypot(m["b"]["im"].as_f64().unwrap());
        let n: Vec<f64> = m["node"].as_array().unwrap().iter().map(|x| x["re"].as_f64().unwrap().hypot(x["im"].as_f64().unwrap())).collect();
        b < 1e-8 && (n[0] - 1.0).abs() < 1e-8 && n[1..].iter().all(|x| *x < 1e-8)
    });
    assert!(planted);
    assert!(members.iter().all(|m| m["hessian_rank"] == 3));
    assert_eq!(json["gamma_samples"]["found"], 20);
    assert!(json["rank2_summary"]["fraction"].as_f64().unwrap() >= 0.95);
    assert_eq!(json["rank2_summary"]["rank_three"], 0);
}

#[test]
fn pencil_degree_mismatch_is_an_error() {
    let mut rng = rng_for(26, 0);
    let a = surface_fixture("mismatch4.json", &kostlan_surface(4, &mut rng));
    let b = surface_fixture("mismatch5.json", &kostlan_surface(5, &mut rng));
    let (code, _, err) = run(bin().args(["pencil", "--surface0", a.to_str().unwrap(), "--surface1", b.to_str().unwrap()]));
    assert_eq!(code, 1);
    assert!(err.contains("degrees 4 and 5"), "{err}");
}
