//! JSON file formats and reports. Every document carries a `schema` tag;
//! reports also embed the run configuration and the library version.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chow::Bidegree;
use crate::config::RunConfig;
use crate::forms::{BinaryForm, FormsError, QuaternaryForm};
use crate::linalg::MatrixRepr;
use crate::lines::{FanoPoint, LinesError, ParamLine};
use crate::local::{CaseTag, CuspCertificate, SingularityReport, SmoothnessCertificate, Verdict};
use crate::pencil::{GammaSamples, NodalMember, NodalSearch, RankTwoOutcome, RankTwoSummary};
use crate::scalar::{Scalar, ScalarParseError, ScalarRepr};
use crate::solve::{CountReport, Solution};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SURFACE_SCHEMA: &str = "bitangent/surface/1";
pub const POINT_SCHEMA: &str = "bitangent/fano-point/1";
pub const BIDEGREE_SCHEMA: &str = "bitangent/bidegree/1";
pub const COUNT_SCHEMA: &str = "bitangent/count/1";
pub const CLASSIFY_SCHEMA: &str = "bitangent/classify/1";
pub const PENCIL_SCHEMA: &str = "bitangent/pencil/1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected schema '{expected}', found '{found}'")]
    Schema { expected: &'static str, found: String },
    #[error("unknown backend '{0}' (expected \"exact\" or \"float\")")]
    UnknownBackend(String),
    #[error("expected a {expected} file, found backend '{found}'")]
    Backend { expected: &'static str, found: String },
    #[error(transparent)]
    Form(#[from] FormsError),
    #[error("coefficient entry {entry}: {source}")]
    Value { entry: usize, source: ScalarParseError },
    #[error("{field}: {source}")]
    Field { field: &'static str, source: ScalarParseError },
    #[error("degree {0} is below 4")]
    Degree(u32),
    #[error(transparent)]
    Point(#[from] LinesError),
}

fn check_schema(found: &str, expected: &'static str) -> Result<(), IoError> {
    if found != expected {
        return Err(IoError::Schema { expected, found: found.to_string() });
    }
    Ok(())
}

fn check_backend<S: Scalar>(found: &str) -> Result<(), IoError> {
    if found != "exact" && found != "float" {
        return Err(IoError::UnknownBackend(found.to_string()));
    }
    if found != S::BACKEND {
        return Err(IoError::Backend { expected: S::BACKEND, found: found.to_string() });
    }
    Ok(())
}

fn field<S: Scalar>(name: &'static str, values: &[ScalarRepr]) -> Result<Vec<S>, IoError> {
    values.iter().map(|v| S::from_repr(v).map_err(|source| IoError::Field { field: name, source })).collect()
}

fn reprs<S: Scalar>(values: &[S]) -> Vec<ScalarRepr> {
    values.iter().map(Scalar::to_repr).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub exponents: [u32; 4],
    pub value: ScalarRepr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub schema: String,
    pub degree: u32,
    pub backend: String,
    pub coefficients: Vec<CoefficientEntry>,
}

/// A surface read from disk, in whichever backend the file declares.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySurface {
    Exact(QuaternaryForm<BigRational>),
    Float(QuaternaryForm<Complex64>),
}

impl AnySurface {
    pub fn degree(&self) -> u32 {
        match self {
            AnySurface::Exact(f) => f.degree(),
            AnySurface::Float(f) => f.degree(),
        }
    }

    pub fn to_c64(&self) -> QuaternaryForm<Complex64> {
        match self {
            AnySurface::Exact(f) => f.to_c64(),
            AnySurface::Float(f) => f.clone(),
        }
    }
}

impl SurfaceFile {
    pub fn from_surface<S: Scalar>(f: &QuaternaryForm<S>) -> Self {
        SurfaceFile {
            schema: SURFACE_SCHEMA.into(),
            degree: f.degree(),
            backend: S::BACKEND.into(),
            coefficients: f
                .terms()
                .into_iter()
                .map(|(exponents, c)| CoefficientEntry { exponents, value: c.to_repr() })
                .collect(),
        }
    }

    pub fn to_surface<S: Scalar>(&self) -> Result<QuaternaryForm<S>, IoError> {
        check_schema(&self.schema, SURFACE_SCHEMA)?;
        check_backend::<S>(&self.backend)?;
        let terms = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(entry, c)| S::from_repr(&c.value).map(|v| (c.exponents, v)).map_err(|source| IoError::Value { entry, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuaternaryForm::from_terms(self.degree, terms)?)
    }

    pub fn to_any(&self) -> Result<AnySurface, IoError> {
        match self.backend.as_str() {
            "exact" => Ok(AnySurface::Exact(self.to_surface()?)),
            "float" => Ok(AnySurface::Float(self.to_surface()?)),
            other => Err(IoError::UnknownBackend(other.to_string())),
        }
    }
}

pub fn parse_surface(text: &str) -> Result<AnySurface, IoError> {
    serde_json::from_str::<SurfaceFile>(text)?.to_any()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRepr {
    pub p: Vec<ScalarRepr>,
    pub q: Vec<ScalarRepr>,
}

impl LineRepr {
    fn from_line<S: Scalar>(l: &ParamLine<S>) -> Self {
        LineRepr { p: reprs(&l.p), q: reprs(&l.q) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoPointFile {
    pub schema: String,
    pub backend: String,
    pub degree: u32,
    pub line: LineRepr,
    pub g: Vec<ScalarRepr>,
    pub h: Vec<ScalarRepr>,
}

fn array4<S: Scalar>(name: &'static str, v: &[ScalarRepr]) -> Result<[S; 4], IoError> {
    let v = field::<S>(name, v)?;
    let n = v.len();
    v.try_into().map_err(|_| IoError::Field {
        field: name,
        source: ScalarParseError::MalformedRational(format!("{n} entries, expected 4")),
    })
}

impl FanoPointFile {
    pub fn from_point<S: Scalar>(p: &FanoPoint<S>) -> Self {
        FanoPointFile {
            schema: POINT_SCHEMA.into(),
            backend: S::BACKEND.into(),
            degree: p.degree(),
            line: LineRepr::from_line(&p.line),
            g: p.g.to_repr(),
            h: p.h.to_repr(),
        }
    }

    pub fn to_point<S: Scalar>(&self) -> Result<FanoPoint<S>, IoError> {
        check_schema(&self.schema, POINT_SCHEMA)?;
        check_backend::<S>(&self.backend)?;
        if self.degree < 4 {
            return Err(IoError::Degree(self.degree));
        }
        let line = ParamLine::new(array4("line.p", &self.line.p)?, array4("line.q", &self.line.q)?);
        let g = BinaryForm::new(field("g", &self.g)?);
        let h = BinaryForm::new(field("h", &self.h)?);
        Ok(FanoPoint::new(line, g, h, self.degree)?)
    }
}

/// Shared header of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub version: String,
    pub config: RunConfig,
}

impl Header {
    pub fn new(schema: &str, cfg: &RunConfig) -> Self {
        Header {
            schema: schema.into(),
            version: VERSION.into(),
            config: cfg.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidegreeReport {
    pub schema: String,
    pub version: String,
    pub degree: u32,
    pub order: u64,
    pub class: u64,
    /// Coefficients of the class of the congruence in the monomial basis of
    /// the Chow ring of the projective bundle.
    #[serde(rename = "class_of_S")]
    pub class_of_s: BTreeMap<String, String>,
}

impl BidegreeReport {
    pub fn new(b: &Bidegree) -> Self {
        BidegreeReport {
            schema: BIDEGREE_SCHEMA.into(),
            version: VERSION.into(),
            degree: b.degree,
            order: b.order.to_u64().expect("order fits in 64 bits"),
            class: b.class.to_u64().expect("class fits in 64 bits"),
            class_of_s: b.class_of_s.named_terms().into_iter().map(|(k, v)| (k, v.to_string())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRepr {
    pub line: LineRepr,
    pub g: Vec<ScalarRepr>,
    pub h: Vec<ScalarRepr>,
    pub lambda: ScalarRepr,
    pub membership: f64,
    pub hits: usize,
}

impl SolutionRepr {
    fn new(s: &Solution) -> Self {
        SolutionRepr {
            line: LineRepr::from_line(&s.point.line),
            g: s.point.g.to_repr(),
            h: s.point.h.to_repr(),
            lambda: s.lambda.to_repr(),
            membership: s.membership,
            hits: s.hits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRepr {
    pub slice: usize,
    pub seed: u64,
    pub count: usize,
    pub converged: usize,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReportFile {
    #[serde(flatten)]
    pub header: Header,
    pub degree: u32,
    pub slice: String,
    pub count: Option<usize>,
    pub stable: bool,
    pub runs: Vec<RunRepr>,
    pub max_residual: f64,
    pub rejected: BTreeMap<String, usize>,
    pub solutions: Vec<SolutionRepr>,
}

impl CountReportFile {
    pub fn new(degree: u32, report: &CountReport, cfg: &RunConfig) -> Self {
        let mut rejected = BTreeMap::new();
        for r in &report.first.rejected {
            let key = match r.reason {
                crate::solve::RejectReason::Residual(_) => "residual".to_string(),
                ref other => other.label(),
            };
            *rejected.entry(key).or_insert(0) += 1;
        }
        CountReportFile {
            header: Header::new(COUNT_SCHEMA, cfg),
            degree,
            slice: match report.kind {
                crate::solve::CountKind::Order => "point".into(),
                crate::solve::CountKind::Class => "plane".into(),
            },
            count: report.count,
            stable: report.agreement,
            runs: report
                .runs
                .iter()
                .map(|r| RunRepr {
                    slice: r.slice,
                    seed: r.seed,
                    count: r.count,
                    converged: r.converged,
                    inconclusive: r.inconclusive,
                })
                .collect(),
            max_residual: report.residuals.iter().copied().fold(0.0, f64::max),
            rejected,
            solutions: report.first.points.iter().map(SolutionRepr::new).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessRepr {
    pub smooth: bool,
    pub immersed: bool,
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimAB")]
    pub dim_ab: usize,
    pub case: CaseTag,
    pub matrix_my: Option<MatrixRepr>,
    pub rank_my: Option<usize>,
    pub required_rank: Option<usize>,
}

impl SmoothnessRepr {
    pub fn new<S: Scalar>(c: &SmoothnessCertificate<S>) -> Self {
        SmoothnessRepr {
            smooth: c.smooth,
            immersed: c.immersed,
            dim_a: c.dim_a,
            dim_ab: c.dim_ab,
            case: c.case,
            matrix_my: c.matrix_my.as_ref().map(MatrixRepr::from),
            rank_my: c.rank_my,
            required_rank: c.required_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityRepr {
    pub case: CaseTag,
    pub verdict: Verdict,
    pub rank_my: Option<usize>,
    pub required_rank: Option<usize>,
    #[serde(rename = "dimA")]
    pub dim_a: Option<usize>,
    #[serde(rename = "dimAB")]
    pub dim_ab: Option<usize>,
    pub distinct_q: bool,
    pub singular_contact: bool,
}

impl SingularityRepr {
    pub fn new<S: Scalar>(r: &SingularityReport<S>) -> Self {
        SingularityRepr {
            case: r.case_tag,
            verdict: r.verdict,
            rank_my: r.rank_my,
            required_rank: r.required_rank,
            dim_a: r.dim_a,
            dim_ab: r.dim_ab,
            distinct_q: r.distinct_q,
            singular_contact: r.singular_contact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspRepr {
    pub tangent_planes_equal: bool,
    pub cuspidal_section: bool,
    pub cubic_transverse: Option<bool>,
    pub plane: Vec<ScalarRepr>,
    pub minors: Vec<ScalarRepr>,
    pub quadratic: Vec<ScalarRepr>,
}

impl CuspRepr {
    pub fn new<S: Scalar>(c: &CuspCertificate<S>) -> Self {
        CuspRepr {
            tangent_planes_equal: c.tangent_planes_equal,
            cuspidal_section: c.cuspidal_section,
            cubic_transverse: c.cubic_transverse,
            plane: reprs(&c.plane),
            minors: reprs(&c.minors),
            quadratic: c.quadratic.to_repr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    #[serde(flatten)]
    pub header: Header,
    pub degree: u32,
    pub backend: String,
    pub membership: f64,
    /// Absent when the surface is singular at a contact point.
    pub smoothness: Option<SmoothnessRepr>,
    pub singularity: SingularityRepr,
    pub cusp: Option<CuspRepr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRepr {
    pub b: ScalarRepr,
    pub node: Vec<ScalarRepr>,
    pub hessian_rank: usize,
}

impl MemberRepr {
    fn new(m: &NodalMember) -> Self {
        MemberRepr {
            b: m.b.to_repr(),
            node: reprs(&m.node),
            hessian_rank: m.hessian_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRepr {
    pub requested: usize,
    pub found: usize,
    pub partial: bool,
    pub points: Vec<FanoPointFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTwoEntry {
    #[serde(rename = "dimV")]
    pub dim_v: Option<usize>,
    #[serde(rename = "rankQstar")]
    pub rank_q_star: Option<usize>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTwoSummaryRepr {
    pub checked: usize,
    pub rank_two: usize,
    pub rank_three: usize,
    pub fraction: f64,
    pub samples: Vec<RankTwoEntry>,
}

impl RankTwoSummaryRepr {
    pub fn new(s: &RankTwoSummary) -> Self {
        RankTwoSummaryRepr {
            checked: s.checked,
            rank_two: s.rank_two,
            rank_three: s.rank_three,
            fraction: s.fraction_rank_two,
            samples: s
                .outcomes
                .iter()
                .map(|o| match o {
                    RankTwoOutcome::Checked(r) => RankTwoEntry {
                        dim_v: Some(r.dim_v),
                        rank_q_star: Some(r.rank_q_star),
                        skipped: None,
                    },
                    RankTwoOutcome::Skipped(reason) => RankTwoEntry {
                        dim_v: None,
                        rank_q_star: None,
                        skipped: Some(reason.clone()),
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilReport {
    #[serde(flatten)]
    pub header: Header,
    pub degree: u32,
    pub starts: usize,
    pub converged: usize,
    pub members: Vec<MemberRepr>,
    /// Singular members that are not nodes; any entry makes the pencil
    /// non-Lefschetz.
    pub non_nodal: Vec<MemberRepr>,
    /// Index into `members` of the member used for the rest of the report.
    pub chosen: Option<usize>,
    pub gamma_samples: Option<GammaRepr>,
    pub rank2_summary: Option<RankTwoSummaryRepr>,
}

impl PencilReport {
    pub fn new(
        degree: u32,
        search: &NodalSearch,
        chosen: Option<usize>,
        gamma: Option<&GammaSamples>,
        summary: Option<&RankTwoSummary>,
        cfg: &RunConfig,
    ) -> Self {
        PencilReport {
            header: Header::new(PENCIL_SCHEMA, cfg),
            degree,
            starts: search.starts,
            converged: search.converged,
            members: search.members.iter().map(MemberRepr::new).collect(),
            non_nodal: search.flagged.iter().map(MemberRepr::new).collect(),
            chosen,
            gamma_samples: gamma.map(|g| GammaRepr {
                requested: g.requested,
                found: g.points.len(),
                partial: g.partial,
                points: g.points.iter().map(FanoPointFile::from_point).collect(),
            }),
            rank2_summary: summary.map(RankTwoSummaryRepr::new),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{integer_surface, kostlan_surface, rng_for};

    #[test]
    fn surfaces_round_trip() {
        let mut rng = rng_for(1, 0);
        let f: QuaternaryForm<BigRational> = integer_surface(4, 9, &mut rng).scale(&BigRational::new(1.into(), 7.into()));
        let text = to_json(&SurfaceFile::from_surface(&f));
        assert!(text.contains("\"/7\"") || text.contains("/7"));
        assert_eq!(parse_surface(&text).unwrap(), AnySurface::Exact(f));
        let g = kostlan_surface(5, &mut rng);
        let text = to_json(&SurfaceFile::from_surface(&g));
        assert_eq!(parse_surface(&text).unwrap(), AnySurface::Float(g));
    }

    #[test]
    fn malformed_files_name_the_entry() {
        let text = r#"{"schema":"bitangent/surface/1","degree":4,"backend":"exact",
            "coefficients":[{"exponents":[4,0,0,0],"value":"1"},{"exponents":[3,0,0,0],"value":"2"}]}"#;
        let err = parse_surface(text).unwrap_err().to_string();
        assert!(err.contains("entry 1"), "{err}");
        let dup = r#"{"schema":"bitangent/surface/1","degree":4,"backend":"exact",
            "coefficients":[{"exponents":[4,0,0,0],"value":"1"},{"exponents":[4,0,0,0],"value":"2"}]}"#;
        assert!(parse_surface(dup).unwrap_err().to_string().contains("more than once"));
        let bad = r#"{"schema":"bitangent/surface/1","degree":4,"backend":"exact",
            "coefficients":[{"exponents":[4,0,0,0],"value":"1/0"}]}"#;
        assert!(parse_surface(bad).unwrap_err().to_string().contains("entry 0"));
        let other = r#"{"schema":"nope","degree":4,"backend":"exact","coefficients":[]}"#;
        assert!(matches!(parse_surface(other), Err(IoError::Schema { .. })));
    }

    #[test]
    fn points_round_trip() {
        let q = |n: i64| BigRational::from_integer(n.into());
        let line = ParamLine::new([q(1), q(0), q(2), q(0)], [q(0), q(1), q(0), q(-3)]);
        let p = FanoPoint::new(line, BinaryForm::new(vec![q(0), q(1), q(0)]), BinaryForm::new(vec![q(1), q(1)]), 5).unwrap();
        let file = FanoPointFile::from_point(&p);
        let back: FanoPointFile = serde_json::from_str(&to_json(&file)).unwrap();
        assert_eq!(back.to_point::<BigRational>().unwrap(), p);
        assert!(matches!(back.to_point::<Complex64>(), Err(IoError::Backend { .. })));
    }
}
