//! `bitangent`: bidegrees, counts, local certificates and pencils from the
//! command line. Reports are JSON on stdout (or `--output`).
//!
//! Exit codes: 0 success, 2 inconclusive, 1 error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bitangent_core::chow::bidegree;
use bitangent_core::io::{
    parse_surface, to_json, AnySurface, BidegreeReport, ClassifyReport, CountReportFile, CuspRepr, FanoPointFile, Header,
    PencilReport, SingularityRepr, SmoothnessRepr, CLASSIFY_SCHEMA,
};
use bitangent_core::lines::membership_residual;
use bitangent_core::local::{classify_singularity, cusp_certificate, smoothness_certificate, CaseTag, MEMBERSHIP_TOL};
use bitangent_core::pencil::{find_nodal_members, sample_gamma, verify_rank_two, Pencil};
use bitangent_core::solve::{count_with_certificate, CountKind};
use bitangent_core::{QuaternaryForm, RunConfig, Scalar};
use clap::{Args, Parser, Subcommand, ValueEnum};

const THREADS_VAR: &str = "BITANGENT_THREADS";

#[derive(Parser)]
#[command(name = "bitangent", version, about = "Bitangent congruences of surfaces in P^3")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Order and class of the congruence from the Chow ring.
    Bidegree {
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Count congruence lines through a random point or in a random plane.
    Count {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, value_enum)]
        slice: Slice,
        /// Random slices to repeat the count on.
        #[arg(long, default_value_t = 3)]
        slices: usize,
        /// Seeds per slice.
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Smoothness, singularity and cusp certificates at a point.
    Classify {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        point: PathBuf,
        /// Also require the 3-jet condition for a cusp.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Nodal members of a pencil and the rank along the curve through the node.
    Pencil {
        #[arg(long)]
        surface0: PathBuf,
        #[arg(long)]
        surface1: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Slice {
    /// Lines through a point: the order.
    Point,
    /// Lines in a plane: the class.
    Plane,
}

#[derive(Args)]
struct Tuning {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Newton starts per run; 0 picks a default from the degree.
    #[arg(long, default_value_t = 0)]
    starts: usize,
    #[arg(long, default_value_t = RunConfig::default().rank_tol)]
    rank_tol: f64,
    #[arg(long, default_value_t = RunConfig::default().dedup_radius)]
    dedup_radius: f64,
    #[arg(long, default_value_t = RunConfig::default().root_cluster)]
    root_cluster: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Tuning {
    fn config(&self, default_starts: usize) -> Result<RunConfig> {
        let cfg = RunConfig {
            seed: self.seed,
            starts: if self.starts == 0 { default_starts } else { self.starts },
            rank_tol: self.rank_tol,
            dedup_radius: self.dedup_radius,
            root_cluster: self.root_cluster,
        };
        cfg.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }
}

/// Starts per enumeration run, scaled to the expected count.
fn default_count_starts(degree: u32, slice: Slice) -> usize {
    let base = match degree {
        4 => 4000,
        5 => 18000,
        d => 18000 * (d as usize - 3),
    };
    match slice {
        Slice::Point => base,
        Slice::Plane => 2 * base,
    }
}

enum Outcome {
    Done(String),
    Inconclusive(String),
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_surface(path: &Path) -> Result<AnySurface> {
    parse_surface(&read(path)?).with_context(|| format!("parsing surface {}", path.display()))
}

fn classify<S: Scalar>(f: &QuaternaryForm<S>, point: &FanoPointFile, strict: bool, cfg: &RunConfig) -> Result<ClassifyReport> {
    let p = point.to_point::<S>().context("parsing point")?;
    if p.degree() != f.degree() {
        bail!("point has degree {} but the surface has degree {}", p.degree(), f.degree());
    }
    let membership = match membership_residual(f, &p) {
        Ok(r) => r,
        Err(e) => bail!("point is not on the congruence: {e}"),
    };
    if membership > MEMBERSHIP_TOL {
        bail!("point is not on the congruence: residual {membership:e} exceeds {MEMBERSHIP_TOL:e}");
    }
    let singularity = classify_singularity(f, &p, cfg)?;
    let smoothness = smoothness_certificate(f, &p, cfg).ok().map(|c| SmoothnessRepr::new(&c));
    let cusp = if singularity.case_tag == CaseTag::Case11 {
        cusp_certificate(f, &p, cfg, strict).ok().map(|c| CuspRepr::new(&c))
    } else {
        None
    };
    Ok(ClassifyReport {
        header: Header::new(CLASSIFY_SCHEMA, cfg),
        degree: f.degree(),
        backend: S::BACKEND.into(),
        membership,
        smoothness,
        singularity: SingularityRepr::new(&singularity),
        cusp,
    })
}

fn run(command: Command) -> Result<(Outcome, Option<PathBuf>)> {
    match command {
        Command::Bidegree { degree, output } => {
            let b = bidegree(degree)?;
            Ok((Outcome::Done(to_json(&BidegreeReport::new(&b))), output))
        }
        Command::Count { surface, slice, slices, seeds, tuning } => {
            let f = read_surface(&surface)?;
            let cfg = tuning.config(default_count_starts(f.degree(), slice))?;
            let kind = match slice {
                Slice::Point => CountKind::Order,
                Slice::Plane => CountKind::Class,
            };
            let report = count_with_certificate(&f.to_c64(), kind, slices, seeds, &cfg);
            let json = to_json(&CountReportFile::new(f.degree(), &report, &cfg));
            let outcome = if report.agreement { Outcome::Done(json) } else { Outcome::Inconclusive(json) };
            Ok((outcome, tuning.output))
        }
        Command::Classify { surface, point, strict, tuning } => {
            let f = read_surface(&surface)?;
            let cfg = tuning.config(0)?;
            let point: FanoPointFile = serde_json::from_str(&read(&point)?).context("parsing point")?;
            let report = match &f {
                AnySurface::Exact(f) => classify(f, &point, strict, &cfg)?,
                AnySurface::Float(f) => classify(f, &point, strict, &cfg)?,
            };
            Ok((Outcome::Done(to_json(&report)), tuning.output))
        }
        Command::Pencil { surface0, surface1, samples, tuning } => {
            let y0 = read_surface(&surface0)?;
            let y1 = read_surface(&surface1)?;
            let pencil = Pencil::new(y0.to_c64(), y1.to_c64())?;
            let d = pencil.degree() as usize;
            let cfg = tuning.config(100 * d * d)?;
            let search = find_nodal_members(&pencil, cfg.starts, &cfg);
            let chosen = (!search.members.is_empty()).then_some(0);
            let (gamma, summary) = match chosen {
                Some(i) => {
                    let m = &search.members[i];
                    let f = pencil.member(m.b);
                    let gamma = sample_gamma(&f, &m.node, samples, &cfg)?;
                    let summary = verify_rank_two(&f, &m.node, &gamma.points, &cfg)?;
                    (Some(gamma), Some(summary))
                }
                None => (None, None),
            };
            let report = PencilReport::new(pencil.degree(), &search, chosen, gamma.as_ref(), summary.as_ref(), &cfg);
            let json = to_json(&report);
            let conclusive = search.flagged.is_empty() && gamma.as_ref().is_some_and(|g| !g.partial);
            let outcome = if conclusive { Outcome::Done(json) } else { Outcome::Inconclusive(json) };
            Ok((outcome, tuning.output))
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_VAR}={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|()| run(cli.command)).and_then(|(outcome, output)| {
        let (text, code) = match outcome {
            Outcome::Done(t) => (t, 0),
            Outcome::Inconclusive(t) => (t, 2),
        };
        emit(&text, output.as_deref()).map(|()| code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
