//! Command-line front end: argument model, JSON run reports and command execution.
//!
//! Exit codes are 0 when every check passes, 1 on a mathematical failure
//! (containment, certification or inequality violated) and 2 on usage errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use curvb_core::bounds::{
    estimate_range, SectionalRange, BoundsError, CONTAINMENT_TOL, DEFAULT_BUDGET, DEFAULT_REFINE_STEPS,
};
use curvb_core::certify::{certify_quadric_h, grid_to_csv, quadric_h_surface, Box2, CertifiedBound};
use curvb_core::immersion::{
    fixture, parse_spec, ExtrinsicReport, FixtureKind, ImmersionCase, ImmersionError, INEQUALITY_TOL, WARPED_TOL,
};
use curvb_core::spaces::{build_structure, AmbientModel, ModelKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
/// Lower bound on `h` over `[0, π/2]²` that `certify-h` must confirm.
pub const CLAIMED_H_LOWER: f64 = -3.3;
pub const DEFAULT_MAX_BOXES: usize = 10_000_000;
pub const DEFAULT_SURFACE_RESOLUTION: usize = 129;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "curvb", version, about = "Sectional-curvature ranges, certified bounds and warped-product inequality checks")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "CURVB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report (or CSV) here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate inf/sup of the sectional curvature of a model space and
    /// compare with its theorem range.
    Bounds(BoundsArgs),
    /// Certify the minimum of h(x, y) on [0, π/2]² by interval branch and bound.
    CertifyH(CertifyArgs),
    /// Check Δf/f against the Chen interval on a warped-product immersion.
    #[command(long_about = CHECK_ABOUT)]
    Check(CheckArgs),
    /// Emit h(x, y) on a square grid over [0, π/2]² as CSV.
    Surface(SurfaceArgs),
}

const CHECK_ABOUT: &str = "\
Check Δf/f against the Chen interval on a warped-product immersion.

The immersion is either a named fixture (--fixture) or a TOML spec file.
A spec file holds `fixture = \"NAME\"` with optional `radius`/`c`, or an
inline [chart] table:

  [chart]
  base = [\"t\"]                 base coordinates
  fiber = [\"s\"]                fiber coordinates
  map = [\"...\", ...]           ambient chart coordinates, in base+fiber vars
  warping = \"sin(t)\"           f, in base vars
  c = 1.0                       ambient curvature (default 0)
  base_metric = [[\"1\"]]        optional, default identity
  fiber_metric = [[\"1\"]]       optional, default identity
  base_domain = [[0.3, 2.6]]
  fiber_domain = [[0.0, 6.28]]

Expressions: numbers (1, 2.5, 1e-3), variables, pi, e, + - * / ^
(right associative, binds tighter than unary minus), parentheses, and
sin cos tan exp ln sqrt sinh cosh tanh abs.";

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// real | complex | quaternionic | sasakian | kenmotsu | grassmannian | hyperbolic-grassmannian | quadric
    pub model: ModelKind,
    /// Curvature parameter of the space forms.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Real dimension of a space form [defaults: real 3, complex 4, quaternionic 8, sasakian/kenmotsu 5].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Rank parameter of the Grassmannians (dimension 4m) and the quadric (dimension 2m) [defaults 2, 2, 3].
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Pattern-search sweeps per frame.
    #[arg(long, default_value_t = DEFAULT_REFINE_STEPS)]
    pub refine: usize,
    /// Outward containment tolerance.
    #[arg(long, default_value_t = CONTAINMENT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Target width of the minimum enclosure.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_BOXES)]
    pub max_boxes: usize,
    /// Also write an N×N CSV grid of h.
    #[arg(long, value_name = "N")]
    pub surface: Option<usize>,
    #[arg(long, default_value = "h_surface.csv", requires = "surface")]
    pub surface_out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["spec", "fixture"])))]
pub struct CheckArgs {
    /// TOML immersion spec.
    pub spec: Option<PathBuf>,
    /// plane | cylinder | sphere-in-sphere
    #[arg(long)]
    pub fixture: Option<FixtureKind>,
    #[arg(long, requires = "fixture")]
    pub radius: Option<f64>,
    #[arg(long, requires = "fixture", allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Number of sample points.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, default_value_t = INEQUALITY_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value_t = DEFAULT_SURFACE_RESOLUTION)]
    pub resolution: usize,
}

/// What a report is about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelDescriptor {
    Ambient(AmbientModel),
    Immersion {
        name: String,
        source: String,
        m1: usize,
        m2: usize,
        ambient: AmbientModel,
    },
    Function {
        name: String,
        domain: Box2,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Payload {
    SectionalRange(SectionalRange),
    CertifiedBound { bound: CertifiedBound, claimed_lower: f64 },
    Extrinsic(Vec<ExtrinsicReport>),
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub model: ModelDescriptor,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub result: Payload,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl RunReport {
    fn new(command: &str, model: ModelDescriptor, seed: u64, tolerances: &[(&str, f64)], result: Payload, pass: bool) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            model,
            seed,
            tolerances: tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            result,
            pass,
            wall_time_s: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

/// Command output: the text to emit and whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    pub report: Option<RunReport>,
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

/// Resolve the model and dimension flags of `bounds`.
pub fn resolve_model(args: &BoundsArgs) -> Result<AmbientModel, CliError> {
    let kind = args.model;
    let n = match kind {
        ModelKind::ComplexGrassmannian | ModelKind::HyperbolicGrassmannian | ModelKind::ComplexQuadric => {
            if args.dim.is_some() {
                return Err(CliError::Usage(format!("--dim does not apply to {kind}; use --m")));
            }
            let (default_m, factor) = if kind == ModelKind::ComplexQuadric { (3, 2) } else { (2, 4) };
            let m = args.m.unwrap_or(default_m);
            if m == 0 {
                return Err(CliError::Usage("--m must be at least 1".into()));
            }
            factor * m
        }
        _ => {
            if args.m.is_some() {
                return Err(CliError::Usage(format!("--m does not apply to {kind}; use --dim")));
            }
            args.dim.unwrap_or(match kind {
                ModelKind::RealSpaceForm => 3,
                ModelKind::ComplexSpaceForm => 4,
                ModelKind::QuaternionicSpaceForm => 8,
                _ => 5,
            })
        }
    };
    AmbientModel::new(kind, args.c, n).map_err(usage)
}

fn cmd_bounds(args: &BoundsArgs, seed: u64) -> Result<RunReport, CliError> {
    let model = resolve_model(args)?;
    if args.budget == 0 {
        return Err(CliError::Usage("--budget must be at least 1".into()));
    }
    positive("tol", args.tol)?;
    let ops = build_structure(&model).map_err(usage)?;
    let range = estimate_range(&model, &ops, args.budget, args.refine, seed).map_err(|e| match e {
        BoundsError::EmptyBudget | BoundsError::Space(_) => usage(e),
        other => CliError::Failure(other.to_string()),
    })?;
    let pass = range.contained(args.tol);
    Ok(RunReport::new(
        "bounds",
        ModelDescriptor::Ambient(model),
        seed,
        &[("containment", args.tol)],
        Payload::SectionalRange(range),
        pass,
    ))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn surface_csv(resolution: usize) -> Result<String, CliError> {
    if resolution < 2 {
        return Err(CliError::Usage("surface resolution must be at least 2".into()));
    }
    Ok(grid_to_csv(&quadric_h_surface(resolution)))
}

fn cmd_certify(args: &CertifyArgs, seed: u64) -> Result<RunReport, CliError> {
    positive("tol", args.tol)?;
    if args.max_boxes == 0 {
        return Err(CliError::Usage("--max-boxes must be at least 1".into()));
    }
    let csv = args.surface.map(surface_csv).transpose()?;
    let bound = certify_quadric_h(args.tol, args.max_boxes).map_err(usage)?;
    if let Some(csv) = csv {
        write_file(&args.surface_out, &csv)?;
    }
    let pass = bound.converged && bound.enclosure_lo >= CLAIMED_H_LOWER;
    Ok(RunReport::new(
        "certify-h",
        ModelDescriptor::Function {
            name: "h".into(),
            domain: Box2::quarter_square(),
        },
        seed,
        &[("width", args.tol)],
        Payload::CertifiedBound {
            bound,
            claimed_lower: CLAIMED_H_LOWER,
        },
        pass,
    ))
}

fn immersion_error(e: ImmersionError) -> CliError {
    match e {
        ImmersionError::RankDeficient { .. } | ImmersionError::SingularMetric(_) | ImmersionError::Geom(_) => {
            CliError::Failure(e.to_string())
        }
        other => usage(other),
    }
}

fn load_case(args: &CheckArgs) -> Result<(ImmersionCase, String), CliError> {
    match (&args.spec, args.fixture) {
        (Some(_), None) if args.radius.is_some() || args.c.is_some() => {
            Err(CliError::Usage("--radius and --c apply to --fixture only".into()))
        }
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let case = parse_spec(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok((case, path.display().to_string()))
        }
        (None, Some(kind)) => Ok((fixture(kind, args.radius, args.c).map_err(usage)?, "fixture".into())),
        _ => Err(CliError::Usage("give exactly one of SPEC or --fixture".into())),
    }
}

fn cmd_check(args: &CheckArgs, seed: u64) -> Result<RunReport, CliError> {
    positive("tol", args.tol)?;
    if args.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let (case, source) = load_case(args)?;
    let reports = case.check_sampled(args.points, seed, args.tol).map_err(immersion_error)?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(RunReport::new(
        "check",
        ModelDescriptor::Immersion {
            name: case.name.clone(),
            source,
            m1: case.spec.m1,
            m2: case.spec.m2,
            ambient: case.immersion.ambient_kind,
        },
        seed,
        &[("inequality", args.tol), ("warped_product", WARPED_TOL)],
        Payload::Extrinsic(reports),
        pass,
    ))
}

/// Run a parsed command line without writing its main output.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let report = match &cli.command {
        Command::Surface(args) => {
            return Ok(Outcome {
                body: surface_csv(args.resolution)?,
                pass: true,
                report: None,
            })
        }
        Command::Bounds(args) => cmd_bounds(args, cli.seed)?,
        Command::CertifyH(args) => cmd_certify(args, cli.seed)?,
        Command::Check(args) => cmd_check(args, cli.seed)?,
    };
    let report = RunReport {
        wall_time_s: start.elapsed().as_secs_f64(),
        ..report
    };
    Ok(Outcome {
        body: report.to_json(),
        pass: report.pass,
        report: Some(report),
    })
}

/// Execute inside a pool of `--threads` workers and write the output.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let outcome = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(usage)?
            .install(|| execute(cli))?,
        None => execute(cli)?,
    };
    match &cli.out {
        Some(path) => write_file(path, &outcome.body)?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome.pass)
}
