//! `lipgrid` command-line driver.
//!
//! Subcommands that take a `--config` JSON file accept a long flag for every
//! field; flags win over the file.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use lipgrid::assign::{counting_lower_bound, solve_exact, solve_heuristic, BoundsReport, Schedule};
use lipgrid::dichotomy::{build_nested_families, iteration_bound, min_resolution, params_nd, OffsetRule};
use lipgrid::encoder::{closest_within, discrete_measure_deviation, encode_stage, plan_stage};
use lipgrid::experiment::{render_plot, run_pipeline, validate_artifacts, ExperimentConfig};
use lipgrid::forge::{chessboard, linf_chessboard, perturb_density, ChessboardSpec};
use lipgrid::geometry::{GridDensity, NestedFamilies};
use lipgrid::io::{
    format_g12, read_json, write_json, AssignmentFile, ChessboardSpecFile, DensityFile, FamiliesFile,
    PiecewiseLinearFile, SampledMapFile, SeparatedSetFile,
};
use lipgrid::mapping::SampledMap;
use lipgrid::rational::{parse_rational, to_f64};
use lipgrid::regularity::{
    covering_regularity, dyadic_probes, fold_map, iterated_fold, porosity_radius, preimage_count, preimage_count_1d,
    topological_degree, FatCantorSpec, PiecewiseLinear1D, Region,
};
use lipgrid::{Error, Result};

#[derive(Parser)]
#[command(name = "lipgrid", version, about = "Chessboard densities, separated sets and Lipschitz grid assignments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build nested families and a chessboard density, or an L∞ chessboard of a density.
    Forge(ForgeFlags),
    /// Encode one stage of a density as a separated set.
    Encode(EncodeFlags),
    /// Bound the best Lipschitz bijection from a separated set onto its grid.
    Solve(SolveFlags),
    /// Closed-form bounds and parameter calculators.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Topological degree of a sampled piecewise-affine map.
    Degree(DegreeFlags),
    /// Fold maps, covering regularity and preimage counts.
    Regularity(RegularityFlags),
    /// Run the full encode-and-solve experiment.
    Pipeline(PipelineFlags),
    /// Chart a bounds table as SVG.
    Plot { csv: PathBuf, svg: PathBuf },
    /// Check every applicable invariant of the given artifact files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

/// Reads `config` (if any), lays the set flags over it and deserializes.
fn resolve<T: DeserializeOwned>(config: Option<&Path>, flags: &impl Serialize) -> Result<T> {
    let mut base = match config {
        Some(path) => read_json::<Value>(path)?,
        None => Value::Object(Default::default()),
    };
    let Value::Object(over) = serde_json::to_value(flags).map_err(|e| Error::Config(e.to_string()))? else {
        unreachable!("flag structs serialize to objects")
    };
    base.as_object_mut().ok_or_else(|| Error::Config("config file must hold a JSON object".into()))?.extend(over);
    serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))
}

#[derive(Args, Serialize)]
struct ForgeFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// `chessboard` or `linf`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    taper: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    /// `origin` or `centered`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    offsets: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<f64>,
    /// Input density for `linf`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<PathBuf>,
    /// Families file for `linf`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    families: Option<PathBuf>,
    /// 1-based level of `families` used by `linf`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn default_mode() -> String {
    "chessboard".into()
}
fn default_one() -> String {
    "1".into()
}
fn default_eta() -> String {
    "1/9".into()
}
fn default_taper() -> String {
    "1/16".into()
}
fn default_offsets() -> String {
    "centered".into()
}
fn default_base() -> f64 {
    1.0
}
fn default_level() -> usize {
    1
}

#[derive(Deserialize)]
struct ForgeConfig {
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    r: Option<usize>,
    #[serde(default = "default_one")]
    c: String,
    eps: f64,
    #[serde(default = "default_eta")]
    eta: String,
    #[serde(default = "default_taper")]
    taper: String,
    #[serde(default)]
    resolution: Option<usize>,
    #[serde(default = "default_offsets")]
    offsets: String,
    #[serde(default = "default_base")]
    base: f64,
    #[serde(default)]
    density: Option<PathBuf>,
    #[serde(default)]
    families: Option<PathBuf>,
    #[serde(default = "default_level")]
    level: usize,
    out: PathBuf,
}

fn required<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing `{name}`")))
}

fn forge(flags: ForgeFlags) -> Result<bool> {
    let cfg: ForgeConfig = resolve(flags.config.as_deref(), &flags)?;
    match cfg.mode.as_str() {
        "chessboard" => {
            let rule = match cfg.offsets.as_str() {
                "origin" => OffsetRule::Origin,
                "centered" => OffsetRule::Centered,
                other => return Err(Error::Config(format!("unknown offset rule `{other}`"))),
            };
            let d = required(cfg.d, "d")?;
            let fam = build_nested_families(
                d,
                required(cfg.n, "n")?,
                required(cfg.m, "m")?,
                required(cfg.r, "r")?,
                parse_rational(&cfg.c)?,
                &rule,
            )?;
            let spec = ChessboardSpec {
                families: fam,
                eps: cfg.eps,
                eta: parse_rational(&cfg.eta)?,
                taper: parse_rational(&cfg.taper)?,
            };
            let resolution = required(cfg.resolution, "resolution")?;
            let psi = chessboard(&spec, resolution)?;
            let rho = perturb_density(&GridDensity::constant(d, resolution, cfg.base)?, &psi)?;
            let paths = [cfg.out.join("families.json"), cfg.out.join("chessboard.json"), cfg.out.join("density.json")];
            write_json(&paths[0], &FamiliesFile::from(&spec.families))?;
            write_json(&paths[1], &ChessboardSpecFile::from(&spec))?;
            write_json(&paths[2], &DensityFile::from(&rho))?;
            println!("density on {resolution}^{d} cells, inf {} sup {}", format_g12(rho.inf()), format_g12(rho.sup()));
            report(&validate_artifacts(&paths[1..])?)
        }
        "linf" => {
            let density = required(cfg.density, "density")?;
            let rho = GridDensity::try_from(&read_json::<DensityFile>(&density)?)?;
            let fam = NestedFamilies::try_from(&read_json::<FamiliesFile>(&required(cfg.families, "families")?)?)?;
            let level = fam
                .levels
                .get(cfg.level.wrapping_sub(1))
                .ok_or_else(|| Error::Config(format!("no level {}", cfg.level)))?;
            let psi = linf_chessboard(level, &rho, cfg.eps)?;
            let path = cfg.out.join("density.json");
            write_json(&path, &DensityFile::from(&psi))?;
            let moved = psi.cells().iter().zip(rho.cells()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let gap = lipgrid::forge::adjacent_average_gap(&psi, level)?;
            println!("max change {} min adjacent gap {}", format_g12(moved), format_g12(gap));
            Ok(moved <= cfg.eps && gap >= cfg.eps)
        }
        other => Err(Error::Config(format!("unknown forge mode `{other}`"))),
    }
}

#[derive(Args, Serialize)]
struct EncodeFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    l_override: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct EncodeConfig {
    density: PathBuf,
    m: usize,
    p: f64,
    #[serde(default)]
    l_override: Option<f64>,
    out: PathBuf,
}

fn encode(flags: EncodeFlags) -> Result<bool> {
    let cfg: EncodeConfig = resolve(flags.config.as_deref(), &flags)?;
    let rho = GridDensity::try_from(&read_json::<DensityFile>(&cfg.density)?)?;
    let rho = lipgrid::encoder::normalize_density(&rho)?;
    let plan = plan_stage(&rho, cfg.m, cfg.p, cfg.l_override)?;
    let set = encode_stage(&plan)?;
    let dev = discrete_measure_deviation(&plan, &set)?;
    write_json(&cfg.out, &SeparatedSetFile::from(&set))?;
    let separated = closest_within(&set.points, set.r).is_none();
    println!(
        "n {} points {} r {} l {} deviation {} bound {}",
        set.n,
        set.points.len(),
        format_g12(set.r),
        format_g12(plan.l),
        format_g12(dev.max),
        format_g12(dev.bound)
    );
    Ok(separated && dev.max <= dev.bound)
}

#[derive(Args, Serialize)]
struct SolveFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    set: Option<PathBuf>,
    /// `heuristic`, `exact` or `both`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    node_budget: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    proposals: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn default_method() -> String {
    "both".into()
}
fn default_budget() -> u64 {
    2_000_000
}
fn default_restarts() -> usize {
    4
}

#[derive(Deserialize)]
struct SolveConfig {
    set: PathBuf,
    #[serde(default = "default_method")]
    method: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_budget")]
    node_budget: u64,
    #[serde(default)]
    proposals: Option<u64>,
    #[serde(default = "default_restarts")]
    restarts: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

fn solve(flags: SolveFlags) -> Result<bool> {
    let cfg: SolveConfig = resolve(flags.config.as_deref(), &flags)?;
    let set = read_json::<SeparatedSetFile>(&cfg.set)?;
    let schedule = Schedule { proposals: cfg.proposals, restarts: cfg.restarts, ..Schedule::default() };
    let heuristic = || solve_heuristic(&set.points, set.n, cfg.seed, &schedule);
    let exact = || solve_exact(&set.points, set.n, cfg.node_budget);
    let best: BoundsReport = match cfg.method.as_str() {
        "heuristic" => heuristic()?,
        "exact" => exact()?,
        "both" => {
            let (h, e) = (heuristic()?, exact()?);
            if h.upper < e.upper {
                BoundsReport { upper: h.upper, assignment: h.assignment, ..e }
            } else {
                e
            }
        }
        other => return Err(Error::Config(format!("unknown method `{other}`"))),
    };
    if let Some(out) = &cfg.out {
        write_json(out, &AssignmentFile::new(&best.assignment, Some(&set.points)))?;
    }
    println!(
        "n {} lower {} upper {} exact {} work {}",
        set.n,
        format_g12(best.lower),
        format_g12(best.upper),
        best.exact.map_or("-".into(), format_g12),
        best.work
    );
    Ok(best.lower <= best.upper * (1.0 + 1e-12))
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Lower bound from counting points near each point.
    Counting {
        #[arg(long)]
        set: PathBuf,
    },
    /// `eps / (2 (4 + C (phi_sup + 1 + 6 (L / b)^d)))` with `b = 1/(2 C^2)`.
    PorosityRadius {
        #[arg(long)]
        eps: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long = "L")]
        lipschitz: f64,
        #[arg(long)]
        phi_sup: f64,
        #[arg(long)]
        d: usize,
    },
    /// Dichotomy parameters for dimension `d`.
    Params {
        #[arg(long)]
        d: usize,
        #[arg(long = "L")]
        lipschitz: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Number of refinements after which the probe must succeed.
    Iteration {
        #[arg(long = "L")]
        lipschitz: f64,
        #[arg(long)]
        phi: f64,
    },
    /// Smallest `N` keeping finer levels below the overlap bound `eta`.
    MinResolution {
        #[arg(long)]
        d: usize,
        #[arg(long = "M")]
        m: usize,
        #[arg(long, default_value = "1/9")]
        eta: String,
    },
}

fn bound(cmd: BoundCommand) -> Result<bool> {
    match cmd {
        BoundCommand::Counting { set } => {
            let set = read_json::<SeparatedSetFile>(&set)?;
            println!("{}", format_g12(counting_lower_bound(&set.points, set.d)));
        }
        BoundCommand::PorosityRadius { eps, c, lipschitz, phi_sup, d } => {
            println!("{}", format_g12(porosity_radius(eps, c, lipschitz, phi_sup, d)?));
        }
        BoundCommand::Params { d, lipschitz, eps } => {
            let p = params_nd(d, lipschitz, eps)?;
            p.verify()?;
            println!("M {}", p.m);
            println!("N0 {}", p.n0);
            println!("phi {}", format_g12(p.phi));
            println!("t {}", format_g12(p.t));
        }
        BoundCommand::Iteration { lipschitz, phi } => println!("{}", iteration_bound(lipschitz, phi)?),
        BoundCommand::MinResolution { d, m, eta } => println!("{}", min_resolution(d, m, &parse_rational(&eta)?)?),
    }
    Ok(true)
}

#[derive(Args, Serialize)]
struct DegreeFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct DegreeConfig {
    map: PathBuf,
    #[serde(default)]
    lower: Option<Vec<f64>>,
    #[serde(default)]
    upper: Option<Vec<f64>>,
    y: Vec<f64>,
}

fn load_map(path: &Path) -> Result<SampledMap> {
    SampledMap::try_from(read_json::<SampledMapFile>(path)?).map_err(|e| e.context(path.display()))
}

fn degree(flags: DegreeFlags) -> Result<bool> {
    let cfg: DegreeConfig = resolve(flags.config.as_deref(), &flags)?;
    let map = load_map(&cfg.map)?;
    let region = match (cfg.lower, cfg.upper) {
        (Some(lower), Some(upper)) => Region { lower, upper },
        (None, None) => {
            let grid = map.grid().ok_or_else(|| Error::Config("mesh maps need `lower` and `upper`".into()))?;
            Region { lower: grid.lower.clone(), upper: grid.upper.clone() }
        }
        _ => return Err(Error::Config("give both `lower` and `upper`".into())),
    };
    println!("{}", topological_degree(&map, &region, &cfg.y)?);
    Ok(true)
}

#[derive(Args, Serialize)]
struct RegularityFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// `fold`, `iterated`, `file` or `sampled`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    map: Option<PathBuf>,
    /// Dyadic probe levels `j` (intervals of length `2^-j`).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    scales: Option<Vec<u32>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c_max: Option<u32>,
    /// Point whose preimages are counted (`p/q` in 1-D, comma list for sampled maps).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn default_scales() -> Vec<u32> {
    vec![3, 6, 9, 12]
}
fn default_c_max() -> u32 {
    10
}

#[derive(Deserialize)]
struct RegularityConfig {
    mode: String,
    #[serde(default)]
    a: Option<String>,
    #[serde(default)]
    c: Option<String>,
    #[serde(default)]
    eps: Option<f64>,
    #[serde(default)]
    n_max: Option<usize>,
    #[serde(default)]
    map: Option<PathBuf>,
    #[serde(default = "default_scales")]
    scales: Vec<u32>,
    #[serde(default = "default_c_max")]
    c_max: u32,
    #[serde(default)]
    y: Option<String>,
    #[serde(default)]
    out: Option<PathBuf>,
}

fn regularity(flags: RegularityFlags) -> Result<bool> {
    let cfg: RegularityConfig = resolve(flags.config.as_deref(), &flags)?;
    if cfg.mode == "sampled" {
        let map = load_map(&required(cfg.map, "map")?)?;
        let y = required(cfg.y, "y")?
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad coordinate `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        println!("{}", preimage_count(&map, &y)?);
        return Ok(true);
    }
    let f = match cfg.mode.as_str() {
        "fold" => fold_map(&parse_rational(&required(cfg.a, "a")?)?, &parse_rational(&required(cfg.c, "c")?)?)?,
        "iterated" => {
            iterated_fold(&FatCantorSpec::new(required(cfg.eps, "eps")?)?, required(cfg.n_max, "n_max")?)?.map
        }
        "file" => PiecewiseLinear1D::try_from(&read_json::<PiecewiseLinearFile>(&required(cfg.map, "map")?)?)?,
        other => return Err(Error::Config(format!("unknown regularity mode `{other}`"))),
    };
    if let Some(out) = &cfg.out {
        write_json(out, &PiecewiseLinearFile::from(&f))?;
    }
    let (lo, hi) = f.image();
    let probes = dyadic_probes(&lo, &hi, &cfg.scales);
    let reg = covering_regularity(&f, &probes, cfg.c_max)?;
    println!("pieces {}", f.breakpoints().len() - 1);
    println!("lipschitz {}", f.lipschitz());
    println!("distance to identity {} ({})", f.distance_to_identity(), format_g12(to_f64(&f.distance_to_identity())));
    if reg > cfg.c_max {
        println!("covering regularity > {} over {} probes", cfg.c_max, probes.len());
    } else {
        println!("covering regularity <= {reg} over {} probes", probes.len());
    }
    if let Some(y) = &cfg.y {
        println!("preimages {}", preimage_count_1d(&f, &parse_rational(y)?)?);
    }
    Ok(true)
}

#[derive(Args, Serialize)]
struct PipelineFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    density_file: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    m_sequence: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    l_override: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    node_budget: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    proposals: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_max_points: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    record_timing: bool,
}

fn pipeline(flags: PipelineFlags) -> Result<bool> {
    let cfg: ExperimentConfig = resolve(flags.config.as_deref(), &flags)?;
    let outcome = run_pipeline(&cfg)?;
    for row in &outcome.rows {
        println!(
            "n {} lower {} upper {} exact {}",
            row.n,
            format_g12(row.lower),
            format_g12(row.upper),
            row.exact.map_or("-".into(), format_g12)
        );
    }
    report(&outcome.checks)
}

fn report(checks: &[lipgrid::experiment::Check]) -> Result<bool> {
    for c in checks {
        println!("{}", c.line());
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Forge(f) => forge(f),
        Command::Encode(f) => encode(f),
        Command::Solve(f) => solve(f),
        Command::Bound(b) => bound(b),
        Command::Degree(f) => degree(f),
        Command::Regularity(f) => regularity(f),
        Command::Pipeline(f) => pipeline(f),
        Command::Plot { csv, svg } => render_plot(&csv, &svg).map(|()| true),
        Command::Validate { paths } => report(&validate_artifacts(&paths)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
