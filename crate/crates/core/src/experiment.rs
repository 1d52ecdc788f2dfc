//! Experiment orchestration: the encode-and-solve pipeline, SVG charts and
//! artifact validation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::assign::{counting_lower_bound, lipschitz_constant, solve_exact, solve_heuristic, Schedule};
use crate::encoder::{closest_within, discrete_measure_deviation, encode_stage, normalize_density, plan_stage};
use crate::error::{Error, Result};
use crate::forge::{adjacent_average_gap_exact, chessboard, perturb_density, ChessboardSpec};
use crate::geometry::{GridDensity, NestedFamilies};
use crate::io::{
    format_g12, read_bounds_csv, read_json, write_bounds_csv, write_json, AssignmentFile, BoundsRow,
    ChessboardSpecFile, DensityFile, FamiliesFile, PiecewiseLinearFile, SampledMapFile, SeparatedSetFile,
};
use crate::mapping::SampledMap;
use crate::rational::{from_f64, rat, Rational};
use crate::regularity::PiecewiseLinear1D;

/// Where the density comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySource {
    File {
        path: PathBuf,
    },
    /// `base + psi` with `psi` the chessboard of `spec`.
    Chessboard {
        spec: ChessboardSpecFile,
        resolution: usize,
        #[serde(default = "one")]
        base: f64,
    },
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_node_budget() -> u64 {
    2_000_000
}

fn default_proposals() -> u64 {
    20_000
}

fn default_restarts() -> usize {
    4
}

fn default_exact_max_points() -> usize {
    12
}

/// Pipeline configuration, read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required for constant densities, checked against the others.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub density: Option<DensitySource>,
    /// Shorthand for `density: {kind: "file", path}`.
    #[serde(default)]
    pub density_file: Option<PathBuf>,
    pub p: f64,
    pub m_sequence: Vec<usize>,
    #[serde(default)]
    pub l_override: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_node_budget")]
    pub node_budget: u64,
    /// Annealing proposals per restart.
    #[serde(default = "default_proposals")]
    pub proposals: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Run the exact solver when a stage has at most this many points.
    #[serde(default = "default_exact_max_points")]
    pub exact_max_points: usize,
    pub output_dir: PathBuf,
    /// Write wall-clock times; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn source(&self) -> Result<DensitySource> {
        match (&self.density, &self.density_file) {
            (Some(s), None) => Ok(s.clone()),
            (None, Some(path)) => Ok(DensitySource::File { path: path.clone() }),
            (None, None) => Err(Error::Config("no density source given".into())),
            (Some(_), Some(_)) => Err(Error::Config("give either `density` or `density_file`".into())),
        }
    }

    /// Checks the schedule and that referenced files exist.
    pub fn validate(&self) -> Result<()> {
        if self.m_sequence.is_empty() || self.m_sequence.contains(&0) {
            return Err(Error::Config("m_sequence must be a non-empty list of positive integers".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        if let DensitySource::File { path } = self.source()? {
            if !path.is_file() {
                return Err(Error::Io(format!("density file {} does not exist", path.display())));
            }
        }
        if let Some(d) = self.d {
            check_exponent(self.p, d)?;
        }
        Ok(())
    }
}

/// `p` must lie in `(0, 1/(d-1))`.
fn check_exponent(p: f64, d: usize) -> Result<()> {
    let upper = if d > 1 { 1.0 / (d - 1) as f64 } else { f64::INFINITY };
    if !(p > 0.0 && p < upper) {
        return Err(Error::Config(format!("p = {p} must lie in (0, {upper}) for d = {d}")));
    }
    Ok(())
}

/// One invariant result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub subject: String,
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(subject: impl Into<String>, invariant: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { subject: subject.into(), invariant: invariant.into(), passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {} {}: {}", self.subject, self.invariant, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PipelineReport {
    pub rows: Vec<BoundsRow>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Serialize)]
struct SummaryRow {
    m: usize,
    n: u64,
    points: usize,
    lower: f64,
    upper: f64,
    exact: Option<f64>,
    deviation: f64,
    deviation_bound: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    p: f64,
    stages: Vec<SummaryRow>,
    checks: &'a [Check],
    passed: bool,
}

fn load_density(source: &DensitySource, d: Option<usize>) -> Result<(GridDensity, Option<ChessboardSpec>)> {
    let (rho, spec) = match source {
        DensitySource::File { path } => {
            let file: DensityFile = read_json(path)?;
            (GridDensity::try_from(&file).map_err(|e| e.context(path.display()))?, None)
        }
        DensitySource::Constant { value } => {
            let d = d.ok_or_else(|| Error::Config("a constant density needs `d`".into()))?;
            (GridDensity::constant(d, 1, *value)?, None)
        }
        DensitySource::Chessboard { spec, resolution, base } => {
            let spec = ChessboardSpec::try_from(spec)?;
            let psi = chessboard(&spec, *resolution)?;
            let phi = GridDensity::constant(spec.families.d, *resolution, *base)?;
            (perturb_density(&phi, &psi)?, Some(spec))
        }
    };
    if let Some(d) = d {
        if d != rho.dim() {
            return Err(Error::Dimension { expected: d, found: rho.dim() });
        }
    }
    Ok((rho, spec))
}

/// Forges or loads the density, encodes every stage, bounds each stage's
/// assignment problem, writes `bounds.csv`, `summary.json` and per-stage
/// artifacts into the output directory, and validates everything it wrote.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineReport> {
    config.validate()?;
    let source = config.source()?;
    let (rho, spec) = load_density(&source, config.d).map_err(|e| e.context("density"))?;
    let d = rho.dim();
    check_exponent(config.p, d)?;
    let normalized = normalize_density(&rho).map_err(|e| e.context("normalize"))?;

    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let mut report = PipelineReport::default();
    let density_path = out.join("density.json");
    write_json(&density_path, &DensityFile::from(&rho))?;
    report.artifacts.push(density_path);
    if let Some(spec) = &spec {
        let path = out.join("chessboard.json");
        write_json(&path, &ChessboardSpecFile::from(spec))?;
        report.artifacts.push(path);
    }

    let schedule = Schedule { proposals: Some(config.proposals), restarts: config.restarts, ..Schedule::default() };
    let mut summary_rows = Vec::new();
    for &m in &config.m_sequence {
        let stage = format!("stage m={m}");
        let started = Instant::now();
        let plan = plan_stage(&normalized, m, config.p, config.l_override).map_err(|e| e.context(&stage))?;
        let set = encode_stage(&plan).map_err(|e| e.context(&stage))?;
        let points = set.points.len();
        let dev = discrete_measure_deviation(&plan, &set).map_err(|e| e.context(&stage))?;

        let lower = counting_lower_bound(&set.points, d);
        let heuristic = solve_heuristic(&set.points, set.n, config.seed, &schedule).map_err(|e| e.context(&stage))?;
        let mut upper = heuristic.upper;
        let mut assignment = heuristic.assignment;
        let mut exact = None;
        if points <= config.exact_max_points {
            let r = solve_exact(&set.points, set.n, config.node_budget).map_err(|e| e.context(&stage))?;
            if r.upper < upper {
                upper = r.upper;
                assignment = r.assignment;
            }
            exact = r.exact;
        }
        let time_ms = if config.record_timing { started.elapsed().as_millis() as u64 } else { 0 };

        let subject = format!("m={m}");
        let expected = set.n.checked_pow(d as u32);
        report.checks.push(Check::new(
            &subject,
            "cardinality",
            expected == Some(points as u64) && plan.total() == points as u64,
            format!("{points} points, n = {}", set.n),
        ));
        let close = closest_within(&set.points, set.r);
        report.checks.push(Check::new(
            &subject,
            "separation",
            close.is_none(),
            match close {
                None => format!("all pairs farther than r = {}", format_g12(set.r)),
                Some((i, j, t)) => format!("points {i} and {j} at distance {}", format_g12(t)),
            },
        ));
        report.checks.push(Check::new(
            &subject,
            "measure deviation",
            dev.max <= dev.bound,
            format!("max {} vs bound {}", format_g12(dev.max), format_g12(dev.bound)),
        ));
        let audit = lipschitz_constant(&set.points, set.n, &assignment.permutation)?;
        report.checks.push(Check::new(
            &subject,
            "lipschitz audit",
            audit == assignment.bottleneck,
            format!("recomputed {} stored {}", format_g12(audit), format_g12(assignment.bottleneck)),
        ));
        let ordered = lower <= upper * (1.0 + 1e-12) && exact.is_none_or(|e| lower <= e * (1.0 + 1e-12) && e <= upper);
        report.checks.push(Check::new(
            &subject,
            "bounds ordered",
            ordered,
            format!(
                "lower {} upper {} exact {}",
                format_g12(lower),
                format_g12(upper),
                exact.map_or("-".into(), format_g12)
            ),
        ));

        let dir = out.join(format!("stage_m{m}"));
        let set_path = dir.join("set.json");
        write_json(&set_path, &SeparatedSetFile::from(&set))?;
        let assignment_path = dir.join("assignment.json");
        write_json(&assignment_path, &AssignmentFile::new(&assignment, Some(&set.points)))?;
        report.artifacts.extend([set_path, assignment_path]);

        report.rows.push(BoundsRow { n: set.n, lower, upper, exact, seed: config.seed, time_ms });
        summary_rows.push(SummaryRow {
            m,
            n: set.n,
            points,
            lower,
            upper,
            exact,
            deviation: dev.max,
            deviation_bound: dev.bound,
        });
    }

    let csv_path = out.join("bounds.csv");
    write_bounds_csv(&csv_path, &report.rows)?;
    report.artifacts.push(csv_path);
    let validation = validate_artifacts(&report.artifacts)?;
    // Name artifacts relative to the output directory so that the summary
    // does not depend on where it was written.
    let prefix = format!("{}/", out.display());
    report.checks.extend(validation.into_iter().map(|mut c| {
        c.subject = c.subject.replace(&prefix, "");
        c
    }));

    let summary_path = out.join("summary.json");
    let summary = Summary {
        seed: config.seed,
        p: config.p,
        stages: summary_rows,
        checks: &report.checks,
        passed: report.passed(),
    };
    write_json(&summary_path, &summary)?;
    report.artifacts.push(summary_path);
    Ok(report)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 70.0;

/// Renders `lower`, `upper` and `exact` against `n` as an SVG line chart.
pub fn render_plot(csv_path: &Path, svg_path: &Path) -> Result<()> {
    let rows = read_bounds_csv(csv_path)?;
    let svg = plot_svg(&rows);
    if let Some(dir) = svg_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(svg_path, svg).map_err(|e| Error::Io(format!("{}: {e}", svg_path.display())))
}

fn plot_svg(rows: &[BoundsRow]) -> String {
    let series: [(&str, &str, Vec<(f64, f64)>); 3] = [
        ("lower", "#1f77b4", rows.iter().map(|r| (r.n as f64, r.lower)).collect()),
        ("upper", "#d62728", rows.iter().map(|r| (r.n as f64, r.upper)).collect()),
        ("exact", "#2ca02c", rows.iter().filter_map(|r| r.exact.map(|e| (r.n as f64, e))).collect()),
    ];
    let all = series.iter().flat_map(|s| s.2.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let y1 = if y1 > 0.0 { y1 * 1.1 } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / y1 * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} V{b} H{r}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let y = y1 * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            l - 6.0,
            py(y) + 4.0,
            format_g12((y * 1e4).round() / 1e4)
        );
    }
    let mut ns: Vec<u64> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#, px(n as f64), b + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n</text>"#, (l + r) / 2.0, b + 40.0);
    for (k, (name, color, pts)) in series.iter().enumerate() {
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="{name}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = t + 16.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="12" height="3" fill="{color}"/>"#, r - 80.0, ly - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{name}</text>"#, r - 62.0, ly);
    }
    s.push_str("</svg>\n");
    s
}

/// File kinds understood by [`validate_artifacts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArtifactKind {
    Families,
    Density,
    SeparatedSet,
    Assignment,
    PiecewiseLinear,
    ChessboardSpec,
    SampledMap,
    BoundsTable,
    /// `summary.json` from [`run_pipeline`].
    Summary,
}

fn has_keys(v: &Value, keys: &[&str]) -> bool {
    v.as_object().is_some_and(|o| keys.iter().all(|k| o.contains_key(*k)))
}

pub fn detect_kind(path: &Path) -> Result<ArtifactKind> {
    if path.extension().is_some_and(|e| e == "csv") {
        return Ok(ArtifactKind::BoundsTable);
    }
    let v: Value = read_json(path)?;
    let kind = if has_keys(&v, &["stages", "checks", "passed"]) {
        ArtifactKind::Summary
    } else if has_keys(&v, &["eps", "eta", "taper", "families"]) {
        ArtifactKind::ChessboardSpec
    } else if has_keys(&v, &["N", "M", "levels"]) {
        ArtifactKind::Families
    } else if has_keys(&v, &["cells", "inf", "sup"]) {
        ArtifactKind::Density
    } else if has_keys(&v, &["r", "n", "points"]) {
        ArtifactKind::SeparatedSet
    } else if has_keys(&v, &["permutation", "bottleneck"]) {
        ArtifactKind::Assignment
    } else if has_keys(&v, &["breakpoints", "values"]) {
        ArtifactKind::PiecewiseLinear
    } else if has_keys(&v, &["outputs"]) {
        ArtifactKind::SampledMap
    } else {
        return Err(Error::Parse(format!("{}: unknown file kind", path.display())));
    };
    Ok(kind)
}

fn family_checks(name: &str, fam: &NestedFamilies, eta: &Rational) -> Vec<Check> {
    let nesting = fam.check_nesting();
    let overlap = fam.max_overlap();
    vec![
        Check::new(
            name,
            "nesting",
            nesting.is_ok(),
            nesting.err().map_or_else(|| format!("{} levels nested", fam.levels.len()), |e| e.to_string()),
        ),
        Check::new(name, "overlap fraction", overlap <= *eta, format!("max {overlap} vs {eta}")),
    ]
}

/// Runs every applicable invariant on each file. A density together with a
/// chessboard spec also gets the adjacent-gap check on every level.
pub fn validate_artifacts(paths: &[PathBuf]) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut densities: Vec<(String, GridDensity)> = Vec::new();
    let mut specs: Vec<(String, ChessboardSpec)> = Vec::new();
    for path in paths {
        let name = path.display().to_string();
        let parsed = |checks: &mut Vec<Check>, r: Result<()>| {
            checks.push(Check::new(&name, "well-formed", r.is_ok(), r.err().map_or("ok".into(), |e| e.to_string())));
        };
        match detect_kind(path)? {
            ArtifactKind::Families => {
                let file: FamiliesFile = read_json(path)?;
                match NestedFamilies::try_from(&file) {
                    Ok(fam) => checks.extend(family_checks(&name, &fam, &rat(1, 9))),
                    Err(e) => parsed(&mut checks, Err(e)),
                }
            }
            ArtifactKind::ChessboardSpec => {
                let file: ChessboardSpecFile = read_json(path)?;
                match ChessboardSpec::try_from(&file) {
                    Ok(spec) => {
                        checks.extend(family_checks(&name, &spec.families, &spec.eta));
                        specs.push((name, spec));
                    }
                    Err(e) => parsed(&mut checks, Err(e)),
                }
            }
            ArtifactKind::Density => {
                let file: DensityFile = read_json(path)?;
                match GridDensity::try_from(&file) {
                    Ok(g) => {
                        parsed(&mut checks, Ok(()));
                        densities.push((name, g));
                    }
                    Err(e) => parsed(&mut checks, Err(e)),
                }
            }
            ArtifactKind::SeparatedSet => {
                let file: SeparatedSetFile = read_json(path)?;
                let count = file.n.checked_pow(file.d as u32);
                let dims = file.points.iter().all(|p| p.len() == file.d && p.iter().all(|x| x.is_finite()));
                checks.push(Check::new(
                    &name,
                    "cardinality",
                    dims && count == Some(file.points.len() as u64),
                    format!(
                        "{} points, n^d = {}",
                        file.points.len(),
                        count.map_or("overflow".into(), |c| c.to_string())
                    ),
                ));
                let close = if dims { closest_within(&file.points, file.r) } else { None };
                checks.push(Check::new(
                    &name,
                    "separation",
                    dims && close.is_none(),
                    match close {
                        None => format!("r = {}", format_g12(file.r)),
                        Some((i, j, t)) => format!("points {i} and {j} at distance {}", format_g12(t)),
                    },
                ));
            }
            ArtifactKind::Assignment => {
                let file: AssignmentFile = read_json(path)?;
                checks.extend(assignment_checks(&name, &file));
            }
            ArtifactKind::PiecewiseLinear => {
                let file: PiecewiseLinearFile = read_json(path)?;
                parsed(&mut checks, PiecewiseLinear1D::try_from(&file).map(|_| ()));
            }
            ArtifactKind::SampledMap => {
                let file: SampledMapFile = read_json(path)?;
                parsed(&mut checks, SampledMap::try_from(file).map(|_| ()));
            }
            ArtifactKind::BoundsTable => {
                let rows = read_bounds_csv(path)?;
                let bad: Vec<usize> = rows
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| {
                        !(r.lower <= r.upper * (1.0 + 1e-12)
                            && r.exact.is_none_or(|e| r.lower <= e * (1.0 + 1e-12) && e <= r.upper))
                    })
                    .map(|(i, _)| i + 1)
                    .collect();
                checks.push(Check::new(
                    &name,
                    "bounds ordered",
                    bad.is_empty(),
                    if bad.is_empty() { format!("{} rows", rows.len()) } else { format!("rows {bad:?}") },
                ));
            }
            ArtifactKind::Summary => {
                let v: Value = read_json(path)?;
                let failed =
                    v["checks"].as_array().map(|a| a.iter().filter(|c| c["passed"] != Value::Bool(true)).count());
                let ok = failed == Some(0) && v["passed"] == Value::Bool(true);
                let detail = failed.map_or("malformed checks".into(), |f| format!("{f} recorded failures"));
                checks.push(Check::new(&name, "recorded checks pass", ok, detail));
            }
        }
    }
    for (dname, rho) in &densities {
        for (sname, spec) in specs.iter().filter(|(_, s)| s.families.d == rho.dim()) {
            checks.push(gap_check(dname, sname, rho, spec));
        }
    }
    Ok(checks)
}

fn gap_check(dname: &str, sname: &str, rho: &GridDensity, spec: &ChessboardSpec) -> Check {
    let subject = format!("{dname} + {sname}");
    let eps = match from_f64(spec.eps) {
        Ok(e) => e,
        Err(e) => return Check::new(subject, "adjacent gap", false, e.to_string()),
    };
    let mut worst: Option<Rational> = None;
    for level in &spec.families.levels {
        match adjacent_average_gap_exact(rho, level) {
            Ok(Some(g)) => worst = Some(worst.map_or(g.clone(), |w| w.min(g))),
            Ok(None) => {}
            Err(e) => return Check::new(subject, "adjacent gap", false, e.to_string()),
        }
    }
    match worst {
        Some(g) => Check::new(
            subject,
            "adjacent gap",
            g >= eps,
            format!("min gap {} vs eps {}", format_g12(g.to_f64().unwrap_or(f64::NAN)), format_g12(spec.eps)),
        ),
        None => Check::new(subject, "adjacent gap", true, "no adjacent pairs"),
    }
}

fn assignment_checks(name: &str, file: &AssignmentFile) -> Vec<Check> {
    let size = file.permutation.len();
    let mut seen = vec![false; size];
    let bijective = file.permutation.iter().all(|&g| g < size && !std::mem::replace(&mut seen[g], true));
    let power = file.n > 0 && {
        let mut k = 1u64;
        while k < size as u64 {
            k = k.saturating_mul(file.n);
        }
        k == size as u64 && (file.n > 1 || size == 1)
    };
    let mut out = vec![Check::new(name, "bijection", bijective && power, format!("{size} targets, n = {}", file.n))];
    if let Some(points) = &file.points {
        let audit = lipschitz_constant(points, file.n, &file.permutation);
        out.push(match audit {
            Ok(l) => Check::new(
                name,
                "lipschitz audit",
                l == file.bottleneck || (l - file.bottleneck).abs() <= 1e-12 * l.max(1.0),
                format!("recomputed {} stored {}", format_g12(l), format_g12(file.bottleneck)),
            ),
            Err(e) => Check::new(name, "lipschitz audit", false, e.to_string()),
        });
    }
    out
}
