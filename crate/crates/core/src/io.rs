//! JSON and CSV file formats.
//!
//! Rationals are written as `"p/q"` strings. Floats are plain JSON numbers.

use std::fs;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::assign::{Assignment, BoundsReport};
use crate::encoder::SeparatedSet;
use crate::error::{Error, Result};
use crate::forge::ChessboardSpec;
use crate::geometry::{Cube, GridDensity, NestedFamilies, TiledFamily};
use crate::mapping::{Domain, GridSpec, SampledMap};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::regularity::PiecewiseLinear1D;

fn rationals(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn parse_all(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter().map(|s| parse_rational(s)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelFile {
    pub side: String,
    pub anchors: Vec<Vec<String>>,
    pub offsets: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamiliesFile {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub c: String,
    pub levels: Vec<LevelFile>,
}

impl From<&NestedFamilies> for FamiliesFile {
    fn from(f: &NestedFamilies) -> Self {
        Self {
            d: f.d,
            n: f.n,
            m: f.m,
            c: format_rational(&f.c),
            levels: f
                .levels
                .iter()
                .map(|l| LevelFile {
                    side: format_rational(&l.side),
                    anchors: l.cubes.iter().map(|c| rationals(c.anchor())).collect(),
                    offsets: l.offsets.iter().map(|z| rationals(z)).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<&FamiliesFile> for NestedFamilies {
    type Error = Error;

    fn try_from(f: &FamiliesFile) -> Result<Self> {
        let mut levels = Vec::with_capacity(f.levels.len());
        for (i, l) in f.levels.iter().enumerate() {
            let side = parse_rational(&l.side)?;
            let cubes = l
                .anchors
                .iter()
                .map(|a| {
                    if a.len() != f.d {
                        return Err(Error::Dimension { expected: f.d, found: a.len() });
                    }
                    Cube::new(parse_all(a)?, side.clone())
                })
                .collect::<Result<Vec<_>>>()?;
            let offsets = l.offsets.iter().map(|z| parse_all(z)).collect::<Result<Vec<_>>>()?;
            levels.push(TiledFamily { level: i + 1, side, cubes, offsets });
        }
        Ok(NestedFamilies { d: f.d, n: f.n, m: f.m, c: parse_rational(&f.c)?, levels })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub d: usize,
    pub m: usize,
    pub cells: Vec<f64>,
    pub inf: f64,
    pub sup: f64,
}

impl From<&GridDensity> for DensityFile {
    fn from(g: &GridDensity) -> Self {
        Self { d: g.dim(), m: g.resolution(), cells: g.cells().to_vec(), inf: g.inf(), sup: g.sup() }
    }
}

impl TryFrom<&DensityFile> for GridDensity {
    type Error = Error;

    fn try_from(f: &DensityFile) -> Result<Self> {
        let g = GridDensity::new(f.d, f.m, f.cells.clone())?;
        if g.inf() != f.inf || g.sup() != f.sup {
            return Err(Error::Invariant(format!(
                "stored inf/sup {}/{} disagree with the cells ({}/{})",
                f.inf,
                f.sup,
                g.inf(),
                g.sup()
            )));
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparatedSetFile {
    pub d: usize,
    pub r: f64,
    pub n: u64,
    pub points: Vec<Vec<f64>>,
}

impl From<&SeparatedSet> for SeparatedSetFile {
    fn from(s: &SeparatedSet) -> Self {
        Self { d: s.d, r: s.r, n: s.n, points: s.points.clone() }
    }
}

impl From<SeparatedSetFile> for SeparatedSet {
    fn from(f: SeparatedSetFile) -> Self {
        Self { d: f.d, r: f.r, n: f.n, points: f.points }
    }
}

/// Assignment file. `points` is optional and enables a Lipschitz audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentFile {
    pub n: u64,
    pub permutation: Vec<usize>,
    pub bottleneck: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

impl AssignmentFile {
    pub fn new(a: &Assignment, points: Option<&[Vec<f64>]>) -> Self {
        Self { n: a.n, permutation: a.permutation.clone(), bottleneck: a.bottleneck, points: points.map(<[_]>::to_vec) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseLinearFile {
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

impl From<&PiecewiseLinear1D> for PiecewiseLinearFile {
    fn from(f: &PiecewiseLinear1D) -> Self {
        Self { breakpoints: rationals(f.breakpoints()), values: rationals(f.values()) }
    }
}

impl TryFrom<&PiecewiseLinearFile> for PiecewiseLinear1D {
    type Error = Error;

    fn try_from(f: &PiecewiseLinearFile) -> Result<Self> {
        PiecewiseLinear1D::new(parse_all(&f.breakpoints)?, parse_all(&f.values)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChessboardSpecFile {
    pub eps: f64,
    pub eta: String,
    pub taper: String,
    pub families: FamiliesFile,
}

impl From<&ChessboardSpec> for ChessboardSpecFile {
    fn from(s: &ChessboardSpec) -> Self {
        Self {
            eps: s.eps,
            eta: format_rational(&s.eta),
            taper: format_rational(&s.taper),
            families: (&s.families).into(),
        }
    }
}

impl TryFrom<&ChessboardSpecFile> for ChessboardSpec {
    type Error = Error;

    fn try_from(f: &ChessboardSpecFile) -> Result<Self> {
        Ok(ChessboardSpec {
            families: (&f.families).try_into()?,
            eps: f.eps,
            eta: parse_rational(&f.eta)?,
            taper: parse_rational(&f.taper)?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Sampled map: either `grid` or `vertices` with `simplices`, plus one output
/// per sample point.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledMapFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplices: Option<Vec<Vec<usize>>>,
    pub outputs: Vec<Vec<f64>>,
}

impl From<&SampledMap> for SampledMapFile {
    fn from(m: &SampledMap) -> Self {
        match m.domain() {
            Domain::Grid(g) => Self {
                grid: Some(GridFile { lower: g.lower.clone(), upper: g.upper.clone(), counts: g.counts.clone() }),
                vertices: None,
                simplices: None,
                outputs: m.outputs().to_vec(),
            },
            Domain::Mesh { vertices, simplices } => Self {
                grid: None,
                vertices: Some(vertices.clone()),
                simplices: Some(simplices.clone()),
                outputs: m.outputs().to_vec(),
            },
        }
    }
}

impl TryFrom<SampledMapFile> for SampledMap {
    type Error = Error;

    fn try_from(f: SampledMapFile) -> Result<Self> {
        let domain = match (f.grid, f.vertices, f.simplices) {
            (Some(g), None, None) => Domain::Grid(GridSpec::new(g.lower, g.upper, g.counts)?),
            (None, Some(vertices), Some(simplices)) => Domain::Mesh { vertices, simplices },
            _ => return Err(Error::Parse("a map needs either `grid` or both `vertices` and `simplices`".into())),
        };
        SampledMap::new(domain, f.outputs)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Json(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json(e.to_string()))?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Formats like C's `%.12g`.
pub fn format_g12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{x:.*}", (11 - exp) as usize))
    } else {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

pub const CSV_HEADER: [&str; 6] = ["n", "lower", "upper", "exact", "seed", "time_ms"];

/// One line of the bounds table.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub n: u64,
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
    pub seed: u64,
    pub time_ms: u64,
}

impl BoundsRow {
    pub fn new(n: u64, report: &BoundsReport, seed: u64, time_ms: u64) -> Self {
        Self { n, lower: report.lower, upper: report.upper, exact: report.exact, seed, time_ms }
    }

    fn record(&self) -> [String; 6] {
        [
            self.n.to_string(),
            format_g12(self.lower),
            format_g12(self.upper),
            self.exact.map(format_g12).unwrap_or_default(),
            self.seed.to_string(),
            self.time_ms.to_string(),
        ]
    }
}

pub fn write_bounds_csv(path: &Path, rows: &[BoundsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    w.write_record(CSV_HEADER).map_err(|e| Error::Csv(e.to_string()))?;
    for row in rows {
        w.write_record(row.record()).map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a bounds table; errors name the offending row (1-based, header
/// excluded).
pub fn read_bounds_csv(path: &Path) -> Result<Vec<BoundsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Csv(format!("{}: header must be {}", path.display(), CSV_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Csv(format!("{}: row {row}: {e}", path.display())))?;
        let bad = |field: &str| Error::Csv(format!("{}: row {row}: bad `{field}` value", path.display()));
        let float = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().ok().filter(|x| !x.is_nan()).ok_or_else(|| bad(CSV_HEADER[k]))
        };
        rows.push(BoundsRow {
            n: rec[0].parse().map_err(|_| bad("n"))?,
            lower: float(1)?,
            upper: float(2)?,
            exact: if rec[3].is_empty() { None } else { Some(float(3)?) },
            seed: rec[4].parse().map_err(|_| bad("seed"))?,
            time_ms: rec[5].parse().map_err(|_| bad("time_ms"))?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Csv(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(0.1), "0.1");
        assert_eq!(format_g12(2.0f64.sqrt()), "1.41421356237");
        assert_eq!(format_g12(1234567.5), "1234567.5");
        assert_eq!(format_g12(1e-7), "1e-07");
        assert_eq!(format_g12(-2.5e20), "-2.5e+20");
        assert_eq!(format_g12(123456789012.0), "123456789012");
        assert_eq!(format_g12(1234567890123.0), "1.23456789012e+12");
    }

    #[test]
    fn families_round_trip() {
        use crate::dichotomy::{build_nested_families, OffsetRule};
        let fam = build_nested_families(2, 3, 2, 2, crate::rational::int(1), &OffsetRule::Centered).unwrap();
        let file = FamiliesFile::from(&fam);
        let text = serde_json::to_string(&file).unwrap();
        let back: FamiliesFile = serde_json::from_str(&text).unwrap();
        assert_eq!(NestedFamilies::try_from(&back).unwrap(), fam);
    }
}
