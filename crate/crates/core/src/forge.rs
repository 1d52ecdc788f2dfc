//! Chessboard perturbations: densities whose averages jump by at least `eps`
//! between `e1`-neighbouring cubes of every level.

use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::geometry::{cell_average_exact, GridDensity, NestedFamilies, TiledFamily};
use crate::rational::{from_f64, rat, to_f64, Rational};

/// Input to [`chessboard`].
#[derive(Clone, Debug, PartialEq)]
pub struct ChessboardSpec {
    pub families: NestedFamilies,
    pub eps: f64,
    /// Bound on the share of a cube covered by finer levels.
    pub eta: Rational,
    /// Width of the linear ramp at each face, as a fraction of the side.
    pub taper: Rational,
}

impl ChessboardSpec {
    pub fn new(families: NestedFamilies, eps: f64) -> Self {
        Self { families, eps, eta: rat(1, 9), taper: rat(1, 16) }
    }
}

/// Cube averages in the chessboard are `±8 eps / 9`.
pub const AVERAGE_FRACTION: f64 = 8.0 / 9.0;

/// Builds `psi` level by level: each level overwrites the grid inside its own
/// cubes only, with cube averages alternating `±8eps/9` along `e1`.
///
/// Every cube must be aligned with the grid and span at least four cells per
/// axis.
pub fn chessboard(spec: &ChessboardSpec, resolution: usize) -> Result<GridDensity> {
    let fam = &spec.families;
    if !(spec.eps > 0.0 && spec.eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps = {} must be positive", spec.eps)));
    }
    if !spec.taper.is_positive() || spec.taper >= Rational::one() {
        return Err(Error::InvalidInput(format!("taper {} must lie in (0, 1)", spec.taper)));
    }
    if !spec.eta.is_positive() {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    fam.check_nesting()?;
    let overlap = fam.max_overlap();
    if overlap > spec.eta {
        return Err(Error::InvalidInput(format!(
            "finer levels cover {overlap} of a cube, more than eta = {}",
            spec.eta
        )));
    }
    let finest = fam.levels.last().ok_or_else(|| Error::InvalidInput("no levels".into()))?;
    let per_axis = &finest.side * crate::rational::int(resolution as i64);
    if per_axis < crate::rational::int(4) {
        return Err(Error::Resolution(format!(
            "finest cubes span {per_axis} cells per axis at resolution {resolution}, need 4"
        )));
    }
    let mut psi = GridDensity::constant(fam.d, resolution, 0.0)?;
    let half_taper = to_f64(&spec.taper) / 2.0;
    for level in &fam.levels {
        let Some(first) = level.cubes.first() else { continue };
        let ranges = psi.aligned_ranges(first)?;
        let widths: Vec<usize> = ranges.iter().map(|(a, b)| b - a).collect();
        let profile = taper_profile(&widths, half_taper);
        let mean = profile.iter().sum::<f64>() / profile.len() as f64;
        let plateau = AVERAGE_FRACTION * spec.eps / mean;
        if plateau > spec.eps {
            return Err(Error::Resolution(format!(
                "taper {} leaves a mean profile of {mean}, the plateau would exceed eps",
                spec.taper
            )));
        }
        for cube in &level.cubes {
            let sign = if parity(cube) { -1.0 } else { 1.0 };
            let cells = psi.aligned_cells(cube)?;
            for (flat, w) in cells.into_iter().zip(&profile) {
                psi.cells_mut()[flat] = sign * plateau * w;
            }
        }
    }
    Ok(psi)
}

/// Odd position of the cube along the first axis of its lattice.
fn parity(cube: &crate::geometry::Cube) -> bool {
    let k = &cube.lattice_index()[0];
    (k % 2u32).to_i32().is_some_and(|r| r != 0)
}

/// Plateau of height 1 on the inner cube, falling linearly to 0 over a band
/// of relative width `half_taper` at every face; sampled at cell centers in
/// the cell order of [`GridDensity::aligned_cells`].
fn taper_profile(widths: &[usize], half_taper: f64) -> Vec<f64> {
    let total: usize = widths.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut w = 1.0f64;
            for &n in widths.iter().rev() {
                let j = flat % n;
                flat /= n;
                let u = (j as f64 + 0.5) / n as f64;
                w = w.min((u.min(1.0 - u) / half_taper).min(1.0));
            }
            w
        })
        .collect()
}

/// `phi + psi`, cell by cell.
pub fn perturb_density(phi: &GridDensity, psi: &GridDensity) -> Result<GridDensity> {
    phi.add(psi)
}

/// Smallest `|avg(S') - avg(S)|` over `e1`-adjacent pairs, computed exactly.
/// `None` if the family has no adjacent pair.
pub fn adjacent_average_gap_exact(rho: &GridDensity, family: &TiledFamily) -> Result<Option<Rational>> {
    let avgs = family.cubes.iter().map(|c| cell_average_exact(rho, c)).collect::<Result<Vec<_>>>()?;
    Ok(family.adjacent_pairs().into_iter().map(|(i, j)| (&avgs[j] - &avgs[i]).abs()).min())
}

/// Smallest average jump between `e1` neighbours; `+inf` without neighbours.
pub fn adjacent_average_gap(rho: &GridDensity, family: &TiledFamily) -> Result<f64> {
    Ok(adjacent_average_gap_exact(rho, family)?.map_or(f64::INFINITY, |g| to_f64(&g)))
}

/// Modifies `rho` on the cubes of one family so that neighbouring averages
/// differ by at least `eps`, moving no cell by more than `eps`.
///
/// Cubes are swept along `e1` chains. A chain starts at the unvisited cube of
/// least first coordinate, where `psi = rho`. Each successor keeps `rho`, or
/// is shifted by `+eps` when `avg(rho, next) - avg(psi, current)` lies in
/// `[0, eps)`, or by `-eps` when it lies in `(-eps, 0)`.
pub fn linf_chessboard(family: &TiledFamily, rho: &GridDensity, eps: f64) -> Result<GridDensity> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
    }
    let eps_q = from_f64(eps)?;
    let mut psi = rho.clone();
    let cells = family.cubes.iter().map(|c| psi.aligned_cells(c)).collect::<Result<Vec<_>>>()?;
    let mut visited = vec![false; family.cubes.len()];
    let mut current: Option<usize> = None;
    while visited.iter().any(|v| !v) {
        let next = current.and_then(|i| family.e1_successor(i)).filter(|&j| !visited[j]);
        let j = match next {
            Some(j) => {
                let i = current.expect("successor has a predecessor");
                let prev = cell_average_exact(&psi, &family.cubes[i])?;
                let a = cell_average_exact(rho, &family.cubes[j])? - prev;
                let shift = if a.abs() >= eps_q {
                    0
                } else if !a.is_negative() {
                    1
                } else {
                    -1
                };
                if shift != 0 {
                    for &flat in &cells[j] {
                        psi.cells_mut()[flat] = shifted(rho.cells()[flat], eps, shift)?;
                    }
                }
                j
            }
            None => (0..family.cubes.len())
                .filter(|&j| !visited[j])
                .min_by(|&x, &y| family.cubes[x].anchor().cmp(family.cubes[y].anchor()))
                .expect("an unvisited cube remains"),
        };
        visited[j] = true;
        current = Some(j);
    }
    Ok(psi)
}

/// `x ± eps` rounded so that the exact distance to `x` never exceeds `eps`.
fn shifted(x: f64, eps: f64, sign: i32) -> Result<f64> {
    let mut y = if sign > 0 { x + eps } else { x - eps };
    let e = from_f64(eps)?;
    let x_q = from_f64(x)?;
    while (from_f64(y)? - &x_q).abs() > e {
        y = if sign > 0 { y.next_down() } else { y.next_up() };
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dichotomy::{build_nested_families, OffsetRule};
    use crate::rational::int;

    #[test]
    fn two_cubes_alternate() {
        let fam = build_nested_families(2, 2, 1, 1, int(1), &OffsetRule::Origin).unwrap();
        let psi = chessboard(&ChessboardSpec::new(fam.clone(), 0.9), 16).unwrap();
        let l = &fam.levels[0];
        let a = crate::geometry::cell_average(&psi, &l.cubes[0]).unwrap();
        let b = crate::geometry::cell_average(&psi, &l.cubes[1]).unwrap();
        assert!((a - 0.8).abs() < 1e-12 && (b + 0.8).abs() < 1e-12);
        assert!(psi.sup() <= 0.9 && psi.inf() >= -0.9);
    }

    #[test]
    fn coarse_resolution_is_rejected() {
        let fam = build_nested_families(2, 2, 1, 1, int(1), &OffsetRule::Origin).unwrap();
        assert!(matches!(chessboard(&ChessboardSpec::new(fam.clone(), 0.5), 4), Err(Error::Resolution(_))));
        // Five cells per cube side.
        assert!(chessboard(&ChessboardSpec::new(fam, 0.5), 10).is_ok());
    }

    #[test]
    fn shifted_never_overshoots() {
        for &x in &[0.3, 0.7, 0.123456789, 1e-3] {
            for s in [1, -1] {
                let y = shifted(x, 0.5, s).unwrap();
                let d = (from_f64(y).unwrap() - from_f64(x).unwrap()).abs();
                assert!(d <= from_f64(0.5).unwrap());
            }
        }
    }
}
