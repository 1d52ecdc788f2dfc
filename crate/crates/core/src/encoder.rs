//! Encodes a density as a sequence of separated point sets, one per stage,
//! each with a perfect `d`-th power number of points.
//!
//! At stage `m` the unit cube is blown up to `[0, l]^d` with `l = m^(1+p)` and
//! cut into `m^d` cells of side `l/m`. Cell `k` receives about `l^d` times the
//! mass of `rho` in the matching cell of `[0, 1]^d`.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::geometry::{cube_integral_exact, Cube, GridDensity};
use crate::rational::{int, to_f64, Rational};

/// Cell counts for one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StagePlan {
    pub d: usize,
    pub m: usize,
    pub p: f64,
    /// Side of the blown-up cube.
    pub l: f64,
    /// `∫ rho` over each cell of `[0, 1]^d`.
    pub cell_mass: Vec<f64>,
    /// `l^d` times `cell_mass`.
    pub cell_integrals: Vec<f64>,
    pub floors: Vec<u64>,
    /// Cells that receive one point beyond their floor.
    pub plus_one_cells: Vec<usize>,
    /// Final point count per cell.
    pub counts: Vec<u64>,
    /// Side of the target grid; the stage has `target^d` points.
    pub target: u64,
    /// Separation radius `1 / (4 (sup rho)^(1/d))`.
    pub r: f64,
    pub sup: f64,
}

impl StagePlan {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn cell_side(&self) -> f64 {
        self.l / self.m as f64
    }

    fn cell_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.m;
            flat /= self.m;
        }
        idx
    }
}

/// `r`-separated points whose count is `n^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparatedSet {
    pub d: usize,
    pub r: f64,
    pub n: u64,
    pub points: Vec<Vec<f64>>,
}

/// `rho / mean(rho)`; requires `inf rho > 0`.
pub fn normalize_density(rho: &GridDensity) -> Result<GridDensity> {
    if !(rho.inf() > 0.0) {
        return Err(Error::InvalidInput(format!(
            "density must be bounded below by a positive constant, inf = {}",
            rho.inf()
        )));
    }
    let mean = rho.mean();
    rho.map(|x| x / mean)
}

/// Integer `d`-th root rounded up.
fn ceil_root(x: u64, d: usize) -> u64 {
    if x <= 1 || d == 1 {
        return x;
    }
    let mut a = (x as f64).powf(1.0 / d as f64).round() as u64;
    while a > 0 && pow_u64(a - 1, d).is_some_and(|v| v >= x) {
        a -= 1;
    }
    while pow_u64(a, d).is_some_and(|v| v < x) {
        a += 1;
    }
    a
}

fn pow_u64(a: u64, d: usize) -> Option<u64> {
    (0..d).try_fold(1u64, |acc, _| acc.checked_mul(a))
}

/// Smallest `a` with `a^d` in `[floor_sum, floor_sum + slack]`.
pub fn choose_power_target(floor_sum: u64, slack: u64, d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let a = ceil_root(floor_sum, d);
    match pow_u64(a, d) {
        Some(v) if v <= floor_sum.saturating_add(slack) => Ok(a),
        _ => Err(Error::Infeasible(format!(
            "no {d}-th power in [{floor_sum}, {}]; refine m",
            floor_sum.saturating_add(slack)
        ))),
    }
}

/// Stage `m`: cell integrals, floors, the power target and the cells that
/// get an extra point (largest fractional parts first, lower index on ties).
pub fn plan_stage(rho: &GridDensity, m: usize, p: f64, l_override: Option<f64>) -> Result<StagePlan> {
    let d = rho.dim();
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("p = {p} must be positive")));
    }
    if !(rho.inf() > 0.0) {
        return Err(Error::InvalidInput("density must be positive".into()));
    }
    let l = match l_override {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => return Err(Error::InvalidInput(format!("l = {l} must be positive"))),
        None => {
            let l = (m as f64).powf(1.0 + p);
            // `powf` misses exact powers such as 4^1.5 by an ulp.
            if (l - l.round()).abs() <= 1e-12 * l {
                l.round()
            } else {
                l
            }
        }
    };
    let cells = m.checked_pow(d as u32).ok_or_else(|| Error::InvalidInput("m^d overflows".into()))?;
    let side = Rational::new(1.into(), (m as i64).into());
    let mut plan = StagePlan {
        d,
        m,
        p,
        l,
        cell_mass: Vec::with_capacity(cells),
        cell_integrals: Vec::with_capacity(cells),
        floors: Vec::with_capacity(cells),
        plus_one_cells: Vec::new(),
        counts: Vec::new(),
        target: 0,
        r: 1.0 / (4.0 * rho.sup().powf(1.0 / d as f64)),
        sup: rho.sup(),
    };
    let ld = l.powi(d as i32);
    for k in 0..cells {
        let idx = plan.cell_index(k);
        let anchor = idx.iter().map(|&i| &side * int(i as i64)).collect();
        let mass = to_f64(&cube_integral_exact(rho, &Cube::new(anchor, side.clone())?)?);
        let integral = ld * mass;
        plan.cell_mass.push(mass);
        plan.cell_integrals.push(integral);
        plan.floors.push(integral.floor() as u64);
    }
    let floor_sum: u64 = plan.floors.iter().sum();
    plan.target = choose_power_target(floor_sum, cells as u64, d)?;
    let extra = (pow_u64(plan.target, d).expect("checked") - floor_sum) as usize;
    let mut order: Vec<usize> = (0..cells).collect();
    let frac = |k: usize| plan.cell_integrals[k] - plan.floors[k] as f64;
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    plan.plus_one_cells = order[..extra].to_vec();
    plan.plus_one_cells.sort_unstable();
    plan.counts = plan.floors.clone();
    for &k in &plan.plus_one_cells {
        plan.counts[k] += 1;
    }
    if let Some(k) = plan.counts.iter().position(|&c| c == 0) {
        return Err(Error::Infeasible(format!(
            "cell {k} receives no point at m = {m}; the resolution does not match the density contrast"
        )));
    }
    Ok(plan)
}

/// Places `counts[k]` points in cell `k` on the centers of a
/// `ceil(counts[k]^(1/d))`-per-axis subdivision, first nodes in
/// lexicographic order.
pub fn encode_stage(plan: &StagePlan) -> Result<SeparatedSet> {
    let d = plan.d;
    let s = plan.cell_side();
    let mut points = Vec::with_capacity(plan.total() as usize);
    for (k, &n) in plan.counts.iter().enumerate() {
        let origin: Vec<f64> = plan.cell_index(k).iter().map(|&i| i as f64 * s).collect();
        let q = ceil_root(n, d);
        let h = s / q as f64;
        let mut j = vec![0u64; d];
        for _ in 0..n {
            points.push((0..d).map(|a| origin[a] + (j[a] as f64 + 0.5) * h).collect());
            for a in (0..d).rev() {
                j[a] += 1;
                if j[a] < q {
                    break;
                }
                j[a] = 0;
            }
        }
    }
    let set = SeparatedSet { d, r: plan.r, n: plan.target, points };
    if pow_u64(set.n, d) != Some(set.points.len() as u64) {
        return Err(Error::Invariant(format!("{} points is not {}^{d}", set.points.len(), set.n)));
    }
    if let Some((i, j, dist)) = closest_within(&set.points, set.r) {
        return Err(Error::Invariant(format!("points {i} and {j} are {dist} apart, not more than r = {}", set.r)));
    }
    Ok(set)
}

/// Some pair at distance `<= r`, found with a bucket grid of width `r`.
pub fn closest_within(points: &[Vec<f64>], r: f64) -> Option<(usize, usize, f64)> {
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / r).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }
    let d = points.first().map_or(0, Vec::len);
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut t| {
            (0..d)
                .map(|_| {
                    let o = (t % 3) as i64 - 1;
                    t /= 3;
                    o
                })
                .collect()
        })
        .collect();
    for (i, p) in points.iter().enumerate() {
        let base = key(p);
        for o in &offsets {
            let k: Vec<i64> = base.iter().zip(o).map(|(b, o)| b + o).collect();
            for &j in buckets.get(&k).into_iter().flatten() {
                if j > i {
                    let dist = crate::mapping::dist(p, &points[j]);
                    if dist <= r {
                        return Some((i, j, dist));
                    }
                }
            }
        }
    }
    None
}

/// How far the normalized counting measure is from `rho` at one stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Deviation {
    /// `max_k |mu(Q_k) - ∫_{Q_k} rho|`.
    pub max: f64,
    pub per_cell: Vec<f64>,
    /// `1/n^d + (sup rho / m^d) |l^d / n^d - 1|`, the same for every cell.
    pub bound: f64,
}

/// Compares `mu = n^(-d) sum_{x in set / l} delta_x` with `rho` cell by cell.
pub fn discrete_measure_deviation(plan: &StagePlan, set: &SeparatedSet) -> Result<Deviation> {
    if set.d != plan.d {
        return Err(Error::Dimension { expected: plan.d, found: set.d });
    }
    let cells = plan.counts.len();
    let s = plan.cell_side();
    let mut hits = vec![0u64; cells];
    for x in &set.points {
        let k = x.iter().fold(0usize, |acc, &t| acc * plan.m + ((t / s).floor().max(0.0) as usize).min(plan.m - 1));
        hits[k] += 1;
    }
    let total = set.points.len() as f64;
    let per_cell: Vec<f64> =
        hits.iter().zip(&plan.cell_mass).map(|(&h, &mass)| (h as f64 / total - mass).abs()).collect();
    let ld = plan.l.powi(plan.d as i32);
    let bound = 1.0 / total + plan.sup / cells as f64 * (ld / total - 1.0).abs();
    Ok(Deviation { max: per_cell.iter().copied().fold(0.0, f64::max), per_cell, bound })
}

/// Scales by `d / r` and rounds every coordinate to the nearest integer,
/// ties toward negative infinity. The scaled set is `d`-separated, so the
/// rounding is injective.
pub fn integerize(set: &SeparatedSet) -> Result<Vec<Vec<i64>>> {
    let scale = set.d as f64 / set.r;
    let out: Vec<Vec<i64>> =
        set.points.iter().map(|p| p.iter().map(|&x| (x * scale - 0.5).ceil() as i64).collect()).collect();
    let mut seen = HashSet::with_capacity(out.len());
    for (i, z) in out.iter().enumerate() {
        if !seen.insert(z) {
            return Err(Error::Invariant(format!("point {i} collides after integerizing at {z:?}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_target_examples() {
        assert_eq!(choose_power_target(9, 3, 2).unwrap(), 3);
        assert_eq!(choose_power_target(10, 6, 2).unwrap(), 4);
        assert!(choose_power_target(10, 5, 2).is_err());
        assert_eq!(choose_power_target(0, 1, 3).unwrap(), 0);
    }

    #[test]
    fn ceil_roots() {
        assert_eq!(ceil_root(27, 3), 3);
        assert_eq!(ceil_root(28, 3), 4);
        assert_eq!(ceil_root(1, 2), 1);
        assert_eq!(ceil_root(17, 2), 5);
    }

    #[test]
    fn unit_density_gives_a_regular_grid() {
        let rho = GridDensity::constant(2, 4, 1.0).unwrap();
        let plan = plan_stage(&rho, 2, 1.0, None).unwrap();
        assert_eq!(plan.l, 4.0);
        assert!(plan.counts.iter().all(|&c| c == 4));
        let set = encode_stage(&plan).unwrap();
        assert_eq!(set.points.len(), 16);
        for p in &set.points {
            for x in p {
                assert_eq!(x.fract(), 0.5);
            }
        }
    }

    #[test]
    fn plus_one_ties_go_to_lower_index() {
        // l = 3, m = 2: every cell integral is 9/4, floors sum to 8 and the
        // target is 3^2, so exactly one tied cell gets the extra point.
        let rho = GridDensity::constant(2, 2, 1.0).unwrap();
        let plan = plan_stage(&rho, 2, 1.0, Some(3.0)).unwrap();
        assert_eq!(plan.floors, vec![2; 4]);
        assert_eq!(plan.target, 3);
        assert_eq!(plan.plus_one_cells, vec![0]);
        assert_eq!(plan.counts, vec![3, 2, 2, 2]);
    }

    #[test]
    fn integerize_rounds_half_down() {
        let set = SeparatedSet { d: 1, r: 1.0, n: 2, points: vec![vec![0.5], vec![1.5]] };
        assert_eq!(integerize(&set).unwrap(), vec![vec![0], vec![1]]);
    }
}
