//! Bijections from a point set onto the grid `[n]^d` with small Lipschitz
//! constant: exact branch and bound, simulated annealing and a certified
//! counting lower bound. Also McShane extension and a pushforward check.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Cube, GridDensity};
use crate::mapping::{dist, SampledMap};
use crate::rational::to_f64;

/// Source `i` goes to grid point `permutation[i]` (flat index into `[n]^d`).
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub n: u64,
    pub permutation: Vec<usize>,
    pub bottleneck: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    /// Proven optimum, when the search finished.
    pub exact: Option<f64>,
    pub assignment: Assignment,
    /// Branch-and-bound nodes or annealing proposals spent.
    pub work: u64,
}

/// Coordinates in `{1, ..., n}^d` of flat grid index `g`, last axis fastest.
pub fn grid_point(g: usize, n: u64, d: usize) -> Vec<i64> {
    let mut out = vec![0; d];
    let mut rest = g as u64;
    for a in (0..d).rev() {
        out[a] = (rest % n) as i64 + 1;
        rest /= n;
    }
    out
}

/// Squared stretch `|f(x) - f(y)|^2 / |x - y|^2`, compared exactly when the
/// sources are integral.
#[derive(Clone, Copy, Debug)]
struct Stretch {
    num: u64,
    den: f64,
    exact_den: Option<u128>,
}

impl Stretch {
    fn value(&self) -> f64 {
        (self.num as f64 / self.den).sqrt()
    }

    const ZERO: Stretch = Stretch { num: 0, den: 1.0, exact_den: Some(1) };
}

impl PartialEq for Stretch {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Stretch {}

impl PartialOrd for Stretch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Stretch {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.exact_den, other.exact_den) {
            (Some(a), Some(b)) => (self.num as u128 * b).cmp(&(other.num as u128 * a)),
            _ => (self.num as f64 * other.den).total_cmp(&(other.num as f64 * self.den)),
        }
    }
}

/// Pairwise data for one instance. Source distances are computed on demand
/// so that large sets fit in memory.
struct Instance {
    d: usize,
    n: u64,
    size: usize,
    points: Vec<Vec<f64>>,
    integral: bool,
    grid: Vec<Vec<i64>>,
}

impl Instance {
    fn new(points: &[Vec<f64>], n: u64) -> Result<Self> {
        let size = points.len();
        let d = points.first().map_or(0, Vec::len);
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput("points must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        let expected = (0..d).try_fold(1u64, |acc, _| acc.checked_mul(n));
        if expected != Some(size as u64) {
            return Err(Error::InvalidInput(format!("{size} points cannot fill [{n}]^{d}")));
        }
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(size);
        for (j, p) in points.iter().enumerate() {
            let key = p.iter().map(|x| (x + 0.0).to_bits()).collect();
            if let Some(i) = seen.insert(key, j) {
                return Err(Error::InvalidInput(format!("points {i} and {j} coincide")));
            }
        }
        let integral = points.iter().flatten().all(|x| x.fract() == 0.0 && x.abs() < 1e15);
        let grid = (0..size).map(|g| grid_point(g, n, d)).collect();
        Ok(Self { d, n, size, points: points.to_vec(), integral, grid })
    }

    fn src_sq(&self, i: usize, j: usize) -> f64 {
        self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn src_exact(&self, i: usize, j: usize) -> Option<u128> {
        self.integral.then(|| {
            self.points[i]
                .iter()
                .zip(&self.points[j])
                .map(|(a, b)| ((*a as i64 - *b as i64).unsigned_abs() as u128).pow(2))
                .sum()
        })
    }

    fn grid_sq(&self, g: usize, h: usize) -> u64 {
        self.grid[g].iter().zip(&self.grid[h]).map(|(a, b)| ((a - b) * (a - b)) as u64).sum()
    }

    fn stretch(&self, i: usize, j: usize, gi: usize, gj: usize) -> Stretch {
        Stretch { num: self.grid_sq(gi, gj), den: self.src_sq(i, j), exact_den: self.src_exact(i, j) }
    }

    fn sq_ratio(&self, i: usize, j: usize, gi: usize, gj: usize) -> f64 {
        self.grid_sq(gi, gj) as f64 / self.src_sq(i, j)
    }

    fn bottleneck(&self, perm: &[usize]) -> Stretch {
        let mut worst = Stretch::ZERO;
        for i in 0..self.size {
            for j in i + 1..self.size {
                worst = worst.max(self.stretch(i, j, perm[i], perm[j]));
            }
        }
        worst
    }

    /// Sources sorted lexicographically, sent to grid points in order.
    fn sorted_assignment(&self, points: &[Vec<f64>]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut perm = vec![0; self.size];
        for (g, &i) in order.iter().enumerate() {
            perm[i] = g;
        }
        perm
    }

    fn assignment(&self, perm: Vec<usize>) -> Assignment {
        let bottleneck = self.bottleneck(&perm).value();
        Assignment { n: self.n, permutation: perm, bottleneck }
    }
}

/// `max |f(x) - f(y)| / |x - y|` for `f(points[i]) = grid point permutation[i]`.
pub fn lipschitz_constant(points: &[Vec<f64>], n: u64, permutation: &[usize]) -> Result<f64> {
    let inst = Instance::new(points, n)?;
    check_permutation(permutation, inst.size)?;
    Ok(inst.bottleneck(permutation).value())
}

fn check_permutation(perm: &[usize], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    if perm.len() != size {
        return Err(Error::InvalidInput(format!("permutation of length {} for {size} points", perm.len())));
    }
    for &g in perm {
        if g >= size || std::mem::replace(&mut seen[g], true) {
            return Err(Error::InvalidInput(format!("grid index {g} is out of range or repeated")));
        }
    }
    Ok(())
}

/// Largest `(k_t^(1/d) - 1) / (2t)` over centers `x` and radii `t`, where
/// `k_t` counts points within `t` of `x`. A ball of radius `Lt` holds at most
/// `(2Lt + 1)^d` grid points, so every bijection has constant at least this.
pub fn counting_lower_bound(points: &[Vec<f64>], d: usize) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let inv_d = 1.0 / d as f64;
    points
        .par_iter()
        .map(|x| {
            let mut sq: Vec<f64> =
                points.iter().map(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()).collect();
            sq.sort_by(f64::total_cmp);
            let mut best = 0.0f64;
            // sq[0] is the center itself.
            let mut i = 1;
            while i < sq.len() {
                let t2 = sq[i];
                while i + 1 < sq.len() && sq[i + 1] == t2 {
                    i += 1;
                }
                if t2 > 0.0 {
                    let k = (i + 1) as f64;
                    best = best.max((k.powf(inv_d) - 1.0) / (2.0 * t2.sqrt()));
                }
                i += 1;
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Exact minimum bottleneck by depth-first branch and bound.
///
/// Sources are placed in order of decreasing crowding (neighbours within the
/// smallest pairwise distance). A branch is cut as soon as its partial
/// bottleneck reaches the incumbent, which starts at the sorted assignment.
/// If `node_budget` runs out the report carries the incumbent as `upper` and
/// the counting bound as `lower`.
pub fn solve_exact(points: &[Vec<f64>], n: u64, node_budget: u64) -> Result<BoundsReport> {
    let inst = Instance::new(points, n)?;
    let size = inst.size;
    let lower = counting_lower_bound(points, inst.d);
    let start = inst.sorted_assignment(points);
    let mut best = inst.bottleneck(&start);
    let mut best_perm = start;
    if size <= 1 {
        let assignment = inst.assignment(best_perm);
        let b = assignment.bottleneck;
        return Ok(BoundsReport { lower: b, upper: b, exact: Some(b), assignment, work: 0 });
    }

    let min_sq = (0..size)
        .flat_map(|i| (i + 1..size).map(move |j| (i, j)))
        .map(|(i, j)| inst.src_sq(i, j))
        .fold(f64::INFINITY, f64::min);
    let crowding: Vec<usize> =
        (0..size).map(|i| (0..size).filter(|&j| j != i && inst.src_sq(i, j) <= min_sq).count()).collect();
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| crowding[b].cmp(&crowding[a]).then(a.cmp(&b)));

    struct Search<'a> {
        inst: &'a Instance,
        order: Vec<usize>,
        used: Vec<bool>,
        image: Vec<usize>,
        best: Stretch,
        best_perm: Vec<usize>,
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn go(&mut self, depth: usize, partial: Stretch) -> bool {
            let size = self.inst.size;
            if depth == size {
                self.best = partial;
                let mut perm = vec![0; size];
                for (k, &i) in self.order.iter().enumerate() {
                    perm[i] = self.image[k];
                }
                self.best_perm = perm;
                return true;
            }
            let src = self.order[depth];
            for g in 0..size {
                if self.used[g] {
                    continue;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    return false;
                }
                let mut worst = partial;
                let mut cut = false;
                for k in 0..depth {
                    let s = self.inst.stretch(src, self.order[k], g, self.image[k]);
                    if s > worst {
                        worst = s;
                        if worst >= self.best {
                            cut = true;
                            break;
                        }
                    }
                }
                if cut || worst >= self.best {
                    continue;
                }
                self.used[g] = true;
                self.image[depth] = g;
                let ok = self.go(depth + 1, worst);
                self.used[g] = false;
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut search = Search {
        inst: &inst,
        order,
        used: vec![false; size],
        image: vec![0; size],
        best,
        best_perm: best_perm.clone(),
        nodes: 0,
        budget: node_budget,
    };
    let finished = search.go(0, Stretch::ZERO);
    best = search.best;
    best_perm = search.best_perm;
    let work = search.nodes.min(node_budget);
    let assignment = inst.assignment(best_perm);
    let upper = assignment.bottleneck;
    debug_assert_eq!(upper, best.value());
    Ok(if finished {
        BoundsReport { lower: upper, upper, exact: Some(upper), assignment, work }
    } else {
        BoundsReport { lower, upper, exact: None, assignment, work }
    })
}

/// Annealing schedule. Temperatures are relative to the starting bottleneck
/// and cool geometrically from `t_start` to `t_end`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    /// Proposals per restart; `None` means `200 |S|^2`.
    pub proposals: Option<u64>,
    pub restarts: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { proposals: None, restarts: 4, t_start: 0.1, t_end: 1e-4 }
    }
}

/// Simulated annealing over swaps of two sources' grid images.
///
/// The objective is the descending list of all pairwise stretches, compared
/// lexicographically, so the bottleneck comes first. Restart 0 starts from the
/// sorted assignment and the others from seeded shuffles; restarts run in
/// parallel and the result depends only on `seed`.
pub fn solve_heuristic(points: &[Vec<f64>], n: u64, seed: u64, schedule: &Schedule) -> Result<BoundsReport> {
    let inst = Instance::new(points, n)?;
    if schedule.restarts == 0 {
        return Err(Error::InvalidInput("need at least one restart".into()));
    }
    if !(schedule.t_start > 0.0 && schedule.t_end > 0.0 && schedule.t_end <= schedule.t_start) {
        return Err(Error::InvalidInput("need 0 < t_end <= t_start".into()));
    }
    let size = inst.size as u64;
    let proposals = schedule.proposals.unwrap_or(200 * size * size);
    let start = inst.sorted_assignment(points);
    let runs: Vec<(Vec<usize>, f64)> = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut perm = start.clone();
            if r > 0 {
                perm.shuffle(&mut rng);
            }
            anneal(&inst, perm, proposals, schedule, &mut rng)
        })
        .collect();
    let (best_perm, _) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, (_, a)), (ib, (_, b))| a.total_cmp(b).then(ia.cmp(ib)))
        .map(|(_, run)| run)
        .expect("at least one restart");
    let assignment = inst.assignment(best_perm);
    let lower = counting_lower_bound(points, inst.d);
    Ok(BoundsReport {
        lower,
        upper: assignment.bottleneck,
        exact: None,
        assignment,
        work: proposals * schedule.restarts as u64,
    })
}

/// One annealing run; returns the best permutation and its squared bottleneck.
fn anneal(
    inst: &Instance,
    mut perm: Vec<usize>,
    proposals: u64,
    schedule: &Schedule,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, f64) {
    let size = inst.size;
    let global_max = |perm: &[usize]| -> (f64, usize) {
        let mut b = 0.0f64;
        let mut count = 0;
        for i in 0..size {
            for j in i + 1..size {
                let s = inst.sq_ratio(i, j, perm[i], perm[j]);
                if s > b {
                    b = s;
                    count = 1;
                } else if s == b {
                    count += 1;
                }
            }
        }
        (b, count)
    };
    let (mut b, mut b_count) = global_max(&perm);
    let mut best = (perm.clone(), b);
    if size < 2 || proposals == 0 {
        return best;
    }
    let scale = b.sqrt().max(f64::MIN_POSITIVE);
    let cooling = (schedule.t_end / schedule.t_start).powf(1.0 / proposals as f64);
    let mut temp = schedule.t_start * scale;
    let mut removed = Vec::with_capacity(2 * size);
    let mut added = Vec::with_capacity(2 * size);
    for _ in 0..proposals {
        let i = rng.gen_range(0..size);
        let mut j = rng.gen_range(0..size - 1);
        if j >= i {
            j += 1;
        }
        removed.clear();
        added.clear();
        for k in 0..size {
            if k == i || k == j {
                continue;
            }
            removed.push(inst.sq_ratio(i, k, perm[i], perm[k]));
            removed.push(inst.sq_ratio(j, k, perm[j], perm[k]));
            added.push(inst.sq_ratio(i, k, perm[j], perm[k]));
            added.push(inst.sq_ratio(j, k, perm[i], perm[k]));
        }
        let (lost, gained) = leading_difference(&mut removed, &mut added);
        let accept = match (lost, gained) {
            (_, None) => true,
            (Some(r), Some(a)) if r > a => true,
            (r, Some(a)) => {
                let delta = a.sqrt() - r.unwrap_or(0.0).sqrt();
                rng.gen::<f64>() < (-delta / temp).exp()
            }
        };
        temp *= cooling;
        if !accept {
            continue;
        }
        perm.swap(i, j);
        for &r in &removed {
            if r == b {
                b_count -= 1;
            }
        }
        for &a in &added {
            if a > b {
                b = a;
                b_count = 1;
            } else if a == b {
                b_count += 1;
            }
        }
        if b_count == 0 {
            (b, b_count) = global_max(&perm);
        }
        if b < best.1 {
            best = (perm.clone(), b);
        }
    }
    best
}

/// Largest values of `removed \ added` and `added \ removed` as multisets.
/// Sorts both slices in descending order.
fn leading_difference(removed: &mut [f64], added: &mut [f64]) -> (Option<f64>, Option<f64>) {
    removed.sort_by(|a, b| b.total_cmp(a));
    added.sort_by(|a, b| b.total_cmp(a));
    let (mut i, mut j) = (0, 0);
    let (mut lost, mut gained) = (None, None);
    while i < removed.len() && j < added.len() && (lost.is_none() || gained.is_none()) {
        match removed[i].total_cmp(&added[j]) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Greater => {
                lost.get_or_insert(removed[i]);
                i += 1;
            }
            Ordering::Less => {
                gained.get_or_insert(added[j]);
                j += 1;
            }
        }
    }
    (lost.or(removed.get(i).copied()), gained.or(added.get(j).copied()))
}

/// Coordinatewise McShane extension `f_j(q) = min_s (v_j(s) + L |q - s|)`.
///
/// The data must be `L`-Lipschitz in every coordinate. Queries that are
/// sample points return the stored values unchanged.
pub fn mcshane_extend(
    points: &[Vec<f64>],
    values: &[Vec<f64>],
    lipschitz: f64,
    queries: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if points.len() != values.len() || points.is_empty() {
        return Err(Error::InvalidInput("need one value per sample point".into()));
    }
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidInput(format!("bad Lipschitz constant {lipschitz}")));
    }
    let k = values[0].len();
    if values.iter().any(|v| v.len() != k) {
        return Err(Error::InvalidInput("values have mixed dimension".into()));
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx = dist(&points[i], &points[j]);
            for c in 0..k {
                let dv = (values[i][c] - values[j][c]).abs();
                if dv > lipschitz * dx * (1.0 + 1e-12) {
                    return Err(Error::NotLipschitz { i, j, ratio: dv / dx, lipschitz });
                }
            }
        }
    }
    let key = |p: &[f64]| p.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    let index: HashMap<Vec<u64>, usize> = points.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    Ok(queries
        .iter()
        .map(|q| {
            if let Some(&i) = index.get(&key(q)) {
                return values[i].clone();
            }
            (0..k)
                .map(|c| {
                    points.iter().zip(values).map(|(s, v)| v[c] + lipschitz * dist(q, s)).fold(f64::INFINITY, f64::min)
                })
                .collect()
        })
        .collect())
}

/// Largest `|f_# (rho L)(B) - L(B ∩ hull)|` over `boxes`.
///
/// The pushforward is estimated from the grid cells of `map`: each cell
/// contributes `rho(center) * volume` to the box holding the image of its
/// center. `hull` is the bounding box of all sampled images.
pub fn pushforward_check(map: &SampledMap, rho: &GridDensity, boxes: &[Cube]) -> Result<f64> {
    let d = rho.dim();
    if map.in_dim() != d || map.out_dim() != d {
        return Err(Error::Dimension { expected: d, found: map.out_dim() });
    }
    let cells = map.cell_images()?;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for y in map.outputs() {
        for a in 0..d {
            lo[a] = lo[a].min(y[a]);
            hi[a] = hi[a].max(y[a]);
        }
    }
    let mut worst = 0.0f64;
    for b in boxes {
        if b.dim() != d {
            return Err(Error::Dimension { expected: d, found: b.dim() });
        }
        let blo: Vec<f64> = b.anchor().iter().map(to_f64).collect();
        let bhi: Vec<f64> = (0..d).map(|a| to_f64(&b.upper(a))).collect();
        let estimate: f64 = cells
            .iter()
            .filter(|(_, y, _)| (0..d).all(|a| blo[a] <= y[a] && y[a] < bhi[a]))
            .map(|(x, _, vol)| rho.value_at(x) * vol)
            .sum();
        let target: f64 = (0..d).map(|a| (bhi[a].min(hi[a]) - blo[a].max(lo[a])).max(0.0)).product();
        worst = worst.max((estimate - target).abs());
    }
    Ok(worst)
}
