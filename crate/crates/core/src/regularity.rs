//! Folding maps of the interval, covering-number regularity, preimage counts
//! and the topological degree of piecewise-affine maps.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::mapping::{det, dist, solve, SampledMap};
use crate::rational::{from_f64, int, pow, rat, Rational};

/// Continuous piecewise-affine map `[0, 1] -> R` with rational breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear1D {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl PiecewiseLinear1D {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() {
            return Err(Error::InvalidInput("need matching breakpoints and values, at least two".into()));
        }
        if !breakpoints[0].is_zero() || !breakpoints.last().expect("non-empty").is_one() {
            return Err(Error::InvalidInput("breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must increase strictly".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn identity() -> Self {
        Self { breakpoints: vec![int(0), int(1)], values: vec![int(0), int(1)] }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        if x.is_negative() || *x > Rational::one() {
            return Err(Error::InvalidInput(format!("{x} is outside [0, 1]")));
        }
        let i = match self.breakpoints.binary_search(x) {
            Ok(i) => return Ok(self.values[i].clone()),
            Err(i) => i - 1,
        };
        let (x0, x1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    pub fn slopes(&self) -> Vec<Rational> {
        (0..self.breakpoints.len() - 1)
            .map(|i| (&self.values[i + 1] - &self.values[i]) / (&self.breakpoints[i + 1] - &self.breakpoints[i]))
            .collect()
    }

    /// Largest absolute slope.
    pub fn lipschitz(&self) -> Rational {
        self.slopes().into_iter().map(|s| s.abs()).max().expect("at least one piece")
    }

    /// `max |f(x) - x|`, attained at a breakpoint.
    pub fn distance_to_identity(&self) -> Rational {
        self.breakpoints.iter().zip(&self.values).map(|(x, y)| (y - x).abs()).max().expect("non-empty")
    }

    pub fn image(&self) -> (Rational, Rational) {
        let lo = self.values.iter().min().expect("non-empty").clone();
        let hi = self.values.iter().max().expect("non-empty").clone();
        (lo, hi)
    }

    /// `outer ∘ self`. The range of `self` must lie in `[0, 1]`.
    pub fn then(&self, outer: &PiecewiseLinear1D) -> Result<PiecewiseLinear1D> {
        let (lo, hi) = self.image();
        if lo.is_negative() || hi > Rational::one() {
            return Err(Error::InvalidInput("inner map leaves [0, 1]".into()));
        }
        let mut xs = Vec::new();
        for i in 0..self.breakpoints.len() - 1 {
            let (x0, x1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
            let (y0, y1) = (&self.values[i], &self.values[i + 1]);
            xs.push(x0.clone());
            if y0 == y1 {
                continue;
            }
            let (a, b) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            let mut inner: Vec<Rational> = outer
                .breakpoints
                .iter()
                .filter(|t| a < *t && *t < b)
                .map(|t| x0 + (x1 - x0) * (t - y0) / (y1 - y0))
                .collect();
            inner.sort();
            xs.extend(inner);
        }
        xs.push(int(1));
        let values = xs.iter().map(|x| outer.eval(&self.eval(x)?)).collect::<Result<Vec<_>>>()?;
        Ok(PiecewiseLinear1D::new(xs, values)?.simplified())
    }

    /// Drops breakpoints between collinear pieces.
    pub fn simplified(self) -> Self {
        let slopes = self.slopes();
        let mut xs = vec![self.breakpoints[0].clone()];
        let mut ys = vec![self.values[0].clone()];
        for i in 1..self.breakpoints.len() - 1 {
            if slopes[i - 1] != slopes[i] {
                xs.push(self.breakpoints[i].clone());
                ys.push(self.values[i].clone());
            }
        }
        xs.push(self.breakpoints.last().expect("non-empty").clone());
        ys.push(self.values.last().expect("non-empty").clone());
        Self { breakpoints: xs, values: ys }
    }

    /// Preimage of the open interval `(lo, hi)` as merged open intervals.
    pub fn preimage(&self, lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational)> {
        let mut parts: Vec<(Rational, Rational)> = Vec::new();
        for i in 0..self.breakpoints.len() - 1 {
            let (x0, x1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
            let (y0, y1) = (&self.values[i], &self.values[i + 1]);
            if y0 == y1 {
                if lo < y0 && y0 < hi {
                    parts.push((x0.clone(), x1.clone()));
                }
                continue;
            }
            let at = |y: &Rational| x0 + (x1 - x0) * (y - y0) / (y1 - y0);
            let (mut a, mut b) = (at(lo), at(hi));
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let a = a.max(x0.clone());
            let b = b.min(x1.clone());
            if a < b {
                parts.push((a, b));
            }
        }
        // Pieces meeting at a breakpoint whose value lies inside (lo, hi) join.
        let mut merged: Vec<(Rational, Rational)> = Vec::new();
        for (a, b) in parts {
            if let Some(last) = merged.last_mut() {
                if last.1 == a && self.eval(&a).is_ok_and(|v| lo < &v && &v < hi) {
                    last.1 = b;
                    continue;
                }
            }
            merged.push((a, b));
        }
        merged
    }
}

/// The fold `g(a, c)`: identity up to `a + c`, reflection `x ↦ 2a + 2c - x` on
/// `[a + c, a + 2c]`, then `x ↦ x - 2c`.
pub fn fold_map(a: &Rational, c: &Rational) -> Result<PiecewiseLinear1D> {
    if !a.is_positive() || !c.is_positive() || a + int(3) * c >= Rational::one() {
        return Err(Error::InvalidInput(format!("fold interval [{a}, {a} + 3·{c}] must lie inside (0, 1) with c > 0")));
    }
    let g = PiecewiseLinear1D::new(
        vec![int(0), a + c, a + int(2) * c, int(1)],
        vec![int(0), a + c, a.clone(), int(1) - int(2) * c],
    )?;
    if g.lipschitz() > Rational::one() || g.distance_to_identity() > int(2) * c {
        return Err(Error::Invariant("fold is not a 1-Lipschitz 2c-perturbation".into()));
    }
    Ok(g)
}

/// A fat Cantor set: from each of the `2^k` intervals of level `k`, remove
/// the central open interval of length `eps / 4^(k+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FatCantorSpec {
    pub eps: Rational,
}

impl FatCantorSpec {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidInput(format!("eps = {eps} must lie in (0, 1)")));
        }
        Ok(Self { eps: from_f64(eps)? })
    }

    /// The first `count` removed intervals, level by level, left to right.
    pub fn complement_intervals(&self, count: usize) -> Vec<(Rational, Rational)> {
        let mut out = Vec::with_capacity(count);
        let mut level = vec![(int(0), int(1))];
        let mut k = 0usize;
        while out.len() < count {
            let gap = &self.eps / pow(&int(4), k + 1);
            let mut next = Vec::with_capacity(2 * level.len());
            for (a, b) in &level {
                let mid = (a + b) / int(2);
                let l = &mid - &gap / int(2);
                let r = &mid + &gap / int(2);
                if out.len() < count {
                    out.push((l.clone(), r.clone()));
                }
                next.push((a.clone(), l));
                next.push((r, b.clone()));
            }
            level = next;
            k += 1;
        }
        out
    }
}

/// One fold of [`iterated_fold`].
#[derive(Clone, Debug, PartialEq)]
pub struct FoldStep {
    /// The complementary interval `A_n`.
    pub interval: (Rational, Rational),
    /// Its midpoint `a_n`.
    pub a: Rational,
    pub c: Rational,
}

impl FoldStep {
    /// `f([a, a + c])`, the common image of the three thirds of the fold.
    pub fn image(&self, f: &PiecewiseLinear1D) -> Result<(Rational, Rational)> {
        let u = f.eval(&self.a)?;
        let v = f.eval(&(&self.a + &self.c))?;
        Ok((u.clone().min(v.clone()), u.max(v)))
    }
}

/// Result of [`iterated_fold`]: `f = g_n ∘ ... ∘ g_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct IteratedFold {
    pub map: PiecewiseLinear1D,
    pub steps: Vec<FoldStep>,
}

/// `D_n = 3 - 2/(n+1)`.
fn d_seq(n: usize) -> Rational {
    int(3) - rat(2, n as i64 + 1)
}

/// Folds the map once inside each of the first `n_max` complementary
/// intervals of a fat Cantor set, `f_n = g(f_{n-1}(a_n), c_n) ∘ f_{n-1}`.
pub fn iterated_fold(spec: &FatCantorSpec, n_max: usize) -> Result<IteratedFold> {
    let mut f = PiecewiseLinear1D::identity();
    let mut steps = Vec::with_capacity(n_max);
    for (i, (lo, hi)) in spec.complement_intervals(n_max).into_iter().enumerate() {
        let n = i + 1;
        let len = &hi - &lo;
        let a = (&lo + &hi) / int(2);
        let (dn, dp) = (d_seq(n), d_seq(n - 1));
        let growth = &dn - &dp;
        // D_{n-1} (L(U) + 4c) <= D_n L(U) for every L(U) >= L(A_n)/2 - 3c.
        let d_bound = &growth * &len / (int(2) * (int(4) * &dp + int(3) * &growth));
        let c = (&spec.eps / pow(&int(2), n + 1)).min(&len / int(8)).min(d_bound);
        let g = fold_map(&f.eval(&a)?, &c)?;
        f = f.then(&g)?;
        steps.push(FoldStep { interval: (lo, hi), a, c });
    }
    if f.lipschitz() > Rational::one() {
        return Err(Error::Invariant("iterated fold is not 1-Lipschitz".into()));
    }
    if f.distance_to_identity() > spec.eps {
        return Err(Error::Invariant("iterated fold moves a point by more than eps".into()));
    }
    for step in &steps {
        let image = step.image(&f)?;
        // 1-Lipschitz plus |f(t + c) - f(t)| = c forces an isometry on each third.
        for j in 0..3 {
            let t = &step.a + int(j) * &step.c;
            let (u, v) = (f.eval(&t)?, f.eval(&(&t + &step.c))?);
            if (u.clone().min(v.clone()), u.max(v)) != image {
                return Err(Error::Invariant(format!("third {j} of fold at {} has a different image", step.a)));
            }
        }
    }
    Ok(IteratedFold { map: f, steps })
}

/// Open interval `(center - radius, center + radius)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    pub center: Rational,
    pub radius: Rational,
}

/// Dyadic intervals `(k/2^j, (k+1)/2^j)` inside `[lo, hi]` for each `j`.
pub fn dyadic_probes(lo: &Rational, hi: &Rational, scales: &[u32]) -> Vec<Probe> {
    let mut out = Vec::new();
    for &j in scales {
        let w = Rational::new(1.into(), num_bigint::BigInt::one() << j as usize);
        let mut k = (lo / &w).ceil();
        while &(&k + Rational::one()) * &w <= *hi {
            out.push(Probe { center: (&k + rat(1, 2)) * &w, radius: &w / int(2) });
            k += Rational::one();
        }
    }
    out
}

/// Fewest windows `[s, s + width)` covering a union of disjoint open
/// intervals, by the greedy sweep.
fn greedy_cover(parts: &[(Rational, Rational)], width: &Rational) -> usize {
    let mut count = 0;
    let mut reach: Option<Rational> = None;
    for (a, b) in parts {
        let mut start = match &reach {
            Some(r) if r > a => r.clone(),
            _ => a.clone(),
        };
        while &start < b {
            count += 1;
            start = &start + width;
        }
        reach = Some(start);
    }
    count
}

/// Smallest `C <= c_max` such that every probe's preimage is covered by at
/// most `C` intervals of radius `C` times the probe radius; `c_max + 1` if
/// none is.
pub fn covering_regularity(map: &PiecewiseLinear1D, probes: &[Probe], c_max: u32) -> Result<u32> {
    let (lo, hi) = map.image();
    let mut worst = 1u32;
    for p in probes {
        if !p.radius.is_positive() || &p.center - &p.radius < lo || &p.center + &p.radius > hi {
            return Err(Error::InvalidInput(format!(
                "probe ({} ± {}) is not inside the image [{lo}, {hi}]",
                p.center, p.radius
            )));
        }
        let parts = map.preimage(&(&p.center - &p.radius), &(&p.center + &p.radius));
        let needed = (worst..=c_max).find(|&c| greedy_cover(&parts, &(int(2 * c as i64) * &p.radius)) <= c as usize);
        match needed {
            Some(c) => worst = c,
            None => return Ok(c_max + 1),
        }
    }
    Ok(worst)
}

/// Number of `x` with `f(x) = y` for a 1-D piecewise-affine map.
pub fn preimage_count_1d(map: &PiecewiseLinear1D, y: &Rational) -> Result<usize> {
    if let Some(x) = map.breakpoints.iter().zip(&map.values).find(|(_, v)| *v == y) {
        return Err(Error::Ambiguous(format!("{y} is the value at breakpoint {}", x.0)));
    }
    Ok(map.values.windows(2).filter(|w| (&w[0] < y && y < &w[1]) || (&w[1] < y && y < &w[0])).count())
}

/// Relative width of the guard band around piece boundaries.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

struct Solved {
    barycentric: Vec<f64>,
    sign: f64,
}

/// Barycentric coordinates of `y` in the image of a piece, or `None` when
/// the piece is singular.
fn locate(piece: &crate::mapping::AffinePiece, y: &[f64]) -> Option<Solved> {
    let d = y.len();
    let q0 = &piece.images[0];
    let p0 = &piece.vertices[0];
    let img: Vec<Vec<f64>> = (0..d).map(|r| (1..=d).map(|k| piece.images[k][r] - q0[r]).collect()).collect();
    let dom: Vec<Vec<f64>> = (0..d).map(|r| (1..=d).map(|k| piece.vertices[k][r] - p0[r]).collect()).collect();
    let rhs: Vec<f64> = (0..d).map(|r| y[r] - q0[r]).collect();
    let lambda = solve(img.clone(), rhs)?;
    let sign = (det(img) * det(dom)).signum();
    if sign == 0.0 {
        return None;
    }
    let mut barycentric = vec![1.0 - lambda.iter().sum::<f64>()];
    barycentric.extend(lambda);
    Some(Solved { barycentric, sign })
}

/// Distance from `y` to the simplex spanned by `verts`.
fn dist_to_simplex(y: &[f64], verts: &[&[f64]]) -> f64 {
    if verts.len() == 1 {
        return dist(y, verts[0]);
    }
    let k = verts.len() - 1;
    let v0 = verts[0];
    let e: Vec<Vec<f64>> = (1..=k).map(|i| verts[i].iter().zip(v0).map(|(a, b)| a - b).collect()).collect();
    let gram: Vec<Vec<f64>> =
        e.iter().map(|a| e.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect()).collect();
    let rhs: Vec<f64> = e.iter().map(|a| a.iter().zip(y).zip(v0).map(|((ai, yi), vi)| ai * (yi - vi)).sum()).collect();
    if let Some(mu) = solve(gram, rhs) {
        let mu0 = 1.0 - mu.iter().sum::<f64>();
        if mu0 >= 0.0 && mu.iter().all(|&m| m >= 0.0) {
            let proj: Vec<f64> = (0..y.len()).map(|r| v0[r] + (0..k).map(|i| mu[i] * e[i][r]).sum::<f64>()).collect();
            return dist(y, &proj);
        }
    }
    (0..verts.len())
        .map(|skip| {
            let face: Vec<&[f64]> = verts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
            dist_to_simplex(y, &face)
        })
        .fold(f64::INFINITY, f64::min)
}

fn image_diameter(pieces: &[crate::mapping::AffinePiece]) -> f64 {
    let k = pieces[0].images[0].len();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for q in pieces.iter().flat_map(|p| &p.images) {
        for a in 0..k {
            lo[a] = lo[a].min(q[a]);
            hi[a] = hi[a].max(q[a]);
        }
    }
    dist(&lo, &hi).max(f64::MIN_POSITIVE)
}

/// Preimages of `y` under a sampled piecewise-affine map `R^d -> R^d`,
/// as `(piece index, orientation sign)`.
fn preimages(pieces: &[crate::mapping::AffinePiece], y: &[f64], margin: f64) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        match locate(piece, y) {
            Some(s) => {
                let scale = s.barycentric.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let tol = 1e-12 * scale;
                let min = s.barycentric.iter().copied().fold(f64::INFINITY, f64::min);
                if min > tol {
                    out.push((i, s.sign));
                } else if min >= -tol {
                    return Err(Error::Ambiguous(format!("y lies on the boundary of piece {i}")));
                }
            }
            None => {
                let verts: Vec<&[f64]> = piece.images.iter().map(Vec::as_slice).collect();
                if dist_to_simplex(y, &verts) <= margin {
                    return Err(Error::Ambiguous(format!("y lies in the image of singular piece {i}")));
                }
            }
        }
    }
    Ok(out)
}

fn check_square(map: &SampledMap, y: &[f64]) -> Result<()> {
    if map.out_dim() != map.in_dim() {
        return Err(Error::Dimension { expected: map.in_dim(), found: map.out_dim() });
    }
    if y.len() != map.out_dim() {
        return Err(Error::Dimension { expected: map.out_dim(), found: y.len() });
    }
    Ok(())
}

/// Number of preimages of `y` under a sampled map `R^d -> R^d`.
pub fn preimage_count(map: &SampledMap, y: &[f64]) -> Result<usize> {
    check_square(map, y)?;
    let pieces = map.pieces();
    let margin = BOUNDARY_MARGIN * image_diameter(&pieces);
    Ok(preimages(&pieces, y, margin)?.len())
}

/// Closed axis-parallel box.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    fn contains(&self, x: &[f64]) -> bool {
        let scale = self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(t, (l, u))| *t >= l - tol && *t <= u + tol)
    }
}

/// `deg(f, U, y)` as the sum of orientation signs over preimages in `U`.
///
/// `U` is the union of the simplices whose vertices all lie in `region`.
/// Fails when `y` is within `1e-9` times the image diameter of `f(∂U)`, or
/// when a preimage sits on a piece boundary or in a singular piece.
pub fn topological_degree(map: &SampledMap, region: &Region, y: &[f64]) -> Result<i64> {
    check_square(map, y)?;
    let simplices: Vec<Vec<usize>> =
        map.simplices().into_iter().filter(|s| s.iter().all(|&i| region.contains(&map.position(i)))).collect();
    if simplices.is_empty() {
        return Err(Error::InvalidInput("region contains no simplex".into()));
    }
    let pieces: Vec<crate::mapping::AffinePiece> = simplices
        .iter()
        .map(|s| crate::mapping::AffinePiece {
            vertices: s.iter().map(|&i| map.position(i)).collect(),
            images: s.iter().map(|&i| map.output(i).to_vec()).collect(),
        })
        .collect();
    let margin = BOUNDARY_MARGIN * image_diameter(&pieces);

    let mut facets: std::collections::HashMap<Vec<usize>, usize> = std::collections::HashMap::new();
    for s in &simplices {
        for skip in 0..s.len() {
            let mut f: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
            f.sort_unstable();
            *facets.entry(f).or_default() += 1;
        }
    }
    for (f, _) in facets.iter().filter(|(_, &count)| count == 1) {
        let verts: Vec<&[f64]> = f.iter().map(|&i| map.output(i)).collect();
        let gap = dist_to_simplex(y, &verts);
        if gap <= margin {
            return Err(Error::Ambiguous(format!(
                "y is within {gap:e} of the image of the boundary (margin {margin:e})"
            )));
        }
    }
    Ok(preimages(&pieces, y, margin)?.iter().map(|(_, s)| *s as i64).sum())
}

/// Whether every ball's estimated preimage measure is at most
/// `c r^d (1 + tolerance)`. The estimate adds the volumes of the sample
/// cells whose image center lies in the ball.
pub fn measure_regularity_probe(map: &SampledMap, balls: &[(Vec<f64>, f64)], c: f64, tolerance: f64) -> Result<bool> {
    let cells = map.cell_images()?;
    let d = map.in_dim() as i32;
    for (center, r) in balls {
        let mass: f64 = cells.iter().filter(|(_, y, _)| dist(y, center) <= *r).map(|(_, _, v)| v).sum();
        if mass > c * r.powi(d) * (1.0 + tolerance) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The regularity constant `max{2, C 2^d}` implied by a measure bound `C`.
pub fn regularity_from_measure_bound(c: f64, d: usize) -> f64 {
    (c * 2f64.powi(d as i32)).max(2.0)
}

/// `zeta = eps / (2 (4 + C (phi_sup + 1 + 6 (L / b)^d)))` with `b = 1/(2C^2)`.
pub fn porosity_radius(eps: f64, c: f64, lipschitz: f64, phi_sup: f64, d: usize) -> Result<f64> {
    if !(eps > 0.0 && c > 0.0 && lipschitz > 0.0 && phi_sup >= 0.0 && d >= 1) {
        return Err(Error::InvalidInput("porosity radius needs positive eps, C, L and d".into()));
    }
    let b = 1.0 / (2.0 * c * c);
    Ok(eps / (2.0 * (4.0 + c * (phi_sup + 1.0 + 6.0 * (lipschitz / b).powi(d as i32)))))
}
