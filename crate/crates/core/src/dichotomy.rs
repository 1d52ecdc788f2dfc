//! Parameters for the stretch-or-translate dichotomy, the nested tiled
//! families it is applied to, and a numerical probe that decides which
//! alternative a sampled map satisfies.

use num_bigint::BigUint;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{Cube, NestedFamilies, TiledFamily};
use crate::mapping::SampledMap;
use crate::rational::{int, is_multiple_of, pow, Rational};

/// Upper limit on doubling steps during the `N0`/`M` search.
pub const SEARCH_CAP: usize = 8192;

/// Parameters for one dimension of the dichotomy.
///
/// `m` and `n0` are exact integers because they overflow machine words as
/// soon as `d >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyParams {
    pub d: usize,
    pub lipschitz: f64,
    pub eps: f64,
    /// Slack of the one-dimensional base case.
    pub t: f64,
    pub m: BigUint,
    pub phi: f64,
    pub n0: BigUint,
    /// The `theta` used at each recursion step, outermost first.
    pub theta_chain: Vec<f64>,
    /// Parameters for `d - 1`, absent in dimension one.
    pub lower: Option<Box<DichotomyParams>>,
}

fn big_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn check_common(lipschitz: f64, eps: f64) -> Result<()> {
    if !(lipschitz >= 1.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidInput(format!("Lipschitz constant {lipschitz} must be >= 1")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// One-dimensional parameters: `t = eps^2/(45 L^2)`, `M = ceil(6L/eps)`,
/// `phi = eps t / (2(6 - eps))`.
pub fn params_1d(lipschitz: f64, eps: f64) -> Result<DichotomyParams> {
    check_common(lipschitz, eps)?;
    let t = eps * eps / (45.0 * lipschitz * lipschitz);
    // The shave keeps an exact quotient such as 6/0.3 from rounding up a step.
    let mut m = (6.0 * lipschitz / eps * (1.0 - 1e-12)).ceil().max(1.0);
    while (5.0 * t).sqrt() * lipschitz + 2.0 * lipschitz / m >= eps {
        // Past 2^53 a unit step is lost to rounding.
        m = (m + 1.0).max(m * (1.0 + 1e-15));
    }
    let phi = eps * t / (2.0 * (6.0 - eps));
    if !(phi > 0.0) {
        return Err(Error::NoConvergence(format!("phi underflows for eps = {eps}")));
    }
    let p = DichotomyParams {
        d: 1,
        lipschitz,
        eps,
        t,
        m: BigUint::from_f64(m).ok_or_else(|| Error::NoConvergence(format!("M overflows for eps = {eps}")))?,
        phi,
        n0: BigUint::from(2u32),
        theta_chain: Vec::new(),
        lower: None,
    };
    p.verify()?;
    Ok(p)
}

/// Parameters in dimension `d`, built by recursion on `d - 1` with
/// `theta = min(eps^2, (eps / (12 L sqrt d))^(2d))`.
pub fn params_nd(d: usize, lipschitz: f64, eps: f64) -> Result<DichotomyParams> {
    check_common(lipschitz, eps)?;
    match d {
        0 => Err(Error::InvalidInput("dimension must be at least 1".into())),
        1 => params_1d(lipschitz, eps),
        _ => {
            let df = d as f64;
            let theta = (eps * eps).min((eps / (12.0 * lipschitz * df.sqrt())).powi(2 * d as i32));
            if !(theta > 0.0) {
                return Err(Error::NoConvergence(format!("theta underflows in dimension {d}")));
            }
            let lower = params_nd(d - 1, lipschitz, theta)?;
            let phi = lower.phi / 4.0;
            if !(phi > 0.0) {
                return Err(Error::NoConvergence(format!("phi underflows in dimension {d}")));
            }
            let mut p = DichotomyParams {
                d,
                lipschitz,
                eps,
                t: lower.t,
                m: lower.m.clone(),
                phi,
                n0: lower.n0.clone().max(BigUint::from(2u32)),
                theta_chain: std::iter::once(theta).chain(lower.theta_chain.iter().copied()).collect(),
                lower: Some(Box::new(lower)),
            };
            for _ in 0..SEARCH_CAP {
                let (grow_n, grow_m) = p.pending_growth();
                if !grow_n && !grow_m {
                    p.verify()?;
                    return Ok(p);
                }
                if grow_n {
                    p.n0 <<= 1;
                }
                if grow_m {
                    p.m <<= 1;
                }
            }
            Err(Error::NoConvergence(format!("N0/M search exceeded {SEARCH_CAP} doublings in dimension {d}")))
        }
    }
}

impl DichotomyParams {
    /// Which of `N0`, `M` still has to grow for the dimension-`d` inequalities.
    fn pending_growth(&self) -> (bool, bool) {
        let lower = self.lower.as_ref().expect("d >= 2");
        let l = self.lipschitz;
        let theta = self.theta_chain[0];
        let df = self.d as f64;
        let n0 = big_f64(&self.n0);
        let m = big_f64(&self.m);
        let stretch_n = 2.0 * (1.0 + 2.0 * self.phi) * l * l / n0;
        let stretch_m = 2.0 * l * l * big_f64(&lower.m) / m;
        let translate = 4.0 * l * df.sqrt() * theta.powf(1.0 / (2.0 * df)) + theta + 2.0 * l / n0;
        let grow_n = translate >= self.eps || stretch_n >= self.phi / 2.0;
        let grow_m = stretch_m >= self.phi / 2.0;
        (grow_n, grow_m)
    }

    /// Re-checks every inequality the construction relies on, recursively.
    ///
    /// The chain `1 + 2phi - ... > 1 + phi` is tested with the constant term
    /// cancelled, since `1 + phi` rounds to `1` once `phi` is tiny.
    pub fn verify(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Invariant(format!("dimension {} parameters violate {what}", self.d)));
        let l = self.lipschitz;
        if !(self.phi > 0.0) {
            return fail("phi > 0");
        }
        match &self.lower {
            None => {
                if !((5.0 * self.t).sqrt() * l + 2.0 * l / big_f64(&self.m) < self.eps) {
                    return fail("sqrt(5t) L + 2L/M < eps");
                }
                if !(6.0 * self.phi / (self.phi + self.t) < self.eps) {
                    return fail("6 phi / (phi + t) < eps");
                }
                if !(self.phi < self.t) {
                    return fail("phi < t");
                }
                if self.n0 < BigUint::from(2u32) {
                    return fail("N0 >= 2");
                }
                Ok(())
            }
            Some(lower) => {
                let theta = self.theta_chain[0];
                let df = self.d as f64;
                let n0 = big_f64(&self.n0);
                if !(theta.sqrt() <= self.eps) {
                    return fail("1 - sqrt(theta) >= 1 - eps");
                }
                let translate = 4.0 * l * df.sqrt() * theta.powf(1.0 / (2.0 * df)) + theta + 2.0 * l / n0;
                if !(translate < self.eps) {
                    return fail("4 L sqrt(d) theta^(1/2d) + theta + 2L/N0 < eps");
                }
                let slack = self.phi
                    - 2.0 * (1.0 + 2.0 * self.phi) * l * l / n0
                    - 2.0 * l * l * big_f64(&lower.m) / big_f64(&self.m);
                if !(slack > 0.0) {
                    return fail("the stretch chain inequality");
                }
                if !(&self.m % &lower.m).is_zero() {
                    return fail("M divisible by M(d-1)");
                }
                if !(self.phi < lower.phi / 2.0) {
                    return fail("phi < phi(d-1)/2");
                }
                if !(lower.eps == theta && lower.d + 1 == self.d) {
                    return fail("recursion on (d-1, L, theta)");
                }
                lower.verify()
            }
        }
    }
}

/// Smallest `r` with `(1 + phi)^r > L^2`, namely
/// `floor(2 ln L / ln(1 + phi)) + 1`.
pub fn iteration_bound(lipschitz: f64, phi: f64) -> Result<u128> {
    if !(lipschitz >= 1.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidInput(format!("Lipschitz constant {lipschitz} must be >= 1")));
    }
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::InvalidInput(format!("phi = {phi} must be positive")));
    }
    let q = 2.0 * lipschitz.ln() / phi.ln_1p();
    if !(q < 1e38) {
        return Err(Error::InvalidInput(format!("iteration bound {q:e} does not fit")));
    }
    let r = q.floor() as u128 + 1;
    debug_assert!(r as f64 * phi.ln_1p() > 2.0 * lipschitz.ln());
    Ok(r)
}

/// How the offsets `z_2, ..., z_r` are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum OffsetRule {
    /// Every offset is zero.
    Origin,
    /// The admissible lattice point closest to the center of its range.
    Centered,
    /// Given offsets `z_2, ..., z_r`.
    Explicit(Vec<Vec<Rational>>),
}

/// Builds the levels `S_1, ..., S_r` with `c_i = c / (NM)^(i-1)`.
pub fn build_nested_families(
    d: usize,
    n: usize,
    m: usize,
    r: usize,
    c: Rational,
    rule: &OffsetRule,
) -> Result<NestedFamilies> {
    if d == 0 || n == 0 || m == 0 || r == 0 {
        return Err(Error::InvalidInput(format!("need d, N, M, r >= 1 (got {d}, {n}, {m}, {r})")));
    }
    if !c.is_positive() || c > Rational::one() {
        return Err(Error::InvalidInput(format!("c = {c} must lie in (0, 1]")));
    }
    if let OffsetRule::Explicit(z) = rule {
        if z.len() != r - 1 {
            return Err(Error::InvalidInput(format!("expected {} offsets, got {}", r - 1, z.len())));
        }
    }
    let nn = int(n as i64);
    let nm = int((n * m) as i64);
    let mut levels: Vec<TiledFamily> = Vec::with_capacity(r);
    let mut offsets: Vec<Vec<Rational>> = vec![vec![Rational::zero(); d]];
    let mut ci = c.clone();
    for level in 1..=r {
        if level > 1 {
            let prev = ci.clone();
            ci = &prev / &nm;
            let z = match rule {
                OffsetRule::Origin => vec![Rational::zero(); d],
                OffsetRule::Centered => centered_offset(d, &prev, &ci, &nn),
                OffsetRule::Explicit(z) => z[level - 2].clone(),
            };
            check_offset(&z, d, &prev, &ci, &nn, level)?;
            offsets.push(z);
        }
        let side = &ci / &nn;
        let base: Vec<Rational> = (0..d).map(|a| offsets.iter().map(|z| z[a].clone()).sum::<Rational>()).collect();
        let cubes = (0..n)
            .map(|l| {
                let mut anchor = base.clone();
                anchor[0] += &side * int(l as i64);
                Cube::new(anchor, side.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(TiledFamily { level, side, cubes, offsets: offsets.clone() });
    }
    let fam = NestedFamilies { d, n, m, c, levels };
    fam.check_nesting()?;
    Ok(fam)
}

/// Upper corner of the admissible offset range: `(c_j - c_{j+1}, c_j/N - c_{j+1}, ...)`.
fn offset_range(d: usize, prev: &Rational, next: &Rational, n: &Rational) -> Vec<Rational> {
    (0..d).map(|a| if a == 0 { prev - next } else { prev / n - next }).collect()
}

fn centered_offset(d: usize, prev: &Rational, next: &Rational, n: &Rational) -> Vec<Rational> {
    offset_range(d, prev, next, n)
        .into_iter()
        .map(|hi| {
            let half = hi / int(2);
            (half / next).floor() * next
        })
        .collect()
}

fn check_offset(z: &[Rational], d: usize, prev: &Rational, next: &Rational, n: &Rational, level: usize) -> Result<()> {
    if z.len() != d {
        return Err(Error::Dimension { expected: d, found: z.len() });
    }
    let hi = offset_range(d, prev, next, n);
    for (a, (x, h)) in z.iter().zip(&hi).enumerate() {
        if !is_multiple_of(x, next) || x.is_negative() || x > h {
            return Err(Error::InvalidInput(format!(
                "offset for level {level} has coordinate {a} = {x}, outside {next}·Z ∩ [0, {h}]"
            )));
        }
    }
    Ok(())
}

/// Smallest `N >= 2` with `(M+1)^d / (M^d N^(d-1)) <= eta`.
pub fn min_resolution(d: usize, m: usize, eta: &Rational) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("the overlap bound does not decay with N in dimension {d}")));
    }
    if m == 0 || !eta.is_positive() {
        return Err(Error::InvalidInput("need M >= 1 and eta > 0".into()));
    }
    let need = pow(&int(m as i64 + 1), d) / (pow(&int(m as i64), d) * eta);
    let ok = |n: u64| pow(&int(n as i64), d - 1) >= need;
    let guess = crate::rational::to_f64(&need).powf(1.0 / (d - 1) as f64);
    let mut n = (guess.floor() as u64).saturating_sub(2).max(2);
    while n > 2 && ok(n - 1) {
        n -= 1;
    }
    while !ok(n) {
        n += 1;
    }
    Ok(n)
}

/// Relative slack below which a lattice step is not reported as a stretch,
/// so that float noise on an affine map is never taken for a witness.
pub const STRETCH_ROUNDING: f64 = 1e-9;

/// Which alternative of the dichotomy a sampled map satisfies.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeVerdict {
    /// Every slab in `omega` (1-based, `|omega| >= (1 - eps)(N - 1)`) is
    /// translated by `(h(c e1) - h(0))/N` to within `c eps / N`.
    Translation { omega: Vec<usize> },
    /// The lattice step at `z` stretches by more than `(1 + phi)` times the
    /// average slope.
    Stretch { z: Vec<f64>, z_index: Vec<usize>, ratio: f64 },
}

/// Decides the dichotomy for `h` sampled on `[0, c] x [0, c/N]^(d-1)`.
///
/// `h` must be grid-sampled with `k N M + 1` points along the first axis and
/// `k M + 1` along the others, for some integer `k >= 1`, so that every
/// point of the `c/(NM)` lattice is a sample. The stretch alternative is
/// tried first and the lexicographically smallest witness is returned.
pub fn dichotomy_probe(h: &SampledMap, params: &DichotomyParams, n: usize, eps: f64) -> Result<ProbeVerdict> {
    let g = h.grid().ok_or_else(|| Error::InvalidInput("probe needs a grid-sampled map".into()))?;
    let d = g.dim();
    if d != params.d {
        return Err(Error::Dimension { expected: params.d, found: d });
    }
    if n < 2 {
        return Err(Error::InvalidInput("need N >= 2".into()));
    }
    let m = params
        .m
        .to_usize()
        .filter(|&m| m.checked_mul(n).is_some_and(|x| x < 1 << 24))
        .ok_or_else(|| Error::Resolution(format!("lattice with M = {} is too fine to sample", params.m)))?;
    let c = g.upper[0] - g.lower[0];
    let steps0 = g.counts[0] - 1;
    if steps0 % (n * m) != 0 {
        return Err(Error::Resolution(format!("{} steps along e1 is not a multiple of N M = {}", steps0, n * m)));
    }
    let k = steps0 / (n * m);
    for a in 1..d {
        if g.counts[a] - 1 != k * m {
            return Err(Error::Resolution(format!("axis {a} needs {} steps, found {}", k * m, g.counts[a] - 1)));
        }
        let width = g.upper[a] - g.lower[a];
        if ((width - c / n as f64) / c).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("axis {a} has width {width}, expected c/N")));
        }
    }

    let origin = vec![0usize; d];
    let mut far = origin.clone();
    far[0] = steps0;
    let total: Vec<f64> = diff(h.output(g.flat(&far)), h.output(g.flat(&origin)));
    let slope = norm(&total) / c;
    let delta = c / (n * m) as f64;

    // Lattice points z with z + delta e1 still inside; lexicographic order.
    let lattice_counts: Vec<usize> = (0..d).map(|a| if a == 0 { n * m } else { m }).collect();
    let mut z = vec![0usize; d];
    loop {
        let idx: Vec<usize> = z.iter().map(|&j| j * k).collect();
        let mut next = idx.clone();
        next[0] += k;
        let step = norm(&diff(h.output(g.flat(&next)), h.output(g.flat(&idx)))) / delta;
        if step - slope > (params.phi + STRETCH_ROUNDING) * slope {
            return Ok(ProbeVerdict::Stretch {
                z: g.point(&idx),
                z_index: z,
                ratio: if slope > 0.0 { step / slope } else { f64::INFINITY },
            });
        }
        if !advance(&mut z, &lattice_counts) {
            break;
        }
    }

    // Translation test on every sample of each slab.
    let shift = k * m;
    let mean: Vec<f64> = total.iter().map(|x| x / n as f64).collect();
    let tol = c * eps / n as f64;
    let mut omega = Vec::new();
    for slab in 1..n {
        let lo = (slab - 1) * shift;
        let mut ranges: Vec<usize> = g.counts.clone();
        ranges[0] = shift + 1;
        let mut p = vec![0usize; d];
        let mut good = true;
        loop {
            let mut x = p.clone();
            x[0] += lo;
            let mut y = x.clone();
            y[0] += shift;
            let e = diff(&diff(h.output(g.flat(&y)), h.output(g.flat(&x))), &mean);
            if norm(&e) > tol {
                good = false;
                break;
            }
            if !advance(&mut p, &ranges) {
                break;
            }
        }
        if good {
            omega.push(slab);
        }
    }
    if omega.len() as f64 >= (1.0 - eps) * (n - 1) as f64 {
        Ok(ProbeVerdict::Translation { omega })
    } else {
        Err(Error::Inconclusive(format!(
            "no stretched lattice step and only {} of {} slabs are translated (slabs {:?})",
            omega.len(),
            n - 1,
            omega
        )))
    }
}

fn advance(idx: &mut [usize], counts: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < counts[a] {
            return true;
        }
        idx[a] = 0;
    }
    false
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
