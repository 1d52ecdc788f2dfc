//! Dyadic-style cubes, tiled families and piecewise-constant densities on the
//! unit cube.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{ceil_int, floor_int, int, is_multiple_of, to_f64, DyadicSum, Rational};

/// Closed axis-parallel cube `anchor + [0, side]^d`.
///
/// Every anchor coordinate is an integer multiple of `side`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    anchor: Vec<Rational>,
    side: Rational,
}

impl Cube {
    pub fn new(anchor: Vec<Rational>, side: Rational) -> Result<Self> {
        if anchor.is_empty() {
            return Err(Error::InvalidInput("cube of dimension 0".into()));
        }
        if !side.is_positive() {
            return Err(Error::InvalidInput(format!("cube side {side} is not positive")));
        }
        if let Some(a) = anchor.iter().find(|a| !is_multiple_of(a, &side)) {
            return Err(Error::InvalidInput(format!("anchor coordinate {a} is not a multiple of side {side}")));
        }
        Ok(Self { anchor, side })
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn anchor(&self) -> &[Rational] {
        &self.anchor
    }

    pub fn side(&self) -> &Rational {
        &self.side
    }

    pub fn upper(&self, axis: usize) -> Rational {
        &self.anchor[axis] + &self.side
    }

    pub fn volume(&self) -> Rational {
        crate::rational::pow(&self.side, self.dim())
    }

    /// Translate by `k * side` along the first axis.
    pub fn shift_e1(&self, k: i64) -> Cube {
        let mut anchor = self.anchor.clone();
        anchor[0] += &self.side * int(k);
        Cube { anchor, side: self.side.clone() }
    }

    /// Anchor in units of the side length.
    pub fn lattice_index(&self) -> Vec<BigInt> {
        self.anchor.iter().map(|a| (a / &self.side).to_integer()).collect()
    }

    /// Lies inside `[0, 1]^d`.
    pub fn in_unit_cube(&self) -> bool {
        (0..self.dim()).all(|a| !self.anchor[a].is_negative() && self.upper(a) <= Rational::one())
    }

    fn as_box(&self) -> BoxR {
        BoxR { lo: self.anchor.clone(), hi: (0..self.dim()).map(|a| self.upper(a)).collect() }
    }
}

/// Whether `b = a + side(a) e1` with equal sides.
pub fn e1_adjacent(a: &Cube, b: &Cube) -> bool {
    a.dim() == b.dim() && a.side == b.side && b.anchor[0] == &a.anchor[0] + &a.side && a.anchor[1..] == b.anchor[1..]
}

/// One level of a nested tiled family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TiledFamily {
    /// 1-based level index.
    pub level: usize,
    pub side: Rational,
    /// Cubes in order of increasing first coordinate.
    pub cubes: Vec<Cube>,
    /// Offsets `z_1, ..., z_level`.
    pub offsets: Vec<Vec<Rational>>,
}

impl TiledFamily {
    pub fn dim(&self) -> usize {
        self.cubes.first().map_or(0, Cube::dim)
    }

    /// Successor of cube `i` along `e1` inside the family.
    pub fn e1_successor(&self, i: usize) -> Option<usize> {
        self.cubes.iter().position(|c| e1_adjacent(&self.cubes[i], c))
    }

    /// All ordered pairs `(i, j)` with cube `j` the `e1` successor of cube `i`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.cubes.len()).filter_map(|i| self.e1_successor(i).map(|j| (i, j))).collect()
    }
}

/// The levels `S_1, ..., S_r` of a nested construction together with the
/// parameters that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedFamilies {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub c: Rational,
    pub levels: Vec<TiledFamily>,
}

impl NestedFamilies {
    /// Checks that each level is covered by the one before it and that every
    /// cube lies in `[0, 1]^d`.
    pub fn check_nesting(&self) -> Result<()> {
        for f in &self.levels {
            if f.cubes.iter().any(|c| c.dim() != self.d) {
                return Err(Error::Dimension { expected: self.d, found: f.dim() });
            }
            if let Some(c) = f.cubes.iter().find(|c| !c.in_unit_cube()) {
                return Err(Error::Invariant(format!(
                    "level {} cube at {:?} leaves the unit cube",
                    f.level,
                    c.anchor().iter().map(ToString::to_string).collect::<Vec<_>>()
                )));
            }
        }
        for pair in self.levels.windows(2) {
            for q in &pair[1].cubes {
                if covered_measure(q, &pair[0].cubes) != q.volume() {
                    return Err(Error::Invariant(format!(
                        "level {} is not contained in level {}",
                        pair[1].level, pair[0].level
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest overlap fraction of a level-`i` cube with the union of all finer
    /// levels, over every non-final level.
    pub fn max_overlap(&self) -> Rational {
        let mut worst = Rational::zero();
        for (i, f) in self.levels.iter().enumerate() {
            let finer: Vec<&TiledFamily> = self.levels[i + 1..].iter().collect();
            if finer.is_empty() {
                continue;
            }
            for s in &f.cubes {
                worst = worst.max(overlap_fraction(s, &finer));
            }
        }
        worst
    }
}

/// Piecewise-constant function on `[0, 1]^d` with `m^d` equal cells.
///
/// Cells are stored row-major with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    d: usize,
    m: usize,
    cells: Vec<f64>,
}

impl GridDensity {
    pub fn new(d: usize, m: usize, cells: Vec<f64>) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidInput(format!("grid with d={d}, m={m}")));
        }
        let expected =
            m.checked_pow(d as u32).ok_or_else(|| Error::InvalidInput(format!("grid {m}^{d} is too large")))?;
        if cells.len() != expected {
            return Err(Error::InvalidInput(format!("grid {m}^{d} needs {expected} cells, got {}", cells.len())));
        }
        if let Some(x) = cells.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite cell value {x}")));
        }
        Ok(Self { d, m, cells })
    }

    pub fn constant(d: usize, m: usize, value: f64) -> Result<Self> {
        Self::new(d, m, vec![value; m.pow(d as u32)])
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(d: usize, m: usize, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let n = m.pow(d as u32);
        let mut cells = Vec::with_capacity(n);
        let mut x = vec![0.0; d];
        for flat in 0..n {
            let mut rest = flat;
            for a in (0..d).rev() {
                x[a] = ((rest % m) as f64 + 0.5) / m as f64;
                rest /= m;
            }
            cells.push(f(&x));
        }
        Self::new(d, m, cells)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [f64] {
        &mut self.cells
    }

    pub fn inf(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Average over `[0, 1]^d`.
    pub fn mean(&self) -> f64 {
        let mut s = DyadicSum::new();
        self.cells.iter().for_each(|&x| s.add(x));
        to_f64(&(s.value() / int(self.cells.len() as i64)))
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.m + k)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.m;
            flat /= self.m;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.cells[self.flat_index(idx)]
    }

    /// Value of the cell containing `x`; points on the upper face belong to
    /// the last cell.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let idx: Vec<usize> =
            x.iter().map(|&t| ((t * self.m as f64).floor().max(0.0) as usize).min(self.m - 1)).collect();
        self.get(&idx)
    }

    /// Cellwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.d, self.m, self.cells.iter().map(|&x| f(x)).collect())
    }

    /// Cellwise sum of two densities of equal shape.
    pub fn add(&self, other: &GridDensity) -> Result<Self> {
        self.same_shape(other)?;
        Self::new(self.d, self.m, self.cells.iter().zip(&other.cells).map(|(a, b)| a + b).collect())
    }

    pub fn same_shape(&self, other: &GridDensity) -> Result<()> {
        if self.d != other.d {
            return Err(Error::Dimension { expected: self.d, found: other.d });
        }
        if self.m != other.m {
            return Err(Error::InvalidInput(format!("resolution mismatch: {} vs {}", self.m, other.m)));
        }
        Ok(())
    }

    /// Flat indices of the cells covering `cube`, which must be aligned with
    /// the grid.
    pub fn aligned_cells(&self, cube: &Cube) -> Result<Vec<usize>> {
        let ranges = self.aligned_ranges(cube)?;
        let mut out = Vec::new();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(self.flat_index(&idx));
            let mut a = self.d;
            loop {
                if a == 0 {
                    return Ok(out);
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < ranges[a].1 {
                    break;
                }
                idx[a] = ranges[a].0;
            }
        }
    }

    /// Per-axis half-open cell index ranges of an aligned cube.
    pub fn aligned_ranges(&self, cube: &Cube) -> Result<Vec<(usize, usize)>> {
        self.check_cube(cube)?;
        let m = int(self.m as i64);
        (0..self.d)
            .map(|a| {
                let lo = &cube.anchor[a] * &m;
                let hi = cube.upper(a) * &m;
                if !lo.is_integer() || !hi.is_integer() {
                    return Err(Error::Resolution(format!(
                        "cube of side {} is not aligned with a grid of resolution {}",
                        cube.side, self.m
                    )));
                }
                Ok((usize_of(&lo.to_integer()), usize_of(&hi.to_integer())))
            })
            .collect()
    }

    fn check_cube(&self, cube: &Cube) -> Result<()> {
        if cube.dim() != self.d {
            return Err(Error::Dimension { expected: self.d, found: cube.dim() });
        }
        if !cube.in_unit_cube() {
            return Err(Error::InvalidInput("cube leaves the unit cube".into()));
        }
        Ok(())
    }
}

fn usize_of(x: &BigInt) -> usize {
    x.try_into().expect("index fits in usize")
}

/// Exact integral of `rho` over `cube`.
pub fn cube_integral_exact(rho: &GridDensity, cube: &Cube) -> Result<Rational> {
    rho.check_cube(cube)?;
    let d = rho.d;
    let m = int(rho.m as i64);
    let cell = Rational::one() / &m;
    // Per axis: (cell index, overlap length) for every cell meeting the cube.
    let weights: Vec<Vec<(usize, Rational)>> = (0..d)
        .map(|a| {
            let lo = &cube.anchor[a];
            let hi = cube.upper(a);
            let k0 = usize_of(&floor_int(&(lo * &m)));
            let k1 = usize_of(&ceil_int(&(&hi * &m))).min(rho.m);
            (k0..k1)
                .filter_map(|k| {
                    let c0 = int(k as i64) / &m;
                    let c1 = &c0 + &cell;
                    let len = hi.clone().min(c1) - lo.clone().max(c0);
                    len.is_positive().then_some((k, len))
                })
                .collect()
        })
        .collect();

    let last = &weights[d - 1];
    let mut total = Rational::zero();
    let mut outer: Vec<usize> = vec![0; d - 1];
    loop {
        let mut w = Rational::one();
        let mut base = 0usize;
        for (a, &i) in outer.iter().enumerate() {
            w *= &weights[a][i].1;
            base = base * rho.m + weights[a][i].0;
        }
        base *= rho.m;
        // Interior cells of the line share the weight `1/m`.
        let mut full = DyadicSum::new();
        let mut partial = Rational::zero();
        for (k, len) in last {
            let v = rho.cells[base + k];
            if *len == cell {
                full.add(v);
            } else {
                partial += crate::rational::from_f64(v)? * len;
            }
        }
        total += (full.value() * &cell + partial) * w;

        let mut a = d - 1;
        loop {
            if a == 0 {
                return Ok(total);
            }
            a -= 1;
            outer[a] += 1;
            if outer[a] < weights[a].len() {
                break;
            }
            outer[a] = 0;
        }
    }
}

/// Exact average of `rho` over `cube`.
pub fn cell_average_exact(rho: &GridDensity, cube: &Cube) -> Result<Rational> {
    Ok(cube_integral_exact(rho, cube)? / cube.volume())
}

/// Average of `rho` over `cube`, computed exactly and rounded once.
pub fn cell_average(rho: &GridDensity, cube: &Cube) -> Result<f64> {
    Ok(to_f64(&cell_average_exact(rho, cube)?))
}

/// Lebesgue measure of `a ∩ b`.
pub fn cube_intersection_measure(a: &Cube, b: &Cube) -> Rational {
    a.as_box().intersect(&b.as_box()).map_or_else(Rational::zero, |x| x.volume())
}

/// `L(S ∩ ⋃ finer) / L(S)`, exactly.
pub fn overlap_fraction(s: &Cube, finer: &[&TiledFamily]) -> Rational {
    let window = s.as_box();
    let clipped: Vec<BoxR> =
        finer.iter().flat_map(|f| f.cubes.iter()).filter_map(|c| window.intersect(&c.as_box())).collect();
    union_measure(&clipped) / s.volume()
}

/// Measure of the union of `boxes` inside `window`.
pub fn covered_measure(window: &Cube, boxes: &[Cube]) -> Rational {
    let w = window.as_box();
    let clipped: Vec<BoxR> = boxes.iter().filter_map(|c| w.intersect(&c.as_box())).collect();
    union_measure(&clipped)
}

/// Half-open box with rational corners, used for exact union measures.
#[derive(Clone, Debug)]
struct BoxR {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

impl BoxR {
    fn intersect(&self, other: &BoxR) -> Option<BoxR> {
        let lo: Vec<Rational> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.clone().max(b.clone())).collect();
        let hi: Vec<Rational> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.clone().min(b.clone())).collect();
        lo.iter().zip(&hi).all(|(l, h)| l < h).then_some(BoxR { lo, hi })
    }

    fn volume(&self) -> Rational {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// Exact union measure by coordinate compression.
fn union_measure(boxes: &[BoxR]) -> Rational {
    let Some(first) = boxes.first() else {
        return Rational::zero();
    };
    let d = first.lo.len();
    let coords: Vec<Vec<Rational>> = (0..d)
        .map(|a| {
            let mut v: Vec<Rational> = boxes.iter().flat_map(|b| [b.lo[a].clone(), b.hi[a].clone()]).collect();
            v.sort();
            v.dedup();
            v
        })
        .collect();
    let dims: Vec<usize> = coords.iter().map(|c| c.len() - 1).collect();
    let total: usize = dims.iter().product();
    let mut covered = vec![false; total];
    for b in boxes {
        let ranges: Vec<(usize, usize)> = (0..d)
            .map(|a| {
                let i0 = coords[a].binary_search(&b.lo[a]).expect("coordinate present");
                let i1 = coords[a].binary_search(&b.hi[a]).expect("coordinate present");
                (i0, i1)
            })
            .collect();
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        'fill: loop {
            let flat = idx.iter().zip(&dims).fold(0, |acc, (&i, &n)| acc * n + i);
            covered[flat] = true;
            let mut a = d;
            loop {
                if a == 0 {
                    break 'fill;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < ranges[a].1 {
                    break;
                }
                idx[a] = ranges[a].0;
            }
        }
    }
    let mut sum = Rational::zero();
    for (flat, _) in covered.iter().enumerate().filter(|(_, c)| **c) {
        let mut rest = flat;
        let mut vol = Rational::one();
        for a in (0..d).rev() {
            let i = rest % dims[a];
            rest /= dims[a];
            vol *= &coords[a][i + 1] - &coords[a][i];
        }
        sum += vol;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn cube(anchor: &[(i64, i64)], side: (i64, i64)) -> Cube {
        Cube::new(anchor.iter().map(|&(p, q)| rat(p, q)).collect(), rat(side.0, side.1)).unwrap()
    }

    #[test]
    fn anchors_must_sit_on_the_side_lattice() {
        assert!(Cube::new(vec![rat(1, 3), int(0)], rat(1, 2)).is_err());
        assert!(Cube::new(vec![int(0)], int(0)).is_err());
    }

    #[test]
    fn adjacency_is_directional() {
        let a = cube(&[(0, 1), (0, 1)], (1, 2));
        let b = cube(&[(1, 2), (0, 1)], (1, 2));
        assert!(e1_adjacent(&a, &b));
        assert!(!e1_adjacent(&b, &a));
        let c = cube(&[(1, 2), (1, 2)], (1, 2));
        assert!(!e1_adjacent(&a, &c));
    }

    #[test]
    fn average_of_a_half_covered_cell() {
        // Thirds carrying 1, 2, 4; the cube [1/2, 1] sees 2 on length 1/6 and 4 on 1/3.
        let rho = GridDensity::new(1, 3, vec![1.0, 2.0, 4.0]).unwrap();
        let avg = cell_average_exact(&rho, &cube(&[(1, 2)], (1, 2))).unwrap();
        assert_eq!(avg, rat(10, 3));
    }

    #[test]
    fn average_over_misaligned_square() {
        // f(x, y) = x on a 4x4 grid. The cube [1/3, 2/3]^2 meets cells 1 and 2 of the
        // first axis in equal lengths, with centers 3/8 and 5/8.
        let rho = GridDensity::from_fn(2, 4, |x| x[0]).unwrap();
        let avg = cell_average_exact(&rho, &cube(&[(1, 3), (1, 3)], (1, 3))).unwrap();
        assert_eq!(avg, rat(1, 2));
    }

    #[test]
    fn union_measure_counts_overlap_once() {
        let s = cube(&[(0, 1), (0, 1)], (1, 1));
        let a = cube(&[(0, 1), (0, 1)], (1, 2));
        let b = cube(&[(1, 4), (0, 1)], (1, 4));
        assert_eq!(covered_measure(&s, &[a.clone(), b]), rat(1, 4));
        assert_eq!(cube_intersection_measure(&s, &a), rat(1, 4));
    }
}
