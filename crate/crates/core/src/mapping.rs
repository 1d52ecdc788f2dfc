//! Maps given by samples on a regular grid or a simplicial mesh, read as the
//! piecewise-affine interpolant over a triangulation.

use crate::error::{Error, Result};

/// Regular grid of sample points; `counts[a]` points along axis `a`,
/// endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || upper.len() != d || counts.len() != d {
            return Err(Error::InvalidInput("grid bounds and counts disagree in length".into()));
        }
        if counts.iter().any(|&n| n < 2) {
            return Err(Error::InvalidInput("grid needs at least two samples per axis".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidInput("grid has an empty axis".into()));
        }
        Ok(Self { lower, upper, counts })
    }

    /// `[0, 1]^d` with `cells` cells per axis.
    pub fn unit(d: usize, cells: usize) -> Result<Self> {
        Self::new(vec![0.0; d], vec![1.0; d], vec![cells + 1; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.counts[a];
            flat /= self.counts[a];
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| {
                if idx[a] + 1 == self.counts[a] {
                    self.upper[a]
                } else {
                    self.lower[a] + idx[a] as f64 * self.spacing(a)
                }
            })
            .collect()
    }

    /// Multi-indices of the lower corners of all grid cells.
    pub fn cell_corners(&self) -> Vec<Vec<usize>> {
        let cells: Vec<usize> = self.counts.iter().map(|n| n - 1).collect();
        let total: usize = cells.iter().product();
        (0..total)
            .map(|mut flat| {
                let mut idx = vec![0; self.dim()];
                for a in (0..self.dim()).rev() {
                    idx[a] = flat % cells[a];
                    flat /= cells[a];
                }
                idx
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Grid(GridSpec),
    Mesh { vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>> },
}

/// A map `R^d -> R^k` known at the vertices of a grid or mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMap {
    domain: Domain,
    outputs: Vec<Vec<f64>>,
}

/// One affine piece: domain simplex and the images of its vertices.
#[derive(Clone, Debug)]
pub struct AffinePiece {
    pub vertices: Vec<Vec<f64>>,
    pub images: Vec<Vec<f64>>,
}

impl SampledMap {
    pub fn on_grid(spec: GridSpec, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let outputs = (0..spec.len()).map(|i| f(&spec.point(&spec.unflat(i)))).collect();
        Self::new(Domain::Grid(spec), outputs)
    }

    pub fn new(domain: Domain, outputs: Vec<Vec<f64>>) -> Result<Self> {
        let n = match &domain {
            Domain::Grid(g) => g.len(),
            Domain::Mesh { vertices, simplices } => {
                let d = vertices.first().map_or(0, Vec::len);
                if d == 0 || vertices.iter().any(|v| v.len() != d) {
                    return Err(Error::InvalidInput("mesh vertices have mixed dimension".into()));
                }
                for s in simplices {
                    if s.len() != d + 1 || s.iter().any(|&i| i >= vertices.len()) {
                        return Err(Error::InvalidInput(format!("bad simplex {s:?}")));
                    }
                }
                vertices.len()
            }
        };
        if outputs.len() != n {
            return Err(Error::InvalidInput(format!("{} outputs for {n} sample points", outputs.len())));
        }
        let k = outputs.first().map_or(0, Vec::len);
        if k == 0 || outputs.iter().any(|o| o.len() != k) {
            return Err(Error::InvalidInput("outputs have mixed dimension".into()));
        }
        if outputs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite output".into()));
        }
        Ok(Self { domain, outputs })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        match &self.domain {
            Domain::Grid(g) => Some(g),
            Domain::Mesh { .. } => None,
        }
    }

    pub fn in_dim(&self) -> usize {
        match &self.domain {
            Domain::Grid(g) => g.dim(),
            Domain::Mesh { vertices, .. } => vertices[0].len(),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.outputs[0].len()
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn position(&self, i: usize) -> Vec<f64> {
        match &self.domain {
            Domain::Grid(g) => g.point(&g.unflat(i)),
            Domain::Mesh { vertices, .. } => vertices[i].clone(),
        }
    }

    pub fn output(&self, i: usize) -> &[f64] {
        &self.outputs[i]
    }

    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.outputs
    }

    /// Simplices as vertex index lists; grids use the Kuhn triangulation of
    /// each cell.
    pub fn simplices(&self) -> Vec<Vec<usize>> {
        match &self.domain {
            Domain::Mesh { simplices, .. } => simplices.clone(),
            Domain::Grid(g) => {
                let d = g.dim();
                let perms = permutations(d);
                let mut out = Vec::with_capacity(g.cell_corners().len() * perms.len());
                for base in g.cell_corners() {
                    for p in &perms {
                        let mut idx = base.clone();
                        let mut s = vec![g.flat(&idx)];
                        for &axis in p {
                            idx[axis] += 1;
                            s.push(g.flat(&idx));
                        }
                        out.push(s);
                    }
                }
                out
            }
        }
    }

    pub fn pieces(&self) -> Vec<AffinePiece> {
        self.simplices()
            .into_iter()
            .map(|s| AffinePiece {
                vertices: s.iter().map(|&i| self.position(i)).collect(),
                images: s.iter().map(|&i| self.outputs[i].clone()).collect(),
            })
            .collect()
    }

    /// The same piecewise-affine map on an explicit mesh.
    pub fn to_mesh(&self) -> SampledMap {
        let vertices = (0..self.len()).map(|i| self.position(i)).collect();
        SampledMap { domain: Domain::Mesh { vertices, simplices: self.simplices() }, outputs: self.outputs.clone() }
    }

    /// Splits every simplex at its barycenter. The interpolant is unchanged.
    pub fn refine(&self) -> SampledMap {
        let mesh = self.to_mesh();
        let Domain::Mesh { mut vertices, simplices } = mesh.domain else { unreachable!() };
        let mut outputs = mesh.outputs;
        let mut refined = Vec::with_capacity(simplices.len() * (self.in_dim() + 1));
        for s in simplices {
            let k = s.len() as f64;
            let center = mean(s.iter().map(|&i| vertices[i].as_slice()), k);
            let image = mean(s.iter().map(|&i| outputs[i].as_slice()), k);
            let c = vertices.len();
            vertices.push(center);
            outputs.push(image);
            for skip in 0..s.len() {
                let mut t: Vec<usize> = s.clone();
                t[skip] = c;
                refined.push(t);
            }
        }
        SampledMap { domain: Domain::Mesh { vertices, simplices: refined }, outputs }
    }

    /// For grid maps: `(cell center, image of the center, cell volume)` per cell.
    /// The image of the center is the mean of the corner images.
    pub fn cell_images(&self) -> Result<Vec<(Vec<f64>, Vec<f64>, f64)>> {
        let g = self.grid().ok_or_else(|| Error::InvalidInput("cell images need a grid-sampled map".into()))?;
        let d = g.dim();
        let vol: f64 = (0..d).map(|a| g.spacing(a)).product();
        let corners = 1usize << d;
        Ok(g.cell_corners()
            .into_iter()
            .map(|base| {
                let lo = g.point(&base);
                let center: Vec<f64> = (0..d).map(|a| lo[a] + 0.5 * g.spacing(a)).collect();
                let mut image = vec![0.0; self.out_dim()];
                for mask in 0..corners {
                    let idx: Vec<usize> = (0..d).map(|a| base[a] + ((mask >> a) & 1)).collect();
                    for (acc, x) in image.iter_mut().zip(&self.outputs[g.flat(&idx)]) {
                        *acc += x;
                    }
                }
                image.iter_mut().for_each(|x| *x /= corners as f64);
                (center, image, vol)
            })
            .collect())
    }
}

fn mean<'a>(points: impl Iterator<Item = &'a [f64]>, k: f64) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    for p in points {
        if acc.is_empty() {
            acc = vec![0.0; p.len()];
        }
        acc.iter_mut().zip(p).for_each(|(a, x)| *a += x);
    }
    acc.iter_mut().for_each(|a| *a /= k);
    acc
}

/// All permutations of `0..d` in lexicographic order.
pub fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut sign = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).expect("non-empty");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            sign = -sign;
        }
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    sign * (0..n).map(|i| a[i][i]).product::<f64>()
}

/// Solves `a x = b`; `None` when `a` is numerically singular.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Euclidean distance.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
