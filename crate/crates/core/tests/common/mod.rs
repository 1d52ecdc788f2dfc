//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `k` distinct integer points of `[0, side]^2`, chosen by `seed`.
pub fn random_lattice_subset(seed: u64, k: usize, side: i64) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = (0..=side).flat_map(|x| (0..=side).map(move |y| vec![x as f64, y as f64])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.shuffle(&mut rng);
    all.truncate(k);
    all
}

/// Minimum over all bijections onto `[n]^2` of the largest stretch, by
/// enumerating every permutation (Heap's algorithm). Stretches are compared
/// as exact fractions of squared integer lengths.
pub fn brute_force_bottleneck(points: &[Vec<f64>], n: i64) -> f64 {
    let pts: Vec<(i64, i64)> = points.iter().map(|p| (p[0] as i64, p[1] as i64)).collect();
    let grid: Vec<(i64, i64)> = (1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))).collect();
    let size = pts.len();
    assert_eq!(size, grid.len());
    let sq = |a: (i64, i64), b: (i64, i64)| ((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as u128;
    let src: Vec<Vec<u128>> = (0..size).map(|i| (0..size).map(|j| sq(pts[i], pts[j])).collect()).collect();
    let dst: Vec<Vec<u128>> = (0..size).map(|i| (0..size).map(|j| sq(grid[i], grid[j])).collect()).collect();

    // Worst stretch of a full assignment as a fraction (num, den).
    let worst = |perm: &[usize]| -> (u128, u128) {
        let mut best = (0u128, 1u128);
        for i in 0..size {
            for j in i + 1..size {
                let (num, den) = (dst[perm[i]][perm[j]], src[i][j]);
                if num * best.1 > best.0 * den {
                    best = (num, den);
                }
            }
        }
        best
    };
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = worst(&perm);
    let mut c = vec![0usize; size];
    let mut i = 0;
    while i < size {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let w = worst(&perm);
            if w.0 * best.1 < best.0 * w.1 {
                best = w;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    (best.0 as f64 / best.1 as f64).sqrt()
}

/// Smallest pairwise distance by checking every pair.
pub fn brute_min_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Winding number around `y` of the closed polygon `f(∂R)`, where `f` is
/// sampled on a `counts[0] x counts[1]` vertex grid (last axis fastest) and
/// `R` is the whole grid. Angles are accumulated edge by edge.
pub fn winding_degree(outputs: &[Vec<f64>], counts: [usize; 2], y: [f64; 2]) -> i64 {
    let (nx, ny) = (counts[0], counts[1]);
    let at = |i: usize, j: usize| &outputs[i * ny + j];
    let mut ring = Vec::new();
    for i in 0..nx {
        ring.push(at(i, 0));
    }
    for j in 1..ny {
        ring.push(at(nx - 1, j));
    }
    for i in (0..nx - 1).rev() {
        ring.push(at(i, ny - 1));
    }
    for j in (1..ny - 1).rev() {
        ring.push(at(0, j));
    }
    let mut total = 0.0f64;
    for k in 0..ring.len() {
        let a = ring[k];
        let b = ring[(k + 1) % ring.len()];
        let (ax, ay) = (a[0] - y[0], a[1] - y[1]);
        let (bx, by) = (b[0] - y[0], b[1] - y[1]);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    (total / std::f64::consts::TAU).round() as i64
}
