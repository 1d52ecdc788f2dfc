use lipgrid::dichotomy::{build_nested_families, OffsetRule};
use lipgrid::forge::{adjacent_average_gap_exact, chessboard, linf_chessboard, perturb_density, ChessboardSpec};
use lipgrid::geometry::{cell_average, cell_average_exact, Cube, GridDensity, NestedFamilies, TiledFamily};
use lipgrid::rational::{from_f64, int, rat, Rational};
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn families(r: usize) -> NestedFamilies {
    build_nested_families(2, 3, 2, r, int(1), &OffsetRule::Origin).unwrap()
}

/// A single `e1` row of `k` cubes of side `1/k` along the bottom edge.
fn chain(k: i64) -> TiledFamily {
    let cubes = (0..k).map(|i| Cube::new(vec![rat(i, k), int(0)], rat(1, k)).unwrap()).collect();
    TiledFamily { level: 1, side: rat(1, k), cubes, offsets: vec![] }
}

fn sup_distance(a: &GridDensity, b: &GridDensity) -> Rational {
    a.cells()
        .iter()
        .zip(b.cells())
        .map(|(x, y)| (from_f64(*x).unwrap() - from_f64(*y).unwrap()).abs())
        .max()
        .unwrap_or_else(|| int(0))
}

#[test]
fn single_level_gap_is_sixteen_ninths() {
    for eps in [0.3, 0.9] {
        let fam = families(1);
        let psi = chessboard(&ChessboardSpec::new(fam.clone(), eps), 36).unwrap();
        let level = &fam.levels[0];
        for (i, j) in level.adjacent_pairs() {
            let gap =
                (cell_average(&psi, &level.cubes[j]).unwrap() - cell_average(&psi, &level.cubes[i]).unwrap()).abs();
            assert!((gap - 16.0 * eps / 9.0).abs() < 1e-9, "eps {eps}: gap {gap}");
        }
    }
}

#[test]
fn deeper_levels_keep_the_gap() {
    for r in [2, 3] {
        let fam = families(r);
        for eps in [0.3, 0.9] {
            let psi = chessboard(&ChessboardSpec::new(fam.clone(), eps), 432).unwrap();
            let eps_q = from_f64(eps).unwrap();
            for level in &fam.levels {
                let gap = adjacent_average_gap_exact(&psi, level).unwrap().unwrap();
                assert!(gap >= eps_q, "r {r}, eps {eps}, level {}: gap {gap}", level.level);
            }
            assert!(psi.sup() <= eps && psi.inf() >= -eps);
        }
    }
}

#[test]
fn perturbation_vanishes_off_the_first_level() {
    let fam = families(2);
    let psi = chessboard(&ChessboardSpec::new(fam.clone(), 0.5), 72).unwrap();
    let row = &fam.levels[0];
    for (flat, &v) in psi.cells().iter().enumerate() {
        let idx = psi.multi_index(flat);
        let center: Vec<Rational> = idx.iter().map(|&i| rat(2 * i as i64 + 1, 144)).collect();
        let inside = row.cubes.iter().any(|c| (0..2).all(|a| c.anchor()[a] <= center[a] && center[a] <= c.upper(a)));
        if !inside {
            assert_eq!(v, 0.0, "cell {idx:?}");
        }
    }
}

#[test]
fn perturbing_adds_cellwise() {
    let fam = families(1);
    let psi = chessboard(&ChessboardSpec::new(fam, 0.9), 36).unwrap();
    let phi = GridDensity::from_fn(2, 36, |x| 1.0 + x[0] * x[1]).unwrap();
    let rho = perturb_density(&phi, &psi).unwrap();
    for k in 0..rho.cells().len() {
        assert_eq!(rho.cells()[k], phi.cells()[k] + psi.cells()[k]);
    }
    assert!(perturb_density(&phi, &GridDensity::constant(2, 18, 0.0).unwrap()).is_err());
}

#[test]
fn overlap_above_eta_is_rejected() {
    let mut spec = ChessboardSpec::new(families(2), 0.5);
    spec.eta = rat(1, 100);
    assert!(chessboard(&spec, 72).is_err());
}

#[test]
fn linf_on_zero_density_alternates() {
    let fam = chain(3);
    let rho = GridDensity::constant(2, 6, 0.0).unwrap();
    let psi = linf_chessboard(&fam, &rho, 1.0).unwrap();
    let avgs: Vec<Rational> = fam.cubes.iter().map(|c| cell_average_exact(&psi, c).unwrap()).collect();
    assert_eq!(avgs, vec![int(0), int(1), int(0)]);
}

#[test]
fn linf_leaves_a_lone_cube_alone() {
    let fam = chain(1);
    let rho = GridDensity::from_fn(2, 4, |x| x[0] - x[1]).unwrap();
    assert_eq!(linf_chessboard(&fam, &rho, 0.7).unwrap(), rho);
}

#[test]
fn linf_keeps_existing_gaps() {
    let fam = chain(2);
    let rho = GridDensity::from_fn(2, 4, |x| if x[0] < 0.5 { 0.0 } else { 2.0 }).unwrap();
    assert_eq!(linf_chessboard(&fam, &rho, 1.0).unwrap(), rho);
}

#[test]
fn linf_on_a_random_chain_of_ten() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cells: Vec<f64> = (0..400).map(|_| rng.gen::<f64>()).collect();
    let rho = GridDensity::new(2, 20, cells).unwrap();
    let fam = chain(10);
    let psi = linf_chessboard(&fam, &rho, 0.5).unwrap();
    assert!(sup_distance(&psi, &rho) <= rat(1, 2));
    assert!(adjacent_average_gap_exact(&psi, &fam).unwrap().unwrap() >= rat(1, 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linf_moves_at_most_eps_and_opens_every_gap(
        k in 2i64..8,
        per in 1usize..4,
        eps in 0.05f64..2.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = k as usize * per;
        let rho = GridDensity::from_fn(2, m, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let fam = chain(k);
        let psi = linf_chessboard(&fam, &rho, eps).unwrap();
        let eps_q = from_f64(eps).unwrap();
        prop_assert!(sup_distance(&psi, &rho) <= eps_q);
        prop_assert!(adjacent_average_gap_exact(&psi, &fam).unwrap().unwrap() >= eps_q);
    }
}
