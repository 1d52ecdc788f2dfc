use lipgrid::geometry::{
    cell_average_exact, covered_measure, cube_integral_exact, cube_intersection_measure, e1_adjacent, Cube, GridDensity,
};
use lipgrid::rational::{from_f64, int, rat, Rational};
use proptest::prelude::*;

fn cube(anchor: &[i64], side: i64, den: i64) -> Cube {
    Cube::new(anchor.iter().map(|&a| rat(a * side, den)).collect(), rat(side, den)).unwrap()
}

#[test]
fn cube_basics() {
    let c = cube(&[1, 2], 1, 4);
    assert_eq!(c.volume(), rat(1, 16));
    assert_eq!(c.upper(1), rat(3, 4));
    assert!(c.in_unit_cube());
    assert!(e1_adjacent(&c, &c.shift_e1(1)));
    assert!(!e1_adjacent(&c.shift_e1(1), &c));
    assert!(Cube::new(vec![rat(1, 8), int(0)], rat(1, 4)).is_err());
}

#[test]
fn average_over_cells_cut_by_the_cube() {
    // 3 x 3 grid with values 1..9; [0, 1/2]^2 holds cell 1 fully, cells 2 and 4
    // by half and cell 5 by a quarter: (4 + 4 + 8 + 5) / 36 over area 1/4.
    let rho = GridDensity::new(2, 3, (1..=9).map(f64::from).collect()).unwrap();
    let c = Cube::new(vec![int(0), int(0)], rat(1, 2)).unwrap();
    assert_eq!(cell_average_exact(&rho, &c).unwrap(), rat(7, 3));
    assert!(Cube::new(vec![rat(1, 4), rat(1, 4)], rat(1, 2)).is_err());
}

#[test]
fn density_indexing_is_row_major() {
    let rho = GridDensity::from_fn(2, 4, |x| 10.0 * x[0] + x[1]).unwrap();
    assert_eq!(rho.flat_index(&[1, 3]), 7);
    assert_eq!(rho.multi_index(7), vec![1, 3]);
    assert_eq!(rho.get(&[1, 3]), 10.0 * 0.375 + 0.875);
    assert_eq!(rho.value_at(&[0.3, 0.9]), rho.get(&[1, 3]));
    assert!(GridDensity::new(2, 3, vec![0.0; 8]).is_err());
}

/// Membership of the `1/den` cell `(i, j)` in a box, for the counting oracle.
fn covers(b: &Cube, i: i64, j: i64, den: i64) -> bool {
    let lo = rat(i, den);
    let lo2 = rat(j, den);
    b.anchor()[0] <= lo && rat(i + 1, den) <= b.upper(0) && b.anchor()[1] <= lo2 && rat(j + 1, den) <= b.upper(1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_measure_matches_cell_counting(
        boxes in prop::collection::vec((0i64..8, 0i64..8, 1i64..4), 1..6),
        window in (0i64..4, 0i64..4, 1i64..5),
    ) {
        // Anchors on the side lattice: anchor = k * side, all in units of 1/16.
        let den = 16;
        let bs: Vec<Cube> = boxes.iter().map(|&(x, y, s)| cube(&[x, y], s, den)).collect();
        let w = cube(&[window.0, window.1], window.2, den);
        let mut count = 0;
        for i in 0..64 {
            for j in 0..64 {
                if covers(&w, i, j, den) && bs.iter().any(|b| covers(b, i, j, den)) {
                    count += 1;
                }
            }
        }
        prop_assert_eq!(covered_measure(&w, &bs), rat(count, den * den));
    }

    #[test]
    fn intersection_is_symmetric_and_bounded(a in (0i64..6, 0i64..6, 1i64..4), b in (0i64..6, 0i64..6, 1i64..4)) {
        let (ca, cb) = (cube(&[a.0, a.1], a.2, 12), cube(&[b.0, b.1], b.2, 12));
        let ab = cube_intersection_measure(&ca, &cb);
        prop_assert_eq!(ab.clone(), cube_intersection_measure(&cb, &ca));
        prop_assert!(ab <= ca.volume().min(cb.volume()));
        prop_assert_eq!(cube_intersection_measure(&ca, &ca), ca.volume());
    }

    #[test]
    fn integral_adds_up_cell_pieces(cells in prop::collection::vec(-4.0f64..4.0, 36), a in (0i64..5, 0i64..5), side in 1i64..4) {
        let rho = GridDensity::new(2, 6, cells.clone()).unwrap();
        let k = 12;
        let c = Cube::new(vec![rat(a.0 * side, k), rat(a.1 * side, k)], rat(side, k)).unwrap();
        prop_assume!(c.in_unit_cube());
        // Oracle: each density cell is itself a cube; weight its value by the overlap.
        let mut total = Rational::from_integer(0.into());
        for (flat, v) in cells.iter().enumerate() {
            let cell = Cube::new(vec![rat((flat / 6) as i64, 6), rat((flat % 6) as i64, 6)], rat(1, 6)).unwrap();
            total += from_f64(*v).unwrap() * cube_intersection_measure(&cell, &c);
        }
        prop_assert_eq!(cube_integral_exact(&rho, &c).unwrap(), total);
    }
}
