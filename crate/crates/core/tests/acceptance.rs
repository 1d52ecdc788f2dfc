//! End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
//! if any criterion fails or exceeds its time budget.

mod common;

use std::time::{Duration, Instant};

use lipgrid::assign::{
    counting_lower_bound, grid_point, mcshane_extend, pushforward_check, solve_exact, solve_heuristic, Schedule,
};
use lipgrid::dichotomy::{build_nested_families, min_resolution, OffsetRule};
use lipgrid::encoder::{discrete_measure_deviation, encode_stage, normalize_density, plan_stage};
use lipgrid::experiment::{run_pipeline, ExperimentConfig};
use lipgrid::forge::{adjacent_average_gap_exact, chessboard, linf_chessboard, ChessboardSpec};
use lipgrid::geometry::{cell_average, overlap_fraction, Cube, GridDensity, TiledFamily};
use lipgrid::mapping::{Domain, GridSpec, SampledMap};
use lipgrid::rational::{from_f64, int, rat, to_f64};
use lipgrid::regularity::{
    covering_regularity, dyadic_probes, iterated_fold, preimage_count_1d, topological_degree, FatCantorSpec, Region,
};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn nested_family_exactness() -> Outcome {
    let eta = rat(1, 9);
    let n = min_resolution(2, 2, &eta).map_err(err)?;
    ensure(n == 21, || format!("min_resolution gave {n}"))?;
    let fam = build_nested_families(2, n as usize, 2, 3, int(1), &OffsetRule::Origin).map_err(err)?;
    fam.check_nesting().map_err(err)?;
    let mut worst = int(0);
    for i in 0..2 {
        let finer: Vec<&TiledFamily> = fam.levels[i + 1..].iter().collect();
        for cube in &fam.levels[i].cubes {
            worst = worst.max(overlap_fraction(cube, &finer));
        }
    }
    ensure(worst <= eta, || format!("overlap {worst} exceeds 1/9"))?;
    Ok(format!("N = {n}, worst overlap {worst} <= 1/9"))
}

fn chessboard_gap() -> Outcome {
    let mut min_ratio = f64::INFINITY;
    for r in 1..=3 {
        let fam = build_nested_families(2, 3, 2, r, int(1), &OffsetRule::Origin).map_err(err)?;
        for eps in [0.3, 0.9] {
            let psi = chessboard(&ChessboardSpec::new(fam.clone(), eps), 432).map_err(err)?;
            let eps_q = from_f64(eps).map_err(err)?;
            for level in &fam.levels {
                let gap = adjacent_average_gap_exact(&psi, level).map_err(err)?.ok_or("no adjacent pairs")?;
                ensure(gap >= eps_q, || format!("r {r} eps {eps} level {}: gap {gap}", level.level))?;
                min_ratio = min_ratio.min(to_f64(&gap) / eps);
            }
            if r == 1 {
                let level = &fam.levels[0];
                for (i, j) in level.adjacent_pairs() {
                    let a = cell_average(&psi, &level.cubes[i]).map_err(err)?;
                    let b = cell_average(&psi, &level.cubes[j]).map_err(err)?;
                    let gap = (b - a).abs();
                    ensure((gap - 16.0 * eps / 9.0).abs() <= 1e-9, || format!("single level gap {gap}"))?;
                }
            }
        }
    }
    Ok(format!("all gaps >= eps (smallest gap / eps = {min_ratio:.4}), single level 16 eps / 9"))
}

fn linf_chessboard_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = GridDensity::from_fn(2, 20, |_| rng.gen::<f64>()).map_err(err)?;
    let cubes = (0..10).map(|i| Cube::new(vec![rat(i, 10), int(0)], rat(1, 10)).unwrap()).collect();
    let fam = TiledFamily { level: 1, side: rat(1, 10), cubes, offsets: vec![] };
    let psi = linf_chessboard(&fam, &rho, 0.5).map_err(err)?;
    let half = rat(1, 2);
    let moved = psi
        .cells()
        .iter()
        .zip(rho.cells())
        .map(|(a, b)| (from_f64(*a).unwrap() - from_f64(*b).unwrap()).abs())
        .max()
        .unwrap_or_else(|| int(0));
    ensure(moved <= half, || format!("moved {moved}"))?;
    let gap = adjacent_average_gap_exact(&psi, &fam).map_err(err)?.ok_or("no pairs")?;
    ensure(gap >= half, || format!("gap {gap}"))?;
    Ok(format!("max move {}, min gap {:.6}", to_f64(&moved), to_f64(&gap)))
}

fn encoder_power_and_separation() -> Outcome {
    let unit = normalize_density(&GridDensity::constant(2, 4, 1.0).map_err(err)?).map_err(err)?;
    let plan = plan_stage(&unit, 2, 1.0, Some(4.0)).map_err(err)?;
    let set = encode_stage(&plan).map_err(err)?;
    let sep = common::brute_min_distance(&set.points);
    ensure(set.points.len() == 16 && set.r == 0.25 && sep > 0.25, || {
        format!("{} points, r {}, min distance {sep}", set.points.len(), set.r)
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let rho =
        normalize_density(&GridDensity::from_fn(2, 16, |_| rng.gen_range(0.5..2.0)).map_err(err)?).map_err(err)?;
    let r = 1.0 / (4.0 * rho.sup().sqrt());
    let mut sizes = Vec::new();
    for m in [4, 8, 16] {
        let set = encode_stage(&plan_stage(&rho, m, 0.5, None).map_err(err)?).map_err(err)?;
        let k = set.points.len() as u64;
        ensure(k == set.n * set.n, || format!("m {m}: {k} points"))?;
        let sep = common::brute_min_distance(&set.points);
        ensure(set.r == r && sep > r, || format!("m {m}: min distance {sep} vs r {r}"))?;
        sizes.push(format!("{}^2", set.n));
    }
    Ok(format!("16 points at distance > 1/4; random density stages {}", sizes.join(", ")))
}

fn measure_convergence() -> Outcome {
    let ramp = GridDensity::from_fn(2, 64, |x| 1.0 + x[0] + x[1] + x[0] * x[1]).map_err(err)?;
    let rho = normalize_density(&ramp).map_err(err)?;
    let mut devs = Vec::new();
    for m in [4, 8, 16] {
        let plan = plan_stage(&rho, m, 0.5, None).map_err(err)?;
        let dev = discrete_measure_deviation(&plan, &encode_stage(&plan).map_err(err)?).map_err(err)?;
        let worst = dev.per_cell.iter().copied().fold(0.0, f64::max);
        ensure(worst <= dev.bound * (1.0 + 1e-12), || format!("m {m}: {worst} above bound {}", dev.bound))?;
        devs.push(dev.max);
    }
    ensure(devs[0] > devs[1] && devs[1] > devs[2], || format!("deviations {devs:?}"))?;
    Ok(format!("deviations {:.3e} > {:.3e} > {:.3e}", devs[0], devs[1], devs[2]))
}

fn solver_oracle() -> Outcome {
    let schedule = Schedule { proposals: Some(5_000), restarts: 2, ..Schedule::default() };
    for seed in 0..50 {
        let pts = common::random_lattice_subset(1000 + seed, 9, 6);
        let exact = solve_exact(&pts, 3, 50_000_000).map_err(err)?.exact.ok_or("budget exhausted")?;
        let brute = common::brute_force_bottleneck(&pts, 3);
        ensure(exact == brute, || format!("seed {seed}: exact {exact} vs enumeration {brute}"))?;
        let lower = counting_lower_bound(&pts, 2);
        let upper = solve_heuristic(&pts, 3, seed, &schedule).map_err(err)?.upper;
        ensure(lower <= exact * (1.0 + 1e-12) && exact <= upper, || {
            format!("seed {seed}: {lower} <= {exact} <= {upper} fails")
        })?;
    }
    let grid: Vec<Vec<f64>> = (0..9).map(|g| grid_point(g, 3, 2).iter().map(|&x| x as f64).collect()).collect();
    let own = solve_exact(&grid, 3, 1_000_000).map_err(err)?.exact;
    ensure(own == Some(1.0), || format!("[3]^2 gives {own:?}"))?;
    Ok("50 subsets match enumeration, bounds ordered, [3]^2 gives 1".into())
}

fn growth_evidence() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "density": {
            "kind": "chessboard",
            "resolution": 72,
            "spec": {
                "eps": 0.9,
                "eta": "1/9",
                "taper": "1/16",
                "families": serde_json::to_value(lipgrid::io::FamiliesFile::from(
                    &build_nested_families(2, 3, 2, 2, int(1), &OffsetRule::Origin).map_err(err)?,
                )).map_err(err)?,
            },
        },
        "p": 0.5,
        "m_sequence": [4, 8, 16],
        "seed": 1,
        "proposals": 2000,
        "restarts": 1,
        "output_dir": dir.path(),
    }))
    .map_err(err)?;
    let report = run_pipeline(&config).map_err(err)?;
    let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.line()).collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    let lows: Vec<f64> = report.rows.iter().map(|r| r.lower).collect();
    for row in &report.rows {
        ensure(row.lower <= row.upper, || format!("n {}: lower above upper", row.n))?;
    }
    let monotone = lows.windows(2).all(|w| w[0] <= w[1]);
    let strict = lows.windows(2).any(|w| w[0] < w[1]);
    ensure(monotone && strict, || format!("counting bounds {lows:?}"))?;
    Ok(format!("counting lower bounds {:.4}, {:.4}, {:.4} rise", lows[0], lows[1], lows[2]))
}

fn fold_regularity() -> Outcome {
    let spec = FatCantorSpec::new(0.1).map_err(err)?;
    let it = iterated_fold(&spec, 6).map_err(err)?;
    ensure(it.map.lipschitz() <= int(1), || format!("Lipschitz {}", it.map.lipschitz()))?;
    let dist = it.map.distance_to_identity();
    ensure(dist <= spec.eps, || format!("distance to identity {dist}"))?;
    let mut triple = None;
    for step in &it.steps {
        let x = &step.a + &step.c / int(2);
        let y = it.map.eval(&x).map_err(err)?;
        if preimage_count_1d(&it.map, &y).ok() == Some(3) {
            triple = Some(y);
            break;
        }
    }
    let y = triple.ok_or("no point with three preimages")?;
    let (lo, hi) = it.map.image();
    let probes = dyadic_probes(&lo, &hi, &[2, 4, 6, 8]);
    let reg = covering_regularity(&it.map, &probes, 10).map_err(err)?;
    ensure(reg <= 3, || format!("covering regularity {reg}"))?;
    Ok(format!(
        "1-Lipschitz, |f - id| = {:.6}, three preimages of {:.6}, regularity <= {reg} over {} probes",
        to_f64(&dist),
        to_f64(&y),
        probes.len()
    ))
}

fn degree() -> Outcome {
    let square = Region { lower: vec![0.0, 0.0], upper: vec![1.0, 1.0] };
    let id = SampledMap::on_grid(GridSpec::unit(2, 6).map_err(err)?, |x| x.to_vec()).map_err(err)?;
    let refl = SampledMap::on_grid(GridSpec::unit(2, 6).map_err(err)?, |x| vec![x[1], x[0]]).map_err(err)?;
    let y = [0.37, 0.52];
    let (di, dr) =
        (topological_degree(&id, &square, &y).map_err(err)?, topological_degree(&refl, &square, &y).map_err(err)?);
    ensure(di == 1 && dr == -1, || format!("identity {di}, reflection {dr}"))?;
    let spec = GridSpec::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![8, 8]).map_err(err)?;
    let fold = SampledMap::on_grid(spec, |x| vec![x[0].abs(), x[1]]).map_err(err)?;
    let box2 = Region { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] };
    let df = topological_degree(&fold, &box2, &[0.5, 0.0]).map_err(err)?;
    ensure(df == 0, || format!("fold {df}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut agreed, mut skipped) = (0, 0);
    while agreed < 20 {
        let outputs: Vec<Vec<f64>> = (0..25).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let map = SampledMap::new(Domain::Grid(GridSpec::unit(2, 4).map_err(err)?), outputs.clone()).map_err(err)?;
        let y = [rng.gen::<f64>(), rng.gen::<f64>()];
        match topological_degree(&map, &square, &y) {
            Ok(deg) => {
                let oracle = common::winding_degree(&outputs, [5, 5], y);
                ensure(deg == oracle, || format!("degree {deg} vs winding {oracle}"))?;
                agreed += 1;
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(format!("1, -1, 0 and 20 random maps agree with winding numbers ({skipped} ambiguous draws skipped)"))
}

fn mcshane_and_pushforward() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let lip = 1.5;
    let f = |x: &[f64]| vec![lip * (x[0] - 0.4).abs().min(0.3), lip * (x[0] * 0.6 + x[1] * 0.8).sin()];
    let pts: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let vals: Vec<Vec<f64>> = pts.iter().map(|p| f(p)).collect();
    let back = mcshane_extend(&pts, &vals, lip, &pts).map_err(err)?;
    ensure(back == vals, || "extension changes sample values".into())?;
    let queries: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let ext = mcshane_extend(&pts, &vals, lip, &queries).map_err(err)?;
    let all_x: Vec<&Vec<f64>> = pts.iter().chain(&queries).collect();
    let all_y: Vec<&Vec<f64>> = vals.iter().chain(&ext).collect();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt();
    let cap = 2f64.sqrt() * lip * (1.0 + 1e-12);
    for i in 0..all_x.len() {
        for j in i + 1..all_x.len() {
            let (dx, dy) = (dist(all_x[i], all_x[j]), dist(all_y[i], all_y[j]));
            ensure(dy <= cap * dx, || format!("pair ({i}, {j}) stretched by {}", dy / dx))?;
        }
    }

    // Fold onto the left half; the density is psi on the left and 1 - psi of
    // the mirror point on the right, with psi = 1/2 on the crease.
    let psi = |x: &[f64]| 0.5 + 0.3 * (0.5 - x[0]) * (1.0 + x[1]);
    let boxes: Vec<Cube> = (0..6).map(|k| Cube::new(vec![rat(k / 3, 3), rat(k % 3, 3)], rat(1, 3)).unwrap()).collect();
    let deviation = |k: usize| -> Result<f64, String> {
        let map = SampledMap::on_grid(GridSpec::unit(2, k).map_err(err)?, |x| vec![x[0].min(1.0 - x[0]), x[1]])
            .map_err(err)?;
        let rho = GridDensity::from_fn(2, k, |x| if x[0] <= 0.5 { psi(x) } else { 1.0 - psi(&[1.0 - x[0], x[1]]) })
            .map_err(err)?;
        pushforward_check(&map, &rho, &boxes).map_err(err)
    };
    let (coarse, fine) = (deviation(64)?, deviation(128)?);
    let ratio = coarse / fine;
    ensure((1.6..=2.4).contains(&ratio), || format!("deviation {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3}"))?;
    Ok(format!("samples reproduced, audit at sqrt(2) L passes; pushforward deviation {coarse:.3e} -> {fine:.3e} (ratio {ratio:.3})"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 nested-family exactness", Duration::from_secs(5), nested_family_exactness),
        ("2 chessboard gap", Duration::from_secs(10), chessboard_gap),
        ("3 L-infinity chessboard", Duration::from_secs(1), linf_chessboard_chain),
        ("4 encoder power and separation", Duration::from_secs(10), encoder_power_and_separation),
        ("5 measure convergence", Duration::from_secs(30), measure_convergence),
        ("6 solver oracle", Duration::from_secs(60), solver_oracle),
        ("7 growth evidence", Duration::from_secs(120), growth_evidence),
        ("8 fold regularity", Duration::from_secs(10), fold_regularity),
        ("9 degree", Duration::from_secs(10), degree),
        ("10 McShane and pushforward", Duration::from_secs(60), mcshane_and_pushforward),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.2?}, budget {budget:?}")),
            Err(e) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!("{} criterion {name}: {detail} [{took:.2?}]", if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
