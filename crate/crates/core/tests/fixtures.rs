//! Calibrated constants for the walk and the dense pipeline.

use disclib::coloring::{coloring, random_signs, sparse_coloring};
use disclib::{SeededRng, SetSystemMatrix, SolverConfig};

/// 99th percentile of `‖Av‖_∞ / √(ln m · ln n)` for the walk on random
/// column-normalized instances.
const K_SC: f64 = 1.0;

/// `‖Av‖_∞ ≤ K_DC·√n` for the pipeline on dense `±1` systems.
const K_DC: f64 = 3.0;

fn column_normalized(n: usize, per_column: usize, rng: &mut SeededRng) -> SetSystemMatrix {
    let value = (per_column as f64).sqrt().recip();
    let mut entries = Vec::with_capacity(n * per_column);
    for c in 0..n {
        let mut rows: Vec<usize> = Vec::with_capacity(per_column);
        while rows.len() < per_column {
            let r = rng.below(n);
            if !rows.contains(&r) {
                rows.push(r);
            }
        }
        entries.extend(rows.into_iter().map(|r| (r, c, value * rng.sign())));
    }
    SetSystemMatrix::from_entries(&entries, n, n).unwrap()
}

#[test]
fn walk_percentile_on_column_normalized_instances() {
    let n = 4096;
    let cfg = SolverConfig::default();
    let mut discs = Vec::new();
    for seed in 0..100 {
        let mut rng = SeededRng::new(seed);
        let a = column_normalized(n, 8, &mut rng);
        let walk = sparse_coloring(&a, &cfg, &mut rng).unwrap();
        discs.push(a.discrepancy(&walk.signs).unwrap());
    }
    discs.sort_by(f64::total_cmp);
    let p99 = discs[98] / (n as f64).ln();
    println!("p99 / √(ln m·ln n) = {p99:.3}");
    assert!(p99 <= K_SC, "{p99}");
}

#[test]
fn dense_sign_matrix_beats_random() {
    let n = 128;
    let root = (n as f64).sqrt();
    // Full-density rows need a wider Γ than the desk value to fix enough
    // coordinates per phase.
    let cfg = SolverConfig {
        c0: 1.0,
        ..SolverConfig::desk()
    };
    let (mut pipe, mut base) = (Vec::new(), Vec::new());
    for seed in 0..50 {
        let mut rng = SeededRng::new(seed);
        let entries: Vec<_> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, rng.sign()))
            .collect();
        let a = SetSystemMatrix::from_entries(&entries, n, n).unwrap();
        let run = coloring(&a, &cfg.clone().with_seed(seed), &mut rng).unwrap();
        assert!(run.v.iter().all(|x| x.abs() == 1.0));
        pipe.push(run.discrepancy);
        base.push(a.discrepancy(&random_signs(n, &mut SeededRng::new(seed ^ 0xBA5E))).unwrap());
    }
    pipe.sort_by(f64::total_cmp);
    base.sort_by(f64::total_cmp);
    let typical = (2.0 * n as f64 * (2.0 * n as f64).ln()).sqrt();
    println!(
        "max {:.3}√n, median {:.3}√n, random median {:.3}√n, √(2n ln 2m) = {:.3}√n",
        pipe[49] / root,
        pipe[25] / root,
        base[25] / root,
        typical / root
    );
    assert!(pipe[49] <= K_DC * root);
    assert!(pipe[25] < base[25]);
    assert!(pipe[49] < typical);
}
