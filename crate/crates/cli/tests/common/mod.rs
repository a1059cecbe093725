//! Helpers shared by the CLI integration and acceptance suites.
// Each test target compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::path::Path;

use countyvax::data::ModelFrame;
use countyvax::forest::{train_forest, Forest, ForestConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// y = 0.6 − 0.3·x₀ + 0.4·x₀x₁ + σ·ε with unit weights unless a weight
/// range is given.
pub fn interaction_frame(
    n: usize,
    m: usize,
    seed: u64,
    sigma: f64,
    weight_range: Option<(f64, f64)>,
) -> ModelFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut target = 0.6 - 0.3 * row[0];
        if m > 1 {
            target += 0.4 * row[0] * row[1];
        }
        y.push(target + sigma * gauss(&mut rng));
        w.push(match weight_range {
            Some((lo, hi)) => rng.random_range(lo..hi),
            None => 1.0,
        });
        rows.push(row);
    }
    ModelFrame::new((0..m).map(|j| format!("x{j}")).collect(), rows, y, w, None).unwrap()
}

/// Random records over [0, 1]^m wrapped in a frame whose feature names
/// match the training frames above.
pub fn random_record_frame(n: usize, m: usize, seed: u64) -> ModelFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    ModelFrame::new(
        (0..m).map(|j| format!("x{j}")).collect(),
        rows,
        vec![0.0; n],
        vec![1.0; n],
        None,
    )
    .unwrap()
}

pub fn train(frame: &ModelFrame, n_trees: usize, seed: u64) -> Forest {
    train_forest(
        frame,
        &ForestConfig {
            n_trees,
            min_node_size: 5,
            mtry: None,
            seed,
            max_depth: None,
        },
    )
    .unwrap()
}

/// Write a canonical county CSV with a vaccination rate driven by the
/// Republican share, the Asian share, and noise.
pub fn write_county_csv(path: &Path, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from(
        "fips,name,state,perc_full_vac,perc_food_st,perc_asian,perc_hisp,perc_black,\
         perc_old65,perc_young25,perc_rep,pop_adult,pop_total\n",
    );
    for i in 0..n {
        let rep: f64 = rng.random_range(0.2..0.8);
        let asian: f64 = rng.random_range(0.0..0.3);
        let vac = (0.9 - 0.5 * rep + 0.3 * asian * rep + 0.02 * gauss(&mut rng))
            .clamp(0.01, 0.99);
        let pop = rng.random_range(1_000..900_000);
        text.push_str(&format!(
            "{:05},County {i},XX,{vac},{},{asian},{},{},{},{},{rep},{pop},{}\n",
            1001 + 2 * i,
            rng.random_range(0.0..0.3),
            rng.random_range(0.0..0.3),
            rng.random_range(0.0..0.3),
            rng.random_range(0.05..0.35),
            rng.random_range(0.03..0.2),
            pop + rng.random_range(0..200_000),
        ));
    }
    std::fs::write(path, text).unwrap();
}

pub fn run_bin(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_countyvax"))
        .args(args)
        .output()
        .expect("binary runs")
}
