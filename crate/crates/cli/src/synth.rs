//! Synthetic tabular data for the bench command: uniform features, a
//! nonlinear target with an interaction term, and spread-out weights.

use countyvax::data::ModelFrame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// y = 0.6 − 0.3·x₀ + 0.4·x₀x₁ (+ 0.05·x₂ when present) + σ·ε, features
/// uniform on [0, 1], weights uniform on [1, 100000].
pub fn interaction_frame(n: usize, m: usize, seed: u64, sigma: f64) -> ModelFrame {
    assert!(m >= 1);
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
        if m > 2 {
            target += 0.05 * row[2];
        }
        y.push(target + sigma * gauss(&mut rng));
        w.push(rng.random_range(1.0..100_000.0));
        rows.push(row);
    }
    let names = (0..m).map(|j| format!("x{j}")).collect();
    ModelFrame::new(names, rows, y, w, None).expect("finite synthetic data")
}
