//! Seeded market and payoff fixtures for the benchmarks.

use hansen_core::linalg::Matrix;
use hansen_core::{gram_from_scenarios, gram_from_universe, AssetUniverse, GramMarket, ScenarioPayoff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn probabilities(rng: &mut impl Rng, states: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..states).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

/// `n` assets with covariance `AAᵀ/n + 0.05·I` scaled to a few percent.
pub fn universe_market(seed: u64, n: usize) -> GramMarket {
    let mut rng = rng(seed);
    let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sigma = Matrix::from_fn(n, |i, j| {
        let aat: f64 = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>() / n as f64;
        0.02 * (aat + if i == j { 0.05 } else { 0.0 })
    });
    let mu = (0..n).map(|_| rng.random_range(1.0..1.3)).collect();
    gram_from_universe(&AssetUniverse::new(mu, sigma).expect("fixture covariance is positive definite"))
        .expect("fixture market is valid")
}

/// Complete market on `states` states priced by a positive kernel.
pub fn scenario_market(seed: u64, states: usize) -> GramMarket {
    let mut rng = rng(seed);
    let probs = probabilities(&mut rng, states);
    let kernel: Vec<f64> = (0..states).map(|_| rng.random_range(0.5..1.2)).collect();
    let basis: Vec<ScenarioPayoff> = (0..states)
        .map(|i| {
            // bond plus assets with a distinct high state each
            let values = (0..states)
                .map(|s| if i == 0 { 1.0 } else { 0.8 + if s == i { 0.6 } else { 0.1 * s as f64 / states as f64 } })
                .collect();
            ScenarioPayoff::from_parts(probs.clone(), values).unwrap()
        })
        .collect();
    let prices = basis.iter().map(|b| b.states().zip(&kernel).map(|((p, v), m)| p * v * m).sum()).collect();
    gram_from_scenarios(&basis, prices).expect("fixture market is valid")
}

/// Payoff with positive mean and a downside state.
pub fn downside_payoff(seed: u64, states: usize) -> ScenarioPayoff {
    let mut rng = rng(seed);
    let probs = probabilities(&mut rng, states);
    let mut values: Vec<f64> = (0..states).map(|_| rng.random_range(-0.5..1.5)).collect();
    values[0] = -0.5;
    values[1] = 1.5;
    ScenarioPayoff::from_parts(probs, values).unwrap()
}
