#![allow(dead_code)]

use hansen_core::linalg::Matrix;
use hansen_core::{gram_from_scenarios, AssetUniverse, GramMarket, ScenarioPayoff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn random_probs(rng: &mut impl Rng, states: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..states).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| r / total).collect()
}

/// Mean returns near 1.1 and a covariance `AAᵀ/n + εI` scaled to typical
/// annual return variances.
pub fn random_universe(rng: &mut impl Rng, n: usize) -> AssetUniverse {
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let scale = rng.random_range(0.005..0.08);
    let sigma = Matrix::from_fn(n, |i, j| {
        let aat: f64 = (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>() / n as f64;
        scale * (aat + if i == j { 0.05 } else { 0.0 })
    });
    let mu = (0..n).map(|_| rng.random_range(0.95..1.35)).collect();
    AssetUniverse::new(mu, sigma).expect("random covariance is positive definite")
}

pub struct ScenarioMarket {
    pub market: GramMarket,
    pub basis: Vec<ScenarioPayoff>,
    /// Strictly positive kernel used to set the prices.
    pub kernel: ScenarioPayoff,
}

/// Positive payoffs on at most `max_states` states priced by a strictly
/// positive kernel, so the market is arbitrage free.
pub fn random_scenario_market(rng: &mut impl Rng, max_states: usize) -> ScenarioMarket {
    loop {
        let states = rng.random_range(2..=max_states);
        let assets = rng.random_range(1..=states);
        let probs = random_probs(rng, states);
        let kernel_values: Vec<f64> = (0..states).map(|_| rng.random_range(0.3..1.5)).collect();
        let kernel = ScenarioPayoff::from_parts(probs.clone(), kernel_values).unwrap();
        let basis: Vec<ScenarioPayoff> = (0..assets)
            .map(|_| {
                let values = (0..states).map(|_| rng.random_range(0.2..2.0)).collect();
                ScenarioPayoff::from_parts(probs.clone(), values).unwrap()
            })
            .collect();
        let prices = basis.iter().map(|b| b.inner(&kernel).unwrap()).collect();
        if let Ok(market) = gram_from_scenarios(&basis, prices) {
            return ScenarioMarket { market, basis, kernel };
        }
    }
}

/// Payoff with positive mean and at least one negative state. Half of the
/// draws are snapped to a coarse grid so that ties occur.
pub fn random_downside_payoff(rng: &mut impl Rng, max_states: usize) -> ScenarioPayoff {
    loop {
        let states = rng.random_range(2..=max_states);
        let probs = random_probs(rng, states);
        let snap = rng.random_bool(0.5);
        let values: Vec<f64> = (0..states)
            .map(|_| {
                let v: f64 = rng.random_range(-1.0..2.0);
                if snap {
                    (v * 4.0).round() / 4.0
                } else {
                    v
                }
            })
            .collect();
        let w = ScenarioPayoff::from_parts(probs, values).unwrap();
        if w.mean() > 1e-3 && w.values().iter().any(|&v| v < 0.0) {
            return w;
        }
    }
}
