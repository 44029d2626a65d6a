//! Unconditional frontier of an `n`-period market with IID returns.
//!
//! The dynamic `Ỹ` is the product of the one-period `Y_t`, so
//! `μ_Ỹ = μ_Y^n` and `ω²_Ỹ = ω_Y^{2n}`, and the residual of the unit payoff
//! compounds as `1 − HR²_X̃ − HR²_Ỹ = (1 − HR²_X − HR²_Y) Σ_{t<n} HR_Y^{2t}`.
//! [`tree_oracle`] evaluates the same quantities leaf by leaf on the full
//! scenario tree.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontier::{frontier_from_moments, FrontierCoefficients, SpecialPortfolios, BOUND_TOL};
use crate::linalg::Accumulator;
use crate::market::GramMarket;

pub const MAX_LEAVES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiperiodStats {
    pub n: usize,
    pub mu_y: f64,
    pub omega_sq_y: f64,
    pub hr_sq_y: f64,
    pub hr_sq_x: f64,
}

impl MultiperiodStats {
    /// `1 − HR²_X − HR²_Y` at this horizon.
    pub fn slack(&self) -> f64 {
        1.0 - self.hr_sq_x - self.hr_sq_y
    }

    /// Minimum-variance point `(μ_Z, σ²_Z)` of the frontier.
    pub fn min_variance(&self) -> Result<(f64, f64)> {
        let fc = multiperiod_frontier(self)?;
        Ok((fc.mu_sigma.center, fc.mu_sigma.intercept))
    }
}

/// `Σ_{t=0}^{n−1} h^t`
fn geometric_sum(h: f64, n: usize) -> f64 {
    if h == 1.0 {
        n as f64
    } else {
        (1.0 - h.powi(n as i32)) / (1.0 - h)
    }
}

pub fn propagate(one_period: &SpecialPortfolios, n: usize) -> Result<MultiperiodStats> {
    propagate_moments(one_period.mu_y, one_period.omega_sq_y, one_period.hr_sq_x, n)
}

/// Propagation from the one-period `μ_Y`, `ω²_Y` and `HR²_X`.
pub fn propagate_moments(mu_y: f64, omega_sq_y: f64, hr_sq_x: f64, n: usize) -> Result<MultiperiodStats> {
    if n == 0 {
        return Err(Error::InvalidHorizon(n));
    }
    let hr_sq_y = mu_y * mu_y / omega_sq_y;
    if hr_sq_x + hr_sq_y > 1.0 + BOUND_TOL {
        return Err(Error::HansenBoundViolated { sum: hr_sq_x + hr_sq_y });
    }
    let exp = n as i32;
    Ok(MultiperiodStats {
        n,
        mu_y: mu_y.powi(exp),
        omega_sq_y: omega_sq_y.powi(exp),
        hr_sq_y: hr_sq_y.powi(exp),
        // equals 1 − HR²_Ỹ − (1 − HR²_X − HR²_Y)·Σ HR_Y^{2t}, without the cancellation
        hr_sq_x: geometric_sum(hr_sq_y, n) * hr_sq_x,
    })
}

pub fn multiperiod_frontier(mp: &MultiperiodStats) -> Result<FrontierCoefficients> {
    frontier_from_moments(mp.mu_y, mp.omega_sq_y, mp.hr_sq_x)
}

/// The `n`-fold product of a one-period state space; leaves are visited in
/// lexicographic (depth-first) order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    probs: Vec<f64>,
    periods: usize,
}

impl ScenarioTree {
    pub fn new(probs: Vec<f64>, periods: usize) -> Result<Self> {
        if periods == 0 {
            return Err(Error::InvalidHorizon(0));
        }
        let leaves = leaf_count(probs.len(), periods);
        if leaves > MAX_LEAVES {
            return Err(Error::TreeTooLarge { leaves, limit: MAX_LEAVES });
        }
        Ok(Self { probs, periods })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn leaf_count(&self) -> usize {
        leaf_count(self.probs.len(), self.periods)
    }

    /// Calls `f(probability, path)` for every leaf; `path[t]` is the state
    /// of period `t + 1`.
    pub fn for_each_leaf(&self, mut f: impl FnMut(f64, &[usize])) {
        let s = self.probs.len();
        let mut path = vec![0usize; self.periods];
        loop {
            let prob = path.iter().map(|&i| self.probs[i]).product();
            f(prob, &path);
            // odometer increment, last period fastest
            let mut t = self.periods;
            loop {
                if t == 0 {
                    return;
                }
                t -= 1;
                path[t] += 1;
                if path[t] < s {
                    break;
                }
                path[t] = 0;
            }
        }
    }
}

fn leaf_count(states: usize, periods: usize) -> usize {
    let mut total = 1usize;
    for _ in 0..periods {
        total = total.saturating_mul(states);
    }
    total
}

/// Leafwise moments of the dynamic portfolios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeOracleResult {
    pub stats: MultiperiodStats,
    /// `E[X̃²]`, which must equal `E[X̃] = HR²_X̃`.
    pub x_second_moment: f64,
    /// Mean of `X̃ + (μ_Ỹ/ω²_Ỹ) Ỹ`, the projection of 1 onto the dynamic market.
    pub mix_mean: f64,
    pub leaves: usize,
}

pub fn tree_oracle(one_period: &GramMarket, n: usize) -> Result<TreeOracleResult> {
    let basis = one_period.scenarios().ok_or(Error::NotScenarioBacked)?;
    let tree = ScenarioTree::new(basis.probs().to_vec(), n)?;
    let sp = SpecialPortfolios::solve(one_period)?;
    let y = basis.combine(&sp.w_y);
    let x = basis.combine(&sp.w_x);
    let (y, x) = (y.values(), x.values());
    let c = sp.mu_y / sp.omega_sq_y;
    let c_n = c.powi(n as i32);

    let mut e_y = Accumulator::default();
    let mut e_y2 = Accumulator::default();
    let mut e_x = Accumulator::default();
    let mut e_x2 = Accumulator::default();
    let mut e_mix = Accumulator::default();
    let mut suffix = vec![1.0; n + 1];
    tree.for_each_leaf(|prob, path| {
        // suffix[j] = Π_{t ≥ j} Y_t (0-based periods)
        for t in (0..n).rev() {
            suffix[t] = suffix[t + 1] * y[path[t]];
        }
        let y_tilde = suffix[0];
        let mut residual = 0.0;
        for (j, &s) in path.iter().enumerate() {
            let weight = c.powi((n - 1 - j) as i32);
            residual += weight * (1.0 - x[s] - c * y[s]) * suffix[j + 1];
        }
        let x_tilde = 1.0 - c_n * y_tilde - residual;
        e_y.add(prob * y_tilde);
        e_y2.add(prob * y_tilde * y_tilde);
        e_x.add(prob * x_tilde);
        e_x2.add(prob * x_tilde * x_tilde);
        e_mix.add(prob * (x_tilde + c_n * y_tilde));
    });

    let mu_y = e_y.value();
    let omega_sq_y = e_y2.value();
    Ok(TreeOracleResult {
        stats: MultiperiodStats { n, mu_y, omega_sq_y, hr_sq_y: mu_y * mu_y / omega_sq_y, hr_sq_x: e_x.value() },
        x_second_moment: e_x2.value(),
        mix_mean: e_mix.value(),
        leaves: tree.leaf_count(),
    })
}
