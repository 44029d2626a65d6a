//! Monotone Hansen and Sharpe ratios.
//!
//! The monotone Hansen ratio of `W` is the best Hansen ratio of `W − W̃` over
//! nonnegative `W̃`. For a payoff with positive mean and some downside it is
//! attained by truncation, `MHR(W) = max_{k>0} HR(W ∧ k)`, at the threshold
//! `k̂ = 1/α̂` where `E[W; α̂W ≤ 1] = α̂ E[W²; α̂W ≤ 1]`.
//!
//! On a finite state space `HR(W ∧ k)` is smooth between consecutive payoff
//! values. With `a = E[W; W ≤ v_j]`, `b = E[W²; W ≤ v_j]` and
//! `q = P(W > v_j)`, the ratio on `[v_j, v_{j+1}]` is
//! `(a + kq) / sqrt(b + k²q)`, whose derivative has the sign of `q(b − ak)`.
//! So the only interior candidate is `k = b/a`, clamped to the segment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{pricing_error, PRICING_TOL};
use crate::linalg::compensated_sum;
use crate::market::GramMarket;
use crate::moments::{hr_sq_to_sr_sq, stats, ScenarioPayoff, Sharpe};

/// Largest admissible first-order-condition residual, relative to `E|W|`.
pub const FOC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneResult {
    pub mhr: f64,
    pub msr: Sharpe,
    pub k_hat: f64,
    pub alpha_hat: f64,
    /// Whether `k̂` lies below the largest payoff value.
    pub truncated: bool,
    /// `|E[W; α̂W ≤ 1] − α̂ E[W²; α̂W ≤ 1]| / E|W|`
    pub foc_residual: f64,
}

/// Monotonized quadratic utility `x∧1 − (x∧1)²/2`.
pub fn monotonized_utility(x: f64) -> f64 {
    let c = x.min(1.0);
    c - 0.5 * c * c
}

/// Monotone Hansen ratio of a payoff with positive mean and nonzero downside.
pub fn monotone_hansen_ratio(w: &ScenarioPayoff) -> Result<MonotoneResult> {
    monotone_hansen_ratio_with(w, false)
}

/// As [`monotone_hansen_ratio`]; with `allow_no_downside` a nonnegative
/// payoff is accepted and its supremum returned (1 when `min W > 0`).
pub fn monotone_hansen_ratio_with(w: &ScenarioPayoff, allow_no_downside: bool) -> Result<MonotoneResult> {
    let mean = w.mean();
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::NonPositiveMean { mean });
    }
    let has_downside = w.values().iter().any(|&v| v < 0.0);
    if !has_downside && !allow_no_downside {
        return Err(Error::NoDownside);
    }
    let k_hat = optimal_threshold(w);
    let mhr = stats(&w.truncate(k_hat))?.hansen;
    let alpha_hat = 1.0 / k_hat;
    let foc_residual = foc_residual(w, k_hat);
    if foc_residual > FOC_TOL {
        return Err(Error::Invariant(format!("first-order condition residual {foc_residual:e} at k = {k_hat}")));
    }
    let max_value = w.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MonotoneResult {
        mhr,
        msr: sharpe_from_hansen(mhr),
        k_hat,
        alpha_hat,
        truncated: k_hat < max_value,
        foc_residual,
    })
}

fn sharpe_from_hansen(hr: f64) -> Sharpe {
    match hr_sq_to_sr_sq(hr * hr) {
        Sharpe::Finite(sr_sq) => Sharpe::Finite(sr_sq.sqrt().copysign(hr)),
        _ => Sharpe::PosInfinite,
    }
}

pub fn monotone_sharpe_ratio(w: &ScenarioPayoff) -> Result<Sharpe> {
    Ok(monotone_hansen_ratio(w)?.msr)
}

/// `(E[W; W ≤ k] − α E[W²; W ≤ k]) / E|W|` with `α = 1/k`.
fn foc_residual(w: &ScenarioPayoff, k: f64) -> f64 {
    let a = compensated_sum(w.states().filter(|s| s.1 <= k).map(|(p, v)| p * v));
    let b = compensated_sum(w.states().filter(|s| s.1 <= k).map(|(p, v)| p * v * v));
    let scale = w.expect(f64::abs);
    (a - b / k).abs() / scale
}

/// Distinct payoff values in ascending order with their probabilities.
fn atoms(w: &ScenarioPayoff) -> Vec<(f64, f64)> {
    let mut states: Vec<(f64, f64)> = w.states().map(|(p, v)| (v, p)).collect();
    states.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(states.len());
    for (v, p) in states {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// Maximizer of `HR(W ∧ k)` over `k > 0`.
///
/// On the segment between consecutive atoms `HR(W ∧ k) = (a + kq)/√(b + k²q)`
/// has derivative of the sign of `b − ak`. That quantity is continuous in `k`
/// and strictly decreasing once `a > 0`, so the maximizer is its unique root
/// and lies in the first segment with `a > 0` and `b/a` below the segment's
/// upper end.
fn optimal_threshold(w: &ScenarioPayoff) -> f64 {
    let atoms = atoms(w);
    let mut a_parts = Vec::with_capacity(atoms.len());
    let mut b_parts = Vec::with_capacity(atoms.len());
    for j in 0..atoms.len() {
        let (v, p) = atoms[j];
        a_parts.push(p * v);
        b_parts.push(p * v * v);
        let hi = atoms.get(j + 1).map_or(f64::INFINITY, |x| x.0);
        if hi <= 0.0 {
            continue;
        }
        let a = compensated_sum(a_parts.iter().copied());
        if a <= 0.0 {
            continue;
        }
        let b = compensated_sum(b_parts.iter().copied());
        let k = b / a;
        if k <= hi {
            return k.max(v);
        }
    }
    unreachable!("positive mean puts the root on the last segment at the latest")
}

/// Settings for the search over zero-cost directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionSearch {
    pub directions: usize,
    pub seed: u64,
    pub pricing_tol: f64,
    pub bound_tol: f64,
}

impl Default for DirectionSearch {
    fn default() -> Self {
        Self { directions: 10_000, seed: 0x5eed, pricing_tol: PRICING_TOL, bound_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneBoundReport {
    pub hr_sq_m: f64,
    pub var_over_mean_sq: Option<f64>,
    /// Best `MHR²` found over zero-cost portfolios; a lower bound on the supremum.
    pub sup_mhr_sq: f64,
    pub sup_msr_sq: Sharpe,
    /// Zero-cost weights attaining `sup_mhr_sq`.
    pub best_weights: Vec<f64>,
    pub hr_bound: f64,
    pub hr_pass: bool,
    pub variance_pass: Option<bool>,
    pub pass: bool,
    pub directions_evaluated: usize,
}

/// Checks `sup MHR² ≤ 1 − HR²_m` and `σ²_m/μ²_m ≥ sup MSR²` over zero-cost
/// portfolios for a nonnegative kernel `m`.
pub fn monotone_hj_bound(mkt: &GramMarket, m: &ScenarioPayoff) -> Result<MonotoneBoundReport> {
    monotone_hj_bound_with(mkt, m, DirectionSearch::default())
}

pub fn monotone_hj_bound_with(
    mkt: &GramMarket,
    m: &ScenarioPayoff,
    search: DirectionSearch,
) -> Result<MonotoneBoundReport> {
    if let Some((state, &value)) = m.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeKernel { state, value });
    }
    pricing_error(m, mkt, search.pricing_tol)?;
    let basis = mkt.scenarios().ok_or(Error::NotScenarioBacked)?;
    let sm = stats(m)?;
    let hr_sq_m = sm.hansen_sq();
    let var_over_mean_sq = (sm.mean != 0.0).then(|| sm.variance / (sm.mean * sm.mean));

    let zero_cost = zero_cost_basis(mkt);
    let objective = |c: &[f64]| -> (f64, Vec<f64>) {
        let weights = combine_directions(&zero_cost, c, mkt.len());
        let payoff = basis.combine(&weights);
        let value = match monotone_hansen_ratio_with(&payoff, true) {
            Ok(r) => r.mhr.max(0.0),
            Err(_) => 0.0,
        };
        (value, weights)
    };

    let dim = zero_cost.len();
    let mut evaluated = 0usize;
    let mut best = (0.0_f64, vec![0.0; mkt.len()], vec![0.0; dim]);
    if dim > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        let starts = direction_grid(dim, search.directions, &mut rng);
        for c in starts {
            let (v, w) = objective(&c);
            evaluated += 1;
            if v > best.0 {
                best = (v, w, c);
            }
        }
        // local refinement around the best grid direction
        let mut step = if dim == 1 { 0.0 } else { 0.5 / (search.directions as f64).powf(1.0 / (dim as f64 - 1.0)) };
        let mut failures = 0;
        while step > 1e-10 && dim > 1 {
            let trial: Vec<f64> = best.2.iter().map(|x| x + step * gaussian(&mut rng)).collect();
            let trial = normalized(trial);
            let (v, w) = objective(&trial);
            evaluated += 1;
            if v > best.0 {
                best = (v, w, trial);
                failures = 0;
            } else {
                failures += 1;
                if failures >= 8 * dim {
                    step *= 0.5;
                    failures = 0;
                }
            }
        }
    }

    let sup_mhr_sq = best.0 * best.0;
    let sup_msr_sq = hr_sq_to_sr_sq(sup_mhr_sq);
    let hr_bound = 1.0 - hr_sq_m;
    let hr_pass = sup_mhr_sq <= hr_bound + search.bound_tol;
    let variance_pass = var_over_mean_sq.map(|r| match sup_msr_sq {
        Sharpe::Finite(s) => r >= s - search.bound_tol * s.max(1.0),
        _ => false,
    });
    Ok(MonotoneBoundReport {
        hr_sq_m,
        var_over_mean_sq,
        sup_mhr_sq,
        sup_msr_sq,
        best_weights: best.1,
        hr_bound,
        hr_pass,
        variance_pass,
        pass: hr_pass && variance_pass.unwrap_or(true),
        directions_evaluated: evaluated,
    })
}

/// Basis of the zero-cost weights `{w : pᵀw = 0}`, orthonormal in the market
/// inner product.
fn zero_cost_basis(mkt: &GramMarket) -> Vec<Vec<f64>> {
    let n = mkt.len();
    let p = mkt.prices();
    let pp = compensated_sum(p.iter().map(|x| x * x));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        // e_i projected off p
        let mut v: Vec<f64> = (0..n).map(|j| (if i == j { 1.0 } else { 0.0 }) - p[i] * p[j] / pp).collect();
        for b in &basis {
            let c = mkt.inner(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let nv = mkt.inner(&v, &v);
        if nv > 1e-12 * mkt.gram().trace() {
            let s = nv.sqrt();
            basis.push(v.into_iter().map(|x| x / s).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

fn combine_directions(basis: &[Vec<f64>], c: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| compensated_sum(basis.iter().zip(c).map(|(b, ci)| ci * b[i]))).collect()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s = compensated_sum(v.iter().map(|x| x * x)).sqrt();
    v.into_iter().map(|x| x / s).collect()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Unit vectors in `dim` dimensions: both signs in 1-d, an even circle in
/// 2-d, seeded random directions otherwise.
fn direction_grid(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => (0..count).map(|_| normalized((0..dim).map(|_| gaussian(rng)).collect())).collect(),
    }
}
