//! Pricing kernels and Hansen–Jagannathan bounds.
//!
//! Every kernel pricing a scenario-backed market has the form
//! `m = Y/ω²_Y + ηV + (anything else in M^⊥)`, where `V = 1 − X − (μ_Y/ω²_Y) Y`
//! is the residual of the unit payoff after projection onto the market.
//! Kernels on the line `Y/ω²_Y + ηV` are the efficient ones, and all kernels
//! obey `HR²_m ≤ 1 − HR²_X`, or equivalently `σ²_m / μ²_m ≥ SR²_X`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontier::{rounding_tol, SpecialPortfolios, BOUND_TOL};
use crate::linalg::norm;
use crate::market::GramMarket;
use crate::moments::{stats, ScenarioPayoff};

/// Pricing errors above `PRICING_TOL * ‖p‖` disqualify a kernel.
pub const PRICING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTolerances {
    pub pricing: f64,
    pub bound: f64,
}

impl Default for KernelTolerances {
    fn default() -> Self {
        Self { pricing: PRICING_TOL, bound: BOUND_TOL }
    }
}

/// The efficient kernels `Y/ω²_Y + ηV`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFrontier {
    pub base: ScenarioPayoff,
    pub direction: ScenarioPayoff,
    pub hr_sq_v: f64,
    pub hr_sq_x: f64,
    pub hr_sq_y: f64,
    /// `η` reaching `HR²_m = 1 − HR²_X`; the kernel is then `(1 − X)/μ_Y`.
    /// `None` when `μ_Y = 0`.
    pub optimal_eta: Option<f64>,
}

impl KernelFrontier {
    pub fn kernel(&self, eta: f64) -> ScenarioPayoff {
        self.base
            .zip_with(&self.direction, |b, v| b + eta * v)
            .expect("base and direction share the market state space")
    }

    /// Kernel with the highest Hansen ratio, if it is attained.
    pub fn optimal_kernel(&self) -> Option<ScenarioPayoff> {
        self.optimal_eta.map(|eta| self.kernel(eta))
    }
}

pub fn kernel_frontier(mkt: &GramMarket) -> Result<KernelFrontier> {
    let basis = mkt.scenarios().ok_or(Error::NotScenarioBacked)?;
    let sp = SpecialPortfolios::solve(mkt)?;
    let y = basis.combine(&sp.w_y);
    let x = basis.combine(&sp.w_x);
    let c = sp.mu_y / sp.omega_sq_y;
    let base = y.scale(1.0 / sp.omega_sq_y);
    let one_minus_x = x.map(|v| 1.0 - v);
    let direction = one_minus_x.zip_with(&y, |a, b| a - c * b)?;

    let tol = rounding_tol(mkt, 1e-10);
    // V ⟂ M
    let scale = (0..mkt.len()).map(|i| mkt.gram()[(i, i)].sqrt()).fold(1.0_f64, f64::max);
    for (i, e) in basis.inner_with_basis(&direction)?.iter().enumerate() {
        if e.abs() > tol * scale {
            return Err(Error::Invariant(format!("residual V is not orthogonal to basis asset {i}: {e:e}")));
        }
    }
    // μ_V = ω²_V = HR²_V
    let mu_v = direction.mean();
    let omega_sq_v = direction.second_moment();
    if (mu_v - omega_sq_v).abs() > tol {
        return Err(Error::Invariant(format!("E[V] = {mu_v} differs from E[V²] = {omega_sq_v}")));
    }
    let hr_sq_v = mu_v.max(0.0);
    let slack = 1.0 - sp.hr_sq_x - sp.hr_sq_y;
    if (hr_sq_v - slack).abs() > tol {
        return Err(Error::Invariant(format!("HR²_V = {hr_sq_v} but 1 − HR²_X − HR²_Y = {slack}")));
    }
    Ok(KernelFrontier {
        base,
        direction,
        hr_sq_v,
        hr_sq_x: sp.hr_sq_x,
        hr_sq_y: sp.hr_sq_y,
        optimal_eta: (sp.mu_y != 0.0).then(|| 1.0 / sp.mu_y),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    pub hr_sq_m: f64,
    /// `σ²_m / μ²_m`; absent when `μ_m = 0`.
    pub var_over_mean_sq: Option<f64>,
    pub hr_bound: f64,
    pub variance_bound: f64,
    pub hr_pass: bool,
    /// Absent when the variance form is undefined (`μ_m = 0`).
    pub variance_pass: Option<bool>,
    pub pass: bool,
    pub max_pricing_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HJBoundReport {
    /// Upper bound `1 − HR²_X` on `HR²_m`.
    pub hr_bound: f64,
    /// Lower bound `SR²_X` on `σ²_m / μ²_m`.
    pub variance_bound: f64,
    pub kernels: Vec<KernelDiagnostics>,
}

struct Bounds {
    hr: f64,
    variance: f64,
}

fn bounds_of(mkt: &GramMarket) -> Result<Bounds> {
    let hr_sq_x = SpecialPortfolios::solve(mkt)?.hr_sq_x;
    Ok(Bounds { hr: 1.0 - hr_sq_x, variance: hr_sq_x / (1.0 - hr_sq_x) })
}

pub fn hj_bounds(mkt: &GramMarket) -> Result<HJBoundReport> {
    let b = bounds_of(mkt)?;
    Ok(HJBoundReport { hr_bound: b.hr, variance_bound: b.variance, kernels: Vec::new() })
}

/// Bounds plus a diagnostic for each candidate kernel.
pub fn hj_report(mkt: &GramMarket, kernels: &[ScenarioPayoff], tol: KernelTolerances) -> Result<HJBoundReport> {
    let mut report = hj_bounds(mkt)?;
    report.kernels = kernels.iter().map(|m| check_kernel_with(m, mkt, tol)).collect::<Result<_>>()?;
    Ok(report)
}

/// Largest `|E[m B_i] − p_i|`, or an error if it exceeds `tol · ‖p‖`.
pub(crate) fn pricing_error(m: &ScenarioPayoff, mkt: &GramMarket, tol: f64) -> Result<f64> {
    let basis = mkt.scenarios().ok_or(Error::NotScenarioBacked)?;
    let implied = basis.inner_with_basis(m)?;
    let limit = tol * norm(mkt.prices());
    let mut worst = 0.0_f64;
    for (asset, (&implied, &price)) in implied.iter().zip(mkt.prices()).enumerate() {
        let err = (implied - price).abs();
        if err > limit {
            return Err(Error::NotAKernel { asset, implied, price });
        }
        worst = worst.max(err);
    }
    Ok(worst)
}

pub fn check_kernel(m: &ScenarioPayoff, mkt: &GramMarket) -> Result<KernelDiagnostics> {
    check_kernel_with(m, mkt, KernelTolerances::default())
}

pub fn check_kernel_with(m: &ScenarioPayoff, mkt: &GramMarket, tol: KernelTolerances) -> Result<KernelDiagnostics> {
    let max_pricing_error = pricing_error(m, mkt, tol.pricing)?;
    let b = bounds_of(mkt)?;
    let s = stats(m)?;
    let hr_sq_m = s.hansen_sq();
    // the bounds themselves carry rounding of order cond(G)·ε
    let bound_tol = rounding_tol(mkt, tol.bound);
    let hr_pass = hr_sq_m <= b.hr + bound_tol;
    let var_over_mean_sq = (s.mean != 0.0).then(|| s.variance / (s.mean * s.mean));
    let variance_pass = var_over_mean_sq.map(|r| r >= b.variance - bound_tol * b.variance.max(1.0));
    Ok(KernelDiagnostics {
        hr_sq_m,
        var_over_mean_sq,
        hr_bound: b.hr,
        variance_bound: b.variance,
        hr_pass,
        variance_pass,
        pass: hr_pass && variance_pass.unwrap_or(true),
        max_pricing_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{gram_from_scenarios, gram_from_universe};
    use crate::reference;

    fn arrow_market() -> GramMarket {
        let probs = vec![0.2, 0.5, 0.3];
        let basis: Vec<_> = (0..3)
            .map(|i| {
                let v = (0..3).map(|s| if s == i { 1.0 } else { 0.0 }).collect();
                ScenarioPayoff::from_parts(probs.clone(), v).unwrap()
            })
            .collect();
        gram_from_scenarios(&basis, vec![0.25, 0.45, 0.25]).unwrap()
    }

    #[test]
    fn complete_market_has_unique_kernel() {
        let mkt = arrow_market();
        let kf = kernel_frontier(&mkt).unwrap();
        assert!(kf.hr_sq_v.abs() < 1e-12);
        assert!(kf.direction.values().iter().all(|v| v.abs() < 1e-12));
        // unique kernel is state price / probability
        let expected = [0.25 / 0.2, 0.45 / 0.5, 0.25 / 0.3];
        for (a, b) in kf.base.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let d = check_kernel(&kf.base, &mkt).unwrap();
        assert!((d.hr_sq_m - d.hr_bound).abs() < 1e-10);
        assert!(d.pass);
    }

    #[test]
    fn lifted_reference_market_residual() {
        let basis = reference::three_asset_universe().lift_to_scenarios().unwrap();
        let mkt = gram_from_scenarios(&basis, vec![1.0; 3]).unwrap();
        let kf = kernel_frontier(&mkt).unwrap();
        let exact = 1.0 - 28_147_713_781.0 / 28_448_540_506.0;
        assert!((kf.hr_sq_v - exact).abs() < 1e-12);
        assert!((kf.hr_sq_v - 0.01057).abs() < 5e-6);
        // direct projection oracle: V is 1 minus its least-squares fit on the basis
        let g = mkt.gram().clone();
        let coef = crate::linalg::Cholesky::new(&g).unwrap().solve(mkt.means());
        let fit = mkt.scenarios().unwrap().combine(&coef);
        for (v, f) in kf.direction.values().iter().zip(fit.values()) {
            assert!((v - (1.0 - f)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_risk_free_asset() {
        let probs = vec![0.3, 0.7];
        let rf = ScenarioPayoff::from_parts(probs.clone(), vec![1.0, 1.0]).unwrap();
        let mkt = gram_from_scenarios(&[rf], vec![0.95]).unwrap();
        let kf = kernel_frontier(&mkt).unwrap();
        // 1 lies in the market, so the residual vanishes
        assert!(kf.direction.values().iter().all(|v| v.abs() < 1e-14));
        assert!((kf.base.mean() - 0.95).abs() < 1e-14);

        let risky = ScenarioPayoff::from_parts(probs.clone(), vec![2.0, 0.5]).unwrap();
        let mkt = gram_from_scenarios(std::slice::from_ref(&risky), vec![1.0]).unwrap();
        let kf = kernel_frontier(&mkt).unwrap();
        // 2-state least squares of 1 on the single payoff
        let beta = risky.mean() / risky.second_moment();
        for (v, r) in kf.direction.values().iter().zip(risky.values()) {
            assert!((v - (1.0 - beta * r)).abs() < 1e-14);
        }
    }

    #[test]
    fn hj_bounds_reference_one_period() {
        let mkt = gram_from_universe(&reference::three_asset_universe()).unwrap();
        let r = hj_bounds(&mkt).unwrap();
        let hx = 582_399.0 / 1_632_974.0;
        assert!((r.hr_bound - (1.0 - hx)).abs() < 1e-12);
        assert!((r.variance_bound - hx / (1.0 - hx)).abs() < 1e-12);
        assert!((r.variance_bound - 0.55436).abs() < 1e-5);
        assert!(r.kernels.is_empty());
    }

    #[test]
    fn degenerate_market_admits_any_kernel() {
        let mkt = gram_from_scenarios(&[ScenarioPayoff::constant(1.0)], vec![1.0]).unwrap();
        let r = hj_bounds(&mkt).unwrap();
        assert_eq!((r.hr_bound, r.variance_bound), (1.0, 0.0));
    }

    #[test]
    fn three_state_example_variance_bound() {
        let probs = vec![1.0 / 6.0, 0.5, 1.0 / 3.0];
        let rf = ScenarioPayoff::from_parts(probs.clone(), vec![1.0; 3]).unwrap();
        let w = ScenarioPayoff::from_parts(probs, vec![-0.01, 0.01, 0.11]).unwrap();
        let mkt = gram_from_scenarios(&[rf, w], vec![1.0, 0.0]).unwrap();
        let r = hj_bounds(&mkt).unwrap();
        assert!((r.variance_bound - 0.64).abs() < 1e-12);
    }

    #[test]
    fn kernel_errors() {
        let mkt = arrow_market();
        let wrong = ScenarioPayoff::from_parts(vec![0.2, 0.5, 0.3], vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(check_kernel(&wrong, &mkt), Err(Error::NotAKernel { .. })));
        let plain = gram_from_universe(&reference::three_asset_universe()).unwrap();
        assert_eq!(kernel_frontier(&plain).unwrap_err(), Error::NotScenarioBacked);
        assert_eq!(check_kernel(&wrong, &plain).unwrap_err(), Error::NotScenarioBacked);
    }

    #[test]
    fn zero_mean_kernel_skips_variance_form() {
        // states priced so that a zero-mean kernel exists: E[m] = 0 needs a zero-priced unit payoff
        let probs = vec![0.5, 0.5];
        let a = ScenarioPayoff::from_parts(probs.clone(), vec![1.0, 0.0]).unwrap();
        let mkt = gram_from_scenarios(&[a], vec![0.5]).unwrap();
        let m = ScenarioPayoff::from_parts(probs, vec![1.0, -1.0]).unwrap();
        let d = check_kernel(&m, &mkt).unwrap();
        assert_eq!(d.var_over_mean_sq, None);
        assert_eq!(d.variance_pass, None);
        assert_eq!(d.hr_sq_m, 0.0);
        assert!(d.pass);
    }

    #[test]
    fn diagnostics_json_fields() {
        let mkt = arrow_market();
        let kf = kernel_frontier(&mkt).unwrap();
        let d = check_kernel(&kf.base, &mkt).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        for key in ["hr_sq_m", "var_over_mean_sq", "hr_bound", "variance_bound", "pass"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
