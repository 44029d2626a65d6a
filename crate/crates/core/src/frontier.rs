//! Special portfolios and the mean-variance frontier of a [`GramMarket`].
//!
//! * `Y` is the minimum-norm fully invested portfolio; it is orthogonal to
//!   every zero-cost portfolio, so `⟨Y, ·⟩ / ω²_Y` prices the market.
//! * `X` is the projection of `I` onto the zero-cost subspace, the zero-cost
//!   portfolio with the highest Hansen ratio. `μ_X = ω²_X = HR²_X`.
//! * `Z = Y + μ_Z X` is the minimum-variance fully invested portfolio.
//!
//! The frontier is `Y + λX`, and `HR²_X + HR²_Y ≤ 1`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::market::GramMarket;
use crate::moments::hr_sq_to_sr_sq;

/// Bound checks allow this much excess over 1.
pub const BOUND_TOL: f64 = 1e-10;
/// `HR²_X` at or below this is treated as zero (degenerate frontier).
pub const ZERO_X_TOL: f64 = 1e-12;
/// Negative `σ²_Z` of at most this size relative to `max(μ²_Z, 1)` is rounding and is clamped.
pub const VARIANCE_DUST: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioY {
    pub weights: Vec<f64>,
    pub mean: f64,
    pub second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioX {
    pub weights: Vec<f64>,
    pub hr_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioZ {
    pub weights: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

pub fn solve_y(mkt: &GramMarket) -> Result<PortfolioY> {
    let p = mkt.prices();
    if p.iter().all(|&v| v == 0.0) {
        return Err(Error::DegeneratePrices);
    }
    let g_inv_p = mkt.cholesky().solve(p);
    let ptgp = dot(p, &g_inv_p);
    let weights: Vec<f64> = g_inv_p.iter().map(|v| v / ptgp).collect();
    Ok(PortfolioY { mean: mkt.mean_of(&weights), second_moment: 1.0 / ptgp, weights })
}

pub fn solve_x(mkt: &GramMarket) -> Result<PortfolioX> {
    let p = mkt.prices();
    let m = mkt.means();
    let chol = mkt.cholesky();
    let g_inv_p = chol.solve(p);
    let g_inv_m = chol.solve(m);
    let lambda = dot(p, &g_inv_m) / dot(p, &g_inv_p);
    let weights: Vec<f64> = g_inv_m.iter().zip(&g_inv_p).map(|(a, b)| a - lambda * b).collect();
    let hr_sq = mkt.mean_of(&weights).max(0.0);
    if hr_sq >= 1.0 - BOUND_TOL {
        return Err(Error::ArbitrageDetected { hr_sq_x: hr_sq });
    }
    Ok(PortfolioX { weights, hr_sq })
}

fn z_from(y: &PortfolioY, x: &PortfolioX, dust: f64) -> Result<PortfolioZ> {
    let mean = y.mean / (1.0 - x.hr_sq);
    let variance = clamp_variance(y.second_moment - y.mean * mean, dust * (mean * mean).max(1.0))?;
    let weights = y.weights.iter().zip(&x.weights).map(|(wy, wx)| wy + mean * wx).collect();
    Ok(PortfolioZ { weights, mean, variance })
}

/// `floor`, or `cond(G)·ε` when that is larger.
pub(crate) fn rounding_tol(mkt: &GramMarket, floor: f64) -> f64 {
    floor.max(mkt.cholesky().condition_estimate() * f64::EPSILON)
}

fn clamp_variance(v: f64, dust: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -dust {
        Ok(0.0)
    } else {
        Err(Error::Invariant(format!("minimum variance is negative: {v:e}")))
    }
}

pub fn solve_z(mkt: &GramMarket) -> Result<PortfolioZ> {
    z_from(&solve_y(mkt)?, &solve_x(mkt)?, rounding_tol(mkt, VARIANCE_DUST))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialPortfolios {
    pub w_y: Vec<f64>,
    pub w_x: Vec<f64>,
    pub w_z: Vec<f64>,
    pub mu_y: f64,
    pub omega_sq_y: f64,
    pub hr_sq_y: f64,
    pub hr_sq_x: f64,
    pub mu_z: f64,
    pub sigma_sq_z: f64,
    /// Frontier coordinate of `Z`, equal to `μ_Z`.
    pub lambda_hat: f64,
    /// False when `μ_Y = 0`: the frontier's Hansen ratio only approaches
    /// its supremum as `|λ| → ∞`.
    pub max_hr_attained: bool,
}

impl SpecialPortfolios {
    pub fn solve(mkt: &GramMarket) -> Result<Self> {
        let y = solve_y(mkt)?;
        let x = solve_x(mkt)?;
        let hr_sq_y = y.mean * y.mean / y.second_moment;
        // complete markets sit exactly on the bound, so allow for conditioning
        let tol = rounding_tol(mkt, BOUND_TOL);
        if hr_sq_y + x.hr_sq > 1.0 + tol {
            return Err(Error::HansenBoundViolated { sum: hr_sq_y + x.hr_sq });
        }
        let z = z_from(&y, &x, rounding_tol(mkt, VARIANCE_DUST))?;
        Ok(Self {
            mu_y: y.mean,
            omega_sq_y: y.second_moment,
            hr_sq_y,
            hr_sq_x: x.hr_sq,
            mu_z: z.mean,
            sigma_sq_z: z.variance,
            lambda_hat: z.mean,
            max_hr_attained: y.mean != 0.0,
            w_y: y.weights,
            w_x: x.weights,
            w_z: z.weights,
        })
    }

    /// Weights of `Y + λX`.
    pub fn frontier_weights(&self, lambda: f64) -> Vec<f64> {
        self.w_y.iter().zip(&self.w_x).map(|(y, x)| y + lambda * x).collect()
    }

    /// Price of a marketed payoff under the rule `⟨Y, W⟩ / ω²_Y`.
    pub fn y_price(&self, mkt: &GramMarket, w: &[f64]) -> f64 {
        mkt.inner(&self.w_y, w) / self.omega_sq_y
    }

    pub fn is_degenerate(&self) -> bool {
        self.hr_sq_x <= ZERO_X_TOL
    }
}

/// `ω² = ω²_Y + HR_X⁻² (μ − μ_Y)²`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuOmegaParabola {
    pub intercept: f64,
    pub slope: f64,
    pub center: f64,
}

/// `σ² = σ²_Z + SR_X⁻² (μ − μ_Z)²`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuSigmaParabola {
    pub intercept: f64,
    pub slope: f64,
    pub center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierCoefficients {
    pub mu_omega: MuOmegaParabola,
    pub mu_sigma: MuSigmaParabola,
}

impl FrontierCoefficients {
    pub fn omega_sq_at(&self, mu: f64) -> f64 {
        let c = &self.mu_omega;
        c.intercept + c.slope * (mu - c.center).powi(2)
    }

    pub fn sigma_sq_at(&self, mu: f64) -> f64 {
        let c = &self.mu_sigma;
        c.intercept + c.slope * (mu - c.center).powi(2)
    }
}

pub fn frontier_coefficients(sp: &SpecialPortfolios) -> Result<FrontierCoefficients> {
    frontier_from_moments(sp.mu_y, sp.omega_sq_y, sp.hr_sq_x)
}

/// Both frontier parabolas from `μ_Y`, `ω²_Y` and `HR²_X` alone.
pub fn frontier_from_moments(mu_y: f64, omega_sq_y: f64, hr_sq_x: f64) -> Result<FrontierCoefficients> {
    if hr_sq_x <= ZERO_X_TOL {
        return Err(Error::ZeroX);
    }
    if hr_sq_x >= 1.0 - BOUND_TOL {
        return Err(Error::ArbitrageDetected { hr_sq_x });
    }
    let hr_sq_y = mu_y * mu_y / omega_sq_y;
    let mu_z = mu_y / (1.0 - hr_sq_x);
    let sigma_sq_z =
        clamp_variance(omega_sq_y * (1.0 - hr_sq_y / (1.0 - hr_sq_x)), VARIANCE_DUST * (mu_z * mu_z).max(1.0))?;
    let inv_sr_sq = match hr_sq_to_sr_sq(hr_sq_x).finite() {
        Some(sr_sq) => 1.0 / sr_sq,
        None => unreachable!("HR²_X < 1 checked above"),
    };
    Ok(FrontierCoefficients {
        mu_omega: MuOmegaParabola { intercept: omega_sq_y, slope: 1.0 / hr_sq_x, center: mu_y },
        mu_sigma: MuSigmaParabola { intercept: sigma_sq_z, slope: inv_sr_sq, center: mu_z },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub mu: f64,
    pub omega: f64,
    pub sigma: f64,
}

pub fn frontier_points(fc: &FrontierCoefficients, mu_grid: &[f64]) -> Vec<FrontierPoint> {
    mu_grid
        .iter()
        .map(|&mu| FrontierPoint { mu, omega: fc.omega_sq_at(mu).sqrt(), sigma: fc.sigma_sq_at(mu).max(0.0).sqrt() })
        .collect()
}

/// `count` evenly spaced means from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count).map(|i| min + (max - min) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Writes points as CSV with header `mu,omega,sigma`.
pub fn write_points_csv<W: Write>(out: W, points: &[FrontierPoint]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["mu", "omega", "sigma"])?;
    for p in points {
        wtr.write_record([p.mu.to_string(), p.omega.to_string(), p.sigma.to_string()])?;
    }
    wtr.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HansenBoundReport {
    pub hr_sq_x: f64,
    pub hr_sq_y: f64,
    pub sum: f64,
    /// `1 − HR²_X − HR²_Y`, the squared Hansen ratio of the residual of `I`
    /// after projection onto the market.
    pub slack: f64,
    pub pass: bool,
}

pub fn check_hansen_bound(sp: &SpecialPortfolios) -> HansenBoundReport {
    check_hansen_bound_with_tol(sp, BOUND_TOL)
}

pub fn check_hansen_bound_with_tol(sp: &SpecialPortfolios, tol: f64) -> HansenBoundReport {
    let sum = sp.hr_sq_x + sp.hr_sq_y;
    HansenBoundReport { hr_sq_x: sp.hr_sq_x, hr_sq_y: sp.hr_sq_y, sum, slack: 1.0 - sum, pass: sum <= 1.0 + tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::market::{gram_from_scenarios, gram_from_universe};
    use crate::moments::ScenarioPayoff;
    use crate::reference;

    fn reference_market() -> GramMarket {
        gram_from_universe(&reference::three_asset_universe()).unwrap()
    }

    fn risk_free_market() -> GramMarket {
        gram_from_scenarios(&[ScenarioPayoff::constant(1.0)], vec![1.0]).unwrap()
    }

    #[test]
    fn reference_y() {
        let y = solve_y(&reference_market()).unwrap();
        let exact = reference::OMEGA_SQ_Y.exact_value().unwrap();
        assert!((y.second_moment / exact - 1.0).abs() < 1e-12);
        assert!((y.mean / reference::MU_Y.exact_value().unwrap() - 1.0).abs() < 1e-12);
        assert!((y.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reference_x() {
        let x = solve_x(&reference_market()).unwrap();
        assert!((x.hr_sq / (582_399.0 / 1_632_974.0) - 1.0).abs() < 1e-12);
        assert!(x.weights.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn reference_z_matches_direct_variance_minimization() {
        let mkt = reference_market();
        let z = solve_z(&mkt).unwrap();
        // oracle: minimize wᵀΣw over 1ᵀw = 1 with Σ = G − mmᵀ, closed form Σ⁻¹1 / 1ᵀΣ⁻¹1
        let u = reference::three_asset_universe();
        let chol = crate::linalg::Cholesky::new(u.covariance()).unwrap();
        let s1 = chol.solve(&[1.0; 3]);
        let total: f64 = s1.iter().sum();
        let w: Vec<f64> = s1.iter().map(|v| v / total).collect();
        let mu = dot(&w, u.mean_returns());
        assert!((z.mean - mu).abs() < 1e-12);
        assert!((z.mean - 1.153_991_671_227_661).abs() < 1e-12);
        assert!((z.variance - 1.0 / total).abs() < 1e-12);
        for (a, b) in z.weights.iter().zip(&w) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn risk_free_only_market() {
        let sp = SpecialPortfolios::solve(&risk_free_market()).unwrap();
        assert_eq!(sp.w_y, vec![1.0]);
        assert_eq!(sp.omega_sq_y, 1.0);
        assert_eq!(sp.mu_y, 1.0);
        assert_eq!(sp.hr_sq_x, 0.0);
        assert_eq!(sp.mu_z, 1.0);
        assert_eq!(sp.sigma_sq_z, 0.0);
        assert_eq!(sp.w_z, sp.w_y);
        assert!(sp.is_degenerate());
        assert_eq!(frontier_coefficients(&sp), Err(Error::ZeroX));
        let b = check_hansen_bound(&sp);
        assert_eq!((b.hr_sq_y, b.hr_sq_x, b.slack, b.pass), (1.0, 0.0, 0.0, true));
    }

    #[test]
    fn means_proportional_to_prices_give_zero_x() {
        let g = Matrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let mkt = GramMarket::new(g, vec![0.5, 1.0], vec![1.0, 2.0]).unwrap();
        let x = solve_x(&mkt).unwrap();
        assert!(x.hr_sq < 1e-15);
        assert!(x.weights.iter().all(|w| w.abs() < 1e-14));
    }

    #[test]
    fn arbitrage_is_rejected() {
        // zero-cost long-short of two assets that replicates the unit payoff
        let a = ScenarioPayoff::new(&[(0.5, 2.0), (0.5, 1.0)]).unwrap();
        let b = ScenarioPayoff::new(&[(0.5, 1.0), (0.5, 0.0)]).unwrap();
        let mkt = gram_from_scenarios(&[a, b], vec![1.0, 1.0]).unwrap();
        assert!(matches!(solve_x(&mkt), Err(Error::ArbitrageDetected { .. })));
    }

    #[test]
    fn inconsistent_means_are_rejected() {
        // ‖B‖ = 1 but ⟨B, I⟩ = 1.5 would need ‖I‖ > 1
        let mkt = GramMarket::new(Matrix::identity(2), vec![1.5, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(SpecialPortfolios::solve(&mkt), Err(Error::HansenBoundViolated { .. })));
    }

    #[test]
    fn frontier_vertex_and_points() {
        let sp = SpecialPortfolios::solve(&reference_market()).unwrap();
        let fc = frontier_coefficients(&sp).unwrap();
        assert!((fc.sigma_sq_at(sp.mu_z) - sp.sigma_sq_z).abs() < 1e-15);
        assert_eq!(fc.omega_sq_at(sp.mu_y), sp.omega_sq_y);
        let pts = frontier_points(&fc, &[sp.mu_z, sp.mu_y, 0.3, 1.0, 1.65]);
        assert!((pts[0].sigma - sp.sigma_sq_z.sqrt()).abs() < 1e-15);
        assert!((pts[1].omega - sp.omega_sq_y.sqrt()).abs() < 1e-15);
        for p in &pts {
            assert!((p.omega * p.omega - p.mu * p.mu - p.sigma * p.sigma).abs() < 1e-10);
            // direct evaluation
            let direct = sp.omega_sq_y + (p.mu - sp.mu_y).powi(2) / sp.hr_sq_x;
            assert!((p.omega * p.omega - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn points_csv_header() {
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &[FrontierPoint { mu: 1.0, omega: 2.0, sigma: 0.5 }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "mu,omega,sigma\n1,2,0.5\n");
    }

    #[test]
    fn grid() {
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
