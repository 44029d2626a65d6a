//! Markets described by a finite spanning set of payoffs.
//!
//! Everything downstream needs only three objects: the Gram matrix
//! `G_ij = ⟨B_i, B_j⟩`, the mean functional `m_i = ⟨B_i, I⟩` where `I` is the
//! unit-norm risk-free element, and the price vector `p_i = π(B_i)`. The
//! classical case is `L²` with `I = 1`; the discounted sequence space is the
//! other builder provided here. Scenario-backed markets also keep the basis
//! payoffs so that portfolios can be evaluated state by state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{compensated_sum, dot, Cholesky, Matrix};
use crate::moments::{validate_probabilities, ScenarioPayoff, PROBABILITY_TOL};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const DEFAULT_HORIZON: usize = 64;

/// Risky assets given by mean total returns and a covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetUniverse {
    mean_returns: Vec<f64>,
    covariance: Matrix,
}

impl AssetUniverse {
    pub fn new(mean_returns: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if mean_returns.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if covariance.dim() != mean_returns.len() {
            return Err(Error::DimensionMismatch { expected: mean_returns.len(), found: covariance.dim() });
        }
        check_symmetric(&covariance)?;
        Cholesky::new(&covariance)?;
        Ok(Self { mean_returns, covariance })
    }

    pub fn len(&self) -> usize {
        self.mean_returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_returns.is_empty()
    }

    pub fn mean_returns(&self) -> &[f64] {
        &self.mean_returns
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// A scenario model with `n + 1` equally likely states whose returns
    /// have exactly these means and covariances.
    ///
    /// Uses `R = μ + L e` with `Σ = L Lᵀ` and `e` built from Helmert
    /// contrasts, which are centred, unit-variance and uncorrelated under
    /// the uniform measure.
    pub fn lift_to_scenarios(&self) -> Result<Vec<ScenarioPayoff>> {
        let n = self.len();
        let states = n + 1;
        let l = Cholesky::new(&self.covariance)?.factor().clone();
        let scale = (states as f64).sqrt();
        // shocks[k][s]
        let shocks: Vec<Vec<f64>> = (1..=n)
            .map(|k| {
                let norm = ((k * (k + 1)) as f64).sqrt();
                (0..states)
                    .map(|s| {
                        let h = match s.cmp(&k) {
                            std::cmp::Ordering::Less => 1.0,
                            std::cmp::Ordering::Equal => -(k as f64),
                            std::cmp::Ordering::Greater => 0.0,
                        };
                        scale * h / norm
                    })
                    .collect()
            })
            .collect();
        let probs = vec![1.0 / states as f64; states];
        (0..n)
            .map(|i| {
                let values = (0..states)
                    .map(|s| self.mean_returns[i] + compensated_sum((0..=i).map(|k| l[(i, k)] * shocks[k][s])))
                    .collect();
                ScenarioPayoff::from_parts(probs.clone(), values)
            })
            .collect()
    }
}

fn check_symmetric(a: &Matrix) -> Result<()> {
    let scale = (0..a.dim()).map(|i| a[(i, i)].abs()).fold(1.0_f64, f64::max);
    let asymmetry = a.max_asymmetry();
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Basis payoffs on a shared finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBasis {
    probs: Vec<f64>,
    payoffs: Vec<Vec<f64>>,
}

impl ScenarioBasis {
    pub fn new(basis: &[ScenarioPayoff]) -> Result<Self> {
        let first = basis.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        if basis.iter().any(|b| !b.same_space(first)) {
            return Err(Error::StateSpaceMismatch);
        }
        Ok(Self { probs: first.probs().to_vec(), payoffs: basis.iter().map(|b| b.values().to_vec()).collect() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_assets(&self) -> usize {
        self.payoffs.len()
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn payoff(&self, i: usize) -> ScenarioPayoff {
        ScenarioPayoff::from_parts(self.probs.clone(), self.payoffs[i].clone())
            .expect("basis probabilities were validated")
    }

    pub fn payoffs(&self) -> Vec<ScenarioPayoff> {
        (0..self.n_assets()).map(|i| self.payoff(i)).collect()
    }

    /// Payoff of the portfolio with weights `w`.
    pub fn combine(&self, w: &[f64]) -> ScenarioPayoff {
        assert_eq!(w.len(), self.n_assets(), "weight vector length");
        let values = (0..self.n_states())
            .map(|s| compensated_sum(w.iter().zip(&self.payoffs).map(|(wi, b)| wi * b[s])))
            .collect();
        ScenarioPayoff::from_parts(self.probs.clone(), values).expect("basis probabilities were validated")
    }

    /// The constant payoff 1 on this state space.
    pub fn unit(&self) -> ScenarioPayoff {
        ScenarioPayoff::from_parts(self.probs.clone(), vec![1.0; self.n_states()])
            .expect("basis probabilities were validated")
    }

    /// `E[x B_i]` for every basis payoff.
    pub fn inner_with_basis(&self, x: &ScenarioPayoff) -> Result<Vec<f64>> {
        let unit = self.unit();
        if !unit.same_space(x) {
            return Err(Error::StateSpaceMismatch);
        }
        Ok(self.payoffs.iter().map(|b| self.expect_product(b, x.values())).collect())
    }

    fn expect_product(&self, a: &[f64], b: &[f64]) -> f64 {
        compensated_sum(self.probs.iter().zip(a.iter().zip(b)).map(|(p, (x, y))| p * x * y))
    }
}

/// Normalization data for a discounted sequence-space market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceMeta {
    pub beta: f64,
    pub horizon: usize,
    /// Raw squared norm of the unit cash flow.
    pub unit_norm_sq: f64,
    /// `I` is the unit cash flow multiplied by this factor, so that `⟨I,I⟩ = 1`.
    pub unit_scale: f64,
    /// Discounted weight dropped by truncation, `β^(N+1) / (1 − β)`.
    pub truncation_tail: f64,
}

/// Gram matrix, mean functional and prices of a finite spanning set.
#[derive(Debug, Clone)]
pub struct GramMarket {
    gram: Matrix,
    means: Vec<f64>,
    prices: Vec<f64>,
    scenarios: Option<ScenarioBasis>,
    sequence: Option<SequenceMeta>,
    chol: Cholesky,
}

impl GramMarket {
    pub fn new(gram: Matrix, means: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        let n = gram.dim();
        for len in [means.len(), prices.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if gram.to_rows().iter().flatten().chain(&means).chain(&prices).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite market input".into()));
        }
        check_symmetric(&gram)?;
        let chol = Cholesky::new(&gram)?;
        if prices.iter().all(|&p| p == 0.0) {
            return Err(Error::DegeneratePrices);
        }
        Ok(Self { gram, means, prices, scenarios: None, sequence: None, chol })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn scenarios(&self) -> Option<&ScenarioBasis> {
        self.scenarios.as_ref()
    }

    pub fn sequence_meta(&self) -> Option<&SequenceMeta> {
        self.sequence.as_ref()
    }

    pub(crate) fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// ⟨a, b⟩ for portfolios given by weights.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.gram.bilinear(a, b)
    }

    pub fn mean_of(&self, w: &[f64]) -> f64 {
        dot(&self.means, w)
    }

    pub fn cost_of(&self, w: &[f64]) -> f64 {
        dot(&self.prices, w)
    }
}

/// Classical market: `G = Σ + μμᵀ`, `m = μ`, unit prices.
pub fn gram_from_universe(u: &AssetUniverse) -> Result<GramMarket> {
    let mu = u.mean_returns();
    let sigma = u.covariance();
    let gram = Matrix::from_fn(u.len(), |i, j| sigma[(i, j)] + mu[i] * mu[j]);
    GramMarket::new(gram, mu.to_vec(), vec![1.0; u.len()])
}

/// Scenario-backed market in `L²` of the states.
pub fn gram_from_scenarios(basis: &[ScenarioPayoff], prices: Vec<f64>) -> Result<GramMarket> {
    let sb = ScenarioBasis::new(basis)?;
    if prices.len() != sb.n_assets() {
        return Err(Error::DimensionMismatch { expected: sb.n_assets(), found: prices.len() });
    }
    let n = sb.n_assets();
    let gram = Matrix::from_fn(n, |i, j| sb.expect_product(&sb.payoffs[i], &sb.payoffs[j]));
    let means = (0..n).map(|i| basis[i].mean()).collect();
    let mut market = GramMarket::new(gram, means, prices)?;
    market.scenarios = Some(sb);
    Ok(market)
}

/// Basis of random cash-flow streams in the discounted sequence space
/// `‖V‖² = β/(1−β) Σ_{n=1..N} βⁿ E[v_n²]`.
///
/// `cash_flows[i][s]` is the stream of basis element `i` in state `s`,
/// indexed by date `1..=N`. Rows shorter than the horizon are extended by
/// repeating their last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpaceSpec {
    pub beta: f64,
    pub horizon: usize,
    pub probs: Vec<f64>,
    pub cash_flows: Vec<Vec<Vec<f64>>>,
}

impl SequenceSpaceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidBeta { beta: self.beta });
        }
        if self.horizon == 0 {
            return Err(Error::InvalidHorizon(0));
        }
        validate_probabilities(&self.probs, PROBABILITY_TOL)?;
        for flows in &self.cash_flows {
            if flows.len() != self.probs.len() {
                return Err(Error::DimensionMismatch { expected: self.probs.len(), found: flows.len() });
            }
            for row in flows {
                if row.is_empty() || row.len() > self.horizon {
                    return Err(Error::DimensionMismatch { expected: self.horizon, found: row.len() });
                }
            }
        }
        Ok(())
    }

    fn flow_at(row: &[f64], date: usize) -> f64 {
        row[(date - 1).min(row.len() - 1)]
    }

    fn weight(&self, date: usize) -> f64 {
        self.beta / (1.0 - self.beta) * self.beta.powi(date as i32)
    }

    /// Discounted inner product of two state-by-date cash-flow tables.
    pub fn inner(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        compensated_sum((1..=self.horizon).flat_map(|date| {
            let w = self.weight(date);
            self.probs
                .iter()
                .zip(a.iter().zip(b))
                .map(move |(p, (ra, rb))| w * p * Self::flow_at(ra, date) * Self::flow_at(rb, date))
        }))
    }

    /// Raw squared norm of the unit cash flow, summed in closed form.
    pub fn unit_norm_sq(&self) -> f64 {
        let b = self.beta;
        b / (1.0 - b) * b * (1.0 - b.powi(self.horizon as i32)) / (1.0 - b)
    }

    pub fn meta(&self) -> SequenceMeta {
        let unit_norm_sq = self.unit_norm_sq();
        SequenceMeta {
            beta: self.beta,
            horizon: self.horizon,
            unit_norm_sq,
            unit_scale: 1.0 / unit_norm_sq.sqrt(),
            truncation_tail: self.beta.powi(self.horizon as i32 + 1) / (1.0 - self.beta),
        }
    }
}

/// Sequence-space market; `I` is the unit cash flow rescaled to unit norm.
pub fn gram_from_sequence_space(spec: &SequenceSpaceSpec, prices: Vec<f64>) -> Result<GramMarket> {
    spec.validate()?;
    let n = spec.cash_flows.len();
    if prices.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: prices.len() });
    }
    let meta = spec.meta();
    let unit: Vec<Vec<f64>> = vec![vec![meta.unit_scale]; spec.probs.len()];
    let gram = Matrix::from_fn(n, |i, j| spec.inner(&spec.cash_flows[i], &spec.cash_flows[j]));
    let means = spec.cash_flows.iter().map(|cf| spec.inner(cf, &unit)).collect();
    let mut market = GramMarket::new(gram, means, prices)?;
    market.sequence = Some(meta);
    Ok(market)
}

/// Market description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MarketFile {
    Universe {
        mu: Vec<f64>,
        sigma: Vec<Vec<f64>>,
    },
    Gram {
        #[serde(rename = "G")]
        gram: Vec<Vec<f64>>,
        m: Vec<f64>,
        p: Vec<f64>,
    },
    Sequence {
        beta: f64,
        #[serde(default = "default_horizon")]
        horizon: usize,
        probabilities: Vec<f64>,
        /// basis × state × date
        cash_flows: Vec<Vec<Vec<f64>>>,
        p: Vec<f64>,
    },
    Scenarios {
        probabilities: Vec<f64>,
        /// basis × state
        payoffs: Vec<Vec<f64>>,
        p: Vec<f64>,
    },
}

fn default_horizon() -> usize {
    DEFAULT_HORIZON
}

impl MarketFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<GramMarket> {
        match self {
            MarketFile::Universe { mu, sigma } => {
                let u = AssetUniverse::new(mu.clone(), Matrix::from_rows(sigma)?)?;
                gram_from_universe(&u)
            }
            MarketFile::Gram { gram, m, p } => GramMarket::new(Matrix::from_rows(gram)?, m.clone(), p.clone()),
            MarketFile::Sequence { beta, horizon, probabilities, cash_flows, p } => {
                let spec = SequenceSpaceSpec {
                    beta: *beta,
                    horizon: *horizon,
                    probs: probabilities.clone(),
                    cash_flows: cash_flows.clone(),
                };
                gram_from_sequence_space(&spec, p.clone())
            }
            MarketFile::Scenarios { probabilities, payoffs, p } => {
                let basis = payoffs
                    .iter()
                    .map(|v| ScenarioPayoff::from_parts(probabilities.clone(), v.clone()))
                    .collect::<Result<Vec<_>>>()?;
                gram_from_scenarios(&basis, p.clone())
            }
        }
    }
}
