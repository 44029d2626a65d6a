//! Moments and ratios of payoffs on a finite probability space.
//!
//! A [`ScenarioPayoff`] is a random variable on finitely many states. Every
//! statistic here is an exact probability-weighted sum, evaluated with
//! compensated summation.

use std::io::Read;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

/// Tolerance on `|sum(p) - 1|`.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// A payoff on a finite state space: one probability and one value per state.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPayoff {
    probs: Vec<f64>,
    values: Vec<f64>,
}

impl ScenarioPayoff {
    /// Builds a payoff from `(probability, value)` pairs.
    pub fn new(states: &[(f64, f64)]) -> Result<Self> {
        let (probs, values) = states.iter().copied().unzip();
        Self::from_parts(probs, values)
    }

    pub fn from_parts(probs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_parts_with_tol(probs, values, PROBABILITY_TOL)
    }

    pub fn from_parts_with_tol(probs: Vec<f64>, values: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: probs.len(), found: values.len() });
        }
        validate_probabilities(&probs, tol)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite payoff value".into()));
        }
        Ok(Self { probs, values })
    }

    /// Like [`ScenarioPayoff::from_parts`] but rescales positive weights to
    /// sum to one instead of rejecting them.
    pub fn renormalized(mut probs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| *p <= 0.0 || !p.is_finite()) {
            return Err(Error::InvalidProbabilities { sum: compensated_sum(probs.iter().copied()) });
        }
        let total = compensated_sum(probs.iter().copied());
        for p in &mut probs {
            *p /= total;
        }
        Self::from_parts_with_tol(probs, values, 1e-9)
    }

    /// The payoff that equals `c` in every state.
    pub fn constant(c: f64) -> Self {
        Self { probs: vec![1.0], values: vec![c] }
    }

    /// Reads the two-column `probability,value` CSV format. A header row is
    /// optional and detected by failing to parse as numbers.
    pub fn from_csv<R: Read>(reader: R, renormalize: bool) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut probs = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::Parse(format!("line {}: expected 2 columns, found {}", line + 1, record.len())));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(p), Ok(v)) => {
                    probs.push(p);
                    values.push(v);
                }
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!("line {}: not a number", line + 1)));
                }
            }
        }
        if renormalize {
            Self::renormalized(probs, values)
        } else {
            Self::from_parts(probs, values)
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn states(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.probs.iter().copied().zip(self.values.iter().copied())
    }

    /// E[f(W)]
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(self.states().map(|(p, v)| p * f(v)))
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|v| v * v)
    }

    /// Payoff with the same probabilities and values `f(w)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { probs: self.probs.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Statewise `f(self, other)` on a common state space.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_space(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { probs: self.probs.clone(), values })
    }

    /// E[self · other]
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(compensated_sum(self.probs.iter().zip(self.values.iter().zip(&other.values)).map(|(p, (a, b))| p * a * b)))
    }

    pub fn scale(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// `W ∧ k`
    pub fn truncate(&self, k: f64) -> Self {
        self.map(|v| v.min(k))
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.probs.len() == other.probs.len()
            && self.probs.iter().zip(&other.probs).all(|(a, b)| (a - b).abs() <= 1e-14)
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::StateSpaceMismatch)
        }
    }
}

pub(crate) fn validate_probabilities(probs: &[f64], tol: f64) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::EmptyPayoff);
    }
    let sum = compensated_sum(probs.iter().copied());
    if probs.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) || (sum - 1.0).abs() > tol {
        return Err(Error::InvalidProbabilities { sum });
    }
    Ok(())
}

/// A Sharpe-type ratio, which is infinite for a risk-free payoff with
/// nonzero mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sharpe {
    Finite(f64),
    PosInfinite,
    NegInfinite,
}

impl Sharpe {
    pub fn finite(self) -> Option<f64> {
        match self {
            Sharpe::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, Sharpe::Finite(_))
    }

    /// Squared ratio, `None` when infinite.
    pub fn squared(self) -> Option<f64> {
        self.finite().map(|v| v * v)
    }
}

/// Finite values serialize as numbers, infinite ones as `"+inf"`/`"-inf"`.
impl Serialize for Sharpe {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Sharpe::Finite(v) => s.serialize_f64(*v),
            Sharpe::PosInfinite => s.serialize_str("+inf"),
            Sharpe::NegInfinite => s.serialize_str("-inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioStats {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub hansen: f64,
    pub sharpe: Sharpe,
}

impl RatioStats {
    pub fn hansen_sq(&self) -> f64 {
        self.hansen * self.hansen
    }
}

/// Mean, second moment, variance, Hansen ratio and Sharpe ratio of `w`.
pub fn stats(w: &ScenarioPayoff) -> Result<RatioStats> {
    let mean = w.mean();
    let second_moment = w.second_moment();
    if second_moment == 0.0 {
        return Err(Error::ZeroPayoff);
    }
    // two-pass, so a constant payoff has exactly zero variance
    let variance = w.expect(|v| (v - mean) * (v - mean));
    let (hansen, sharpe) = if variance == 0.0 {
        let sign = mean.signum();
        (sign, if sign > 0.0 { Sharpe::PosInfinite } else { Sharpe::NegInfinite })
    } else {
        (mean / second_moment.sqrt(), Sharpe::Finite(mean / variance.sqrt()))
    };
    Ok(RatioStats { mean, second_moment, variance, hansen, sharpe })
}

/// Sharpe ratio with the same Hansen ratio: `hr / sqrt(1 - hr²)`.
pub fn hr_to_sr(hr: f64) -> Result<f64> {
    if hr.is_nan() || hr.abs() >= 1.0 {
        return Err(Error::OutOfRange { value: hr, range: "(-1, 1)" });
    }
    Ok(hr / ((1.0 - hr) * (1.0 + hr)).sqrt())
}

/// Inverse of [`hr_to_sr`]: `sr / sqrt(1 + sr²)`.
pub fn sr_to_hr(sr: f64) -> f64 {
    if sr.is_infinite() {
        return sr.signum();
    }
    sr / sr.hypot(1.0)
}

/// `SR²` from `HR²`; infinite at `HR² = 1`.
pub fn hr_sq_to_sr_sq(hr_sq: f64) -> Sharpe {
    if hr_sq >= 1.0 {
        Sharpe::PosInfinite
    } else {
        Sharpe::Finite(hr_sq / (1.0 - hr_sq))
    }
}

/// Quadratic utility `U(x) = x - x²/2` with bliss point 1.
pub fn quadratic_u(x: f64) -> f64 {
    x - 0.5 * x * x
}

/// E[U(W)] = μ − ω²/2
pub fn quadratic_utility(w: &ScenarioPayoff) -> f64 {
    w.mean() - 0.5 * w.second_moment()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledUtility {
    /// max over α of E[U(αW)], equal to HR²/2
    pub value: f64,
    pub alpha: f64,
}

/// Best expected quadratic utility of `αW` over scalar `α`.
pub fn optimal_scaled_utility(w: &ScenarioPayoff) -> Result<ScaledUtility> {
    let s = stats(w)?;
    if s.mean == 0.0 {
        return Ok(ScaledUtility { value: 0.0, alpha: 0.0 });
    }
    Ok(ScaledUtility { value: 0.5 * s.mean * s.mean / s.second_moment, alpha: s.mean / s.second_moment })
}

/// Supremum of `HR²(V + βW)` over β for orthogonal `V`, `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalSup {
    pub hr_sq: f64,
    /// Maximizing β; `None` when the supremum is only approached as |β| → ∞.
    pub beta: Option<f64>,
}

/// Tolerance on `|E[VW]| / (‖V‖ ‖W‖)` for treating two payoffs as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

pub fn orthogonal_sup(v: &ScenarioPayoff, w: &ScenarioPayoff) -> Result<OrthogonalSup> {
    let sv = stats(v)?;
    let sw = stats(w)?;
    let cross = v.inner(w)?;
    let scale = (sv.second_moment * sw.second_moment).sqrt();
    if cross.abs() > ORTHOGONALITY_TOL * scale {
        return Err(Error::Invariant(format!("payoffs are not orthogonal: E[VW] = {cross:e}")));
    }
    let hr_sq = sv.hansen_sq() + sw.hansen_sq();
    // Utility-optimal mix is (μ_V/ω²_V) V + (μ_W/ω²_W) W; rescale so V has weight one.
    let beta = if sv.mean == 0.0 { None } else { Some((sw.mean / sw.second_moment) / (sv.mean / sv.second_moment)) };
    Ok(OrthogonalSup { hr_sq, beta })
}
