//! Replays the embedded three-asset example.

use std::path::Path;

use hansen_core::reference::{self, Published};
use hansen_core::{gram_from_universe, multiperiod_frontier, propagate, SpecialPortfolios};
use serde::Serialize;

use crate::commands::{write_json, CliError};

const REL_TOL: f64 = 1e-5;
const EXACT_TOL: f64 = 1e-12;

#[derive(Serialize)]
struct Comparison {
    name: &'static str,
    computed: f64,
    printed: f64,
    rel_delta: f64,
    within_tolerance: bool,
    rounds_to_printed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_delta: Option<f64>,
}

impl Comparison {
    fn new(p: &Published, computed: f64) -> Self {
        let rel_delta = (computed - p.printed).abs() / p.printed.abs();
        let exact = p.exact_value();
        Self {
            name: p.name,
            computed,
            printed: p.printed,
            rel_delta,
            within_tolerance: rel_delta <= REL_TOL,
            rounds_to_printed: p.rounds_to_printed(computed),
            exact,
            exact_delta: exact.map(|e| (computed - e).abs()),
        }
    }

    fn ok(&self) -> bool {
        self.rounds_to_printed && self.exact_delta.is_none_or(|d| d <= EXACT_TOL)
    }
}

#[derive(Serialize)]
struct VerifyReport {
    periods: usize,
    rel_tolerance: f64,
    one_period: Vec<Comparison>,
    multiperiod: Vec<Comparison>,
    all_within_tolerance: bool,
    /// Every value rounds to its printed decimals and matches any exact fraction.
    pass: bool,
}

pub fn run(output: Option<&Path>) -> Result<(), CliError> {
    let report = build().map_err(|e| CliError::from_core(e, "embedded example"))?;
    write_json(&report, output)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::from_core(
            hansen_core::Error::Invariant("embedded example no longer reproduces the published values".into()),
            "verify",
        ))
    }
}

fn build() -> hansen_core::Result<VerifyReport> {
    let mkt = gram_from_universe(&reference::three_asset_universe())?;
    let sp = SpecialPortfolios::solve(&mkt)?;
    let one = [sp.omega_sq_y, sp.mu_y, sp.mu_y / sp.omega_sq_y, sp.hr_sq_y, sp.hr_sq_x, sp.hr_sq_x + sp.hr_sq_y];
    let one_period: Vec<Comparison> =
        reference::ONE_PERIOD.iter().zip(one).map(|(p, x)| Comparison::new(p, x)).collect();

    let mp = propagate(&sp, reference::PERIODS)?;
    let fc = multiperiod_frontier(&mp)?;
    let multi = [
        mp.hr_sq_x,
        mp.mu_y,
        mp.omega_sq_y,
        fc.mu_omega.slope,
        fc.mu_sigma.center,
        fc.mu_sigma.intercept,
        fc.mu_sigma.slope,
    ];
    let multiperiod: Vec<Comparison> =
        reference::MULTI_PERIOD.iter().zip(multi).map(|(p, x)| Comparison::new(p, x)).collect();

    let all = || one_period.iter().chain(&multiperiod);
    let all_within_tolerance = all().all(|c| c.within_tolerance);
    let pass = all().all(Comparison::ok);
    Ok(VerifyReport {
        periods: reference::PERIODS,
        rel_tolerance: REL_TOL,
        one_period,
        multiperiod,
        all_within_tolerance,
        pass,
    })
}
