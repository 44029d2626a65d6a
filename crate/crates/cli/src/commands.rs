use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use hansen_core::frontier::{linear_grid, write_points_csv};
use hansen_core::kernel::{hj_report, KernelTolerances};
use hansen_core::market::SequenceMeta;
use hansen_core::monotone::{monotone_hansen_ratio_with, monotone_hj_bound_with, DirectionSearch, MonotoneBoundReport};
use hansen_core::{
    check_hansen_bound, frontier_coefficients, frontier_points, multiperiod_frontier, propagate, Error, ErrorReport,
    FrontierCoefficients, FrontierPoint, GramMarket, HJBoundReport, HansenBoundReport, MarketFile, MultiperiodStats,
    ScenarioPayoff, SpecialPortfolios,
};
use serde::Serialize;

#[derive(Debug)]
pub struct CliError {
    report: ErrorReport,
    internal: bool,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>, context: impl Into<String>) -> Self {
        let report = ErrorReport { code, message: message.into(), context: context.into() };
        Self { report, internal: false }
    }

    pub fn usage(message: &str) -> Self {
        Self::new("usage", message, "arguments")
    }

    fn io(err: io::Error, path: &Path) -> Self {
        Self::new("io", err.to_string(), path.display().to_string())
    }

    pub fn from_core(err: Error, context: impl Into<String>) -> Self {
        Self { internal: err.is_internal(), report: err.to_report(context) }
    }

    /// Prints the JSON report on stderr; exit 2 for internal failures, 1 otherwise.
    pub fn emit(&self) -> ExitCode {
        let json = serde_json::to_string(&self.report).expect("error report serializes");
        eprintln!("{json}");
        ExitCode::from(if self.internal { 2 } else { 1 })
    }
}

fn in_file(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::from_core(e, path.display().to_string())
}

pub struct GridSpec {
    pub points_csv: Option<PathBuf>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: usize,
}

impl GridSpec {
    fn validate(&self) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::new("invalid_grid", format!("grid count {} is below 2", self.count), "--grid-count"));
        }
        if let (Some(lo), Some(hi)) = (self.min, self.max) {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(CliError::new(
                    "invalid_grid",
                    format!("grid min {lo} is not below max {hi}"),
                    "--grid-min",
                ));
            }
        }
        Ok(())
    }

    /// Defaults bracket `μ_Y` and `μ_Z` with the distance between them on either side.
    fn points(&self, fc: &FrontierCoefficients) -> Vec<f64> {
        let (a, b) = (fc.mu_omega.center, fc.mu_sigma.center);
        let (lo, hi) = (a.min(b), a.max(b));
        let pad = (hi - lo).max(0.1 * hi.abs().max(1.0));
        linear_grid(self.min.unwrap_or(lo - pad), self.max.unwrap_or(hi + pad), self.count)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(e, path))
}

fn load_market(path: &Path) -> Result<GramMarket, CliError> {
    let text = read_text(path)?;
    MarketFile::from_json(&text).and_then(|f| f.build()).map_err(in_file(path))
}

fn load_payoff(path: &Path, renormalize: bool) -> Result<ScenarioPayoff, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(e, path))?;
    ScenarioPayoff::from_csv(file, renormalize).map_err(in_file(path))
}

pub fn write_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(value).expect("reports serialize");
    json.push('\n');
    match output {
        Some(path) => fs::write(path, json).map_err(|e| CliError::io(e, path)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(json.as_bytes()).map_err(|e| CliError::io(e, Path::new("<stdout>")))
        }
    }
}

fn write_points(path: &Path, points: &[FrontierPoint]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(e, path))?;
    let mut out = BufWriter::new(file);
    write_points_csv(&mut out, points).and_then(|_| out.flush()).map_err(|e| CliError::io(e, path))
}

/// Parabolas, or `None` for a degenerate frontier (`X = 0`).
fn coefficients(
    result: hansen_core::Result<FrontierCoefficients>,
    context: &str,
) -> Result<Option<FrontierCoefficients>, CliError> {
    match result {
        Ok(fc) => Ok(Some(fc)),
        Err(Error::ZeroX) => Ok(None),
        Err(e) => Err(CliError::from_core(e, context)),
    }
}

/// Frontier points over the grid; a degenerate frontier is the single point of `Y`.
fn emit_points(grid: &GridSpec, fc: Option<&FrontierCoefficients>, mu_y: f64, omega_sq_y: f64) -> Result<(), CliError> {
    let Some(path) = &grid.points_csv else { return Ok(()) };
    let points = match fc {
        Some(fc) => frontier_points(fc, &grid.points(fc)),
        None => vec![FrontierPoint {
            mu: mu_y,
            omega: omega_sq_y.sqrt(),
            sigma: (omega_sq_y - mu_y * mu_y).max(0.0).sqrt(),
        }],
    };
    write_points(path, &points)
}

#[derive(Serialize)]
struct FrontierReport<'a> {
    special_portfolios: &'a SpecialPortfolios,
    degenerate: bool,
    frontier: Option<FrontierCoefficients>,
    hansen_bound: HansenBoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sequence: Option<SequenceMeta>,
}

pub fn frontier(input: &Path, output: Option<&Path>, grid: &GridSpec) -> Result<(), CliError> {
    grid.validate()?;
    let mkt = load_market(input)?;
    let sp = SpecialPortfolios::solve(&mkt).map_err(in_file(input))?;
    let fc = coefficients(frontier_coefficients(&sp), "frontier")?;
    emit_points(grid, fc.as_ref(), sp.mu_y, sp.omega_sq_y)?;
    let report = FrontierReport {
        special_portfolios: &sp,
        degenerate: fc.is_none(),
        frontier: fc,
        hansen_bound: check_hansen_bound(&sp),
        sequence: mkt.sequence_meta().copied(),
    };
    write_json(&report, output)
}

#[derive(Serialize)]
struct MultiperiodReport<'a> {
    periods: usize,
    one_period: &'a SpecialPortfolios,
    multiperiod: MultiperiodStats,
    degenerate: bool,
    frontier: Option<FrontierCoefficients>,
}

pub fn multiperiod(input: &Path, output: Option<&Path>, periods: usize, grid: &GridSpec) -> Result<(), CliError> {
    grid.validate()?;
    let mkt = load_market(input)?;
    let sp = SpecialPortfolios::solve(&mkt).map_err(in_file(input))?;
    let mp = propagate(&sp, periods).map_err(|e| CliError::from_core(e, "--periods"))?;
    let fc = coefficients(multiperiod_frontier(&mp), "multiperiod frontier")?;
    emit_points(grid, fc.as_ref(), mp.mu_y, mp.omega_sq_y)?;
    let report =
        MultiperiodReport { periods, one_period: &sp, multiperiod: mp, degenerate: fc.is_none(), frontier: fc };
    write_json(&report, output)
}

pub fn mhr(input: &Path, output: Option<&Path>, allow_no_downside: bool, renormalize: bool) -> Result<(), CliError> {
    let w = load_payoff(input, renormalize)?;
    let result = monotone_hansen_ratio_with(&w, allow_no_downside).map_err(in_file(input))?;
    write_json(&result, output)
}

pub struct HjOptions {
    pub kernels: Vec<PathBuf>,
    pub monotone: bool,
    pub renormalize: bool,
    pub pricing_tol: f64,
    pub bound_tol: f64,
}

#[derive(Serialize)]
struct HjReport {
    #[serde(flatten)]
    bounds: HJBoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    monotone: Option<Vec<MonotoneBoundReport>>,
}

fn positive(value: f64, flag: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::new("invalid_tolerance", format!("tolerance {value} must be positive"), flag))
    }
}

pub fn hj(input: &Path, output: Option<&Path>, opts: &HjOptions) -> Result<(), CliError> {
    let tol = KernelTolerances {
        pricing: positive(opts.pricing_tol, "--pricing-tol")?,
        bound: positive(opts.bound_tol, "--bound-tol")?,
    };
    if opts.monotone && opts.kernels.is_empty() {
        return Err(CliError::new("missing_kernel", "the monotone bound needs at least one --kernel", "--monotone"));
    }
    let mkt = load_market(input)?;
    let kernels = opts.kernels.iter().map(|path| load_payoff(path, opts.renormalize)).collect::<Result<Vec<_>, _>>()?;
    let bounds = hj_report(&mkt, &kernels, tol).map_err(|e| CliError::from_core(e, "--kernel"))?;
    let monotone = if opts.monotone {
        let search = DirectionSearch { pricing_tol: tol.pricing, bound_tol: tol.bound, ..DirectionSearch::default() };
        let reports = kernels
            .iter()
            .zip(&opts.kernels)
            .map(|(m, path)| monotone_hj_bound_with(&mkt, m, search).map_err(in_file(path)))
            .collect::<Result<Vec<_>, _>>()?;
        Some(reports)
    } else {
        None
    };
    write_json(&HjReport { bounds, monotone }, output)
}
