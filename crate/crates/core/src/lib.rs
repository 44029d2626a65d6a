//! Mean-variance portfolio theory organized around the Hansen ratio
//! `HR_W = E[W] / ‖W‖`.
//!
//! The crate works with markets given by a Gram matrix, a mean functional
//! and prices ([`market`]), solves for the special portfolios `X`, `Y`, `Z`
//! and the efficient frontier ([`frontier`]), derives pricing-kernel bounds
//! ([`kernel`]), the monotone Hansen and Sharpe ratios ([`monotone`]) and
//! propagates one-period statistics to an IID multiperiod horizon
//! ([`multiperiod`]).

pub mod error;
pub mod frontier;
pub mod kernel;
pub mod linalg;
pub mod market;
pub mod moments;
pub mod monotone;
pub mod multiperiod;
pub mod reference;

pub use error::{Error, ErrorReport, Result};
pub use frontier::{
    check_hansen_bound, frontier_coefficients, frontier_from_moments, frontier_points, solve_x, solve_y, solve_z,
    FrontierCoefficients, FrontierPoint, HansenBoundReport, SpecialPortfolios,
};
pub use kernel::{check_kernel, hj_bounds, kernel_frontier, HJBoundReport, KernelDiagnostics, KernelFrontier};
pub use market::{
    gram_from_scenarios, gram_from_sequence_space, gram_from_universe, AssetUniverse, GramMarket, MarketFile,
    SequenceSpaceSpec,
};
pub use moments::{hr_to_sr, sr_to_hr, stats, RatioStats, ScenarioPayoff, Sharpe};
pub use monotone::{
    monotone_hansen_ratio, monotone_hj_bound, monotone_sharpe_ratio, monotonized_utility, MonotoneResult,
};
pub use multiperiod::{multiperiod_frontier, propagate, tree_oracle, MultiperiodStats, ScenarioTree};
