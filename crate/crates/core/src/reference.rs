//! Embedded three-asset IID example (mean returns and covariance of one
//! period total returns) and the published summary values derived from it.

use crate::linalg::Matrix;
use crate::market::AssetUniverse;

pub const MEAN_RETURNS: [f64; 3] = [1.162, 1.246, 1.228];

pub const COVARIANCE: [[f64; 3]; 3] = [[0.0146, 0.0187, 0.0145], [0.0187, 0.0854, 0.0104], [0.0145, 0.0104, 0.0289]];

/// Horizon used by the published multiperiod values.
pub const PERIODS: usize = 4;

pub fn three_asset_universe() -> AssetUniverse {
    let sigma = Matrix::from_fn(3, |i, j| COVARIANCE[i][j]);
    AssetUniverse::new(MEAN_RETURNS.to_vec(), sigma).expect("embedded covariance is positive definite")
}

/// A published value, given as a rounded decimal and optionally as an exact
/// fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Published {
    pub name: &'static str,
    pub printed: f64,
    /// Number of decimals shown in the printed value.
    pub decimals: u32,
    pub exact: Option<(u128, u128)>,
}

impl Published {
    const fn decimal(name: &'static str, printed: f64, decimals: u32) -> Self {
        Self { name, printed, decimals, exact: None }
    }

    const fn fraction(name: &'static str, printed: f64, decimals: u32, num: u128, den: u128) -> Self {
        Self { name, printed, decimals, exact: Some((num, den)) }
    }

    pub fn exact_value(&self) -> Option<f64> {
        self.exact.map(|(n, d)| n as f64 / d as f64)
    }

    /// Whether `x` rounds to the printed decimal.
    pub fn rounds_to_printed(&self, x: f64) -> bool {
        let half_unit = 0.5 * 10f64.powi(-(self.decimals as i32));
        (x - self.printed).abs() <= half_unit * (1.0 + 1e-9)
    }
}

pub const OMEGA_SQ_Y: Published = Published::fraction("omega_sq_y", 0.87107, 5, 14_224_270_253, 16_329_740_000);
pub const MU_Y: Published = Published::fraction("mu_y", 0.74242, 5, 3_030_887, 4_082_435);
pub const MU_Y_OVER_OMEGA_SQ_Y: Published =
    Published::fraction("mu_y_over_omega_sq_y", 0.85231, 5, 12_123_548_000, 14_224_270_253);
pub const HR_SQ_Y: Published =
    Published::fraction("hr_sq_y", 0.63278, 5, 7_349_020_805_415_200, 11_613_931_746_061_211);
pub const HR_SQ_X: Published = Published::fraction("hr_sq_x", 0.35665, 5, 582_399, 1_632_974);
pub const HR_SQ_X_PLUS_Y: Published =
    Published::fraction("hr_sq_x_plus_hr_sq_y", 0.98943, 5, 28_147_713_781, 28_448_540_506);

pub const ONE_PERIOD: [Published; 6] = [OMEGA_SQ_Y, MU_Y, MU_Y_OVER_OMEGA_SQ_Y, HR_SQ_Y, HR_SQ_X, HR_SQ_X_PLUS_Y];

pub const HR_SQ_X_N: Published = Published::decimal("hr_sq_x_n", 0.81550, 5);
pub const MU_Y_N: Published = Published::decimal("mu_y_n", 0.30381, 5);
pub const OMEGA_SQ_Y_N: Published = Published::decimal("omega_sq_y_n", 0.57571, 5);
pub const INV_HR_SQ_X_N: Published = Published::decimal("inv_hr_sq_x_n", 1.22625, 5);
pub const MU_Z_N: Published = Published::decimal("mu_z_n", 1.64663, 5);
pub const SIGMA_SQ_Z_N: Published = Published::decimal("sigma_sq_z_n", 0.075446, 6);
pub const INV_SR_SQ_X_N: Published = Published::decimal("inv_sr_sq_x_n", 0.22625, 5);

pub const MULTI_PERIOD: [Published; 7] =
    [HR_SQ_X_N, MU_Y_N, OMEGA_SQ_Y_N, INV_HR_SQ_X_N, MU_Z_N, SIGMA_SQ_Z_N, INV_SR_SQ_X_N];
