//! The block-mean change tests.
//!
//! Both statistics compare the means of non-overlapping blocks. Under a
//! constant mean they are asymptotically standard normal after scaling;
//! any non-constant mean pushes them towards `+inf`, so p-values are upper
//! tail probabilities.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::decorrelate::{whiten_grid, DecorrelateOptions};
use crate::error::{Error, Result};
use crate::grid::{block_means, make_partition, sample_variance, BlockPartition, Grid};

/// Asymptotic variance of the centered, scaled GMD: `4/3 + (8/pi)(sqrt 3 - 2)`.
pub fn gmd_asymptotic_variance() -> f64 {
    4.0 / 3.0 + 8.0 / PI * (3f64.sqrt() - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// Gini's mean difference of the block means.
    Gmd,
    /// Scaled between-block variance.
    Var,
}

impl TestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TestKind::Gmd => "gmd",
            TestKind::Var => "var",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmd" => Ok(TestKind::Gmd),
            "var" => Ok(TestKind::Var),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub kind: TestKind,
    /// `U` for GMD, `sum (mu_hk - mean)^2` for Var.
    pub raw: f64,
    /// Standardized statistic, asymptotically N(0, 1) under a constant mean.
    pub statistic: f64,
    pub p_value: f64,
    pub partition: BlockPartition,
    pub sigma2_hat: f64,
    pub n: usize,
    pub m: usize,
    pub decorrelated: bool,
}

/// Upper tail probability `1 - Phi(z)`.
pub fn p_value(statistic: f64) -> f64 {
    0.5 * erfc(statistic / std::f64::consts::SQRT_2)
}

/// Mean absolute difference over all unordered pairs of block means,
/// computed from the order statistics in `O(B log B)`.
pub fn gmd_u(block_means: &DMatrix<f64>) -> Result<f64> {
    let b = block_means.len();
    if b < 2 {
        return Err(Error::TooFewBlocks(b));
    }
    let mut sorted: Vec<f64> = block_means.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let bf = b as f64;
    // the weights sum to zero, so measuring from the minimum changes nothing
    // but makes equal inputs give exactly 0
    let lo = sorted[0];
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (2.0 * (i + 1) as f64 - bf - 1.0) * (v - lo))
        .sum();
    Ok((2.0 * weighted / (bf * (bf - 1.0))).max(0.0))
}

fn check_sigma2(sigma2_hat: f64) -> Result<()> {
    if sigma2_hat > 0.0 && sigma2_hat.is_finite() {
        Ok(())
    } else {
        Err(Error::ZeroVariance(sigma2_hat))
    }
}

pub fn gmd_statistic(grid: &Grid, p: &BlockPartition, sigma2_hat: f64) -> Result<TestResult> {
    check_sigma2(sigma2_hat)?;
    let means = block_means(grid, p)?;
    let u = gmd_u(&means)?;
    let blocks = p.blocks() as f64;
    let scale = (p.block_size() as f64).sqrt() / sigma2_hat.sqrt();
    let g = blocks.sqrt() * (scale * u - 2.0 / PI.sqrt());
    let statistic = g / gmd_asymptotic_variance().sqrt();
    Ok(TestResult {
        kind: TestKind::Gmd,
        raw: u,
        statistic,
        p_value: p_value(statistic),
        partition: *p,
        sigma2_hat,
        n: grid.n(),
        m: grid.m(),
        decorrelated: false,
    })
}

/// `(1 / sqrt(2B)) * [ (l_n l_m / s2) * sum (mu_hk - mean)^2 - B + 1 ]`.
///
/// The sum of squares is accumulated around the grid mean, which equals
/// `sum mu_hk^2 - B mean^2` because the blocks tile the grid.
pub fn var_statistic(grid: &Grid, p: &BlockPartition, sigma2_hat: f64) -> Result<TestResult> {
    check_sigma2(sigma2_hat)?;
    let means = block_means(grid, p)?;
    let mean = grid.mean();
    let ss: f64 = means.iter().map(|v| (v - mean).powi(2)).sum();
    let blocks = p.blocks() as f64;
    let bracket = p.block_size() as f64 / sigma2_hat * ss - blocks + 1.0;
    let statistic = bracket / (2.0 * blocks).sqrt();
    Ok(TestResult {
        kind: TestKind::Var,
        raw: ss,
        statistic,
        p_value: p_value(statistic),
        partition: *p,
        sigma2_hat,
        n: grid.n(),
        m: grid.m(),
        decorrelated: false,
    })
}

/// Statistic of the requested kind with an explicit partition and variance.
pub fn statistic(kind: TestKind, grid: &Grid, p: &BlockPartition, sigma2_hat: f64) -> Result<TestResult> {
    match kind {
        TestKind::Gmd => gmd_statistic(grid, p, sigma2_hat),
        TestKind::Var => var_statistic(grid, p, sigma2_hat),
    }
}

/// Full test: optional whitening, partition, sample variance, statistic.
pub fn run_test(
    grid: &Grid,
    kind: TestKind,
    s_target: f64,
    decorrelate: Option<&DecorrelateOptions>,
) -> Result<TestResult> {
    let p = make_partition(grid.n(), grid.m(), s_target)?;
    let whitened;
    let data = match decorrelate {
        Some(opts) => {
            whitened = whiten_grid(grid, opts)?;
            &whitened
        }
        None => grid,
    };
    let sigma2 = sample_variance(data)?;
    let mut result = statistic(kind, data, &p, sigma2)?;
    result.decorrelated = decorrelate.is_some();
    Ok(result)
}

/// Between-block dispersion `T = (1/B) sum (mu_hk - mean)^2`. Converges to
/// the variance of the mean function over the unit square.
pub fn block_dispersion(grid: &Grid, p: &BlockPartition) -> Result<f64> {
    let means = block_means(grid, p)?;
    let mean = grid.mean();
    Ok(means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / p.blocks() as f64)
}
