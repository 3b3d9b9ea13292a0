//! Tests for changes in the mean of two-dimensional random fields observed
//! on a regular grid.
//!
//! The field is split into non-overlapping blocks and the block means are
//! compared, either by Gini's mean difference ([`TestKind::Gmd`]) or by
//! their scaled variance ([`TestKind::Var`]). Dependent fields can be
//! whitened first with autocovariance-based de-correlation
//! ([`decorrelate`]). The [`montecarlo`] module reproduces size and power
//! studies; [`io`] holds the CSV grid format and raster helpers used by the
//! `gridshift` command-line tool.

pub mod change;
pub mod config;
pub mod decorrelate;
pub mod error;
pub mod fieldgen;
pub mod grid;
pub mod holm;
pub mod io;
pub mod montecarlo;
pub mod report;
pub mod scan;

pub use change::{
    block_dispersion, gmd_statistic, gmd_u, p_value, run_test, var_statistic, TestKind, TestResult,
};
pub use decorrelate::{DecorrelateMethod, DecorrelateOptions, RepairMethod};
pub use error::{Error, Result};
pub use fieldgen::{DepKind, DependenceSpec, NoiseDist, NoiseSpec};
pub use grid::{
    block_means, eval_mean_surface, make_partition, sample_variance, BlockPartition, Grid,
    MeanSurface, SurfaceKind,
};
pub use holm::{holm_adjust, HolmOutcome};
pub use config::{DepConfig, ExperimentConfig, SurfaceSweep};
pub use io::{ndvi, read_grid, split_grid, write_grid, GridFile};
pub use montecarlo::{simulate, simulate_power, simulate_size, size_corrected_power, ExperimentReport, ReportRow};
pub use report::{emit_report, parse_report_csv, ReportFormat};
pub use scan::{scan, ScanOptions, TileResult};
