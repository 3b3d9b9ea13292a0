//! Tile-wise testing of a large grid with family-wise error control.
//!
//! The grid is cut into equal tiles, each tile is (optionally) whitened on
//! its own and tested, and the tile p-values are adjusted with Holm's
//! procedure.

use rayon::prelude::*;
use serde::Serialize;

use crate::change::{run_test, TestKind, TestResult};
use crate::decorrelate::DecorrelateOptions;
use crate::error::Result;
use crate::grid::Grid;
use crate::holm::holm_adjust;
use crate::io::split_grid;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub rows: usize,
    pub cols: usize,
    pub test: TestKind,
    pub s_target: f64,
    pub decorrelate: Option<DecorrelateOptions>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileResult {
    /// Row-major tile index.
    pub index: usize,
    pub tile_row: usize,
    pub tile_col: usize,
    pub result: TestResult,
    pub p_adjusted: f64,
    pub rejected: bool,
}

/// Flat record written as one JSON line per test or tile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub test: TestKind,
    pub n: usize,
    pub m: usize,
    pub l_n: usize,
    pub l_m: usize,
    pub b_n: usize,
    pub b_m: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub sigma2_hat: f64,
    pub decorrelated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tile: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tile_row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tile_col: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_adjusted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<bool>,
}

impl From<&TestResult> for ResultRecord {
    fn from(r: &TestResult) -> Self {
        let p = &r.partition;
        ResultRecord {
            test: r.kind,
            n: r.n,
            m: r.m,
            l_n: p.l_n,
            l_m: p.l_m,
            b_n: p.b_n,
            b_m: p.b_m,
            statistic: r.statistic,
            p_value: r.p_value,
            sigma2_hat: r.sigma2_hat,
            decorrelated: r.decorrelated,
            tile: None,
            tile_row: None,
            tile_col: None,
            p_adjusted: None,
            rejected: None,
        }
    }
}

impl From<&TileResult> for ResultRecord {
    fn from(t: &TileResult) -> Self {
        ResultRecord {
            tile: Some(t.index),
            tile_row: Some(t.tile_row),
            tile_col: Some(t.tile_col),
            p_adjusted: Some(t.p_adjusted),
            rejected: Some(t.rejected),
            ..ResultRecord::from(&t.result)
        }
    }
}

/// Tests every tile and applies Holm's procedure at `opts.alpha`. Tiles
/// come back in row-major order whatever order they finish in.
pub fn scan(grid: &Grid, opts: &ScanOptions) -> Result<Vec<TileResult>> {
    let tiles = split_grid(grid, opts.rows, opts.cols)?;
    let results: Vec<TestResult> = tiles
        .par_iter()
        .map(|t| run_test(t, opts.test, opts.s_target, opts.decorrelate.as_ref()))
        .collect::<Result<_>>()?;
    let ps: Vec<f64> = results.iter().map(|r| r.p_value).collect();
    let holm = holm_adjust(&ps, opts.alpha)?;
    Ok(results
        .into_iter()
        .enumerate()
        .map(|(index, result)| TileResult {
            index,
            tile_row: index / opts.cols,
            tile_col: index % opts.cols,
            result,
            p_adjusted: holm.adjusted[index],
            rejected: holm.rejected[index],
        })
        .collect())
}

/// Text map of the adjusted p-values, `*` marking rejected tiles.
pub fn tile_map(tiles: &[TileResult], cols: usize) -> String {
    let mut out = String::new();
    for row in tiles.chunks(cols) {
        let cells: Vec<String> = row
            .iter()
            .map(|t| format!("{:.4}{}", t.p_adjusted, if t.rejected { '*' } else { ' ' }))
            .collect();
        out.push_str(cells.join(" ").trim_end());
        out.push('\n');
    }
    out
}
