//! Grid data model, block partitions, block means and mean surfaces.
//!
//! All matrix <-> vector conversions use column-major order: the vector
//! index of cell `(i, j)` in an `n x m` grid is `i + j * n`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x m` field of finite real observations. Row index `i` is the
/// vertical coordinate, column index `j` the horizontal one.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    values: DMatrix<f64>,
}

impl Grid {
    /// Builds a grid from a matrix, rejecting empty or non-finite input.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "grid must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Grid { values })
    }

    /// Inverse of [`Grid::vec`]: reshapes a column-major vector.
    pub fn unvec(n: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for a {n}x{m} grid, got {}",
                n * m,
                data.len()
            )));
        }
        Self::from_matrix(DMatrix::from_vec(n, m, data))
    }

    /// Builds a grid from row-major rows (the on-disk layout).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "row {r} has {} values, expected {m}",
                row.len()
            )));
        }
        Self::from_matrix(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn constant(n: usize, m: usize, value: f64) -> Result<Self> {
        Self::from_matrix(DMatrix::from_element(n, m, value))
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of columns.
    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    /// Total number of observations `N = n * m`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }

    /// Column-major view of the observations.
    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// Column-major vectorization.
    pub fn vec(&self) -> Vec<f64> {
        self.values.as_slice().to_vec()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Row-major copy of the values.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.m()).map(|j| self.values[(i, j)]).collect())
            .collect()
    }

    /// Elementwise sum of two grids of equal shape.
    pub fn add(&self, other: &Grid) -> Result<Grid> {
        if self.n() != other.n() || self.m() != other.m() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add a {}x{} grid to a {}x{} grid",
                other.n(),
                other.m(),
                self.n(),
                self.m()
            )));
        }
        Ok(Grid { values: &self.values + &other.values })
    }

    /// Applies `f` to every cell. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Grid> {
        Self::from_matrix(self.values.map(f))
    }
}

/// Split of an `n x m` grid into `b_n x b_m` blocks of `l_n x l_m` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub l_n: usize,
    pub l_m: usize,
    pub b_n: usize,
    pub b_m: usize,
    /// Achieved exponent `ln(l_n) / ln(n)`.
    pub s_n: f64,
    /// Achieved exponent `ln(l_m) / ln(m)`.
    pub s_m: f64,
}

impl BlockPartition {
    /// Explicit partition from block lengths and counts.
    pub fn new(l_n: usize, b_n: usize, l_m: usize, b_m: usize) -> Result<Self> {
        for (l, b) in [(l_n, b_n), (l_m, b_m)] {
            if l < 2 || b < 2 {
                return Err(Error::InvalidArgument(format!(
                    "block length {l} and count {b} must both be at least 2"
                )));
            }
        }
        Ok(BlockPartition {
            l_n,
            l_m,
            b_n,
            b_m,
            s_n: exponent(l_n, l_n * b_n),
            s_m: exponent(l_m, l_m * b_m),
        })
    }

    /// Total number of blocks.
    pub fn blocks(&self) -> usize {
        self.b_n * self.b_m
    }

    /// Number of cells per block.
    pub fn block_size(&self) -> usize {
        self.l_n * self.l_m
    }

    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        if self.l_n * self.b_n != n || self.l_m * self.b_m != m {
            return Err(Error::DimensionMismatch(format!(
                "partition {}x{} blocks of {}x{} does not tile a {n}x{m} grid",
                self.b_n, self.b_m, self.l_n, self.l_m
            )));
        }
        Ok(())
    }
}

fn exponent(l: usize, n: usize) -> f64 {
    (l as f64).ln() / (n as f64).ln()
}

/// Block length for one dimension: the divisor `l` of `n` with `l >= 2`
/// and `n / l >= 2` whose exponent `ln l / ln n` is closest to `s_target`.
/// Ties go to the larger block.
fn block_length(n: usize, s_target: f64) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for l in (2..=n / 2).filter(|l| n % l == 0) {
        let score = (exponent(l, n) - s_target).abs();
        match best {
            Some((_, s)) if score > s + 1e-12 => {}
            // iteration is ascending, so an (approximate) tie replaces
            // the smaller block
            _ => best = Some((l, score)),
        }
    }
    best.map(|(l, _)| l).ok_or(Error::NoValidPartition { dim: n })
}

/// Chooses block lengths for an `n x m` grid so that blocks tile the grid
/// exactly and `l ~ n^s_target` in each dimension independently.
pub fn make_partition(n: usize, m: usize, s_target: f64) -> Result<BlockPartition> {
    if !(s_target > 0.0 && s_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "block exponent {s_target} must lie in (0, 1)"
        )));
    }
    let l_n = block_length(n, s_target)?;
    let l_m = block_length(m, s_target)?;
    BlockPartition::new(l_n, n / l_n, l_m, m / l_m)
}

/// Arithmetic means of the `b_n x b_m` blocks.
pub fn block_means(grid: &Grid, p: &BlockPartition) -> Result<DMatrix<f64>> {
    p.check(grid.n(), grid.m())?;
    let mut sums = DMatrix::<f64>::zeros(p.b_n, p.b_m);
    let x = grid.matrix();
    for j in 0..grid.m() {
        let k = j / p.l_m;
        for i in 0..grid.n() {
            sums[(i / p.l_n, k)] += x[(i, j)];
        }
    }
    let size = p.block_size() as f64;
    Ok(sums / size)
}

/// Sample variance with divisor `N - 1` over all cells.
pub fn sample_variance(grid: &Grid) -> Result<f64> {
    let n = grid.len();
    if n < 2 {
        return Err(Error::DegenerateGrid(n));
    }
    let mean = grid.mean();
    let ss: f64 = grid.as_slice().iter().map(|x| (x - mean).powi(2)).sum();
    Ok(ss / (n - 1) as f64)
}

/// Shape of the mean surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    /// Constant mean equal to the amplitude (the null model when 0).
    Constant,
    /// Shift on the single top-left block.
    A1,
    /// Shift on the left half of the columns.
    A2,
    /// Linear trend in the column index, from 0 to the amplitude.
    A3,
    /// Shift on an L-shaped region in the top-left quarter.
    A4,
    /// User-supplied surface, scaled by the amplitude.
    Custom,
}

impl SurfaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceKind::Constant => "constant",
            SurfaceKind::A1 => "a1",
            SurfaceKind::A2 => "a2",
            SurfaceKind::A3 => "a3",
            SurfaceKind::A4 => "a4",
            SurfaceKind::Custom => "custom",
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SurfaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "constant" | "null" | "none" => Ok(SurfaceKind::Constant),
            "a1" => Ok(SurfaceKind::A1),
            "a2" => Ok(SurfaceKind::A2),
            "a3" => Ok(SurfaceKind::A3),
            "a4" => Ok(SurfaceKind::A4),
            "custom" => Ok(SurfaceKind::Custom),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Declarative mean surface `mu(i, j)`. The amplitude is the height of the
/// shift in data units.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSurface {
    pub kind: SurfaceKind,
    pub amplitude: f64,
    pub custom: Option<DMatrix<f64>>,
}

impl MeanSurface {
    pub fn new(kind: SurfaceKind, amplitude: f64) -> Self {
        MeanSurface { kind, amplitude, custom: None }
    }

    /// The null model, `mu = 0`.
    pub fn null() -> Self {
        Self::new(SurfaceKind::Constant, 0.0)
    }

    pub fn custom(values: DMatrix<f64>, amplitude: f64) -> Self {
        MeanSurface { kind: SurfaceKind::Custom, amplitude, custom: Some(values) }
    }
}

/// Evaluates the surface on the `n x m` index grid. Region bounds are in
/// 1-based index space with `n/2`, `n/4` (and likewise for `m`) rounded down.
pub fn eval_mean_surface(
    spec: &MeanSurface,
    n: usize,
    m: usize,
    p: &BlockPartition,
) -> Result<Grid> {
    let a = spec.amplitude;
    let values = match spec.kind {
        SurfaceKind::Constant => DMatrix::from_element(n, m, a),
        SurfaceKind::A1 => {
            DMatrix::from_fn(n, m, |i, j| if i < p.l_n && j < p.l_m { a } else { 0.0 })
        }
        SurfaceKind::A2 => DMatrix::from_fn(n, m, |_, j| if j < m / 2 { a } else { 0.0 }),
        SurfaceKind::A3 => DMatrix::from_fn(n, m, |_, j| {
            if m > 1 {
                a * j as f64 / (m - 1) as f64
            } else {
                0.0
            }
        }),
        SurfaceKind::A4 => DMatrix::from_fn(n, m, |i, j| {
            let (i1, j1) = (i + 1, j + 1);
            let lower = n / 4 < i1 && i1 <= n / 2 && j1 <= m / 2;
            let upper = i1 <= n / 4 && m / 4 < j1 && j1 <= m / 2;
            if lower || upper {
                a
            } else {
                0.0
            }
        }),
        SurfaceKind::Custom => {
            let custom = spec.custom.as_ref().ok_or_else(|| {
                Error::InvalidArgument("custom surface without values".to_string())
            })?;
            if custom.nrows() != n || custom.ncols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "custom surface is {}x{}, grid is {n}x{m}",
                    custom.nrows(),
                    custom.ncols()
                )));
            }
            custom * a
        }
    };
    Grid::from_matrix(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_grid(n: usize, m: usize) -> Grid {
        Grid::unvec(n, m, (1..=n * m).map(|v| v as f64).collect()).unwrap()
    }

    /// Exhaustive reference for the divisor rule.
    fn brute_partition(n: usize, s: f64) -> Option<usize> {
        let mut pairs: Vec<(usize, usize)> = (1..=n)
            .filter(|l| n % l == 0)
            .map(|l| (l, n / l))
            .filter(|&(l, b)| l >= 2 && b >= 2)
            .collect();
        pairs.sort_by(|a, b| {
            let da = ((a.0 as f64).ln() / (n as f64).ln() - s).abs();
            let db = ((b.0 as f64).ln() / (n as f64).ln() - s).abs();
            if (da - db).abs() < 1e-12 {
                b.0.cmp(&a.0)
            } else {
                da.partial_cmp(&db).unwrap()
            }
        });
        pairs.first().map(|p| p.0)
    }

    #[test]
    fn partition_examples() {
        let p = make_partition(50, 50, 0.6).unwrap();
        assert_eq!((p.l_n, p.b_n, p.l_m, p.b_m), (10, 5, 10, 5));
        let p = make_partition(4, 4, 0.6).unwrap();
        assert_eq!((p.l_n, p.b_n), (2, 2));
        let p = make_partition(20, 20, 0.6).unwrap();
        assert_eq!((p.l_n, p.b_n), (5, 4));
        assert!((p.s_n - 5f64.ln() / 20f64.ln()).abs() < 1e-15);
        assert!(matches!(make_partition(7, 7, 0.6), Err(Error::NoValidPartition { dim: 7 })));
        assert!(matches!(make_partition(20, 3, 0.6), Err(Error::NoValidPartition { dim: 3 })));
    }

    #[test]
    fn partition_matches_enumeration() {
        for n in 4..=400 {
            for s in [0.5, 0.55, 0.6, 0.7, 0.8] {
                match (make_partition(n, n, s), brute_partition(n, s)) {
                    (Ok(p), Some(l)) => {
                        assert_eq!(p.l_n, l, "n={n} s={s}");
                        assert_eq!(p.l_n * p.b_n, n);
                        assert!(p.s_n > 0.0 && p.s_n < 1.0);
                    }
                    (Err(Error::NoValidPartition { .. }), None) => {}
                    (got, want) => panic!("n={n}: {got:?} vs {want:?}"),
                }
            }
        }
    }

    #[test]
    fn partition_is_per_dimension() {
        let p = make_partition(144, 125, 0.6).unwrap();
        assert_eq!(p.l_m * p.b_m, 125);
        assert_eq!(p.l_n * p.b_n, 144);
        let q = make_partition(144, 144, 0.6).unwrap();
        assert_eq!(p.l_n, q.l_n);
    }

    #[test]
    fn block_means_hand_example() {
        let g = seq_grid(4, 4);
        let p = BlockPartition::new(2, 2, 2, 2).unwrap();
        let bm = block_means(&g, &p).unwrap();
        assert_eq!(bm, DMatrix::from_row_slice(2, 2, &[3.5, 11.5, 5.5, 13.5]));
    }

    #[test]
    fn block_means_constant_and_mismatch() {
        let g = Grid::constant(6, 4, 2.5).unwrap();
        let p = BlockPartition::new(3, 2, 2, 2).unwrap();
        assert!(block_means(&g, &p).unwrap().iter().all(|&v| v == 2.5));
        let bad = BlockPartition::new(2, 2, 2, 2).unwrap();
        assert!(matches!(block_means(&g, &bad), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn tiling_covers_each_cell_once() {
        let p = BlockPartition::new(3, 4, 5, 2).unwrap();
        let mut count = vec![0u32; 12 * 10];
        for h in 0..p.b_n {
            for k in 0..p.b_m {
                for i in h * p.l_n..(h + 1) * p.l_n {
                    for j in k * p.l_m..(k + 1) * p.l_m {
                        count[i + j * 12] += 1;
                    }
                }
            }
        }
        assert!(count.iter().all(|&c| c == 1));
    }

    #[test]
    fn a2_block_means_split_in_half() {
        let p = make_partition(20, 20, 0.6).unwrap();
        assert_eq!(p.b_m % 2, 0);
        let mu = eval_mean_surface(&MeanSurface::new(SurfaceKind::A2, 1.5), 20, 20, &p).unwrap();
        let bm = block_means(&mu, &p).unwrap();
        for k in 0..p.b_m {
            let expect = if k < p.b_m / 2 { 1.5 } else { 0.0 };
            assert!(bm.column(k).iter().all(|&v| v == expect));
        }
    }

    #[test]
    fn surface_examples() {
        let p = BlockPartition::new(2, 2, 2, 2).unwrap();
        let zero = eval_mean_surface(&MeanSurface::null(), 4, 4, &p).unwrap();
        assert!(zero.as_slice().iter().all(|&v| v == 0.0));

        let a1 = eval_mean_surface(&MeanSurface::new(SurfaceKind::A1, 2.0), 4, 4, &p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i < 2 && j < 2 { 2.0 } else { 0.0 };
                assert_eq!(a1.get(i, j), want);
            }
        }

        let a3 = eval_mean_surface(&MeanSurface::new(SurfaceKind::A3, 1.0), 4, 5, &p).unwrap();
        for i in 0..4 {
            let row: Vec<f64> = (0..5).map(|j| a3.get(i, j)).collect();
            assert_eq!(row, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        }
    }

    #[test]
    fn a4_is_l_shaped() {
        let p = make_partition(8, 8, 0.6).unwrap();
        let a4 = eval_mean_surface(&MeanSurface::new(SurfaceKind::A4, 1.0), 8, 8, &p).unwrap();
        // rows 3..4 (1-based) x cols 1..4, plus rows 1..2 x cols 3..4
        let expect = [
            [0., 0., 1., 1., 0., 0., 0., 0.],
            [0., 0., 1., 1., 0., 0., 0., 0.],
            [1., 1., 1., 1., 0., 0., 0., 0.],
            [1., 1., 1., 1., 0., 0., 0., 0.],
        ];
        for i in 0..8 {
            for j in 0..8 {
                let want = if i < 4 { expect[i][j] } else { 0.0 };
                assert_eq!(a4.get(i, j), want, "({i},{j})");
            }
        }
    }

    #[test]
    fn custom_surface_dimensions() {
        let p = BlockPartition::new(2, 2, 2, 2).unwrap();
        let s = MeanSurface::custom(DMatrix::from_element(4, 4, 1.0), 3.0);
        let g = eval_mean_surface(&s, 4, 4, &p).unwrap();
        assert!(g.as_slice().iter().all(|&v| v == 3.0));
        let bad = MeanSurface::custom(DMatrix::from_element(3, 4, 1.0), 1.0);
        assert!(matches!(eval_mean_surface(&bad, 4, 4, &p), Err(Error::DimensionMismatch(_))));
        assert!(matches!("a9".parse::<SurfaceKind>(), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn sample_variance_examples() {
        let g = Grid::unvec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((sample_variance(&g).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_variance(&Grid::constant(3, 3, 7.0).unwrap()).unwrap(), 0.0);
        let one = Grid::constant(1, 1, 1.0).unwrap();
        assert!(matches!(sample_variance(&one), Err(Error::DegenerateGrid(1))));
    }

    #[test]
    fn rejects_non_finite() {
        let r = Grid::unvec(1, 2, vec![1.0, f64::NAN]);
        assert!(matches!(r, Err(Error::NonFinite { row: 0, col: 1 })));
    }

    #[test]
    fn rows_roundtrip() {
        let g = seq_grid(3, 5);
        assert_eq!(Grid::from_rows(&g.rows()).unwrap(), g);
        assert_eq!(g.get(1, 0), 2.0);
        assert_eq!(g.get(0, 1), 4.0);
    }
}
