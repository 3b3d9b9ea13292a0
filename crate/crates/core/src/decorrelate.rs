//! De-correlation of stationary fields from their estimated autocovariances.
//!
//! Autocovariances are estimated up to a bandwidth in each direction and
//! assembled into the covariance of the column-major data vector, either
//! as one dense `N x N` matrix or as a Kronecker pair `S1 (x) S2`
//! (horizontal `m x m`, vertical `n x n`). The data are then whitened with
//! the inverse Cholesky factor after centering at the overall mean. Banded
//! estimates are often indefinite; those are factored by a modified
//! Cholesky decomposition instead (or, optionally, eigenvalue-floored).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Default upper bound on the order of a dense covariance matrix.
pub const DEFAULT_SIZE_GUARD: usize = 10_000;

/// Relative pivot tolerance of the Cholesky factorization (times `||M||_inf`).
pub const PIVOT_TOL: f64 = 1e-12;

/// Relative eigenvalue floor used by [`psd_repair`] (times `||M||_inf`).
pub const EIGEN_FLOOR: f64 = 1e-8;

/// Number of lags estimated in a dimension of length `k`: `floor(0.9 k^(1/3))`.
pub fn bandwidth(k: usize) -> usize {
    // the small offset keeps exact cubes (k = 1000 -> 9) from rounding down
    (0.9 * (k as f64).cbrt() + 1e-12).floor() as usize
}

fn canonical(h1: isize, h2: isize) -> (isize, isize) {
    if h1 < 0 || (h1 == 0 && h2 < 0) {
        (-h1, -h2)
    } else {
        (h1, h2)
    }
}

/// Sum of `c(i, j) c(i + h1, j + h2)` over all valid cells divided by `N`,
/// where `c` is the centered field in column-major order. `h1 >= 0`.
fn lag_product(c: &[f64], n: usize, m: usize, h1: usize, h2: isize) -> f64 {
    let (j_lo, j_hi) = if h2 >= 0 { (0, m - h2 as usize) } else { (h2.unsigned_abs(), m) };
    let mut s = 0.0;
    for j in j_lo..j_hi {
        let jj = (j as isize + h2) as usize;
        let a = &c[j * n..j * n + n - h1];
        let b = &c[jj * n + h1..jj * n + n];
        s += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    }
    s / (n * m) as f64
}

fn centered(grid: &Grid) -> Vec<f64> {
    let mean = grid.mean();
    grid.as_slice().iter().map(|x| x - mean).collect()
}

/// Biased empirical autocovariance at lag `(h1, h2)` (divisor `N`).
/// Symmetric in the lag by construction.
pub fn empirical_autocov(grid: &Grid, h1: isize, h2: isize) -> Result<f64> {
    let (n, m) = (grid.n(), grid.m());
    if h1.unsigned_abs() >= n || h2.unsigned_abs() >= m {
        return Err(Error::LagOutOfRange { h1, h2, n, m });
    }
    let (c1, c2) = canonical(h1, h2);
    Ok(lag_product(&centered(grid), n, m, c1 as usize, c2))
}

/// Autocovariances on the canonical lag domain `h1 > 0` or `h1 = 0, h2 >= 0`
/// within the bandwidth. Lags outside the band read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovTable {
    /// `(vertical, horizontal)` bandwidth.
    pub bandwidth: (usize, usize),
    // dense (b1 + 1) x (2 b2 + 1) array, index (h1, h2 + b2); half of the
    // h1 = 0 row is never read
    gamma: Vec<f64>,
}

impl AutocovTable {
    /// Builds a table from a lag function evaluated on canonical lags.
    pub fn from_fn(bandwidth: (usize, usize), mut f: impl FnMut(usize, isize) -> f64) -> Self {
        let (b1, b2) = bandwidth;
        let width = 2 * b2 + 1;
        let mut gamma = vec![0.0; (b1 + 1) * width];
        for h1 in 0..=b1 {
            for h2 in -(b2 as isize)..=b2 as isize {
                if h1 == 0 && h2 < 0 {
                    continue;
                }
                gamma[h1 * width + (h2 + b2 as isize) as usize] = f(h1, h2);
            }
        }
        AutocovTable { bandwidth, gamma }
    }

    /// `gamma(h1, h2)` for any lag; zero outside the band.
    pub fn get(&self, h1: isize, h2: isize) -> f64 {
        let (b1, b2) = self.bandwidth;
        let (c1, c2) = canonical(h1, h2);
        if c1 as usize > b1 || c2.unsigned_abs() > b2 {
            return 0.0;
        }
        self.gamma[c1 as usize * (2 * b2 + 1) + (c2 + b2 as isize) as usize]
    }

    pub fn variance(&self) -> f64 {
        self.get(0, 0)
    }
}

/// Empirical autocovariances for all lags within `(bandwidth(n), bandwidth(m))`,
/// including the mixed-sign quadrant.
pub fn estimate_autocov_table(grid: &Grid) -> Result<AutocovTable> {
    let (n, m) = (grid.n(), grid.m());
    if n < 2 || m < 2 {
        return Err(Error::DegenerateGrid(grid.len()));
    }
    let band = (bandwidth(n).min(n - 1), bandwidth(m).min(m - 1));
    let c = centered(grid);
    Ok(AutocovTable::from_fn(band, |h1, h2| lag_product(&c, n, m, h1, h2)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceModel {
    /// Covariance of `vec(X)`, `N x N`.
    Full(DMatrix<f64>),
    /// `Cov(vec X) = horizontal (x) vertical`.
    Separable {
        /// `m x m`, covariance along the columns index.
        horizontal: DMatrix<f64>,
        /// `n x n`, correlation along the rows index (unit diagonal).
        vertical: DMatrix<f64>,
    },
}

impl CovarianceModel {
    /// The dense `N x N` matrix (Kronecker product for the separable form).
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            CovarianceModel::Full(s) => s.clone(),
            CovarianceModel::Separable { horizontal, vertical } => horizontal.kronecker(vertical),
        }
    }
}

/// Dense covariance of the column-major data vector:
/// `S[(i,j),(i',j')] = gamma(i' - i, j' - j)`.
pub fn assemble_full(table: &AutocovTable, n: usize, m: usize, size_guard: usize) -> Result<CovarianceModel> {
    let size = n * m;
    if size > size_guard {
        return Err(Error::SizeGuardExceeded { size, guard: size_guard });
    }
    let (b1, b2) = table.bandwidth;
    let mut s = DMatrix::<f64>::zeros(size, size);
    for j in 0..m {
        for i in 0..n {
            let row = i + j * n;
            let j_lo = j.saturating_sub(b2);
            let j_hi = (j + b2).min(m - 1);
            let i_lo = i.saturating_sub(b1);
            let i_hi = (i + b1).min(n - 1);
            for jj in j_lo..=j_hi {
                for ii in i_lo..=i_hi {
                    let h1 = ii as isize - i as isize;
                    let h2 = jj as isize - j as isize;
                    s[(row, ii + jj * n)] = table.get(h1, h2);
                }
            }
        }
    }
    Ok(CovarianceModel::Full(s))
}

/// Banded Toeplitz matrix of order `k` with `entry(h)` on the `h`-th
/// off-diagonals for `h <= band`.
fn banded_toeplitz(k: usize, band: usize, entry: impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |a, b| {
        let h = a.abs_diff(b);
        if h <= band {
            entry(h)
        } else {
            0.0
        }
    })
}

/// Separable model from the directional autocovariances: horizontal
/// covariance `gamma(0, h)` and vertical correlation `gamma(h, 0) / gamma(0, 0)`.
pub fn assemble_separable(grid: &Grid) -> Result<CovarianceModel> {
    let table = estimate_autocov_table(grid)?;
    separable_from_table(&table, grid.n(), grid.m())
}

pub fn separable_from_table(table: &AutocovTable, n: usize, m: usize) -> Result<CovarianceModel> {
    let g0 = table.variance();
    if !(g0 > 0.0) {
        return Err(Error::ZeroVariance(g0));
    }
    let (b1, b2) = table.bandwidth;
    let horizontal = banded_toeplitz(m, b2, |h| table.get(0, h as isize));
    let vertical = banded_toeplitz(n, b1, |h| if h == 0 { 1.0 } else { table.get(h as isize, 0) / g0 });
    Ok(CovarianceModel::Separable { horizontal, vertical })
}

/// Maximum absolute row sum.
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Lower Cholesky factor `L` with `M = L L^T`. Fails when a pivot drops
/// below `PIVOT_TOL * ||M||_inf`. Work stops at the last nonzero of each
/// column, so banded input costs `O(N b^2)`.
pub fn cholesky(mat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = mat.nrows();
    if n != mat.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", n, mat.ncols())));
    }
    let tol = PIVOT_TOL * norm_inf(mat);
    let mut a = mat.clone();
    let data = a.as_mut_slice();
    for k in 0..n {
        let pivot = data[k * n + k];
        if !(pivot > tol) {
            return Err(Error::SingularFactor { index: k, pivot, tol });
        }
        let d = pivot.sqrt();
        data[k * n + k] = d;
        for v in &mut data[k * n + k + 1..k * n + n] {
            *v /= d;
        }
        let (left, right) = data.split_at_mut((k + 1) * n);
        let col_k = &left[k * n..k * n + n];
        // entries below the last nonzero of column k contribute nothing
        let end = col_k[k + 1..].iter().rposition(|&v| v != 0.0).map_or(k + 1, |p| k + 2 + p);
        for j in k + 1..end {
            let ljk = col_k[j];
            if ljk == 0.0 {
                continue;
            }
            let col_j = &mut right[(j - k - 1) * n..(j - k) * n];
            for i in j..end {
                col_j[i] -= col_k[i] * ljk;
            }
        }
    }
    a.fill_upper_triangle(0.0, 1);
    Ok(a)
}

/// Solves `L y = b` in place for lower-triangular `L`.
pub fn forward_substitute(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = l.nrows();
    let data = l.as_slice();
    for k in 0..n {
        if b[k] == 0.0 {
            continue;
        }
        b[k] /= data[k * n + k];
        let yk = b[k];
        for (bi, lik) in b[k + 1..].iter_mut().zip(&data[k * n + k + 1..k * n + n]) {
            *bi -= lik * yk;
        }
    }
}

/// Result of [`psd_repair`].
#[derive(Debug, Clone, PartialEq)]
pub struct Repaired {
    pub matrix: DMatrix<f64>,
    /// Largest absolute entry of the perturbation `E`; 0 if untouched.
    pub perturbation: f64,
}

impl Repaired {
    pub fn was_repaired(&self) -> bool {
        self.perturbation > 0.0
    }
}

fn check_symmetric(mat: &DMatrix<f64>) -> Result<()> {
    if !mat.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", mat.nrows(), mat.ncols())));
    }
    let asym = (mat - mat.transpose()).amax();
    if asym > 1e-10 * mat.amax().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Returns `M` unchanged if it admits a Cholesky factorization. Otherwise
/// raises every eigenvalue below `EIGEN_FLOOR * ||M||_inf` to that floor and
/// reassembles the matrix.
pub fn psd_repair(mat: &DMatrix<f64>) -> Result<Repaired> {
    check_symmetric(mat)?;
    if cholesky(mat).is_ok() {
        return Ok(Repaired { matrix: mat.clone(), perturbation: 0.0 });
    }
    let floor = EIGEN_FLOOR * norm_inf(mat);
    let eig = SymmetricEigen::new(mat.clone());
    let lifted = eig.eigenvalues.map(|l| l.max(floor));
    let v = &eig.eigenvectors;
    let mut repaired = v * DMatrix::from_diagonal(&lifted) * v.transpose();
    // restore exact symmetry lost to rounding
    repaired = (&repaired + repaired.transpose()) * 0.5;
    let perturbation = (&repaired - mat).amax();
    Ok(Repaired { matrix: repaired, perturbation })
}

/// `W = L^-1` for the Cholesky factor `L` of `M`, so `W M W^T = I`.
pub fn inverse_sqrt(mat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(invert_lower(&cholesky(mat)?))
}

fn invert_lower(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut col = vec![0.0; n];
    for c in 0..n {
        col.fill(0.0);
        col[c] = 1.0;
        forward_substitute(l, &mut col);
        w.column_mut(c).copy_from_slice(&col);
    }
    w
}

/// Schnabel-Eskow modified Cholesky factorization with symmetric pivoting:
/// `P (M + E) P^T = L L^T`, `E` diagonal and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedCholesky {
    /// `perm[k]` is the original index placed at position `k`.
    pub perm: Vec<usize>,
    pub factor: DMatrix<f64>,
    /// Diagonal of `E`, in original index order.
    pub shift: Vec<f64>,
}

impl ModifiedCholesky {
    /// Largest diagonal shift.
    pub fn perturbation(&self) -> f64 {
        self.shift.iter().copied().fold(0.0, f64::max)
    }

    /// `P^T L L^T P`, which equals `M + E`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let llt = &self.factor * self.factor.transpose();
        let n = self.perm.len();
        let mut out = DMatrix::zeros(n, n);
        for (c, &pc) in self.perm.iter().enumerate() {
            for (r, &pr) in self.perm.iter().enumerate() {
                out[(pr, pc)] = llt[(r, c)];
            }
        }
        out
    }

    /// Replaces `x` by `P^T L^-1 P x`.
    pub fn whiten_in_place(&self, x: &mut [f64]) {
        let mut px: Vec<f64> = self.perm.iter().map(|&p| x[p]).collect();
        forward_substitute(&self.factor, &mut px);
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = px[k];
        }
    }
}

fn sym_swap(a: &mut DMatrix<f64>, perm: &mut [usize], p: usize, q: usize) {
    if p != q {
        a.swap_rows(p, q);
        a.swap_columns(p, q);
        perm.swap(p, q);
    }
}

// one elimination step on the full symmetric working matrix
fn eliminate(a: &mut DMatrix<f64>, k: usize) {
    let n = a.nrows();
    let d = a[(k, k)].sqrt();
    a[(k, k)] = d;
    let mut nz = Vec::new();
    for i in k + 1..n {
        a[(i, k)] /= d;
        a[(k, i)] = a[(i, k)];
        if a[(i, k)] != 0.0 {
            nz.push(i);
        }
    }
    for &c in &nz {
        let lc = a[(c, k)];
        for &i in &nz {
            let li = a[(i, k)];
            a[(i, c)] -= li * lc;
        }
    }
}

/// Revised modified Cholesky of Schnabel and Eskow. Positive definite input
/// goes through phase one only and gets `E = 0`; otherwise phase two adds
/// Gershgorin-based diagonal shifts to the remaining submatrix.
pub fn modified_cholesky(mat: &DMatrix<f64>) -> Result<ModifiedCholesky> {
    check_symmetric(mat)?;
    let n = mat.nrows();
    if let Some(v) = mat.iter().find(|v| !v.is_finite()) {
        return Err(Error::SingularFactor { index: 0, pivot: *v, tol: 0.0 });
    }
    let eps = f64::EPSILON;
    let tau = eps.cbrt();
    let taubar = tau * tau;
    let mu = 0.1;
    let gamma = (0..n).map(|i| mat[(i, i)].abs()).fold(0.0, f64::max);
    if !(gamma > 0.0) {
        return Err(Error::SingularFactor { index: 0, pivot: 0.0, tol: 0.0 });
    }
    let mut a = mat.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut e = vec![0.0; n];
    let mut j = 0;
    let mut phase1 = true;
    while j < n && phase1 {
        let imax = (j..n).max_by(|&p, &q| a[(p, p)].total_cmp(&a[(q, q)])).unwrap();
        if a[(imax, imax)] < taubar * gamma {
            phase1 = false;
            break;
        }
        sym_swap(&mut a, &mut perm, j, imax);
        let ajj = a[(j, j)];
        let lowest = (j + 1..n).map(|i| a[(i, i)] - a[(i, j)].powi(2) / ajj).fold(f64::INFINITY, f64::min);
        if lowest < -mu * gamma {
            phase1 = false;
            break;
        }
        eliminate(&mut a, j);
        j += 1;
    }
    if !phase1 {
        let mut delta_prev = 0.0f64;
        let mut g = vec![0.0; n];
        for i in j..n {
            let off: f64 = (j..n).filter(|&k| k != i).map(|k| a[(i, k)].abs()).sum();
            g[i] = a[(i, i)] - off;
        }
        let mut k = j;
        while k + 2 < n {
            let imax = (k..n).max_by(|&p, &q| g[p].total_cmp(&g[q])).unwrap();
            sym_swap(&mut a, &mut perm, k, imax);
            g.swap(k, imax);
            let row: f64 = (k + 1..n).map(|i| a[(i, k)].abs()).sum();
            let delta = (-a[(k, k)] + row.max(taubar * gamma)).max(delta_prev).max(0.0);
            if delta > 0.0 {
                a[(k, k)] += delta;
                delta_prev = delta;
                e[k] = delta;
            }
            if a[(k, k)] != row {
                let t = 1.0 - row / a[(k, k)];
                for i in k + 1..n {
                    g[i] += a[(i, k)].abs() * t;
                }
            }
            eliminate(&mut a, k);
            k += 1;
        }
        if n - k == 2 {
            let (p, q, r) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
            let t = ((p - r).powi(2) / 4.0 + q * q).sqrt();
            let (hi, lo) = ((p + r) / 2.0 + t, (p + r) / 2.0 - t);
            let delta = (-lo + (tau * (hi - lo) / (1.0 - tau)).max(taubar * gamma)).max(delta_prev).max(0.0);
            if delta > 0.0 {
                a[(k, k)] += delta;
                a[(k + 1, k + 1)] += delta;
                e[k] = delta;
                e[k + 1] = delta;
            }
            eliminate(&mut a, k);
            eliminate(&mut a, k + 1);
        } else if n - k == 1 {
            let delta = (-a[(k, k)] + taubar * gamma).max(delta_prev).max(0.0);
            a[(k, k)] += delta;
            e[k] = delta;
            eliminate(&mut a, k);
        }
    }
    a.fill_upper_triangle(0.0, 1);
    let mut shift = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        shift[p] = e[k];
    }
    Ok(ModifiedCholesky { perm, factor: a, shift })
}

/// How a covariance that fails the plain Cholesky factorization is repaired
/// before whitening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairMethod {
    /// [`modified_cholesky`].
    #[default]
    ModifiedCholesky,
    /// [`psd_repair`] followed by a plain Cholesky factorization.
    SpectralFloor,
}

impl RepairMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RepairMethod::ModifiedCholesky => "modified-cholesky",
            RepairMethod::SpectralFloor => "spectral-floor",
        }
    }
}

impl fmt::Display for RepairMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepairMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "modified-cholesky" => Ok(RepairMethod::ModifiedCholesky),
            "spectral-floor" => Ok(RepairMethod::SpectralFloor),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Plain Cholesky factor when it exists, else the repaired factorization.
fn whitening_factor(mat: &DMatrix<f64>, repair: RepairMethod) -> Result<ModifiedCholesky> {
    check_symmetric(mat)?;
    let n = mat.nrows();
    match cholesky(mat) {
        Ok(l) => Ok(ModifiedCholesky { perm: (0..n).collect(), factor: l, shift: vec![0.0; n] }),
        Err(_) => match repair {
            RepairMethod::ModifiedCholesky => modified_cholesky(mat),
            RepairMethod::SpectralFloor => Ok(ModifiedCholesky {
                perm: (0..n).collect(),
                factor: cholesky(&psd_repair(mat)?.matrix)?,
                shift: vec![0.0; n],
            }),
        },
    }
}

fn whitening_matrix(f: &ModifiedCholesky) -> DMatrix<f64> {
    let n = f.perm.len();
    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut col = vec![0.0; n];
    for c in 0..n {
        col.fill(0.0);
        col[c] = 1.0;
        f.whiten_in_place(&mut col);
        w.column_mut(c).copy_from_slice(&col);
    }
    w
}

/// [`whiten_with`] using the default repair.
pub fn whiten(grid: &Grid, model: &CovarianceModel) -> Result<Grid> {
    whiten_with(grid, model, RepairMethod::default())
}

/// `Y = S^(-1/2) (X - mean)` for the given covariance model. The separable
/// path computes `W2 C W1^T`, which equals `(W1 (x) W2) vec(C)` without
/// forming the `N x N` matrix.
pub fn whiten_with(grid: &Grid, model: &CovarianceModel, repair: RepairMethod) -> Result<Grid> {
    let (n, m) = (grid.n(), grid.m());
    let mean = grid.mean();
    match model {
        CovarianceModel::Full(s) => {
            if s.nrows() != n * m || s.ncols() != n * m {
                return Err(Error::DimensionMismatch(format!(
                    "covariance of order {} for a {n}x{m} grid",
                    s.nrows()
                )));
            }
            let f = whitening_factor(s, repair)?;
            let mut y: Vec<f64> = grid.as_slice().iter().map(|x| x - mean).collect();
            f.whiten_in_place(&mut y);
            Grid::unvec(n, m, y)
        }
        CovarianceModel::Separable { horizontal, vertical } => {
            if horizontal.nrows() != m || vertical.nrows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "separable factors {}x{} and {}x{} for a {n}x{m} grid",
                    horizontal.nrows(),
                    horizontal.ncols(),
                    vertical.nrows(),
                    vertical.ncols()
                )));
            }
            let w1 = whitening_matrix(&whitening_factor(horizontal, repair)?);
            let w2 = whitening_matrix(&whitening_factor(vertical, repair)?);
            let c = grid.matrix().add_scalar(-mean);
            Grid::from_matrix(w2 * c * w1.transpose())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecorrelateMethod {
    Full,
    Separable,
}

impl DecorrelateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DecorrelateMethod::Full => "full",
            DecorrelateMethod::Separable => "separable",
        }
    }
}

impl fmt::Display for DecorrelateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecorrelateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(DecorrelateMethod::Full),
            "separable" => Ok(DecorrelateMethod::Separable),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecorrelateOptions {
    pub method: DecorrelateMethod,
    /// Largest `N` for which a dense `N x N` covariance is built.
    pub size_guard: usize,
    pub repair: RepairMethod,
}

impl DecorrelateOptions {
    pub fn new(method: DecorrelateMethod) -> Self {
        DecorrelateOptions { method, size_guard: DEFAULT_SIZE_GUARD, repair: RepairMethod::default() }
    }
}

impl Default for DecorrelateOptions {
    fn default() -> Self {
        Self::new(DecorrelateMethod::Full)
    }
}

/// Estimates the covariance model from the grid itself and whitens it.
pub fn whiten_grid(grid: &Grid, opts: &DecorrelateOptions) -> Result<Grid> {
    let table = estimate_autocov_table(grid)?;
    if !(table.variance() > 0.0) {
        return Err(Error::ZeroVariance(table.variance()));
    }
    let model = match opts.method {
        DecorrelateMethod::Full => assemble_full(&table, grid.n(), grid.m(), opts.size_guard)?,
        DecorrelateMethod::Separable => separable_from_table(&table, grid.n(), grid.m())?,
    };
    whiten_with(grid, &model, opts.repair)
}
