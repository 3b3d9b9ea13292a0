//! C ABI for gridshift.
//!
//! Grids are opaque `GsGrid` handles created by `gs_grid_new`,
//! `gs_grid_read_csv` or `gs_generate_field` and released with
//! `gs_grid_free`. Every fallible function returns a `GsStatus`; on failure
//! the message of the last error on the calling thread is available through
//! `gs_last_error_message`. Matrices cross the boundary in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gridshift::decorrelate::{DecorrelateMethod, DecorrelateOptions};
use gridshift::fieldgen::{gen_field, DependenceSpec, NoiseSpec, SAR_MIN_ORDER};
use gridshift::io::{read_grid, write_grid, GridFile};
use gridshift::{
    holm_adjust, make_partition, run_test, DepKind, Error, Grid, MeanSurface, NoiseDist, SurfaceKind, TestKind,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NoValidPartition = 4,
    ZeroVariance = 5,
    NonFinite = 6,
    /// Cholesky breakdown or an asymmetric covariance.
    Numerical = 7,
    SizeGuardExceeded = 8,
    Parse = 9,
    Io = 10,
    InsufficientNullSample = 11,
    /// A Rust panic was caught at the boundary.
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsTestKind {
    Gmd = 0,
    Var = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsDecorrelate {
    None = 0,
    Full = 1,
    Separable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsSurface {
    Constant = 0,
    A1 = 1,
    A2 = 2,
    A3 = 3,
    A4 = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsDependence {
    Iid = 0,
    Sma = 1,
    Sar = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsNoise {
    Normal = 0,
    StudentT3 = 1,
    ChiSq2 = 2,
}

/// Outcome of `gs_run_test`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub sigma2_hat: f64,
    /// `U` for GMD, the block-mean sum of squares for Var.
    pub raw: f64,
    pub l_n: usize,
    pub l_m: usize,
    pub b_n: usize,
    pub b_m: usize,
}

/// Opaque grid handle.
pub struct GsGrid(Grid);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::DimensionMismatch(_) | Error::NotDivisible { .. } => GsStatus::DimensionMismatch,
        Error::NoValidPartition { .. } | Error::TooFewBlocks(_) | Error::DegenerateGrid(_) => {
            GsStatus::NoValidPartition
        }
        Error::ZeroVariance(_) => GsStatus::ZeroVariance,
        Error::NonFinite { .. } => GsStatus::NonFinite,
        Error::SingularFactor { .. } | Error::NotSymmetric(_) => GsStatus::Numerical,
        Error::SizeGuardExceeded { .. } => GsStatus::SizeGuardExceeded,
        Error::Parse { .. } => GsStatus::Parse,
        Error::Io { .. } => GsStatus::Io,
        Error::InsufficientNullSample(_) => GsStatus::InsufficientNullSample,
        _ => GsStatus::InvalidArgument,
    }
}

/// Runs `f`, records any error message and converts panics.
fn guard(f: impl FnOnce() -> Result<(), (GsStatus, String)>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GsStatus::Internal
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (GsStatus, String)>;
}

impl<T> OrStatus<T> for gridshift::Result<T> {
    fn or_status(self) -> Result<T, (GsStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (GsStatus, String) {
    (GsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(path: *const c_char) -> Result<String, (GsStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (GsStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn store(out: *mut *mut GsGrid, g: Grid) {
    *out = Box::into_raw(Box::new(GsGrid(g)));
}

/// Copies `rows * cols` row-major values into a new grid.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` to a
/// writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_new(rows: usize, cols: usize, data: *const f64, out: *mut *mut GsGrid) -> GsStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or((GsStatus::InvalidArgument, "rows * cols overflows".to_string()))?;
        let vals = std::slice::from_raw_parts(data, len);
        let col_major: Vec<f64> = (0..len).map(|k| vals[(k % rows) * cols + k / rows]).collect();
        let g = Grid::unvec(rows, cols, col_major).or_status()?;
        store(out, g);
        Ok(())
    })
}

/// Reads a comma-separated grid file without header.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_read_csv(path: *const c_char, out: *mut *mut GsGrid) -> GsStatus {
    guard(|| {
        let p = path_arg(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = read_grid(&GridFile::new(p)).or_status()?;
        store(out, g);
        Ok(())
    })
}

/// Writes the grid as comma-separated text.
///
/// # Safety
/// `grid` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_write_csv(grid: *const GsGrid, path: *const c_char) -> GsStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null("grid"))?;
        let p = path_arg(path)?;
        write_grid(&g.0, &GridFile::new(p)).or_status()
    })
}

/// Releases a grid. Null is ignored.
///
/// # Safety
/// `grid` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_free(grid: *mut GsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_rows(grid: *const GsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.n())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_cols(grid: *const GsGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.m())
}

/// Copies the values in row-major order; `len` must equal rows * cols.
///
/// # Safety
/// `grid` must be a live handle and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gs_grid_copy(grid: *const GsGrid, out: *mut f64, len: usize) -> GsStatus {
    guard(|| {
        let g = &grid.as_ref().ok_or_else(|| null("grid"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != g.len() {
            return Err((GsStatus::DimensionMismatch, format!("buffer holds {len} values, grid has {}", g.len())));
        }
        let dst = std::slice::from_raw_parts_mut(out, len);
        for i in 0..g.n() {
            for j in 0..g.m() {
                dst[i * g.m() + j] = g.get(i, j);
            }
        }
        Ok(())
    })
}

/// Synthetic field: mean surface plus seeded noise. `q` is ignored for iid
/// noise; 0 selects the default order for the dependent models.
///
/// # Safety
/// `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn gs_generate_field(
    n: usize,
    m: usize,
    surface: GsSurface,
    amplitude: f64,
    dependence: GsDependence,
    q: usize,
    rho: f64,
    noise: GsNoise,
    seed: u64,
    s_target: f64,
    out: *mut *mut GsGrid,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match surface {
            GsSurface::Constant => SurfaceKind::Constant,
            GsSurface::A1 => SurfaceKind::A1,
            GsSurface::A2 => SurfaceKind::A2,
            GsSurface::A3 => SurfaceKind::A3,
            GsSurface::A4 => SurfaceKind::A4,
        };
        let dep = match dependence {
            GsDependence::Iid => DependenceSpec::iid(),
            GsDependence::Sma => DependenceSpec::sma(if q == 0 { 1 } else { q }, rho),
            GsDependence::Sar => {
                DependenceSpec { kind: DepKind::Sar, q: if q == 0 { SAR_MIN_ORDER } else { q }, rho }
            }
        };
        let dist = match noise {
            GsNoise::Normal => NoiseDist::StdNormal,
            GsNoise::StudentT3 => NoiseDist::StudentT3,
            GsNoise::ChiSq2 => NoiseDist::ChiSq2Centered,
        };
        let p = make_partition(n, m, s_target).or_status()?;
        let g = gen_field(n, m, &MeanSurface::new(kind, amplitude), &dep, NoiseSpec::new(dist, seed), &p)
            .or_status()?;
        store(out, g);
        Ok(())
    })
}

/// Runs the GMD or Var test, optionally after de-correlation.
///
/// # Safety
/// `grid` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gs_run_test(
    grid: *const GsGrid,
    kind: GsTestKind,
    s_target: f64,
    decorrelate: GsDecorrelate,
    out: *mut GsTestResult,
) -> GsStatus {
    guard(|| {
        let g = &grid.as_ref().ok_or_else(|| null("grid"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            GsTestKind::Gmd => TestKind::Gmd,
            GsTestKind::Var => TestKind::Var,
        };
        let opts = match decorrelate {
            GsDecorrelate::None => None,
            GsDecorrelate::Full => Some(DecorrelateOptions::new(DecorrelateMethod::Full)),
            GsDecorrelate::Separable => Some(DecorrelateOptions::new(DecorrelateMethod::Separable)),
        };
        let r = run_test(g, kind, s_target, opts.as_ref()).or_status()?;
        *out = GsTestResult {
            statistic: r.statistic,
            p_value: r.p_value,
            sigma2_hat: r.sigma2_hat,
            raw: r.raw,
            l_n: r.partition.l_n,
            l_m: r.partition.l_m,
            b_n: r.partition.b_n,
            b_m: r.partition.b_m,
        };
        Ok(())
    })
}

/// Holm's step-down procedure. `rejected` and `adjusted` receive `len`
/// entries each, in input order; either may be null if not wanted.
///
/// # Safety
/// `p_values` must hold `len` doubles; non-null outputs must have room for
/// `len` entries.
#[no_mangle]
pub unsafe extern "C" fn gs_holm(
    p_values: *const f64,
    len: usize,
    alpha: f64,
    rejected: *mut bool,
    adjusted: *mut f64,
) -> GsStatus {
    guard(|| {
        if p_values.is_null() && len > 0 {
            return Err(null("p_values"));
        }
        let ps = if len == 0 { &[][..] } else { std::slice::from_raw_parts(p_values, len) };
        let h = holm_adjust(ps, alpha).or_status()?;
        if !rejected.is_null() && len > 0 {
            std::slice::from_raw_parts_mut(rejected, len).copy_from_slice(&h.rejected);
        }
        if !adjusted.is_null() && len > 0 {
            std::slice::from_raw_parts_mut(adjusted, len).copy_from_slice(&h.adjusted);
        }
        Ok(())
    })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to fit) and returns its full length in bytes. Pass a null
/// buffer to query the length.
///
/// # Safety
/// `buf` must be null or have room for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
