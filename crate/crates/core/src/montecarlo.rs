//! Monte Carlo size and power studies.
//!
//! A *cell* is one combination of grid size, noise distribution and
//! dependence structure. Replication `r` of a cell draws its noise from a
//! seed derived from the master seed, the cell coordinates and `r` only, so
//! every surface, amplitude and test in that cell sees the same noise
//! realization. Null and alternative statistics are therefore paired, and the
//! results do not depend on how many threads run the replications.

use std::time::Instant;

use rayon::prelude::*;

use crate::change::{p_value, statistic, TestKind};
use crate::config::{DepConfig, ExperimentConfig};
use crate::decorrelate::{whiten_grid, DecorrelateOptions};
use crate::error::{Error, Result};
use crate::fieldgen::{derive_seed, gen_dependent, DepKind, NoiseDist, NoiseSpec};
use crate::grid::{eval_mean_surface, make_partition, sample_variance, BlockPartition, Grid, MeanSurface, SurfaceKind};

/// Smallest null sample accepted for an empirical critical value.
pub const MIN_NULL_REPS: usize = 100;

/// Note attached to every report.
pub const PAIRING_NOTE: &str =
    "null and alternative cells share noise: replication r of a cell uses one seed for every surface, amplitude and test";

/// One row of an experiment report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub test: TestKind,
    pub n: usize,
    pub dist: NoiseDist,
    pub dep_kind: DepKind,
    pub rho: f64,
    pub surface: SurfaceKind,
    pub amplitude: f64,
    pub decorrelated: bool,
    pub reps: usize,
    pub rate: f64,
    pub se: f64,
    /// Empirical critical value for size-corrected rows, `None` for rows
    /// tested against the asymptotic normal quantile.
    pub crit_value: Option<f64>,
    /// Seconds spent simulating the cell this row belongs to.
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
    pub wall_clock_secs: f64,
}

/// Binomial standard error of a rejection rate.
pub fn binomial_se(rate: f64, reps: usize) -> f64 {
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

/// Fraction of statistics whose upper-tail normal p-value is at most `alpha`.
pub fn rejection_rate(stats: &[f64], alpha: f64) -> f64 {
    let hits = stats.iter().filter(|&&s| p_value(s) <= alpha).count();
    hits as f64 / stats.len() as f64
}

/// Empirical `(1 - alpha)` quantile of the null statistics (the order
/// statistic of rank `ceil((1 - alpha) R)`) and the fraction of `alt`
/// strictly above it.
pub fn size_correct(null: &[f64], alt: &[f64], alpha: f64) -> Result<(f64, f64)> {
    if null.len() < MIN_NULL_REPS {
        return Err(Error::InsufficientNullSample(null.len()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let mut sorted = null.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((1.0 - alpha) * sorted.len() as f64 - 1e-9).ceil() as usize;
    let crit = if rank == 0 { f64::NEG_INFINITY } else { sorted[rank - 1] };
    let rate = alt.iter().filter(|&&s| s > crit).count() as f64 / alt.len() as f64;
    Ok((crit, rate))
}

/// Grid size, noise and dependence of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub n: usize,
    pub dist: NoiseDist,
    pub dep: DepConfig,
}

impl CellKey {
    /// Seed of replication `rep`. Independent of surfaces, amplitudes and tests.
    pub fn seed(&self, master: u64, rep: usize) -> u64 {
        let spec = self.dep.spec();
        let dist = match self.dist {
            NoiseDist::StdNormal => 0,
            NoiseDist::StudentT3 => 1,
            NoiseDist::ChiSq2Centered => 2,
            NoiseDist::Zero => 3,
        };
        let dep = match spec.kind {
            DepKind::Iid => 0,
            DepKind::Sma => 1,
            DepKind::Sar => 2,
        };
        derive_seed(
            master,
            &[self.n as u64, dist, dep, spec.q as u64, spec.rho.to_bits(), rep as u64],
        )
    }
}

/// Statistics of one surface/amplitude pair, indexed `[test][rep]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSample {
    pub surface: SurfaceKind,
    pub amplitude: f64,
    pub stats: Vec<Vec<f64>>,
}

/// All statistics simulated for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSample {
    pub key: CellKey,
    pub partition: BlockPartition,
    /// Zero mean surface, indexed `[test][rep]`.
    pub null: Vec<Vec<f64>>,
    pub scenarios: Vec<ScenarioSample>,
    pub wall_clock_secs: f64,
}

/// Raw statistics of a whole experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub config: ExperimentConfig,
    pub cells: Vec<CellSample>,
    pub wall_clock_secs: f64,
}

fn test_field(
    field: &Grid,
    tests: &[TestKind],
    p: &BlockPartition,
    decorrelate: Option<&DecorrelateOptions>,
) -> Result<Vec<f64>> {
    let whitened;
    let data = match decorrelate {
        Some(opts) => {
            whitened = whiten_grid(field, opts)?;
            &whitened
        }
        None => field,
    };
    let s2 = sample_variance(data)?;
    tests.iter().map(|&k| Ok(statistic(k, data, p, s2)?.statistic)).collect()
}

/// Null statistics plus one entry per scenario, for one replication.
type RepStats = (Vec<f64>, Vec<Vec<f64>>);

fn one_rep(
    cfg: &ExperimentConfig,
    key: &CellKey,
    p: &BlockPartition,
    scenarios: &[(SurfaceKind, f64)],
    rep: usize,
) -> Result<RepStats> {
    let n = key.n;
    let noise = NoiseSpec::new(key.dist, key.seed(cfg.master_seed, rep));
    let y = gen_dependent(n, n, &key.dep.spec(), noise)?;
    let dec = cfg.decorrelation();
    let null = test_field(&y, &cfg.tests, p, dec.as_ref())?;
    let mut alts = Vec::with_capacity(scenarios.len());
    for &(kind, a) in scenarios {
        if a == 0.0 {
            alts.push(null.clone());
            continue;
        }
        let mu = eval_mean_surface(&MeanSurface::new(kind, a), n, n, p)?;
        alts.push(test_field(&mu.add(&y)?, &cfg.tests, p, dec.as_ref())?);
    }
    Ok((null, alts))
}

fn simulate_cell(cfg: &ExperimentConfig, key: CellKey, scenarios: &[(SurfaceKind, f64)]) -> Result<CellSample> {
    let start = Instant::now();
    let p = make_partition(key.n, key.n, cfg.s_target)?;
    let reps: Vec<RepStats> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| one_rep(cfg, &key, &p, scenarios, r))
        .collect::<Result<_>>()?;
    let nt = cfg.tests.len();
    let by_test = |get: &dyn Fn(&RepStats) -> &Vec<f64>| -> Vec<Vec<f64>> {
        (0..nt).map(|t| reps.iter().map(|r| get(r)[t]).collect()).collect()
    };
    let null = by_test(&|r| &r.0);
    let scenarios = scenarios
        .iter()
        .enumerate()
        .map(|(s, &(surface, amplitude))| ScenarioSample {
            surface,
            amplitude,
            stats: by_test(&|r| &r.1[s]),
        })
        .collect();
    Ok(CellSample { key, partition: p, null, scenarios, wall_clock_secs: start.elapsed().as_secs_f64() })
}

fn cells(cfg: &ExperimentConfig) -> Vec<CellKey> {
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        for &dist in &cfg.noise {
            for &dep in &cfg.dep {
                out.push(CellKey { n, dist, dep });
            }
        }
    }
    out
}

fn run(cfg: &ExperimentConfig, with_scenarios: bool) -> Result<Simulation> {
    cfg.validate()?;
    let start = Instant::now();
    let scenarios: Vec<(SurfaceKind, f64)> = if with_scenarios {
        cfg.surfaces.iter().flat_map(|s| s.amplitudes.iter().map(move |&a| (s.kind, a))).collect()
    } else {
        Vec::new()
    };
    let cells = cells(cfg)
        .into_iter()
        .map(|k| simulate_cell(cfg, k, &scenarios))
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation { config: cfg.clone(), cells, wall_clock_secs: start.elapsed().as_secs_f64() })
}

/// Simulates the null and every configured surface and amplitude.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    run(cfg, true)
}

impl Simulation {
    fn row(&self, cell: &CellSample, t: usize, surface: SurfaceKind, amplitude: f64, rate: f64, crit: Option<f64>) -> ReportRow {
        let spec = cell.key.dep.spec();
        ReportRow {
            test: self.config.tests[t],
            n: cell.key.n,
            dist: cell.key.dist,
            dep_kind: spec.kind,
            rho: spec.rho,
            surface,
            amplitude,
            decorrelated: self.config.decorrelate,
            reps: self.config.reps,
            rate,
            se: binomial_se(rate, self.config.reps),
            crit_value: crit,
            wall_clock_secs: cell.wall_clock_secs,
        }
    }

    fn report(&self, rows: Vec<ReportRow>) -> ExperimentReport {
        ExperimentReport { rows, notes: vec![PAIRING_NOTE.to_string()], wall_clock_secs: self.wall_clock_secs }
    }

    /// Rejection rates under the zero mean at the nominal level.
    pub fn size_report(&self) -> ExperimentReport {
        let alpha = self.config.alpha;
        let mut rows = Vec::new();
        for cell in &self.cells {
            for (t, stats) in cell.null.iter().enumerate() {
                rows.push(self.row(cell, t, SurfaceKind::Constant, 0.0, rejection_rate(stats, alpha), None));
            }
        }
        self.report(rows)
    }

    /// Rejection rates of every scenario at the nominal level.
    pub fn power_report(&self) -> ExperimentReport {
        let alpha = self.config.alpha;
        let mut rows = Vec::new();
        for cell in &self.cells {
            for t in 0..self.config.tests.len() {
                for sc in &cell.scenarios {
                    rows.push(self.row(cell, t, sc.surface, sc.amplitude, rejection_rate(&sc.stats[t], alpha), None));
                }
            }
        }
        self.report(rows)
    }

    /// Rejection rates of every scenario against the empirical null quantile.
    pub fn size_corrected_report(&self) -> Result<ExperimentReport> {
        let alpha = self.config.alpha;
        let mut rows = Vec::new();
        for cell in &self.cells {
            for t in 0..self.config.tests.len() {
                for sc in &cell.scenarios {
                    let (crit, rate) = size_correct(&cell.null[t], &sc.stats[t], alpha)?;
                    rows.push(self.row(cell, t, sc.surface, sc.amplitude, rate, Some(crit)));
                }
            }
        }
        Ok(self.report(rows))
    }

    /// Nominal rows followed by size-corrected rows when the configuration
    /// sweeps a zero amplitude.
    pub fn full_report(&self) -> Result<ExperimentReport> {
        let mut report = self.power_report();
        if self.config.has_null_amplitude() {
            report.rows.extend(self.size_corrected_report()?.rows);
        }
        Ok(report)
    }
}

/// Empirical size of every cell. Surfaces in the configuration are ignored.
pub fn simulate_size(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(run(cfg, false)?.size_report())
}

/// Nominal-level rejection rates over every surface and amplitude.
pub fn simulate_power(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !cfg.surfaces.iter().any(|s| !s.amplitudes.is_empty()) {
        return Err(Error::Config("amplitude grid is empty".into()));
    }
    Ok(simulate(cfg)?.power_report())
}

/// Size-corrected rejection rates over every surface and amplitude.
pub fn size_corrected_power(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.reps < MIN_NULL_REPS {
        return Err(Error::InsufficientNullSample(cfg.reps));
    }
    simulate(cfg)?.size_corrected_report()
}
