//! Seeded synthetic random fields.
//!
//! Every generator is a pure function of its dimensions, specs and seed.
//! Innovations are drawn in column-major order from a ChaCha8 stream.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{eval_mean_surface, BlockPartition, Grid, MeanSurface};

/// Smallest stencil radius accepted for the spatial AR(1) approximation.
pub const SAR_MIN_ORDER: usize = 40;

/// Innovation distribution. All variants are centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseDist {
    /// N(0, 1).
    #[serde(rename = "normal")]
    StdNormal,
    /// Student t with 3 degrees of freedom (variance 3).
    #[serde(rename = "t3")]
    StudentT3,
    /// Chi-squared with 2 degrees of freedom minus 2 (variance 4).
    #[serde(rename = "chisq2")]
    ChiSq2Centered,
    /// Point mass at zero. Only useful to isolate the mean surface.
    #[serde(rename = "zero")]
    Zero,
}

impl NoiseDist {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseDist::StdNormal => "normal",
            NoiseDist::StudentT3 => "t3",
            NoiseDist::ChiSq2Centered => "chisq2",
            NoiseDist::Zero => "zero",
        }
    }

    /// Theoretical variance of one draw.
    pub fn variance(self) -> f64 {
        match self {
            NoiseDist::StdNormal => 1.0,
            NoiseDist::StudentT3 => 3.0,
            NoiseDist::ChiSq2Centered => 4.0,
            NoiseDist::Zero => 0.0,
        }
    }

    fn fill<R: Rng>(self, rng: &mut R, out: &mut [f64]) {
        match self {
            NoiseDist::StdNormal => {
                for v in out {
                    *v = rng.sample(StandardNormal);
                }
            }
            NoiseDist::StudentT3 => {
                let t = StudentT::new(3.0).expect("3 degrees of freedom");
                for v in out {
                    *v = t.sample(rng);
                }
            }
            NoiseDist::ChiSq2Centered => {
                let c = ChiSquared::new(2.0).expect("2 degrees of freedom");
                for v in out {
                    *v = c.sample(rng) - 2.0;
                }
            }
            NoiseDist::Zero => out.fill(0.0),
        }
    }
}

impl fmt::Display for NoiseDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "n01" | "stdnormal" | "gaussian" => Ok(NoiseDist::StdNormal),
            "t3" | "studentt3" => Ok(NoiseDist::StudentT3),
            "chisq2" | "chi2" | "chisq2centered" => Ok(NoiseDist::ChiSq2Centered),
            "zero" => Ok(NoiseDist::Zero),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseSpec {
    pub dist: NoiseDist,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(dist: NoiseDist, seed: u64) -> Self {
        NoiseSpec { dist, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepKind {
    Iid,
    /// Symmetric spatial moving average with weights `rho^(|k| + |l|)`.
    Sma,
    /// Normalized radial moving average approximating a spatial AR(1).
    Sar,
}

impl DepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DepKind::Iid => "iid",
            DepKind::Sma => "sma",
            DepKind::Sar => "sar",
        }
    }
}

impl fmt::Display for DepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" | "none" => Ok(DepKind::Iid),
            "sma" => Ok(DepKind::Sma),
            "sar" | "sarapprox" | "sar_approx" => Ok(DepKind::Sar),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Dependence structure of the noise field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceSpec {
    pub kind: DepKind,
    pub q: usize,
    pub rho: f64,
}

impl DependenceSpec {
    pub fn iid() -> Self {
        DependenceSpec { kind: DepKind::Iid, q: 0, rho: 0.0 }
    }

    pub fn sma(q: usize, rho: f64) -> Self {
        DependenceSpec { kind: DepKind::Sma, q, rho }
    }

    /// Spatial AR(1) approximation with the default stencil radius.
    pub fn sar(rho: f64) -> Self {
        DependenceSpec { kind: DepKind::Sar, q: SAR_MIN_ORDER, rho }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DepKind::Iid if self.q != 0 => {
                Err(Error::InvalidOrder(format!("iid noise requires q = 0, got {}", self.q)))
            }
            DepKind::Iid => Ok(()),
            DepKind::Sma => check_rho(self.rho, -1.0),
            DepKind::Sar => {
                if self.q < SAR_MIN_ORDER {
                    return Err(Error::InvalidOrder(format!(
                        "SAR approximation requires q >= {SAR_MIN_ORDER}, got {}",
                        self.q
                    )));
                }
                check_rho(self.rho, 0.0)
            }
        }
    }

    /// The convolution stencil, or `None` for iid noise.
    pub fn weights(&self) -> Result<Option<DMatrix<f64>>> {
        self.validate()?;
        match self.kind {
            DepKind::Iid => Ok(None),
            DepKind::Sma => sma_weights(self.q, self.rho).map(Some),
            DepKind::Sar => sar_approx_weights(self.q, self.rho).map(Some),
        }
    }
}

fn check_rho(rho: f64, lower: f64) -> Result<()> {
    // lower = -1 is exclusive, lower = 0 inclusive
    let ok = if lower < 0.0 { rho > lower } else { rho >= lower };
    if ok && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRho(rho))
    }
}

/// `(2q+1) x (2q+1)` stencil with entry `rho^(|k| + |l|)` at offset
/// `(k, l)` from the center. `0^0` is 1.
pub fn sma_weights(q: usize, rho: f64) -> Result<DMatrix<f64>> {
    check_rho(rho, -1.0)?;
    let w = 2 * q + 1;
    Ok(DMatrix::from_fn(w, w, |a, b| {
        let d = a.abs_diff(q) + b.abs_diff(q);
        rho.powi(d as i32)
    }))
}

/// Radial stencil `rho^sqrt(k^2 + l^2)` normalized to unit sum of squares.
pub fn sar_approx_weights(q: usize, rho: f64) -> Result<DMatrix<f64>> {
    if q < SAR_MIN_ORDER {
        return Err(Error::InvalidOrder(format!(
            "SAR approximation requires q >= {SAR_MIN_ORDER}, got {q}"
        )));
    }
    check_rho(rho, 0.0)?;
    let w = 2 * q + 1;
    let raw = DMatrix::from_fn(w, w, |a, b| {
        let (k, l) = (a.abs_diff(q) as f64, b.abs_diff(q) as f64);
        if k == 0.0 && l == 0.0 {
            1.0
        } else {
            rho.powf((k * k + l * l).sqrt())
        }
    });
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(raw / norm)
}

/// `n x m` independent draws from `noise.dist`.
pub fn gen_iid(n: usize, m: usize, noise: NoiseSpec) -> Result<Grid> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!("grid dimensions must be positive, got {n}x{m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut data = vec![0.0; n * m];
    noise.dist.fill(&mut rng, &mut data);
    Grid::unvec(n, m, data)
}

/// Moving-average field: an `(n+2q) x (m+2q)` innovation field convolved
/// with the stencil, keeping the `n x m` interior where the stencil fits.
pub fn gen_dependent(n: usize, m: usize, dep: &DependenceSpec, noise: NoiseSpec) -> Result<Grid> {
    let Some(theta) = dep.weights()? else {
        return gen_iid(n, m, noise);
    };
    let q = dep.q;
    let (big_n, big_m) = (n + 2 * q, m + 2 * q);
    let eps = gen_iid(big_n, big_m, noise)?;
    let eps = eps.as_slice();
    let w = 2 * q + 1;
    let mut out = vec![0.0; n * m];
    for j in 0..m {
        for i in 0..n {
            let mut acc = 0.0;
            for b in 0..w {
                let col = &eps[(j + b) * big_n + i..(j + b) * big_n + i + w];
                let tcol = theta.column(b);
                for (t, e) in tcol.iter().zip(col) {
                    acc += t * e;
                }
            }
            out[i + j * n] = acc;
        }
    }
    Grid::unvec(n, m, out)
}

/// Signal plus noise: `mu(i, j) + Y_ij`.
pub fn gen_field(
    n: usize,
    m: usize,
    surface: &MeanSurface,
    dep: &DependenceSpec,
    noise: NoiseSpec,
    p: &BlockPartition,
) -> Result<Grid> {
    let mu = eval_mean_surface(surface, n, m, p)?;
    let y = gen_dependent(n, m, dep, noise)?;
    mu.add(&y)
}

/// Derives an independent stream seed from a master seed and a key path,
/// using the SplitMix64 finalizer at each step. The result depends only on
/// the inputs, so per-replication seeds do not depend on scheduling.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(splitmix64(master), |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_partition, sample_variance, SurfaceKind};

    fn moments(x: &[f64]) -> (f64, f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let skew = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n / var.powf(1.5);
        (mean, var, skew)
    }

    /// Lag autocovariance with divisor N, computed straight from the cells.
    fn lag_cov(g: &Grid, h1: usize, h2: usize) -> f64 {
        let mean = g.mean();
        let mut s = 0.0;
        for i in 0..g.n() - h1 {
            for j in 0..g.m() - h2 {
                s += (g.get(i, j) - mean) * (g.get(i + h1, j + h2) - mean);
            }
        }
        s / g.len() as f64
    }

    #[test]
    fn iid_normal_moments() {
        let g = gen_iid(200, 200, NoiseSpec::new(NoiseDist::StdNormal, 11)).unwrap();
        let (mean, var, _) = moments(g.as_slice());
        assert!(mean.abs() < 0.015, "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * (2.0f64 / 40000.0).sqrt(), "var {var}");
    }

    #[test]
    fn iid_chisq_moments() {
        let g = gen_iid(200, 200, NoiseSpec::new(NoiseDist::ChiSq2Centered, 12)).unwrap();
        let (mean, var, skew) = moments(g.as_slice());
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 4.0).abs() < 0.2, "var {var}");
        // skewness of chi^2_2 is 2; its sampling sd at N = 4e4 is about 0.1
        assert!((skew - 2.0).abs() < 0.3, "skew {skew}");
    }

    #[test]
    fn iid_t3_centered() {
        let g = gen_iid(200, 200, NoiseSpec::new(NoiseDist::StudentT3, 13)).unwrap();
        let (mean, _, _) = moments(g.as_slice());
        assert!(mean.abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = gen_iid(30, 20, NoiseSpec::new(NoiseDist::StudentT3, 5)).unwrap();
        let b = gen_iid(30, 20, NoiseSpec::new(NoiseDist::StudentT3, 5)).unwrap();
        let c = gen_iid(30, 20, NoiseSpec::new(NoiseDist::StudentT3, 6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let dep = DependenceSpec::sma(1, 0.3);
        let noise = NoiseSpec::new(NoiseDist::StdNormal, 9);
        assert_eq!(gen_dependent(12, 9, &dep, noise).unwrap(), gen_dependent(12, 9, &dep, noise).unwrap());
    }

    #[test]
    fn sma_weight_examples() {
        let w = sma_weights(1, 0.0).unwrap();
        assert_eq!(w, DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 1., 0., 0., 0., 0.]));
        let w = sma_weights(1, 0.5).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[0.25, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 0.25]);
        assert_eq!(w, want);
        let w = sma_weights(3, -0.7).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(w[(a, b)], w[(6 - a, b)]);
                assert_eq!(w[(a, b)], w[(a, 6 - b)]);
            }
        }
        assert!(matches!(sma_weights(1, 1.0), Err(Error::InvalidRho(_))));
        assert!(matches!(sma_weights(1, -1.0), Err(Error::InvalidRho(_))));
    }

    #[test]
    fn sar_weight_examples() {
        let w = sar_approx_weights(40, 0.3).unwrap();
        assert!((w.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        let mut ss = 0.0;
        for i in -40i32..=40 {
            for j in -40i32..=40 {
                ss += 0.3f64.powf(2.0 * f64::from(i * i + j * j).sqrt());
            }
        }
        assert!((w[(40, 40)] - 1.0 / ss.sqrt()).abs() < 1e-14);

        let w0 = sar_approx_weights(40, 1e-12).unwrap();
        assert!((w0[(40, 40)] - 1.0).abs() < 1e-10);
        assert!(w0[(40, 41)].abs() < 1e-10);
        assert!(matches!(sar_approx_weights(10, 0.3), Err(Error::InvalidOrder(_))));
        assert!(matches!(sar_approx_weights(40, 1.0), Err(Error::InvalidRho(_))));
        assert!(matches!(sar_approx_weights(40, -0.2), Err(Error::InvalidRho(_))));
    }

    #[test]
    fn iid_dependence_matches_gen_iid() {
        let noise = NoiseSpec::new(NoiseDist::ChiSq2Centered, 21);
        assert_eq!(
            gen_dependent(10, 7, &DependenceSpec::iid(), noise).unwrap(),
            gen_iid(10, 7, noise).unwrap()
        );
        let bad = DependenceSpec { kind: DepKind::Iid, q: 2, rho: 0.0 };
        assert!(matches!(bad.validate(), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn sma_convolution_by_hand() {
        let dep = DependenceSpec::sma(1, 0.5);
        let noise = NoiseSpec::new(NoiseDist::StdNormal, 3);
        let y = gen_dependent(4, 5, &dep, noise).unwrap();
        let eps = gen_iid(6, 7, noise).unwrap();
        let theta = sma_weights(1, 0.5).unwrap();
        for i in 0..4 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += theta[(k, l)] * eps.get(i + k, j + l);
                    }
                }
                assert!((y.get(i, j) - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sma_variance_identity() {
        // sum of squared weights for q = 1, rho = 0.5 is 2.25
        let y = gen_dependent(300, 300, &DependenceSpec::sma(1, 0.5), NoiseSpec::new(NoiseDist::StdNormal, 4))
            .unwrap();
        let v = sample_variance(&y).unwrap();
        assert!((v / 2.25 - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn sma_dependence_ends_at_stencil_width() {
        // a (2q+1)-wide stencil makes cells 2q apart share innovations
        let y = gen_dependent(300, 300, &DependenceSpec::sma(1, 0.5), NoiseSpec::new(NoiseDist::StdNormal, 8))
            .unwrap();
        let tol = 4.0 / (y.len() as f64).sqrt() * 2.25;
        for (h1, h2) in [(3, 0), (0, 3), (3, 3), (4, 1), (1, 3)] {
            let c = lag_cov(&y, h1, h2);
            assert!(c.abs() < tol, "lag ({h1},{h2}) = {c}");
        }
        // exact values: lag (1,0) is 2 * 0.5 * 1.5^2 = 2.25 * 2/3 ... computed
        // from the stencil as sum theta_{k,l} theta_{k+h1,l+h2}
        let theta = sma_weights(1, 0.5).unwrap();
        for (h1, h2) in [(1usize, 0usize), (2, 0), (1, 1), (2, 2)] {
            let mut want = 0.0;
            for a in 0..3 - h1 {
                for b in 0..3 - h2 {
                    want += theta[(a, b)] * theta[(a + h1, b + h2)];
                }
            }
            let c = lag_cov(&y, h1, h2);
            assert!((c - want).abs() < tol, "lag ({h1},{h2}) = {c}, want {want}");
        }
    }

    #[test]
    fn signal_plus_degenerate_noise_is_the_surface() {
        let p = make_partition(20, 20, 0.6).unwrap();
        let s = MeanSurface::new(SurfaceKind::A2, 0.7);
        let x = gen_field(20, 20, &s, &DependenceSpec::iid(), NoiseSpec::new(NoiseDist::Zero, 1), &p).unwrap();
        assert_eq!(x, eval_mean_surface(&s, 20, 20, &p).unwrap());
    }

    #[test]
    fn half_plane_shift_recovered() {
        let n = 200;
        let p = make_partition(n, n, 0.6).unwrap();
        let a = 0.5;
        let s = MeanSurface::new(SurfaceKind::A2, a);
        let x = gen_field(n, n, &s, &DependenceSpec::iid(), NoiseSpec::new(NoiseDist::StdNormal, 2), &p).unwrap();
        let half = |lo: usize, hi: usize| {
            let mut acc = 0.0;
            for j in lo..hi {
                acc += x.matrix().column(j).sum();
            }
            acc / ((hi - lo) * n) as f64
        };
        let diff = half(0, n / 2) - half(n / 2, n);
        // sd of the difference is sqrt(2 / 20000) = 0.01
        assert!((diff - a).abs() < 0.03, "diff {diff}");
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0, 0]);
        assert_eq!(a, derive_seed(1, &[0, 0]));
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
    }
}
