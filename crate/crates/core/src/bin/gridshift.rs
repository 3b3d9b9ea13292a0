use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridshift::config::ExperimentConfig;
use gridshift::decorrelate::{DecorrelateMethod, DecorrelateOptions, RepairMethod, DEFAULT_SIZE_GUARD};
use gridshift::fieldgen::{gen_field, DependenceSpec, NoiseDist, NoiseSpec, SAR_MIN_ORDER};
use gridshift::io::{ndvi, read_grid, write_grid, GridFile};
use gridshift::report::{emit_report, ReportFormat};
use gridshift::scan::{scan, tile_map, ResultRecord, ScanOptions};
use gridshift::{make_partition, montecarlo, run_test, DepKind, Error, Grid, MeanSurface, SurfaceKind, TestKind};

/// Block-based tests for changes in the mean of gridded random fields.
#[derive(Parser)]
#[command(name = "gridshift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one grid for a change in mean.
    Test {
        grid: PathBuf,
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Split a grid into tiles, test each, and apply Holm's correction.
    Scan {
        grid: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        test: TestArgs,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Normalized difference vegetation index of two bands.
    Ndvi {
        #[arg(long)]
        red: PathBuf,
        #[arg(long)]
        nir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
    },
    /// Run a Monte Carlo experiment described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `master_seed` from the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a synthetic field.
    Generate {
        #[arg(long)]
        n: usize,
        /// Columns; defaults to `n`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value = "constant")]
        surface: SurfaceKind,
        #[arg(long, default_value_t = 0.0)]
        amplitude: f64,
        #[arg(long, default_value = "iid")]
        dep: DepKind,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value = "normal")]
        dist: NoiseDist,
        /// Block exponent used to place the single-block surface.
        #[arg(long = "s", default_value_t = 0.6)]
        s_target: f64,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct TestArgs {
    #[arg(long = "test", default_value = "var")]
    kind: TestKind,
    #[arg(long = "s", default_value_t = 0.6)]
    s_target: f64,
    #[arg(long, value_enum)]
    decorrelate: Option<Method>,
    /// Largest grid size for full-matrix whitening.
    #[arg(long, default_value_t = DEFAULT_SIZE_GUARD)]
    size_guard: usize,
    /// Repair applied to an indefinite covariance estimate.
    #[arg(long, default_value_t = RepairMethod::ModifiedCholesky)]
    repair: RepairMethod,
}

impl TestArgs {
    fn options(&self) -> Option<DecorrelateOptions> {
        self.decorrelate.map(|m| DecorrelateOptions {
            method: match m {
                Method::Full => DecorrelateMethod::Full,
                Method::Separable => DecorrelateMethod::Separable,
            },
            size_guard: self.size_guard,
            repair: self.repair,
        })
    }
}

#[derive(Args)]
struct CsvArgs {
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip the first line of each input file.
    #[arg(long)]
    header: bool,
}

impl CsvArgs {
    fn file(&self, path: &PathBuf) -> Result<GridFile, Error> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidArgument(format!("delimiter `{}` is not ASCII", self.delimiter)));
        }
        Ok(GridFile::new(path).delimiter(self.delimiter as u8).header(self.header))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Full,
    Separable,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

fn json_line(value: &impl serde::Serialize) -> Result<(), Error> {
    let line = serde_json::to_string(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Test { grid, test, csv } => {
            let g = read_grid(&csv.file(&grid)?)?;
            let r = run_test(&g, test.kind, test.s_target, test.options().as_ref())?;
            json_line(&ResultRecord::from(&r))?;
            let p = &r.partition;
            eprintln!(
                "{} test on {}x{} grid, {}x{} blocks of {}x{}: statistic {:.4}, p-value {:.4}",
                r.kind, r.n, r.m, p.b_n, p.b_m, p.l_n, p.l_m, r.statistic, r.p_value
            );
        }
        Command::Scan { grid, rows, cols, alpha, test, csv } => {
            let g = read_grid(&csv.file(&grid)?)?;
            let opts = ScanOptions {
                rows,
                cols,
                test: test.kind,
                s_target: test.s_target,
                decorrelate: test.options(),
                alpha,
            };
            let tiles = scan(&g, &opts)?;
            for t in &tiles {
                json_line(&ResultRecord::from(t))?;
            }
            let hits = tiles.iter().filter(|t| t.rejected).count();
            eprint!("{}", tile_map(&tiles, cols));
            eprintln!("{hits} of {} tiles rejected at family-wise level {alpha} (* = rejected)", tiles.len());
        }
        Command::Ndvi { red, nir, output, csv } => {
            let r = read_grid(&csv.file(&red)?)?;
            let n = read_grid(&csv.file(&nir)?)?;
            let out = ndvi(&r, &n)?;
            write_grid(&out.grid, &csv.file(&output)?)?;
            json_line(&serde_json::json!({ "n": out.grid.n(), "m": out.grid.m(), "flagged": out.flagged }))?;
            if out.flagged > 0 {
                eprintln!("{} cells with zero denominator set to 0", out.flagged);
            }
        }
        Command::Simulate { config, seed, output, format, threads } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let sim = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?
                    .install(|| montecarlo::simulate(&cfg))?,
                None => montecarlo::simulate(&cfg)?,
            };
            let report = sim.full_report()?;
            let fmt = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Table => ReportFormat::Table,
            };
            let text = emit_report(&report, fmt)?;
            match output {
                Some(path) => gridshift::io::write_text(&path, &text)?,
                None => print!("{text}"),
            }
            eprintln!("{} rows in {:.1} s", report.rows.len(), report.wall_clock_secs);
        }
        Command::Generate { n, m, surface, amplitude, dep, q, rho, dist, s_target, seed, output } => {
            let m = m.unwrap_or(n);
            let dep = match dep {
                DepKind::Iid => DependenceSpec::iid(),
                DepKind::Sma => DependenceSpec::sma(q.unwrap_or(1), rho),
                DepKind::Sar => DependenceSpec { kind: DepKind::Sar, q: q.unwrap_or(SAR_MIN_ORDER), rho },
            };
            if surface == SurfaceKind::Custom {
                return Err(Error::InvalidArgument("custom surfaces cannot be generated from the command line".into()));
            }
            let p = make_partition(n, m, s_target)?;
            let g: Grid = gen_field(n, m, &MeanSurface::new(surface, amplitude), &dep, NoiseSpec::new(dist, seed), &p)?;
            write_grid(&g, &GridFile::new(&output))?;
            eprintln!("wrote {n}x{m} field to {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_statistical() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
