//! Command-line front end: argument parsing into a [`RunManifest`], command
//! dispatch and artifact emission.
//!
//! ```text
//! freewalk <command> [--config PATH|K3xK3|PathxK3] [--out DIR] [--seed S]
//!          [--n STEPS] [--M WALKS] [--buffer B] [--order N] [--stat S] [--grid G]
//! ```
//!
//! | command        | artifacts                                  | defaults               |
//! |----------------|--------------------------------------------|------------------------|
//! | `validate`     | `validation.json`                          |                        |
//! | `genfun`       | `genfun.json`, `genfun.csv` (L tables)     |                        |
//! | `oracle-check` | `oracle_check.json`, `oracle_check.csv`    | `--order 14`           |
//! | `simulate`     | `simulate.json`, `simulate.csv` (blocks)   | `--n 20000 --M 200`    |
//! | `clt`          | `clt_<stat>.json`, `clt_<stat>.csv`        | `--n 5000 --M 2000`    |
//! | `diagnostics`  | `diagnostics.json`, `diagnostics.csv`      | `--n 20000 --M 200`    |
//! | `sweep`        | `sweep.json`, `sweep.csv`                  | `--n 20000 --M 100`    |
//!
//! Common defaults: `--config K3xK3`, `--out out`, `--seed 1`, `--buffer 500`,
//! `--stat dist`, `--grid 0.30:0.70:0.05` (`start:stop:step` or a comma list).
//! `oracle-check` runs the identities in rational arithmetic up to order
//! `min(N, 10)` and in floating point at order `N`. The thread count defaults
//! to the `FREEWALK_THREADS` environment variable, else to all cores.
//!
//! Exit status: 0 success, 2 usage, 3 validation, 4 numeric failure,
//! 5 statistical assertion failure, 1 I/O.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use crate::config::WalkConfig;
use crate::error::{Error, Result};
use crate::estimators::{self, Calibration, Statistic};
use crate::genfun::{radius_diagnostic, GenFunContext, RadiusReport};
use crate::kernel::Walk;
use crate::oracle::{self, FirstPassage, IdentityReport, Oracle};
use crate::report::{emit_report, fmt_f64, CsvTable, Format, Report, RunMeta};
use crate::simulator::DEFAULT_BUFFER;
use crate::word::Factor;

pub const THREADS_ENV: &str = "FREEWALK_THREADS";
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Genfun,
    OracleCheck,
    Simulate,
    Clt,
    Diagnostics,
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Genfun => "genfun",
            Command::OracleCheck => "oracle-check",
            Command::Simulate => "simulate",
            Command::Clt => "clt",
            Command::Diagnostics => "diagnostics",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub buffer: Option<usize>,
    pub order: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub stat: Option<Statistic>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: String,
    pub output_dir: PathBuf,
    pub master_seed: u64,
    pub overrides: Overrides,
}

#[derive(Parser, Debug)]
#[command(name = "freewalk", about = "Random walks on free products of two finite rooted graphs")]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Check a configuration against every invariant.
    Validate(Flags),
    /// Solve for xi, the L tables and C_L, and probe the radius of convergence.
    Genfun(Flags),
    /// Run the exact generating-function identity suite.
    OracleCheck(Flags),
    /// Sample walks and decompose them at renewal times.
    Simulate(Flags),
    /// Central limit experiment for one statistic.
    Clt(Flags),
    /// i.i.d., tail and per-block diagnostics.
    Diagnostics(Flags),
    /// Smoothness probe over a grid of alpha values.
    Sweep(Flags),
}

#[derive(clap::Args, Debug)]
struct Flags {
    /// Configuration JSON file or a shortcut (K3xK3, PathxK3).
    #[arg(long, default_value = "K3xK3")]
    config: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Steps per walk.
    #[arg(long)]
    n: Option<usize>,
    /// Number of walks.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Censoring buffer B.
    #[arg(long)]
    buffer: Option<usize>,
    /// Series order N.
    #[arg(long, visible_alias = "N")]
    order: Option<usize>,
    /// Statistic: dist, block or entropy.
    #[arg(long)]
    stat: Option<String>,
    /// Alpha grid, `start:stop:step` or a comma list.
    #[arg(long)]
    grid: Option<String>,
}

/// Parses `0.3:0.7:0.05` or `0.3,0.5,0.7`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Round to the step's decimal resolution so 0.3 + 8 * 0.05 prints as 0.7.
        return Ok((0..=count).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect());
    }
    text.split(',').map(num).collect()
}

impl RunManifest {
    /// Parses command-line arguments (the first item is the program name).
    pub fn from_args<I, T>(args: I) -> std::result::Result<RunManifest, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let args = Args::try_parse_from(args)?;
        let (command, f) = match args.command {
            Sub::Validate(f) => (Command::Validate, f),
            Sub::Genfun(f) => (Command::Genfun, f),
            Sub::OracleCheck(f) => (Command::OracleCheck, f),
            Sub::Simulate(f) => (Command::Simulate, f),
            Sub::Clt(f) => (Command::Clt, f),
            Sub::Diagnostics(f) => (Command::Diagnostics, f),
            Sub::Sweep(f) => (Command::Sweep, f),
        };
        let usage = |e: Error| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n"));
        Ok(RunManifest {
            command,
            config_path: f.config,
            output_dir: f.out,
            master_seed: f.seed,
            overrides: Overrides {
                n: f.n,
                m: f.m,
                buffer: f.buffer,
                order: f.order,
                grid: f.grid.as_deref().map(parse_grid).transpose().map_err(usage)?,
                stat: f.stat.as_deref().map(str::parse).transpose().map_err(usage)?,
            },
        })
    }
}

/// Loads and validates a configuration file or shortcut.
pub fn parse_config(path: &str) -> Result<WalkConfig> {
    let cfg = WalkConfig::load(path)?;
    let report = cfg.validate();
    if report.passed() {
        Ok(cfg)
    } else {
        Err(Error::InvalidConfig(report))
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// All invariant assertions of the run held.
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            crate::error::ErrorFamily::Statistical.exit_code()
        }
    }
}

struct Emitter<'a> {
    dir: &'a Path,
    meta: RunMeta,
    artifacts: Vec<PathBuf>,
}

impl Emitter<'_> {
    fn emit<T: Serialize>(&mut self, name: &str, passed: bool, body: &T, detail: Option<&CsvTable>) -> Result<()> {
        let report = Report {
            name,
            meta: &self.meta,
            passed,
            body,
            detail,
        };
        self.artifacts.push(emit_report(&report, Format::Json, self.dir)?);
        if detail.is_some() {
            self.artifacts.push(emit_report(&report, Format::Csv, self.dir)?);
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct GenFunReport<'a> {
    context: &'a GenFunContext,
    radius: &'a RadiusReport,
}

#[derive(Serialize)]
struct XiCheck {
    factor: u8,
    fixed_point: f64,
    partial_sums: Vec<f64>,
    gaps: Vec<f64>,
    gap_ratios: Vec<f64>,
    monotone_under: bool,
    geometric_decay: bool,
}

#[derive(Serialize)]
struct OracleCheckReport {
    identities: Vec<IdentityReport>,
    xi: Vec<XiCheck>,
    spectral_proxy: Vec<(usize, f64)>,
}

#[derive(Serialize)]
struct SimulateReport {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    buffer: usize,
    censored_total: usize,
    rates: estimators::RateReport,
    sigmas: estimators::SigmaReport,
    block_checks: estimators::BlockChecks,
}

/// Compares the fixed point `xi_i(1)` with the partial sums of the exact
/// first-visit series up to `order`.
pub fn xi_partial_sum_check(walk: &Walk, ctx: &GenFunContext, order: usize) -> Result<Vec<(u8, f64, Vec<f64>)>> {
    let oracle = Oracle::with_cap(walk, order.max(oracle::DEFAULT_ORDER_CAP));
    Factor::BOTH
        .iter()
        .map(|&f| {
            let s = oracle.first_passage_series::<f64>(&FirstPassage::Xi(f), order)?;
            Ok((f.id(), ctx.xi[f.index()], s.partial_sums()))
        })
        .collect()
}

fn xi_checks(walk: &Walk, ctx: &GenFunContext, order: usize) -> Result<Vec<XiCheck>> {
    Ok(xi_partial_sum_check(walk, ctx, order)?
        .into_iter()
        .map(|(factor, fixed_point, partial_sums)| {
            let gaps: Vec<f64> = partial_sums.iter().map(|s| fixed_point - s).collect();
            let gap_ratios: Vec<f64> = gaps.windows(2).map(|g| g[1] / g[0]).collect();
            XiCheck {
                factor,
                fixed_point,
                monotone_under: gaps.iter().all(|&g| g >= -1e-12)
                    && partial_sums.windows(2).all(|p| p[1] >= p[0]),
                geometric_decay: gap_ratios.iter().skip(8).all(|&r| r < 1.0),
                partial_sums,
                gaps,
                gap_ratios,
            }
        })
        .collect())
}

/// Executes a manifest and writes its artifacts.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    let o = &manifest.overrides;
    let dir = manifest.output_dir.as_path();
    let seed = manifest.master_seed;
    let cfg = WalkConfig::load(&manifest.config_path)?;
    let mut em = Emitter {
        dir,
        meta: RunMeta {
            command: manifest.command.name().to_string(),
            config_digest: cfg.digest(),
            master_seed: seed,
        },
        artifacts: Vec::new(),
    };

    if manifest.command == Command::Validate {
        let report = cfg.validate();
        em.emit("validation", report.passed(), &report, None)?;
        if !report.passed() {
            return Err(Error::InvalidConfig(report));
        }
        return Ok(RunOutcome {
            passed: true,
            artifacts: em.artifacts,
        });
    }

    let walk = Walk::new(cfg.clone())?;
    let ctx = GenFunContext::build(&walk)?;
    let buffer = o.buffer.unwrap_or(DEFAULT_BUFFER);
    let passed = match manifest.command {
        Command::Validate => unreachable!("handled above"),
        Command::Genfun => {
            let radius = radius_diagnostic(&walk, o.order.unwrap_or(12))?;
            let mut table = CsvTable::new(&["factor", "vertex", "L"]);
            for f in Factor::BOTH {
                for (v, l) in ctx.factor_l[f.index()].iter().enumerate() {
                    table.push(vec![f.id().to_string(), walk.vertex_name(f, v as u16).to_string(), fmt_f64(*l)]);
                }
            }
            let body = GenFunReport {
                context: &ctx,
                radius: &radius,
            };
            em.emit("genfun", radius.plausible, &body, Some(&table))?;
            radius.plausible
        }
        Command::OracleCheck => {
            let order = o.order.unwrap_or(oracle::DEFAULT_ORDER_CAP);
            let identities = vec![
                oracle::identity_suite::<BigRational>(&walk, order.min(oracle::RATIONAL_ORDER), 0.0)?,
                oracle::identity_suite::<f64>(&walk, order, 1e-10)?,
            ];
            let xi = xi_checks(&walk, &ctx, order)?;
            let mut table = CsvTable::new(&["arithmetic", "order", "identity", "cases", "max_error"]);
            for rep in &identities {
                for c in &rep.checks {
                    table.push(vec![
                        rep.arithmetic.to_string(),
                        rep.order.to_string(),
                        c.identity.to_string(),
                        c.cases.to_string(),
                        fmt_f64(c.max_error),
                    ]);
                }
            }
            let passed = identities.iter().all(|r| r.passed) && xi.iter().all(|x| x.monotone_under);
            let body = OracleCheckReport {
                spectral_proxy: Oracle::with_cap(&walk, order.max(oracle::DEFAULT_ORDER_CAP))
                    .spectral_radius_proxy(order)?,
                identities,
                xi,
            };
            em.emit("oracle_check", passed, &body, Some(&table))?;
            passed
        }
        Command::Simulate => {
            let (n, m) = (o.n.unwrap_or(20_000), o.m.unwrap_or(200));
            let pool = estimators::build_pool(&walk, &ctx, n, m, seed, 0, buffer)?;
            let body = SimulateReport {
                n,
                m,
                buffer,
                censored_total: pool.walks.iter().map(|w| w.sample.censored_count).sum(),
                rates: estimators::estimate_rates(&pool, walk.epsilon0())?,
                sigmas: estimators::estimate_sigmas(&pool)?,
                block_checks: estimators::block_checks(&pool, &ctx, walk.epsilon0()),
            };
            let passed = body.block_checks.all_pass() && body.rates.ordering_ok && body.rates.entropy_bound_ok != Some(false);
            em.emit("simulate", passed, &body, Some(&pool.blocks_table()))?;
            passed
        }
        Command::Clt => {
            let stat = o.stat.unwrap_or(Statistic::Dist);
            let (n, m) = (o.n.unwrap_or(5000), o.m.unwrap_or(2000));
            let calibration = Calibration {
                buffer,
                ..Calibration::default()
            };
            let report = estimators::clt_experiment(&walk, &ctx, stat, n, m, seed, calibration)?;
            let passed = report.pre_asymptotic || report.passes(estimators::KS_THRESHOLD);
            em.emit(&format!("clt_{stat}"), passed, &report, Some(&report.samples_table()))?;
            passed
        }
        Command::Diagnostics => {
            let (n, m) = (o.n.unwrap_or(20_000), o.m.unwrap_or(200));
            let pool = estimators::build_pool(&walk, &ctx, n, m, seed, 0, buffer)?;
            let report = estimators::diagnostics(&pool, &walk, &ctx, &[4, 8, 12], 200)?;
            let passed = report.passed();
            em.emit("diagnostics", passed, &report, Some(&report.lag_table()))?;
            passed
        }
        Command::Sweep => {
            let (n, m) = (o.n.unwrap_or(20_000), o.m.unwrap_or(100));
            let grid = match &o.grid {
                Some(g) => g.clone(),
                None => parse_grid("0.30:0.70:0.05")?,
            };
            let table = estimators::smoothness_probe(&cfg, &grid, n, m, seed, buffer)?;
            let passed = table.flagged == 0 && table.symmetric();
            em.emit("sweep", passed, &table, Some(&table.csv()))?;
            passed
        }
    };
    Ok(RunOutcome {
        passed,
        artifacts: em.artifacts,
    })
}

/// Sets the global thread pool size from `FREEWALK_THREADS` when present.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let manifest = match RunManifest::from_args(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    init_threads();
    match run(&manifest) {
        Ok(outcome) => {
            for path in &outcome.artifacts {
                println!("{}", path.display());
            }
            if !outcome.passed {
                eprintln!("freewalk: one or more checks failed");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("freewalk: {e}");
            e.family().exit_code()
        }
    }
}
