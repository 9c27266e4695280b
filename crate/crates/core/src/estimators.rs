//! Rate and variance estimation from renewal blocks, CLT experiments, and
//! the i.i.d., tail and smoothness diagnostics.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::WalkConfig;
use crate::error::{Error, Result};
use crate::genfun::GenFunContext;
use crate::kernel::Walk;
use crate::oracle::Oracle;
use crate::report::CsvTable;
use crate::simulator::{renewal_decompose, sample_trajectory_stream, stream_rng, Block, RenewalSample};
use crate::stats;
use crate::word::Word;

/// Stream offset of the calibration pool, far away from the experiment streams.
pub const CALIBRATION_STREAM_OFFSET: u64 = 1 << 40;
/// Runs shorter than this are flagged as pre-asymptotic and get no normality claim.
pub const PRE_ASYMPTOTIC_N: usize = 100;
pub const KS_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Dist,
    Block,
    Entropy,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Dist, Statistic::Block, Statistic::Entropy];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Dist => "dist",
            Statistic::Block => "block",
            Statistic::Entropy => "entropy",
        }
    }

    /// Block increment `D_k` for this statistic.
    pub fn increment(self, b: &Block) -> f64 {
        match self {
            Statistic::Dist => b.d_dist as f64,
            Statistic::Block => b.d_block as f64,
            Statistic::Entropy => b.d_ent,
        }
    }

    pub fn endpoint(self, e: &Endpoint) -> f64 {
        match self {
            Statistic::Dist => e.dist as f64,
            Statistic::Block => e.length as f64,
            Statistic::Entropy => e.dl,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Statistic> {
        match s {
            "dist" => Ok(Statistic::Dist),
            "block" => Ok(Statistic::Block),
            "entropy" => Ok(Statistic::Entropy),
            other => Err(Error::Parse(format!("unknown statistic {other:?} (dist, block, entropy)"))),
        }
    }
}

/// The three statistics of `X_n` at the end of a walk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Endpoint {
    pub dist: u64,
    pub length: usize,
    pub dl: f64,
}

impl Endpoint {
    pub fn of(word: &Word, walk: &Walk, ctx: &GenFunContext) -> Result<Endpoint> {
        Ok(Endpoint {
            dist: walk.graph_distance(word),
            length: word.len(),
            dl: ctx.dl_word(word)?,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkRecord {
    pub index: u64,
    pub sample: RenewalSample,
    pub end: Endpoint,
}

/// Renewal samples and endpoints of `M` independent walks of length `n`.
#[derive(Clone, Debug, Serialize)]
pub struct Pool {
    pub n: usize,
    pub buffer: usize,
    pub master_seed: u64,
    pub first_stream: u64,
    pub walks: Vec<WalkRecord>,
}

impl Pool {
    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.walks.iter().flat_map(|w| w.sample.blocks.iter())
    }

    pub fn block_count(&self) -> usize {
        self.walks.iter().map(|w| w.sample.blocks.len()).sum()
    }

    /// `(dT, D)` pairs over all blocks.
    pub fn pairs(&self, stat: Statistic) -> Vec<(f64, f64)> {
        self.blocks().map(|b| (b.dt as f64, stat.increment(b))).collect()
    }

    pub fn t0_samples(&self) -> Vec<f64> {
        self.walks
            .iter()
            .filter_map(|w| w.sample.t0())
            .map(|t| t as f64)
            .collect()
    }

    pub fn dt_samples(&self) -> Vec<f64> {
        self.blocks().map(|b| b.dt as f64).collect()
    }

    pub fn blocks_table(&self) -> CsvTable {
        crate::simulator::blocks_table(self.walks.iter().map(|w| (w.index as usize, &w.sample)))
    }
}

/// Samples and decomposes walks `first_stream..first_stream + m` in
/// parallel; the result is ordered by stream index.
pub fn build_pool(
    walk: &Walk,
    ctx: &GenFunContext,
    n: usize,
    m: usize,
    master_seed: u64,
    first_stream: u64,
    buffer: usize,
) -> Result<Pool> {
    let walks = (first_stream..first_stream + m as u64)
        .into_par_iter()
        .map(|i| {
            let traj = sample_trajectory_stream(walk, n, master_seed, i);
            Ok(WalkRecord {
                index: i,
                sample: renewal_decompose(&traj, ctx, walk, buffer)?,
                end: Endpoint::of(&traj.final_word, walk, ctx)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pool {
        n,
        buffer,
        master_seed,
        first_stream,
        walks,
    })
}

/// Ratio estimate `sum D / sum dT` with its delta-method 95% half-width.
pub fn ratio_estimate(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::EmptyPool);
    }
    let st: f64 = pairs.iter().map(|p| p.0).sum();
    let sd: f64 = pairs.iter().map(|p| p.1).sum();
    let rate = sd / st;
    let resid: f64 = pairs.iter().map(|(t, d)| (d - rate * t).powi(2)).sum();
    Ok((rate, 1.96 * resid.sqrt() / st))
}

/// Plug-in `mean((D - dT * rate)^2) / mean(dT)` with `rate` from the same pairs.
pub fn sigma2_plugin(pairs: &[(f64, f64)]) -> Result<f64> {
    let (rate, _) = ratio_estimate(pairs)?;
    let st: f64 = pairs.iter().map(|p| p.0).sum();
    let resid: f64 = pairs.iter().map(|(t, d)| (d - rate * t).powi(2)).sum();
    Ok(resid / st)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateEstimate {
    pub renewal: f64,
    pub renewal_ci: f64,
    pub direct: f64,
    pub direct_ci: f64,
}

impl RateEstimate {
    pub fn gap(&self) -> f64 {
        (self.direct - self.renewal).abs()
    }

    /// `|direct - renewal| <= 2 * (sum of half-widths)`.
    pub fn consistent(&self) -> bool {
        self.gap() <= 2.0 * (self.renewal_ci + self.direct_ci)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub dist: RateEstimate,
    pub block: RateEstimate,
    pub entropy: RateEstimate,
    pub mean_dt: f64,
    pub blocks: usize,
    pub walks: usize,
    pub ordering_ok: bool,
    pub entropy_bound_ok: Option<bool>,
}

impl RateReport {
    pub fn get(&self, stat: Statistic) -> &RateEstimate {
        match stat {
            Statistic::Dist => &self.dist,
            Statistic::Block => &self.block,
            Statistic::Entropy => &self.entropy,
        }
    }

    pub fn consistent(&self) -> bool {
        self.dist.consistent() && self.block.consistent() && self.entropy.consistent()
    }
}

pub fn estimate_rates(pool: &Pool, epsilon0: Option<f64>) -> Result<RateReport> {
    if pool.block_count() == 0 {
        return Err(Error::EmptyPool);
    }
    let one = |stat: Statistic| -> Result<RateEstimate> {
        let (renewal, renewal_ci) = ratio_estimate(&pool.pairs(stat))?;
        let direct: Vec<f64> = pool
            .walks
            .iter()
            .map(|w| stat.endpoint(&w.end) / pool.n as f64)
            .collect();
        let direct_ci = if direct.len() > 1 { stats::ci95_half_width(&direct) } else { f64::INFINITY };
        Ok(RateEstimate {
            renewal,
            renewal_ci,
            direct: stats::mean(&direct),
            direct_ci,
        })
    };
    let (dist, block, entropy) = (one(Statistic::Dist)?, one(Statistic::Block)?, one(Statistic::Entropy)?);
    let ordering_ok = dist.renewal >= block.renewal - 2.0 * (dist.renewal_ci + block.renewal_ci);
    let entropy_bound_ok = epsilon0.map(|e| {
        let c = -e.ln();
        entropy.renewal <= c * dist.renewal + 2.0 * (entropy.renewal_ci + c * dist.renewal_ci)
    });
    Ok(RateReport {
        mean_dt: stats::mean(&pool.dt_samples()),
        blocks: pool.block_count(),
        walks: pool.walks.len(),
        dist,
        block,
        entropy,
        ordering_ok,
        entropy_bound_ok,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SigmaEstimate {
    pub sigma2: f64,
    /// Jackknife standard error over walks.
    pub se: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaReport {
    pub dist: SigmaEstimate,
    pub block: SigmaEstimate,
    pub entropy: SigmaEstimate,
}

impl SigmaReport {
    pub fn get(&self, stat: Statistic) -> &SigmaEstimate {
        match stat {
            Statistic::Dist => &self.dist,
            Statistic::Block => &self.block,
            Statistic::Entropy => &self.entropy,
        }
    }
}

/// Per-walk sums `(sum dT, sum D, sum D^2, sum D dT, sum dT^2)`.
#[derive(Clone, Copy, Default)]
struct Sums([f64; 5]);

impl Sums {
    fn of(pairs: impl Iterator<Item = (f64, f64)>) -> Sums {
        let mut s = [0.0; 5];
        for (t, d) in pairs {
            s[0] += t;
            s[1] += d;
            s[2] += d * d;
            s[3] += d * t;
            s[4] += t * t;
        }
        Sums(s)
    }

    fn minus(&self, o: &Sums) -> Sums {
        Sums(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }

    fn sigma2(&self) -> f64 {
        let [st, sd, sdd, sdt, stt] = self.0;
        let r = sd / st;
        ((sdd - 2.0 * r * sdt + r * r * stt) / st).max(0.0)
    }
}

fn jackknife_sigma(per_walk: &[Sums]) -> SigmaEstimate {
    let total = per_walk.iter().fold(Sums::default(), |a, s| Sums(std::array::from_fn(|i| a.0[i] + s.0[i])));
    let sigma2 = total.sigma2();
    let m = per_walk.len() as f64;
    let se = if per_walk.len() > 1 {
        let loo: Vec<f64> = per_walk.iter().map(|s| total.minus(s).sigma2()).collect();
        let mean = stats::mean(&loo);
        ((m - 1.0) / m * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
    } else {
        f64::INFINITY
    };
    SigmaEstimate {
        sigma2,
        se,
        degenerate: sigma2 <= 1e-12 * (1.0 + total.0[2] / total.0[0]),
    }
}

pub fn estimate_sigmas(pool: &Pool) -> Result<SigmaReport> {
    if pool.block_count() < 2 {
        return Err(Error::EmptyPool);
    }
    let one = |stat: Statistic| {
        let per_walk: Vec<Sums> = pool
            .walks
            .iter()
            .map(|w| Sums::of(w.sample.blocks.iter().map(|b| (b.dt as f64, stat.increment(b)))))
            .collect();
        jackknife_sigma(&per_walk)
    };
    Ok(SigmaReport {
        dist: one(Statistic::Dist),
        block: one(Statistic::Block),
        entropy: one(Statistic::Entropy),
    })
}

/// Sizes of the calibration pool used to standardize a CLT experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Calibration {
    pub n: usize,
    pub m: usize,
    pub buffer: usize,
}

impl Default for Calibration {
    fn default() -> Calibration {
        Calibration {
            n: 20_000,
            m: 1000,
            buffer: crate::simulator::DEFAULT_BUFFER,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CltReport {
    pub statistic: Statistic,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub rate_estimate: f64,
    pub sigma_estimate: f64,
    pub standardized_samples: Vec<f64>,
    pub raw_samples: Vec<f64>,
    pub ks_stat: Option<f64>,
    pub ks_pvalue: Option<f64>,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub pre_asymptotic: bool,
    pub calibration: Calibration,
}

impl CltReport {
    /// KS distance within `threshold`, and mean and variance of the
    /// standardized samples within `5 / sqrt(M)` of 0 and 1.
    pub fn passes(&self, threshold: f64) -> bool {
        let slack = 5.0 / (self.m as f64).sqrt();
        !self.pre_asymptotic
            && self.ks_stat.is_some_and(|d| d <= threshold)
            && self.sample_mean.abs() <= slack
            && (self.sample_variance - 1.0).abs() <= slack
    }

    pub fn samples_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["walk", "raw", "standardized"]);
        for (i, (r, s)) in self.raw_samples.iter().zip(&self.standardized_samples).enumerate() {
            t.push(vec![i.to_string(), crate::report::fmt_f64(*r), crate::report::fmt_f64(*s)]);
        }
        t
    }
}

/// Samples `m` walks of length `n` and standardizes the chosen statistic
/// with rate and sigma from an independent calibration pool.
pub fn clt_experiment(
    walk: &Walk,
    ctx: &GenFunContext,
    stat: Statistic,
    n: usize,
    m: usize,
    master_seed: u64,
    calibration: Calibration,
) -> Result<CltReport> {
    if stat == Statistic::Entropy && walk.epsilon0().is_none() {
        return Err(Error::MissingEpsilon0);
    }
    let cal = build_pool(
        walk,
        ctx,
        calibration.n,
        calibration.m,
        master_seed,
        CALIBRATION_STREAM_OFFSET,
        calibration.buffer,
    )?;
    let (rate, _) = ratio_estimate(&cal.pairs(stat))?;
    let sigma2 = estimate_sigmas(&cal)?.get(stat).sigma2;
    let sigma = sigma2.sqrt();
    let raw: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let traj = sample_trajectory_stream(walk, n, master_seed, i);
            Endpoint::of(&traj.final_word, walk, ctx).map(|e| stat.endpoint(&e))
        })
        .collect::<Result<_>>()?;
    let scale = sigma * (n as f64).sqrt();
    let z: Vec<f64> = raw.iter().map(|x| (x - n as f64 * rate) / scale).collect();
    let pre_asymptotic = n < PRE_ASYMPTOTIC_N;
    let ks = if pre_asymptotic || sigma == 0.0 {
        None
    } else {
        Some(stats::normality_test(&z)?)
    };
    let (sample_mean, sample_variance) = if m > 1 && z.iter().all(|x| x.is_finite()) {
        (stats::mean(&z), stats::variance(&z))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CltReport {
        statistic: stat,
        n,
        m,
        rate_estimate: rate,
        sigma_estimate: sigma,
        standardized_samples: z,
        raw_samples: raw,
        ks_stat: ks.map(|k| k.0),
        ks_pvalue: ks.map(|k| k.1),
        sample_mean,
        sample_variance,
        pre_asymptotic,
        calibration,
    })
}

pub use stats::normality_test;

#[derive(Clone, Debug, Serialize)]
pub struct LagCorrelation {
    pub series: String,
    pub lag: usize,
    pub r: f64,
    pub pairs: usize,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IidReport {
    pub ks_stat: f64,
    pub ks_pvalue: f64,
    pub ks_samples: usize,
    pub lag_correlations: Vec<LagCorrelation>,
    pub passed: bool,
}

/// Lagged correlation of a family of sequences, pooling the pairs
/// `(x_k, x_{k+lag})` of every sequence.
pub fn lag_correlation(series: &str, seqs: &[Vec<f64>], lag: usize) -> LagCorrelation {
    let pairs: Vec<(f64, f64)> = seqs
        .iter()
        .flat_map(|s| s.iter().zip(s.iter().skip(lag)).map(|(a, b)| (*a, *b)))
        .collect();
    let r = stats::correlation(&pairs);
    let threshold = 3.0 / (pairs.len() as f64).sqrt();
    LagCorrelation {
        series: series.to_string(),
        lag,
        r,
        pairs: pairs.len(),
        threshold,
        passed: r.abs() < threshold,
    }
}

/// i.i.d. checks on per-trajectory sequences: two-sample KS between the
/// first and fifth entries across trajectories, and lag-1/lag-2
/// correlations within trajectories. The verdict uses the KS test and the
/// lag-1 correlations; lag 2 is reported only.
pub fn iid_from_sequences(named: &[(&str, Vec<Vec<f64>>)]) -> Result<IidReport> {
    let (_, first) = named.first().ok_or(Error::InsufficientBlocks { needed: 5, found: 0 })?;
    let (a, b): (Vec<f64>, Vec<f64>) = first.iter().filter(|s| s.len() >= 5).map(|s| (s[0], s[4])).unzip();
    if a.len() < 2 {
        return Err(Error::InsufficientBlocks {
            needed: 5,
            found: first.iter().map(Vec::len).max().unwrap_or(0),
        });
    }
    let (ks_stat, ks_pvalue) = stats::ks_two_sample(&a, &b)?;
    let mut lag_correlations = Vec::new();
    for (name, seqs) in named {
        for lag in [1, 2] {
            lag_correlations.push(lag_correlation(name, seqs, lag));
        }
    }
    let passed = ks_pvalue > 0.01 && lag_correlations.iter().filter(|l| l.lag == 1).all(|l| l.passed);
    Ok(IidReport {
        ks_stat,
        ks_pvalue,
        ks_samples: a.len(),
        lag_correlations,
        passed,
    })
}

pub fn iid_diagnostics(pool: &Pool) -> Result<IidReport> {
    let dt: Vec<Vec<f64>> = pool
        .walks
        .iter()
        .map(|w| w.sample.blocks.iter().map(|b| b.dt as f64).collect())
        .collect();
    let dd: Vec<Vec<f64>> = pool
        .walks
        .iter()
        .map(|w| w.sample.blocks.iter().map(|b| b.d_dist as f64).collect())
        .collect();
    iid_from_sequences(&[("dT", dt), ("D_dist", dd)])
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub samples: usize,
    pub fit_range: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slopes over the lower and upper halves of the fit range.
    pub slope_halves: (f64, f64),
    pub mgf_base: f64,
    pub mgf_halves: (f64, f64),
    pub mgf_relative_gap: f64,
    pub stable: bool,
    pub passed: bool,
}

pub const TAIL_MIN_SAMPLES: usize = 200;
pub const TAIL_MGF_BASE: f64 = 1.05;

/// Least-squares slope of `log P[X > t]` over the observed range with the
/// upper decile excluded, plus the half-sample stability of `E[1.05^X]`.
/// Half-samples are the first and second halves in the given order.
pub fn tail_diagnostic(samples: &[f64]) -> Result<TailReport> {
    if samples.len() < TAIL_MIN_SAMPLES {
        return Err(Error::InsufficientBlocks {
            needed: TAIL_MIN_SAMPLES,
            found: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let lo = sorted[0].floor();
    let hi = sorted[(0.9 * n) as usize - 1].floor();
    let survival = |t: f64| (sorted.len() - sorted.partition_point(|&x| x <= t)) as f64 / n;
    let pts: Vec<(f64, f64)> = (lo as i64..=hi as i64)
        .map(|t| (t as f64, survival(t as f64)))
        .filter(|p| p.1 > 0.0)
        .map(|(t, s)| (t, s.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateSample);
    }
    let fit = stats::least_squares(&pts);
    let mid = pts.len() / 2;
    let slope_halves = (
        stats::least_squares(&pts[..mid.max(2)]).slope,
        stats::least_squares(&pts[mid.min(pts.len() - 2)..]).slope,
    );
    let half = samples.len() / 2;
    let mgf = |xs: &[f64]| stats::mean(&xs.iter().map(|x| TAIL_MGF_BASE.powf(*x)).collect::<Vec<_>>());
    let (a, b) = (mgf(&samples[..half]), mgf(&samples[half..]));
    let gap = (a - b).abs() / (0.5 * (a + b));
    let stable = gap <= 0.1;
    Ok(TailReport {
        samples: samples.len(),
        fit_range: (lo, hi),
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        slope_halves,
        mgf_base: TAIL_MGF_BASE,
        mgf_halves: (a, b),
        mgf_relative_gap: gap,
        stable,
        passed: fit.slope < 0.0 && fit.r_squared > 0.9 && stable,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockChecks {
    pub blocks: usize,
    pub d_block_ok: usize,
    pub dist_le_dt_ok: usize,
    pub pattern_ok: usize,
    pub entropy_bound_ok: usize,
    pub entropy_bound: Option<(f64, f64)>,
}

impl BlockChecks {
    pub fn all_pass(&self) -> bool {
        let b = self.blocks;
        b > 0
            && self.d_block_ok == b
            && self.dist_le_dt_ok == b
            && self.pattern_ok == b
            && (self.entropy_bound.is_none() || self.entropy_bound_ok == b)
    }
}

/// Exact per-block checks. Telescoping of the graph distance is asserted
/// during decomposition, so every block in a pool already satisfies it.
pub fn block_checks(pool: &Pool, ctx: &GenFunContext, epsilon0: Option<f64>) -> BlockChecks {
    use crate::word::Factor;
    let mut c = BlockChecks {
        blocks: 0,
        d_block_ok: 0,
        dist_le_dt_ok: 0,
        pattern_ok: 0,
        entropy_bound_ok: 0,
        entropy_bound: epsilon0.map(|e| (-e.ln(), ctx.cl_constant)),
    };
    for b in pool.blocks() {
        c.blocks += 1;
        c.d_block_ok += usize::from(b.d_block == 2);
        c.dist_le_dt_ok += usize::from(b.d_dist as usize <= b.dt);
        let l = b.w.letters();
        c.pattern_ok += usize::from(l.len() == 2 && l[0].factor == Factor::Two && l[1].factor == Factor::One);
        if let Some((log_eps, cl)) = c.entropy_bound {
            let bound = (log_eps * b.d_dist as f64).max(cl);
            c.entropy_bound_ok += usize::from(b.d_ent.abs() <= bound * (1.0 + 1e-12));
        }
    }
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessRow {
    pub alpha: f64,
    pub lambda: RateEstimate,
    pub ell: RateEstimate,
    pub h: RateEstimate,
    pub sigmas: SigmaReport,
}

impl SmoothnessRow {
    /// `(name, value, 95% half-width)` for every tabulated quantity.
    pub fn quantities(&self) -> Vec<(&'static str, f64, f64)> {
        vec![
            ("lambda", self.lambda.renewal, self.lambda.renewal_ci),
            ("ell", self.ell.renewal, self.ell.renewal_ci),
            ("h", self.h.renewal, self.h.renewal_ci),
            ("sigma2_lambda", self.sigmas.dist.sigma2, 1.96 * self.sigmas.dist.se),
            ("sigma2_ell", self.sigmas.block.sigma2, 1.96 * self.sigmas.block.se),
            ("sigma2_h", self.sigmas.entropy.sigma2, 1.96 * self.sigmas.entropy.se),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteDifference {
    pub quantity: String,
    pub alpha: f64,
    pub first: f64,
    pub second: f64,
    /// Second difference minus the mean of the neighbouring ones.
    pub excess: f64,
    /// Jackknife standard error of `excess`.
    pub noise: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryCheck {
    pub quantity: String,
    pub alpha: f64,
    pub gap: f64,
    pub allowance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessTable {
    pub rows: Vec<SmoothnessRow>,
    pub differences: Vec<FiniteDifference>,
    pub symmetry: Vec<SymmetryCheck>,
    pub flagged: usize,
}

impl SmoothnessTable {
    pub fn symmetric(&self) -> bool {
        self.symmetry.iter().all(|s| s.passed)
    }

    pub fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["alpha", "quantity", "value", "ci"]);
        for row in &self.rows {
            for (q, v, ci) in row.quantities() {
                t.push(vec![
                    crate::report::fmt_f64(row.alpha),
                    q.to_string(),
                    crate::report::fmt_f64(v),
                    crate::report::fmt_f64(ci),
                ]);
            }
        }
        t
    }
}

/// Rate and sigma estimates over a grid of `alpha` values with common
/// random numbers: every grid point reuses the same streams, so the walks
/// differ only through the kernel.
pub fn smoothness_probe(
    base: &WalkConfig,
    alphas: &[f64],
    n: usize,
    m: usize,
    master_seed: u64,
    buffer: usize,
) -> Result<SmoothnessTable> {
    let mut rows = Vec::with_capacity(alphas.len());
    let mut grid = Vec::with_capacity(alphas.len());
    for (index, &alpha) in alphas.iter().enumerate() {
        let cfg = base.with_alpha(alpha);
        let report = cfg.validate();
        if !report.passed() {
            return Err(Error::InvalidGridPoint {
                index,
                reason: report.failures().map(|c| c.detail.clone()).collect::<Vec<_>>().join("; "),
            });
        }
        let walk = Walk::new(cfg)?;
        let ctx = GenFunContext::build(&walk)?;
        let pool = build_pool(&walk, &ctx, n, m, master_seed, 0, buffer)?;
        let rates = estimate_rates(&pool, walk.epsilon0())?;
        rows.push(SmoothnessRow {
            alpha,
            lambda: rates.dist,
            ell: rates.block,
            h: rates.entropy,
            sigmas: estimate_sigmas(&pool)?,
        });
        grid.push(GridSums::of(&pool));
    }
    let differences = finite_differences(&rows, &grid);
    // Swapping alpha and 1 - alpha is a symmetry only when the factors agree.
    let symmetry = if base.factors[0].transition == base.factors[1].transition {
        symmetry_checks(&rows)
    } else {
        Vec::new()
    };
    Ok(SmoothnessTable {
        flagged: differences.iter().filter(|d| d.flagged).count(),
        rows,
        differences,
        symmetry,
    })
}

/// Per-walk sums at one grid point, for dist, block and entropy.
struct GridSums {
    per_walk: Vec<[Sums; 3]>,
    total: [Sums; 3],
}

impl GridSums {
    fn of(pool: &Pool) -> GridSums {
        let per_walk: Vec<[Sums; 3]> = pool
            .walks
            .iter()
            .map(|w| {
                Statistic::ALL.map(|stat| Sums::of(w.sample.blocks.iter().map(|b| (b.dt as f64, stat.increment(b)))))
            })
            .collect();
        let total = std::array::from_fn(|k| {
            per_walk
                .iter()
                .fold(Sums::default(), |a, s| Sums(std::array::from_fn(|i| a.0[i] + s[k].0[i])))
        });
        GridSums { per_walk, total }
    }

    /// Quantity `q` in the order of [`SmoothnessRow::quantities`], with
    /// walk `skip` left out.
    fn quantity(&self, q: usize, skip: Option<usize>) -> f64 {
        let s = match skip {
            Some(j) => self.total[q % 3].minus(&self.per_walk[j][q % 3]),
            None => self.total[q % 3],
        };
        if q < 3 {
            s.0[1] / s.0[0]
        } else {
            s.sigma2()
        }
    }
}

/// A linear combination of one quantity over grid points, with its
/// jackknife standard error over walks. Walk `j` shares its random stream
/// across the grid, so leaving it out everywhere at once keeps the
/// correlation induced by common random numbers.
fn combination(grid: &[GridSums], q: usize, coeffs: &[(usize, f64)]) -> (f64, f64) {
    let eval = |skip: Option<usize>| coeffs.iter().map(|&(p, c)| c * grid[p].quantity(q, skip)).sum::<f64>();
    let value = eval(None);
    let m = grid[0].per_walk.len();
    if m < 2 {
        return (value, f64::INFINITY);
    }
    let loo: Vec<f64> = (0..m).map(|j| eval(Some(j))).collect();
    let mean = stats::mean(&loo);
    let se = ((m as f64 - 1.0) / m as f64 * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt();
    (value, se)
}

/// Second differences and discontinuity flags. A smooth curve has second
/// differences that change slowly along the grid, while a jump between two
/// grid points makes one second difference stand apart from its
/// neighbours. The excess of each second difference over the mean of its
/// neighbours is compared with the jackknife standard error of that excess.
fn finite_differences(rows: &[SmoothnessRow], grid: &[GridSums]) -> Vec<FiniteDifference> {
    let mut out = Vec::new();
    let len = rows.len();
    if len < 3 {
        return out;
    }
    let names: Vec<&'static str> = rows[0].quantities().iter().map(|q| q.0).collect();
    for (q, name) in names.iter().enumerate() {
        for i in 1..len - 1 {
            let mut coeffs = vec![(i - 1, 1.0), (i, -2.0), (i + 1, 1.0)];
            let neighbours: Vec<usize> = [i.checked_sub(1), Some(i + 1)]
                .into_iter()
                .flatten()
                .filter(|&j| j >= 1 && j + 1 < len)
                .collect();
            let w = 1.0 / neighbours.len().max(1) as f64;
            for &j in &neighbours {
                coeffs.extend([(j - 1, -w), (j, 2.0 * w), (j + 1, -w)]);
            }
            let (second, _) = combination(grid, q, &coeffs[..3]);
            let (first, _) = combination(grid, q, &[(i - 1, -0.5), (i + 1, 0.5)]);
            let (excess, noise) = combination(grid, q, &coeffs);
            out.push(FiniteDifference {
                quantity: name.to_string(),
                alpha: rows[i].alpha,
                first,
                second,
                excess,
                noise,
                flagged: excess.abs() > 5.0 * noise,
            });
        }
    }
    out
}

fn symmetry_checks(rows: &[SmoothnessRow]) -> Vec<SymmetryCheck> {
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(mirror) = rows[i + 1..].iter().find(|m| (m.alpha - (1.0 - r.alpha)).abs() < 1e-9) else {
            continue;
        };
        for (x, y) in r.quantities().into_iter().zip(mirror.quantities()) {
            let gap = (x.1 - y.1).abs();
            let allowance = x.2 + y.2;
            out.push(SymmetryCheck {
                quantity: x.0.to_string(),
                alpha: r.alpha,
                gap,
                allowance,
                passed: gap <= allowance,
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyGapRow {
    pub n: usize,
    pub walks: usize,
    /// Mean of `-log pi_n(X_n)`.
    pub mean_neg_log_pi: f64,
    /// Mean of `d_L(o, X_n)`.
    pub mean_dl: f64,
    pub mean_gap: f64,
    pub sd_gap: f64,
}

/// Compares `-log pi_n(X_n)` with `d_L(o, X_n)` on short walks, where the
/// exact law `pi_n` is available from word enumeration.
pub fn entropy_gap(walk: &Walk, ctx: &GenFunContext, ns: &[usize], m: usize, master_seed: u64) -> Result<Vec<EntropyGapRow>> {
    let oracle = Oracle::new(walk);
    let mut out = Vec::new();
    for &n in ns {
        let law = oracle.distribution_at(n)?;
        let mut gaps = Vec::with_capacity(m);
        let (mut sum_pi, mut sum_dl) = (0.0, 0.0);
        for i in 0..m as u64 {
            let mut rng = stream_rng(master_seed, i);
            let traj = crate::simulator::sample_trajectory_with(walk, n, &mut rng);
            let w = traj.final_word;
            let neg_log_pi = -law.get(&w).copied().unwrap_or(0.0).ln();
            let dl = ctx.dl_word(&w)?;
            sum_pi += neg_log_pi;
            sum_dl += dl;
            gaps.push(neg_log_pi - dl);
        }
        out.push(EntropyGapRow {
            n,
            walks: m,
            mean_neg_log_pi: sum_pi / m as f64,
            mean_dl: sum_dl / m as f64,
            mean_gap: stats::mean(&gaps),
            sd_gap: if m > 1 { stats::variance(&gaps).sqrt() } else { 0.0 },
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub iid: IidReport,
    pub tail_dt: TailReport,
    pub tail_t0: TailReport,
    pub block_checks: BlockChecks,
    pub entropy_gap: Vec<EntropyGapRow>,
}

impl DiagnosticsReport {
    pub fn passed(&self) -> bool {
        self.iid.passed && self.tail_dt.passed && self.tail_t0.passed && self.block_checks.all_pass()
    }

    pub fn lag_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["series", "lag", "r", "pairs", "threshold"]);
        for l in &self.iid.lag_correlations {
            t.push(vec![
                l.series.clone(),
                l.lag.to_string(),
                crate::report::fmt_f64(l.r),
                l.pairs.to_string(),
                crate::report::fmt_f64(l.threshold),
            ]);
        }
        t
    }
}

/// Runs the i.i.d., tail and per-block checks on a pool, plus the small-`n`
/// entropy gap on `gap_walks` fresh walks for each length in `gap_ns`.
pub fn diagnostics(
    pool: &Pool,
    walk: &Walk,
    ctx: &GenFunContext,
    gap_ns: &[usize],
    gap_walks: usize,
) -> Result<DiagnosticsReport> {
    Ok(DiagnosticsReport {
        iid: iid_diagnostics(pool)?,
        tail_dt: tail_diagnostic(&pool.dt_samples())?,
        tail_t0: tail_diagnostic(&pool.t0_samples())?,
        block_checks: block_checks(pool, ctx, walk.epsilon0()),
        entropy_gap: entropy_gap(walk, ctx, gap_ns, gap_walks, pool.master_seed ^ 0x5eed)?,
    })
}
