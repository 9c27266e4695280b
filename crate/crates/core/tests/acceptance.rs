//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! All Monte Carlo work uses the single master seed below. Sizes and
//! tolerances are the documented ones; nothing is retried.

use std::io::Write;
use std::time::Instant;

use freewalk::estimators::{
    build_pool, clt_experiment, estimate_rates, estimate_sigmas, iid_diagnostics, iid_from_sequences,
    smoothness_probe, tail_diagnostic, block_checks, Calibration, Pool, Statistic, KS_THRESHOLD,
};
use freewalk::oracle::{identity_suite, reduced_renewal_increment_dist};
use freewalk::simulator::hitting_frequency;
use freewalk::{Factor, GenFunContext, Walk, WalkConfig};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SEED: u64 = 20261016;
const POOL_N: usize = 20_000;
const POOL_M: usize = 200;
const BUFFER: usize = 500;

/// Criteria that are evaluated and printed but not asserted, with the reason.
/// Each entry is also recorded in the decisions log.
const NOT_ASSERTED: &[(usize, &str)] = &[(
    7,
    "on K3xK3 the generating function of dT has radius about 1.045 < 1.05, so E[1.05^dT] is infinite \
     and half-sample means cannot agree; slopes, R^2 and the PathxK3 moment check are still asserted",
)];

struct Instance {
    name: &'static str,
    walk: Walk,
    ctx: GenFunContext,
    pool: Pool,
}

fn instances() -> Vec<Instance> {
    [("K3xK3", WalkConfig::k3_x_k3()), ("PathxK3", WalkConfig::path_x_k3())]
        .into_iter()
        .map(|(name, cfg)| {
            let walk = Walk::new(cfg).unwrap();
            let ctx = GenFunContext::build(&walk).unwrap();
            let pool = build_pool(&walk, &ctx, POOL_N, POOL_M, SEED, 0, BUFFER).unwrap();
            Instance { name, walk, ctx, pool }
        })
        .collect()
}

/// Writes straight to stderr so the verdicts survive the test harness's
/// output capture.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stderr(), $($arg)*);
    }};
}

struct Verdicts(Vec<(usize, bool)>);

impl Verdicts {
    fn record(&mut self, id: usize, title: &str, passed: bool, detail: impl AsRef<str>) {
        say!("{} [{id:>2}] {title}", if passed { "PASS" } else { "FAIL" });
        for line in detail.as_ref().lines() {
            say!("        {line}");
        }
        self.0.push((id, passed));
    }
}

fn identities(v: &mut Verdicts, inst: &[Instance]) {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let exact = identity_suite::<BigRational>(&i.walk, 10, 0.0).unwrap();
        let float = identity_suite::<f64>(&i.walk, 14, 1e-10).unwrap();
        for r in [&exact, &float] {
            ok &= r.passed;
            for c in &r.checks {
                detail += &format!(
                    "{} {} N={} {}: {} cases, max error {:.2e}\n",
                    i.name, r.arithmetic, r.order, c.identity, c.cases, c.max_error
                );
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    detail += &format!("runtime {secs:.1} s (target < 120 s)");
    v.record(1, "identity suite, rational N=10 and float N=14", ok && secs < 120.0, detail);
}

fn xi_cross_validation(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let sums = freewalk::cli::xi_partial_sum_check(&i.walk, &i.ctx, 14).unwrap();
        for (factor, fixed, partial) in &sums {
            let gaps: Vec<f64> = partial.iter().map(|s| fixed - s).collect();
            let monotone = partial.windows(2).all(|p| p[1] >= p[0]) && gaps.iter().all(|&g| g >= -1e-12);
            let ratios: Vec<f64> = gaps.windows(2).skip(8).map(|g| g[1] / g[0]).collect();
            let decay = ratios.iter().all(|&r| r < 1.0);
            ok &= monotone && decay;
            detail += &format!(
                "{} xi_{factor} = {fixed:.10}, partial sum N=14 {:.10}, monotone {monotone}, max gap ratio (N>=8) {:.4}\n",
                i.name,
                partial.last().unwrap(),
                ratios.iter().copied().fold(0.0, f64::max)
            );
        }
        let (p, se) = hitting_frequency(&i.walk, Factor::One, 100_000, SEED, 80);
        let z = (p - i.ctx.xi[0]).abs() / se;
        ok &= z <= 3.0;
        detail += &format!("{} hitting frequency of V_1 {p:.5} +/- {se:.5}, |z| = {z:.2}\n", i.name);
    }
    v.record(2, "xi: partial sums and Monte Carlo hitting frequency", ok, detail.trim_end());
}

fn renewal_law(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let law = reduced_renewal_increment_dist::<f64>(&i.walk, 64);
        if i.name == "K3xK3" {
            let exact = reduced_renewal_increment_dist::<BigRational>(&i.walk, 2);
            let quarter = BigRational::new(1.into(), 4.into());
            ok &= exact.marginal[2] == quarter;
            detail += &format!("{} exact P[dT=2] = {}\n", i.name, exact.marginal[2]);
        }
        let dts: Vec<usize> = i.pool.blocks().take(10_000).map(|b| b.dt).collect();
        assert_eq!(dts.len(), 10_000);
        let m = dts.len() as f64;
        let mut worst: f64 = 0.0;
        for n in 2..=8 {
            let p = law.marginal[n];
            let freq = dts.iter().filter(|&&d| d == n).count() as f64 / m;
            let z = (freq - p).abs() / (p * (1.0 - p) / m).sqrt();
            worst = worst.max(z);
            detail += &format!("{} n={n}: exact {p:.6}, empirical {freq:.6}, |z| = {z:.2}\n", i.name);
        }
        ok &= worst <= 3.0;
    }
    v.record(3, "renewal increment law vs 10^4 blocks", ok, detail.trim_end());
}

fn rates(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let r = estimate_rates(&i.pool, i.walk.epsilon0()).unwrap();
        for (name, e) in [("lambda", r.dist), ("ell", r.block), ("h", r.entropy)] {
            ok &= e.consistent();
            detail += &format!(
                "{} {name}: renewal {:.5} +/- {:.5}, direct {:.5} +/- {:.5}, gap {:.5} (allowed {:.5})\n",
                i.name,
                e.renewal,
                e.renewal_ci,
                e.direct,
                e.direct_ci,
                e.gap(),
                2.0 * (e.renewal_ci + e.direct_ci)
            );
        }
        ok &= (r.block.renewal * r.mean_dt - 2.0).abs() < 1e-9;
        ok &= r.ordering_ok && r.entropy_bound_ok == Some(true);
        detail += &format!(
            "{} ordering lambda >= ell: {}, entropy bound: {:?}\n",
            i.name, r.ordering_ok, r.entropy_bound_ok
        );
    }
    v.record(4, "rate consistency, ordering and entropy bound", ok, detail.trim_end());
}

fn clt(v: &mut Verdicts, inst: &[Instance]) {
    let a = &inst[0];
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for stat in Statistic::ALL {
        let r = clt_experiment(&a.walk, &a.ctx, stat, 5000, 2000, SEED, Calibration::default()).unwrap();
        let ks = r.ks_stat.unwrap_or(f64::INFINITY);
        ok &= ks <= KS_THRESHOLD;
        detail += &format!(
            "{}: KS {ks:.4} (p = {:.3}), mean {:+.4}, variance {:.4}, rate {:.5}, sigma {:.5}\n",
            stat.name(),
            r.ks_pvalue.unwrap_or(f64::NAN),
            r.sample_mean,
            r.sample_variance,
            r.rate_estimate,
            r.sigma_estimate
        );
    }
    let secs = start.elapsed().as_secs_f64();
    detail += &format!("runtime {secs:.1} s (target < 600 s)");
    v.record(5, "CLT, K3xK3, n=5000, M=2000", ok && secs < 600.0, detail);
}

fn ar1(m: usize, len: usize, phi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    (0..m)
        .map(|_| {
            let mut x = noise.sample(&mut rng) / (1.0 - phi * phi).sqrt();
            (0..len)
                .map(|_| {
                    x = phi * x + noise.sample(&mut rng);
                    x
                })
                .collect()
        })
        .collect()
}

fn iid(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let r = iid_diagnostics(&i.pool).unwrap();
        ok &= r.passed;
        detail += &format!("{} KS block 1 vs block 5: p = {:.3} over {} walks\n", i.name, r.ks_pvalue, r.ks_samples);
        for c in r.lag_correlations.iter().filter(|c| c.lag == 1) {
            detail += &format!("{} lag-1 {}: r = {:+.5}, threshold {:.5}\n", i.name, c.series, c.r, c.threshold);
        }
    }
    let seqs = ar1(POOL_M, 50, 0.5, SEED);
    let control = iid_from_sequences(&[("ar1", seqs)]).unwrap();
    let fired = !control.passed && control.lag_correlations.iter().any(|c| c.lag == 1 && !c.passed);
    ok &= fired;
    detail += &format!(
        "AR(1) control, phi = 0.5: lag-1 r = {:+.4}, diagnostic fired: {fired}",
        control.lag_correlations[0].r
    );
    v.record(6, "i.i.d. suite with AR(1) negative control", ok, detail);
}

fn tails(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut attainable = true;
    let mut detail = String::new();
    for i in inst {
        for (name, samples) in [("dT", i.pool.dt_samples()), ("T0", i.pool.t0_samples())] {
            let t = tail_diagnostic(&samples).unwrap();
            let shape = t.slope < 0.0 && t.r_squared > 0.9;
            attainable &= shape;
            ok &= shape;
            if name == "dT" {
                ok &= t.stable;
                if i.name != "K3xK3" {
                    attainable &= t.stable;
                }
            }
            detail += &format!(
                "{} {name}: slope {:.4}, R^2 {:.4}, E[1.05^X] halves {:.4} / {:.4}, relative gap {:.4}\n",
                i.name, t.slope, t.r_squared, t.mgf_halves.0, t.mgf_halves.1, t.mgf_relative_gap
            );
        }
    }
    let law = reduced_renewal_increment_dist::<f64>(&inst[0].walk, 3000);
    detail += &format!(
        "K3xK3 exact tail ratio P[dT=n+1]/P[dT=n] at n=3000: {:.5} (radius {:.4})",
        law.marginal[3000] / law.marginal[2999],
        law.marginal[2999] / law.marginal[3000]
    );
    v.record(7, "exponential tails of dT and T0", ok, detail);
    assert!(attainable, "tail slopes, R^2 or PathxK3 moment stability failed");
}

fn blocks(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let c = block_checks(&i.pool, &i.ctx, i.walk.epsilon0());
        ok &= c.all_pass();
        detail += &format!(
            "{}: {} blocks; D_block=2 {}, D_dist<=dT {}, pattern {}, entropy bound {}, telescoping asserted during decomposition\n",
            i.name, c.blocks, c.d_block_ok, c.dist_le_dt_ok, c.pattern_ok, c.entropy_bound_ok
        );
    }
    v.record(8, "per-block exact bounds", ok, detail.trim_end());
}

fn smoothness(v: &mut Verdicts) {
    let alphas: Vec<f64> = (0..9).map(|k| 0.30 + 0.05 * k as f64).collect();
    let t = smoothness_probe(&WalkConfig::k3_x_k3(), &alphas, POOL_N, 100, SEED, BUFFER).unwrap();
    let mut detail = String::new();
    for row in &t.rows {
        detail += &format!(
            "alpha {:.2}: lambda {:.5}, ell {:.5}, h {:.5}, sigma2_ell {:.5}\n",
            row.alpha, row.lambda.renewal, row.ell.renewal, row.h.renewal, row.sigmas.block.sigma2
        );
    }
    let broken = t.symmetry.iter().filter(|s| !s.passed).count();
    detail += &format!(
        "flagged second differences: {}, symmetry checks failing: {broken} of {}",
        t.flagged,
        t.symmetry.len()
    );
    v.record(9, "smoothness probe over alpha with common random numbers", t.flagged == 0 && t.symmetric(), detail);
}

fn variances(v: &mut Verdicts, inst: &[Instance]) {
    let mut ok = true;
    let mut detail = String::new();
    for i in inst {
        let s = estimate_sigmas(&i.pool).unwrap();
        for stat in Statistic::ALL {
            let e = s.get(stat);
            ok &= e.sigma2 > 0.0;
            detail += &format!("{} sigma2 {}: {:.5} +/- {:.5}\n", i.name, stat.name(), e.sigma2, e.se);
        }
        let law = reduced_renewal_increment_dist::<f64>(&i.walk, 3000);
        let (m1_lo, m1_hi) = law.expectation_bounds(|n| n);
        let (m2_lo, m2_hi) = law.expectation_bounds(|n| n * n);
        let (m1, m2) = (0.5 * (m1_lo + m1_hi), 0.5 * (m2_lo + m2_hi));
        let ell = 2.0 / m1;
        let exact = (4.0 - 4.0 * ell * m1 + ell * ell * m2) / m1;
        let est = s.block;
        let z = (est.sigma2 - exact).abs() / est.se;
        ok &= z <= 3.0;
        detail += &format!(
            "{} sigma2_ell exact {exact:.6} (E[dT] in [{m1_lo:.9}, {m1_hi:.9}]), estimate {:.5}, |z| = {z:.2}\n",
            i.name, est.sigma2
        );
    }
    v.record(10, "variance positivity and exact sigma2_ell", ok, detail.trim_end());
}

#[test]
fn acceptance() {
    // The harness has already written "test acceptance ... " without a newline.
    say!();
    let inst = instances();
    let mut v = Verdicts(Vec::new());
    identities(&mut v, &inst);
    xi_cross_validation(&mut v, &inst);
    renewal_law(&mut v, &inst);
    rates(&mut v, &inst);
    clt(&mut v, &inst);
    iid(&mut v, &inst);
    tails(&mut v, &inst);
    blocks(&mut v, &inst);
    smoothness(&mut v);
    variances(&mut v, &inst);

    let passed = v.0.iter().filter(|(_, p)| *p).count();
    say!("{passed} of {} criteria passed", v.0.len());
    for (id, reason) in NOT_ASSERTED {
        say!("criterion {id} not asserted: {reason}");
    }
    let unexpected: Vec<usize> = v
        .0
        .iter()
        .filter(|(id, p)| !p && !NOT_ASSERTED.iter().any(|(n, _)| n == id))
        .map(|(id, _)| *id)
        .collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
