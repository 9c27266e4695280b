use freewalk::estimators::{
    clt_experiment, iid_from_sequences, ratio_estimate, sigma2_plugin, smoothness_probe, tail_diagnostic, Calibration,
    Statistic,
};
use freewalk::stats::normality_test;
use freewalk::{Error, GenFunContext, Walk, WalkConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal, Uniform};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn geometric_sequences(m: usize, len: usize, p: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let g = Geometric::new(p).unwrap();
    (0..m).map(|_| (0..len).map(|_| (g.sample(&mut r) + 1) as f64).collect()).collect()
}

fn ar1_sequences(m: usize, len: usize, phi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    (0..m)
        .map(|_| {
            let mut x = 0.0;
            (0..len)
                .map(|_| {
                    x = phi * x + z.sample(&mut r);
                    x
                })
                .collect()
        })
        .collect()
}

/// Discrete Pareto with `P[X >= k] = k^-a`.
fn pareto(n: usize, a: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let u = Uniform::new(0.0f64, 1.0).unwrap();
    (0..n).map(|_| (1.0 - u.sample(&mut r)).powf(-1.0 / a).floor()).collect()
}

#[test]
fn iid_geometric_input_passes() {
    let seqs = geometric_sequences(400, 40, 0.3, 1);
    let r = iid_from_sequences(&[("geom", seqs)]).unwrap();
    assert!(r.ks_pvalue > 0.01, "{}", r.ks_pvalue);
    assert!(r.passed);
}

#[test]
fn ar1_input_fires_the_correlation_check() {
    let m = 400;
    let seqs = ar1_sequences(m, 40, 0.5, 2);
    let r = iid_from_sequences(&[("ar1", seqs)]).unwrap();
    let lag1 = r.lag_correlations.iter().find(|c| c.lag == 1).unwrap();
    assert!(lag1.r.abs() > 3.0 / (m as f64).sqrt());
    assert!(!lag1.passed);
    assert!(!r.passed);
}

#[test]
fn too_short_sequences_are_refused() {
    let seqs = geometric_sequences(10, 3, 0.3, 3);
    assert!(matches!(
        iid_from_sequences(&[("short", seqs)]),
        Err(Error::InsufficientBlocks { .. })
    ));
}

#[test]
fn geometric_tail_slope_is_recovered() {
    let xs: Vec<f64> = geometric_sequences(1, 20_000, 0.5, 4).concat();
    let t = tail_diagnostic(&xs).unwrap();
    let target = 0.5f64.ln();
    assert!((t.slope - target).abs() <= 0.1 * target.abs(), "{}", t.slope);
    assert!(t.r_squared > 0.9);
    assert!(t.stable);
}

#[test]
fn heavy_tail_is_caught() {
    let xs = pareto(20_000, 1.2, 5);
    let t = tail_diagnostic(&xs).unwrap();
    // The log-survival curve bends: slopes over the two halves of the range differ.
    assert!(t.slope_halves.1.abs() < 0.5 * t.slope_halves.0.abs(), "{:?}", t.slope_halves);
    assert!(!t.stable);
    assert!(!t.passed);
}

#[test]
fn plug_in_arithmetic() {
    let (r, _) = ratio_estimate(&[(5.0, 3.0), (5.0, 3.0)]).unwrap();
    assert!((r - 0.6).abs() < 1e-15);
    let (l, _) = ratio_estimate(&[(5.0, 2.0), (5.0, 2.0)]).unwrap();
    assert!((l * 5.0 - 2.0).abs() < 1e-15);
    let s = sigma2_plugin(&[(5.0, 3.0), (7.0, 3.0)]).unwrap();
    assert!((s - 0.25 / 6.0).abs() < 1e-15);
    assert!(matches!(ratio_estimate(&[]), Err(Error::EmptyPool)));
}

#[test]
fn normality_test_contract() {
    let z = Normal::new(0.0, 1.0).unwrap();
    let mut r = rng(6);
    let xs: Vec<f64> = (0..2000).map(|_| z.sample(&mut r)).collect();
    let (d, p) = normality_test(&xs).unwrap();
    assert!(d < 0.05 && p > 0.001);
    let shifted: Vec<f64> = xs.iter().map(|x| x + 10.0).collect();
    assert!(normality_test(&shifted).unwrap().1 < 1e-6);
    assert!(matches!(normality_test(&[3.0; 30]), Err(Error::DegenerateSample)));
}

#[test]
fn clt_contracts() {
    let walk = Walk::new(WalkConfig::k3_x_k3()).unwrap();
    let ctx = GenFunContext::build(&walk).unwrap();
    let cal = Calibration {
        n: 3000,
        m: 20,
        buffer: 200,
    };
    let r = clt_experiment(&walk, &ctx, Statistic::Block, 1, 50, 8, cal).unwrap();
    assert!(r.pre_asymptotic);
    assert!(r.ks_stat.is_none() && r.ks_pvalue.is_none());
    assert!(!r.passes(0.05));

    let r = clt_experiment(&walk, &ctx, Statistic::Block, 400, 100, 8, cal).unwrap();
    assert!(!r.pre_asymptotic);
    for x in &r.raw_samples {
        assert_eq!(x.fract(), 0.0);
        assert!((0.0..=400.0).contains(x));
    }

    let mut cfg = WalkConfig::k3_x_k3();
    cfg.epsilon0 = None;
    let bare = Walk::new(cfg).unwrap();
    assert!(matches!(
        clt_experiment(&bare, &ctx, Statistic::Entropy, 400, 100, 8, cal),
        Err(Error::MissingEpsilon0)
    ));
}

#[test]
fn smoothness_probe_contracts() {
    let cfg = WalkConfig::k3_x_k3();
    let flat = smoothness_probe(&cfg, &[0.5, 0.5, 0.5], 1500, 10, 3, 200).unwrap();
    assert!(flat.differences.iter().all(|d| d.second == 0.0 && d.first == 0.0 && !d.flagged));

    let swap = smoothness_probe(&cfg, &[0.4, 0.5, 0.6], 3000, 30, 3, 200).unwrap();
    assert!(!swap.symmetry.is_empty());
    assert!(swap.symmetric());

    assert!(matches!(
        smoothness_probe(&cfg, &[0.5, 1.0], 100, 2, 3, 10),
        Err(Error::InvalidGridPoint { index: 1, .. })
    ));
    // The path factor differs from K3, so no symmetry is claimed.
    let b = smoothness_probe(&WalkConfig::path_x_k3(), &[0.4, 0.6], 1500, 10, 3, 200).unwrap();
    assert!(b.symmetry.is_empty());
}
