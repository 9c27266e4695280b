//! Central limit check for one statistic: standardize the endpoint values
//! of many walks with rate and variance estimated from an independent
//! calibration pool, then test the result against the standard normal.
//!
//! ```bash
//! cargo run --release --example clt_experiment
//! ```

use freewalk::estimators::{clt_experiment, Calibration, Statistic, KS_THRESHOLD};
use freewalk::{GenFunContext, Walk, WalkConfig};

pub fn run_example() -> freewalk::Result<()> {
    let walk = Walk::new(WalkConfig::path_x_k3())?;
    let ctx = GenFunContext::build(&walk)?;
    let calibration = Calibration {
        n: 4_000,
        m: 60,
        buffer: 300,
    };
    for stat in Statistic::ALL {
        let r = clt_experiment(&walk, &ctx, stat, 1_000, 200, 3, calibration)?;
        println!(
            "{:<8} rate {:.4}  sigma {:.4}  KS {:.4} (p = {:.3})  mean {:+.3}  var {:.3}  {}",
            stat.name(),
            r.rate_estimate,
            r.sigma_estimate,
            r.ks_stat.unwrap_or(f64::NAN),
            r.ks_pvalue.unwrap_or(f64::NAN),
            r.sample_mean,
            r.sample_variance,
            if r.passes(KS_THRESHOLD) { "ok" } else { "off" }
        );
    }

    // Very short walks are flagged instead of tested.
    let short = clt_experiment(&walk, &ctx, Statistic::Dist, 10, 50, 3, calibration)?;
    assert!(short.pre_asymptotic && short.ks_stat.is_none());
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
