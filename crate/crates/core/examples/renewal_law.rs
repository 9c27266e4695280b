//! Exact law of the renewal increment `dT`, computed on a reduced chain,
//! and the rates it implies. Compares a few probabilities with frequencies
//! from simulated blocks.
//!
//! ```bash
//! cargo run --release --example renewal_law
//! ```

use freewalk::estimators::{build_pool, Statistic};
use freewalk::oracle::reduced_renewal_increment_dist;
use freewalk::{GenFunContext, Walk, WalkConfig};

pub fn run_example() -> freewalk::Result<()> {
    let walk = Walk::new(WalkConfig::k3_x_k3())?;
    let ctx = GenFunContext::build(&walk)?;
    let law = reduced_renewal_increment_dist::<f64>(&walk, 400);
    let tail = law.tail_model();
    println!("unassigned mass beyond n = 400: {:.3e}, decay {:.4}", tail.residual_mass, tail.decay);

    let (mean_lo, mean_hi) = law.expectation_bounds(|n| n);
    let (sq_lo, _) = law.expectation_bounds(|n| n * n);
    let mean = 0.5 * (mean_lo + mean_hi);
    println!("E[dT] in [{mean_lo:.6}, {mean_hi:.6}], Var(dT) ~ {:.4}", sq_lo - mean * mean);
    println!("word length rate 2 / E[dT] = {:.6}", 2.0 / mean);

    let pool = build_pool(&walk, &ctx, 4_000, 20, 11, 0, 300)?;
    let dts = pool.dt_samples();
    println!("{:>3} {:>10} {:>10}", "n", "exact", "empirical");
    for n in 2..=8 {
        let freq = dts.iter().filter(|&&d| d as usize == n).count() as f64 / dts.len() as f64;
        println!("{n:>3} {:>10.6} {freq:>10.6}", law.marginal[n]);
    }
    let (ell, _) = freewalk::estimators::ratio_estimate(&pool.pairs(Statistic::Block))?;
    println!("estimated word length rate {ell:.4} from {} blocks", dts.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
