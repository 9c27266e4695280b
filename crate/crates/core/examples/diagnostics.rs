//! Checks the renewal structure on a pool of walks: independence of the
//! blocks, exponential tails of `dT` and `T0`, the exact per-block
//! identities, and the gap between `-log pi_n` and the entropy distance on
//! short walks.
//!
//! ```bash
//! cargo run --release --example diagnostics
//! ```

use freewalk::estimators::{build_pool, diagnostics};
use freewalk::{GenFunContext, Walk, WalkConfig};

pub fn run_example() -> freewalk::Result<()> {
    let walk = Walk::new(WalkConfig::path_x_k3())?;
    let ctx = GenFunContext::build(&walk)?;
    let pool = build_pool(&walk, &ctx, 2_000, 250, 5, 0, 300)?;
    let d = diagnostics(&pool, &walk, &ctx, &[4, 8], 200)?;

    println!("KS of block 1 against block 5: p = {:.3}", d.iid.ks_pvalue);
    for c in &d.iid.lag_correlations {
        println!("  lag-{} correlation of {:<6} {:+.4} (threshold {:.4})", c.lag, c.series, c.r, c.threshold);
    }
    for (name, t) in [("dT", &d.tail_dt), ("T0", &d.tail_t0)] {
        println!(
            "tail of {name}: slope {:.4}, R^2 {:.3}, E[1.05^X] halves {:.3} / {:.3}",
            t.slope, t.r_squared, t.mgf_halves.0, t.mgf_halves.1
        );
    }
    let b = &d.block_checks;
    println!("block identities: {} of {} blocks with d_block = 2", b.d_block_ok, b.blocks);
    for g in &d.entropy_gap {
        println!("n = {:>2}: -log pi_n {:.4}  d_L {:.4}  gap {:+.4}", g.n, g.mean_neg_log_pi, g.mean_dl, g.mean_gap);
    }
    assert!(b.all_pass());
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
