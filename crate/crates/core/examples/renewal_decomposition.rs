//! Samples one long trajectory, finds its confirmed exit times and cuts it
//! into renewal blocks. Each block contributes a time increment and the
//! increments of the three additive statistics.
//!
//! ```bash
//! cargo run --release --example renewal_decomposition
//! ```

use freewalk::simulator::{detect_exit_times, renewal_decompose, sample_trajectory, DEFAULT_BUFFER};
use freewalk::{GenFunContext, Walk, WalkConfig};

pub fn run_example() -> freewalk::Result<()> {
    let walk = Walk::new(WalkConfig::k3_x_k3())?;
    let ctx = GenFunContext::build(&walk)?;
    let traj = sample_trajectory(&walk, 5_000, 7);

    let exits = detect_exit_times(&traj, DEFAULT_BUFFER);
    let confirmed = exits.iter().filter(|e| e.confirmed).count();
    println!(
        "n = {}, final length {}, {confirmed} confirmed exit times of {}",
        traj.len(),
        traj.final_word.len(),
        exits.len()
    );

    let sample = renewal_decompose(&traj, &ctx, &walk, DEFAULT_BUFFER)?;
    println!("tau = {}, T0 = {:?}, {} blocks", sample.tau, sample.t0(), sample.blocks.len());
    println!("{:>4} {:>5} {:>6} {:>7} {:>9}  W", "k", "dT", "D_dist", "D_block", "D_ent");
    for (k, b) in sample.blocks.iter().take(10).enumerate() {
        println!(
            "{:>4} {:>5} {:>6} {:>7} {:>9.4}  {}",
            k + 1,
            b.dt,
            b.d_dist,
            b.d_block,
            b.d_ent,
            walk.format_word(&b.w)
        );
    }

    let total: usize = sample.blocks.iter().map(|b| b.dt).sum();
    let length: u64 = sample.blocks.iter().map(|b| b.d_block).sum();
    println!("word length gained per step over the blocks: {:.4}", length as f64 / total as f64);
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
