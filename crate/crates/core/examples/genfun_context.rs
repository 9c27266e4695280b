//! Numerical generating functions at `z = 1`: the first-visit values
//! `xi_i`, the factor last-exit values that define the entropy distance, and
//! a probe of the convergence radius of the Green function.
//!
//! ```bash
//! cargo run --release --example genfun_context
//! ```

use freewalk::genfun::{radius_diagnostic, solve_xi};
use freewalk::{Factor, GenFunContext, Walk, WalkConfig};

pub fn run_example() -> freewalk::Result<()> {
    for cfg in [WalkConfig::k3_x_k3(), WalkConfig::path_x_k3()] {
        let walk = Walk::new(cfg)?;
        let ctx = GenFunContext::build(&walk)?;
        println!("config {}", &ctx.config_digest[..12]);
        println!("  xi = [{:.12}, {:.12}]", ctx.xi[0], ctx.xi[1]);
        println!("  entropy constant C_L = {:.6}", ctx.cl_constant);
        for f in Factor::BOTH {
            for l in walk.letters(f) {
                println!(
                    "  letter {:<3} L = {:.6}  cost = {:.6}",
                    walk.vertex_name(f, l.vertex),
                    ctx.letter_l(f, l.vertex),
                    ctx.letter_cost(f, l.vertex)
                );
            }
        }
        let first = |f| walk.letters(f).next().expect("nontrivial factor");
        let w = freewalk::Word::from_letters(vec![first(Factor::Two), first(Factor::One)])?;
        println!("  d_L(o, {}) = {:.6}", walk.format_word(&w), ctx.dl_word(&w)?);

        // Just inside the unit disc the fixed point is strictly smaller.
        let inside = solve_xi(&walk, 0.9)?;
        assert!(inside.xi[0] < ctx.xi[0]);

        let radius = radius_diagnostic(&walk, 10)?;
        println!(
            "  solve_xi converges up to z = {:.2}; spectral proxy {:.4} at order {}",
            radius.largest_convergent_z, radius.spectral_proxy_high_order.1, radius.spectral_proxy_high_order.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
