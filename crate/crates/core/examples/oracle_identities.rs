//! Exact power-series oracle: enumerates paths of the walk in rational
//! arithmetic and checks the structural identities between Green functions,
//! last-exit functions and the first-visit functions `xi_i`.
//!
//! ```bash
//! cargo run --release --example oracle_identities
//! ```

use freewalk::oracle::{identity_suite, FirstPassage, Oracle};
use num_rational::BigRational;
use freewalk::{Factor, Walk, WalkConfig, Word};

pub fn run_example() -> freewalk::Result<()> {
    let walk = Walk::new(WalkConfig::k3_x_k3())?;
    let oracle = Oracle::new(&walk);

    let a = walk.word(&["a"])?;
    let l = oracle.first_passage_series::<BigRational>(
        &FirstPassage::LastExit {
            from: Word::root(),
            to: a,
        },
        5,
    )?;
    println!("L(o, a | z) up to z^5:");
    for (n, c) in l.coeffs().iter().enumerate() {
        println!("  z^{n}: {c}");
    }

    let xi = oracle.first_passage_series::<f64>(&FirstPassage::Xi(Factor::One), 12)?;
    println!("partial sums of xi_1(1): {:?}", &xi.partial_sums()[8..]);

    for (arith, order) in [("rational", 6), ("float", 10)] {
        let report = if arith == "rational" {
            identity_suite::<BigRational>(&walk, order, 0.0)?
        } else {
            identity_suite::<f64>(&walk, order, 1e-12)?
        };
        for c in &report.checks {
            println!("{arith:>8} N={order:<2} {:<6} cases={:<4} max_error={:.1e}", c.identity, c.cases, c.max_error);
        }
        assert!(report.passed);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
