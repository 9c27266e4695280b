//! Loads the two built-in configurations, prints their validation reports,
//! then breaks one on purpose.
//!
//! ```bash
//! cargo run --example validate_config
//! ```

use freewalk::{validate_config, Prob, WalkConfig};

pub fn run_example() -> freewalk::Result<()> {
    for name in WalkConfig::shortcut_names() {
        let cfg = WalkConfig::shortcut(name).expect("built-in name");
        let report = validate_config(&cfg);
        println!("{name} (digest {}):", &cfg.digest()[..12]);
        print!("{report}");
        assert!(report.passed());
    }

    // A row that no longer sums to one.
    let mut broken = WalkConfig::k3_x_k3();
    broken.factors[0].transition[1][0] = Prob::from_ratio(1, 3);
    let report = validate_config(&broken);
    println!("perturbed row:");
    for c in report.failures() {
        println!("  {}: {}", c.name, c.detail);
    }
    assert!(!report.passed());

    // Round trip through JSON.
    let text = WalkConfig::path_x_k3().to_json_string();
    let back = WalkConfig::from_json_str(&text)?;
    assert_eq!(back, WalkConfig::path_x_k3());
    Ok(())
}

#[allow(dead_code)]
fn main() -> freewalk::Result<()> {
    run_example()
}
