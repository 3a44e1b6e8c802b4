//! Runs every suite and prints its wall time and outcome.
//!
//! `cargo run --release --example timing -- [trials] [seed]`

use std::time::Instant;

use wcep::harness::{run_suite, Suite};
use wcep::ToleranceConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let tol = ToleranceConfig::default();
    let total = Instant::now();
    let mut failed = 0;
    for suite in Suite::ALL {
        let t = Instant::now();
        let r = run_suite(suite.label(), trials, seed, &tol).expect("suite labels are valid");
        failed += usize::from(!r.passed());
        let notes: String = r.notes.chars().take(300).collect();
        println!(
            "{:<18} {:>6.2}s failures={} worst={:.2e}  {notes}",
            r.suite,
            t.elapsed().as_secs_f64(),
            r.failures,
            r.worst_residual
        );
    }
    println!(
        "total {:.2}s, {failed} suite(s) failed",
        total.elapsed().as_secs_f64()
    );
}
