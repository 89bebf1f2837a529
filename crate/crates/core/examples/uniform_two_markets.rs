//! The uniform two-market example end to end, as printed by
//! `fairtax reproduce-section5`.
//!
//! ```bash
//! cargo run --example uniform_two_markets
//! ```

fn main() -> fairtax::Result<()> {
    let r = fairtax::cli::reproduce_uniform_example(2048)?;
    for c in &r.checks {
        println!("{:<6} {:<40} {:.10} (expected {:.10}, tol {:.0e})", if c.pass { "ok" } else { "FAIL" }, c.name, c.value, c.expected, c.tolerance);
    }
    println!("frontier [{:.6}, {:.6}], θ* {:.6}", r.k_low, r.k_high, r.theta_star);
    println!("antitone rents ≻_SOSD monotone rents: {}", r.antitone_dominates_monotone);
    std::process::exit(if r.all_pass { 0 } else { 1 });
}
