//! The fairness-efficiency frontier of excise taxes and a sweep across it.
//!
//! ```bash
//! cargo run --example frontier_sweep
//! ```

use fairtax::frontier::{frontier_interval, frontier_sweep, supra_pricing_check};
use fairtax::marginals::MarginalDistribution;

fn main() -> fairtax::Result<()> {
    for spec in ["uniform", "power:2", "texp:-1"] {
        let d = MarginalDistribution::from_spec(spec)?;
        let f = frontier_interval(&d)?;
        let s = supra_pricing_check(&d)?;
        println!("{spec}: frontier [{:.6}, {:.6}], θ* {:.6}, supra-pricing {} by {:.4}", f.lower, f.upper, f.monopoly, s.holds, s.margin);
        println!("  {:>8} {:>9} {:>9} {:>10} {:>8}", "k", "τ", "C", "mean rent", "gini");
        for r in frontier_sweep(&d, 5, &[f.monopoly])? {
            println!(
                "  {:>8.5} {:>+9.5} {:>+9.5} {:>10.5} {:>8.4}{}",
                r.k,
                r.tau,
                r.lump_sum,
                r.mean_rent,
                r.gini,
                if r.frontier { "" } else { "  (off frontier)" }
            );
        }
    }
    Ok(())
}
