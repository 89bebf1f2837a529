//! Brute-force dominance scan on a discretized market, the drift of the
//! empirical frontier with grid size, and the additivity check.
//!
//! ```bash
//! cargo run --release --example oracle_scan
//! ```

use fairtax::marginals::MarginalDistribution;
use fairtax::oracle::{additivity_scan, endpoint_drift, run_dominance_scan};

fn main() -> fairtax::Result<()> {
    for spec in ["uniform", "power:2"] {
        let d = MarginalDistribution::from_spec(spec)?;
        let r = run_dominance_scan(&d, 32, 100, 0)?;
        println!(
            "{spec}: {} candidates, {} pairs, frontier undominated {}, monopoly {:.4} dominated by {:?}",
            r.candidates, r.pairs_checked, r.frontier_undominated, r.grid_monopoly, r.monopoly_dominated_by
        );
        println!("  off-frontier thresholds all dominated {}, verdict disagreements {}", r.off_frontier_all_dominated, r.verdict_disagreements);
        for e in endpoint_drift(&d, &[16, 32, 64])? {
            println!("  m = {:>3}: undominated [{:.5}, {:.5}], drift {:+.4} / {:+.4}", e.grid_size, e.lower, e.upper, e.lower_drift, e.upper_drift);
        }
    }
    let u = MarginalDistribution::uniform();
    let pairs = [((0.7, 0.7), (0.55, 0.6)), ((0.68, 0.72), (0.5, 0.5))];
    println!("additivity holds {}", additivity_scan(&u, &u, &pairs, 32).all_implied_hold);
    Ok(())
}
