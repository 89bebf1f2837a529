//! Supermodular comparisons along a chain of uniform couplings, with the
//! Monte Carlo battery as a cross-check.
//!
//! ```bash
//! cargo run --example compare_couplings
//! ```

use fairtax::couplings::{supermodular_compare, supermodular_test_battery, Coupling};
use fairtax::marginals::MarginalDistribution;

fn main() -> fairtax::Result<()> {
    let u = MarginalDistribution::uniform();
    let chain = [
        Coupling::comonotone(vec![u.clone(), u.clone()])?,
        Coupling::gaussian(u.clone(), u.clone(), 0.5)?,
        Coupling::independent(vec![u.clone(), u.clone()])?,
        Coupling::gaussian(u.clone(), u.clone(), -0.5)?,
        Coupling::countermonotone(u.clone(), u),
    ];
    for w in chain.windows(2) {
        let v = supermodular_compare(&w[0], &w[1], 256)?;
        println!("{} ≻_SM {}: {} (margin {:.2e})", w[0].label(), w[1].label(), v.dominates, v.margin);
    }
    // every gap should be nonnegative when the first coupling dominates
    for b in supermodular_test_battery(&chain[0], &chain[4], 1, 4)? {
        println!("  {:<24} gap {:+.5}", b.function, b.gap);
    }
    Ok(())
}
