//! Builds the tax schedule that makes a monotone allocation the firm's best
//! response, then checks the round trip and the induced rents.
//!
//! ```bash
//! cargo run --example implement_allocation
//! ```

use fairtax::marginals::MarginalDistribution;
use fairtax::mechanism::{
    best_response_check, mean_rent, rent_function_general, revenue, tax_for_allocation, AllocationRule,
};

fn main() -> fairtax::Result<()> {
    let rules = [
        ("threshold 0.6", AllocationRule::threshold(0.6)),
        ("identity", AllocationRule::identity()),
        ("three steps", AllocationRule::step(vec![0.4, 0.7], vec![0.0, 0.5, 1.0])?),
        ("flat start", AllocationRule::piecewise_linear(vec![(0.0, 0.0), (0.3, 0.0), (0.6, 0.5), (1.0, 1.0)])?),
    ];
    for spec in ["uniform", "power:2"] {
        let d = MarginalDistribution::from_spec(spec)?;
        println!("{spec}");
        for (name, q) in &rules {
            match tax_for_allocation(&d, q) {
                Ok(sigma) => {
                    let gap = best_response_check(&d, &sigma, q, 512);
                    let rent = rent_function_general(&d, q)?;
                    println!(
                        "  {name:<14} σ(1) {:+.4}  best-response gap {gap:.1e}  I(0) {:+.4}  mean rent {:.4}  revenue {:.4}",
                        sigma.eval(1.0),
                        rent.eval(0.0),
                        mean_rent(&d, q),
                        revenue(&d, q, &sigma)
                    );
                }
                Err(e) => println!("  {name:<14} {e}"),
            }
        }
    }
    Ok(())
}
