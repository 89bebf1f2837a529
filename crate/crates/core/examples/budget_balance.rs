//! Moves tax revenue across markets so that only the last one collects,
//! and binds a single market's budget through its lump sum.
//!
//! ```bash
//! cargo run --example budget_balance
//! ```

use fairtax::marginals::MarginalDistribution;
use fairtax::mechanism::{budget_bind, budget_normalize, ExciseTax, MarketMechanism};

fn main() -> fairtax::Result<()> {
    let markets = vec![
        MarketMechanism::from_excise(MarginalDistribution::uniform(), ExciseTax::new(0.0, 1.0 / 3.0))?,
        MarketMechanism::from_excise(MarginalDistribution::power(2.0)?, ExciseTax::new(0.05, 0.1))?,
        MarketMechanism::from_excise(MarginalDistribution::truncated_exponential(-1.0)?, ExciseTax::new(-0.02, 0.5))?,
    ];
    let n = budget_normalize(&markets);
    for (i, (b, a)) in n.expected_before.iter().zip(&n.expected_after).enumerate() {
        println!("market {i}: E[σ] {b:+.6} → {a:+.6}");
    }
    println!("total {:+.6}, feasible {}", n.total, n.feasible);
    let bound = MarketMechanism { tax: budget_bind(&markets[0]), ..markets[0].clone() };
    println!("market 0 after binding: E[σ] {:+.2e}, revenue {:.6}", bound.expected_tax(), bound.revenue());
    Ok(())
}
