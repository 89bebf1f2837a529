//! A marginal read from a `theta,cdf` table, compared to its closed form.
//!
//! ```bash
//! cargo run --example tabulated_marginal
//! ```

use fairtax::frontier::frontier_interval;
use fairtax::marginals::MarginalDistribution;

fn main() -> fairtax::Result<()> {
    let mut csv = String::from("theta,cdf\n");
    for i in 0..=64 {
        let t = i as f64 / 64.0;
        csv.push_str(&format!("{t},{}\n", t * t));
    }
    let table = MarginalDistribution::from_csv_reader(csv.as_bytes(), "table:θ²")?;
    let exact = MarginalDistribution::power(2.0)?;
    let (a, b) = (frontier_interval(&table)?, frontier_interval(&exact)?);
    println!("tabulated frontier [{:.5}, {:.5}]", a.lower, a.upper);
    println!("closed-form frontier [{:.5}, {:.5}]", b.lower, b.upper);
    Ok(())
}
