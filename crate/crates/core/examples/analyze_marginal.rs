//! Virtual value, W and regularity of the built-in marginals.
//!
//! ```bash
//! cargo run --example analyze_marginal
//! ```

use fairtax::marginals::MarginalDistribution;

fn main() -> fairtax::Result<()> {
    for spec in ["uniform", "power:2", "power:3", "texp:-1", "texp:5", "power:0.5"] {
        let d = MarginalDistribution::from_spec(spec)?;
        let r = d.regularity(1024);
        println!("{spec}: myerson regular {}, strongly regular {}", r.myerson_regular, r.strongly_regular);
        match d.monopoly_threshold() {
            Ok(k) => println!("  monopoly threshold θ* = {k:.6}"),
            Err(e) => println!("  no monopoly threshold: {e}"),
        }
        for t in [0.25, 0.5, 0.75] {
            println!("  θ = {t:.2}: F {:.4}  f {:.4}  ψ {:+.4}  W {:+.4}", d.cdf(t), d.pdf(t), d.virtual_value(t), d.w_function(t));
        }
    }
    Ok(())
}
