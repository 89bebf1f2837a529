//! Cumulative-rent curves, Lorenz curves and SOSD verdicts for the
//! two-market uniform example under different couplings.
//!
//! ```bash
//! cargo run --example rent_curves
//! ```

use fairtax::couplings::Coupling;
use fairtax::marginals::MarginalDistribution;
use fairtax::mechanism::rent_function;
use fairtax::orders::{cumulative_rents, lorenz, rent_distribution, sosd_compare, RentProfile};

fn main() -> fairtax::Result<()> {
    let u = MarginalDistribution::uniform();
    let rents = vec![rent_function(&u, 0.5), rent_function(&u, 0.5)];
    let couplings = [
        Coupling::countermonotone(u.clone(), u.clone()),
        Coupling::independent(vec![u.clone(), u.clone()])?,
        Coupling::comonotone(vec![u.clone(), u])?,
    ];
    let mut dists = Vec::new();
    for c in &couplings {
        let rp = RentProfile::new(c.clone(), rents.clone())?;
        let dist = rent_distribution(&rp, 1024)?;
        let h = cumulative_rents(&rp, 1024)?;
        let l = lorenz(&dist, 1024)?;
        println!(
            "{:<12} mean {:.4}  H(0.5) {:.4}  H(0.75) {:.4}  gini {:.4}",
            c.label(),
            dist.mean(),
            h.eval(0.5),
            h.eval(0.75),
            l.gini
        );
        dists.push(dist);
    }
    for i in 0..dists.len() {
        for j in 0..dists.len() {
            if i != j && sosd_compare(&dists[i], &dists[j]).dominates {
                println!("{} rents ≻_SOSD {} rents", couplings[i].label(), couplings[j].label());
            }
        }
    }
    Ok(())
}
