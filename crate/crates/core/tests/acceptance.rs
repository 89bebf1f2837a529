//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairtax::couplings::{supermodular_compare, Coupling};
use fairtax::frontier::{frontier_interval, supra_pricing_check};
use fairtax::marginals::MarginalDistribution;
use fairtax::mechanism::{
    best_response_check, budget_normalize, rent_function, tax_for_allocation, AllocationRule, ExciseTax, MarketMechanism,
};
use fairtax::oracle::run_dominance_scan;
use fairtax::orders::{cumulative_rents, rent_distribution, sosd_compare, sosd_via_h, RentProfile};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn uniform() -> MarginalDistribution {
    MarginalDistribution::uniform()
}

fn half_rents() -> Vec<fairtax::mechanism::RentFunction> {
    vec![rent_function(&uniform(), 0.5), rent_function(&uniform(), 0.5)]
}

fn criterion_1() -> Outcome {
    let f = frontier_interval(&uniform()).unwrap();
    let (e_lo, e_hi) = ((f.lower - 2.0 / 3.0).abs(), (f.upper - 0.75).abs());
    outcome(e_lo < 1e-8 && e_hi < 1e-8, format!("[{:.12}, {:.12}], errors {e_lo:.1e} / {e_hi:.1e} (tol 1e-8)", f.lower, f.upper))
}

fn criterion_2() -> Outcome {
    let d = uniform();
    let err = (0..1024)
        .map(|i| i as f64 / 1023.0)
        .map(|t| (d.w_function(t) - (3.0 - 4.0 * t)).abs())
        .fold(0.0, f64::max);
    outcome(err < 1e-8, format!("max |W − (3 − 4θ)| on 1024 points = {err:.2e} (tol 1e-8)"))
}

fn criterion_3() -> Outcome {
    let d = uniform();
    let anti = RentProfile::new(Coupling::countermonotone(d.clone(), d.clone()), half_rents()).unwrap();
    let mono = RentProfile::new(Coupling::comonotone(vec![d.clone(), d]).unwrap(), half_rents()).unwrap();
    let (ha, hm) = (cumulative_rents(&anti, 2048).unwrap(), cumulative_rents(&mono, 2048).unwrap());
    let dev_a = ha.percentiles.iter().zip(&ha.values).map(|(p, v)| (v - p * p / 4.0).abs()).fold(0.0, f64::max);
    let dev_m =
        hm.percentiles.iter().zip(&hm.values).map(|(p, v)| (v - (p - 0.5f64).max(0.0).powi(2)).abs()).fold(0.0, f64::max);
    let v = sosd_compare(&rent_distribution(&anti, 2048).unwrap(), &rent_distribution(&mono, 2048).unwrap());
    outcome(
        dev_a < 1e-3 && dev_m < 1e-3 && v.dominates && v.margin >= 0.0,
        format!(
            "antitone dev {dev_a:.2e}, monotone dev {dev_m:.2e} (tol 1e-3); antitone ≻ monotone = {}, margin {:.2e}",
            v.dominates, v.margin
        ),
    )
}

fn criterion_4() -> Outcome {
    let d = uniform();
    let f = frontier_interval(&d).unwrap();
    let rise = f.lower - f.monopoly;
    let r = supra_pricing_check(&d).unwrap();
    let err = (rise - 1.0 / 6.0).abs();
    outcome(err < 1e-8 && r.holds, format!("k_low − θ* = {rise:.12} (error {err:.1e}, tol 1e-8); supra-pricing = {}", r.holds))
}

fn criterion_5() -> Outcome {
    let d = uniform();
    let u2 = || vec![d.clone(), d.clone()];
    let chain = [
        Coupling::comonotone(u2()).unwrap(),
        Coupling::gaussian(d.clone(), d.clone(), 0.8).unwrap(),
        Coupling::gaussian(d.clone(), d.clone(), 0.2).unwrap(),
        Coupling::independent(u2()).unwrap(),
        Coupling::countermonotone(d.clone(), d.clone()),
    ];
    let dists: Vec<_> = chain
        .iter()
        .map(|c| rent_distribution(&RentProfile::new(c.clone(), half_rents()).unwrap(), 256).unwrap())
        .collect();
    let (mut comparable, mut fair) = (0, 0);
    for i in 0..chain.len() {
        for j in 0..chain.len() {
            if i == j || !supermodular_compare(&chain[i], &chain[j], 256).unwrap().dominates {
                continue;
            }
            comparable += 1;
            if sosd_compare(&dists[j], &dists[i]).dominates {
                fair += 1;
            }
        }
    }
    outcome(comparable == 10 && fair == 10, format!("{fair}/{comparable} supermodular-ordered pairs ordered by fairness (need 10/10)"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut agree, mut total) = (0, 0);
    for d in [uniform(), MarginalDistribution::power(2.0).unwrap()] {
        let single = Coupling::independent(vec![d.clone()]).unwrap();
        for _ in 0..50 {
            let (ka, kb) = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
            let pa = RentProfile::new(single.clone(), vec![rent_function(&d, ka)]).unwrap();
            let pb = RentProfile::new(single.clone(), vec![rent_function(&d, kb)]).unwrap();
            let (da, db) = (rent_distribution(&pa, 512).unwrap(), rent_distribution(&pb, 512).unwrap());
            let (ha, hb) = (cumulative_rents(&pa, 512).unwrap(), cumulative_rents(&pb, 512).unwrap());
            let ab = sosd_compare(&da, &db).dominates == sosd_via_h(&ha, &hb).unwrap().dominates;
            let ba = sosd_compare(&db, &da).dominates == sosd_via_h(&hb, &ha).unwrap().dominates;
            total += 1;
            agree += usize::from(ab && ba);
        }
    }
    outcome(agree == total, format!("{agree}/{total} threshold pairs agree in both directions (Uniform and Power(2), 50 each)"))
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [uniform(), MarginalDistribution::power(2.0).unwrap()] {
        let r = run_dominance_scan(&d, 32, 100, 0).unwrap();
        let ok = r.frontier_undominated && r.monopoly_dominated_by.is_some();
        pass &= ok;
        parts.push(format!(
            "{}: frontier dominations {}, monopoly {:.5} dominated by {:?}",
            d.name(),
            r.frontier_dominations.len(),
            r.grid_monopoly,
            r.monopoly_dominated_by
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let builtins = [
        uniform(),
        MarginalDistribution::power(2.0).unwrap(),
        MarginalDistribution::power(3.0).unwrap(),
        MarginalDistribution::truncated_exponential(-1.0).unwrap(),
    ];
    let grid: Vec<f64> = (0..1024).map(|j| (j as f64 + 0.5) / 1024.0).collect();
    let mut monotone = true;
    let mut identity_err: f64 = 0.0;
    for d in &builtins {
        monotone &= d.regularity(1024).strongly_regular;
        let w: Vec<f64> = grid.iter().map(|&t| d.w_function(t)).collect();
        let ratio: Vec<f64> = grid.iter().zip(&w).map(|(&t, w)| w / (1.0 - d.cdf(t))).collect();
        monotone &= w.windows(2).all(|p| p[1] <= p[0] + 1e-12) && ratio.windows(2).all(|p| p[1] <= p[0] + 1e-9 * p[0].abs().max(1.0));
        for i in 1..20 {
            let k = i as f64 / 20.0;
            identity_err = identity_err.max((d.w_tail_by_quadrature(k, 1e-10) + (1.0 - d.cdf(k)) * d.virtual_value(k)).abs());
        }
    }
    // with pdf(0) = 0 only rules that hold q = 0 on a stretch near 0 have a finite tax
    let pl = |k: Vec<(f64, f64)>| AllocationRule::piecewise_linear(k).unwrap();
    let cases = [
        (uniform(), AllocationRule::identity()),
        (uniform(), pl(vec![(0.0, 0.0), (0.4, 0.1), (0.7, 0.6), (1.0, 1.0)])),
        (uniform(), pl(vec![(0.0, 0.2), (0.5, 0.3), (1.0, 0.9)])),
        (MarginalDistribution::power(2.0).unwrap(), pl(vec![(0.0, 0.0), (0.3, 0.0), (0.6, 0.5), (1.0, 1.0)])),
        (MarginalDistribution::power(2.0).unwrap(), pl(vec![(0.0, 0.0), (0.2, 0.0), (0.5, 0.4), (1.0, 0.8)])),
    ];
    let mut round_trip: f64 = 0.0;
    for (d, q) in &cases {
        let sigma = tax_for_allocation(d, q).unwrap();
        round_trip = round_trip.max(best_response_check(d, &sigma, q, 512));
    }
    let markets: Vec<MarketMechanism> = [(0.0, 1.0 / 3.0), (0.05, 0.0), (-0.02, 0.5)]
        .iter()
        .map(|&(c, t)| MarketMechanism::from_excise(uniform(), ExciseTax::new(c, t)).unwrap())
        .collect();
    let norm = budget_normalize(&markets);
    let before: f64 = norm.expected_before.iter().sum();
    let after: f64 = norm.expected_after.iter().sum();
    let per_market = norm.expected_after[..markets.len() - 1].iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let budget_ok = per_market <= 1e-9 && (before - after).abs() <= 1e-9;
    outcome(
        monotone && identity_err < 1e-6 && round_trip <= 1e-4 && budget_ok,
        format!(
            "W and W/(1−F) monotone = {monotone}; antiderivative error {identity_err:.1e} (tol 1e-6); round trip {round_trip:.1e} (tol 1e-4); budget per-market {per_market:.1e}, total drift {:.1e} (tol 1e-9)",
            (before - after).abs()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 8] = [
        ("1 uniform frontier interval", criterion_1, Some(Duration::from_secs(1))),
        ("2 uniform W formula", criterion_2, None),
        ("3 coupling cumulative-rent curves", criterion_3, None),
        ("4 supra-pricing margin", criterion_4, None),
        ("5 supermodular order implies fairness", criterion_5, Some(Duration::from_secs(30))),
        ("6 SOSD characterization equivalence", criterion_6, None),
        ("7 oracle falsification", criterion_7, Some(Duration::from_secs(60))),
        ("8 property suites", criterion_8, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
            }
            o.detail.push_str(&format!("; {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()));
        }
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/8 passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
