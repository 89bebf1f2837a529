use fairtax::couplings::Coupling;
use fairtax::frontier::frontier_interval;
use fairtax::marginals::MarginalDistribution;
use fairtax::mechanism::rent_function;
use fairtax::oracle::{additivity_scan, brute_sosd, convolve, fairness_scan, run_dominance_scan, DiscreteInstance};
use fairtax::orders::{rent_distribution, sosd_compare, RentProfile};

fn u() -> MarginalDistribution {
    MarginalDistribution::uniform()
}

#[test]
fn symmetric_frontier_pairs_survive_correlation() {
    let f = frontier_interval(&u()).unwrap();
    let ks: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).chain([0.7, f.lower, f.upper]).collect();
    for coupling in [
        Coupling::independent(vec![u(), u()]).unwrap(),
        Coupling::gaussian(u(), u(), 0.6).unwrap(),
        Coupling::gaussian(u(), u(), -0.6).unwrap(),
        Coupling::comonotone(vec![u(), u()]).unwrap(),
    ] {
        let dist = |a: f64, b: f64| {
            let rp = RentProfile::new(coupling.clone(), vec![rent_function(&u(), a), rent_function(&u(), b)]).unwrap();
            rent_distribution(&rp, 64).unwrap()
        };
        let rivals: Vec<_> = ks.iter().flat_map(|&x| ks.iter().map(move |&y| (x, y))).map(|(x, y)| (x, y, dist(x, y))).collect();
        for k in [f.lower, 0.7, f.upper] {
            let target = dist(k, k);
            for (x, y, rival) in &rivals {
                let v = sosd_compare(rival, &target);
                assert!(!(v.dominates && v.max_gap > 1e-6), "{} ({x}, {y}) beats ({k}, {k})", coupling.label());
            }
        }
    }
}

#[test]
fn mixed_frontier_pair_is_improvable() {
    // (2/3, 3/4) has both thresholds on the frontier, yet (0.7, 0.7) raises the
    // floor and the mean of total rents and dominates it under independence
    let f = frontier_interval(&u()).unwrap();
    let atoms = |k: f64| {
        let r = rent_function(&u(), k);
        (0..60).map(|j| (r.eval((j as f64 + 0.5) / 60.0), 1.0 / 60.0)).collect::<Vec<_>>()
    };
    let mixed = convolve(&atoms(f.lower), &atoms(f.upper));
    let even = convolve(&atoms(0.7), &atoms(0.7));
    let v = brute_sosd(&even, &mixed);
    assert!(v.dominates && v.max_gap > 5e-3, "{v:?}");
    let rp = |a, b| RentProfile::new(Coupling::independent(vec![u(), u()]).unwrap(), vec![rent_function(&u(), a), rent_function(&u(), b)]).unwrap();
    let w = sosd_compare(&rent_distribution(&rp(0.7, 0.7), 60).unwrap(), &rent_distribution(&rp(f.lower, f.upper), 60).unwrap());
    assert!(w.dominates && (w.max_gap - v.max_gap).abs() < 1e-9);
}

#[test]
fn scan_reports_coverage() {
    let inst = DiscreteInstance::new(u(), 16, 30, 9).unwrap();
    assert_eq!(inst.candidates.len() + inst.excluded.len(), 17 + 30);
    let r = run_dominance_scan(&u(), 16, 30, 9).unwrap();
    assert_eq!(r.candidates, inst.candidates.len());
    assert_eq!(r.pairs_checked, r.candidates * (r.candidates - 1));
    assert!(r.frontier_undominated && r.off_frontier_all_dominated);
    assert_eq!(r.verdict_disagreements, 0);
}

#[test]
fn power_two_excludes_rules_serving_type_zero() {
    let p = MarginalDistribution::power(2.0).unwrap();
    let inst = DiscreteInstance::new(p, 16, 40, 2).unwrap();
    for c in &inst.candidates {
        assert_eq!(c.rule.eval(0.0), 0.0, "{}", c.label);
    }
}

#[test]
fn fairness_follows_concordance() {
    let chain = [
        Coupling::comonotone(vec![u(), u()]).unwrap(),
        Coupling::gaussian(u(), u(), 0.5).unwrap(),
        Coupling::independent(vec![u(), u()]).unwrap(),
        Coupling::countermonotone(u(), u()),
    ];
    let r = fairness_scan(&chain, (0.6, 0.7), 48).unwrap();
    assert!(r.order_implies_fairness);
    assert_eq!(r.antitone_dominates_all, Some(true));
    assert!(r.pairs.iter().all(|p| p.orders_agree));
}

#[test]
fn additivity_on_mixed_marginals() {
    let p = MarginalDistribution::power(2.0).unwrap();
    let pairs = [((0.7, 0.76), (0.55, 0.6)), ((0.72, 0.78), (0.9, 0.95)), ((0.5, 0.5), (0.7, 0.76))];
    let r = additivity_scan(&u(), &p, &pairs, 24);
    assert!(r.all_implied_hold);
    assert!(r.cases.iter().any(|c| c.implied_holds.is_some()));
}

#[test]
fn brute_sosd_matches_hand_example() {
    // oracle: a sure 1/2 against a fair coin on {0, 1}, same mean
    let sure = [(0.5, 1.0)];
    let coin = [(0.0, 0.5), (1.0, 0.5)];
    assert!(brute_sosd(&sure, &coin).dominates);
    assert!(!brute_sosd(&coin, &sure).dominates);
    // integrated cdf gap at t = 1/2 is 1/4
    assert!((brute_sosd(&sure, &coin).max_gap - 0.25).abs() < 1e-12);
}
