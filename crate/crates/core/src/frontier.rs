//! The fairness–efficiency frontier of threshold mechanisms: the interval
//! of thresholds `k` with `0 ≤ W(k) ≤ 1 − F(k)`, the excise taxes that
//! implement them, and the supra-pricing check against the monopoly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::couplings::Coupling;
use crate::error::{Error, Result};
use crate::marginals::MarginalDistribution;
use crate::mechanism::{rent_function, ExciseTax};
use crate::numeric;
use crate::orders::{lorenz, rent_distribution, RentProfile, DEFAULT_PERCENTILE_GRID};

/// Bracket width for the endpoint bisections, tight enough that 12-digit
/// output shows exact endpoints exactly.
const ENDPOINT_TOL: f64 = 1e-14;

/// Thresholds on the frontier, `[k_low, k_high]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierInterval {
    pub lower: f64,
    pub upper: f64,
    /// Monopoly threshold `θ*` with `ψ(θ*) = 0`.
    pub monopoly: f64,
    pub strongly_regular: bool,
    /// Set when the interval is computed without strong regularity and is
    /// therefore not certified.
    pub warning: Option<String>,
}

impl FrontierInterval {
    pub fn contains(&self, k: f64) -> bool {
        k >= self.lower && k <= self.upper
    }

    /// `{k_low, k_high, theta_star, strongly_regular}`.
    pub fn summary(&self) -> FrontierSummary {
        FrontierSummary {
            k_low: self.lower,
            k_high: self.upper,
            theta_star: self.monopoly,
            strongly_regular: self.strongly_regular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSummary {
    pub k_low: f64,
    pub k_high: f64,
    pub theta_star: f64,
    pub strongly_regular: bool,
}

/// `k_low` solves `W = 1 − F` and `k_high` solves `W = 0`, both by bisection.
///
/// Requires Myerson regularity. Without strong regularity the same roots are
/// returned with a warning attached.
pub fn frontier_interval(d: &MarginalDistribution) -> Result<FrontierInterval> {
    let report = d.regularity(crate::marginals::DEFAULT_REGULARITY_GRID);
    let monopoly = d.monopoly_threshold()?;
    let lower = numeric::bisect(|t| d.w_function(t) - (1.0 - d.cdf(t)), 0.0, 1.0, ENDPOINT_TOL);
    let upper = numeric::bisect(|t| d.w_function(t), 0.0, 1.0, ENDPOINT_TOL);
    let warning = (!report.strongly_regular).then(|| {
        format!("{} is not strongly regular; the interval [{lower:.6}, {upper:.6}] is not certified", d.name())
    });
    Ok(FrontierInterval { lower, upper, monopoly, strongly_regular: report.strongly_regular, warning })
}

/// Excise tax implementing threshold `k` with a binding budget:
/// `τ = ψ(k)` and `C = τ (1 − F(k))`.
pub fn excise_for_threshold(d: &MarginalDistribution, k: f64) -> ExciseTax {
    let tau = d.virtual_value(k);
    let survival = 1.0 - d.cdf(k);
    ExciseTax::new(if survival == 0.0 { 0.0 } else { tau * survival }, tau)
}

/// Lump sum paid to every type under threshold `k`: `(1 − F(k)) ψ(k)`.
pub fn lowest_type_rent(d: &MarginalDistribution, k: f64) -> f64 {
    -d.w_antiderivative_tail(k)
}

/// `∫ (1 − F − W) 1{θ ≥ k} dθ`, the mean rent under threshold `k`.
pub fn mean_rent(d: &MarginalDistribution, k: f64) -> f64 {
    numeric::integrate(&|t| 1.0 - d.cdf(t), k, 1.0, 1e-12) + lowest_type_rent(d, k)
}

/// One row of a frontier sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub tau: f64,
    #[serde(rename = "C")]
    pub lump_sum: f64,
    pub mean_rent: f64,
    pub lowest_type_rent: f64,
    pub consumer_price: f64,
    /// `NaN` when the mean rent is not positive.
    pub gini: f64,
    pub frontier: bool,
}

pub fn sweep_row(d: &MarginalDistribution, interval: &FrontierInterval, k: f64) -> Result<SweepRow> {
    let tax = excise_for_threshold(d, k);
    let profile = RentProfile::new(Coupling::independent(vec![d.clone()])?, vec![rent_function(d, k)])?;
    let dist = rent_distribution(&profile, DEFAULT_PERCENTILE_GRID)?;
    let gini = match lorenz(&dist, DEFAULT_PERCENTILE_GRID) {
        Ok(l) => l.gini,
        Err(Error::ZeroMean(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        k,
        tau: tax.per_unit,
        lump_sum: tax.lump_sum,
        mean_rent: mean_rent(d, k),
        lowest_type_rent: lowest_type_rent(d, k),
        consumer_price: tax.consumer_price(k),
        gini,
        frontier: interval.contains(k),
    })
}

/// `steps` rows on a uniform grid over `[k_low, k_high]`, followed by one
/// row per `reference` threshold.
pub fn frontier_sweep(d: &MarginalDistribution, steps: usize, reference: &[f64]) -> Result<Vec<SweepRow>> {
    if steps < 2 {
        return Err(Error::Invalid("a sweep needs at least two steps".into()));
    }
    let interval = frontier_interval(d)?;
    let span = interval.upper - interval.lower;
    let grid = (0..steps).map(|i| interval.lower + span * i as f64 / (steps - 1) as f64);
    grid.chain(reference.iter().copied()).map(|k| sweep_row(d, &interval, k)).collect()
}

pub const SWEEP_COLUMNS: [&str; 8] =
    ["k", "tau", "C", "mean_rent", "lowest_type_rent", "consumer_price", "gini", "frontier"];

pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        let nums = [r.k, r.tau, r.lump_sum, r.mean_rent, r.lowest_type_rent, r.consumer_price, r.gini];
        let mut rec: Vec<String> = nums.iter().map(|v| format!("{v}")).collect();
        rec.push(r.frontier.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(SWEEP_COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!("expected header `{}`", SWEEP_COLUMNS.join(","))));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Outcome of comparing the frontier with the monopoly threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupraPricingReport {
    /// `k_low > θ*`.
    pub holds: bool,
    /// `k_low − θ*`.
    pub margin: f64,
    pub k_low: f64,
    pub theta_star: f64,
    pub w_at_monopoly: f64,
    pub survival_at_monopoly: f64,
    /// `W(θ*) > 1 − F(θ*)`, so the monopoly threshold lies below the frontier.
    pub monopoly_excluded: bool,
}

/// Checks that every frontier threshold prices above the monopoly.
pub fn supra_pricing_check(d: &MarginalDistribution) -> Result<SupraPricingReport> {
    if !d.regularity(crate::marginals::DEFAULT_REGULARITY_GRID).strongly_regular {
        return Err(Error::NotStronglyRegular { name: d.name().to_string() });
    }
    let interval = frontier_interval(d)?;
    let theta_star = interval.monopoly;
    let w_at_monopoly = d.w_function(theta_star);
    let survival_at_monopoly = 1.0 - d.cdf(theta_star);
    Ok(SupraPricingReport {
        holds: interval.lower > theta_star,
        margin: interval.lower - theta_star,
        k_low: interval.lower,
        theta_star,
        w_at_monopoly,
        survival_at_monopoly,
        monopoly_excluded: w_at_monopoly > survival_at_monopoly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{best_response_excise, budget_bind, MarketMechanism};

    fn strongly_regular_builtins() -> Vec<MarginalDistribution> {
        vec![
            MarginalDistribution::uniform(),
            MarginalDistribution::power(2.0).unwrap(),
            MarginalDistribution::power(3.5).unwrap(),
            MarginalDistribution::truncated_exponential(-1.0).unwrap(),
        ]
    }

    #[test]
    fn uniform_frontier() {
        let f = frontier_interval(&MarginalDistribution::uniform()).unwrap();
        assert!((f.lower - 2.0 / 3.0).abs() < 1e-8);
        assert!((f.upper - 0.75).abs() < 1e-8);
        assert!((f.monopoly - 0.5).abs() < 1e-10);
        assert!(f.strongly_regular && f.warning.is_none());
        assert!(!f.contains(0.5));
    }

    #[test]
    fn endpoints_solve_their_equations() {
        for d in strongly_regular_builtins() {
            let f = frontier_interval(&d).unwrap();
            assert!((d.w_function(f.lower) - (1.0 - d.cdf(f.lower))).abs() < 1e-8, "{}", d.name());
            assert!(d.w_function(f.upper).abs() < 1e-8, "{}", d.name());
            assert!(f.lower <= f.upper && f.lower > f.monopoly);
        }
    }

    #[test]
    fn interval_matches_dense_sign_scan() {
        // oracle: scan a fine grid for the set where 0 ≤ W ≤ 1 − F
        for d in strongly_regular_builtins() {
            let f = frontier_interval(&d).unwrap();
            let n = 20_000;
            let inside: Vec<f64> = (1..n)
                .map(|i| i as f64 / n as f64)
                .filter(|&t| {
                    let w = d.w_function(t);
                    w >= 0.0 && w <= 1.0 - d.cdf(t)
                })
                .collect();
            let (lo, hi) = (inside[0], inside[inside.len() - 1]);
            assert!((lo - f.lower).abs() <= 1.0 / n as f64, "{}: {lo} vs {}", d.name(), f.lower);
            assert!((hi - f.upper).abs() <= 1.0 / n as f64, "{}: {hi} vs {}", d.name(), f.upper);
            assert_eq!(inside.len(), inside.iter().filter(|&&t| f.contains(t)).count());
        }
    }

    #[test]
    fn non_strongly_regular_is_flagged() {
        let d = MarginalDistribution::truncated_exponential(1.0).unwrap();
        let f = frontier_interval(&d).unwrap();
        assert!(!f.strongly_regular && f.warning.is_some());
        assert!(matches!(supra_pricing_check(&d), Err(Error::NotStronglyRegular { .. })));
    }

    #[test]
    fn excise_examples() {
        let d = MarginalDistribution::uniform();
        let t = excise_for_threshold(&d, 2.0 / 3.0);
        assert!((t.per_unit - 1.0 / 3.0).abs() < 1e-15 && (t.lump_sum - 1.0 / 9.0).abs() < 1e-15);
        let t = excise_for_threshold(&d, 0.5);
        assert!(t.per_unit.abs() < 1e-15 && t.lump_sum.abs() < 1e-15);
        let t = excise_for_threshold(&d, 0.75);
        assert!((t.per_unit - 0.5).abs() < 1e-15 && (t.lump_sum - 0.125).abs() < 1e-15);
        // oracle: E[σ(q)] by quadrature vanishes under the binding budget
        let m = MarketMechanism::from_excise(d.clone(), t).unwrap();
        assert!(m.expected_tax().abs() < 1e-10);
        let bound = budget_bind(&MarketMechanism::from_excise(d.clone(), ExciseTax::new(0.0, 1.0 / 3.0)).unwrap());
        assert!((bound.as_excise().unwrap().lump_sum - 1.0 / 9.0).abs() < 1e-10);
        for dd in strongly_regular_builtins() {
            for &k in &[0.6, 0.7, 0.8, 0.95] {
                let rule = best_response_excise(&dd, &excise_for_threshold(&dd, k)).unwrap();
                assert!((rule.as_threshold().unwrap() - k).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sweep_examples() {
        let d = MarginalDistribution::uniform();
        let rows = frontier_sweep(&d, 11, &[0.5]).unwrap();
        assert_eq!(rows.len(), 12);
        let first = &rows[0];
        assert!((first.mean_rent - 1.0 / 6.0).abs() < 1e-10);
        assert!((first.lowest_type_rent - 1.0 / 9.0).abs() < 1e-9);
        assert!((first.consumer_price - 0.5 - 1.0 / 6.0).abs() < 1e-8);
        let reference = &rows[11];
        assert!(!reference.frontier && rows[..11].iter().all(|r| r.frontier));
        assert!((reference.mean_rent - 0.125).abs() < 1e-10 && reference.lowest_type_rent.abs() < 1e-12);
        let frontier = &rows[..11];
        let argmax = frontier.iter().enumerate().max_by(|a, b| a.1.lowest_type_rent.total_cmp(&b.1.lowest_type_rent)).unwrap().0;
        assert_eq!(argmax, 10);
        for w in frontier.windows(2) {
            assert!(w[1].mean_rent <= w[0].mean_rent + 1e-12);
            assert!(w[1].lowest_type_rent >= w[0].lowest_type_rent - 1e-12);
        }
        assert!(frontier_sweep(&d, 1, &[]).is_err());
    }

    #[test]
    fn lowest_type_rent_slope_is_w() {
        let h = 1e-5;
        for d in strongly_regular_builtins() {
            let f = frontier_interval(&d).unwrap();
            for i in 0..=10 {
                let k = f.lower + (f.upper - f.lower) * i as f64 / 10.0;
                let fd = (lowest_type_rent(&d, k + h) - lowest_type_rent(&d, k - h)) / (2.0 * h);
                assert!((fd - d.w_function(k)).abs() < 1e-4, "{} at {k}", d.name());
            }
        }
    }

    #[test]
    fn mean_rent_matches_rent_quadrature() {
        let d = MarginalDistribution::power(2.0).unwrap();
        for &k in &[0.6, 0.8] {
            let r = rent_function(&d, k);
            let oracle = numeric::integrate(&|t| r.eval(t) * d.pdf(t), 0.0, 1.0, 1e-12);
            assert!((mean_rent(&d, k) - oracle).abs() < 1e-8);
        }
    }

    #[test]
    fn supra_pricing_examples() {
        let r = supra_pricing_check(&MarginalDistribution::uniform()).unwrap();
        assert!(r.holds && r.monopoly_excluded);
        assert!((r.margin - 1.0 / 6.0).abs() < 1e-8);
        let p = MarginalDistribution::power(2.0).unwrap();
        let r = supra_pricing_check(&p).unwrap();
        let f = frontier_interval(&p).unwrap();
        assert!(r.holds && (r.margin - (f.lower - p.monopoly_threshold().unwrap())).abs() < 1e-15);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = frontier_sweep(&MarginalDistribution::uniform(), 3, &[0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,tau,C,mean_rent,lowest_type_rent,consumer_price,gini,frontier\n"));
        let back = read_sweep_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            assert_eq!(a.k, b.k);
            assert_eq!(a.frontier, b.frontier);
            assert!(a.gini == b.gini || (a.gini.is_nan() && b.gini.is_nan()));
        }
    }
}
