//! Brute-force falsification harness on discretized instances.
//!
//! Types sit at cell midpoints `(j + ½)/m` with weights proportional to the
//! density there. Candidate allocations are every grid threshold plus
//! seeded random monotone step rules. Each SOSD verdict taken from the
//! `orders` module is recomputed here from raw atoms by direct summation.

use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::couplings::{supermodular_compare, Coupling, ORDER_TOL};
use crate::error::Result;
use crate::frontier::frontier_interval;
use crate::marginals::MarginalDistribution;
use crate::mechanism::{rent_function, rent_function_general, AllocationRule, RentFunction};
use crate::orders::{rent_distribution, sosd_compare, sosd_via_h, CumulativeRentCurve, RentDistribution, RentProfile};

/// Largest number of steps in a random candidate.
pub const MAX_RANDOM_STEPS: usize = 4;

/// Gap above which weak dominance counts as strict.
pub const STRICT_GAP: f64 = 1e-6;

/// One candidate allocation of a discrete instance with its rents at the grid types.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub label: String,
    pub rule: AllocationRule,
    /// Grid threshold `j/m` when the candidate is one.
    pub threshold: Option<f64>,
    pub rents: Vec<f64>,
}

/// A marginal discretized on `m` midpoint types with a family of candidate allocations.
#[derive(Debug, Clone)]
pub struct DiscreteInstance {
    pub marginal: MarginalDistribution,
    pub grid_size: usize,
    pub types: Vec<f64>,
    pub weights: Vec<f64>,
    pub candidates: Vec<Candidate>,
    /// Candidates dropped because their rents are not finite, with the reason.
    pub excluded: Vec<(String, String)>,
}

impl DiscreteInstance {
    /// All `m + 1` grid thresholds and `random_count` seeded random step rules.
    pub fn new(marginal: MarginalDistribution, grid_size: usize, random_count: usize, seed: u64) -> Result<Self> {
        let m = grid_size.max(2);
        let types: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
        let dens: Vec<f64> = types.iter().map(|&t| marginal.pdf(t)).collect();
        let total: f64 = dens.iter().sum();
        let weights = dens.iter().map(|d| d / total).collect();
        let mut inst =
            DiscreteInstance { marginal, grid_size: m, types, weights, candidates: Vec::new(), excluded: Vec::new() };
        for j in 0..=m {
            let k = j as f64 / m as f64;
            inst.push(format!("threshold:{j}/{m}"), AllocationRule::threshold(k), Some(k));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vanishing_density = inst.marginal.pdf(0.0) == 0.0;
        for i in 0..random_count {
            let steps = rng.random_range(1..=MAX_RANDOM_STEPS.min(m - 1));
            let mut cuts: Vec<usize> = sample(&mut rng, m - 1, steps).into_iter().map(|c| c + 1).collect();
            cuts.sort_unstable();
            let breakpoints: Vec<f64> = cuts.iter().map(|&c| c as f64 / m as f64).collect();
            let mut values: Vec<f64> = (0..=steps).map(|_| rng.random::<f64>()).collect();
            values.sort_by(f64::total_cmp);
            if vanishing_density || rng.random_bool(0.5) {
                values[0] = 0.0;
            }
            let rule = AllocationRule::step(breakpoints, values)?;
            inst.push(format!("random:{i}"), rule, None);
        }
        Ok(inst)
    }

    fn push(&mut self, label: String, rule: AllocationRule, threshold: Option<f64>) {
        match rent_function_general(&self.marginal, &rule) {
            Ok(r) => {
                let rents = self.types.iter().map(|&t| r.eval(t)).collect();
                self.candidates.push(Candidate { label, rule, threshold, rents });
            }
            Err(e) => self.excluded.push((label, e.to_string())),
        }
    }

    fn atoms(&self, c: &Candidate) -> Vec<(f64, f64)> {
        c.rents.iter().copied().zip(self.weights.iter().copied()).collect()
    }

    /// `H` at the cumulative type weights, via the `orders` module.
    fn curve(&self, c: &Candidate) -> Result<CumulativeRentCurve> {
        let dist = RentDistribution::from_atoms(self.atoms(c))?;
        let mut acc = 0.0;
        let mut percentiles = vec![0.0];
        for v in dist.weights() {
            acc += v;
            percentiles.push(acc.min(1.0));
        }
        *percentiles.last_mut().expect("nonempty") = 1.0;
        Ok(CumulativeRentCurve::from_distribution(&dist, percentiles))
    }

    fn find_threshold(&self, k: f64) -> Option<usize> {
        self.candidates.iter().position(|c| c.threshold.is_some_and(|t| (t - k).abs() < 1e-12))
    }
}

/// Integrated CDF `Σ w · max(t − x, 0)` by direct summation.
pub fn brute_integrated_cdf(atoms: &[(f64, f64)], t: f64) -> f64 {
    atoms.iter().map(|&(x, w)| w * (t - x).max(0.0)).sum()
}

/// Brute-force SOSD test of `a` over `b` at every atom of either.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteVerdict {
    pub dominates: bool,
    pub margin: f64,
    pub max_gap: f64,
}

impl BruteVerdict {
    pub fn strictly(&self) -> bool {
        self.dominates && self.max_gap > STRICT_GAP
    }
}

pub fn brute_sosd(a: &[(f64, f64)], b: &[(f64, f64)]) -> BruteVerdict {
    let (mut margin, mut max_gap) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(t, _) in a.iter().chain(b) {
        let gap = brute_integrated_cdf(b, t) - brute_integrated_cdf(a, t);
        margin = margin.min(gap);
        max_gap = max_gap.max(gap);
    }
    BruteVerdict { dominates: margin >= -ORDER_TOL, margin, max_gap }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domination {
    pub dominator: String,
    pub dominated: String,
    pub max_gap: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffFrontierThreshold {
    pub k: f64,
    /// A grid-frontier threshold that strictly dominates it, if any.
    pub dominated_by: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub marginal: String,
    pub grid_size: usize,
    pub random_count: usize,
    pub seed: u64,
    pub candidates: usize,
    pub excluded: Vec<(String, String)>,
    pub k_low: f64,
    pub k_high: f64,
    /// Grid thresholds nearest the analytic endpoints and everything between.
    pub grid_frontier: Vec<f64>,
    /// Distances from the analytic endpoints to their grid snaps.
    pub snap_distance: (f64, f64),
    pub grid_monopoly: f64,
    pub pairs_checked: usize,
    /// (a) strict dominations of grid-frontier thresholds.
    pub frontier_dominations: Vec<Domination>,
    pub frontier_undominated: bool,
    /// (b) off-frontier thresholds and whether a frontier threshold dominates each.
    pub off_frontier: Vec<OffFrontierThreshold>,
    pub off_frontier_all_dominated: bool,
    pub monopoly_dominated_by: Option<f64>,
    /// (c) non-threshold candidates that no other candidate strictly dominates.
    pub undominated_non_thresholds: Vec<String>,
    pub only_thresholds_undominated: bool,
    /// Pairs where the `orders` verdict and the brute-force verdict differ.
    pub verdict_disagreements: usize,
    /// Failing pairs, for dumping as atom lists.
    #[serde(skip)]
    pub failing_pairs: Vec<(Vec<(f64, f64)>, Vec<(f64, f64)>)>,
}

/// Compares every ordered pair of candidates in both directions.
pub fn dominance_scan(inst: &DiscreteInstance, random_count: usize, seed: u64) -> Result<DominanceReport> {
    let m = inst.grid_size as f64;
    let interval = frontier_interval(&inst.marginal)?;
    let (lo_idx, hi_idx) = ((interval.lower * m).round(), (interval.upper * m).round());
    let grid_frontier: Vec<f64> = (lo_idx as usize..=hi_idx as usize).map(|j| j as f64 / m).collect();
    let grid_monopoly = (interval.monopoly * m).round() / m;
    let curves = inst.candidates.iter().map(|c| inst.curve(c)).collect::<Result<Vec<_>>>()?;
    let atoms: Vec<Vec<(f64, f64)>> = inst.candidates.iter().map(|c| inst.atoms(c)).collect();
    let n = inst.candidates.len();
    let on_frontier = |c: &Candidate| c.threshold.is_some_and(|k| grid_frontier.iter().any(|g| (g - k).abs() < 1e-12));

    let mut strict = vec![vec![false; n]; n];
    let mut report_dom = Vec::new();
    let mut disagreements = 0;
    let mut failing_pairs = Vec::new();
    let mut pairs = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            pairs += 1;
            let v = sosd_via_h(&curves[i], &curves[j])?;
            let brute = brute_sosd(&atoms[i], &atoms[j]);
            if v.dominates != brute.dominates {
                disagreements += 1;
            }
            if !v.strictly() {
                continue;
            }
            strict[i][j] = true;
            let (ci, cj) = (&inst.candidates[i], &inst.candidates[j]);
            if on_frontier(cj) {
                report_dom.push(Domination {
                    dominator: ci.label.clone(),
                    dominated: cj.label.clone(),
                    max_gap: v.max_gap,
                    margin: v.margin,
                });
                failing_pairs.push((atoms[i].clone(), atoms[j].clone()));
            }
        }
    }

    let non_threshold: Vec<String> = (0..n)
        .filter(|&j| inst.candidates[j].rule.as_threshold().is_none() && !(0..n).any(|i| strict[i][j]))
        .map(|j| inst.candidates[j].label.clone())
        .collect();
    let frontier_idx: Vec<usize> = grid_frontier.iter().filter_map(|&k| inst.find_threshold(k)).collect();
    let dominated_by = |j: usize| {
        frontier_idx.iter().find(|&&i| i != j && strict[i][j]).and_then(|&i| inst.candidates[i].threshold)
    };
    let off_frontier: Vec<OffFrontierThreshold> = inst
        .candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.threshold.is_some() && !on_frontier(c))
        .map(|(j, c)| OffFrontierThreshold { k: c.threshold.expect("threshold"), dominated_by: dominated_by(j) })
        .collect();
    let monopoly_dominated_by = inst.find_threshold(grid_monopoly).and_then(dominated_by);

    Ok(DominanceReport {
        marginal: inst.marginal.name().to_string(),
        grid_size: inst.grid_size,
        random_count,
        seed,
        candidates: n,
        excluded: inst.excluded.clone(),
        k_low: interval.lower,
        k_high: interval.upper,
        snap_distance: ((interval.lower - lo_idx / m).abs(), (interval.upper - hi_idx / m).abs()),
        grid_frontier,
        grid_monopoly,
        pairs_checked: pairs,
        frontier_undominated: report_dom.is_empty(),
        frontier_dominations: report_dom,
        off_frontier_all_dominated: off_frontier.iter().all(|o| o.dominated_by.is_some()),
        off_frontier,
        monopoly_dominated_by,
        only_thresholds_undominated: non_threshold.is_empty(),
        undominated_non_thresholds: non_threshold,
        verdict_disagreements: disagreements,
        failing_pairs,
    })
}

/// Builds the instance and runs [`dominance_scan`].
pub fn run_dominance_scan(d: &MarginalDistribution, grid_size: usize, random_count: usize, seed: u64) -> Result<DominanceReport> {
    let inst = DiscreteInstance::new(d.clone(), grid_size, random_count, seed)?;
    dominance_scan(&inst, random_count, seed)
}

/// Grid thresholds not strictly dominated by any other grid threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalFrontier {
    pub grid_size: usize,
    pub lower: f64,
    pub upper: f64,
    pub lower_drift: f64,
    pub upper_drift: f64,
}

/// Threshold-only scans at each grid size, with the drift of the
/// undominated range from the analytic interval.
pub fn endpoint_drift(d: &MarginalDistribution, grids: &[usize]) -> Result<Vec<EmpiricalFrontier>> {
    let interval = frontier_interval(d)?;
    grids
        .iter()
        .map(|&m| {
            let inst = DiscreteInstance::new(d.clone(), m, 0, 0)?;
            let curves = inst.candidates.iter().map(|c| inst.curve(c)).collect::<Result<Vec<_>>>()?;
            let mut undominated = Vec::new();
            for (j, c) in inst.candidates.iter().enumerate() {
                let mut beaten = false;
                for (i, other) in curves.iter().enumerate() {
                    if i != j && sosd_via_h(other, &curves[j])?.strictly() {
                        beaten = true;
                        break;
                    }
                }
                if !beaten {
                    undominated.push(c.threshold.expect("threshold-only instance"));
                }
            }
            let lower = undominated.iter().copied().fold(f64::INFINITY, f64::min);
            let upper = undominated.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(EmpiricalFrontier {
                grid_size: inst.grid_size,
                lower,
                upper,
                lower_drift: lower - interval.lower,
                upper_drift: upper - interval.upper,
            })
        })
        .collect()
}

/// Per-pair outcome of an additivity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityCase {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub market_one: bool,
    pub market_two: bool,
    pub joint: bool,
    /// `None` when the per-market hypothesis fails, so nothing is implied.
    pub implied_holds: Option<bool>,
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub grid_size: usize,
    pub cases: Vec<AdditivityCase>,
    pub all_implied_hold: bool,
}

fn threshold_atoms(d: &MarginalDistribution, m: usize, k: f64) -> Vec<(f64, f64)> {
    let r = rent_function(d, k);
    let types: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
    let total: f64 = types.iter().map(|&t| d.pdf(t)).sum();
    types.iter().map(|&t| (r.eval(t), d.pdf(t) / total)).collect()
}

/// Atoms of `X + Y` for independent `X` and `Y`.
pub fn convolve(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&(x, p)| b.iter().map(move |&(y, q)| (x + y, p * q))).collect()
}

/// For each `((k_a, k_c), (k_b, k_d))` checks that `k_a ≻ k_b` in market one
/// and `k_c ≻ k_d` in market two imply `(k_a, k_c) ≻ (k_b, k_d)` jointly
/// under independence.
pub fn additivity_scan(
    d1: &MarginalDistribution,
    d2: &MarginalDistribution,
    pairs: &[((f64, f64), (f64, f64))],
    grid_size: usize,
) -> AdditivityReport {
    let cases: Vec<AdditivityCase> = pairs
        .iter()
        .map(|&((ka, kc), (kb, kd))| {
            let (a1, b1) = (threshold_atoms(d1, grid_size, ka), threshold_atoms(d1, grid_size, kb));
            let (a2, b2) = (threshold_atoms(d2, grid_size, kc), threshold_atoms(d2, grid_size, kd));
            let market_one = brute_sosd(&a1, &b1).dominates;
            let market_two = brute_sosd(&a2, &b2).dominates;
            let joint_v = brute_sosd(&convolve(&a1, &a2), &convolve(&b1, &b2));
            let back = brute_sosd(&convolve(&b1, &b2), &convolve(&a1, &a2));
            AdditivityCase {
                first: (ka, kc),
                second: (kb, kd),
                market_one,
                market_two,
                joint: joint_v.dominates,
                implied_holds: (market_one && market_two).then_some(joint_v.dominates),
                tie: joint_v.dominates && back.dominates,
            }
        })
        .collect();
    AdditivityReport { grid_size, all_implied_hold: cases.iter().all(|c| c.implied_holds != Some(false)), cases }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessPair {
    pub more_concordant: String,
    pub less_concordant: String,
    /// `more_concordant ≻_SM less_concordant` by the bivariate CDF test.
    pub supermodular: bool,
    /// Rents under `less_concordant` SOSD-dominate those under `more_concordant`.
    pub fairer: bool,
    /// The `orders` verdict for the same comparison.
    pub orders_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    pub thresholds: (f64, f64),
    pub grid_size: usize,
    pub pairs: Vec<FairnessPair>,
    /// Every supermodular-comparable pair is ordered in the fairness direction.
    pub order_implies_fairness: bool,
    /// Rents under the countermonotone member dominate every other member's,
    /// `None` when no countermonotone coupling is supplied.
    pub antitone_dominates_all: Option<bool>,
}

/// Checks that supermodular dominance of couplings reverses into SOSD
/// dominance of rents, over every ordered pair of `couplings`.
pub fn fairness_scan(couplings: &[Coupling], thresholds: (f64, f64), grid_size: usize) -> Result<FairnessReport> {
    use crate::couplings::CouplingKind;
    let mut dists = Vec::with_capacity(couplings.len());
    for c in couplings {
        let ms = c.marginals();
        let rents: Vec<RentFunction> = vec![rent_function(&ms[0], thresholds.0), rent_function(&ms[1], thresholds.1)];
        let dist = rent_distribution(&RentProfile::new(c.clone(), rents)?, grid_size)?;
        dists.push(dist);
    }
    let atoms: Vec<Vec<(f64, f64)>> =
        dists.iter().map(|d| d.values().iter().copied().zip(d.weights().iter().copied()).collect()).collect();
    let mut pairs = Vec::new();
    for i in 0..couplings.len() {
        for j in 0..couplings.len() {
            if i == j {
                continue;
            }
            let sm = supermodular_compare(&couplings[i], &couplings[j], grid_size)?;
            let fairer = brute_sosd(&atoms[j], &atoms[i]).dominates;
            pairs.push(FairnessPair {
                more_concordant: couplings[i].label(),
                less_concordant: couplings[j].label(),
                supermodular: sm.dominates,
                fairer,
                orders_agree: sosd_compare(&dists[j], &dists[i]).dominates == fairer,
            });
        }
    }
    let antitone = couplings.iter().position(|c| c.kind() == CouplingKind::Countermonotone);
    let antitone_dominates_all =
        antitone.map(|a| (0..couplings.len()).filter(|&j| j != a).all(|j| brute_sosd(&atoms[a], &atoms[j]).dominates));
    Ok(FairnessReport {
        thresholds,
        grid_size,
        order_implies_fairness: pairs.iter().all(|p| !p.supermodular || p.fairer),
        antitone_dominates_all,
        pairs,
    })
}

/// Writes two atom lists as CSV `side,value,weight`.
pub fn write_atom_pair_csv<W: Write>(writer: W, a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["side", "value", "weight"])?;
    for (side, atoms) in [("a", a), ("b", b)] {
        for (v, p) in atoms {
            w.write_record([side.to_string(), format!("{v}"), format!("{p}")])?;
        }
    }
    w.flush()?;
    Ok(())
}
