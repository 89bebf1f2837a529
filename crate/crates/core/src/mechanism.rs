//! Firm best responses to tax policies, taxes that implement a given
//! monotone allocation, firm revenue, budget normalization and
//! information rents.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::{parse_field, MarginalDistribution, ScalarFn};
use crate::numeric::{self, Pchip, QUAD_TOL};

/// Grid used to confirm that an allocation is a best response.
pub const BEST_RESPONSE_GRID: usize = 512;

/// Largest sup-distance accepted between a rule and the firm's best response.
pub const BEST_RESPONSE_TOL: f64 = 1e-4;

const SCHEDULE_NODES: usize = 1024;

/// A nondecreasing allocation `q: [0, 1] → [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AllocationRule {
    /// Right-continuous step function: `values[j]` on `[breakpoints[j-1], breakpoints[j])`.
    Step { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Continuous piecewise-linear rule through `(θ, q)` knots spanning `[0, 1]`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl AllocationRule {
    /// `1{θ ≥ k}`.
    pub fn threshold(k: f64) -> Self {
        AllocationRule::Step { breakpoints: vec![k.clamp(0.0, 1.0)], values: vec![0.0, 1.0] }
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::step(vec![], vec![level])
    }

    pub fn step(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::Invalid("a step rule needs one more value than breakpoints".into()));
        }
        if breakpoints.iter().any(|b| !(0.0..=1.0).contains(b)) || breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("breakpoints must be sorted within [0, 1]".into()));
        }
        check_levels(&values)?;
        Ok(AllocationRule::Step { breakpoints, values })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Invalid("a piecewise-linear rule needs at least two knots".into()));
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 || knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Invalid("knots must be strictly increasing in θ from 0 to 1".into()));
        }
        check_levels(&knots.iter().map(|k| k.1).collect::<Vec<_>>())?;
        Ok(AllocationRule::PiecewiseLinear { knots })
    }

    /// The identity allocation `q(θ) = θ`.
    pub fn identity() -> Self {
        AllocationRule::PiecewiseLinear { knots: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            AllocationRule::Step { breakpoints, values } => values[breakpoints.partition_point(|&b| b <= theta)],
            AllocationRule::PiecewiseLinear { knots } => {
                let (xs, ys): (Vec<f64>, Vec<f64>) = knots.iter().copied().unzip();
                numeric::interp_linear(&xs, &ys, theta)
            }
        }
    }

    /// `∫_0^θ q(s) ds`, exact.
    pub fn integral_to(&self, theta: f64) -> f64 {
        let theta = theta.clamp(0.0, 1.0);
        match self {
            AllocationRule::Step { breakpoints, values } => {
                let mut acc = 0.0;
                let mut start = 0.0;
                for (j, &v) in values.iter().enumerate() {
                    let end = breakpoints.get(j).copied().unwrap_or(1.0).min(theta);
                    if end > start {
                        acc += v * (end - start);
                    }
                    start = start.max(end);
                    if start >= theta {
                        break;
                    }
                }
                acc
            }
            AllocationRule::PiecewiseLinear { knots } => {
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if theta <= a.0 {
                        break;
                    }
                    let end = theta.min(b.0);
                    let q_end = a.1 + (b.1 - a.1) * (end - a.0) / (b.0 - a.0);
                    acc += 0.5 * (a.1 + q_end) * (end - a.0);
                }
                acc
            }
        }
    }

    /// Generalized inverse `inf{θ : q(θ) ≥ s}`, with the convention `1` when
    /// the level is never reached.
    pub fn inverse(&self, s: f64) -> f64 {
        match self {
            AllocationRule::Step { breakpoints, values } => {
                if s <= values[0] {
                    return 0.0;
                }
                match values.iter().position(|&v| v >= s) {
                    Some(j) => breakpoints[j - 1],
                    None => 1.0,
                }
            }
            AllocationRule::PiecewiseLinear { knots } => {
                if s <= knots[0].1 {
                    return 0.0;
                }
                match knots.iter().position(|k| k.1 >= s) {
                    Some(i) => {
                        let (a, b) = (knots[i - 1], knots[i]);
                        a.0 + (s - a.1) / (b.1 - a.1) * (b.0 - a.0)
                    }
                    None => 1.0,
                }
            }
        }
    }

    /// Points where the rule jumps or changes slope.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            AllocationRule::Step { breakpoints, .. } => breakpoints.clone(),
            AllocationRule::PiecewiseLinear { knots } => knots.iter().map(|k| k.0).collect(),
        }
    }

    /// Quantity levels held on a set of types with positive length.
    fn flat_levels(&self) -> Vec<f64> {
        match self {
            AllocationRule::Step { values, .. } => values.clone(),
            AllocationRule::PiecewiseLinear { knots } => {
                knots.windows(2).filter(|w| w[0].1 == w[1].1).map(|w| w[0].1).collect()
            }
        }
    }

    /// `Some(k)` when the rule is (almost everywhere) `1{θ ≥ k}`.
    pub fn as_threshold(&self) -> Option<f64> {
        match self {
            AllocationRule::Step { breakpoints, values } => {
                let mut k = None;
                let mut prev = values[0];
                if prev != 0.0 && prev != 1.0 {
                    return None;
                }
                if prev == 1.0 {
                    k = Some(0.0);
                }
                for (j, &v) in values.iter().enumerate().skip(1) {
                    if v != 0.0 && v != 1.0 {
                        return None;
                    }
                    if v != prev {
                        k = Some(breakpoints[j - 1]);
                    }
                    prev = v;
                }
                Some(k.unwrap_or(1.0))
            }
            AllocationRule::PiecewiseLinear { .. } => None,
        }
    }

    /// Largest `|q(θ) − other(θ)|` over cell midpoints of a `grid`-point lattice.
    pub fn sup_distance(&self, other: &AllocationRule, grid: usize) -> f64 {
        (0..grid)
            .map(|j| (j as f64 + 0.5) / grid as f64)
            .map(|t| (self.eval(t) - other.eval(t)).abs())
            .fold(0.0, f64::max)
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if let Some(v) = levels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Invalid(format!("allocation level {v} outside [0, 1]")));
    }
    if let Some(w) = levels.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::NotMonotone(format!("level drops from {} to {}", w[0], w[1])));
    }
    Ok(())
}

/// Affine tax `σ(q) = C − τ q`: a lump sum `C` paid to every consumer and a
/// per-unit tax `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExciseTax {
    pub lump_sum: f64,
    pub per_unit: f64,
}

impl ExciseTax {
    pub fn new(lump_sum: f64, per_unit: f64) -> Self {
        ExciseTax { lump_sum, per_unit }
    }

    /// Price the firm posts when consumers with `θ ≥ k` buy.
    pub fn firm_posted_price(&self, k: f64) -> f64 {
        k - self.per_unit
    }

    /// Price the consumer faces, tax included.
    pub fn consumer_price(&self, k: f64) -> f64 {
        self.firm_posted_price(k) + self.per_unit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    MonotoneCubic,
    Linear,
    /// Cubic Hermite segments with one-sided slopes supplied at each end.
    Hermite,
}

/// Tabulated tax schedule `q ↦ σ(q)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxSchedule {
    quantities: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    cubic: Option<Pchip>,
    slopes: Option<Vec<(f64, f64)>>,
}

impl TaxSchedule {
    pub fn new(points: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("a tax schedule needs at least two points".into()));
        }
        let (quantities, values): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if quantities[0] != 0.0 || quantities[quantities.len() - 1] != 1.0 {
            return Err(Error::Invalid("a tax schedule must be defined at q = 0 and q = 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonIntegrable("tax schedule has non-finite values".into()));
        }
        let cubic = match interpolation {
            Interpolation::MonotoneCubic => Some(
                Pchip::new(quantities.clone(), values.clone())
                    .ok_or_else(|| Error::Invalid("schedule quantities must be strictly increasing".into()))?,
            ),
            Interpolation::Hermite => {
                return Err(Error::Invalid("Hermite schedules need slopes; use TaxSchedule::hermite".into()))
            }
            Interpolation::Linear => {
                if quantities.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Invalid("schedule quantities must be strictly increasing".into()));
                }
                None
            }
        };
        Ok(TaxSchedule { quantities, values, interpolation, cubic, slopes: None })
    }

    /// Hermite schedule; `slopes[i]` holds the right slope at `q_i` and the
    /// left slope at `q_{i+1}`.
    pub fn hermite(points: Vec<(f64, f64)>, slopes: Vec<(f64, f64)>) -> Result<Self> {
        let mut s = Self::new(points, Interpolation::Linear)?;
        if slopes.len() + 1 != s.quantities.len() || slopes.iter().any(|d| !d.0.is_finite() || !d.1.is_finite()) {
            return Err(Error::Invalid("a Hermite schedule needs finite slopes for every segment".into()));
        }
        s.interpolation = Interpolation::Hermite;
        s.slopes = Some(slopes);
        Ok(s)
    }

    pub fn eval(&self, q: f64) -> f64 {
        if let Some(slopes) = &self.slopes {
            let xs = &self.quantities;
            let q = q.clamp(xs[0], xs[xs.len() - 1]);
            let i = xs.partition_point(|&x| x <= q).clamp(1, xs.len() - 1) - 1;
            let h = xs[i + 1] - xs[i];
            let t = (q - xs[i]) / h;
            let (d0, d1) = slopes[i];
            let (t2, t3) = (t * t, t * t * t);
            return (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
                + (t3 - 2.0 * t2 + t) * h * d0
                + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
                + (t3 - t2) * h * d1;
        }
        match &self.cubic {
            Some(p) => p.eval(q),
            None => numeric::interp_linear(&self.quantities, &self.values, q),
        }
    }

    pub fn slopes(&self) -> Option<&[(f64, f64)]> {
        self.slopes.as_deref()
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.quantities.iter().copied().zip(self.values.iter().copied()).collect()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Reads CSV with header `q,sigma`; interpolation is monotone cubic.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "q" || &headers[1] != "sigma" {
            return Err(Error::Parse("expected header `q,sigma`".into()));
        }
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record?;
            points.push((parse_field(&record[0])?, parse_field(&record[1])?));
        }
        Self::new(points, Interpolation::MonotoneCubic)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["q", "sigma"])?;
        for (q, s) in self.quantities.iter().zip(&self.values) {
            w.write_record([format!("{q}"), format!("{s}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A separable tax/subsidy schedule for one market.
#[derive(Debug, Clone, PartialEq)]
pub enum TaxPolicy {
    Excise(ExciseTax),
    Schedule(TaxSchedule),
}

impl TaxPolicy {
    pub fn none() -> Self {
        TaxPolicy::Excise(ExciseTax::new(0.0, 0.0))
    }

    pub fn eval(&self, q: f64) -> f64 {
        match self {
            TaxPolicy::Excise(t) => t.lump_sum - t.per_unit * q,
            TaxPolicy::Schedule(s) => s.eval(q),
        }
    }

    /// The same schedule plus a constant.
    pub fn shifted(&self, c: f64) -> Self {
        match self {
            TaxPolicy::Excise(t) => TaxPolicy::Excise(ExciseTax::new(t.lump_sum + c, t.per_unit)),
            TaxPolicy::Schedule(s) => {
                let mut s = s.clone();
                s.values.iter_mut().for_each(|v| *v += c);
                if s.cubic.is_some() && s.slopes.is_none() {
                    s.cubic = Pchip::new(s.quantities.clone(), s.values.clone());
                }
                TaxPolicy::Schedule(s)
            }
        }
    }

    pub fn as_excise(&self) -> Option<ExciseTax> {
        match self {
            TaxPolicy::Excise(t) => Some(*t),
            TaxPolicy::Schedule(_) => None,
        }
    }
}

/// Threshold best response to an excise tax: sell to `θ ≥ ψ⁻¹(τ)`.
pub fn best_response_excise(d: &MarginalDistribution, tax: &ExciseTax) -> Result<AllocationRule> {
    Ok(AllocationRule::threshold(d.virtual_value_inverse(tax.per_unit)?))
}

/// Quantity maximizing the firm's pointwise objective `ψ(θ) Q + σ(Q)` for type `θ`.
pub fn best_response_quantity(d: &MarginalDistribution, tax: &TaxPolicy, theta: f64) -> f64 {
    let psi = d.virtual_value(theta);
    match tax {
        TaxPolicy::Excise(t) => {
            if psi >= t.per_unit {
                1.0
            } else {
                0.0
            }
        }
        TaxPolicy::Schedule(s) => {
            if !psi.is_finite() {
                return if psi > 0.0 { 1.0 } else { 0.0 };
            }
            let objective = |q: f64| psi * q + s.eval(q);
            let nodes = &s.quantities;
            let (best, _) = nodes
                .iter()
                .enumerate()
                .map(|(i, &q)| (i, objective(q)))
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            if s.interpolation == Interpolation::Linear {
                return nodes[best];
            }
            let lo = nodes[best.saturating_sub(1)];
            let hi = nodes[(best + 1).min(nodes.len() - 1)];
            golden_max(objective, lo, hi, nodes[best])
        }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, seed: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    if f(seed) > f(x) {
        seed
    } else {
        x
    }
}

/// Sup-distance between `q` and the firm's best response to `tax`, over
/// the midpoints of a `grid`-point lattice.
pub fn best_response_check(d: &MarginalDistribution, tax: &TaxPolicy, q: &AllocationRule, grid: usize) -> f64 {
    (0..grid)
        .map(|j| (j as f64 + 0.5) / grid as f64)
        .map(|t| (best_response_quantity(d, tax, t) - q.eval(t)).abs())
        .fold(0.0, f64::max)
}

/// Tax schedule under which the firm optimally chooses `q`:
/// `σ(Q) = −∫_0^Q ψ(q⁻¹(s)) ds`, anchored at `σ(0) = 0`.
///
/// Threshold rules return an excise tax. Flat stretches of `q` are handled
/// through the generalized inverse, which puts a kink in `σ` at each held
/// level.
pub fn tax_for_allocation(d: &MarginalDistribution, q: &AllocationRule) -> Result<TaxPolicy> {
    d.require_myerson_regular()?;
    let q0 = q.eval(0.0);
    let marginal_tax = |s: f64| {
        // a single point carries no mass, so take the right limit at q(0) = 0
        let s = if s <= q0 && q0 == 0.0 { f64::MIN_POSITIVE } else { s };
        -d.virtual_value(q.inverse(s))
    };
    if let Some(k) = q.as_threshold() {
        let tau = d.virtual_value(k);
        if !tau.is_finite() {
            return Err(Error::NonIntegrable(format!("serving every type of {} needs an unbounded subsidy", d.name())));
        }
        return Ok(TaxPolicy::Excise(ExciseTax::new(0.0, tau)));
    }
    let mut nodes: Vec<f64> = (0..=SCHEDULE_NODES).map(|i| i as f64 / SCHEDULE_NODES as f64).collect();
    nodes.extend(q.flat_levels());
    nodes.push(q.eval(0.0));
    nodes.push(q.eval(1.0));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if q0 > 0.0 && !d.virtual_value(0.0).is_finite() {
        return Err(Error::NonIntegrable(format!("serving type 0 of {} needs an unbounded subsidy", d.name())));
    }
    if q0 == 0.0 && !d.virtual_value(0.0).is_finite() {
        // ψ is unbounded at 0. Equal mass on successive decades below the
        // first node means σ grows like log and has no finite value at 0.
        let h = nodes[1];
        let decade_mass = |lo: f64, hi: f64| {
            let (a, b) = (lo.ln(), hi.ln());
            let n = 64;
            (0..=n)
                .map(|i| {
                    let u = a + (b - a) * i as f64 / n as f64;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * marginal_tax(u.exp()) * u.exp()
                })
                .sum::<f64>()
                * (b - a)
                / n as f64
        };
        let inner = decade_mass(h * 1e-12, h * 1e-9);
        let outer = decade_mass(h * 1e-9, h * 1e-6);
        if !inner.is_finite() || (inner.abs() > 1e-9 && inner.abs() >= 0.5 * outer.abs()) {
            return Err(Error::NonIntegrable(format!(
                "the tax for this allocation diverges at q = 0 under {}",
                d.name()
            )));
        }
    }
    let tol = QUAD_TOL / nodes.len() as f64;
    let mut sigma = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    sigma.push(0.0);
    for w in nodes.windows(2) {
        acc += numeric::integrate(&marginal_tax, w[0], w[1], tol);
        if !acc.is_finite() {
            return Err(Error::NonIntegrable(format!("tax schedule diverges near q = {}", w[1])));
        }
        sigma.push(acc);
    }
    let points = nodes.iter().copied().zip(sigma).collect();
    let schedule = match q {
        AllocationRule::Step { .. } => TaxSchedule::new(points, Interpolation::Linear)?,
        AllocationRule::PiecewiseLinear { .. } => {
            let slopes = nodes
                .windows(2)
                .map(|w| {
                    let inset = 1e-9 * (w[1] - w[0]);
                    (marginal_tax(w[0] + inset), marginal_tax(w[1] - inset))
                })
                .collect();
            TaxSchedule::hermite(points, slopes)?
        }
    };
    Ok(TaxPolicy::Schedule(schedule))
}

fn quad_breaks(q: &AllocationRule) -> Vec<f64> {
    q.breakpoints()
}

/// Firm revenue `∫ q ψ f dθ + ∫ (σ(q(θ)) − σ(0)) f dθ`.
pub fn revenue(d: &MarginalDistribution, q: &AllocationRule, tax: &TaxPolicy) -> f64 {
    let sigma0 = tax.eval(0.0);
    let integrand = |t: f64| {
        let qt = q.eval(t);
        // q ψ f written as q (θ f − (1 − F)) stays finite where f vanishes.
        let myerson = if qt == 0.0 { 0.0 } else { qt * (t * d.pdf(t) - (1.0 - d.cdf(t))) };
        myerson + (tax.eval(qt) - sigma0) * d.pdf(t)
    };
    numeric::integrate_pieces(&integrand, 0.0, 1.0, &quad_breaks(q), QUAD_TOL * 1e-2)
}

/// Expected tax outlay `E_F[σ(q(θ))]` (negative values are government revenue).
pub fn expected_tax(d: &MarginalDistribution, q: &AllocationRule, tax: &TaxPolicy) -> f64 {
    let integrand = |t: f64| tax.eval(q.eval(t)) * d.pdf(t);
    numeric::integrate_pieces(&integrand, 0.0, 1.0, &quad_breaks(q), QUAD_TOL * 1e-2)
}

/// Allocation, tax and marginal of one market.
#[derive(Debug, Clone)]
pub struct MarketMechanism {
    pub allocation: AllocationRule,
    pub tax: TaxPolicy,
    pub marginal: MarginalDistribution,
}

impl MarketMechanism {
    /// Errors unless `allocation` is a best response to `tax` under `marginal`.
    pub fn new(allocation: AllocationRule, tax: TaxPolicy, marginal: MarginalDistribution) -> Result<Self> {
        let gap = best_response_check(&marginal, &tax, &allocation, BEST_RESPONSE_GRID);
        if gap > BEST_RESPONSE_TOL {
            return Err(Error::Invalid(format!("allocation is not a best response to the tax (sup gap {gap:.3e})")));
        }
        Ok(MarketMechanism { allocation, tax, marginal })
    }

    /// Firm best response to an excise tax.
    pub fn from_excise(marginal: MarginalDistribution, tax: ExciseTax) -> Result<Self> {
        let allocation = best_response_excise(&marginal, &tax)?;
        Ok(MarketMechanism { allocation, tax: TaxPolicy::Excise(tax), marginal })
    }

    pub fn expected_tax(&self) -> f64 {
        expected_tax(&self.marginal, &self.allocation, &self.tax)
    }

    pub fn revenue(&self) -> f64 {
        revenue(&self.marginal, &self.allocation, &self.tax)
    }
}

/// Per-market policies after redistributing expected tax outlays.
#[derive(Debug, Clone)]
pub struct BudgetNormalization {
    pub policies: Vec<TaxPolicy>,
    /// `E[σ_i(q_i)]` before normalization.
    pub expected_before: Vec<f64>,
    /// `E[σ'_i(q_i)]` after normalization.
    pub expected_after: Vec<f64>,
    pub total: f64,
    /// Whether the joint budget is balanced (`total ≤ 0` up to `1e-9`).
    pub feasible: bool,
}

/// Shifts `σ_i` by `−E[σ_i(q_i)]` for all markets but the last, which
/// absorbs the sum, so that the total tax at every type profile is unchanged.
pub fn budget_normalize(mechanisms: &[MarketMechanism]) -> BudgetNormalization {
    let expected_before: Vec<f64> = mechanisms.iter().map(MarketMechanism::expected_tax).collect();
    let n = mechanisms.len();
    let moved: f64 = expected_before.iter().take(n.saturating_sub(1)).sum();
    let policies: Vec<TaxPolicy> = mechanisms
        .iter()
        .zip(&expected_before)
        .enumerate()
        .map(|(i, (m, e))| if i + 1 < n { m.tax.shifted(-e) } else { m.tax.shifted(moved) })
        .collect();
    let expected_after = mechanisms
        .iter()
        .zip(&policies)
        .map(|(m, p)| expected_tax(&m.marginal, &m.allocation, p))
        .collect();
    let total: f64 = expected_before.iter().sum();
    BudgetNormalization { policies, expected_before, expected_after, total, feasible: total <= 1e-9 }
}

/// Shifts a single market's policy so its budget binds: `E[σ'(q)] = 0`.
pub fn budget_bind(mechanism: &MarketMechanism) -> TaxPolicy {
    mechanism.tax.shifted(-mechanism.expected_tax())
}

/// Information rent of a type under a budget-balanced mechanism.
#[derive(Clone)]
pub enum RentFunction {
    /// `max(θ − k, 0) + lump`.
    Threshold { k: f64, lump: f64 },
    /// `∫_0^θ q(s) ds + lump`.
    General { rule: AllocationRule, lump: f64 },
    Custom(ScalarFn),
}

impl std::fmt::Debug for RentFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RentFunction::Threshold { k, lump } => f.debug_struct("Threshold").field("k", k).field("lump", lump).finish(),
            RentFunction::General { rule, lump } => f.debug_struct("General").field("rule", rule).field("lump", lump).finish(),
            RentFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl RentFunction {
    pub fn constant(c: f64) -> Self {
        RentFunction::Custom(std::sync::Arc::new(move |_| c))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            RentFunction::Threshold { k, lump } => (theta - k).max(0.0) + lump,
            RentFunction::General { rule, lump } => rule.integral_to(theta) + lump,
            RentFunction::Custom(f) => f(theta),
        }
    }

    /// Rent of the lowest type, the lump sum paid to non-buyers.
    pub fn lowest_type_rent(&self) -> f64 {
        match self {
            RentFunction::Threshold { lump, .. } | RentFunction::General { lump, .. } => *lump,
            RentFunction::Custom(f) => f(0.0),
        }
    }
}

/// Rents of the threshold mechanism `1{θ ≥ k}` financed by a binding
/// excise tax: `I(θ) = max(θ − k, 0) + (1 − F(k)) ψ(k)`.
pub fn rent_function(d: &MarginalDistribution, k: f64) -> RentFunction {
    let k = k.clamp(0.0, 1.0);
    RentFunction::Threshold { k, lump: -d.w_antiderivative_tail(k) }
}

/// Rents of an arbitrary monotone rule with binding budget:
/// `I(θ) = ∫_0^θ q − ∫_0^1 W q`, the second integral by quadrature.
pub fn rent_function_general(d: &MarginalDistribution, q: &AllocationRule) -> Result<RentFunction> {
    if q.eval(0.0) > 0.0 && !d.w_function(0.0).is_finite() {
        return Err(Error::NonIntegrable(format!(
            "{} has vanishing density at 0, so serving the lowest types costs an unbounded subsidy",
            d.name()
        )));
    }
    let integrand = |s: f64| {
        let qs = q.eval(s);
        if qs == 0.0 {
            0.0
        } else {
            d.w_function(s) * qs
        }
    };
    let spend = numeric::integrate_pieces(&integrand, 0.0, 1.0, &q.breakpoints(), 1e-11);
    if !spend.is_finite() {
        return Err(Error::NonIntegrable("∫ W q diverges".into()));
    }
    Ok(RentFunction::General { rule: q.clone(), lump: -spend })
}

/// `∫ (1 − F − W) q dθ`, the mean rent under a binding budget.
pub fn mean_rent(d: &MarginalDistribution, q: &AllocationRule) -> f64 {
    let integrand = |t: f64| {
        let qt = q.eval(t);
        if qt == 0.0 {
            0.0
        } else {
            (1.0 - d.cdf(t) - d.w_function(t)) * qt
        }
    };
    numeric::integrate_pieces(&integrand, 0.0, 1.0, &q.breakpoints(), 1e-11)
}

/// JSON record of a mechanism: marginal spec, allocation and tax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismRecord {
    pub marginal: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub knots: Option<Vec<(f64, f64)>>,
    pub tax: TaxRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaxRecord {
    Excise { lump_sum: f64, per_unit: f64 },
    Schedule {
        points: Vec<(f64, f64)>,
        interpolation: Interpolation,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        slopes: Option<Vec<(f64, f64)>>,
    },
}

impl MechanismRecord {
    pub fn from_mechanism(m: &MarketMechanism) -> Self {
        let mut rec = MechanismRecord {
            marginal: m.marginal.name().to_string(),
            threshold: None,
            breakpoints: None,
            values: None,
            knots: None,
            tax: match &m.tax {
                TaxPolicy::Excise(t) => TaxRecord::Excise { lump_sum: t.lump_sum, per_unit: t.per_unit },
                TaxPolicy::Schedule(s) => TaxRecord::Schedule {
                    points: s.points(),
                    interpolation: s.interpolation,
                    slopes: s.slopes.clone(),
                },
            },
        };
        match (&m.allocation, m.allocation.as_threshold()) {
            (_, Some(k)) => rec.threshold = Some(k),
            (AllocationRule::Step { breakpoints, values }, None) => {
                rec.breakpoints = Some(breakpoints.clone());
                rec.values = Some(values.clone());
            }
            (AllocationRule::PiecewiseLinear { knots }, None) => rec.knots = Some(knots.clone()),
        }
        rec
    }

    pub fn to_mechanism(&self) -> Result<MarketMechanism> {
        let marginal = MarginalDistribution::from_spec(&self.marginal)?;
        let allocation = match (&self.threshold, &self.breakpoints, &self.values, &self.knots) {
            (Some(k), None, None, None) => AllocationRule::threshold(*k),
            (None, Some(b), Some(v), None) => AllocationRule::step(b.clone(), v.clone())?,
            (None, None, None, Some(k)) => AllocationRule::piecewise_linear(k.clone())?,
            _ => return Err(Error::Parse("mechanism needs exactly one of threshold, breakpoints+values, knots".into())),
        };
        let tax = match &self.tax {
            TaxRecord::Excise { lump_sum, per_unit } => TaxPolicy::Excise(ExciseTax::new(*lump_sum, *per_unit)),
            TaxRecord::Schedule { points, interpolation, slopes } => TaxPolicy::Schedule(match (interpolation, slopes) {
                (Interpolation::Hermite, Some(sl)) => TaxSchedule::hermite(points.clone(), sl.clone())?,
                _ => TaxSchedule::new(points.clone(), *interpolation)?,
            }),
        };
        Ok(MarketMechanism { allocation, tax, marginal })
    }
}
