//! Joint valuation distributions with fixed marginals, and the
//! supermodular (concordance) order between them.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marginals::{parse_field, MarginalDistribution};
use crate::numeric::{bvn_cdf, norm_cdf, norm_quantile};

/// Default lattice resolution for pointwise joint-CDF comparisons.
pub const DEFAULT_ORDER_GRID: usize = 256;

/// Tolerance on negative gaps that still count as dominance.
pub const ORDER_TOL: f64 = 1e-9;

const MARGINAL_TOL: f64 = 1e-6;
const GRID_MASS_TOL: f64 = 1e-9;
const BATTERY_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingKind {
    Independent,
    Comonotone,
    Countermonotone,
    GaussianCopula { rho: f64 },
    GridCopula,
}

/// Cell masses of a grid copula over the uniform `θ`-lattice of `[0, 1]²`.
/// Mass is spread uniformly inside each cell.
#[derive(Debug, Clone, PartialEq)]
struct GridMasses {
    m: usize,
    /// Row-major: `masses[i * m + j]` is the cell `[i/m, (i+1)/m) × [j/m, (j+1)/m)`.
    masses: Vec<f64>,
    /// `prefix[a * (m + 1) + b]` = mass of cells with `i < a`, `j < b`.
    prefix: Vec<f64>,
}

impl GridMasses {
    fn new(m: usize, masses: Vec<f64>) -> Self {
        let mut prefix = vec![0.0; (m + 1) * (m + 1)];
        for a in 1..=m {
            let mut row = 0.0;
            for b in 1..=m {
                row += masses[(a - 1) * m + (b - 1)];
                prefix[a * (m + 1) + b] = prefix[(a - 1) * (m + 1) + b] + row;
            }
        }
        GridMasses { m, masses, prefix }
    }

    fn cdf(&self, x: f64, y: f64) -> f64 {
        let m = self.m as f64;
        let (sx, sy) = (x.clamp(0.0, 1.0) * m, y.clamp(0.0, 1.0) * m);
        let (ix, iy) = ((sx.floor() as usize).min(self.m - 1), (sy.floor() as usize).min(self.m - 1));
        let (fx, fy) = (sx - ix as f64, sy - iy as f64);
        let p = |a: usize, b: usize| self.prefix[a * (self.m + 1) + b];
        let s00 = p(ix, iy);
        let s10 = p(ix + 1, iy);
        let s01 = p(ix, iy + 1);
        let s11 = p(ix + 1, iy + 1);
        s00 * (1.0 - fx) * (1.0 - fy) + s10 * fx * (1.0 - fy) + s01 * (1.0 - fx) * fy + s11 * fx * fy
    }
}

/// A joint distribution on `[0, 1]^n` with prescribed marginals.
#[derive(Debug, Clone)]
pub struct Coupling {
    marginals: Vec<MarginalDistribution>,
    kind: CouplingKind,
    grid: Option<GridMasses>,
}

/// Result of a pointwise order test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub dominates: bool,
    /// Smallest signed gap over the tested points.
    pub margin: f64,
    /// Point at which the test fails, when it fails.
    pub witness: Option<Vec<f64>>,
    /// Largest signed gap, used to tell strict from weak dominance.
    pub max_gap: f64,
}

impl OrderVerdict {
    pub(crate) fn from_gaps(gaps: impl Iterator<Item = (f64, Vec<f64>)>) -> Self {
        let mut margin = f64::INFINITY;
        let mut max_gap = f64::NEG_INFINITY;
        let mut worst = None;
        for (gap, at) in gaps {
            if gap < margin {
                margin = gap;
                worst = Some(at);
            }
            max_gap = max_gap.max(gap);
        }
        if !margin.is_finite() {
            margin = 0.0;
            max_gap = 0.0;
        }
        let dominates = margin >= -ORDER_TOL;
        OrderVerdict { dominates, margin, witness: if dominates { None } else { worst }, max_gap }
    }

    /// Weak dominance with a gap above `1e-6` somewhere.
    pub fn strictly(&self) -> bool {
        self.dominates && self.max_gap > 1e-6
    }
}

/// Discrete image of a coupling: atoms carried by a lattice in quantile
/// space (parametric kinds) or by sub-cells of the grid (grid copulas).
#[derive(Debug, Clone)]
pub enum Lattice {
    /// Independent: every combination of per-axis atoms, mass = product.
    Product { axes: Vec<Vec<f64>>, weights: Vec<Vec<f64>> },
    /// Monotone/antitone: atom `i` sits at `(axes[0][i], axes[1][i], …)`.
    Diagonal { axes: Vec<Vec<f64>>, masses: Vec<f64> },
    /// Bivariate with explicit cell masses, `masses[i * y.len() + j]`.
    Matrix { x: Vec<f64>, y: Vec<f64>, masses: Vec<f64> },
}

impl Lattice {
    pub fn len(&self) -> usize {
        match self {
            Lattice::Product { axes, .. } => axes.iter().map(Vec::len).product(),
            Lattice::Diagonal { masses, .. } => masses.len(),
            Lattice::Matrix { masses, .. } => masses.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Expected value of coordinate `axis`.
    pub fn mean(&self, axis: usize) -> f64 {
        match self {
            Lattice::Product { axes, weights } => axes[axis].iter().zip(&weights[axis]).map(|(x, w)| x * w).sum(),
            Lattice::Diagonal { axes, masses } => axes[axis].iter().zip(masses).map(|(x, w)| x * w).sum(),
            Lattice::Matrix { x, y, masses } => {
                let ny = y.len();
                masses
                    .iter()
                    .enumerate()
                    .map(|(c, w)| w * if axis == 0 { x[c / ny] } else { y[c % ny] })
                    .sum()
            }
        }
    }
}

fn midpoints(m: usize) -> Vec<f64> {
    (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect()
}

impl Coupling {
    pub fn independent(marginals: Vec<MarginalDistribution>) -> Result<Self> {
        Self::parametric(marginals, CouplingKind::Independent)
    }

    /// Upper Fréchet–Hoeffding bound: all coordinates move together.
    pub fn comonotone(marginals: Vec<MarginalDistribution>) -> Result<Self> {
        Self::parametric(marginals, CouplingKind::Comonotone)
    }

    /// Lower Fréchet–Hoeffding bound (bivariate only).
    pub fn countermonotone(x: MarginalDistribution, y: MarginalDistribution) -> Self {
        Coupling { marginals: vec![x, y], kind: CouplingKind::Countermonotone, grid: None }
    }

    pub fn gaussian(x: MarginalDistribution, y: MarginalDistribution, rho: f64) -> Result<Self> {
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::Invalid(format!("gaussian copula correlation must lie in (-1, 1), got {rho}")));
        }
        Ok(Coupling { marginals: vec![x, y], kind: CouplingKind::GaussianCopula { rho }, grid: None })
    }

    /// Grid copula from an `m × m` matrix of cell masses over the uniform
    /// `θ`-lattice; rows index the first coordinate.
    pub fn grid(x: MarginalDistribution, y: MarginalDistribution, masses: Vec<Vec<f64>>) -> Result<Self> {
        let m = masses.len();
        if m == 0 || masses.iter().any(|r| r.len() != m) {
            return Err(Error::Invalid("grid copula needs a non-empty square matrix".into()));
        }
        let flat: Vec<f64> = masses.into_iter().flatten().collect();
        if flat.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invalid("grid copula masses must be finite and nonnegative".into()));
        }
        let total: f64 = flat.iter().sum();
        if (total - 1.0).abs() > GRID_MASS_TOL {
            return Err(Error::Invalid(format!("grid copula total mass is {total}, expected 1")));
        }
        let edge = |d: &MarginalDistribution, i: usize| d.cdf((i + 1) as f64 / m as f64) - d.cdf(i as f64 / m as f64);
        for i in 0..m {
            let row: f64 = flat[i * m..(i + 1) * m].iter().sum();
            let col: f64 = (0..m).map(|j| flat[j * m + i]).sum();
            let (want_row, want_col) = (edge(&x, i), edge(&y, i));
            if (row - want_row).abs() > GRID_MASS_TOL || (col - want_col).abs() > GRID_MASS_TOL {
                return Err(Error::MarginalMismatch {
                    gap: (row - want_row).abs().max((col - want_col).abs()),
                    at: (i as f64 + 0.5) / m as f64,
                });
            }
        }
        Ok(Coupling { marginals: vec![x, y], kind: CouplingKind::GridCopula, grid: Some(GridMasses::new(m, flat)) })
    }

    /// Reads a grid copula matrix: `m` rows of `m` comma-separated masses.
    pub fn grid_from_csv_reader<R: Read>(reader: R, x: MarginalDistribution, y: MarginalDistribution) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            rows.push(record.iter().map(parse_field).collect::<Result<Vec<f64>>>()?);
        }
        Self::grid(x, y, rows)
    }

    pub fn grid_from_csv_path(path: impl AsRef<Path>, x: MarginalDistribution, y: MarginalDistribution) -> Result<Self> {
        Self::grid_from_csv_reader(std::fs::File::open(path)?, x, y)
    }

    /// Parses the coupling mini-grammar: `independent`, `monotone`,
    /// `antitone`, `gaussian:<ρ>` or `grid:<path>`.
    pub fn from_spec(spec: &str, marginals: Vec<MarginalDistribution>) -> Result<Self> {
        let spec = spec.trim();
        let pair = |ms: &Vec<MarginalDistribution>| -> Result<(MarginalDistribution, MarginalDistribution)> {
            if ms.len() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, got: ms.len() });
            }
            Ok((ms[0].clone(), ms[1].clone()))
        };
        match spec.split_once(':') {
            None if spec == "independent" => Self::independent(marginals),
            None if spec == "monotone" || spec == "comonotone" => Self::comonotone(marginals),
            None if spec == "antitone" || spec == "countermonotone" => {
                let (x, y) = pair(&marginals)?;
                Ok(Self::countermonotone(x, y))
            }
            Some(("gaussian", rho)) => {
                let (x, y) = pair(&marginals)?;
                Self::gaussian(x, y, parse_field(rho)?)
            }
            Some(("grid", path)) => {
                let (x, y) = pair(&marginals)?;
                Self::grid_from_csv_path(path, x, y)
            }
            _ => Err(Error::Parse(format!("unknown coupling spec `{spec}`"))),
        }
    }

    fn parametric(marginals: Vec<MarginalDistribution>, kind: CouplingKind) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Invalid("a coupling needs at least one marginal".into()));
        }
        Ok(Coupling { marginals, kind, grid: None })
    }

    /// Grid copula whose cell masses are the rectangle probabilities of
    /// this (bivariate) coupling on the uniform `m × m` lattice.
    pub fn discretize(&self, m: usize) -> Result<Coupling> {
        self.require_bivariate()?;
        let edges: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let mut cdf = vec![0.0; (m + 1) * (m + 1)];
        for a in 0..=m {
            for b in 0..=m {
                cdf[a * (m + 1) + b] = self.joint_cdf(&[edges[a], edges[b]])?;
            }
        }
        let at = |a: usize, b: usize| cdf[a * (m + 1) + b];
        let rows = (0..m)
            .map(|i| (0..m).map(|j| (at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j)).max(0.0)).collect())
            .collect();
        Coupling::grid(self.marginals[0].clone(), self.marginals[1].clone(), rows)
    }

    pub fn dimension(&self) -> usize {
        self.marginals.len()
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn marginals(&self) -> &[MarginalDistribution] {
        &self.marginals
    }

    /// Short label in the coupling mini-grammar.
    pub fn label(&self) -> String {
        match self.kind {
            CouplingKind::Independent => "independent".into(),
            CouplingKind::Comonotone => "monotone".into(),
            CouplingKind::Countermonotone => "antitone".into(),
            CouplingKind::GaussianCopula { rho } => format!("gaussian:{rho}"),
            CouplingKind::GridCopula => format!("grid:{}", self.grid.as_ref().map_or(0, |g| g.m)),
        }
    }

    fn require_bivariate(&self) -> Result<()> {
        if self.dimension() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.dimension() });
        }
        Ok(())
    }

    /// Joint CDF `P(θ ≤ x)` componentwise.
    pub fn joint_cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        let u: Vec<f64> = self.marginals.iter().zip(x).map(|(d, &xi)| d.cdf(xi.clamp(0.0, 1.0))).collect();
        Ok(match self.kind {
            CouplingKind::Independent => u.iter().product(),
            CouplingKind::Comonotone => u.iter().copied().fold(1.0, f64::min),
            CouplingKind::Countermonotone => (u[0] + u[1] - 1.0).max(0.0),
            CouplingKind::GaussianCopula { rho } => gaussian_copula(u[0], u[1], rho),
            CouplingKind::GridCopula => {
                let g = self.grid.as_ref().expect("grid copula carries masses");
                g.cdf(x[0], x[1])
            }
        })
    }

    /// Atoms of the coupling on an `m`-point-per-axis lattice.
    ///
    /// Parametric kinds place atoms at quantile images of the midpoint
    /// lattice `(i + ½)/m`; grid copulas subdivide each cell so that at least
    /// `m` atoms lie along each axis.
    pub fn lattice(&self, m: usize) -> Result<Lattice> {
        if m == 0 {
            return Err(Error::Invalid("lattice size must be positive".into()));
        }
        let u = midpoints(m);
        let image = |d: &MarginalDistribution, us: &[f64]| us.iter().map(|&v| d.quantile(v)).collect::<Vec<f64>>();
        Ok(match self.kind {
            CouplingKind::Independent => Lattice::Product {
                axes: self.marginals.iter().map(|d| image(d, &u)).collect(),
                weights: vec![vec![1.0 / m as f64; m]; self.dimension()],
            },
            CouplingKind::Comonotone => Lattice::Diagonal {
                axes: self.marginals.iter().map(|d| image(d, &u)).collect(),
                masses: vec![1.0 / m as f64; m],
            },
            CouplingKind::Countermonotone => {
                let flipped: Vec<f64> = u.iter().rev().copied().collect();
                Lattice::Diagonal {
                    axes: vec![image(&self.marginals[0], &u), image(&self.marginals[1], &flipped)],
                    masses: vec![1.0 / m as f64; m],
                }
            }
            CouplingKind::GaussianCopula { rho } => Lattice::Matrix {
                x: image(&self.marginals[0], &u),
                y: image(&self.marginals[1], &u),
                masses: gaussian_cell_masses(m, rho),
            },
            CouplingKind::GridCopula => {
                let g = self.grid.as_ref().expect("grid copula carries masses");
                let sub = m.div_ceil(g.m);
                let n = g.m * sub;
                let axis = midpoints(n);
                let mut masses = vec![0.0; n * n];
                let share = 1.0 / (sub * sub) as f64;
                for i in 0..n {
                    for j in 0..n {
                        masses[i * n + j] = g.masses[(i / sub) * g.m + j / sub] * share;
                    }
                }
                Lattice::Matrix { x: axis.clone(), y: axis, masses }
            }
        })
    }

    /// Draws `count` points; deterministic in `seed`.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dimension();
        let mut out = Vec::with_capacity(count);
        let cumulative: Option<Vec<f64>> = self.grid.as_ref().map(|g| {
            let mut acc = 0.0;
            g.masses.iter().map(|w| {
                acc += w;
                acc
            })
            .collect()
        });
        for _ in 0..count {
            let u: Vec<f64> = match self.kind {
                CouplingKind::Independent => (0..n).map(|_| rng.random::<f64>()).collect(),
                CouplingKind::Comonotone => vec![rng.random::<f64>(); n],
                CouplingKind::Countermonotone => {
                    let v = rng.random::<f64>();
                    vec![v, 1.0 - v]
                }
                CouplingKind::GaussianCopula { rho } => {
                    let z1: f64 = rng.sample(StandardNormal);
                    let e: f64 = rng.sample(StandardNormal);
                    let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * e;
                    vec![norm_cdf(z1), norm_cdf(z2)]
                }
                CouplingKind::GridCopula => {
                    let g = self.grid.as_ref().expect("grid copula carries masses");
                    let cum = cumulative.as_ref().expect("cumulative masses");
                    let total = cum[cum.len() - 1];
                    let r = rng.random::<f64>() * total;
                    let cell = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
                    let (i, j) = (cell / g.m, cell % g.m);
                    let x = (i as f64 + rng.random::<f64>()) / g.m as f64;
                    let y = (j as f64 + rng.random::<f64>()) / g.m as f64;
                    out.push(vec![x, y]);
                    continue;
                }
            };
            out.push(self.marginals.iter().zip(&u).map(|(d, &v)| d.quantile(v)).collect());
        }
        out
    }
}

fn gaussian_copula(u: f64, v: f64, rho: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v.min(1.0);
    }
    if v >= 1.0 {
        return u;
    }
    bvn_cdf(norm_quantile(u), norm_quantile(v), rho)
}

/// Rectangle probabilities of the Gaussian copula on the uniform `m × m`
/// lattice of `[0, 1]²`, with rows and columns rebalanced to exactly `1/m`.
fn gaussian_cell_masses(m: usize, rho: f64) -> Vec<f64> {
    let z: Vec<f64> = (0..=m).map(|a| norm_quantile(a as f64 / m as f64)).collect();
    let mut c = vec![0.0; (m + 1) * (m + 1)];
    for a in 0..=m {
        for b in 0..=m {
            c[a * (m + 1) + b] = if a == 0 || b == 0 {
                0.0
            } else if a == m {
                b as f64 / m as f64
            } else if b == m {
                a as f64 / m as f64
            } else {
                bvn_cdf(z[a], z[b], rho)
            };
        }
    }
    let at = |a: usize, b: usize| c[a * (m + 1) + b];
    let mut masses: Vec<f64> = (0..m * m)
        .map(|cell| {
            let (i, j) = (cell / m, cell % m);
            (at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j)).max(0.0)
        })
        .collect();
    let target = 1.0 / m as f64;
    for _ in 0..4 {
        for i in 0..m {
            let s: f64 = masses[i * m..(i + 1) * m].iter().sum();
            if s > 0.0 {
                masses[i * m..(i + 1) * m].iter_mut().for_each(|w| *w *= target / s);
            }
        }
        for j in 0..m {
            let s: f64 = (0..m).map(|i| masses[i * m + j]).sum();
            if s > 0.0 {
                (0..m).for_each(|i| masses[i * m + j] *= target / s);
            }
        }
    }
    masses
}

fn check_same_marginals(f: &Coupling, g: &Coupling, grid: usize) -> Result<()> {
    for (i, (a, b)) in f.marginals.iter().zip(&g.marginals).enumerate() {
        for k in 0..=grid {
            let x = k as f64 / grid as f64;
            let mut pf = vec![1.0; f.dimension()];
            pf[i] = x;
            let fa = f.joint_cdf(&pf)?;
            let gb = g.joint_cdf(&pf)?;
            let gap = (fa - gb).abs().max((a.cdf(x) - b.cdf(x)).abs());
            if gap > MARGINAL_TOL {
                return Err(Error::MarginalMismatch { gap, at: x });
            }
        }
    }
    Ok(())
}

/// Tests `F ≥_SM G` through pointwise joint-CDF dominance on a
/// `grid_size × grid_size` lattice (bivariate only).
pub fn supermodular_compare(f: &Coupling, g: &Coupling, grid_size: usize) -> Result<OrderVerdict> {
    if f.dimension() != g.dimension() {
        return Err(Error::DimensionMismatch { expected: f.dimension(), got: g.dimension() });
    }
    if f.dimension() != 2 {
        return Err(Error::Unsupported(format!(
            "supermodular comparison is only exact for two goods, got {}",
            f.dimension()
        )));
    }
    let n = grid_size.max(1);
    check_same_marginals(f, g, n)?;
    let mut gaps = Vec::with_capacity(n * n);
    for a in 1..=n {
        for b in 1..=n {
            let p = [a as f64 / n as f64, b as f64 / n as f64];
            gaps.push((f.joint_cdf(&p)? - g.joint_cdf(&p)?, p.to_vec()));
        }
    }
    Ok(OrderVerdict::from_gaps(gaps.into_iter()))
}

/// One entry of the supermodular test battery.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryResult {
    pub function: String,
    /// `∫ h dF − ∫ h dG`.
    pub gap: f64,
}

/// Integrates a battery of supermodular test functions against both
/// couplings and reports `∫h dF − ∫h dG` for each.
///
/// The battery is `xy`, `min(x, y)`, `exp(x + y)` and `count` indicators
/// `1{x ≥ a, y ≥ b}` at seeded random corners. Gaps are computed through the
/// mixed-derivative identity `∫h dF − ∫h dG = ∫∫ (F − G) ∂²h/∂x∂y`, evaluated
/// by midpoint quadrature on a 256² grid.
pub fn supermodular_test_battery(f: &Coupling, g: &Coupling, seed: u64, count: usize) -> Result<Vec<BatteryResult>> {
    f.require_bivariate()?;
    g.require_bivariate()?;
    check_same_marginals(f, g, BATTERY_GRID)?;
    let n = BATTERY_GRID;
    let mid = midpoints(n);
    let cell = 1.0 / (n * n) as f64;
    let mut diff = vec![0.0; n * n];
    for (i, &x) in mid.iter().enumerate() {
        for (j, &y) in mid.iter().enumerate() {
            diff[i * n + j] = f.joint_cdf(&[x, y])? - g.joint_cdf(&[x, y])?;
        }
    }
    let mut xy = 0.0;
    let mut exp_sum = 0.0;
    for (i, &x) in mid.iter().enumerate() {
        for (j, &y) in mid.iter().enumerate() {
            let d = diff[i * n + j];
            xy += d * cell;
            exp_sum += d * (x + y).exp() * cell;
        }
    }
    let mut min_gap = 0.0;
    for &t in &mid {
        min_gap += (f.joint_cdf(&[t, t])? - g.joint_cdf(&[t, t])?) / n as f64;
    }
    let mut out = vec![
        BatteryResult { function: "xy".into(), gap: xy },
        BatteryResult { function: "min".into(), gap: min_gap },
        BatteryResult { function: "exp_sum".into(), gap: exp_sum },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let gap = f.joint_cdf(&[a, b])? - g.joint_cdf(&[a, b])?;
        out.push(BatteryResult { function: format!("upper_orthant({a:.6},{b:.6})"), gap });
    }
    Ok(out)
}

/// Largest Kolmogorov–Smirnov distance between the empirical marginals of
/// `samples` and the coupling's marginals.
pub fn marginal_ks_distance(c: &Coupling, samples: &[Vec<f64>]) -> f64 {
    let n = samples.len() as f64;
    (0..c.dimension())
        .map(|axis| {
            let mut xs: Vec<f64> = samples.iter().map(|s| s[axis]).collect();
            xs.sort_by(f64::total_cmp);
            xs.iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = c.marginals[axis].cdf(x);
                    (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
