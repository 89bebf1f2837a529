//! One-dimensional valuation distributions on `[0, 1]` and the screening
//! quantities derived from them: virtual values, the monopolist's marginal
//! response `W`, regularity checks and the monopoly threshold.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{self, Pchip, ROOT_TOL};

/// A scalar function shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default step for the centered finite-difference density derivative.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default grid used for regularity checks.
pub const DEFAULT_REGULARITY_GRID: usize = 1024;

const VALIDATION_GRID: usize = 257;

#[derive(Clone)]
enum Family {
    Uniform,
    Power { alpha: f64 },
    TruncatedExponential { lambda: f64 },
    Tabulated { cdf: Pchip },
    Custom {
        cdf: ScalarFn,
        pdf: ScalarFn,
        quantile: Option<ScalarFn>,
        pdf_derivative: Option<ScalarFn>,
    },
}

/// A fully supported distribution of valuations on `[0, 1]`.
///
/// The density must be positive on `(0, 1]`; a zero at `θ = 0` is accepted
/// so that power distributions with `α > 1` are representable.
#[derive(Clone)]
pub struct MarginalDistribution {
    family: Family,
    name: String,
    fd_step: f64,
    myerson: Arc<OnceLock<Option<f64>>>,
}

impl fmt::Debug for MarginalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarginalDistribution").field("name", &self.name).finish()
    }
}

impl PartialEq for MarginalDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// Outcome of the grid-based regularity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub myerson_regular: bool,
    pub strongly_regular: bool,
    /// First grid point violating the failed property, if any.
    pub witness: Option<f64>,
    pub grid_size: usize,
}

impl MarginalDistribution {
    pub fn uniform() -> Self {
        Self::from_family(Family::Uniform, "uniform".into())
    }

    /// `F(θ) = θ^α`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Invalid(format!("power exponent must be positive, got {alpha}")));
        }
        Ok(Self::from_family(Family::Power { alpha }, format!("power:{alpha}")))
    }

    /// Density proportional to `e^{-λθ}` on `[0, 1]`.
    pub fn truncated_exponential(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda != 0.0) {
            return Err(Error::Invalid(format!("exponential rate must be finite and nonzero, got {lambda}")));
        }
        Ok(Self::from_family(Family::TruncatedExponential { lambda }, format!("texp:{lambda}")))
    }

    /// Monotone cubic interpolation of tabulated `(θ, F(θ))` pairs.
    ///
    /// Both columns must be strictly increasing, starting at `(0, 0)` and
    /// ending at `(1, 1)`.
    pub fn tabulated(points: &[(f64, f64)], name: impl Into<String>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Invalid("a tabulated cdf needs at least three points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::Invalid(format!(
                    "tabulated cdf must be strictly increasing in both columns near theta = {}",
                    w[1].0
                )));
            }
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if first.0.abs() > 1e-12 || first.1.abs() > 1e-12 || (last.0 - 1.0).abs() > 1e-12 || (last.1 - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid("tabulated cdf must run from (0, 0) to (1, 1)".into()));
        }
        let xs = points.iter().map(|p| p.0).collect();
        let ys = points.iter().map(|p| p.1).collect();
        let cdf = Pchip::new(xs, ys).ok_or_else(|| Error::Invalid("bad tabulation".into()))?;
        let d = Self::from_family(Family::Tabulated { cdf }, name.into());
        d.validate()?;
        Ok(d)
    }

    /// Reads a tabulated cdf from CSV with header `theta,cdf`.
    pub fn from_csv_reader<R: Read>(reader: R, name: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "theta" || &headers[1] != "cdf" {
            return Err(Error::Parse(format!("expected header `theta,cdf`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let theta: f64 = parse_field(&record[0])?;
            let cdf: f64 = parse_field(&record[1])?;
            points.push((theta, cdf));
        }
        Self::tabulated(&points, name)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, format!("table:{}", path.display()))
    }

    /// A user-supplied distribution. Missing quantiles are computed by
    /// bisection on the cdf and a missing density derivative by finite
    /// differences.
    pub fn custom(
        name: impl Into<String>,
        cdf: ScalarFn,
        pdf: ScalarFn,
        quantile: Option<ScalarFn>,
        pdf_derivative: Option<ScalarFn>,
    ) -> Result<Self> {
        let d = Self::from_family(Family::Custom { cdf, pdf, quantile, pdf_derivative }, name.into());
        d.validate()?;
        Ok(d)
    }

    /// Parses the marginal mini-grammar: `uniform`, `power:<α>`,
    /// `texp:<λ>` or `table:<path>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        match (head, arg) {
            ("uniform", None) => Ok(Self::uniform()),
            ("power", Some(a)) => Self::power(parse_field(a)?),
            ("texp", Some(a)) => Self::truncated_exponential(parse_field(a)?),
            ("table", Some(path)) => Self::from_csv_path(path),
            _ => Err(Error::Parse(format!("unknown marginal spec `{spec}`"))),
        }
    }

    fn from_family(family: Family, name: String) -> Self {
        MarginalDistribution { family, name, fd_step: DEFAULT_FD_STEP, myerson: Arc::new(OnceLock::new()) }
    }

    /// Overrides the finite-difference step used when no closed-form density
    /// derivative exists.
    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    fn validate(&self) -> Result<()> {
        if (self.cdf(0.0)).abs() > 1e-9 || (self.cdf(1.0) - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("{}: cdf must satisfy F(0) = 0 and F(1) = 1", self.name)));
        }
        let mut prev = 0.0;
        for i in 0..=VALIDATION_GRID {
            let theta = i as f64 / VALIDATION_GRID as f64;
            let f = self.cdf(theta);
            if f < prev - 1e-12 {
                return Err(Error::Invalid(format!("{}: cdf decreases at theta = {theta}", self.name)));
            }
            prev = f;
            let density = self.pdf(theta);
            if !(density > 0.0) && theta > 0.0 {
                return Err(Error::Invalid(format!("{}: density is not positive at theta = {theta}", self.name)));
            }
            let back = self.quantile(f);
            if (back - theta).abs() > 1e-8 {
                return Err(Error::Invalid(format!("{}: quantile(cdf({theta})) = {back}", self.name)));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, 1.0);
        match &self.family {
            Family::Uniform => t,
            Family::Power { alpha } => t.powf(*alpha),
            Family::TruncatedExponential { lambda } => (-lambda * t).exp_m1() / (-lambda).exp_m1(),
            Family::Tabulated { cdf } => cdf.eval(t).clamp(0.0, 1.0),
            Family::Custom { cdf, .. } => cdf(t),
        }
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, 1.0);
        match &self.family {
            Family::Uniform => 1.0,
            Family::Power { alpha } => alpha * t.powf(alpha - 1.0),
            Family::TruncatedExponential { lambda } => -lambda * (-lambda * t).exp() / (-lambda).exp_m1(),
            Family::Tabulated { cdf } => cdf.eval_all(t).1,
            Family::Custom { pdf, .. } => pdf(t),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match &self.family {
            Family::Uniform => u,
            Family::Power { alpha } => u.powf(1.0 / alpha),
            Family::TruncatedExponential { lambda } => -(u * (-lambda).exp_m1()).ln_1p() / lambda,
            Family::Custom { quantile: Some(q), .. } => q(u),
            _ => {
                if u <= 0.0 {
                    return 0.0;
                }
                if u >= 1.0 {
                    return 1.0;
                }
                numeric::bisect(|t| self.cdf(t) - u, 0.0, 1.0, 1e-14)
            }
        }
    }

    /// Whether the density derivative has a closed form.
    pub fn has_closed_form_derivative(&self) -> bool {
        !matches!(&self.family, Family::Custom { pdf_derivative: None, .. })
    }

    /// Density derivative: closed form where available, otherwise a centered
    /// finite difference (one-sided within one step of the boundary).
    pub fn pdf_derivative(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, 1.0);
        match &self.family {
            Family::Uniform => 0.0,
            Family::Power { alpha } => {
                if *alpha == 1.0 {
                    0.0
                } else {
                    alpha * (alpha - 1.0) * t.powf(alpha - 2.0)
                }
            }
            Family::TruncatedExponential { lambda } => -lambda * self.pdf(t),
            Family::Tabulated { cdf } => cdf.eval_all(t).2,
            Family::Custom { pdf_derivative: Some(d), .. } => d(t),
            Family::Custom { pdf, .. } => {
                let h = self.fd_step;
                if t - h < 0.0 {
                    (-3.0 * pdf(t) + 4.0 * pdf(t + h) - pdf(t + 2.0 * h)) / (2.0 * h)
                } else if t + h > 1.0 {
                    (3.0 * pdf(t) - 4.0 * pdf(t - h) + pdf(t - 2.0 * h)) / (2.0 * h)
                } else {
                    (pdf(t + h) - pdf(t - h)) / (2.0 * h)
                }
            }
        }
    }

    /// Inverse hazard rate `(1 - F(θ)) / f(θ)`.
    pub fn inverse_hazard(&self, theta: f64) -> f64 {
        let survival = 1.0 - self.cdf(theta);
        if survival <= 0.0 {
            return 0.0;
        }
        survival / self.pdf(theta)
    }

    /// Myersonian virtual value `ψ(θ) = θ - (1 - F(θ)) / f(θ)`.
    pub fn virtual_value(&self, theta: f64) -> f64 {
        theta - self.inverse_hazard(theta)
    }

    /// `ψ'(θ) = 2 + (1 - F) f' / f²`.
    pub fn virtual_value_derivative(&self, theta: f64) -> f64 {
        let survival = 1.0 - self.cdf(theta);
        let f = self.pdf(theta);
        if survival <= 0.0 {
            return 2.0;
        }
        2.0 + survival * self.pdf_derivative(theta) / (f * f)
    }

    /// The monopolist's marginal response to government spending,
    /// `W(θ) = (1 - F(θ)) ψ'(θ) - f(θ) ψ(θ)`.
    pub fn w_function(&self, theta: f64) -> f64 {
        let survival = 1.0 - self.cdf(theta);
        let f = self.pdf(theta);
        if survival <= 0.0 {
            return -theta * f;
        }
        if f <= 0.0 {
            return f64::INFINITY;
        }
        // Expanded form avoids the cancellation in f ψ when f is small.
        3.0 * survival + survival * survival * self.pdf_derivative(theta) / (f * f) - theta * f
    }

    /// `∫_k^1 W(s) ds`, in closed form `-(1 - F(k)) ψ(k)`.
    pub fn w_antiderivative_tail(&self, k: f64) -> f64 {
        let k = k.clamp(0.0, 1.0);
        let survival = 1.0 - self.cdf(k);
        if survival <= 0.0 {
            return 0.0;
        }
        let f = self.pdf(k);
        if f <= 0.0 {
            return f64::INFINITY;
        }
        survival * survival / f - survival * k
    }

    /// `∫_k^1 W(s) ds` by adaptive quadrature (cross-check of the closed form).
    pub fn w_tail_by_quadrature(&self, k: f64, tol: f64) -> f64 {
        numeric::integrate(&|s| self.w_function(s), k.clamp(0.0, 1.0), 1.0, tol)
    }

    /// Grid check of Myerson regularity (ψ nondecreasing) and strong
    /// regularity (f nondecreasing and log-concave) on cell midpoints.
    pub fn regularity(&self, grid_size: usize) -> RegularityReport {
        let m = grid_size.max(16);
        let grid: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect();
        let psi: Vec<f64> = grid.iter().map(|&t| self.virtual_value(t)).collect();
        let dens: Vec<f64> = grid.iter().map(|&t| self.pdf(t)).collect();

        let myerson_witness = first_descent(&grid, &psi);
        let increasing_witness = first_descent(&grid, &dens);
        let concave_witness = (1..m - 1).find_map(|j| {
            let (a, b, c) = (dens[j - 1].ln(), dens[j].ln(), dens[j + 1].ln());
            let tol = 1e-9 * (1.0 + b.abs());
            (b < 0.5 * (a + c) - tol).then_some(grid[j])
        });
        let myerson_regular = myerson_witness.is_none();
        let strongly_regular = myerson_regular && increasing_witness.is_none() && concave_witness.is_none();
        let witness = myerson_witness.or(increasing_witness).or(concave_witness);
        RegularityReport { myerson_regular, strongly_regular, witness, grid_size: m }
    }

    /// Errors with `NotRegular` unless ψ is nondecreasing on the default grid.
    pub fn require_myerson_regular(&self) -> Result<()> {
        let witness = *self.myerson.get_or_init(|| {
            let report = self.regularity(DEFAULT_REGULARITY_GRID);
            if report.myerson_regular {
                None
            } else {
                Some(report.witness.unwrap_or(f64::NAN))
            }
        });
        match witness {
            None => Ok(()),
            Some(w) => Err(Error::NotRegular { witness: w }),
        }
    }

    /// Lowest type `k` with `ψ(k) ≥ τ`: 0 when `ψ(0) ≥ τ`, 1 when `ψ(1) < τ`.
    pub fn virtual_value_inverse(&self, tau: f64) -> Result<f64> {
        self.require_myerson_regular()?;
        if self.virtual_value(0.0) >= tau {
            return Ok(0.0);
        }
        if self.virtual_value(1.0) < tau {
            return Ok(1.0);
        }
        Ok(numeric::bisect(|t| self.virtual_value(t) - tau, 0.0, 1.0, ROOT_TOL))
    }

    /// Threshold of the untaxed monopolist, the root of ψ.
    pub fn monopoly_threshold(&self) -> Result<f64> {
        self.virtual_value_inverse(0.0)
    }
}

fn first_descent(grid: &[f64], values: &[f64]) -> Option<f64> {
    values.windows(2).zip(grid.iter().skip(1)).find_map(|(w, &t)| {
        let tol = 1e-9 * (1.0 + w[0].abs().max(w[1].abs()));
        (w[1] < w[0] - tol).then_some(t)
    })
}

pub(crate) fn parse_field(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}
