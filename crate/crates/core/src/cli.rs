//! Command-line front end. Each subcommand collects its outputs and writes
//! them once, at the end, to the output directory.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::couplings::{supermodular_compare, supermodular_test_battery, Coupling, DEFAULT_ORDER_GRID};
use crate::error::{Error, Result};
use crate::frontier::{frontier_interval, frontier_sweep, supra_pricing_check, write_sweep_csv};
use crate::io::{OutputSet, Table};
use crate::marginals::{MarginalDistribution, DEFAULT_REGULARITY_GRID};
use crate::mechanism::rent_function;
use crate::oracle::{endpoint_drift, run_dominance_scan, write_atom_pair_csv};
use crate::orders::{cumulative_rents, rent_distribution, sosd_compare, RentProfile, DEFAULT_PERCENTILE_GRID};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "FAIRTAX_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "fairtax", version, about = "Fairness–efficiency frontiers for commodity taxation under monopolistic screening")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,

    /// Tables as separate CSV files, or embedded in the JSON output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Virtual value, W, regularity and monopoly threshold of a marginal.
    Analyze(AnalyzeArgs),
    /// Frontier interval, optional sweep of excise taxes over it.
    Frontier(FrontierArgs),
    /// Supermodular comparison of two couplings of the same marginals.
    Couplings(CouplingsArgs),
    /// Brute-force dominance scan over grid thresholds and random rules.
    Oracle(OracleArgs),
    /// Recompute the uniform two-market example end to end.
    #[command(name = "reproduce-section5", visible_alias = "reproduce-uniform")]
    ReproduceUniform(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// `uniform`, `power:<a>`, `texp:<l>` or `table:<path>`.
    #[arg(long)]
    pub marginal: String,
    /// Points of the θ table.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long)]
    pub marginal: String,
    /// Number of frontier thresholds to tabulate.
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Extra off-frontier thresholds appended to the sweep.
    #[arg(long, value_delimiter = ',')]
    pub reference: Vec<f64>,
    /// Append the monopoly threshold as a reference row.
    #[arg(long)]
    pub with_monopoly: bool,
}

#[derive(Debug, Args)]
pub struct CouplingsArgs {
    /// Two coupling specs: `independent`, `monotone`, `antitone`, `gaussian:<rho>`, `grid:<path>`.
    #[arg(long, num_args = 2, value_names = ["F", "G"])]
    pub compare: Vec<String>,
    /// Comma-separated marginal specs.
    #[arg(long, value_delimiter = ',', default_value = "uniform,uniform")]
    pub marginals: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ORDER_GRID)]
    pub grid: usize,
    /// Monte Carlo battery sample count, 0 to skip.
    #[arg(long, default_value_t = 0)]
    pub battery: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub marginal: String,
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Random monotone candidates, at most 200.
    #[arg(long, default_value_t = 100)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report the undominated-threshold range at these grid sizes.
    #[arg(long, value_delimiter = ',')]
    pub drift: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Percentile grid of the cumulative-rent curves.
    #[arg(long, default_value_t = DEFAULT_PERCENTILE_GRID)]
    pub grid: usize,
}

/// What a command produced, before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub files: OutputSet,
    pub exit_code: i32,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(files: OutputSet) -> Self {
        Outcome { files, exit_code: EXIT_OK, warnings: Vec::new() }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Invalid(_) | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_PRECONDITION,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

/// Parses `args`, runs the command, writes outputs, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if let Err(e) = outcome.files.write_to(&cli.out) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analyze(a) => analyze(a, cli.format),
        Command::Frontier(a) => frontier(a, cli.format),
        Command::Couplings(a) => couplings(a),
        Command::Oracle(a) => oracle(a),
        Command::ReproduceUniform(a) => reproduce(a),
    }
}

fn analyze(a: &AnalyzeArgs, format: Format) -> Result<Outcome> {
    if a.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let d = MarginalDistribution::from_spec(&a.marginal)?;
    let regularity = d.regularity(DEFAULT_REGULARITY_GRID);
    let theta_star = d.monopoly_threshold()?;
    let mut table = Table::new(&["theta", "cdf", "pdf", "psi", "w"]);
    for i in 0..a.grid {
        let t = i as f64 / (a.grid - 1) as f64;
        table.push(vec![t, d.cdf(t), d.pdf(t), d.virtual_value(t), d.w_function(t)]);
    }
    let mut summary = json!({
        "marginal": d.name(),
        "theta_star": theta_star,
        "regularity": regularity,
        "myerson_regular": regularity.myerson_regular,
        "strongly_regular": regularity.strongly_regular,
    });
    let mut files = OutputSet::new();
    match format {
        Format::Csv => files.add("analyze.csv", table.to_csv()?),
        Format::Json => summary["table"] = json!(table.to_records()),
    }
    files.add_json("analyze.json", &summary)?;
    Ok(Outcome::ok(files))
}

fn frontier(a: &FrontierArgs, format: Format) -> Result<Outcome> {
    let d = MarginalDistribution::from_spec(&a.marginal)?;
    if a.sweep.is_some_and(|s| s < 2) {
        return Err(usage("--sweep must be at least 2"));
    }
    if let Some(k) = a.reference.iter().find(|k| !(0.0..=1.0).contains(*k)) {
        return Err(usage(format!("reference threshold {k} outside [0, 1]")));
    }
    let interval = frontier_interval(&d)?;
    let mut summary = serde_json::to_value(interval.summary())?;
    let mut warnings = Vec::new();
    if let Some(w) = &interval.warning {
        summary["warning"] = json!(w);
        warnings.push(w.clone());
    }
    let mut files = OutputSet::new();
    if let Some(steps) = a.sweep {
        let mut reference = a.reference.clone();
        if a.with_monopoly {
            reference.push(interval.monopoly);
        }
        let rows = frontier_sweep(&d, steps, &reference)?;
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_sweep_csv(&mut buf, &rows)?;
                files.add("frontier_sweep.csv", buf);
            }
            Format::Json => summary["sweep"] = serde_json::to_value(&rows)?,
        }
    }
    files.add_json("frontier.json", &summary)?;
    Ok(Outcome { files, exit_code: EXIT_OK, warnings })
}

fn couplings(a: &CouplingsArgs) -> Result<Outcome> {
    if a.compare.len() != 2 {
        return Err(usage("--compare takes exactly two coupling specs"));
    }
    if a.grid == 0 {
        return Err(usage("--grid must be positive"));
    }
    let marginals = a.marginals.iter().map(|s| MarginalDistribution::from_spec(s)).collect::<Result<Vec<_>>>()?;
    let f = Coupling::from_spec(&a.compare[0], marginals.clone())?;
    let g = Coupling::from_spec(&a.compare[1], marginals)?;
    let verdict = supermodular_compare(&f, &g, a.grid)?;
    let mut out = json!({
        "f": f.label(),
        "g": g.label(),
        "grid": a.grid,
        "dominates": verdict.dominates,
        "margin": verdict.margin,
        "witness": verdict.witness,
        "max_gap": verdict.max_gap,
    });
    if a.battery > 0 {
        out["battery"] = serde_json::to_value(supermodular_test_battery(&f, &g, a.seed, a.battery)?)?;
        out["seed"] = json!(a.seed);
    }
    let mut files = OutputSet::new();
    files.add_json("couplings.json", &out)?;
    Ok(Outcome::ok(files))
}

fn oracle(a: &OracleArgs) -> Result<Outcome> {
    if a.random > 200 {
        return Err(usage("--random must be at most 200"));
    }
    if a.grid < 2 || a.drift.iter().any(|&m| m < 2) {
        return Err(usage("grid sizes must be at least 2"));
    }
    let d = MarginalDistribution::from_spec(&a.marginal)?;
    let report = run_dominance_scan(&d, a.grid, a.random, a.seed)?;
    let mut out = serde_json::to_value(&report)?;
    if !a.drift.is_empty() {
        out["drift"] = serde_json::to_value(endpoint_drift(&d, &a.drift)?)?;
    }
    let mut files = OutputSet::new();
    for (i, (x, y)) in report.failing_pairs.iter().enumerate() {
        let mut buf = Vec::new();
        write_atom_pair_csv(&mut buf, x, y)?;
        files.add(format!("oracle_failing_{i}.csv"), buf);
    }
    files.add_json("oracle.json", &out)?;
    let pass = report.frontier_undominated && report.monopoly_dominated_by.is_some();
    Ok(Outcome { files, exit_code: if pass { EXIT_OK } else { EXIT_ACCEPTANCE }, warnings: Vec::new() })
}

/// One numeric check of the uniform example.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, expected, tolerance, pass: (value - expected).abs() <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformExampleReport {
    pub w_spot_values: Vec<(f64, f64)>,
    pub w_max_error: f64,
    pub k_low: f64,
    pub k_high: f64,
    pub theta_star: f64,
    pub supra_pricing_margin: f64,
    pub h_grid: usize,
    pub h_antitone: Vec<f64>,
    pub h_monotone: Vec<f64>,
    pub h_antitone_max_deviation: f64,
    pub h_monotone_max_deviation: f64,
    pub antitone_dominates_monotone: bool,
    pub sosd_margin: f64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// Uniform marginals in two markets, thresholds `(1/2, 1/2)`.
pub fn reproduce_uniform_example(grid: usize) -> Result<UniformExampleReport> {
    let d = MarginalDistribution::uniform();
    let w_spot_values = [0.0, 0.25, 0.5, 2.0 / 3.0, 0.75, 1.0].iter().map(|&t| (t, d.w_function(t))).collect();
    let w_max_error = (0..DEFAULT_REGULARITY_GRID)
        .map(|i| i as f64 / (DEFAULT_REGULARITY_GRID - 1) as f64)
        .map(|t| (d.w_function(t) - (3.0 - 4.0 * t)).abs())
        .fold(0.0, f64::max);
    let interval = frontier_interval(&d)?;
    let supra = supra_pricing_check(&d)?;
    let rents = || vec![rent_function(&d, 0.5), rent_function(&d, 0.5)];
    let anti = RentProfile::new(Coupling::countermonotone(d.clone(), d.clone()), rents())?;
    let mono = RentProfile::new(Coupling::comonotone(vec![d.clone(), d.clone()])?, rents())?;
    let ha = cumulative_rents(&anti, grid)?;
    let hm = cumulative_rents(&mono, grid)?;
    let dev = |h: &[f64], f: &dyn Fn(f64) -> f64| {
        ha.percentiles.iter().zip(h).map(|(&p, v)| (v - f(p)).abs()).fold(0.0, f64::max)
    };
    let h_antitone_max_deviation = dev(&ha.values, &|p| p * p / 4.0);
    let h_monotone_max_deviation = dev(&hm.values, &|p| (p - 0.5).max(0.0).powi(2));
    let verdict = sosd_compare(&rent_distribution(&anti, grid)?, &rent_distribution(&mono, grid)?);
    let checks = vec![
        Check::new("w_formula_max_error", w_max_error, 0.0, 1e-8),
        Check::new("k_low", interval.lower, 2.0 / 3.0, 1e-8),
        Check::new("k_high", interval.upper, 0.75, 1e-8),
        Check::new("theta_star", interval.monopoly, 0.5, 1e-8),
        Check::new("supra_pricing_margin", supra.margin, 1.0 / 6.0, 1e-8),
        Check::new("h_antitone_max_deviation", h_antitone_max_deviation, 0.0, 1e-3),
        Check::new("h_monotone_max_deviation", h_monotone_max_deviation, 0.0, 1e-3),
        Check::new("antitone_dominates_monotone", f64::from(u8::from(verdict.dominates)), 1.0, 0.0),
    ];
    let all_pass = checks.iter().all(|c| c.pass) && supra.holds;
    Ok(UniformExampleReport {
        w_spot_values,
        w_max_error,
        k_low: interval.lower,
        k_high: interval.upper,
        theta_star: interval.monopoly,
        supra_pricing_margin: supra.margin,
        h_grid: grid,
        h_antitone: ha.values,
        h_monotone: hm.values,
        h_antitone_max_deviation,
        h_monotone_max_deviation,
        antitone_dominates_monotone: verdict.dominates,
        sosd_margin: verdict.margin,
        checks,
        all_pass,
    })
}

fn reproduce(a: &ReproduceArgs) -> Result<Outcome> {
    if a.grid == 0 {
        return Err(usage("--grid must be positive"));
    }
    let report = reproduce_uniform_example(a.grid)?;
    let mut files = OutputSet::new();
    files.add_json("uniform_example.json", &report)?;
    let warnings = report.checks.iter().filter(|c| !c.pass).map(|c| format!("check {} failed: {}", c.name, c.value)).collect();
    Ok(Outcome { files, exit_code: if report.all_pass { EXIT_OK } else { EXIT_ACCEPTANCE }, warnings })
}
