//! Command-line front end: configuration, subcommands and output formats.

use crate::density::{reduction_report, DensityError, DensityModel, Theorem};
use crate::model::{
    build_brownian_basis, BasisFamily, CoefficientLaw, CoefficientProfile, ComplexLevel, ModelError,
    MonomialBasis, Rectangle, TimeGrid, WeightedMonomialBasis,
};
use crate::quadrature::{integrate_density, QuadratureOptions, QuadratureResult};
use crate::zerocount::{estimate_expected_count, MCEstimate, ZeroCountError};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("--set expects key=value, got {0:?}")]
    BadAssignment(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    ZeroCount(#[from] ZeroCountError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    #[default]
    Monomial,
    WeightedMonomial,
    BrownianPrefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, ValueEnum)]
pub enum TheoremChoice {
    #[default]
    #[serde(rename = "auto")]
    #[value(name = "auto")]
    Auto,
    #[serde(rename = "2")]
    #[value(name = "2")]
    General,
    #[serde(rename = "3")]
    #[value(name = "3")]
    EqualVariance,
    #[serde(rename = "4")]
    #[value(name = "4")]
    NonzeroMean,
    #[serde(rename = "5")]
    #[value(name = "5")]
    Brownian,
}

/// A value given once for every index or per index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerIndex {
    All(f64),
    Each(Vec<f64>),
}

impl PerIndex {
    fn expand(&self, what: &'static str, n: usize) -> Result<Vec<f64>, ModelError> {
        match self {
            PerIndex::All(x) => Ok(vec![*x; n]),
            PerIndex::Each(v) if v.len() == n => Ok(v.clone()),
            PerIndex::Each(v) => Err(ModelError::LengthMismatch {
                what,
                got: v.len(),
                expected: n,
            }),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            PerIndex::All(x) => *x == 0.0,
            PerIndex::Each(v) => v.iter().all(|x| *x == 0.0),
        }
    }
}

/// Flat run configuration. Every key can be set from a TOML file or with
/// `--set key=value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub basis: BasisKind,
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    pub mu_a: PerIndex,
    pub var_a: PerIndex,
    pub mu_b: PerIndex,
    pub var_b: PerIndex,
    pub k1: f64,
    pub k2: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub trials: usize,
    pub seed: u64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_cells: usize,
    pub theorem: TheoremChoice,
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        Self {
            basis: BasisKind::Monomial,
            degree: 2,
            weights: None,
            times: None,
            mu_a: PerIndex::All(0.0),
            var_a: PerIndex::All(1.0),
            mu_b: PerIndex::All(0.0),
            var_b: PerIndex::All(1.0),
            k1: 0.0,
            k2: 0.0,
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
            nx: 101,
            ny: 101,
            trials: 10_000,
            seed: 1,
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_cells: q.max_cells,
            theorem: TheoremChoice::Auto,
        }
    }
}

/// Everything needed to evaluate, integrate and sample one configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: DensityModel,
    pub region: Rectangle,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        Ok(toml::to_string(self)?)
    }

    /// Applies `key=value`; the value is read as a TOML value, falling back
    /// to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::BadAssignment(assignment.to_string()))?;
        let (key, value) = (key.trim(), value.trim());
        let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let mut table = toml::Table::try_from(&*self)?;
        table.insert(key.to_string(), parsed);
        *self = table.try_into()?;
        Ok(())
    }

    pub fn quadrature_options(&self) -> Result<QuadratureOptions, CliError> {
        let ok = |t: f64| t.is_finite() && t >= 0.0;
        if !(ok(self.abs_tol) && ok(self.rel_tol)) || (self.abs_tol == 0.0 && self.rel_tol == 0.0) {
            return Err(CliError::Invalid("tolerances must be nonnegative and not both zero".into()));
        }
        if self.max_cells < 16 {
            return Err(CliError::Invalid("max_cells must be at least 16".into()));
        }
        Ok(QuadratureOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_cells: self.max_cells,
        })
    }

    pub fn region(&self) -> Result<Rectangle, CliError> {
        Ok(Rectangle::new(self.x_min, self.x_max, self.y_min, self.y_max)?)
    }

    /// Builds the basis, profile and density model.
    pub fn problem(&self) -> Result<Problem, CliError> {
        let n = self.degree + 1;
        let level = ComplexLevel::new(self.k1, self.k2)?;
        let (basis, profile): (Arc<dyn BasisFamily>, CoefficientProfile) = match self.basis {
            BasisKind::BrownianPrefix => {
                if !(self.mu_a.is_zero() && self.mu_b.is_zero()) {
                    return Err(CliError::Invalid("brownian-prefix coefficients have zero means".into()));
                }
                let times = self
                    .times
                    .clone()
                    .ok_or_else(|| CliError::Invalid("brownian-prefix needs `times`".into()))?;
                let grid = TimeGrid::new(times)?;
                let inner: Arc<dyn BasisFamily> = match &self.weights {
                    Some(w) => Arc::new(WeightedMonomialBasis::new(w.clone())?),
                    None => Arc::new(MonomialBasis::new(self.degree)),
                };
                if inner.len() != n {
                    return Err(ModelError::LengthMismatch { what: "weights", got: inner.len(), expected: n }.into());
                }
                let (b, p) = build_brownian_basis(inner, &grid)?;
                (Arc::new(b), p)
            }
            kind => {
                let basis: Arc<dyn BasisFamily> = match kind {
                    BasisKind::WeightedMonomial => {
                        let w = self
                            .weights
                            .clone()
                            .ok_or_else(|| CliError::Invalid("weighted-monomial needs `weights`".into()))?;
                        if w.len() != n {
                            return Err(ModelError::LengthMismatch { what: "weights", got: w.len(), expected: n }.into());
                        }
                        Arc::new(WeightedMonomialBasis::new(w)?)
                    }
                    _ => Arc::new(MonomialBasis::new(self.degree)),
                };
                let mu_a = self.mu_a.expand("mu_a", n)?;
                let var_a = self.var_a.expand("var_a", n)?;
                let mu_b = self.mu_b.expand("mu_b", n)?;
                let var_b = self.var_b.expand("var_b", n)?;
                let laws = (0..n)
                    .map(|j| CoefficientLaw {
                        mu_a: mu_a[j],
                        var_a: var_a[j],
                        mu_b: mu_b[j],
                        var_b: var_b[j],
                    })
                    .collect();
                (basis, CoefficientProfile::new(laws)?)
            }
        };

        let model = match self.theorem {
            TheoremChoice::Auto if self.basis == BasisKind::BrownianPrefix => {
                DensityModel::new(profile, basis, level, Theorem::Brownian)?
            }
            TheoremChoice::Auto => DensityModel::auto(profile, basis, level)?,
            TheoremChoice::Brownian if self.basis != BasisKind::BrownianPrefix => {
                return Err(CliError::Invalid("theorem 5 needs basis = \"brownian-prefix\"".into()))
            }
            choice => {
                let theorem = match choice {
                    TheoremChoice::General => Theorem::General,
                    TheoremChoice::EqualVariance => Theorem::EqualVariance,
                    TheoremChoice::NonzeroMean => Theorem::NonzeroMean,
                    _ => Theorem::Brownian,
                };
                DensityModel::new(profile, basis, level, theorem)?
            }
        };
        Ok(Problem {
            model,
            region: self.region()?,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "crossings", version, about = "Expected zero density of random sums S_N(z) - K")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub theorem: Option<TheoremChoice>,
    /// Override one config key, e.g. `--set var_a=[1,2,3]`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Density on an nx-by-ny grid, as CSV `x,y,h`.
    Density,
    /// Integral of the density over the region.
    Expect,
    /// Monte Carlo zero count over the region.
    Mc,
    /// Quadrature against Monte Carlo.
    Compare,
    /// Reduction identities over `trials` random configurations.
    ReduceCheck,
}

impl Cli {
    /// Config file, then `--set`, then the dedicated flags.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        for s in &self.set {
            cfg.set(s)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(t) = self.theorem {
            cfg.theorem = t;
        }
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text)
}

/// Output of one subcommand: the text to write and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
    /// Diagnostic for stderr.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub discarded: usize,
}

impl From<MCEstimate> for McReport {
    fn from(e: MCEstimate) -> Self {
        Self {
            trials: e.trials,
            mean: e.mean,
            std_error: e.std_error,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            discarded: e.discarded_trials,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub quadrature: QuadratureResult,
    pub mc: McReport,
    pub z_score: f64,
    pub agree: bool,
}

/// `agree = |q - mc| <= 3 se + err`; the z-score is `(q - mc) / se`.
pub fn compare(q: &QuadratureResult, mc: &MCEstimate) -> (f64, bool) {
    let diff = q.value - mc.mean;
    let z = if mc.std_error > 0.0 {
        diff / mc.std_error
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    (z, diff.abs() <= 3.0 * mc.std_error + q.error_estimate)
}

/// Grid coordinates including both endpoints; a single point sits at the
/// midpoint.
fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn density_csv(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.nx == 0 || cfg.ny == 0 {
        return Err(CliError::Invalid("nx and ny must be positive".into()));
    }
    let problem = cfg.problem()?;
    let xs = axis(cfg.x_min, cfg.x_max, cfg.nx);
    let ys = axis(cfg.y_min, cfg.y_max, cfg.ny);
    let mut text = String::from("x,y,h\n");
    let mut failures = 0;
    for &y in &ys {
        for &x in &xs {
            let h = match problem.model.evaluate(Complex64::new(x, y)) {
                Ok(h) => format!("{h:.16e}"),
                Err(_) => {
                    failures += 1;
                    "nan".to_string()
                }
            };
            text.push_str(&format!("{x:.16e},{y:.16e},{h}\n"));
        }
    }
    let note = (failures > 0).then(|| format!("{failures} of {} grid points are degenerate (written as nan)", xs.len() * ys.len()));
    Ok(Outcome {
        text,
        exit_code: i32::from(failures > 0),
        note,
    })
}

pub fn expect(cfg: &RunConfig) -> Result<QuadratureResult, CliError> {
    let problem = cfg.problem()?;
    let model = &problem.model;
    Ok(integrate_density(|z| model.evaluate(z), &problem.region, &cfg.quadrature_options()?)?)
}

pub fn monte_carlo(cfg: &RunConfig) -> Result<MCEstimate, CliError> {
    let problem = cfg.problem()?;
    let m = &problem.model;
    Ok(estimate_expected_count(
        &m.profile,
        m.basis.as_ref(),
        m.level,
        &problem.region,
        cfg.trials,
        cfg.seed,
    )?)
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Runs one subcommand against a resolved configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ok = |text| Outcome {
        text,
        exit_code: 0,
        note: None,
    };
    match command {
        Command::Density => density_csv(cfg),
        Command::Expect => {
            let q = expect(cfg)?;
            let mut out = ok(json(&q)?);
            if !q.converged {
                out.exit_code = 1;
                out.note = Some("quadrature did not converge within max_cells".into());
            }
            Ok(out)
        }
        Command::Mc => Ok(ok(json(&McReport::from(monte_carlo(cfg)?))?)),
        Command::Compare => {
            let q = expect(cfg)?;
            let mc = monte_carlo(cfg)?;
            let (z_score, agree) = compare(&q, &mc);
            let report = CompareReport {
                quadrature: q,
                mc: mc.into(),
                z_score,
                agree,
            };
            Ok(Outcome {
                text: json(&report)?,
                exit_code: i32::from(!agree),
                note: None,
            })
        }
        Command::ReduceCheck => {
            let report = reduction_report(cfg.seed, cfg.trials);
            Ok(Outcome {
                text: json(&report)?,
                exit_code: i32::from(!report.all_pass()),
                note: None,
            })
        }
    }
}

/// Full program: resolves the config, runs, writes output, returns the
/// exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = cli.resolve_config()?;
    let outcome = if cli.print_config {
        Outcome {
            text: cfg.to_toml()?,
            exit_code: 0,
            note: None,
        }
    } else {
        execute(cli.command, &cfg)?
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => std::io::stdout().lock().write_all(outcome.text.as_bytes())?,
    }
    if let Some(note) = &outcome.note {
        eprintln!("{note}");
    }
    Ok(outcome.exit_code)
}
