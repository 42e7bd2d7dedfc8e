//! Strict JSON configuration: one schema per command, unknown keys rejected,
//! numeric domains checked with the offending field path.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wassrisk::finite_duality::{CibLoss, FiniteSpace, PriorSet};
use wassrisk::func::PiecewiseLinear;
use wassrisk::measures::{load_samples, DiscreteDistribution, Distribution};
use wassrisk::penalties::{Penalty, PenaltyError};
use wassrisk::pricing::{MarketSpec, PayoffSpec, PricingMode};
use wassrisk::transport_oracle::{CostFn, OracleError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Risk,
    Price,
    CheckDuality,
    Directed,
    FiniteDual,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Risk => "risk",
            Command::Price => "price",
            Command::CheckDuality => "check-duality",
            Command::Directed => "directed",
            Command::FiniteDual => "finite-dual",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaselineSpec {
    Normal {
        mean: f64,
        std: f64,
    },
    Lognormal {
        log_mean: f64,
        log_std: f64,
    },
    Dirac {
        at: f64,
    },
    /// `[x, w]` pairs; weights must sum to one.
    Discrete {
        atoms: Vec<(f64, f64)>,
    },
    /// One real per line.
    Samples {
        path: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    /// Exponent of `scale·|x − y|^p`.
    pub p: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// Struct variants throughout so that stray keys on `linear` are rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PenaltySpec {
    Ball { delta: f64 },
    Linear {},
    Power { p: f64 },
    Exponential {},
}

impl PenaltySpec {
    pub fn penalty(&self) -> Penalty {
        match *self {
            PenaltySpec::Ball { delta } => Penalty::Ball { delta },
            PenaltySpec::Linear {} => Penalty::Linear,
            PenaltySpec::Power { p } => Penalty::Power { p },
            PenaltySpec::Exponential {} => Penalty::Exponential,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMeasure {
    Avar,
    Var,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskConfig {
    pub command: Command,
    pub baseline: BaselineSpec,
    pub cost: CostSpec,
    pub measure: RiskMeasure,
    pub alphas: Vec<f64>,
    pub penalties: Vec<PenaltySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub spot: f64,
    pub sigma: f64,
    pub maturity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PayoffConfig {
    Call {
        strike: f64,
    },
    Put {
        strike: f64,
    },
    /// Piecewise linear payoff, extended linearly beyond the end points.
    Table {
        points: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeConfig {
    Closed {},
    Generic {
        radius: f64,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
}

fn default_nodes() -> usize {
    wassrisk::ctransform::GENERIC_COARSE_NODES
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig::Closed {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceConfig {
    pub command: Command,
    pub market: MarketConfig,
    pub cost: CostSpec,
    pub penalty: PenaltySpec,
    pub payoff: PayoffConfig,
    #[serde(default)]
    pub mode: ModeConfig,
    /// Strikes of the `--curve` sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strikes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDualityConfig {
    pub command: Command,
    #[serde(default = "default_gap_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_gap_tolerance() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    LognormalDrift {
        s0: f64,
        sigma: f64,
        maturity: f64,
        b_low: f64,
        b_high: f64,
        members: usize,
    },
    Members {
        members: Vec<BaselineSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectedConfig {
    pub command: Command,
    pub family: FamilyConfig,
    pub alphas: Vec<f64>,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_quad_nodes() -> usize {
    200
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CibLossConfig {
    Entropic { alpha: f64 },
    MeanVar {},
    Avar { alpha: f64 },
}

impl CibLossConfig {
    pub fn loss(&self) -> CibLoss {
        match *self {
            CibLossConfig::Entropic { alpha } => CibLoss::Entropic { alpha },
            CibLossConfig::MeanVar {} => CibLoss::MeanVar,
            CibLossConfig::Avar { alpha } => CibLoss::AvarL { alpha },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteDualConfig {
    pub command: Command,
    pub outcomes: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
    pub loss: CibLossConfig,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_resolution() -> usize {
    400
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RunConfig {
    Risk(RiskConfig),
    Price(PriceConfig),
    CheckDuality(CheckDualityConfig),
    Directed(DirectedConfig),
    FiniteDual(FiniteDualConfig),
}

impl RunConfig {
    pub fn command(&self) -> Command {
        match self {
            RunConfig::Risk(_) => Command::Risk,
            RunConfig::Price(_) => Command::Price,
            RunConfig::CheckDuality(_) => Command::CheckDuality,
            RunConfig::Directed(_) => Command::Directed,
            RunConfig::FiniteDual(_) => Command::FiniteDual,
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            RunConfig::Risk(c) => c.output.as_deref(),
            RunConfig::Price(c) => c.output.as_deref(),
            RunConfig::CheckDuality(c) => c.output.as_deref(),
            RunConfig::Directed(c) => c.output.as_deref(),
            RunConfig::FiniteDual(c) => c.output.as_deref(),
        }
    }

    pub fn set_output(&mut self, path: PathBuf) {
        let slot = match self {
            RunConfig::Risk(c) => &mut c.output,
            RunConfig::Price(c) => &mut c.output,
            RunConfig::CheckDuality(c) => &mut c.output,
            RunConfig::Directed(c) => &mut c.output,
            RunConfig::FiniteDual(c) => &mut c.output,
        };
        *slot = Some(path);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

fn field(path: impl Into<String>, message: impl Into<String>) -> FieldError {
    FieldError {
        path: path.into(),
        message: message.into(),
    }
}

fn typed<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Invalid(vec![field(
            if path == "." { "<root>".into() } else { path },
            e.into_inner().to_string(),
        )])
    })
}

/// Reads, type-checks and validates a configuration file. Relative paths in
/// the file resolve against the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax(format!("malformed JSON: {e}")))?;
    let command = match value.get("command") {
        None => return Err(ConfigError::Invalid(vec![field("command", "missing field")])),
        Some(c) => typed::<Command>(c.clone()).map_err(|_| {
            ConfigError::Invalid(vec![field(
                "command",
                format!("unknown command {c}; expected risk, price, check-duality, directed or finite-dual"),
            )])
        })?,
    };
    let mut config = match command {
        Command::Risk => RunConfig::Risk(typed(value)?),
        Command::Price => RunConfig::Price(typed(value)?),
        Command::CheckDuality => RunConfig::CheckDuality(typed(value)?),
        Command::Directed => RunConfig::Directed(typed(value)?),
        Command::FiniteDual => RunConfig::FiniteDual(typed(value)?),
    };
    resolve_paths(&mut config, base);
    let errors = validate(&config);
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}

fn resolve(path: &mut PathBuf, base: &Path) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

fn resolve_baseline(b: &mut BaselineSpec, base: &Path) {
    if let BaselineSpec::Samples { path } = b {
        resolve(path, base);
    }
}

fn resolve_paths(config: &mut RunConfig, base: &Path) {
    match config {
        RunConfig::Risk(c) => resolve_baseline(&mut c.baseline, base),
        RunConfig::Directed(DirectedConfig {
            family: FamilyConfig::Members { members },
            ..
        }) => members.iter_mut().for_each(|m| resolve_baseline(m, base)),
        _ => {}
    }
}

fn validate(config: &RunConfig) -> Vec<FieldError> {
    let mut errors = Vec::new();
    match config {
        RunConfig::Risk(c) => {
            check_baseline(&c.baseline, "baseline", &mut errors);
            check_cost(&c.cost, &mut errors);
            check_levels(&c.alphas, "alphas", &mut errors);
            if c.penalties.is_empty() {
                errors.push(field("penalties", "at least one penalty is required"));
            }
            for (i, p) in c.penalties.iter().enumerate() {
                check_penalty(p, &format!("penalties[{i}]"), &mut errors);
            }
        }
        RunConfig::Price(c) => {
            if let Err(e) = market(&c.market) {
                errors.push(field("market", e.to_string()));
            }
            check_cost(&c.cost, &mut errors);
            check_penalty(&c.penalty, "penalty", &mut errors);
            if let Err(e) = payoff(&c.payoff) {
                errors.push(field("payoff", e));
            }
            if let ModeConfig::Generic { radius, nodes } = c.mode {
                if !(radius > 0.0 && radius.is_finite()) {
                    errors.push(field("mode.radius", format!("must be finite and > 0, got {radius}")));
                }
                if nodes < 16 {
                    errors.push(field("mode.nodes", format!("must be >= 16, got {nodes}")));
                }
            }
            if let Some(ks) = &c.strikes {
                if ks.is_empty()
                    || ks.iter().any(|k| !(*k > 0.0 && k.is_finite()))
                    || ks.windows(2).any(|w| w[1] <= w[0])
                {
                    errors.push(field("strikes", "must be nonempty, positive and strictly increasing"));
                }
            }
        }
        RunConfig::CheckDuality(c) => {
            if !(c.tolerance > 0.0 && c.tolerance.is_finite()) {
                errors.push(field(
                    "tolerance",
                    format!("must be finite and > 0, got {}", c.tolerance),
                ));
            }
        }
        RunConfig::Directed(c) => {
            match &c.family {
                FamilyConfig::LognormalDrift {
                    s0,
                    sigma,
                    maturity,
                    b_low,
                    b_high,
                    members,
                } => {
                    if let Err(e) =
                        wassrisk::directed::lognormal_drift_family(*s0, *sigma, *maturity, *b_low, *b_high, *members)
                    {
                        errors.push(field("family", e.to_string()));
                    }
                }
                FamilyConfig::Members { members } => {
                    if members.is_empty() {
                        errors.push(field("family.members", "at least one member is required"));
                    }
                    for (i, m) in members.iter().enumerate() {
                        check_baseline(m, &format!("family.members[{i}]"), &mut errors);
                    }
                }
            }
            check_levels(&c.alphas, "alphas", &mut errors);
            if c.quad_nodes < 2 {
                errors.push(field("quad_nodes", format!("must be >= 2, got {}", c.quad_nodes)));
            }
        }
        RunConfig::FiniteDual(c) => {
            if let Err(e) = FiniteSpace::new(c.outcomes.clone()) {
                errors.push(field("outcomes", e.to_string()));
            }
            if let Err(e) = PriorSet::new(c.vertices.clone()) {
                errors.push(field("vertices", e.to_string()));
            } else if c.vertices[0].len() != c.outcomes.len() {
                errors.push(field("vertices", "vertex length must match the number of outcomes"));
            }
            if let Err(e) = c.loss.loss().validate() {
                errors.push(field("loss.alpha", e.to_string()));
            }
            if c.resolution == 0 {
                errors.push(field("resolution", "must be >= 1"));
            }
        }
    }
    errors
}

fn check_levels(alphas: &[f64], path: &str, errors: &mut Vec<FieldError>) {
    if alphas.is_empty() {
        errors.push(field(path, "at least one level is required"));
    }
    for (i, a) in alphas.iter().enumerate() {
        if !(*a > 0.0 && *a < 1.0) {
            errors.push(field(format!("{path}[{i}]"), format!("must lie in (0, 1), got {a}")));
        }
    }
}

fn check_penalty(p: &PenaltySpec, path: &str, errors: &mut Vec<FieldError>) {
    if let Err(PenaltyError::InvalidParameter {
        field: f,
        requirement,
        value,
    }) = p.penalty().validate()
    {
        errors.push(field(
            format!("{path}.{f}"),
            format!("must be {requirement}, got {value}"),
        ));
    }
}

fn check_cost(c: &CostSpec, errors: &mut Vec<FieldError>) {
    if let Err(e) = cost(c) {
        let path = match e {
            OracleError::InvalidCost { field: "exponent", .. } => "cost.p".to_string(),
            OracleError::InvalidCost { field: f, .. } => format!("cost.{f}"),
            _ => "cost".to_string(),
        };
        errors.push(field(path, e.to_string()));
    }
}

fn check_baseline(b: &BaselineSpec, path: &str, errors: &mut Vec<FieldError>) {
    if let BaselineSpec::Samples { path: file } = b {
        if !file.is_file() {
            errors.push(field(
                format!("{path}.path"),
                format!("file {} does not exist", file.display()),
            ));
            return;
        }
    }
    if let Err(e) = baseline(b) {
        errors.push(field(path, e));
    }
}

pub fn cost(c: &CostSpec) -> Result<CostFn, OracleError> {
    let base = CostFn::new(c.scale, c.p)?;
    match c.cap {
        Some(k) => base.capped(k),
        None => Ok(base),
    }
}

pub fn baseline(b: &BaselineSpec) -> Result<Distribution, String> {
    let out = match b {
        BaselineSpec::Normal { mean, std } => Distribution::normal(*mean, *std),
        BaselineSpec::Lognormal { log_mean, log_std } => Distribution::lognormal(*log_mean, *log_std),
        BaselineSpec::Dirac { at } if at.is_finite() => Ok(Distribution::dirac(*at)),
        BaselineSpec::Dirac { at } => return Err(format!("location must be finite, got {at}")),
        BaselineSpec::Discrete { atoms } => DiscreteDistribution::new(atoms.iter().copied()).map(Into::into),
        BaselineSpec::Samples { path } => load_samples(path).map(Into::into),
    };
    out.map_err(|e| e.to_string())
}

pub fn market(m: &MarketConfig) -> Result<MarketSpec, wassrisk::pricing::PricingError> {
    MarketSpec::new(m.spot, m.sigma, m.maturity)
}

pub fn payoff(p: &PayoffConfig) -> Result<PayoffSpec, String> {
    match p {
        PayoffConfig::Call { strike } if strike.is_finite() => Ok(PayoffSpec::Call { strike: *strike }),
        PayoffConfig::Put { strike } if strike.is_finite() => Ok(PayoffSpec::Put { strike: *strike }),
        PayoffConfig::Call { strike } | PayoffConfig::Put { strike } => {
            Err(format!("strike must be finite, got {strike}"))
        }
        PayoffConfig::Table { points, values } => PiecewiseLinear::new(points.clone(), values.clone())
            .map(PayoffSpec::Tabulated)
            .map_err(|e| e.to_string()),
    }
}

pub fn mode(m: &ModeConfig) -> PricingMode {
    match *m {
        ModeConfig::Closed {} => PricingMode::Closed,
        ModeConfig::Generic { radius, nodes } => PricingMode::Generic { radius, nodes },
    }
}
