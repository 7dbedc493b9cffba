//! Command-line front end for `gibbs-core`.

pub mod args;
pub mod commands;
pub mod suites;

use std::collections::HashMap;

use gibbs_core::data::{read_frequency_file, tomato};
use gibbs_core::numerics::parse_decimal;
use gibbs_core::{Error, FrequencyCounts, GibbsModel, PrecisionPolicy};
use serde_json::{json, Value};

use args::{Cli, Command, ModelArgs, ModelKind};

/// Failure of a command, with the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input, invalid parameters.
    #[error("{0}")]
    Input(String),
    /// Degenerate data or an uncertifiable computation.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateData(_) | Error::PrecisionExhausted { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Text for stdout and the exit code of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let policy = policy(cli)?;
    match &cli.command {
        Command::Fit(a) => commands::fit(a, cli.json),
        Command::Estimate(a) => commands::estimate(a, &policy, cli.json),
        Command::Simulate(a) => commands::simulate(a, &policy),
        Command::Validate(a) => commands::validate(a, cli.json),
        Command::Crossval(a) => commands::crossval(a, &policy, cli.json),
    }
}

pub fn policy(cli: &Cli) -> Result<PrecisionPolicy, CliError> {
    if cli.exact {
        return Ok(PrecisionPolicy::exact());
    }
    let p = PrecisionPolicy::with_bits(cli.precision_bits);
    p.validate()?;
    Ok(p)
}

/// Loads counts from "tomato", a frequency file, or (with `raw`) a file of
/// observation labels, one per line.
pub fn load_counts(input: &str, raw: bool) -> Result<FrequencyCounts, CliError> {
    if input == "tomato" && !raw {
        return Ok(tomato());
    }
    if !raw {
        return Ok(read_frequency_file(input)?);
    }
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Input(format!("cannot read {}: {}", input, e)))?;
    Ok(counts_from_labels(&text)?)
}

/// Tallies observation labels (one per line; blank lines and '#' comments
/// ignored) into frequency counts.
pub fn counts_from_labels(text: &str) -> gibbs_core::Result<FrequencyCounts> {
    let mut tally: HashMap<&str, usize> = HashMap::new();
    for raw in text.lines() {
        let label = raw.split('#').next().unwrap_or("").trim();
        if !label.is_empty() {
            *tally.entry(label).or_default() += 1;
        }
    }
    if tally.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no observations found".into(),
        });
    }
    let sizes: Vec<usize> = tally.into_values().collect();
    FrequencyCounts::from_block_sizes(&sizes)
}

fn param(value: &Option<String>, name: &str, kind: ModelKind) -> Result<rug::Rational, CliError> {
    let s = value
        .as_deref()
        .ok_or_else(|| CliError::Input(format!("--{} is required for --model {:?}", name, kind).to_lowercase()))?;
    parse_decimal(s).ok_or_else(|| CliError::Input(format!("--{}: cannot parse '{}' as a number", name, s)))
}

pub fn build_model(a: &ModelArgs) -> Result<GibbsModel, CliError> {
    let model = match a.model {
        ModelKind::Dp => GibbsModel::dirichlet_rational(param(&a.theta, "theta", a.model)?)?,
        ModelKind::Pd => GibbsModel::pitman_yor_rational(param(&a.sigma, "sigma", a.model)?, param(&a.theta, "theta", a.model)?)?,
        ModelKind::Gnedin => {
            GibbsModel::gnedin_rational(param(&a.gamma, "gamma", a.model)?, param(&Some(a.zeta.clone()), "zeta", a.model)?)?
        }
    };
    Ok(model)
}

pub fn model_json(model: &GibbsModel) -> Value {
    let mut params = serde_json::Map::new();
    for (k, v) in model.params() {
        params.insert(k.to_string(), json!(v));
    }
    json!({ "name": model.name(), "params": params })
}

pub fn policy_json(policy: &PrecisionPolicy) -> Value {
    if policy.exact {
        json!({ "exact": true })
    } else {
        json!({ "exact": false, "bits": policy.initial_bits, "max_bits": policy.max_bits })
    }
}

/// Common header of every JSON document.
pub fn envelope(command: &str, seed: Option<u64>, model: Option<&GibbsModel>, policy: &PrecisionPolicy) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "model": model.map(model_json),
        "precision": policy_json(policy),
    })
}

/// Nearest integer, ties away from zero.
pub fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}
