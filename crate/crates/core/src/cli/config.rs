//! Experiment configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{SlopeMethod, ThresholdModel};
use crate::error::Error;
use crate::processes::{
    Boundary, CouplingMode, FreeParams, KillSchedule, ProcessSpec, RateFunction, RbhParams, SaturatedParams,
    SingleChunkParams, Thinning, TwoChunkParams, VChainParams, YuleParams,
};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPS: usize = 100;
pub const DEFAULT_HORIZON: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Command {
    #[serde(rename = "simulate")]
    Simulate,
    #[serde(rename = "classify")]
    Classify,
    #[serde(rename = "lambda-star")]
    LambdaStar,
    #[serde(rename = "survival")]
    Survival,
    #[serde(rename = "series")]
    Series,
    #[serde(rename = "h0-scaling")]
    H0Scaling,
    #[serde(rename = "vchain")]
    Vchain,
    #[serde(rename = "lambda-s")]
    LambdaS,
    #[serde(rename = "drift")]
    Drift,
    #[serde(rename = "validate")]
    Validate,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_string(self).expect("unit variant");
        f.write_str(s.trim_matches('"'))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
pub enum Format {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "json-lines")]
    #[value(name = "json-lines")]
    JsonLines,
}

/// Contents of a config file, and after [`ExperimentConfig::resolve`] the
/// fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// `one`, `constant`, `download_share` or `capped_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_function: Option<String>,
    /// `or_one` or `plus_one`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    /// `empty`, `arithmetic` or `logarithmic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    /// `bernoulli` or `shared_window`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thinning: Option<String>,
    /// `upper` or `lower`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Grid of `w0` or `v` values for the scaling commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<i64>>,
    /// Coordinate used by `drift`; omitted means the total population.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<usize>,
    /// `endpoint` or `increment`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub horizon: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Parses a JSON config. Unknown keys are rejected.
pub fn parse_config(source: &str) -> Result<ExperimentConfig, Error> {
    let cfg: ExperimentConfig = serde_json::from_str(source).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(cmd) = cfg.command {
        cfg.check_for(cmd)?;
    }
    Ok(cfg)
}

/// Parameter keys understood by each model, with the extra keys some
/// commands read.
fn model_keys(model: &str) -> Option<&'static [&'static str]> {
    Some(match model {
        "yule" => &["mu", "y0"],
        "killed_yule" => &["mu", "w0", "spacing"],
        "rbh" | "rbh_timechange" => &["mu_z", "nu", "z0"],
        "single_chunk" => &["lambda", "mu", "nu", "delta", "alpha", "x0", "x1"],
        "free" => &["lambda", "mu", "nu", "delta", "y0", "y1"],
        "two_chunk" => &["lambda", "mu1", "mu2", "nu", "x0", "x1", "x2"],
        "saturated" => &["mu1", "mu2", "nu", "z1", "z2"],
        "coupled" => &["lambda", "mu", "nu", "delta", "alpha", "x0", "x1"],
        "wz" => &["mu_w", "mu_z", "nu", "w0", "z0"],
        "v_chain" => &["p", "mu_w", "mu_z", "nu", "v0", "K"],
        "FreeOrOne" | "FreePlusOne" | "free_or_one" | "free_plus_one" => &["mu", "nu", "delta"],
        "TwoChunk" => &["mu", "mu2", "nu", "delta"],
        _ => return None,
    })
}

fn command_keys(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Series => &["gamma"],
        _ => &[],
    }
}

/// Models each command accepts.
fn command_models(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Simulate | Command::Drift => &ProcessSpec::NAMES,
        Command::Classify => &["single_chunk", "two_chunk"],
        Command::LambdaStar => &[
            "FreeOrOne",
            "FreePlusOne",
            "TwoChunk",
            "free_or_one",
            "free_plus_one",
            "single_chunk",
            "free",
            "two_chunk",
        ],
        Command::Survival => &["killed_yule"],
        Command::Series => &["rbh"],
        Command::H0Scaling => &["wz"],
        Command::Vchain => &["v_chain"],
        Command::LambdaS => &["rbh", "rbh_timechange", "saturated"],
        Command::Validate => &[],
    }
}

impl ExperimentConfig {
    /// Checks the model and parameter keys against a command.
    pub fn check_for(&self, cmd: Command) -> Result<(), Error> {
        if let Some(c) = self.command {
            if c != cmd {
                return Err(Error::param(
                    "command",
                    format!("the config is for `{c}` but `{cmd}` was requested"),
                ));
            }
        }
        let allowed = command_models(cmd);
        if allowed.is_empty() {
            if let Some(key) = self.params.keys().next() {
                return Err(Error::param(key.as_str(), format!("`{cmd}` takes no parameters")));
            }
            return Ok(());
        }
        let model = self
            .model
            .as_deref()
            .ok_or_else(|| Error::param("model", format!("required by `{cmd}`")))?;
        if !allowed.contains(&model) {
            return Err(Error::param(
                "model",
                format!("`{cmd}` does not support model `{model}` (expected one of {})", allowed.join(", ")),
            ));
        }
        let keys = model_keys(model).expect("listed models have keys");
        let extra = command_keys(cmd);
        for (key, value) in &self.params {
            if !keys.contains(&key.as_str()) && !extra.contains(&key.as_str()) {
                return Err(Error::param(key.as_str(), format!("unknown parameter for model `{model}`")));
            }
            if !value.is_finite() {
                return Err(Error::param(key.as_str(), "must be a finite number"));
            }
        }
        if let Some(h) = self.horizon {
            crate::error::positive("horizon", h)?;
        }
        if self.reps == Some(0) {
            return Err(Error::param("reps", "must be at least 1"));
        }
        Ok(())
    }

    /// Applies command-line overrides and fills in defaults.
    pub fn resolve(mut self, cmd: Command, o: &Overrides) -> Result<Self, Error> {
        self.check_for(cmd)?;
        self.command = Some(cmd);
        self.seed = o.seed.or(self.seed).or(Some(DEFAULT_SEED));
        self.reps = o.reps.or(self.reps).or(Some(DEFAULT_REPS));
        self.horizon = o.horizon.or(self.horizon).or(Some(DEFAULT_HORIZON));
        self.output = o.output.clone().or(self.output);
        self.format = o.format.or(self.format).or(Some(Format::Csv));
        self.check_for(cmd)?;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn reps(&self) -> usize {
        self.reps.unwrap_or(DEFAULT_REPS)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(DEFAULT_HORIZON)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn model_name(&self) -> &str {
        self.model.as_deref().unwrap_or("")
    }

    /// Required parameter.
    pub fn req(&self, key: &str) -> Result<f64, Error> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::param(key, format!("required by model `{}`", self.model_name())))
    }

    /// Required, strictly positive rate.
    pub fn rate(&self, key: &str) -> Result<f64, Error> {
        crate::error::positive(key, self.req(key)?)
    }

    pub fn opt(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    /// Optional non-negative integer parameter.
    pub fn count(&self, key: &str, default: i64) -> Result<i64, Error> {
        match self.params.get(key) {
            None => Ok(default),
            Some(&v) if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 => Ok(v as i64),
            Some(&v) => Err(Error::param(key, format!("must be a non-negative integer, got {v}"))),
        }
    }

    pub fn threshold_model(&self) -> Result<ThresholdModel, Error> {
        match self.model_name() {
            "two_chunk" => Ok(ThresholdModel::TwoChunk),
            "single_chunk" | "free" => Ok(match self.boundary()? {
                Boundary::OrOne => ThresholdModel::FreeOrOne,
                Boundary::PlusOne => ThresholdModel::FreePlusOne,
            }),
            other => other.parse(),
        }
    }

    fn boundary(&self) -> Result<Boundary, Error> {
        match self.boundary.as_deref() {
            None | Some("or_one") => Ok(Boundary::OrOne),
            Some("plus_one") => Ok(Boundary::PlusOne),
            Some(other) => Err(Error::param("boundary", format!("unknown boundary `{other}`"))),
        }
    }

    fn rate_function(&self) -> Result<RateFunction, Error> {
        match self.rate_function.as_deref() {
            None | Some("one") => Ok(RateFunction::Constant(1.0)),
            Some("constant") => RateFunction::constant(self.req("delta")?),
            Some("download_share") => Ok(RateFunction::DownloadShare),
            Some("capped_ratio") => RateFunction::capped_ratio(self.req("alpha")?),
            Some(other) => Err(Error::param("rate_function", format!("unknown rate function `{other}`"))),
        }
    }

    pub fn slope_method(&self) -> Result<SlopeMethod, Error> {
        match self.method.as_deref() {
            None | Some("endpoint") => Ok(SlopeMethod::Endpoint),
            Some("increment") => Ok(SlopeMethod::Increment),
            Some(other) => Err(Error::param("method", format!("unknown method `{other}`"))),
        }
    }

    pub fn rbh(&self) -> Result<RbhParams, Error> {
        RbhParams::new(self.rate("mu_z")?, self.rate("nu")?)
    }

    pub fn single_chunk(&self) -> Result<SingleChunkParams, Error> {
        SingleChunkParams::new(
            self.rate("lambda")?,
            self.rate("mu")?,
            self.rate("nu")?,
            self.rate_function()?,
            self.boundary()?,
        )
    }

    pub fn two_chunk(&self) -> Result<TwoChunkParams, Error> {
        TwoChunkParams::new(self.rate("lambda")?, self.rate("mu1")?, self.rate("mu2")?, self.rate("nu")?)
    }

    pub fn saturated(&self) -> Result<SaturatedParams, Error> {
        SaturatedParams::new(self.rate("mu1")?, self.rate("mu2")?, self.rate("nu")?)
    }

    pub fn kill_schedule(&self) -> Result<KillSchedule, Error> {
        match self.schedule.as_deref() {
            None | Some("arithmetic") => KillSchedule::arithmetic(self.opt("spacing", 1.0)),
            Some("logarithmic") => Ok(KillSchedule::logarithmic()),
            Some("empty") => Ok(KillSchedule::empty()),
            Some(other) => Err(Error::param("schedule", format!("unknown schedule `{other}`"))),
        }
    }

    pub fn v_chain(&self) -> Result<VChainParams, Error> {
        let thinning = match self.thinning.as_deref() {
            None | Some("bernoulli") => Thinning::Bernoulli,
            Some("shared_window") => Thinning::SharedWindow,
            Some(other) => return Err(Error::param("thinning", format!("unknown thinning `{other}`"))),
        };
        let mut p = VChainParams::new(self.req("p")?, self.rate("mu_w")?, self.rbh()?)?.with_thinning(thinning);
        p.safety_horizon = self.horizon();
        Ok(p)
    }

    /// Builds the process named by `model`.
    pub fn process(&self) -> Result<ProcessSpec, Error> {
        Ok(match self.model_name() {
            "yule" => ProcessSpec::Yule {
                params: YuleParams::new(self.rate("mu")?)?,
                y0: self.count("y0", 1)?,
            },
            "killed_yule" => ProcessSpec::KilledYule {
                params: YuleParams::new(self.rate("mu")?)?,
                w0: self.count("w0", 1)?,
                kills: self.kill_schedule()?,
            },
            "rbh" => ProcessSpec::Rbh {
                params: self.rbh()?,
                z0: self.count("z0", 0)?,
            },
            "rbh_timechange" => ProcessSpec::RbhTimechange {
                params: self.rbh()?,
                z0: self.count("z0", 0)?,
            },
            "single_chunk" => ProcessSpec::SingleChunk {
                params: self.single_chunk()?,
                x0: [self.count("x0", 0)?, self.count("x1", 0)?],
            },
            "free" => ProcessSpec::Free {
                params: FreeParams::new(self.opt("delta", 1.0), self.rate("mu")?, self.rate("nu")?, self.rate("lambda")?)?,
                y0: [self.count("y0", 0)?, self.count("y1", 0)?],
            },
            "two_chunk" => ProcessSpec::TwoChunk {
                params: self.two_chunk()?,
                x0: [self.count("x0", 0)?, self.count("x1", 0)?, self.count("x2", 0)?],
            },
            "saturated" => ProcessSpec::Saturated {
                params: self.saturated()?,
                z0: [self.count("z1", 1)?, self.count("z2", 0)?],
            },
            "coupled" => {
                let mode = match self.mode.as_deref() {
                    None | Some("upper") => CouplingMode::Upper,
                    Some("lower") => CouplingMode::Lower,
                    Some(other) => return Err(Error::param("mode", format!("unknown coupling mode `{other}`"))),
                };
                let delta = match mode {
                    CouplingMode::Upper => 1.0,
                    CouplingMode::Lower => self.req("delta")?,
                };
                if self.rate_function.as_deref() == Some("constant") {
                    return Err(Error::param("rate_function", "`delta` is the coupling parameter of this model"));
                }
                ProcessSpec::Coupled {
                    mode,
                    params: self.single_chunk()?,
                    delta,
                    init: [self.count("x0", 1)?, self.count("x1", 0)?],
                }
            }
            "wz" => ProcessSpec::Wz {
                mu_w: self.rate("mu_w")?,
                rbh: self.rbh()?,
                init: [self.count("w0", 1)?, self.count("z0", 0)?],
            },
            "v_chain" => ProcessSpec::VChain {
                params: self.v_chain()?,
                v0: self.count("v0", 100)?,
                k: self.count("K", crate::analysis::DEFAULT_K)?,
            },
            other => return Err(Error::param("model", format!("`{other}` is not a process model"))),
        })
    }
}
