//! Scenario files: flat INI sections with `key = value` lines.
//!
//! ```text
//! [password]
//! n_qubits = 13
//!
//! [attack]
//! strategy = uqcm_symmetric
//! strike_point = alice_station
//! metric = fidelity
//!
//! [run]
//! trials = 100000
//! seed = 7
//! ```
//!
//! Every key can also be given on the command line; flags override the file.

use std::fmt;
use std::path::Path;

use qupass_core::adversary::{AttackScenario, Metric, StrikePoint, Strategy};
use qupass_core::protocol::{AcceptancePolicy, Channel, PolicyMode};
use qupass_core::NoiseKind;

/// Where a value came from, for error messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Default,
    File { path: String, line: usize },
    Flag,
    Env(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => f.write_str("default"),
            Origin::File { path, line } => write!(f, "{path}, line {line}"),
            Origin::Flag => f.write_str("command line"),
            Origin::Env(var) => write!(f, "environment variable {var}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{origin}: key '{key}': {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(origin: &Origin, key: &str, message: impl Into<String>) -> Self {
        Self {
            origin: origin.clone(),
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// Every recognised `section.key`.
pub const KEYS: [&str; 12] = [
    "password.n_qubits",
    "attack.strategy",
    "attack.asymmetry",
    "attack.strike_point",
    "attack.metric",
    "channel.noise_kind",
    "channel.noise_strength",
    "channel.loss_probability",
    "policy.mode",
    "policy.threshold_fraction",
    "run.trials",
    "run.seed",
];

/// Raw key/value pairs with their origin, before interpretation.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: Vec<(String, String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_string(),
                line: i + 1,
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(&origin, line, "unterminated section header"))?
                    .trim();
                if !KEYS.iter().any(|k| k.split('.').next() == Some(name)) {
                    return Err(ConfigError::new(&origin, name, "unknown section"));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&origin, line, "expected key = value"))?;
            // inline comments: values never contain '#' or ';'
            let value = value.split(['#', ';']).next().unwrap_or("");
            let (key, value) = (key.trim(), value.trim());
            let Some(sec) = &section else {
                return Err(ConfigError::new(&origin, key, "key outside any [section]"));
            };
            let full = format!("{sec}.{key}");
            if !KEYS.contains(&full.as_str()) {
                return Err(ConfigError::new(&origin, &full, "unknown key"));
            }
            if let Some((_, _, first)) = raw.entries.iter().find(|(k, _, _)| *k == full) {
                return Err(ConfigError::new(&origin, &full, format!("duplicate key (first set at {first})")));
            }
            raw.entries.push((full, value.to_string(), origin));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, crate::CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(Self::parse(&text, &path.display().to_string())?)
    }

    /// Set or replace a value; `key` must be one of [`KEYS`].
    pub fn set(&mut self, key: &str, value: impl Into<String>, origin: Origin) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.entries.retain(|(k, _, _)| k != key);
        self.entries.push((key.to_string(), value.into(), origin));
    }

    fn get(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, v, o)| (v.as_str(), o))
    }

    fn parsed<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some((v, origin)) => parse(v).map_err(|m| ConfigError::new(origin, key, m)),
        }
    }

    fn origin(&self, key: &str) -> Origin {
        self.get(key).map_or(Origin::Default, |(_, o)| o.clone())
    }

    /// Interpret and range-check every value.
    pub fn resolve(&self) -> Result<ScenarioConfig, ConfigError> {
        let n_qubits = self.parsed("password.n_qubits", 13, parse_int)?;
        let asymmetry = self.parsed("attack.asymmetry", None, |s| parse_float(s).map(Some))?;
        let strategy = self.parsed("attack.strategy", Strategy::UqcmSymmetric, |s| match s {
            "uqcm_symmetric" => Ok(Strategy::UqcmSymmetric),
            "uqcm_asymmetric" => Ok(Strategy::UqcmAsymmetric {
                asymmetry: asymmetry.unwrap_or(0.5),
            }),
            "random_guess" => Ok(Strategy::RandomGuess),
            "intercept_resend" => Ok(Strategy::InterceptResend),
            other => Err(format!(
                "unknown strategy '{other}' (expected uqcm_symmetric, uqcm_asymmetric, random_guess, intercept_resend)"
            )),
        })?;
        if asymmetry.is_some() && !matches!(strategy, Strategy::UqcmAsymmetric { .. }) {
            return Err(ConfigError::new(
                &self.origin("attack.asymmetry"),
                "attack.asymmetry",
                "only valid with strategy = uqcm_asymmetric",
            ));
        }
        let strike_point = self.parsed("attack.strike_point", StrikePoint::AliceStation, str::parse)?;
        let metric = self.parsed("attack.metric", Metric::Fidelity, str::parse)?;
        let noise_kind = self.parsed("channel.noise_kind", NoiseKind::Ideal, str::parse)?;
        let noise_strength = self.parsed("channel.noise_strength", 0.0, parse_float)?;
        let loss_probability = self.parsed("channel.loss_probability", 0.0, parse_float)?;
        let mode = self.parsed("policy.mode", None, |s| s.parse::<PolicyMode>().map(Some))?;
        let threshold_fraction = self.parsed("policy.threshold_fraction", None, |s| parse_float(s).map(Some))?;
        let trials = self.parsed("run.trials", 100_000, parse_int)?;
        let seed = self.parsed("run.seed", None, |s| parse_seed(s).map(Some))?;

        let check = |key: &str, ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::new(&self.origin(key), key, msg))
            }
        };
        check("password.n_qubits", n_qubits >= 1, "must be >= 1")?;
        check("run.trials", trials >= 1, "must be >= 1")?;
        if let Strategy::UqcmAsymmetric { asymmetry } = strategy {
            check("attack.asymmetry", (0.0..=1.0).contains(&asymmetry), "must be in [0, 1]")?;
        }
        check("channel.noise_strength", (0.0..=1.0).contains(&noise_strength), "must be in [0, 1]")?;
        check("channel.loss_probability", (0.0..=1.0).contains(&loss_probability), "must be in [0, 1]")?;
        let channel = Channel::new(noise_kind, noise_strength, loss_probability)
            .map_err(|e| ConfigError::new(&self.origin("channel.noise_strength"), "channel.noise_strength", e.to_string()))?;

        let policy = match (mode, threshold_fraction) {
            (None | Some(PolicyMode::Strict), None) => AcceptancePolicy::strict(),
            (Some(PolicyMode::Strict), Some(f)) => {
                check("policy.threshold_fraction", f == 1.0, "must be 1 with mode = strict")?;
                AcceptancePolicy::strict()
            }
            (Some(PolicyMode::Threshold), None) => {
                return Err(ConfigError::new(
                    &self.origin("policy.mode"),
                    "policy.mode",
                    "mode = threshold needs policy.threshold_fraction",
                ))
            }
            (_, Some(f)) => {
                check("policy.threshold_fraction", f > 0.0 && f <= 1.0, "must be in (0, 1]")?;
                AcceptancePolicy::threshold(f).expect("range checked")
            }
        };

        Ok(ScenarioConfig {
            n_qubits,
            strategy,
            strike_point,
            metric,
            channel,
            policy,
            trials,
            seed,
        })
    }
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got '{s}'"))
}

fn parse_float(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a number, got '{s}'")),
    }
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("expected an unsigned 64-bit seed, got '{s}'"))
}

/// A fully validated attack scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n_qubits: usize,
    pub strategy: Strategy,
    pub strike_point: StrikePoint,
    pub metric: Metric,
    pub channel: Channel,
    pub policy: AcceptancePolicy,
    pub trials: usize,
    /// Unset means "fall back to QUPASS_SEED, then 0".
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn scenario(&self) -> AttackScenario {
        let mut s = AttackScenario::new(self.strategy, self.strike_point, self.n_qubits, self.trials, self.metric);
        s.channel = self.channel;
        s.policy = self.policy;
        s
    }
}
