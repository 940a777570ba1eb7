use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::context::{ExplorationSchedule, Partition};
use crate::env::NetworkConfig;
use crate::error::{Error, Result};
use crate::policies::PolicyKind;
use crate::solvers::{UtilityKind, DEFAULT_EPSILON, DEFAULT_EXACT_CAP};

/// Which closed-form schedule COCS starts from before any override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleRule {
    /// `z = 2a/(3a+2)`, `gamma = z/(2a)`.
    #[default]
    Theorem,
    /// `z = (2a+2)/(3a+2)`, `gamma = 1/(3a+2)`.
    ApproximateOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CocsSettings {
    pub rule: ScheduleRule,
    pub alpha: f64,
    pub z: Option<f64>,
    pub gamma: Option<f64>,
    /// Fixes `h_T` instead of deriving it from the horizon.
    pub cells_per_axis: Option<u32>,
}

impl Default for CocsSettings {
    fn default() -> Self {
        Self {
            rule: ScheduleRule::Theorem,
            alpha: 1.0,
            z: None,
            gamma: None,
            cells_per_axis: None,
        }
    }
}

impl CocsSettings {
    pub fn schedule(&self) -> Result<ExplorationSchedule> {
        let base = match self.rule {
            ScheduleRule::Theorem => ExplorationSchedule::theorem_defaults(self.alpha),
            ScheduleRule::ApproximateOracle => {
                ExplorationSchedule::approximate_oracle_defaults(self.alpha)
            }
        }
        .map_err(|e| Error::config("cocs.alpha", e.to_string()))?;
        ExplorationSchedule::new(
            self.z.unwrap_or(base.z),
            self.alpha,
            self.gamma.unwrap_or(base.gamma),
        )
        .map_err(|e| Error::config("cocs", e.to_string()))
    }

    pub fn partition(&self, horizon: u64, dim: usize) -> Result<Partition> {
        let h = match self.cells_per_axis {
            Some(h) => h,
            None => self.schedule()?.cells_per_axis(horizon),
        };
        Partition::new(h, dim).map_err(|e| Error::config("cocs.cells_per_axis", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub exact_cap: usize,
    pub epsilon: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            exact_cap: DEFAULT_EXACT_CAP,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinUcbSettings {
    pub lambda: f64,
    pub width: f64,
}

impl Default for LinUcbSettings {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CucbSettings {
    /// Most whole-decision arms enumerated before falling back to per-pair arms.
    pub arm_cap: usize,
}

impl Default for CucbSettings {
    fn default() -> Self {
        Self { arm_cap: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyKind>,
    pub utility: UtilityKind,
    /// Log per-round wall-clock time. Off by default so that repeated runs
    /// write byte-identical files.
    pub record_timing: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            horizon: 1000,
            seeds: vec![1],
            policies: PolicyKind::ALL.to_vec(),
            utility: UtilityKind::Linear,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Scenario name echoed into the summary.
    pub name: String,
    pub run: RunSettings,
    pub network: NetworkConfig,
    pub cocs: CocsSettings,
    pub solver: SolverSettings,
    pub linucb: LinUcbSettings,
    pub cucb: CucbSettings,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            run: RunSettings::default(),
            network: NetworkConfig::default(),
            cocs: CocsSettings::default(),
            solver: SolverSettings::default(),
            linucb: LinUcbSettings::default(),
            cucb: CucbSettings::default(),
            output_dir: None,
        }
    }
}

/// Short names accepted wherever a dotted key is expected.
pub fn resolve_alias(key: &str) -> &str {
    match key {
        "budget" => "network.budget_per_es",
        "tau_dead" => "network.tau_dead_s",
        "horizon" | "T" => "run.horizon",
        other => other,
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_dotted(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "malformed key"));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn strip_nulls(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|_, v| !v.is_null());
            map.values_mut().for_each(strip_nulls);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_nulls),
        _ => {}
    }
}

impl ExperimentConfig {
    /// Parses a TOML document, applies `key=value` overrides and validates.
    pub fn from_toml_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::config("<file>", e.message().to_string()))?;
        Self::from_table(table, overrides)
    }

    pub fn from_json_str(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::config("<file>", e.to_string()))?;
        // TOML has no null; an absent key means the same thing here
        strip_nulls(&mut value);
        let table: toml::Table =
            serde_json::from_value(value).map_err(|e| Error::config("<file>", e.to_string()))?;
        Self::from_table(table, overrides)
    }

    /// Loads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text, overrides)
        } else {
            Self::from_toml_str(&text, overrides)
        }
    }

    fn from_table(mut table: toml::Table, overrides: &[(String, String)]) -> Result<Self> {
        for (key, raw) in overrides {
            set_dotted(&mut table, resolve_alias(key), parse_value(raw))?;
        }
        let config: Self =
            serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
                let path = e.path().to_string();
                let message = e.into_inner().to_string();
                // name the full override key when the unknown field came from one
                let culprit = overrides.iter().map(|(k, _)| resolve_alias(k)).find(|k| {
                    let leaf = k.rsplit('.').next().unwrap_or(k);
                    message.starts_with(&format!("unknown field `{leaf}`"))
                });
                if let Some(k) = culprit {
                    return Error::config(k, format!("unknown key `{k}`"));
                }
                let unknown = message
                    .strip_prefix("unknown field `")
                    .and_then(|rest| rest.split('`').next());
                match unknown {
                    Some(leaf) => {
                        let full = if path == "." {
                            leaf.to_string()
                        } else {
                            format!("{path}.{leaf}")
                        };
                        Error::config(full.clone(), format!("unknown key `{full}`"))
                    }
                    None => Error::config(path, message),
                }
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.horizon == 0 {
            return Err(Error::config("run.horizon", "must be >= 1"));
        }
        if self.run.seeds.is_empty() {
            return Err(Error::config("run.seeds", "need at least one seed"));
        }
        if self.run.policies.is_empty() {
            return Err(Error::config("run.policies", "need at least one policy"));
        }
        if !(self.solver.epsilon > 0.0) {
            return Err(Error::config("solver.epsilon", "must be > 0"));
        }
        if !(self.linucb.lambda > 0.0) {
            return Err(Error::config("linucb.lambda", "must be > 0"));
        }
        if !(self.linucb.width >= 0.0) {
            return Err(Error::config("linucb.width", "must be >= 0"));
        }
        self.network.validate("network.")?;
        self.cocs
            .partition(self.run.horizon, self.network.context_dim)?;
        Ok(())
    }

    /// Reads a numeric key (aliases allowed) from the config.
    pub fn numeric(&self, key: &str) -> Result<f64> {
        let key = resolve_alias(key);
        let value = toml::Value::try_from(self).map_err(|e| Error::config(key, e.to_string()))?;
        let mut cur = &value;
        for part in key.split('.') {
            cur = cur
                .get(part)
                .ok_or_else(|| Error::config(key, format!("unknown key `{key}`")))?;
        }
        match cur {
            toml::Value::Integer(i) => Ok(*i as f64),
            toml::Value::Float(f) => Ok(*f),
            _ => Err(Error::config(key, "not a numeric key")),
        }
    }

    /// Copy with one extra override applied and validated.
    pub fn with_override(&self, key: &str, raw: &str) -> Result<Self> {
        let table = toml::Table::try_from(self).map_err(|e| Error::config(key, e.to_string()))?;
        Self::from_table(table, &[(key.to_string(), raw.to_string())])
    }
}
