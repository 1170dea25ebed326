//! Scenario configuration: a strict TOML schema (unknown keys are
//! errors) describing the model to run, its parameters, the fading law,
//! an optional parameter sweep and the output paths.

use std::collections::BTreeMap;

use serde::Deserialize;

use layercast_core::fading::{DiscreteStates, FadingLaw};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// One of: siso, mac, relay, queue, mixed-delay, parallel, sr,
    /// bottleneck, harvest.
    pub model: String,
    #[serde(default)]
    pub seed: u64,
    pub output_csv: Option<String>,
    pub output_json: Option<String>,
    #[serde(default)]
    pub law: Option<LawConfig>,
    #[serde(default)]
    pub parameters: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
}

impl ParamValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ParamValue::Number(v) => Some(*v),
            ParamValue::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[f64]> {
        match self {
            ParamValue::Number(_) => None,
            ParamValue::List(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    /// rayleigh | chi2 | discrete
    pub kind: String,
    pub mean: Option<f64>,
    pub antennas: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub grid: Vec<f64>,
}

/// Built law: continuous or finite-state.
pub enum BuiltLaw {
    Continuous(FadingLaw),
    Discrete(DiscreteStates),
}

impl LawConfig {
    pub fn build(&self) -> Result<BuiltLaw, String> {
        match self.kind.as_str() {
            "rayleigh" => {
                let mean = self.mean.unwrap_or(1.0);
                FadingLaw::rayleigh(mean)
                    .map(BuiltLaw::Continuous)
                    .map_err(|e| e.to_string())
            }
            "chi2" => {
                let n = self.antennas.ok_or("chi2 law needs `antennas`")?;
                FadingLaw::chi2_simo(n).map(BuiltLaw::Continuous).map_err(|e| e.to_string())
            }
            "discrete" => {
                let levels = self.levels.clone().ok_or("discrete law needs `levels`")?;
                let probs = self.probs.clone().ok_or("discrete law needs `probs`")?;
                DiscreteStates::new(levels, probs)
                    .map(BuiltLaw::Discrete)
                    .map_err(|e| e.to_string())
            }
            other => Err(format!("unknown law kind `{other}`")),
        }
    }
}

impl ScenarioConfig {
    pub fn continuous_law(&self) -> Result<FadingLaw, String> {
        match &self.law {
            None => FadingLaw::rayleigh(1.0).map_err(|e| e.to_string()),
            Some(cfg) => match cfg.build()? {
                BuiltLaw::Continuous(law) => Ok(law),
                BuiltLaw::Discrete(_) => {
                    Err("this model requires a continuous fading law".into())
                }
            },
        }
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).and_then(|v| v.as_number())
    }

    pub fn list(&self, key: &str) -> Option<Vec<f64>> {
        self.parameters.get(key).and_then(|v| v.as_list().map(|s| s.to_vec()))
    }
}

pub const MODELS: &[&str] = &[
    "siso",
    "mac",
    "relay",
    "queue",
    "mixed-delay",
    "parallel",
    "sr",
    "bottleneck",
    "harvest",
];
