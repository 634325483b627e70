//! Experiment configuration: one JSON document per run. Unknown keys are
//! hard errors so typos never silently change an experiment.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use lclab_core::sampling::{BodySpec, SamplerKind, SamplerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MpCheck,
    Rigidity,
    LocalLaw,
    EdgeTw,
    Spike,
    Concentration,
    Interp,
    GreenCompare,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::MpCheck => "mp-check",
            ExperimentKind::Rigidity => "rigidity",
            ExperimentKind::LocalLaw => "local-law",
            ExperimentKind::EdgeTw => "edge-tw",
            ExperimentKind::Spike => "spike",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Interp => "interp",
            ExperimentKind::GreenCompare => "green-compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mp-check" => ExperimentKind::MpCheck,
            "rigidity" => ExperimentKind::Rigidity,
            "local-law" => ExperimentKind::LocalLaw,
            "edge-tw" => ExperimentKind::EdgeTw,
            "spike" => ExperimentKind::Spike,
            "concentration" => ExperimentKind::Concentration,
            "interp" => ExperimentKind::Interp,
            "green-compare" => ExperimentKind::GreenCompare,
            _ => return None,
        })
    }
}

/// ℓp exponent in configs: a number or the string "inf".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LpField {
    Number(f64),
    Word(InfKeyword),
}

/// Wrapper so serde round-trips the "inf" keyword.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfKeyword(#[serde(with = "inf_string")] pub f64);

mod inf_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(_v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "inf" | "Inf" | "INF" => Ok(f64::INFINITY),
            other => Err(serde::de::Error::custom(format!(
                "expected \"inf\" or a number, got {other:?}"
            ))),
        }
    }
}

impl LpField {
    pub fn value(&self) -> f64 {
        match self {
            LpField::Number(v) => *v,
            LpField::Word(w) => w.0,
        }
    }
}

/// Column-law section of a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleConfig {
    Gaussian,
    LaplaceProduct,
    LpBall {
        p: f64,
    },
    ConvexBodyHitAndRun {
        body_p: LpField,
        #[serde(default)]
        burn_in: Option<usize>,
        #[serde(default)]
        thinning: Option<usize>,
    },
}

impl EnsembleConfig {
    pub fn sampler_spec(&self, dimension: usize) -> SamplerSpec {
        match self {
            EnsembleConfig::Gaussian => SamplerSpec::gaussian(dimension),
            EnsembleConfig::LaplaceProduct => SamplerSpec::laplace(dimension),
            EnsembleConfig::LpBall { p } => SamplerSpec::lp_ball(*p, dimension),
            EnsembleConfig::ConvexBodyHitAndRun { body_p, burn_in, thinning } => SamplerSpec {
                kind: SamplerKind::ConvexBodyHitAndRun {
                    body: BodySpec::LpBall { p: body_p.value() },
                    burn_in: burn_in.unwrap_or(50 * dimension),
                    thinning: thinning.unwrap_or(10 * dimension),
                },
                dimension,
            },
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, EnsembleConfig::Gaussian)
    }

    pub fn label(&self) -> String {
        self.sampler_spec(0).label()
    }
}

/// Grid parameters for resolvent scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_n_energy")]
    pub n_energy: usize,
    #[serde(default = "default_n_eta")]
    pub n_eta: usize,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_n_energy() -> usize {
    16
}

fn default_n_eta() -> usize {
    14
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            epsilon: default_epsilon(),
            n_energy: default_n_energy(),
            n_eta: default_n_eta(),
        }
    }
}

/// Pass/fail thresholds; recorded verbatim in the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Slack exponent for stochastic-domination style checks (ratio <= N^eps).
    #[serde(default = "default_eps_test")]
    pub eps_test: f64,
    /// Tolerated failure fraction for per-point/per-trial checks.
    #[serde(default = "default_delta_test")]
    pub delta_test: f64,
    /// KS tolerance override; per-experiment default when absent.
    #[serde(default)]
    pub ks_tolerance: Option<f64>,
    /// Number of standard errors allowed for mean comparisons.
    #[serde(default = "default_mean_sigma")]
    pub mean_sigma: f64,
}

fn default_eps_test() -> f64 {
    0.1
}

fn default_delta_test() -> f64 {
    0.1
}

fn default_mean_sigma() -> f64 {
    3.0
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_test: default_eps_test(),
            delta_test: default_delta_test(),
            ks_tolerance: None,
            mean_sigma: default_mean_sigma(),
        }
    }
}

/// One experiment run, fully described.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub ensemble: EnsembleConfig,
    /// Row dimension; alternatively give `y` and it is derived as round(y N).
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub y: Option<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub spikes: Vec<f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Sizes for multi-size experiments (rigidity).
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    /// Dimensions for the concentration ladder.
    #[serde(default)]
    pub m_list: Option<Vec<usize>>,
    /// Pilot columns for moment estimation (spike experiment).
    #[serde(default)]
    pub pilot: Option<usize>,
    /// Reference ensemble for comparisons; Gaussian when absent.
    #[serde(default)]
    pub baseline: Option<EnsembleConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    /// Row dimension, resolved from `m` or `y`.
    pub fn resolved_m(&self) -> Option<usize> {
        match (self.m, self.y) {
            (Some(m), _) => Some(m),
            (None, Some(y)) if y > 0.0 => Some((y * self.n as f64).round() as usize),
            _ => None,
        }
    }

    /// Collects every violated field; empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.trials == 0 {
            out.push("trials: must be at least 1".to_string());
        }
        if self.n == 0 {
            out.push("n: must be at least 1".to_string());
        }
        match self.resolved_m() {
            None => out.push("m/y: exactly one of m or positive y required".to_string()),
            Some(0) => out.push("m: resolved row dimension is zero".to_string()),
            Some(m) if m == self.n => {
                out.push("y: aspect ratio y = 1 is excluded".to_string());
            }
            _ => {}
        }
        if let (Some(m), Some(y)) = (self.m, self.y) {
            if (m as f64 / self.n as f64 - y).abs() > 1e-9 {
                out.push("m/y: both given but inconsistent".to_string());
            }
        }
        if let EnsembleConfig::LpBall { p } = &self.ensemble {
            if p.is_nan() || *p < 1.0 || !p.is_finite() {
                out.push("ensemble.p: lp exponent must be finite and >= 1".to_string());
            }
        }
        if self.spikes.iter().any(|d| !d.is_finite()) {
            out.push("spikes: all strengths must be finite".to_string());
        }
        if !(self.grid.epsilon > 0.0 && self.grid.epsilon < 1.0) {
            out.push("grid.epsilon: must lie in (0, 1)".to_string());
        }
        if let Some(list) = &self.n_list {
            if list.len() < 2 {
                out.push("n_list: need at least two sizes".to_string());
            }
        }
        if let Some(list) = &self.m_list {
            if list.is_empty() {
                out.push("m_list: must be nonempty".to_string());
            }
        }
        out
    }
}
