use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimators::{GridParams, ModelKind, ModelSpec};
use crate::metric::RectSpec;

fn one() -> usize {
    1
}
fn default_bins() -> usize {
    64
}
fn default_pilot_replicas() -> usize {
    8
}
fn default_pilot_factor() -> f64 {
    4.0
}

/// The estimator a run executes, with its parameters (the `[task]` section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Writes realizations to disk (binary + CSV).
    Sample {
        #[serde(default = "one")]
        replicas: usize,
        half_width: f64,
    },
    Mu {
        replicas: usize,
        direction: Vec<f64>,
        n: Vec<usize>,
    },
    OneArm {
        replicas: usize,
        radii: Vec<f64>,
        /// Half-open index range `[start, end)` into `radii` for the exponent fit.
        #[serde(default)]
        window: Option<[usize; 2]>,
    },
    Crossing {
        replicas: usize,
        rect: RectSpec,
        scales: Vec<f64>,
        #[serde(default)]
        colour: u8,
    },
    Ind {
        replicas: usize,
        q: f64,
        s: f64,
        delta: f64,
    },
    Renorm {
        replicas: usize,
        q: f64,
        r: f64,
        s: f64,
        delta: f64,
    },
    BallShape {
        replicas: usize,
        t: Vec<f64>,
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default)]
        half_width: Option<f64>,
        #[serde(default = "default_pilot_replicas")]
        pilot_replicas: usize,
        #[serde(default = "default_pilot_factor")]
        pilot_factor: f64,
    },
}

impl TaskSpec {
    /// Subcommand name of the task.
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Sample { .. } => "sample",
            TaskSpec::Mu { .. } => "mu",
            TaskSpec::OneArm { .. } => "one-arm",
            TaskSpec::Crossing { .. } => "crossing",
            TaskSpec::Ind { .. } => "ind",
            TaskSpec::Renorm { .. } => "renorm",
            TaskSpec::BallShape { .. } => "ball-shape",
        }
    }

    pub fn replicas(&self) -> usize {
        match self {
            TaskSpec::Sample { replicas, .. }
            | TaskSpec::Mu { replicas, .. }
            | TaskSpec::OneArm { replicas, .. }
            | TaskSpec::Crossing { replicas, .. }
            | TaskSpec::Ind { replicas, .. }
            | TaskSpec::Renorm { replicas, .. }
            | TaskSpec::BallShape { replicas, .. } => *replicas,
        }
    }

    fn check(&self, errors: &mut Vec<ConfigError>) {
        let mut err = |field: &str, message: &str| errors.push(ConfigError::new(format!("task.{field}"), message));
        let min = if matches!(self, TaskSpec::Sample { .. } | TaskSpec::OneArm { .. } | TaskSpec::Crossing { .. }) { 1 } else { 2 };
        if self.replicas() < min {
            err("replicas", &format!("replicas must be >= {min}"));
        }
        let increasing = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[0] < w[1]);
        match self {
            TaskSpec::Sample { half_width, .. } if !(*half_width > 0.0) => err("half_width", "half_width must be > 0"),
            TaskSpec::Mu { n, .. } if n.is_empty() || n[0] == 0 || n.windows(2).any(|w| w[0] >= w[1]) => {
                err("n", "n must be positive and strictly increasing")
            }
            TaskSpec::OneArm { radii, window, .. } => {
                if !increasing(radii) || radii[0] <= 1.0 {
                    err("radii", "radii must exceed 1 and be strictly increasing");
                }
                if let Some([a, b]) = window {
                    if b > &radii.len() || b < a || b - a < 3 {
                        err("window", "window [start, end) must select at least 3 radii");
                    }
                }
            }
            TaskSpec::Crossing { scales, colour, .. } => {
                if scales.is_empty() || scales.iter().any(|s| !(*s > 0.0)) {
                    err("scales", "scales must be > 0");
                }
                if *colour > 1 {
                    err("colour", "colour must be 0 (white) or 1 (black)");
                }
            }
            TaskSpec::Ind { q, s, delta, .. } => {
                if !(*q > 0.0 && *s > 0.0) {
                    err("q", "Q and S must be > 0");
                }
                if !(*delta > 0.0) {
                    err("delta", "delta must be > 0");
                }
            }
            TaskSpec::Renorm { q, r, s, delta, .. } => {
                if !(1.0 <= *q && q < r && r < s) {
                    err("q", "scales must satisfy 1 <= Q < R < S");
                }
                if !(*delta > 0.0) {
                    err("delta", "delta must be > 0");
                }
            }
            TaskSpec::BallShape { t, bins, pilot_replicas, pilot_factor, .. } => {
                if !increasing(t) || t[0] <= 0.0 {
                    err("t", "t must be positive and strictly increasing");
                }
                if *bins < 16 {
                    err("bins", "at least 16 angular bins required");
                }
                if *pilot_replicas < 2 {
                    err("pilot_replicas", "at least 2 pilot replicas required");
                }
                if !(*pilot_factor >= 1.0) {
                    err("pilot_factor", "pilot_factor must be >= 1");
                }
            }
            _ => {}
        }
    }
}

/// A complete experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub model: ModelKind,
    #[serde(default)]
    pub grid: GridParams,
    pub task: TaskSpec,
}

impl ExperimentConfig {
    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec { model: self.model.clone(), grid: self.grid.clone() }
    }

    /// Canonical TOML text: every field explicit, thread count dropped.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.threads = None;
        toml::to_string(&c).expect("configs always serialize")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }
}

/// One problem with a configuration, tied to the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Field-level error from a serde message such as "missing field `seed`".
fn serde_error(section: &str, e: impl std::fmt::Display) -> ConfigError {
    let msg = e.to_string();
    let msg = msg.trim().lines().last().unwrap_or("").trim().to_string();
    let quoted = msg.split('`').nth(1).filter(|_| msg.contains("field") || msg.contains("variant"));
    let field = match (section, quoted) {
        ("", Some(q)) => q.to_string(),
        ("", None) => "<document>".to_string(),
        (s, Some(q)) if msg.contains("field") => format!("{s}.{q}"),
        (s, _) => s.to_string(),
    };
    ConfigError::new(field, msg)
}

fn core_error(e: Error) -> ConfigError {
    match e {
        Error::Param { field, reason } => {
            let f = if field.starts_with("grid.") { field.to_string() } else { format!("model.{field}") };
            ConfigError::new(f, reason)
        }
        other => ConfigError::new("model", other.to_string()),
    }
}

/// Parses and validates a config document, collecting every error found.
///
/// `model.p` on a `bernoulli-lattice` model is shorthand for
/// `model.law = { kind = "bernoulli", p = ... }`.
pub fn validate_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<ConfigError>> {
    let doc: toml::Table = text.parse().map_err(|e| vec![serde_error("", e)])?;
    validate_table(doc)
}

pub fn validate_table(mut doc: toml::Table) -> std::result::Result<ExperimentConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    for key in doc.keys() {
        if !["seed", "threads", "model", "grid", "task"].contains(&key.as_str()) {
            errors.push(ConfigError::new(key.clone(), "unknown top-level key"));
        }
    }
    let seed = match doc.get("seed") {
        None => {
            errors.push(ConfigError::new("seed", "missing field `seed`: a master seed (u64) is required"));
            None
        }
        Some(toml::Value::Integer(s)) if *s >= 0 => Some(*s as u64),
        Some(_) => {
            errors.push(ConfigError::new("seed", "seed must be a non-negative integer"));
            None
        }
    };
    let threads = match doc.get("threads") {
        None => None,
        Some(toml::Value::Integer(t)) if *t >= 1 => Some(*t as usize),
        Some(_) => {
            errors.push(ConfigError::new("threads", "threads must be a positive integer"));
            None
        }
    };
    if let Some(toml::Value::Table(m)) = doc.get_mut("model") {
        let lattice = m.get("kind").and_then(|k| k.as_str()) == Some("bernoulli-lattice");
        if lattice && !m.contains_key("law") {
            if let Some(p) = m.remove("p") {
                let mut law = toml::Table::new();
                law.insert("kind".into(), "bernoulli".into());
                law.insert("p".into(), p);
                m.insert("law".into(), toml::Value::Table(law));
            }
        }
    }
    let model = match doc.get("model") {
        None => {
            errors.push(ConfigError::new("model", "missing section [model]"));
            None
        }
        Some(v) => ModelKind::deserialize(v.clone()).map_err(|e| errors.push(serde_error("model", e))).ok(),
    };
    let grid = match doc.get("grid") {
        None => Some(GridParams::default()),
        Some(v) => GridParams::deserialize(v.clone()).map_err(|e| errors.push(serde_error("grid", e))).ok(),
    };
    let task = match doc.get("task") {
        None => {
            errors.push(ConfigError::new("task", "missing section [task]"));
            None
        }
        Some(v) => TaskSpec::deserialize(v.clone()).map_err(|e| errors.push(serde_error("task", e))).ok(),
    };
    if let (Some(model), Some(grid)) = (&model, &grid) {
        let spec = ModelSpec { model: model.clone(), grid: grid.clone() };
        if let Err(e) = spec.validate() {
            errors.push(core_error(e));
        }
    }
    if let Some(task) = &task {
        task.check(&mut errors);
    }
    match (seed, model, grid, task) {
        (Some(seed), Some(model), Some(grid), Some(task)) if errors.is_empty() => {
            Ok(ExperimentConfig { seed, threads, model, grid, task })
        }
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colourings::{MonotoneMap, RadiusLaw, WeightLaw};
    use crate::estimators::GaussianSampler;
    use crate::fields::KernelSpec;
    use proptest::prelude::*;

    const VORONOI: &str = r#"
seed = 7
[model]
kind = "voronoi"
p = 0.5
lambda = 1.0
[task]
kind = "crossing"
replicas = 10
scales = [4.0]
rect = { lo = [0.0, 0.0], hi = [1.0, 1.0], axis = 0 }
"#;

    fn errors(text: &str) -> Vec<ConfigError> {
        validate_config(text).unwrap_err()
    }

    #[test]
    fn accepts_a_valid_document() {
        let c = validate_config(VORONOI).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid, GridParams::default());
        assert_eq!(c.task.name(), "crossing");
    }

    #[test]
    fn voronoi_p_out_of_range() {
        let e = errors(&VORONOI.replace("p = 0.5", "p = 1.3"));
        assert!(e.iter().any(|e| e.field == "model.p" && e.message.contains("p must lie in [0,1]")), "{e:?}");
    }

    #[test]
    fn missing_seed_is_named() {
        let e = errors(&VORONOI.replace("seed = 7", ""));
        assert!(e.iter().any(|e| e.field == "seed"), "{e:?}");
    }

    #[test]
    fn exponential_tail_needs_positive_rate() {
        let text = r#"
seed = 1
[model]
kind = "boolean"
lambda = 0.5
radius = { kind = "exponential-tail", rate = -1.0 }
[task]
kind = "sample"
half_width = 4.0
"#;
        let e = errors(text);
        assert!(e.iter().any(|e| e.field == "model.radius.rate" && e.message.contains("exponential-tail")), "{e:?}");
    }

    #[test]
    fn collects_several_errors() {
        let text = "threads = 0\n[model]\nkind = \"voronoi\"\np = 2.0\nlambda = 1.0\n[task]\nkind = \"mu\"\nreplicas = 1\ndirection = [1.0, 0.0]\nn = [4, 2]\n";
        let fields: Vec<String> = errors(text).into_iter().map(|e| e.field).collect();
        for f in ["seed", "threads", "model.p", "task.replicas", "task.n"] {
            assert!(fields.iter().any(|x| x == f), "{f} not in {fields:?}");
        }
    }

    #[test]
    fn unknown_fields_and_kinds() {
        let e = errors(&VORONOI.replace("kind = \"voronoi\"", "kind = \"ising\""));
        assert!(e.iter().any(|e| e.field == "model"), "{e:?}");
        let e = errors(&VORONOI.replace("replicas = 10", "replicas = 10\nbogus = 1"));
        assert!(e.iter().any(|e| e.field.starts_with("task")), "{e:?}");
    }

    #[test]
    fn lattice_p_shorthand() {
        let text = "seed = 1\n[model]\nkind = \"bernoulli-lattice\"\np = 0.25\n[task]\nkind = \"one-arm\"\nreplicas = 5\nradii = [4.0, 8.0, 16.0]\n";
        let c = validate_config(text).unwrap();
        assert_eq!(c.model, ModelKind::BernoulliLattice { law: WeightLaw::Bernoulli { p: 0.25 } });
    }

    fn model_strategy() -> impl Strategy<Value = ModelKind> {
        let p = -2.0f64..2.0;
        let unit = 0.0f64..=1.0;
        prop_oneof![
            (p.clone(), any::<bool>()).prop_map(|(p, s)| ModelKind::BargmannFock {
                p,
                sampler: if s { GaussianSampler::Series } else { GaussianSampler::Spectral }
            }),
            (p.clone(), 0.1f64..3.0).prop_map(|(p, l)| ModelKind::SpectralGaussian { p, kernel: KernelSpec::Gaussian { length: l } }),
            (p.clone(), 0.1f64..5.0).prop_map(|(p, s)| ModelKind::GaussianPsi {
                p,
                psi: MonotoneMap::AffineClamped { offset: 0.0, slope: s, min: 0.0, max: 10.0 },
                kernel: KernelSpec::Gaussian { length: 1.0 },
                sampler: GaussianSampler::Series,
            }),
            (0.1f64..2.0).prop_map(|l| ModelKind::Conformal {
                phi: MonotoneMap::Exp,
                kernel: KernelSpec::Gaussian { length: l },
                sampler: GaussianSampler::Spectral,
            }),
            (unit.clone(), 0.1f64..5.0).prop_map(|(p, lambda)| ModelKind::Voronoi { p, lambda }),
            (0.0f64..2.0, 0.1f64..3.0, prop::option::of(2.0f64..4.0)).prop_map(|(lambda, r, c)| ModelKind::Boolean {
                lambda,
                radius: RadiusLaw::Constant { radius: r },
                coupling_lambda: c,
            }),
            (0.1f64..4.0).prop_map(|rate| ModelKind::Boolean {
                lambda: 1.0,
                radius: RadiusLaw::ExponentialTail { rate },
                coupling_lambda: None,
            }),
            unit.prop_map(|p| ModelKind::BernoulliLattice { law: WeightLaw::Bernoulli { p } }),
            (0.0f64..5.0).prop_map(|value| ModelKind::Constant { value }),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(model in model_strategy(), seed in any::<u64>() , spacing in 0.05f64..2.0, margin in 0.0f64..5.0, fixed in any::<bool>()) {
            let c = ExperimentConfig {
                seed: seed >> 1,
                threads: None,
                model,
                grid: GridParams { spacing, margin, extents: fixed.then(|| vec![33, 17]), ..GridParams::default() },
                task: TaskSpec::OneArm { replicas: 3, radii: vec![2.0, 4.0, 8.0], window: Some([0, 3]) },
            };
            let parsed = validate_config(&c.to_toml()).unwrap();
            prop_assert_eq!(parsed, c);
        }
    }
}
