//! Flat `key = value` configuration with dotted sections.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and repeated
//! keys are errors. [`PipelineConfig::dump`] writes every effective key, and
//! reloading the dump gives back the same configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use optivmd_core::dataset::SmoteParams;
use optivmd_core::scorer::{ExternalConfig, KnnConfig, ScorerSpec, SoftmaxConfig};
use optivmd_core::search::StopRule;
use optivmd_core::{Convention, ExtractConfig, OmegaInit, Recipe, VmdParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {0:?} given twice")]
    Duplicate(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{key} does not apply to scorer.kind = {kind}")]
    NotApplicable { key: String, kind: &'static str },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Everything the commands need, with defaults for every key.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub extract: ExtractConfig,
    pub vmd: VmdParams,
    pub k_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    pub stop: StopRule,
    pub test_fraction: f64,
    /// SMOTE before the split instead of on the training partition.
    pub smote_first: bool,
    pub smote: Option<SmoteParams>,
    pub scorer: ScorerSpec,
    pub seed: u64,
    pub convention: Convention,
    /// Drop RAVDESS calm/surprised clips.
    pub seven_class: bool,
    /// Decompose the waveform and extract features from the mode sum.
    pub pre_feature: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            extract: ExtractConfig::default(),
            vmd: VmdParams::default(),
            k_grid: (2..=8).collect(),
            alpha_grid: vec![1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 6000.0],
            stop: StopRule::default(),
            test_fraction: 0.2,
            smote_first: false,
            smote: Some(SmoteParams::default()),
            scorer: ScorerSpec::default(),
            seed: 0,
            convention: Convention::Emodb,
            seven_class: true,
            pre_feature: false,
        }
    }
}

struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    fn take<T: FromStr>(&mut self, key: &str, into: &mut T) -> Result<bool, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.map.remove(key) else {
            return Ok(false);
        };
        *into = raw.parse().map_err(|e: T::Err| bad(key, &raw, e))?;
        Ok(true)
    }

    fn take_with<T>(
        &mut self,
        key: &str,
        into: &mut T,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<bool, ConfigError> {
        let Some(raw) = self.map.remove(key) else {
            return Ok(false);
        };
        *into = parse(&raw).map_err(|e| bad(key, &raw, e))?;
        Ok(true)
    }
}

fn bad(key: &str, value: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_optional<T: FromStr>(s: &str) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    match s.trim() {
        "none" => Ok(None),
        v => v.parse().map(Some).map_err(|e: T::Err| e.to_string()),
    }
}

pub fn parse_omega_init(s: &str) -> Result<OmegaInit, String> {
    match s.trim() {
        "uniform" => Ok(OmegaInit::Uniform),
        "zero" => Ok(OmegaInit::Zero),
        other => match other.strip_prefix("random:") {
            Some(seed) => seed.parse().map(OmegaInit::Random).map_err(|e| format!("{e}")),
            None => Err("expected uniform, zero or random:<seed>".into()),
        },
    }
}

pub fn omega_init_name(init: OmegaInit) -> String {
    match init {
        OmegaInit::Uniform => "uniform".into(),
        OmegaInit::Zero => "zero".into(),
        OmegaInit::Random(s) => format!("random:{s}"),
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

const SOFTMAX_KEYS: [&str; 4] = ["scorer.learning_rate", "scorer.epochs", "scorer.batch", "scorer.l2"];
const KNN_KEYS: [&str; 1] = ["scorer.k"];
const EXTERNAL_KEYS: [&str; 2] = ["scorer.command", "scorer.timeout_s"];

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: line.to_string(),
                });
            }
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate(key));
            }
        }
        let mut e = Entries { map };
        let mut c = PipelineConfig::default();

        let x = &mut c.extract;
        e.take("sample_rate", &mut x.sample_rate)?;
        e.take("duration_s", &mut x.duration_s)?;
        e.take("n_fft", &mut x.n_fft)?;
        e.take("hop", &mut x.hop)?;
        e.take("n_mels", &mut x.n_mels)?;
        e.take("fmin", &mut x.fmin)?;
        e.take_with("fmax", &mut x.fmax, parse_optional)?;
        e.take("n_mfcc", &mut x.n_mfcc)?;
        e.take("tuning_ref", &mut x.tuning_ref)?;
        e.take("contrast.bands", &mut x.contrast_bands)?;
        e.take("contrast.fmin", &mut x.contrast_fmin)?;
        e.take("map.height", &mut x.map_height)?;
        e.take("map.width", &mut x.map_width)?;
        e.take_with("recipe", &mut x.recipe, |s| s.parse::<Recipe>().map_err(|e| e.to_string()))?;

        let v = &mut c.vmd;
        e.take("vmd.k", &mut v.k)?;
        e.take("vmd.alpha", &mut v.alpha)?;
        e.take("vmd.tau", &mut v.tau)?;
        e.take("vmd.tol", &mut v.tol)?;
        e.take("vmd.max_iter", &mut v.max_iter)?;
        e.take_with("vmd.omega_init", &mut v.omega_init, parse_omega_init)?;
        e.take("vmd.mirror_extend", &mut v.mirror_extend)?;

        e.take_with("search.k_grid", &mut c.k_grid, parse_list)?;
        e.take_with("search.alpha_grid", &mut c.alpha_grid, parse_list)?;
        e.take_with("search.patience", &mut c.stop.patience, parse_optional)?;
        e.take_with("search.target", &mut c.stop.target, parse_optional)?;
        e.take("search.test_fraction", &mut c.test_fraction)?;
        e.take("search.smote_first", &mut c.smote_first)?;

        let mut smote_on = c.smote.is_some();
        let mut smote_k = SmoteParams::default().k_neighbors;
        e.take("smote.enabled", &mut smote_on)?;
        e.take("smote.k_neighbors", &mut smote_k)?;

        e.take("seed", &mut c.seed)?;
        e.take_with("corpus.convention", &mut c.convention, |s| s.parse::<Convention>())?;
        e.take("corpus.seven_class", &mut c.seven_class)?;
        e.take("extract.pre_feature", &mut c.pre_feature)?;

        let mut kind = "softmax".to_string();
        e.take("scorer.kind", &mut kind)?;
        let (kind, foreign): (&'static str, Vec<&str>) = match kind.as_str() {
            "softmax" => ("softmax", [&KNN_KEYS[..], &EXTERNAL_KEYS].concat()),
            "knn" => ("knn", [&SOFTMAX_KEYS[..], &EXTERNAL_KEYS].concat()),
            "external" => ("external", [&SOFTMAX_KEYS[..], &KNN_KEYS].concat()),
            _ => return Err(bad("scorer.kind", &kind, "expected softmax, knn or external")),
        };
        if let Some(key) = foreign.into_iter().find(|k| e.map.contains_key(*k)) {
            return Err(ConfigError::NotApplicable {
                key: key.to_string(),
                kind,
            });
        }
        c.scorer = match kind {
            "softmax" => {
                let mut s = SoftmaxConfig::default();
                e.take("scorer.learning_rate", &mut s.learning_rate)?;
                e.take("scorer.epochs", &mut s.epochs)?;
                e.take("scorer.batch", &mut s.batch)?;
                e.take("scorer.l2", &mut s.l2)?;
                ScorerSpec::Softmax(s)
            }
            "knn" => {
                let mut s = KnnConfig::default();
                e.take("scorer.k", &mut s.k)?;
                ScorerSpec::Knn(s)
            }
            _ => {
                let mut s = ExternalConfig {
                    command: String::new(),
                    timeout_s: 3600.0,
                };
                e.take("scorer.command", &mut s.command)?;
                e.take("scorer.timeout_s", &mut s.timeout_s)?;
                ScorerSpec::External(s)
            }
        };

        if let Some(key) = e.map.keys().next() {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        c.smote = smote_on.then_some(SmoteParams {
            k_neighbors: smote_k,
            seed: 0,
        });
        c.apply_seed(c.seed);
        c.validate()?;
        Ok(c)
    }

    /// Propagate the global seed into the components that draw random numbers.
    pub fn apply_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let Some(s) = &mut self.smote {
            s.seed = seed;
        }
        if let ScorerSpec::Softmax(s) = &mut self.scorer {
            s.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.extract.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.vmd.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.stop.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return invalid("search.k_grid must be non-empty with K >= 1".into());
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return invalid("search.alpha_grid must be non-empty with finite alpha >= 0".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return invalid("search.test_fraction must lie strictly between 0 and 1".into());
        }
        if self.smote.is_some_and(|s| s.k_neighbors == 0) {
            return invalid("smote.k_neighbors must be at least 1".into());
        }
        match &self.scorer {
            ScorerSpec::Softmax(s) => {
                if !(s.learning_rate > 0.0 && s.learning_rate.is_finite()) {
                    return invalid("scorer.learning_rate must be positive".into());
                }
                if s.epochs == 0 || s.batch == 0 {
                    return invalid("scorer.epochs and scorer.batch must be at least 1".into());
                }
                if !(s.l2 >= 0.0 && s.l2.is_finite()) {
                    return invalid("scorer.l2 must be non-negative".into());
                }
            }
            ScorerSpec::Knn(s) => {
                if s.k == 0 {
                    return invalid("scorer.k must be at least 1".into());
                }
            }
            ScorerSpec::External(s) => {
                if s.command.trim().is_empty() {
                    return invalid("scorer.command must be set for the external scorer".into());
                }
                if !(s.timeout_s > 0.0 && s.timeout_s.is_finite()) {
                    return invalid("scorer.timeout_s must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// Every effective key, one per line, in a fixed order.
    pub fn dump(&self) -> String {
        let mut o = String::new();
        let x = &self.extract;
        let mut line = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        line("sample_rate", x.sample_rate.to_string());
        line("duration_s", x.duration_s.to_string());
        line("n_fft", x.n_fft.to_string());
        line("hop", x.hop.to_string());
        line("n_mels", x.n_mels.to_string());
        line("fmin", x.fmin.to_string());
        line("fmax", opt(x.fmax));
        line("n_mfcc", x.n_mfcc.to_string());
        line("tuning_ref", x.tuning_ref.to_string());
        line("contrast.bands", x.contrast_bands.to_string());
        line("contrast.fmin", x.contrast_fmin.to_string());
        line("map.height", x.map_height.to_string());
        line("map.width", x.map_width.to_string());
        line("recipe", x.recipe.to_string());
        let v = &self.vmd;
        line("vmd.k", v.k.to_string());
        line("vmd.alpha", v.alpha.to_string());
        line("vmd.tau", v.tau.to_string());
        line("vmd.tol", v.tol.to_string());
        line("vmd.max_iter", v.max_iter.to_string());
        line("vmd.omega_init", omega_init_name(v.omega_init));
        line("vmd.mirror_extend", v.mirror_extend.to_string());
        line("search.k_grid", join(&self.k_grid));
        line("search.alpha_grid", join(&self.alpha_grid));
        line("search.patience", opt(self.stop.patience));
        line("search.target", opt(self.stop.target));
        line("search.test_fraction", self.test_fraction.to_string());
        line("search.smote_first", self.smote_first.to_string());
        line("smote.enabled", self.smote.is_some().to_string());
        line(
            "smote.k_neighbors",
            self.smote.unwrap_or_default().k_neighbors.to_string(),
        );
        line("seed", self.seed.to_string());
        line("corpus.convention", self.convention.to_string());
        line("corpus.seven_class", self.seven_class.to_string());
        line("extract.pre_feature", self.pre_feature.to_string());
        line("scorer.kind", self.scorer.kind().to_string());
        match &self.scorer {
            ScorerSpec::Softmax(s) => {
                line("scorer.learning_rate", s.learning_rate.to_string());
                line("scorer.epochs", s.epochs.to_string());
                line("scorer.batch", s.batch.to_string());
                line("scorer.l2", s.l2.to_string());
            }
            ScorerSpec::Knn(s) => line("scorer.k", s.k.to_string()),
            ScorerSpec::External(s) => {
                line("scorer.command", s.command.clone());
                line("scorer.timeout_s", s.timeout_s.to_string());
            }
        }
        o
    }
}
