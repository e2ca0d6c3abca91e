//! Layered pipeline configuration: TOML file, then `QC_*` environment
//! variables, then command-line flags, later layers overriding earlier
//! ones. Service credentials also come from the conventional
//! `RERANKER_URL`/`RERANKER_TOKEN` and `LLM_URL`/`LLM_API_KEY` variables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::LossKind;
use crate::error::{Error, Result};
use crate::retrieval::Bm25Params;
use crate::tokenize::{ContextBudget, DigitMode, Grouping, DEFAULT_GROUP_SIZE};

/// Which pair scorer backs the rerank stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScorerKind {
    /// Deterministic lexical-overlap scorer; the offline default.
    #[default]
    LexicalOracle,
    /// External cross-encoder service.
    HttpCrossEncoder,
}

impl std::str::FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lexical-oracle" | "lexical" => Ok(ScorerKind::LexicalOracle),
            "http-cross-encoder" | "http" => Ok(ScorerKind::HttpCrossEncoder),
            other => Err(Error::config(format!(
                "unknown scorer '{other}' (expected lexical-oracle or http-cross-encoder)"
            ))),
        }
    }
}

/// Full pipeline configuration. Field defaults are the documented
/// defaults of each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    // Artifact paths.
    pub claims: PathBuf,
    pub evidence: PathBuf,
    pub index_dir: PathBuf,
    pub cache: PathBuf,
    pub model: PathBuf,
    pub reports_dir: PathBuf,

    // Retrieval.
    pub k: usize,
    pub k1: f64,
    pub b: f64,
    pub remove_stopwords: bool,
    pub light_stemming: bool,

    // Selection and assembly.
    pub m: usize,
    pub digit_mode: Grouping,
    pub digit_group_size: usize,
    pub context_budget: usize,

    // Training.
    pub loss: LossKind,
    pub gamma: f64,
    /// Per-class focal alphas; empty means inverse class frequency.
    pub alpha: Vec<f64>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,

    // Prediction.
    pub prior_bias_alpha: f64,

    // Run control.
    pub seed: u64,
    pub offline: bool,
    pub max_in_flight: usize,
    pub retry_attempts: u32,
    pub timeout_ms: u64,

    // Services.
    pub scorer: ScorerKind,
    pub reranker_url: Option<String>,
    pub reranker_token: Option<String>,
    pub llm_url: Option<String>,
    pub llm_api_key: Option<String>,
    pub llm_model: String,
    pub nli_url: Option<String>,
    /// Send ablation cells to the NLI server instead of the linear model.
    pub use_nli_server: bool,

    // Decomposition prompt; the sampling defaults are pinned and only
    // change when overridden here.
    pub decompose_template: Option<String>,
    pub decompose_temperature: Option<f64>,
    pub decompose_frequency_penalty: Option<f64>,
    pub decompose_presence_penalty: Option<f64>,
    pub decompose_max_tokens: Option<u32>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            claims: PathBuf::from("claims.jsonl"),
            evidence: PathBuf::from("evidence.jsonl"),
            index_dir: PathBuf::from("index"),
            cache: PathBuf::from("decompose_cache.jsonl"),
            model: PathBuf::from("model.bin"),
            reports_dir: PathBuf::from("reports"),
            k: 50,
            k1: 1.2,
            b: 0.75,
            remove_stopwords: false,
            light_stemming: false,
            m: 1,
            digit_mode: Grouping::None,
            digit_group_size: DEFAULT_GROUP_SIZE,
            context_budget: 256,
            loss: LossKind::CrossEntropy,
            gamma: 2.0,
            alpha: Vec::new(),
            learning_rate: 0.1,
            max_epochs: 200,
            patience: 2,
            batch_size: 32,
            prior_bias_alpha: 0.0,
            seed: 42,
            offline: false,
            max_in_flight: 4,
            retry_attempts: 3,
            timeout_ms: 30_000,
            scorer: ScorerKind::default(),
            reranker_url: None,
            reranker_token: None,
            llm_url: None,
            llm_api_key: None,
            llm_model: "gpt-4o-mini".to_string(),
            nli_url: None,
            use_nli_server: false,
            decompose_template: None,
            decompose_temperature: None,
            decompose_frequency_penalty: None,
            decompose_presence_penalty: None,
            decompose_max_tokens: None,
        }
    }
}

impl PipelineConfig {
    /// Load defaults, then the TOML file (if given), then the environment.
    /// CLI flags are applied afterwards by the caller.
    pub fn load(file: Option<&Path>) -> Result<Self> {
        let mut config = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::config(format!("cannot read config file {}: {e}", path.display()))
                })?;
                let config: PipelineConfig = toml::from_str(&text).map_err(|e| {
                    Error::config(format!("invalid config file {}: {e}", path.display()))
                })?;
                config
            }
            None => PipelineConfig::default(),
        };
        config.apply_env(&std::env::vars().collect())?;
        Ok(config)
    }

    /// Overlay environment variables. `QC_<FIELD>` mirrors each scalar
    /// field; service endpoints use their conventional names.
    pub fn apply_env(&mut self, vars: &BTreeMap<String, String>) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| Error::config(format!("invalid {key}='{value}': {e}")))
        }

        for (key, value) in vars {
            match key.as_str() {
                "QC_CLAIMS" => self.claims = PathBuf::from(value),
                "QC_EVIDENCE" => self.evidence = PathBuf::from(value),
                "QC_INDEX_DIR" => self.index_dir = PathBuf::from(value),
                "QC_CACHE" => self.cache = PathBuf::from(value),
                "QC_MODEL" => self.model = PathBuf::from(value),
                "QC_REPORTS_DIR" => self.reports_dir = PathBuf::from(value),
                "QC_K" => self.k = parse(key, value)?,
                "QC_K1" => self.k1 = parse(key, value)?,
                "QC_B" => self.b = parse(key, value)?,
                "QC_M" => self.m = parse(key, value)?,
                "QC_DIGIT_MODE" => self.digit_mode = value.parse()?,
                "QC_DIGIT_GROUP_SIZE" => self.digit_group_size = parse(key, value)?,
                "QC_CONTEXT_BUDGET" => self.context_budget = parse(key, value)?,
                "QC_LOSS" => self.loss = value.parse()?,
                "QC_GAMMA" => self.gamma = parse(key, value)?,
                "QC_LEARNING_RATE" => self.learning_rate = parse(key, value)?,
                "QC_MAX_EPOCHS" => self.max_epochs = parse(key, value)?,
                "QC_PATIENCE" => self.patience = parse(key, value)?,
                "QC_BATCH_SIZE" => self.batch_size = parse(key, value)?,
                "QC_PRIOR_BIAS_ALPHA" => self.prior_bias_alpha = parse(key, value)?,
                "QC_SEED" => self.seed = parse(key, value)?,
                "QC_OFFLINE" => self.offline = parse(key, value)?,
                "QC_MAX_IN_FLIGHT" => self.max_in_flight = parse(key, value)?,
                "QC_RETRY_ATTEMPTS" => self.retry_attempts = parse(key, value)?,
                "QC_TIMEOUT_MS" => self.timeout_ms = parse(key, value)?,
                "QC_SCORER" => self.scorer = value.parse()?,
                "QC_LLM_MODEL" => self.llm_model = value.clone(),
                "RERANKER_URL" => self.reranker_url = Some(value.clone()),
                "RERANKER_TOKEN" => self.reranker_token = Some(value.clone()),
                "LLM_URL" => self.llm_url = Some(value.clone()),
                "LLM_API_KEY" => self.llm_api_key = Some(value.clone()),
                "QC_NLI_URL" | "NLI_URL" => self.nli_url = Some(value.clone()),
                "QC_USE_NLI_SERVER" => self.use_nli_server = parse(key, value)?,
                _ => {}
            }
        }
        Ok(())
    }

    /// Check cross-field invariants. Runs before any work.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k must be >= 1"));
        }
        if !(1..=3).contains(&self.m) {
            return Err(Error::config(format!(
                "m must be in [1, 3], got {}",
                self.m
            )));
        }
        if self.k < self.m {
            return Err(Error::config(format!(
                "k ({}) must be >= m ({})",
                self.k, self.m
            )));
        }
        if self.digit_group_size == 0 {
            return Err(Error::config("digit group size must be >= 1"));
        }
        if self.context_budget == 0 {
            return Err(Error::config("context budget must be >= 1"));
        }
        if !self.alpha.is_empty() && self.alpha.len() != 3 {
            return Err(Error::config(format!(
                "alpha must have exactly 3 entries, got {}",
                self.alpha.len()
            )));
        }
        if self.offline && self.use_nli_server {
            return Err(Error::config(
                "offline mode conflicts with the NLI server path",
            ));
        }
        self.bm25_params().validate()?;
        self.train_config()?.validate()?;
        Ok(())
    }

    pub fn digit_mode(&self) -> Result<DigitMode> {
        DigitMode::new(self.digit_mode, self.digit_group_size)
    }

    pub fn context_budget(&self) -> Result<ContextBudget> {
        ContextBudget::new(self.context_budget)
    }

    pub fn bm25_params(&self) -> Bm25Params {
        Bm25Params {
            k1: self.k1,
            b: self.b,
        }
    }

    pub fn text_options(&self) -> crate::retrieval::TextOptions {
        crate::retrieval::TextOptions {
            remove_stopwords: self.remove_stopwords,
            light_stemming: self.light_stemming,
        }
    }

    pub fn http_policy(&self) -> crate::http::HttpPolicy {
        crate::http::HttpPolicy {
            attempts: self.retry_attempts.max(1),
            base_backoff: std::time::Duration::from_millis(100),
            timeout: std::time::Duration::from_millis(self.timeout_ms),
        }
    }

    /// Prompt template and sampling parameters for claim decomposition.
    pub fn decompose_prompt(&self) -> Result<crate::decompose::DecomposePrompt> {
        let mut prompt = crate::decompose::DecomposePrompt::default();
        if let Some(template) = &self.decompose_template {
            if !template.contains("{claim}") {
                return Err(Error::config(
                    "decompose_template must contain a {claim} slot",
                ));
            }
            prompt.template = template.clone();
        }
        if let Some(v) = self.decompose_temperature {
            prompt.temperature = v;
        }
        if let Some(v) = self.decompose_frequency_penalty {
            prompt.frequency_penalty = v;
        }
        if let Some(v) = self.decompose_presence_penalty {
            prompt.presence_penalty = v;
        }
        if let Some(v) = self.decompose_max_tokens {
            prompt.max_tokens = v;
        }
        Ok(prompt)
    }

    pub fn train_config(&self) -> Result<crate::classify::TrainConfig> {
        let alpha = if self.alpha.is_empty() {
            None
        } else {
            Some([self.alpha[0], self.alpha[1], self.alpha[2]])
        };
        Ok(crate::classify::TrainConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            patience: self.patience,
            batch_size: self.batch_size,
            loss: self.loss,
            gamma: self.gamma,
            alpha,
            seed: self.seed,
            mode: self.digit_mode()?,
            budget: self.context_budget()?,
        })
    }

    /// Stable hash of the canonical JSON form, recorded in run manifests.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", crate::classify::stable_hash(json.as_bytes()))
    }
}
