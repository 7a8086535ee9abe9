//! TOML run configuration.
//!
//! Relative paths resolve against the directory holding the config file.
//! Only API keys come from the environment, by variable name.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sdohkg::backend::HttpConfig;
use sdohkg::gnn::ModelConfig;
use sdohkg::linkpred::{self, DEFAULT_MASK_FRACTION, DEFAULT_NEGATIVES, DEFAULT_TOP_N};
use sdohkg::relation::DEFAULT_THRESHOLD;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

/// One problem with one field, e.g. `paths.corpus: file not found`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    pub taxonomy: Option<PathBuf>,
    pub bio_lexicon: Option<PathBuf>,
    pub sdoh_lexicon: Option<PathBuf>,
    pub llm_rules: Option<PathBuf>,
    pub ner_fixture: Option<PathBuf>,
    pub llm_fixture: Option<PathBuf>,
    pub umls_fixture: Option<PathBuf>,
    pub cui_xref: Option<PathBuf>,
    pub mesh_omim_to_mondo: Option<PathBuf>,
    pub mesh_to_drugbank: Option<PathBuf>,
    pub primekg: Option<PathBuf>,
    pub validated_edges: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            corpus: PathBuf::new(),
            output_dir: PathBuf::from("out"),
            taxonomy: None,
            bio_lexicon: None,
            sdoh_lexicon: None,
            llm_rules: None,
            ner_fixture: None,
            llm_fixture: None,
            umls_fixture: None,
            cui_xref: None,
            mesh_omim_to_mondo: None,
            mesh_to_drugbank: None,
            primekg: None,
            validated_edges: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NerKind {
    Lexicon,
    Fixture,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LlmKind {
    Rules,
    Fixture,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UmlsKind {
    None,
    Fixture,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Backends {
    pub bio_ner: NerKind,
    /// Candidate SDoH spans; only lexicon and fixture make sense here.
    pub sdoh_ner: NerKind,
    pub llm: LlmKind,
    pub umls: UmlsKind,
    /// Wrap the live backends and write what they answered to
    /// `<output_dir>/recorded/`.
    pub record: bool,
}

impl Default for Backends {
    fn default() -> Self {
        Self {
            bio_ner: NerKind::Lexicon,
            sdoh_ner: NerKind::Lexicon,
            llm: LlmKind::Rules,
            umls: UmlsKind::Fixture,
            record: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Http {
    pub pubtator: HttpConfig,
    pub llm: HttpConfig,
    pub llm_model: String,
    pub umls: HttpConfig,
}

impl Default for Http {
    fn default() -> Self {
        Self {
            pubtator: HttpConfig {
                endpoint: "https://www.ncbi.nlm.nih.gov/research/pubtator3-api".into(),
                ..HttpConfig::default()
            },
            llm: HttpConfig {
                endpoint: "https://api.openai.com/v1".into(),
                api_key_env: Some("OPENAI_API_KEY".into()),
                ..HttpConfig::default()
            },
            llm_model: "gpt-4o".into(),
            umls: HttpConfig {
                endpoint: "https://uts-ws.nlm.nih.gov/rest".into(),
                api_key_env: Some("UMLS_API_KEY".into()),
                ..HttpConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Merge {
    /// Id of the node the subgraph is grown around, e.g. `mondo:4975`.
    pub center: String,
    pub hops: usize,
}

impl Default for Merge {
    fn default() -> Self {
        Self {
            center: "mondo:4975".into(),
            hops: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Eval {
    pub mask_fraction: f64,
    pub negatives: usize,
    pub seeds: Vec<u64>,
    /// Relations for `eval-random`; defaults to the seven of the results table.
    pub relations: Vec<String>,
    pub genes: Vec<String>,
    pub top_n: usize,
}

impl Default for Eval {
    fn default() -> Self {
        Self {
            mask_fraction: DEFAULT_MASK_FRACTION,
            negatives: DEFAULT_NEGATIVES,
            seeds: (0..linkpred::DEFAULT_REPEATS as u64).collect(),
            relations: linkpred::TABLE3_RELATIONS.iter().map(|(_, r)| r.to_string()).collect(),
            genes: linkpred::AD_GENES.iter().map(|g| g.to_string()).collect(),
            top_n: DEFAULT_TOP_N,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed of the full-graph model used by `train` and `predict`.
    pub seed: u64,
    pub threshold: f64,
    pub paths: Paths,
    pub backends: Backends,
    pub http: Http,
    pub merge: Merge,
    pub model: ModelConfig,
    pub eval: Eval,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            paths: Paths::default(),
            backends: Backends::default(),
            http: Http::default(),
            merge: Merge::default(),
            model: ModelConfig::default(),
            eval: Eval::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text, path)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Makes every relative path relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        fix(&mut p.corpus);
        fix(&mut p.output_dir);
        for opt in [
            &mut p.taxonomy,
            &mut p.bio_lexicon,
            &mut p.sdoh_lexicon,
            &mut p.llm_rules,
            &mut p.ner_fixture,
            &mut p.llm_fixture,
            &mut p.umls_fixture,
            &mut p.cui_xref,
            &mut p.mesh_omim_to_mondo,
            &mut p.mesh_to_drugbank,
            &mut p.primekg,
            &mut p.validated_edges,
        ] {
            if let Some(path) = opt {
                fix(path);
            }
        }
        for http in [&mut self.http.pubtator, &mut self.http.llm, &mut self.http.umls] {
            if let Some(dir) = &mut http.cache_dir {
                fix(dir);
            }
        }
    }

    /// Checks every field; all problems are reported together.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut err = |field: &str, message: String| {
            errs.push(FieldError {
                field: field.into(),
                message,
            })
        };
        let p = &self.paths;
        let mut need = |field: &str, path: Option<&PathBuf>, why: &str| {
            if let Some(message) = missing_file(path, why) {
                err(field, message);
            }
        };
        need("paths.corpus", Some(&p.corpus).filter(|c| !c.as_os_str().is_empty()), "");
        for (field, path) in [
            ("paths.taxonomy", &p.taxonomy),
            ("paths.primekg", &p.primekg),
            ("paths.mesh_omim_to_mondo", &p.mesh_omim_to_mondo),
            ("paths.mesh_to_drugbank", &p.mesh_to_drugbank),
            ("paths.cui_xref", &p.cui_xref),
            ("paths.validated_edges", &p.validated_edges),
        ] {
            if path.is_some() {
                need(field, path.as_ref(), "");
            }
        }
        let b = &self.backends;
        if b.bio_ner == NerKind::Lexicon {
            need("paths.bio_lexicon", p.bio_lexicon.as_ref(), "when backends.bio_ner = \"lexicon\"");
        }
        if b.sdoh_ner == NerKind::Lexicon {
            need("paths.sdoh_lexicon", p.sdoh_lexicon.as_ref(), "when backends.sdoh_ner = \"lexicon\"");
        }
        if b.bio_ner == NerKind::Fixture || b.sdoh_ner == NerKind::Fixture {
            need("paths.ner_fixture", p.ner_fixture.as_ref(), "when an NER backend is \"fixture\"");
        }
        if b.llm == LlmKind::Rules {
            need("paths.llm_rules", p.llm_rules.as_ref(), "when backends.llm = \"rules\"");
        }
        if b.llm == LlmKind::Fixture {
            need("paths.llm_fixture", p.llm_fixture.as_ref(), "when backends.llm = \"fixture\"");
        }
        if b.umls == UmlsKind::Fixture {
            need("paths.umls_fixture", p.umls_fixture.as_ref(), "when backends.umls = \"fixture\"");
        }
        if b.sdoh_ner == NerKind::Http {
            err("backends.sdoh_ner", "must be \"lexicon\" or \"fixture\"".into());
        }
        if !(self.threshold >= 0.0 && self.threshold < 1.0) {
            err("threshold", format!("{} is outside [0, 1)", self.threshold));
        }
        if let Err(e) = self.model.validate() {
            err("model", e.to_string());
        }
        if self.merge.center.parse::<sdohkg::NamespacedId>().is_err() {
            err("merge.center", format!("{:?} is not a namespace:id", self.merge.center));
        }
        if self.merge.hops == 0 {
            err("merge.hops", "must be at least 1".into());
        }
        let e = &self.eval;
        if !(e.mask_fraction > 0.0 && e.mask_fraction < 1.0) {
            err("eval.mask_fraction", format!("{} is outside (0, 1)", e.mask_fraction));
        }
        if e.negatives == 0 {
            err("eval.negatives", "must be at least 1".into());
        }
        if e.seeds.len() < 2 {
            err("eval.seeds", "the paired test needs at least 2 seeds".into());
        }
        if e.relations.is_empty() {
            err("eval.relations", "must not be empty".into());
        }
        if e.top_n == 0 {
            err("eval.top_n", "must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

fn missing_file(path: Option<&PathBuf>, why: &str) -> Option<String> {
    match path {
        None => Some(format!("required {why}").trim_end().to_string()),
        Some(path) if !path.is_file() => Some(format!("file not found: {}", path.display())),
        Some(_) => None,
    }
}
