//! Chat-style language model backends: a rule table, a replay fixture and
//! an OpenAI-compatible chat-completion client.
//!
//! Every request carries both a rendered prompt (what a live model sees) and
//! a structured query (what the rule table consults). Fixtures and caches are
//! keyed by the hash of `{task, prompt}`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{request_hash, BackendError, FixtureStore, HttpConfig, HttpTransport, Method, Recording};
use crate::ids::normalize_surface;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum LlmQuery {
    SdohType { term: String },
    SdohSubtype { term: String, sdoh_type: String },
    Relation { bio: String, sdoh: String },
}

impl LlmQuery {
    pub fn task(&self) -> &'static str {
        match self {
            LlmQuery::SdohType { .. } => "sdoh_type",
            LlmQuery::SdohSubtype { .. } => "sdoh_subtype",
            LlmQuery::Relation { .. } => "relation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmRequest {
    pub query: LlmQuery,
    pub prompt: String,
}

impl LlmRequest {
    pub fn hash(&self) -> String {
        request_hash(&json!({ "task": self.query.task(), "prompt": self.prompt }))
    }
}

pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;
    /// Returns the raw text of the model's answer.
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError>;
}

impl<T: LlmBackend + ?Sized> LlmBackend for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

impl<T: LlmBackend + ?Sized> LlmBackend for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SdohRule {
    #[serde(rename = "type")]
    pub sdoh_type: String,
    #[serde(default)]
    pub subtype: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationRule {
    pub bio: String,
    pub sdoh: String,
    pub label: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RuleFile {
    #[serde(default)]
    pub sdoh: HashMap<String, SdohRule>,
    #[serde(default)]
    pub relations: Vec<RelationRule>,
    #[serde(default)]
    pub default_relation: Option<String>,
}

/// Answers from a fixed lookup table. Unknown SDoH terms are answered with
/// `NONE`; unknown pairs with `default_relation` (or `no_relation`).
#[derive(Debug, Clone)]
pub struct RuleLlm {
    sdoh: HashMap<String, SdohRule>,
    relations: HashMap<(String, String), String>,
    default_relation: String,
}

impl RuleLlm {
    pub fn new(rules: RuleFile) -> Self {
        Self {
            sdoh: rules
                .sdoh
                .into_iter()
                .map(|(k, v)| (normalize_surface(&k), v))
                .collect(),
            relations: rules
                .relations
                .into_iter()
                .map(|r| ((normalize_surface(&r.bio), normalize_surface(&r.sdoh)), r.label))
                .collect(),
            default_relation: rules.default_relation.unwrap_or_else(|| "no_relation".into()),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::io(format!("rules {}", path.display()), e))?;
        let rules: RuleFile =
            serde_json::from_str(&text).map_err(|e| BackendError::Parse(format!("{}: {e}", path.display())))?;
        Ok(Self::new(rules))
    }
}

impl LlmBackend for RuleLlm {
    fn name(&self) -> &str {
        "rules"
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        Ok(match &request.query {
            LlmQuery::SdohType { term } => self
                .sdoh
                .get(&normalize_surface(term))
                .map_or_else(|| "NONE".to_string(), |r| r.sdoh_type.clone()),
            LlmQuery::SdohSubtype { term, .. } => self
                .sdoh
                .get(&normalize_surface(term))
                .and_then(|r| r.subtype.clone())
                .unwrap_or_else(|| "NONE".to_string()),
            LlmQuery::Relation { bio, sdoh } => self
                .relations
                .get(&(normalize_surface(bio), normalize_surface(sdoh)))
                .cloned()
                .unwrap_or_else(|| self.default_relation.clone()),
        })
    }
}

/// Replays answers recorded under `LlmRequest::hash`.
pub struct FixtureLlm {
    store: FixtureStore,
}

impl FixtureLlm {
    pub fn new(store: FixtureStore) -> Self {
        Self { store }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        Ok(Self::new(FixtureStore::load(path)?))
    }
}

impl LlmBackend for FixtureLlm {
    fn name(&self) -> &str {
        "fixture"
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        let hash = request.hash();
        match self.store.get(&hash) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(other) => Err(BackendError::Parse(format!("fixture {hash}: expected a string, got {other}"))),
            None => Err(BackendError::FixtureMiss {
                hash,
                what: format!("{:?}", request.query),
            }),
        }
    }
}

pub struct RecordingLlm<B> {
    inner: B,
    recording: Arc<Recording>,
}

impl<B: LlmBackend> RecordingLlm<B> {
    pub fn new(inner: B, recording: Arc<Recording>) -> Self {
        Self { inner, recording }
    }
}

impl<B: LlmBackend> LlmBackend for RecordingLlm<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        let answer = self.inner.complete(request)?;
        self.recording.push(request.hash(), Value::String(answer.clone()));
        Ok(answer)
    }
}

/// OpenAI-style `POST {endpoint}` chat-completion client. Temperature is
/// fixed at 0; the API key is read from `config.api_key_env`.
pub struct ChatCompletionClient {
    transport: HttpTransport,
    model: String,
    system_prompt: String,
}

impl ChatCompletionClient {
    pub fn new(config: HttpConfig, model: impl Into<String>) -> Self {
        Self {
            transport: HttpTransport::new(config),
            model: model.into(),
            system_prompt: crate::extraction::prompt::SYSTEM_PROMPT.to_string(),
        }
    }

    pub fn request_body(&self, request: &LlmRequest) -> Value {
        json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                { "role": "system", "content": self.system_prompt },
                { "role": "user", "content": request.prompt },
            ],
        })
    }
}

pub fn parse_chat_response(body: &str) -> Result<String, BackendError> {
    let v: Value = serde_json::from_str(body).map_err(|e| BackendError::Parse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::Parse(format!("no choices[0].message.content in {body}")))
}

impl LlmBackend for ChatCompletionClient {
    fn name(&self) -> &str {
        &self.model
    }

    fn complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        let body = self.request_body(request);
        let mut headers = Vec::new();
        if let Some(key) = self.transport.config().api_key()? {
            headers.push(("Authorization", format!("Bearer {key}")));
        }
        let key = request_hash(&body);
        let endpoint = self.transport.config().endpoint.clone();
        let text = self.transport.send(&endpoint, Method::PostJson(&body), &headers, &key)?;
        parse_chat_response(&text)
    }
}
