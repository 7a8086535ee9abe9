//! Named-entity annotators: a dictionary matcher, a replay fixture and a
//! PubTator-compatible HTTP client, all speaking BioC-JSON at the boundary.

use std::path::Path;
use std::sync::Arc;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{request_hash, BackendError, FixtureStore, HttpConfig, HttpTransport, Method, Recording};
use crate::corpus::AbstractDoc;

/// One annotated span. Offsets are byte offsets into the abstract text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub text: String,
    pub entity_type: String,
    pub identifier: Option<String>,
    pub start: usize,
    pub end: usize,
}

pub trait NerBackend: Send + Sync {
    fn name(&self) -> &str;
    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError>;
}

impl<T: NerBackend + ?Sized> NerBackend for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
        (**self).annotate(doc)
    }
}

impl<T: NerBackend + ?Sized> NerBackend for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
        (**self).annotate(doc)
    }
}

/// The logical request for a document, hashed to key fixtures and caches.
pub fn ner_request(service: &str, doc: &AbstractDoc) -> Value {
    json!({ "service": service, "doc_id": doc.doc_id, "text": doc.abstract_text })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub surface: String,
    pub entity_type: String,
    pub identifier: Option<String>,
}

/// Case-insensitive whole-word dictionary matcher. Overlapping entries
/// resolve to the longest match at the leftmost position.
#[derive(Debug, Clone)]
pub struct LexiconNer {
    name: String,
    entries: Vec<LexiconEntry>,
    pattern: Option<Regex>,
}

impl LexiconNer {
    pub fn new(name: impl Into<String>, mut entries: Vec<LexiconEntry>) -> Self {
        entries.sort_by(|a, b| {
            b.surface
                .len()
                .cmp(&a.surface.len())
                .then_with(|| a.surface.to_lowercase().cmp(&b.surface.to_lowercase()))
        });
        entries.dedup_by(|a, b| a.surface.eq_ignore_ascii_case(&b.surface));
        let pattern = (!entries.is_empty()).then(|| {
            let alts: Vec<String> = entries.iter().map(|e| regex::escape(&e.surface)).collect();
            Regex::new(&format!(r"(?i)\b(?:{})\b", alts.join("|"))).expect("escaped lexicon compiles")
        });
        Self {
            name: name.into(),
            entries,
            pattern,
        }
    }

    /// Parses `surface \t type [\t identifier]` lines; `#` starts a comment.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, BackendError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t').map(str::trim);
            let surface = cols.next().unwrap_or_default();
            let entity_type = cols.next().unwrap_or_default();
            if surface.is_empty() || entity_type.is_empty() {
                return Err(BackendError::Parse(format!(
                    "lexicon line {}: expected surface<TAB>type[<TAB>identifier]",
                    i + 1
                )));
            }
            let identifier = cols.next().filter(|s| !s.is_empty()).map(str::to_string);
            entries.push(LexiconEntry {
                surface: surface.to_string(),
                entity_type: entity_type.to_string(),
                identifier,
            });
        }
        Ok(Self::new(name, entries))
    }

    pub fn from_file(name: impl Into<String>, path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::io(format!("lexicon {}", path.display()), e))?;
        Self::parse(name, &text)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    fn lookup(&self, surface: &str) -> Option<&LexiconEntry> {
        self.entries.iter().find(|e| e.surface.eq_ignore_ascii_case(surface))
    }
}

impl NerBackend for LexiconNer {
    fn name(&self) -> &str {
        &self.name
    }

    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
        let Some(re) = &self.pattern else {
            return Ok(Vec::new());
        };
        let text = &doc.abstract_text;
        Ok(re
            .find_iter(text)
            .filter_map(|m| {
                let entry = self.lookup(m.as_str())?;
                Some(Annotation {
                    text: m.as_str().to_string(),
                    entity_type: entry.entity_type.clone(),
                    identifier: entry.identifier.clone(),
                    start: m.start(),
                    end: m.end(),
                })
            })
            .collect())
    }
}

/// Renders annotations of an abstract as a one-passage BioC-JSON document.
pub fn to_bioc(doc: &AbstractDoc, annotations: &[Annotation]) -> Value {
    let anns: Vec<Value> = annotations
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut infons = json!({ "type": a.entity_type });
            if let Some(id) = &a.identifier {
                infons["identifier"] = json!(id);
            }
            json!({
                "id": i.to_string(),
                "infons": infons,
                "text": a.text,
                "locations": [{ "offset": a.start, "length": a.end - a.start }],
            })
        })
        .collect();
    json!({
        "id": doc.doc_id,
        "passages": [{
            "infons": { "type": "abstract" },
            "offset": 0,
            "text": doc.abstract_text,
            "annotations": anns,
        }],
    })
}

/// Extracts abstract-passage annotations for `doc` from a BioC-JSON payload.
/// Accepts a bare document, a `{"documents": [...]}` collection or the
/// PubTator3 export wrapper. Title passages are skipped and offsets are
/// rebased onto the abstract.
pub fn parse_bioc(value: &Value, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
    let parse_err = |m: &str| BackendError::Parse(format!("BioC for {}: {m}", doc.doc_id));
    let documents: Vec<&Value> = if let Some(arr) = value
        .get("PubTator3")
        .or_else(|| value.get("documents"))
        .and_then(Value::as_array)
    {
        arr.iter().collect()
    } else if value.get("passages").is_some() {
        vec![value]
    } else {
        return Err(parse_err("no documents"));
    };
    let document = documents
        .iter()
        .find(|d| d.get("id").and_then(Value::as_str) == Some(doc.doc_id.as_str()))
        .or(documents.first())
        .ok_or_else(|| parse_err("empty document list"))?;
    let passages = document
        .get("passages")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing passages"))?;

    let single = passages.len() == 1;
    let mut out = Vec::new();
    for p in passages {
        let kind = p
            .pointer("/infons/type")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_ascii_lowercase();
        if !(kind == "abstract" || (single && kind != "title")) {
            continue;
        }
        let base = p.get("offset").and_then(Value::as_u64).unwrap_or(0) as usize;
        for a in p.get("annotations").and_then(Value::as_array).into_iter().flatten() {
            let text = a.get("text").and_then(Value::as_str).unwrap_or_default();
            let entity_type = a
                .pointer("/infons/type")
                .and_then(Value::as_str)
                .unwrap_or_default();
            let identifier = a
                .pointer("/infons/identifier")
                .and_then(Value::as_str)
                .filter(|s| !s.is_empty() && *s != "-")
                .map(str::to_string);
            for loc in a.get("locations").and_then(Value::as_array).into_iter().flatten() {
                let offset = loc.get("offset").and_then(Value::as_u64).ok_or_else(|| parse_err("location offset"))?;
                let length = loc.get("length").and_then(Value::as_u64).ok_or_else(|| parse_err("location length"))?;
                let start = (offset as usize)
                    .checked_sub(base)
                    .ok_or_else(|| BackendError::Annotation {
                        doc_id: doc.doc_id.clone(),
                        message: format!("annotation {text:?} starts before its passage"),
                    })?;
                out.push(Annotation {
                    text: text.to_string(),
                    entity_type: entity_type.to_string(),
                    identifier: identifier.clone(),
                    start,
                    end: start + length as usize,
                });
            }
        }
    }
    Ok(out)
}

/// Replays BioC responses recorded under `ner_request` hashes.
pub struct FixtureNer {
    name: String,
    service: String,
    store: FixtureStore,
}

impl FixtureNer {
    pub fn new(name: impl Into<String>, service: impl Into<String>, store: FixtureStore) -> Self {
        Self {
            name: name.into(),
            service: service.into(),
            store,
        }
    }

    pub fn load(name: impl Into<String>, service: impl Into<String>, path: impl AsRef<Path>) -> Result<Self, BackendError> {
        Ok(Self::new(name, service, FixtureStore::load(path)?))
    }
}

impl NerBackend for FixtureNer {
    fn name(&self) -> &str {
        &self.name
    }

    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
        let hash = request_hash(&ner_request(&self.service, doc));
        let response = self.store.get(&hash).ok_or_else(|| BackendError::FixtureMiss {
            hash,
            what: format!("{} annotations for {}", self.service, doc.doc_id),
        })?;
        parse_bioc(response, doc)
    }
}

/// Wraps a backend and records its outputs as BioC fixtures.
pub struct RecordingNer<B> {
    inner: B,
    service: String,
    recording: Arc<Recording>,
}

impl<B: NerBackend> RecordingNer<B> {
    pub fn new(inner: B, service: impl Into<String>, recording: Arc<Recording>) -> Self {
        Self {
            inner,
            service: service.into(),
            recording,
        }
    }
}

impl<B: NerBackend> NerBackend for RecordingNer<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
        let anns = self.inner.annotate(doc)?;
        let hash = request_hash(&ner_request(&self.service, doc));
        self.recording.push(hash, to_bioc(doc, &anns));
        Ok(anns)
    }
}

/// PubTator 3 client: fetches BioC-JSON annotations by PubMed id from
/// `{endpoint}/publications/export/biocjson?pmids=<doc_id>`.
pub struct PubTatorClient {
    transport: HttpTransport,
}

impl PubTatorClient {
    pub const SERVICE: &'static str = "pubtator";

    pub fn new(config: HttpConfig) -> Self {
        Self {
            transport: HttpTransport::new(config),
        }
    }
}

impl NerBackend for PubTatorClient {
    fn name(&self) -> &str {
        Self::SERVICE
    }

    fn annotate(&self, doc: &AbstractDoc) -> Result<Vec<Annotation>, BackendError> {
        let endpoint = self.transport.config().endpoint.trim_end_matches('/');
        let url = format!("{endpoint}/publications/export/biocjson?pmids={}", doc.doc_id);
        let key = request_hash(&ner_request(Self::SERVICE, doc));
        let body = self
            .transport
            .send(&url, Method::Get, &[], &key)
            .map_err(|e| BackendError::Annotation {
                doc_id: doc.doc_id.clone(),
                message: e.to_string(),
            })?;
        let value: Value = serde_json::from_str(&body).map_err(|e| BackendError::Parse(e.to_string()))?;
        parse_bioc(&value, doc)
    }
}
