//! Shared plumbing for external annotation/LLM/terminology services:
//! request hashing, replay fixtures, recording, an on-disk response cache,
//! rate limiting and retrying HTTP transport.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("request to {url} failed: {message}")]
    Http { url: String, message: String },
    #[error("no recorded response for request {hash} ({what})")]
    FixtureMiss { hash: String, what: String },
    #[error("unparseable service response: {0}")]
    Parse(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("doc {doc_id}: {message}")]
    Annotation { doc_id: String, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl BackendError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }
}

/// Hex SHA-256 of the canonical JSON encoding of a request.
pub fn request_hash<T: Serialize>(request: &T) -> String {
    let bytes = serde_json::to_vec(request).expect("requests serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// One line of a replay fixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub request_hash: String,
    pub response: serde_json::Value,
}

/// Recorded responses keyed by request hash.
#[derive(Debug, Clone, Default)]
pub struct FixtureStore {
    entries: HashMap<String, serde_json::Value>,
}

impl FixtureStore {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| BackendError::io(format!("fixture {}", path.display()), e))?;
        let mut entries = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| BackendError::io(format!("fixture {}", path.display()), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry = serde_json::from_str(&line)
                .map_err(|e| BackendError::Parse(format!("{} line {}: {e}", path.display(), i + 1)))?;
            entries.insert(entry.request_hash, entry.response);
        }
        Ok(Self { entries })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        Self {
            entries: entries.into_iter().map(|e| (e.request_hash, e.response)).collect(),
        }
    }

    pub fn get(&self, hash: &str) -> Option<&serde_json::Value> {
        self.entries.get(hash)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Collects request/response pairs so a run can be replayed offline.
#[derive(Debug, Default)]
pub struct Recording {
    entries: Mutex<Vec<FixtureEntry>>,
}

impl Recording {
    pub fn push(&self, request_hash: String, response: serde_json::Value) {
        self.entries.lock().expect("recording lock").push(FixtureEntry {
            request_hash,
            response,
        });
    }

    /// Entries sorted by hash with duplicates dropped, so that the written
    /// file does not depend on call order.
    pub fn entries(&self) -> Vec<FixtureEntry> {
        let mut entries = self.entries.lock().expect("recording lock").clone();
        entries.sort_by(|a, b| a.request_hash.cmp(&b.request_hash));
        entries.dedup_by(|a, b| a.request_hash == b.request_hash);
        entries
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<(), BackendError> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        for e in self.entries() {
            serde_json::to_writer(&mut buf, &e).expect("entries serialize");
            buf.push(b'\n');
        }
        atomic_write(path, &buf).map_err(|e| BackendError::io(format!("write {}", path.display()), e))
    }
}

/// Writes to a temporary sibling and renames it into place.
pub fn atomic_write(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "tmp.{}.{:?}",
        std::process::id(),
        thread::current().id()
    ));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Response bodies stored as `<dir>/<hash>.json`, alongside the request body
/// in `<hash>.request.json`.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn get(&self, hash: &str) -> Option<String> {
        fs::read_to_string(self.dir.join(format!("{hash}.json"))).ok()
    }

    pub fn put(&self, hash: &str, request: &str, response: &str) -> std::io::Result<()> {
        atomic_write(&self.dir.join(format!("{hash}.request.json")), request.as_bytes())?;
        atomic_write(&self.dir.join(format!("{hash}.json")), response.as_bytes())
    }
}

/// Global request budget: at most `max_concurrency` calls in flight and at
/// least `min_interval` between call starts.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    max_concurrency: usize,
    state: Mutex<LimiterState>,
    cv: Condvar,
}

#[derive(Debug)]
struct LimiterState {
    in_flight: usize,
    next_start: Instant,
}

pub struct Permit<'a> {
    limiter: &'a RateLimiter,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut st = self.limiter.state.lock().expect("limiter lock");
        st.in_flight -= 1;
        self.limiter.cv.notify_one();
    }
}

impl RateLimiter {
    pub fn new(requests_per_second: f64, max_concurrency: usize) -> Self {
        let min_interval = if requests_per_second > 0.0 {
            Duration::from_secs_f64(1.0 / requests_per_second)
        } else {
            Duration::ZERO
        };
        Self {
            min_interval,
            max_concurrency: max_concurrency.max(1),
            state: Mutex::new(LimiterState {
                in_flight: 0,
                next_start: Instant::now(),
            }),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut st = self.state.lock().expect("limiter lock");
        while st.in_flight >= self.max_concurrency {
            st = self.cv.wait(st).expect("limiter lock");
        }
        st.in_flight += 1;
        let now = Instant::now();
        let start = st.next_start.max(now);
        st.next_start = start + self.min_interval;
        drop(st);
        if start > now {
            thread::sleep(start - now);
        }
        Permit { limiter: self }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the API key, if any.
    pub api_key_env: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub requests_per_second: f64,
    pub max_concurrency: usize,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            api_key_env: None,
            cache_dir: None,
            max_retries: 4,
            initial_backoff_ms: 500,
            requests_per_second: 3.0,
            max_concurrency: 4,
            timeout_secs: 60,
        }
    }
}

impl HttpConfig {
    pub fn api_key(&self) -> Result<Option<String>, BackendError> {
        match &self.api_key_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| BackendError::MissingApiKey(var.clone())),
        }
    }
}

/// Cached, rate-limited, retrying HTTP transport shared by the live
/// backends.
pub struct HttpTransport {
    config: HttpConfig,
    agent: ureq::Agent,
    limiter: RateLimiter,
    cache: Option<ResponseCache>,
}

pub enum Method<'a> {
    Get,
    PostJson(&'a serde_json::Value),
}

impl HttpTransport {
    pub fn new(config: HttpConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let limiter = RateLimiter::new(config.requests_per_second, config.max_concurrency);
        let cache = config.cache_dir.clone().map(ResponseCache::new);
        Self {
            config,
            agent,
            limiter,
            cache,
        }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    /// Sends a request, consulting the cache first. `cache_key` is the hash
    /// of the logical request.
    pub fn send(
        &self,
        url: &str,
        method: Method<'_>,
        headers: &[(&str, String)],
        cache_key: &str,
    ) -> Result<String, BackendError> {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(cache_key)) {
            return Ok(hit);
        }
        let request_log = match &method {
            Method::Get => serde_json::json!({ "method": "GET", "url": url }),
            Method::PostJson(body) => serde_json::json!({ "method": "POST", "url": url, "body": body }),
        };
        let body = retry_with_backoff(
            self.config.max_retries,
            Duration::from_millis(self.config.initial_backoff_ms),
            || {
                let _permit = self.limiter.acquire();
                self.send_once(url, &method, headers)
            },
        )?;
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put(cache_key, &request_log.to_string(), &body) {
                log::warn!("could not cache response {cache_key}: {e}");
            }
        }
        Ok(body)
    }

    fn send_once(&self, url: &str, method: &Method<'_>, headers: &[(&str, String)]) -> Attempt {
        let result = match method {
            Method::Get => {
                let mut req = self.agent.get(url);
                for (k, v) in headers {
                    req = req.header(*k, v.as_str());
                }
                req.call()
            }
            Method::PostJson(body) => {
                let mut req = self.agent.post(url);
                for (k, v) in headers {
                    req = req.header(*k, v.as_str());
                }
                req.send_json(body)
            }
        };
        let http_err = |message: String| BackendError::Http {
            url: url.to_string(),
            message,
        };
        match result {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                let text = resp.body_mut().read_to_string().map_err(|e| http_err(e.to_string()));
                match (status, text) {
                    (200..=299, Ok(body)) => Attempt::Ok(body),
                    (429 | 500..=599, _) => Attempt::Retry(http_err(format!("status {status}"))),
                    (_, Ok(body)) => Attempt::Fatal(http_err(format!("status {status}: {body}"))),
                    (_, Err(e)) => Attempt::Retry(e),
                }
            }
            Err(e) => Attempt::Retry(http_err(e.to_string())),
        }
    }
}

pub enum Attempt {
    Ok(String),
    Retry(BackendError),
    Fatal(BackendError),
}

/// Calls `f` until it succeeds, fails fatally, or `max_retries` retries are
/// used up. The delay doubles after each failed attempt.
pub fn retry_with_backoff<F>(max_retries: u32, initial: Duration, mut f: F) -> Result<String, BackendError>
where
    F: FnMut() -> Attempt,
{
    let mut delay = initial;
    let mut attempt = 0;
    loop {
        match f() {
            Attempt::Ok(body) => return Ok(body),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retry(e) if attempt >= max_retries => return Err(e),
            Attempt::Retry(e) => {
                log::warn!("retrying after error (attempt {}): {e}", attempt + 1);
                thread::sleep(delay);
                delay = delay.saturating_mul(2);
                attempt += 1;
            }
        }
    }
}
