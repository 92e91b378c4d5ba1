//! HTTP client for a served masked language model.
//!
//! The service exposes `GET /capabilities`, `GET /vocab`, `POST /fill_mask`,
//! `POST /punctuate` and `POST /bertscore`, all JSON. Transport failures and
//! 5xx responses are retried; 4xx responses are not.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::{Capabilities, Scorer, ScorerRequest, ScorerResponse};
use crate::vocab::Vocabulary;

/// Overrides any endpoint given on the command line or in a config file.
pub const ENDPOINT_ENV: &str = "CLSEC_SCORER_ENDPOINT";

#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub timeout: Duration,
    /// Extra attempts after the first.
    pub retries: u32,
    /// Requests in flight at once.
    pub max_concurrency: usize,
    pub backoff: Duration,
}

impl Default for ClientOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(30),
            retries: 2,
            max_concurrency: 4,
            backoff: Duration::from_millis(200),
        }
    }
}

struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Self { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

enum Failure {
    Retryable(String),
    Fatal(Error),
}

/// Thread-safe JSON client with bounded concurrency.
#[derive(Clone)]
pub struct ServiceClient {
    base: String,
    agent: ureq::Agent,
    opts: ClientOptions,
    gate: Arc<Semaphore>,
}

impl std::fmt::Debug for ServiceClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceClient").field("base", &self.base).field("opts", &self.opts).finish()
    }
}

impl ServiceClient {
    pub fn new(endpoint: &str, opts: ClientOptions) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(opts.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base: endpoint.trim_end_matches('/').to_owned(),
            agent,
            gate: Arc::new(Semaphore::new(opts.max_concurrency)),
            opts,
        }
    }

    /// Uses `CLSEC_SCORER_ENDPOINT` when set, else `fallback`.
    pub fn from_env_or(fallback: Option<&str>, opts: ClientOptions) -> Result<Self> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .or_else(|| fallback.map(str::to_owned))
            .ok_or_else(|| Error::Config(format!("no scorer endpoint; pass one or set {ENDPOINT_ENV}")))?;
        Ok(Self::new(&endpoint, opts))
    }

    pub fn endpoint(&self) -> &str {
        &self.base
    }

    fn attempt<T: DeserializeOwned>(&self, path: &str, body: Option<&serde_json::Value>) -> std::result::Result<T, Failure> {
        let url = format!("{}{}", self.base, path);
        let _permit = self.gate.acquire();
        let resp = match body {
            Some(b) => self.agent.post(&url).send_json(b),
            None => self.agent.get(&url).call(),
        };
        let mut resp = resp.map_err(|e| Failure::Retryable(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| Failure::Retryable(format!("{url}: {e}")))?;
        match status {
            200..=299 => serde_json::from_str(&text)
                .map_err(|e| Failure::Fatal(Error::ProtocolError(format!("{url}: {e}")))),
            400 | 422 => Err(Failure::Fatal(Error::MalformedRequest(format!("{url} returned {status}: {text}")))),
            500..=599 => Err(Failure::Retryable(format!("{url} returned {status}"))),
            _ => Err(Failure::Fatal(Error::ProtocolError(format!("{url} returned {status}: {text}")))),
        }
    }

    fn request<T: DeserializeOwned>(&self, path: &str, body: Option<serde_json::Value>) -> Result<T> {
        let mut last = String::new();
        for attempt in 0..=self.opts.retries {
            if attempt > 0 {
                std::thread::sleep(self.opts.backoff * attempt);
            }
            match self.attempt(path, body.as_ref()) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    log::warn!("attempt {} failed: {msg}", attempt + 1);
                    last = msg;
                }
            }
        }
        Err(Error::ScorerUnavailable(format!("{} attempts failed; last: {last}", self.opts.retries + 1)))
    }

    pub fn capabilities(&self) -> Result<Capabilities> {
        self.request("/capabilities", None)
    }

    /// The service's single-token word list.
    pub fn vocab_words(&self) -> Result<Vec<String>> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum VocabBody {
            Wrapped { words: Vec<String> },
            Bare(Vec<String>),
        }
        let body: VocabBody = self
            .request("/vocab", None)
            .map_err(|e| match e {
                Error::ScorerUnavailable(m) => Error::SourceUnavailable(m),
                other => other,
            })?;
        Ok(match body {
            VocabBody::Wrapped { words } | VocabBody::Bare(words) => words,
        })
    }

    pub fn vocabulary(&self, mask_token: Option<&str>) -> Result<Vocabulary> {
        Vocabulary::from_words(self.vocab_words()?, mask_token)
    }

    pub fn fill_mask(&self, req: &ScorerRequest) -> Result<FillMaskResponse> {
        let body = FillMaskRequest {
            masked_text: &req.masked_text,
            masks: req.masks.iter().map(|m| WireMask { index: m.index, candidates: &m.candidates }).collect(),
        };
        self.request("/fill_mask", Some(serde_json::to_value(body).expect("serializable")))
    }

    pub fn punctuate(&self, text: &str) -> Result<String> {
        #[derive(Deserialize)]
        struct Body {
            text: String,
        }
        let b: Body = self.request("/punctuate", Some(serde_json::json!({ "text": text })))?;
        Ok(b.text)
    }

    /// Semantic similarity in [0, 100].
    pub fn bertscore(&self, reference: &str, hypothesis: &str) -> Result<f64> {
        #[derive(Deserialize)]
        struct Body {
            score: f64,
        }
        let b: Body = self.request(
            "/bertscore",
            Some(serde_json::json!({ "reference": reference, "hypothesis": hypothesis })),
        )?;
        if !(0.0..=100.0).contains(&b.score) {
            return Err(Error::ProtocolError(format!("bertscore {} outside [0, 100]", b.score)));
        }
        Ok(b.score)
    }
}

#[derive(Serialize)]
struct WireMask<'a> {
    index: usize,
    candidates: &'a [String],
}

#[derive(Serialize)]
struct FillMaskRequest<'a> {
    masked_text: &'a str,
    masks: Vec<WireMask<'a>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MaskScores {
    pub index: usize,
    pub logprobs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FillMaskResponse {
    pub masks: Vec<MaskScores>,
}

/// [`Scorer`] backed by the service's `/fill_mask` endpoint.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    client: ServiceClient,
    caps: Capabilities,
}

impl RemoteScorer {
    /// Queries the capabilities once and keeps them.
    pub fn connect(client: ServiceClient) -> Result<Self> {
        let caps = client.capabilities()?;
        if caps.mask_token.trim().is_empty() {
            return Err(Error::ProtocolError("service advertised an empty mask token".into()));
        }
        Ok(Self { client, caps })
    }

    pub fn client(&self) -> &ServiceClient {
        &self.client
    }
}

impl Scorer for RemoteScorer {
    fn capabilities(&self) -> Capabilities {
        self.caps.clone()
    }

    fn score(&self, req: &ScorerRequest) -> Result<ScorerResponse> {
        req.validate(&self.caps.mask_token)?;
        let resp = self.client.fill_mask(req)?;
        if resp.masks.len() != req.masks.len() {
            return Err(Error::ProtocolError(format!(
                "{} masks requested, {} returned",
                req.masks.len(),
                resp.masks.len()
            )));
        }
        let mut logprobs = Vec::with_capacity(resp.masks.len());
        for (slot, got) in req.masks.iter().zip(resp.masks) {
            if slot.index != got.index {
                return Err(Error::ProtocolError(format!("expected mask {}, got {}", slot.index, got.index)));
            }
            logprobs.push(got.logprobs);
        }
        let out = ScorerResponse { logprobs, scorer: format!("remote:{}", self.caps.model) };
        out.check_against(req).map_err(|e| Error::ProtocolError(e.to_string()))?;
        Ok(out)
    }
}
