//! Application-layer probability sources.
//!
//! A [`Scorer`] receives a space-joined message in which every erroneous word
//! is replaced by its mask token, plus one candidate list per mask, and
//! returns natural-log probabilities over each list. The built-in scorers are
//! deterministic stand-ins for a masked language model; [`crate::remote`]
//! talks to a served model.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logprob::normalize_in_place;

pub const DEFAULT_MASK_TOKEN: &str = "[MASK]";

/// What a scorer advertises before it is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capabilities {
    pub model: String,
    pub mask_token: String,
    /// Longest input the scorer accepts, in words. `None` means unbounded.
    #[serde(default)]
    pub max_context: Option<usize>,
    #[serde(default)]
    pub vocab_size: Option<usize>,
}

impl Capabilities {
    pub fn builtin(model: &str) -> Self {
        Self {
            model: model.to_owned(),
            mask_token: DEFAULT_MASK_TOKEN.to_owned(),
            max_context: None,
            vocab_size: None,
        }
    }
}

/// Candidates for the mask standing in for word `index` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSlot {
    pub index: usize,
    pub candidates: Arc<[String]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerRequest {
    pub masked_text: String,
    pub masks: Vec<MaskSlot>,
}

impl ScorerRequest {
    /// Checks that the text holds exactly one mask token per slot.
    pub fn validate(&self, mask_token: &str) -> Result<()> {
        let in_text = self.masked_text.split_whitespace().filter(|t| *t == mask_token).count();
        if in_text != self.masks.len() {
            return Err(Error::MaskCountMismatch { in_text, slots: self.masks.len() });
        }
        if let Some(m) = self.masks.iter().find(|m| m.candidates.is_empty()) {
            return Err(Error::MalformedRequest(format!("mask {} has no candidates", m.index)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerResponse {
    /// One log-probability vector per mask, aligned with its candidate list.
    pub logprobs: Vec<Vec<f64>>,
    pub scorer: String,
}

impl ScorerResponse {
    /// Checks vector lengths against the request and that every value is finite.
    pub fn check_against(&self, req: &ScorerRequest) -> Result<()> {
        if self.logprobs.len() != req.masks.len() {
            return Err(Error::ProtocolError(format!(
                "{} score vectors for {} masks",
                self.logprobs.len(),
                req.masks.len()
            )));
        }
        for (lp, slot) in self.logprobs.iter().zip(&req.masks) {
            if lp.len() != slot.candidates.len() {
                return Err(Error::ProtocolError(format!(
                    "mask {}: {} scores for {} candidates",
                    slot.index,
                    lp.len(),
                    slot.candidates.len()
                )));
            }
            if lp.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
                return Err(Error::ProtocolError(format!("mask {}: non-finite score", slot.index)));
            }
        }
        Ok(())
    }
}

pub trait Scorer: Send + Sync {
    fn capabilities(&self) -> Capabilities;
    fn score(&self, req: &ScorerRequest) -> Result<ScorerResponse>;
}

impl<T: Scorer + ?Sized> Scorer for Arc<T> {
    fn capabilities(&self) -> Capabilities {
        (**self).capabilities()
    }

    fn score(&self, req: &ScorerRequest) -> Result<ScorerResponse> {
        (**self).score(req)
    }
}

fn normalized(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut lp: Vec<f64> = weights.map(f64::ln).collect();
    normalize_in_place(&mut lp);
    lp
}

/// Equal probability for every candidate.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    fn capabilities(&self) -> Capabilities {
        Capabilities::builtin("builtin-uniform")
    }

    fn score(&self, req: &ScorerRequest) -> Result<ScorerResponse> {
        req.validate(DEFAULT_MASK_TOKEN)?;
        let logprobs = req
            .masks
            .iter()
            .map(|m| vec![-(m.candidates.len() as f64).ln(); m.candidates.len()])
            .collect();
        Ok(ScorerResponse { logprobs, scorer: "builtin-uniform".into() })
    }
}

/// Context-free scorer proportional to word counts.
#[derive(Debug, Clone, Default)]
pub struct UnigramScorer {
    counts: HashMap<String, f64>,
    floor: f64,
}

impl UnigramScorer {
    pub const DEFAULT_FLOOR: f64 = 1.0;

    /// Negative and non-finite counts are dropped.
    pub fn new<S: Into<String>>(counts: impl IntoIterator<Item = (S, f64)>) -> Self {
        Self {
            counts: counts
                .into_iter()
                .filter(|(_, c)| c.is_finite() && *c >= 0.0)
                .map(|(w, c)| (w.into(), c))
                .collect(),
            floor: Self::DEFAULT_FLOOR,
        }
    }

    /// Weight given to words missing from the table.
    pub fn with_floor(mut self, floor: f64) -> Self {
        assert!(floor > 0.0, "floor weight must be positive");
        self.floor = floor;
        self
    }

    /// Reads `word<TAB>count` lines.
    pub fn load_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::SourceUnavailable(format!("{}: {e}", path.display())))?;
        let mut counts = Vec::new();
        for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected word<TAB>count", path.display(), lineno + 1)))?;
            let count: f64 = count
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            counts.push((word.to_owned(), count));
        }
        Ok(Self::new(counts))
    }

    fn weight(&self, word: &str) -> f64 {
        match self.counts.get(word) {
            Some(&c) if c > 0.0 => c,
            _ => self.floor,
        }
    }
}

impl Scorer for UnigramScorer {
    fn capabilities(&self) -> Capabilities {
        Capabilities { vocab_size: Some(self.counts.len()), ..Capabilities::builtin("builtin-unigram") }
    }

    fn score(&self, req: &ScorerRequest) -> Result<ScorerResponse> {
        req.validate(DEFAULT_MASK_TOKEN)?;
        let logprobs = req
            .masks
            .iter()
            .map(|m| normalized(m.candidates.iter().map(|w| self.weight(w))))
            .collect();
        Ok(ScorerResponse { logprobs, scorer: "builtin-unigram".into() })
    }
}

/// Knows the transmitted words: gives probability `p` to the true word when
/// it is a candidate and splits `1 - p` evenly over the rest.
#[derive(Debug, Clone)]
pub struct OracleScorer {
    truth: Vec<String>,
    p: f64,
}

impl OracleScorer {
    pub fn new(truth: Vec<String>, p: f64) -> Self {
        assert!(p > 0.0 && p < 1.0, "oracle probability must lie in (0, 1)");
        Self { truth, p }
    }

    fn distribution(&self, index: usize, candidates: &[String]) -> Vec<f64> {
        let s = candidates.len();
        let hit = self.truth.get(index).and_then(|t| candidates.iter().position(|c| c == t));
        match hit {
            Some(i) if s > 1 => {
                let rest = ((1.0 - self.p) / (s - 1) as f64).ln();
                let mut lp = vec![rest; s];
                lp[i] = self.p.ln();
                lp
            }
            Some(_) => vec![0.0],
            None => vec![-(s as f64).ln(); s],
        }
    }
}

impl Scorer for OracleScorer {
    fn capabilities(&self) -> Capabilities {
        Capabilities::builtin("builtin-oracle")
    }

    fn score(&self, req: &ScorerRequest) -> Result<ScorerResponse> {
        req.validate(DEFAULT_MASK_TOKEN)?;
        let logprobs = req.masks.iter().map(|m| self.distribution(m.index, &m.candidates)).collect();
        Ok(ScorerResponse { logprobs, scorer: format!("builtin-oracle(p={})", self.p) })
    }
}
