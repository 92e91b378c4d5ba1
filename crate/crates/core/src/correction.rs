//! Post-FEC word correction.
//!
//! For every word flagged as erroneous, two distributions over its
//! length-matched candidates are formed: a physical one from the word's LLR
//! segment and an application one from the scorer. The WL-LLR scheme takes
//! the physical argmax, the MLM scheme the application argmax, and CL-SEC the
//! argmax of their element-wise product.
//!
//! All arithmetic is in the log domain. Ties go to the lowest candidate
//! index, which is lexicographic vocabulary order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logprob::{argmax, ln_prob_one, ln_prob_zero, normalize_in_place};
use crate::phy::CodeParams;
use crate::scorer::{MaskSlot, Scorer, ScorerRequest};
use crate::textcodec::{insert_spaces, WordStream};
use crate::vocab::{CandidateSet, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Physical,
    Application,
    Cross,
}

/// Normalized log-probabilities over one candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDistribution {
    candidates: CandidateSet,
    log_weights: Vec<f64>,
    layer: Layer,
}

impl CandidateDistribution {
    /// Normalizes unnormalized log-weights over `candidates`.
    pub fn new(candidates: CandidateSet, mut log_weights: Vec<f64>, layer: Layer) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        if log_weights.len() != candidates.len() {
            return Err(Error::LengthMismatch { expected: candidates.len(), actual: log_weights.len() });
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::MalformedRequest("non-finite log-weight".into()));
        }
        if log_weights.iter().all(|&w| w == f64::NEG_INFINITY) {
            // nothing to prefer; fall back to uniform
            log_weights.fill(0.0);
        }
        normalize_in_place(&mut log_weights);
        Ok(Self { candidates, log_weights, layer })
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    /// Index of the most probable candidate.
    pub fn best_index(&self) -> usize {
        argmax(&self.log_weights).expect("distribution is non-empty")
    }

    pub fn best(&self) -> &str {
        &self.candidates.words()[self.best_index()]
    }
}

/// The source- and coded-bit span of one word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordWindow {
    pub position: usize,
    /// `K̃_n`, source bits preceding the word.
    pub bit_offset: usize,
    /// `K_n = 8 L_n`
    pub bit_count: usize,
    /// `λ` over the word's source bits.
    pub llrs: Vec<f64>,
    /// Coded bits `ĉ_n` that carry the word: `K̃_n/R .. (K̃_{n+1} + ν)/R`.
    pub coded_range: Range<usize>,
}

/// Locates word `n` (0-based) in the LLR vector and coded frame.
pub fn word_window(n: usize, lengths: &[usize], llrs: &[f64], params: &CodeParams) -> Result<WordWindow> {
    if n >= lengths.len() {
        return Err(Error::IndexOutOfRange { index: n, len: lengths.len() });
    }
    let bit_offset = 8 * lengths[..n].iter().sum::<usize>();
    let bit_count = 8 * lengths[n];
    let end = bit_offset + bit_count;
    if end > llrs.len() {
        return Err(Error::LengthMismatch { expected: end, actual: llrs.len() });
    }
    let inv = params.inverse_rate();
    Ok(WordWindow {
        position: n,
        bit_offset,
        bit_count,
        llrs: llrs[bit_offset..end].to_vec(),
        coded_range: bit_offset * inv..(end + params.memory()) * inv,
    })
}

/// Log-probability of every byte value at each character slot of a word,
/// assembled from two 4-bit halves.
struct ByteLogProbs {
    hi: Vec<[f64; 16]>,
    lo: Vec<[f64; 16]>,
}

impl ByteLogProbs {
    fn new(llrs: &[f64]) -> Self {
        let nibble = |bits: &[f64]| {
            let mut t = [0.0; 16];
            for (v, slot) in t.iter_mut().enumerate() {
                *slot = bits
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| if (v >> (3 - i)) & 1 == 0 { ln_prob_zero(l) } else { ln_prob_one(l) })
                    .sum();
            }
            t
        };
        let (hi, lo) = llrs.chunks_exact(8).map(|c| (nibble(&c[..4]), nibble(&c[4..]))).unzip();
        Self { hi, lo }
    }

    fn word(&self, word: &str) -> f64 {
        word.chars()
            .enumerate()
            .map(|(j, c)| {
                let b = c as usize;
                self.hi[j][b >> 4] + self.lo[j][b & 15]
            })
            .sum()
    }
}

/// Word-level channel decoding: each candidate's weight is the product of
/// the bit posteriors of its bit image over the word's LLR segment.
pub fn phy_word_dist(window: &WordWindow, cands: &CandidateSet) -> Result<CandidateDistribution> {
    if cands.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if 8 * cands.word_len != window.bit_count {
        return Err(Error::LengthMismatch { expected: window.bit_count, actual: 8 * cands.word_len });
    }
    let table = ByteLogProbs::new(&window.llrs);
    let weights = cands.words().iter().map(|w| table.word(w)).collect();
    CandidateDistribution::new(cands.clone(), weights, Layer::Physical)
}

pub fn wl_llr_correct(dist: &CandidateDistribution) -> &str {
    dist.best()
}

pub fn mlm_correct(dist: &CandidateDistribution) -> &str {
    dist.best()
}

pub fn clsec_correct(dist: &CandidateDistribution) -> &str {
    dist.best()
}

/// Element-wise product of the two layers, renormalized.
pub fn combine(phy: &CandidateDistribution, app: &CandidateDistribution) -> Result<CandidateDistribution> {
    if phy.candidates.words() != app.candidates.words() {
        return Err(Error::CandidateMismatch);
    }
    // a flat layer is a constant factor; returning the other layer as is keeps
    // rounding from reordering near-ties
    let flat = |d: &CandidateDistribution| d.log_weights.windows(2).all(|w| w[0] == w[1]);
    if flat(app) || flat(phy) {
        let keep = if flat(app) { phy } else { app };
        return Ok(CandidateDistribution { layer: Layer::Cross, ..keep.clone() });
    }
    let weights = phy.log_weights.iter().zip(&app.log_weights).map(|(a, b)| a + b).collect();
    CandidateDistribution::new(phy.candidates.clone(), weights, Layer::Cross)
}

/// Replaces whitespace and control characters so a garbled word stays one token.
fn context_word(w: &str) -> String {
    w.chars().map(|c| if c.is_whitespace() || c.is_control() { '?' } else { c }).collect()
}

/// Asks `scorer` for one distribution per candidate set.
///
/// `words` is the HD word sequence; every position in `cand_sets` is masked.
/// When the scorer advertises a context limit shorter than the message, each
/// mask is scored in its own window of that many words centred on it.
pub fn app_word_dists<S: Scorer + ?Sized>(
    words: &[String],
    cand_sets: &[CandidateSet],
    scorer: &S,
) -> Result<Vec<CandidateDistribution>> {
    if cand_sets.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(c) = cand_sets.iter().find(|c| c.is_empty()) {
        return Err(Error::MalformedRequest(format!("word {} has no candidates", c.position)));
    }
    let caps = scorer.capabilities();
    let context: Vec<String> = words.iter().map(|w| context_word(w)).collect();

    let fits = caps.max_context.is_none_or(|m| words.len() <= m);
    let logprobs: Vec<Vec<f64>> = if fits {
        let req = masked_request(&context, 0..words.len(), cand_sets, &caps.mask_token);
        let resp = scorer.score(&req)?;
        resp.check_against(&req)?;
        resp.logprobs
    } else {
        let width = caps.max_context.unwrap_or(usize::MAX).max(1);
        let mut out = Vec::with_capacity(cand_sets.len());
        for target in cand_sets {
            let start = target.position.saturating_sub(width / 2).min(words.len() - width);
            let span = start..start + width;
            let in_span: Vec<CandidateSet> =
                cand_sets.iter().filter(|c| span.contains(&c.position)).cloned().collect();
            let req = masked_request(&context, span, &in_span, &caps.mask_token);
            let resp = scorer.score(&req)?;
            resp.check_against(&req)?;
            let k = in_span.iter().position(|c| c.position == target.position).expect("target in span");
            out.push(resp.logprobs.into_iter().nth(k).expect("checked length"));
        }
        out
    };

    cand_sets
        .iter()
        .zip(logprobs)
        .map(|(c, lp)| CandidateDistribution::new(c.clone(), lp, Layer::Application))
        .collect()
}

fn masked_request(context: &[String], span: Range<usize>, cand_sets: &[CandidateSet], mask: &str) -> ScorerRequest {
    let masked: BTreeSet<usize> =
        cand_sets.iter().filter(|c| span.contains(&c.position)).map(|c| c.position - span.start).collect();
    ScorerRequest {
        masked_text: insert_spaces(&context[span], &masked, mask),
        masks: cand_sets
            .iter()
            .map(|c| MaskSlot { index: c.position, candidates: c.shared_words() })
            .collect(),
    }
}

/// Correction schemes compared by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Hard decisions of the BCJR decoder, uncorrected.
    Bcjr,
    /// Physical-layer word argmax.
    WlLlr,
    /// Application-layer (masked language model) argmax.
    Mlm,
    /// Cross-layer product argmax.
    Clsec,
    /// CL-SEC followed by punctuation restoration.
    ClsecPr,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Bcjr, Scheme::WlLlr, Scheme::Mlm, Scheme::Clsec, Scheme::ClsecPr];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Bcjr => "bcjr",
            Scheme::WlLlr => "wl_llr",
            Scheme::Mlm => "mlm",
            Scheme::Clsec => "clsec",
            Scheme::ClsecPr => "clsec_pr",
        }
    }

    /// Whether the scheme needs application-layer scores.
    pub fn uses_scorer(&self) -> bool {
        matches!(self, Scheme::Mlm | Scheme::Clsec | Scheme::ClsecPr)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// Detection, candidate sets and physical distributions for one received frame.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub hd_words: Vec<String>,
    /// `N_e`, 0-based.
    pub errors: BTreeSet<usize>,
    /// Erroneous positions with no vocabulary word of the right length.
    pub uncorrectable: BTreeSet<usize>,
    pub physical: BTreeMap<usize, CandidateDistribution>,
}

impl FrameAnalysis {
    pub fn new(
        hd: &WordStream,
        llrs: &[f64],
        vocab: &Vocabulary,
        params: &CodeParams,
    ) -> Result<Self> {
        let lengths = hd.lengths();
        let errors = vocab.detect_errors(hd.words());
        let mut uncorrectable = BTreeSet::new();
        let mut physical = BTreeMap::new();
        for &n in &errors {
            let cands = vocab.candidates(n, lengths[n]);
            if cands.is_empty() {
                uncorrectable.insert(n);
                continue;
            }
            let window = word_window(n, lengths, llrs, params)?;
            physical.insert(n, phy_word_dist(&window, &cands)?);
        }
        Ok(Self { hd_words: hd.words().to_vec(), errors, uncorrectable, physical })
    }

    pub fn candidate_sets(&self) -> Vec<CandidateSet> {
        self.physical.values().map(|d| d.candidates().clone()).collect()
    }

    /// Application-layer distributions for every correctable position.
    pub fn application<S: Scorer + ?Sized>(&self, scorer: &S) -> Result<BTreeMap<usize, CandidateDistribution>> {
        let sets = self.candidate_sets();
        let dists = app_word_dists(&self.hd_words, &sets, scorer)?;
        Ok(sets.iter().map(|c| c.position).zip(dists).collect())
    }

    fn replace_with(&self, mut pick: impl FnMut(usize) -> Result<String>) -> Result<Vec<String>> {
        let mut words = self.hd_words.clone();
        for &n in self.physical.keys() {
            words[n] = pick(n)?;
        }
        Ok(words)
    }

    /// Word sequence produced by `scheme`. `app` is required by the
    /// scorer-based schemes.
    pub fn correct(
        &self,
        scheme: Scheme,
        app: Option<&BTreeMap<usize, CandidateDistribution>>,
    ) -> Result<Vec<String>> {
        let app_for = |n: usize| {
            app.and_then(|a| a.get(&n))
                .ok_or_else(|| Error::ScorerUnavailable("no application-layer distribution".into()))
        };
        match scheme {
            Scheme::Bcjr => Ok(self.hd_words.clone()),
            Scheme::WlLlr => self.replace_with(|n| Ok(wl_llr_correct(&self.physical[&n]).to_owned())),
            Scheme::Mlm => self.replace_with(|n| Ok(mlm_correct(app_for(n)?).to_owned())),
            Scheme::Clsec | Scheme::ClsecPr => self.replace_with(|n| {
                let cl = combine(&self.physical[&n], app_for(n)?)?;
                Ok(clsec_correct(&cl).to_owned())
            }),
        }
    }
}

/// Runs one correction scheme end to end on a decoded frame.
///
/// Only positions in `N_e` with a non-empty candidate set are changed;
/// punctuation restoration is not applied here, so `clsec_pr` yields the
/// CL-SEC word sequence.
pub fn run_scheme<S: Scorer + ?Sized>(
    scheme: Scheme,
    hd: &WordStream,
    llrs: &[f64],
    vocab: &Vocabulary,
    scorer: &S,
    params: &CodeParams,
) -> Result<(WordStream, FrameAnalysis)> {
    let analysis = FrameAnalysis::new(hd, llrs, vocab, params)?;
    let app = if scheme.uses_scorer() { Some(analysis.application(scorer)?) } else { None };
    let words = analysis.correct(scheme, app.as_ref())?;
    Ok((WordStream::new(words)?, analysis))
}
