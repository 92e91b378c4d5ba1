//! Monte-Carlo evaluation over passages, SNR points and trials.
//!
//! Each trial runs the whole link once and scores every configured scheme on
//! the same received frame. Trials are independent and run in parallel;
//! results are collected in job order so output files are reproducible.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcjr::bcjr_decode;
use crate::correction::{FrameAnalysis, Scheme};
use crate::corpus::{load_corpus, Passage};
use crate::error::{Error, Result};
use crate::header::{decode_header, FrameHeader};
use crate::metrics::{ber, rouge_l_tokens, wer};
use crate::phy::{transmit, ChannelConfig, CodeParams};
use crate::remote::{ClientOptions, RemoteScorer, ServiceClient};
use crate::scorer::{OracleScorer, Scorer, UniformScorer, UnigramScorer};
use crate::textcodec::{ascii_decode, ascii_encode, strip_message, WordStream};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeConfig {
    pub nu: usize,
    pub rate_inv: usize,
    pub generators_octal: Vec<String>,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self { nu: 2, rate_inv: 2, generators_octal: vec!["7".into(), "5".into()] }
    }
}

impl CodeConfig {
    pub fn params(&self) -> Result<CodeParams> {
        if self.rate_inv != self.generators_octal.len() {
            return Err(Error::Config(format!(
                "rate 1/{} needs {} generators, got {}",
                self.rate_inv,
                self.rate_inv,
                self.generators_octal.len()
            )));
        }
        CodeParams::from_octal(self.nu, &self.generators_octal)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModConfig {
    pub scheme: String,
    pub amplitude: f64,
}

impl Default for ModConfig {
    fn default() -> Self {
        Self { scheme: "qpsk".into(), amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSweep {
    pub snr_db: Vec<f64>,
}

impl Default for ChannelSweep {
    fn default() -> Self {
        Self { snr_db: (0..=6).map(f64::from).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    Uniform,
    Unigram,
    Oracle,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    /// Word counts for the unigram scorer.
    pub counts: Option<PathBuf>,
    /// Probability the oracle scorer gives the true word.
    pub oracle_p: f64,
    /// Service URL for the remote scorer, punctuation restoration and BERTScore.
    pub endpoint: Option<String>,
    pub timeout_secs: f64,
    pub retries: u32,
    pub max_concurrency: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            kind: ScorerKind::Unigram,
            counts: Some("data/unigram.tsv".into()),
            oracle_p: 0.9,
            endpoint: None,
            timeout_secs: 30.0,
            retries: 2,
            max_concurrency: 4,
        }
    }
}

impl ScorerConfig {
    pub fn client_options(&self) -> ClientOptions {
        ClientOptions {
            timeout: Duration::from_secs_f64(self.timeout_secs.max(0.001)),
            retries: self.retries,
            max_concurrency: self.max_concurrency.max(1),
            ..ClientOptions::default()
        }
    }
}

/// Everything a sweep needs; loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    /// Word list; when absent the remote service's vocabulary is used.
    pub vocab: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub bertscore: bool,
    pub out: PathBuf,
    pub code: CodeConfig,
    #[serde(rename = "mod")]
    pub modulation: ModConfig,
    pub channel: ChannelSweep,
    pub scorer: ScorerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: "data/corpus".into(),
            vocab: Some("data/vocab.txt".into()),
            trials: 10,
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            bertscore: false,
            out: "results".into(),
            code: CodeConfig::default(),
            modulation: ModConfig::default(),
            channel: ChannelSweep::default(),
            scorer: ScorerConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.channel.snr_db.is_empty() {
            return Err(Error::Config("SNR list is empty".into()));
        }
        if self.channel.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("SNR list contains NaN".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if !self.modulation.scheme.eq_ignore_ascii_case("qpsk") {
            return Err(Error::Config(format!("unsupported modulation {:?}", self.modulation.scheme)));
        }
        if !(self.modulation.amplitude > 0.0 && self.modulation.amplitude.is_finite()) {
            return Err(Error::Config("amplitude must be positive".into()));
        }
        if self.scorer.kind == ScorerKind::Oracle && !(self.scorer.oracle_p > 0.0 && self.scorer.oracle_p < 1.0) {
            return Err(Error::Config("oracle_p must lie in (0, 1)".into()));
        }
        self.code.params().map(|_| ())
    }
}

/// Parses `"start:stop:step"` (inclusive) or a comma-separated list of SNRs in dB.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad SNR {x:?}: {e}")));
    let parts: Vec<&str> = s.split(':').collect();
    let out = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::Config(format!("bad SNR range {s:?}")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect()
        }
        [one] => one.split(',').filter(|x| !x.trim().is_empty()).map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Config(format!("bad SNR spec {s:?}"))),
    };
    if out.is_empty() {
        return Err(Error::Config("SNR list is empty".into()));
    }
    Ok(out)
}

/// Parses a comma-separated scheme list such as `"bcjr,clsec"`.
pub fn parse_schemes(s: &str) -> Result<Vec<Scheme>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(str::parse).collect()
}

/// Where application-layer scores come from.
#[derive(Clone)]
pub enum ScorerSource {
    Shared(Arc<dyn Scorer>),
    /// An [`OracleScorer`] built per trial from the transmitted words.
    Oracle(f64),
}

impl ScorerSource {
    fn for_trial(&self, truth: &[String]) -> Arc<dyn Scorer> {
        match self {
            ScorerSource::Shared(s) => Arc::clone(s),
            ScorerSource::Oracle(p) => Arc::new(OracleScorer::new(truth.to_vec(), *p)),
        }
    }
}

/// Resolved, shareable state for running trials.
#[derive(Clone)]
pub struct Runtime {
    pub params: CodeParams,
    pub amplitude: f64,
    pub vocab: Arc<Vocabulary>,
    pub scorer: ScorerSource,
    /// Used for punctuation restoration and BERTScore when present.
    pub service: Option<ServiceClient>,
    pub schemes: Vec<Scheme>,
    pub bertscore: bool,
    pub base_seed: u64,
    pub trials: usize,
}

impl Runtime {
    pub fn new(params: CodeParams, vocab: Vocabulary, scorer: ScorerSource) -> Self {
        Self {
            params,
            amplitude: 1.0,
            vocab: Arc::new(vocab),
            scorer,
            service: None,
            schemes: Scheme::ALL.to_vec(),
            bertscore: false,
            base_seed: 1,
            trials: 1,
        }
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let service = match &cfg.scorer.endpoint {
            Some(e) => Some(ServiceClient::from_env_or(Some(e), cfg.scorer.client_options())?),
            None => ServiceClient::from_env_or(None, cfg.scorer.client_options()).ok(),
        };
        let (scorer, mask): (ScorerSource, Option<String>) = match cfg.scorer.kind {
            ScorerKind::Uniform => (ScorerSource::Shared(Arc::new(UniformScorer)), None),
            ScorerKind::Unigram => {
                let path = cfg.scorer.counts.as_ref().ok_or_else(|| Error::Config("unigram scorer needs counts".into()))?;
                (ScorerSource::Shared(Arc::new(UnigramScorer::load_tsv(path)?)), None)
            }
            ScorerKind::Oracle => (ScorerSource::Oracle(cfg.scorer.oracle_p), None),
            ScorerKind::Remote => {
                let client = service.clone().ok_or_else(|| Error::Config("remote scorer needs an endpoint".into()))?;
                let remote = RemoteScorer::connect(client)?;
                let mask = remote.capabilities().mask_token;
                (ScorerSource::Shared(Arc::new(remote)), Some(mask))
            }
        };
        let mask = mask.unwrap_or_else(|| crate::scorer::DEFAULT_MASK_TOKEN.to_owned());
        let vocab = match (&cfg.vocab, &service) {
            (Some(p), _) => Vocabulary::load_word_list(p, Some(&mask))?,
            (None, Some(s)) => s.vocabulary(Some(&mask))?,
            (None, None) => return Err(Error::Config("no vocabulary file and no service".into())),
        };
        Ok(Self {
            params: cfg.code.params()?,
            amplitude: cfg.modulation.amplitude,
            vocab: Arc::new(vocab),
            scorer,
            service,
            schemes: cfg.schemes.clone(),
            bertscore: cfg.bertscore,
            base_seed: cfg.seed,
            trials: cfg.trials,
        })
    }
}

/// Seed for one trial: the base seed XOR the trial's global index.
pub fn trial_seed(base_seed: u64, passage_idx: usize, trial: usize, trials: usize) -> u64 {
    base_seed ^ (passage_idx as u64 * trials as u64 + trial as u64)
}

/// One row of `trials.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub passage: String,
    pub snr_db: f64,
    pub trial: usize,
    pub scheme: Scheme,
    pub ber: Option<f64>,
    pub wer: Option<f64>,
    pub rouge_l: Option<f64>,
    pub bertscore: Option<f64>,
    pub n_words: usize,
    pub n_errors: usize,
    pub n_uncorrectable: usize,
    pub status: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

pub const STATUS_OK: &str = "ok";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PunctuationStatus {
    Restored,
    /// The service changed a word; its output was discarded.
    Rejected,
    /// The service could not be reached; the input was kept.
    Unavailable,
}

impl PunctuationStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PunctuationStatus::Restored => "ok",
            PunctuationStatus::Rejected => "punctuation_rejected",
            PunctuationStatus::Unavailable => "punctuation_unavailable",
        }
    }
}

/// Words with punctuation removed and letters folded, for comparing a
/// punctuated text against its source.
fn folded_words(text: &str) -> Vec<String> {
    strip_message(text).map(|ws| ws.into_words().into_iter().map(|w| w.to_lowercase()).collect()).unwrap_or_default()
}

/// Asks the service to punctuate `text` and keeps its answer only if the
/// word sequence is unchanged apart from punctuation and letter case.
pub fn restore_punctuation(text: &str, service: Option<&ServiceClient>) -> (String, PunctuationStatus) {
    let Some(service) = service else {
        return (text.to_owned(), PunctuationStatus::Unavailable);
    };
    match service.punctuate(text) {
        Ok(out) if folded_words(&out) == folded_words(text) => (out, PunctuationStatus::Restored),
        Ok(out) => {
            log::warn!("punctuation output changed words; keeping input: {out:?}");
            (text.to_owned(), PunctuationStatus::Rejected)
        }
        Err(e) => {
            log::warn!("punctuation restoration unavailable: {e}");
            (text.to_owned(), PunctuationStatus::Unavailable)
        }
    }
}

/// One scheme's output on one received frame.
#[derive(Debug, Clone)]
pub struct SchemeOutput {
    pub scheme: Scheme,
    /// Corrected words, or the reason the scheme could not run.
    pub words: std::result::Result<Vec<String>, Error>,
    /// Punctuated text for `clsec_pr`.
    pub text: Option<String>,
}

/// Everything produced by one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub records: Vec<TrialRecord>,
    pub outputs: Vec<SchemeOutput>,
    pub sent: WordStream,
    pub analysis: FrameAnalysis,
    pub raw_bit_errors: usize,
    pub coded_bits: usize,
}

/// Runs one trial and scores every scheme in `rt.schemes`.
pub fn run_trial(rt: &Runtime, passage_idx: usize, passage: &Passage, snr_db: f64, trial: usize) -> Result<TrialOutcome> {
    let started = Instant::now();
    let sent = strip_message(&passage.text)?;
    let header = FrameHeader::encode(sent.lengths())?;
    let lengths = decode_header(&header.to_bits())?;
    let u = ascii_encode(&sent);

    let channel = ChannelConfig { snr_db, amplitude: rt.amplitude };
    let seed = trial_seed(rt.base_seed, passage_idx, trial, rt.trials);
    let rx = transmit(&u, &rt.params, &channel, seed)?;
    let llrs = bcjr_decode(&rx.coded_hat, &rt.params, channel.crossover())?;
    let hd = ascii_decode(&llrs.hard_decision(), &lengths)?;
    let analysis = FrameAnalysis::new(&hd, llrs.as_slice(), &rt.vocab, &rt.params)?;

    let app = if rt.schemes.iter().any(Scheme::uses_scorer) && !analysis.physical.is_empty() {
        let scorer = rt.scorer.for_trial(sent.words());
        analysis.application(scorer.as_ref())
    } else {
        Ok(BTreeMap::new())
    };

    let reference_tokens: Vec<&str> = sent.words().iter().map(String::as_str).collect();
    let mut outputs = Vec::with_capacity(rt.schemes.len());
    let mut records = Vec::with_capacity(rt.schemes.len());
    for &scheme in &rt.schemes {
        let words = match (&app, scheme.uses_scorer()) {
            (Err(e), true) => Err(e.clone()),
            (Ok(a), _) => analysis.correct(scheme, Some(a)),
            (Err(_), false) => analysis.correct(scheme, None),
        };
        let mut record = TrialRecord {
            passage: passage.id.clone(),
            snr_db,
            trial,
            scheme,
            ber: None,
            wer: None,
            rouge_l: None,
            bertscore: None,
            n_words: sent.len(),
            n_errors: analysis.errors.len(),
            n_uncorrectable: analysis.uncorrectable.len(),
            status: STATUS_OK.into(),
            elapsed: Duration::ZERO,
        };
        let mut text = None;
        match &words {
            Ok(w) => {
                let ws = WordStream::new(w.clone())?;
                record.ber = Some(ber(&u, &ascii_encode(&ws))?);
                record.wer = Some(wer(sent.words(), w)?);
                let hyp_tokens: Vec<&str> = w.iter().map(String::as_str).collect();
                record.rouge_l = Some(rouge_l_tokens(&reference_tokens, &hyp_tokens));
                let mut hyp_text = ws.joined();
                if scheme == Scheme::ClsecPr {
                    let (restored, status) = restore_punctuation(&hyp_text, rt.service.as_ref());
                    if status != PunctuationStatus::Restored {
                        record.status = status.as_str().into();
                    }
                    hyp_text = restored;
                    text = Some(hyp_text.clone());
                }
                if rt.bertscore {
                    match rt.service.as_ref().map(|s| s.bertscore(&passage.text, &hyp_text)) {
                        Some(Ok(score)) => record.bertscore = Some(score),
                        Some(Err(e)) => {
                            log::warn!("bertscore failed: {e}");
                            record.status = "bertscore_unavailable".into();
                        }
                        None => record.status = "bertscore_unavailable".into(),
                    }
                }
            }
            Err(e) => record.status = format!("scorer_error: {e}"),
        }
        record.elapsed = started.elapsed();
        records.push(record);
        outputs.push(SchemeOutput { scheme, words, text });
    }

    Ok(TrialOutcome {
        records,
        outputs,
        sent,
        analysis,
        raw_bit_errors: rx.raw_bit_errors(),
        coded_bits: rx.coded.len(),
    })
}

/// Rows for a trial that failed before any scheme ran.
fn failed_records(rt: &Runtime, passage: &Passage, snr_db: f64, trial: usize, err: &Error) -> Vec<TrialRecord> {
    rt.schemes
        .iter()
        .map(|&scheme| TrialRecord {
            passage: passage.id.clone(),
            snr_db,
            trial,
            scheme,
            ber: None,
            wer: None,
            rouge_l: None,
            bertscore: None,
            n_words: 0,
            n_errors: 0,
            n_uncorrectable: 0,
            status: format!("error: {err}"),
            elapsed: Duration::ZERO,
        })
        .collect()
}

/// Mean metrics for one (scheme, SNR) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: usize,
    /// Rows with no metrics.
    pub failed: usize,
    pub ber: Option<f64>,
    pub wer: Option<f64>,
    pub rouge_l: Option<f64>,
    pub bertscore: Option<f64>,
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = xs.flatten().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Averages records per (scheme, SNR), ordered by scheme then SNR.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(Scheme, u64), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        // total order on f64
        let key = r.snr_db.to_bits() ^ if r.snr_db.is_sign_negative() { u64::MAX } else { 1 << 63 };
        cells.entry((r.scheme, key)).or_default().push(r);
    }
    cells
        .into_values()
        .map(|rows| SummaryRow {
            scheme: rows[0].scheme,
            snr_db: rows[0].snr_db,
            trials: rows.len(),
            failed: rows.iter().filter(|r| r.ber.is_none()).count(),
            ber: mean(rows.iter().map(|r| r.ber)),
            wer: mean(rows.iter().map(|r| r.wer)),
            rouge_l: mean(rows.iter().map(|r| r.rouge_l)),
            bertscore: mean(rows.iter().map(|r| r.bertscore)),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub elapsed: Duration,
}

/// Corpus words missing from the vocabulary, in first-seen order.
pub fn missing_words(passages: &[Passage], vocab: &Vocabulary) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for p in passages {
        if let Ok(ws) = strip_message(&p.text) {
            for w in ws.words() {
                if !vocab.contains(w) && seen.insert(w.clone()) {
                    out.push(w.clone());
                }
            }
        }
    }
    out
}

/// Runs every (passage, SNR, trial) job.
pub fn sweep_passages(rt: &Runtime, passages: &[Passage], snrs: &[f64]) -> SweepResult {
    let started = Instant::now();
    let missing = missing_words(passages, &rt.vocab);
    if !missing.is_empty() {
        log::warn!("{} corpus words are not in the vocabulary, e.g. {:?}", missing.len(), &missing[..missing.len().min(5)]);
    }
    let jobs: Vec<(usize, f64, usize)> = (0..passages.len())
        .flat_map(|p| snrs.iter().flat_map(move |&s| (0..rt.trials).map(move |t| (p, s, t))))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .flat_map_iter(|&(p, snr, t)| match run_trial(rt, p, &passages[p], snr, t) {
            Ok(o) => o.records,
            Err(e) => {
                log::warn!("passage {} snr {snr} trial {t}: {e}", passages[p].id);
                failed_records(rt, &passages[p], snr, t, &e)
            }
        })
        .collect();
    let summary = summarize(&records);
    SweepResult { records, summary, elapsed: started.elapsed() }
}

/// Loads the corpus and runs the configured sweep.
pub fn sweep(cfg: &RunConfig) -> Result<SweepResult> {
    let rt = Runtime::from_config(cfg)?;
    let passages = load_corpus(&cfg.corpus)?;
    Ok(sweep_passages(&rt, &passages, &cfg.channel.snr_db))
}

pub fn write_trials_csv<W: std::io::Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: std::io::Read>(r: R) -> Result<Vec<TrialRecord>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(|e| Error::Io(e.to_string())))
        .collect()
}

pub fn write_summary_csv<W: std::io::Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `summary.csv` and `summary.json` into `dir`.
pub fn write_outputs(result: &SweepResult, cfg: &RunConfig, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_trials_csv(&result.records, std::fs::File::create(dir.join("trials.csv"))?)?;
    write_summary_csv(&result.summary, std::fs::File::create(dir.join("summary.csv"))?)?;
    let json = serde_json::json!({
        "config": cfg,
        "summary": result.summary,
        "elapsed_secs": result.elapsed.as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&json).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), text)?;
    Ok(())
}
