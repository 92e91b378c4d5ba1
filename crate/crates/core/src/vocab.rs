//! Vocabulary, word-error detection and length-matched candidate sets.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::textcodec::word_bits;

/// Immutable word set with precomputed length buckets.
///
/// Buckets are in lexicographic (byte) order; that order is the candidate
/// order everywhere downstream, including argmax tie-breaking.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: HashSet<String>,
    by_length: BTreeMap<usize, Arc<[String]>>,
    rejected: usize,
}

impl Vocabulary {
    /// Deduplicates `words`, dropping entries that are empty, contain
    /// whitespace or non-ASCII characters, or contain `mask_token`.
    pub fn from_words<I, S>(words: I, mask_token: Option<&str>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = HashSet::new();
        let mut rejected = 0;
        for w in words {
            let w: String = w.into();
            let bad = w.is_empty()
                || w.chars().any(|c| c.is_whitespace() || !c.is_ascii())
                || mask_token.is_some_and(|m| !m.is_empty() && w.contains(m));
            if bad {
                rejected += 1;
            } else {
                set.insert(w);
            }
        }
        if set.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut buckets: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for w in &set {
            buckets.entry(w.len()).or_default().push(w.clone());
        }
        let by_length = buckets
            .into_iter()
            .map(|(len, mut ws)| {
                ws.sort_unstable();
                (len, Arc::from(ws))
            })
            .collect();
        Ok(Self { words: set, by_length, rejected })
    }

    /// Reads a UTF-8 word list, one word per line. A tab and anything after
    /// it on a line is ignored, so count tables load as word lists too.
    pub fn load_word_list(path: impl AsRef<Path>, mask_token: Option<&str>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::SourceUnavailable(format!("{}: {e}", path.display())))?;
        let words = text
            .lines()
            .map(|l| l.split('\t').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::to_owned);
        Self::from_words(words, mask_token)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    /// Vocabulary size `S`.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Entries dropped at load time.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    /// All words of exactly `word_len` characters, lexicographic.
    pub fn bucket(&self, word_len: usize) -> Arc<[String]> {
        self.by_length.get(&word_len).cloned().unwrap_or_else(|| Arc::from(Vec::new()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.by_length.values().flat_map(|b| b.iter().map(String::as_str))
    }

    /// Candidate corrections for the word at `position` with `word_len` letters.
    pub fn candidates(&self, position: usize, word_len: usize) -> CandidateSet {
        CandidateSet { position, word_len, words: self.bucket(word_len) }
    }

    /// 0-based positions of words not in the vocabulary (case-sensitive).
    pub fn detect_errors<S: AsRef<str>>(&self, words: &[S]) -> BTreeSet<usize> {
        words
            .iter()
            .enumerate()
            .filter(|(_, w)| !self.contains(w.as_ref()))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Length-matched replacement candidates for one erroneous word.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub position: usize,
    pub word_len: usize,
    words: Arc<[String]>,
}

impl CandidateSet {
    /// For tests and ad-hoc use; all words must have `word_len` characters.
    pub fn from_words(position: usize, words: Vec<String>) -> Self {
        let word_len = words.first().map_or(0, |w| w.chars().count());
        assert!(words.iter().all(|w| w.chars().count() == word_len), "mixed word lengths");
        Self { position, word_len, words: Arc::from(words) }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn shared_words(&self) -> Arc<[String]> {
        Arc::clone(&self.words)
    }

    /// `S_n`
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Bit image `ũ` of candidate `i`.
    pub fn bit_image(&self, i: usize) -> Vec<u8> {
        let mut bits = Vec::with_capacity(8 * self.word_len);
        word_bits(&self.words[i], &mut bits);
        bits
    }
}
