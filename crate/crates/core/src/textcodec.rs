//! Text to word stream to bits, and back.
//!
//! Transmitted text is reduced to its punctuation-free word sequence. Word
//! boundaries travel separately as word-length metadata (see [`crate::header`]),
//! so the payload is just the concatenated 8-bit character codes, MSB first.
//!
//! Received words may contain any byte value. They are held as Latin-1
//! strings: one `char` per byte, so `chars().count()` is always the byte count.

use std::collections::BTreeSet;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

/// Punctuation-free word sequence with per-word letter counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WordStream {
    words: Vec<String>,
    lengths: Vec<usize>,
}

impl WordStream {
    /// Builds a stream from words whose characters all have codes in `0..=255`.
    pub fn new<S: Into<String>>(words: impl IntoIterator<Item = S>) -> Result<Self> {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let mut lengths = Vec::with_capacity(words.len());
        for w in &words {
            if let Some(ch) = w.chars().find(|&c| c as u32 > 0xFF) {
                return Err(Error::NonAsciiCharacter { ch, code: ch as u32 });
            }
            lengths.push(w.chars().count());
        }
        Ok(Self { words, lengths })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Number of words, `N`.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Total letter count `L`.
    pub fn total_letters(&self) -> usize {
        self.lengths.iter().sum()
    }

    /// Payload size in bits, `K = 8L`.
    pub fn payload_bits(&self) -> usize {
        8 * self.total_letters()
    }

    /// Words joined by single spaces.
    pub fn joined(&self) -> String {
        self.words.join(" ")
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }
}

fn is_stripped(c: char) -> bool {
    c.is_whitespace() || c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Removes punctuation and whitespace, returning the remaining words in order.
///
/// Whitespace separates words; punctuation inside a token is deleted without
/// splitting it. Case is preserved. Only 7-bit ASCII survives.
pub fn strip_message(msg: &str) -> Result<WordStream> {
    let mut words = Vec::new();
    for token in msg.split(char::is_whitespace) {
        let word: String = token.chars().filter(|&c| !is_stripped(c)).collect();
        if word.is_empty() {
            continue;
        }
        if let Some(ch) = word.chars().find(|c| !c.is_ascii()) {
            return Err(Error::NonAsciiCharacter { ch, code: ch as u32 });
        }
        words.push(word);
    }
    if words.is_empty() {
        return Err(Error::EmptyAfterStrip);
    }
    WordStream::new(words)
}

/// Appends the 8-bit code of every character of `word`, MSB first.
pub fn word_bits(word: &str, out: &mut Vec<u8>) {
    for ch in word.chars() {
        let byte = ch as u32 as u8;
        out.extend((0..8).rev().map(|i| (byte >> i) & 1));
    }
}

/// Concatenated 8-bit character codes of every word, `K = 8L` bits.
pub fn ascii_encode(ws: &WordStream) -> Vec<u8> {
    let mut bits = Vec::with_capacity(ws.payload_bits());
    for w in ws.words() {
        word_bits(w, &mut bits);
    }
    bits
}

/// Packs 8 MSB-first bits into a Latin-1 character.
fn byte_char(bits: &[u8]) -> char {
    char::from(bits.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1)))
}

/// Splits a payload back into words using the word-length metadata.
pub fn ascii_decode(bits: &[u8], lengths: &[usize]) -> Result<WordStream> {
    let expected = 8 * lengths.iter().sum::<usize>();
    if bits.len() != expected {
        return Err(Error::LengthMismatch { expected, actual: bits.len() });
    }
    let mut chunks = bits.chunks_exact(8);
    let words = lengths
        .iter()
        .map(|&len| chunks.by_ref().take(len).map(byte_char).collect::<String>());
    WordStream::new(words.collect::<Vec<_>>())
}

/// Space-joins `words`, replacing every (0-based) masked position with `mask_token`.
pub fn insert_spaces<S: AsRef<str>>(
    words: &[S],
    mask_positions: &BTreeSet<usize>,
    mask_token: &str,
) -> String {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| if mask_positions.contains(&i) { mask_token } else { w.as_ref() })
        .collect::<Vec<_>>()
        .join(" ")
}
