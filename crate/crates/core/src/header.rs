//! Word-length metadata compression with canonical Huffman codes.
//!
//! Frame header layout, bit-exact, MSB first in every field:
//!
//! ```text
//! [N: 16][Λmax: 5][Λmax × 3-bit codeword lengths, word length 1..=Λmax][N codewords]
//! ```
//!
//! A codeword-length field of 0 marks a word length absent from the message.
//! Only the codeword-length fields (Φ bits) and the codewords (ΣΘ bits) count
//! toward the header overhead; the two framing fields do not.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::textcodec::WordStream;

/// Width of each serialized codeword-length field.
pub const CODE_LEN_FIELD_BITS: usize = 3;
/// Longest codeword a 3-bit field can carry.
pub const MAX_CODEWORD_LEN: u8 = 7;
pub const WORD_COUNT_FIELD_BITS: usize = 16;
pub const MAX_WORD_LEN_FIELD_BITS: usize = 5;
/// Longest word length the 5-bit Λmax field can describe.
pub const MAX_WORD_LEN: usize = (1 << MAX_WORD_LEN_FIELD_BITS) - 1;

/// Occurrence count per word length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LengthHistogram {
    counts: BTreeMap<usize, u64>,
}

impl LengthHistogram {
    pub fn from_lengths(lengths: &[usize]) -> Self {
        let mut counts = BTreeMap::new();
        for &l in lengths {
            *counts.entry(l).or_insert(0) += 1;
        }
        Self { counts }
    }

    /// Zero counts are dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (usize, u64)>) -> Self {
        Self { counts: counts.into_iter().filter(|&(_, c)| c > 0).collect() }
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn count(&self, word_len: usize) -> u64 {
        self.counts.get(&word_len).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// One codeword, right-aligned in `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codeword {
    pub bits: u64,
    pub len: u8,
}

impl Codeword {
    pub fn push_bits(&self, out: &mut Vec<u8>) {
        out.extend((0..self.len).rev().map(|i| ((self.bits >> i) & 1) as u8));
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Word length → codeword map in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalCodebook {
    entries: BTreeMap<usize, Codeword>,
}

impl CanonicalCodebook {
    /// Assigns canonical codes to `(word_len, code_len)` pairs already sorted
    /// in the desired within-length order.
    fn assign(mut order: Vec<(usize, u8)>) -> Self {
        // stable: keeps the caller's order within each codeword length
        order.sort_by_key(|&(_, len)| len);
        let mut entries = BTreeMap::new();
        let mut code: u64 = 0;
        let mut prev_len = order.first().map_or(0, |&(_, l)| l);
        for (i, &(sym, len)) in order.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (len - prev_len);
            }
            prev_len = len;
            entries.insert(sym, Codeword { bits: code, len });
        }
        Self { entries }
    }

    /// Rebuilds the codebook the receiver sees: only codeword lengths are
    /// known, so equal-length codewords are ordered by ascending word length.
    pub fn from_code_lengths(code_lengths: &BTreeMap<usize, u8>) -> Result<Self> {
        let order: Vec<(usize, u8)> = code_lengths
            .iter()
            .filter(|&(_, &l)| l > 0)
            .map(|(&s, &l)| (s, l))
            .collect();
        if order.is_empty() {
            return Err(Error::MalformedHeader("no word length has a codeword".into()));
        }
        if order.len() > 1 {
            // over-subscribed lengths cannot form a prefix code
            let kraft: f64 = order.iter().map(|&(_, l)| 0.5f64.powi(l as i32)).sum();
            if kraft > 1.0 + 1e-12 {
                return Err(Error::MalformedHeader(format!("Kraft sum {kraft} exceeds 1")));
            }
        }
        Ok(Self::assign(order))
    }

    pub fn get(&self, word_len: usize) -> Option<Codeword> {
        self.entries.get(&word_len).copied()
    }

    pub fn entries(&self) -> &BTreeMap<usize, Codeword> {
        &self.entries
    }

    /// Largest word length with a codeword, `Λmax`.
    pub fn max_word_length(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn code_lengths(&self) -> BTreeMap<usize, u8> {
        self.entries.iter().map(|(&s, c)| (s, c.len)).collect()
    }

    /// Same codeword lengths, re-assigned in the receiver's canonical order.
    pub fn to_transmittable(&self) -> Self {
        Self::from_code_lengths(&self.code_lengths()).expect("codebook built from a valid code")
    }
}

/// Huffman codeword lengths via the two-queue construction.
///
/// Leaves enter sorted by (count, word length). On equal weight the
/// internal-node queue is dequeued before the leaf queue.
pub fn huffman_code_lengths(hist: &LengthHistogram) -> BTreeMap<usize, u8> {
    let mut leaves: Vec<(u64, usize)> = hist.counts.iter().map(|(&s, &c)| (c, s)).collect();
    leaves.sort_unstable();
    if leaves.len() == 1 {
        return BTreeMap::from([(leaves[0].1, 1)]);
    }
    let mut depth: BTreeMap<usize, u8> = leaves.iter().map(|&(_, s)| (s, 0)).collect();
    let mut leaf_q: VecDeque<(u64, Vec<usize>)> = leaves.into_iter().map(|(c, s)| (c, vec![s])).collect();
    let mut node_q: VecDeque<(u64, Vec<usize>)> = VecDeque::new();

    type Queue = VecDeque<(u64, Vec<usize>)>;
    let pop = |leaf_q: &mut Queue, node_q: &mut Queue| {
        match (leaf_q.front(), node_q.front()) {
            (Some(l), Some(n)) if n.0 <= l.0 => node_q.pop_front(),
            (Some(_), _) => leaf_q.pop_front(),
            (None, _) => node_q.pop_front(),
        }
        .expect("at least two items remain")
    };
    while leaf_q.len() + node_q.len() > 1 {
        let (wa, mut a) = pop(&mut leaf_q, &mut node_q);
        let (wb, b) = pop(&mut leaf_q, &mut node_q);
        for s in a.iter().chain(&b) {
            *depth.get_mut(s).unwrap() += 1;
        }
        a.extend(b);
        node_q.push_back((wa + wb, a));
    }
    depth
}

/// Huffman code for `hist` with codewords assigned canonically; equal-length
/// codewords are ordered by descending count, then ascending word length.
pub fn build_codebook(hist: &LengthHistogram) -> CanonicalCodebook {
    let lengths = huffman_code_lengths(hist);
    let mut order: Vec<(usize, u8)> = lengths.into_iter().collect();
    order.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(hist.count(b.0).cmp(&hist.count(a.0)))
            .then(a.0.cmp(&b.0))
    });
    CanonicalCodebook::assign(order)
}

/// Concatenates the codeword of every word length, ΣΘ bits.
pub fn encode_lengths(lengths: &[usize], cb: &CanonicalCodebook) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for &l in lengths {
        cb.get(l).ok_or(Error::UnknownLength(l))?.push_bits(&mut out);
    }
    Ok(out)
}

fn push_field(value: u64, width: usize, out: &mut Vec<u8>) {
    out.extend((0..width).rev().map(|i| ((value >> i) & 1) as u8));
}

/// One 3-bit codeword-length field per word length `1..=Λmax`, Φ = 3Λmax bits.
pub fn serialize_codebook(cb: &CanonicalCodebook) -> Result<Vec<u8>> {
    let lambda_max = cb.max_word_length();
    let mut out = Vec::with_capacity(CODE_LEN_FIELD_BITS * lambda_max);
    for word_len in 1..=lambda_max {
        let len = cb.get(word_len).map_or(0, |c| c.len);
        if len > MAX_CODEWORD_LEN {
            return Err(Error::CodewordTooLong(len));
        }
        push_field(len as u64, CODE_LEN_FIELD_BITS, &mut out);
    }
    Ok(out)
}

/// Inverse of [`serialize_codebook`], yielding the receiver's canonical codebook.
pub fn deserialize_codebook(bits: &[u8], lambda_max: usize) -> Result<CanonicalCodebook> {
    let need = CODE_LEN_FIELD_BITS * lambda_max;
    if bits.len() < need {
        return Err(Error::MalformedHeader(format!(
            "codebook needs {need} bits, {} available",
            bits.len()
        )));
    }
    let code_lengths: BTreeMap<usize, u8> = bits[..need]
        .chunks_exact(CODE_LEN_FIELD_BITS)
        .enumerate()
        .map(|(i, f)| (i + 1, read_field(f) as u8))
        .collect();
    CanonicalCodebook::from_code_lengths(&code_lengths)
}

fn read_field(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// Header overhead ρ = (ΣΘ + Φ) / ΣK.
pub fn overhead(sum_theta: usize, phi: usize, payload: usize) -> Result<f64> {
    if payload == 0 {
        return Err(Error::ZeroPayload);
    }
    Ok((sum_theta + phi) as f64 / payload as f64)
}

/// The word-length metadata of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameHeader {
    pub word_count: usize,
    pub max_word_length: usize,
    /// Φ bits of codeword-length fields.
    pub codebook_field_bits: Vec<u8>,
    /// ΣΘ bits of concatenated codewords.
    pub length_codewords: Vec<u8>,
}

impl FrameHeader {
    /// Builds the header for `lengths` using the receiver-reconstructible codebook.
    pub fn encode(lengths: &[usize]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::MalformedHeader("no words to describe".into()));
        }
        if lengths.len() >= 1 << WORD_COUNT_FIELD_BITS {
            return Err(Error::TooManyWords(lengths.len()));
        }
        if let Some(&l) = lengths.iter().find(|&&l| l == 0 || l > MAX_WORD_LEN) {
            return Err(Error::WordTooLong(l));
        }
        let cb = build_codebook(&LengthHistogram::from_lengths(lengths)).to_transmittable();
        Ok(Self {
            word_count: lengths.len(),
            max_word_length: cb.max_word_length(),
            codebook_field_bits: serialize_codebook(&cb)?,
            length_codewords: encode_lengths(lengths, &cb)?,
        })
    }

    /// ΣΘ
    pub fn sum_theta(&self) -> usize {
        self.length_codewords.len()
    }

    /// Φ
    pub fn phi(&self) -> usize {
        self.codebook_field_bits.len()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            WORD_COUNT_FIELD_BITS + MAX_WORD_LEN_FIELD_BITS + self.phi() + self.sum_theta(),
        );
        push_field(self.word_count as u64, WORD_COUNT_FIELD_BITS, &mut out);
        push_field(self.max_word_length as u64, MAX_WORD_LEN_FIELD_BITS, &mut out);
        out.extend_from_slice(&self.codebook_field_bits);
        out.extend_from_slice(&self.length_codewords);
        out
    }
}

/// Parses a full frame header and returns the `N` word lengths it carries.
pub fn decode_header(bits: &[u8]) -> Result<Vec<usize>> {
    let framing = WORD_COUNT_FIELD_BITS + MAX_WORD_LEN_FIELD_BITS;
    if bits.len() < framing {
        return Err(Error::MalformedHeader("truncated framing fields".into()));
    }
    let n = read_field(&bits[..WORD_COUNT_FIELD_BITS]) as usize;
    let lambda_max = read_field(&bits[WORD_COUNT_FIELD_BITS..framing]) as usize;
    decode_lengths(&bits[framing..], lambda_max, n)
}

/// Decodes `n` word lengths from serialized codebook fields followed by codewords.
pub fn decode_lengths(bits: &[u8], lambda_max: usize, n: usize) -> Result<Vec<usize>> {
    let cb = deserialize_codebook(bits, lambda_max)?;
    let lookup: HashMap<(u8, u64), usize> =
        cb.entries().iter().map(|(&s, c)| ((c.len, c.bits), s)).collect();
    let max_len = cb.entries().values().map(|c| c.len).max().unwrap_or(0);

    let mut pos = CODE_LEN_FIELD_BITS * lambda_max;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (mut code, mut len) = (0u64, 0u8);
        loop {
            let Some(&b) = bits.get(pos) else {
                return Err(Error::MalformedHeader(format!(
                    "ran out of bits after {} of {n} word lengths",
                    out.len()
                )));
            };
            pos += 1;
            code = (code << 1) | b as u64;
            len += 1;
            if let Some(&s) = lookup.get(&(len, code)) {
                out.push(s);
                break;
            }
            if len >= max_len {
                return Err(Error::MalformedHeader(format!("invalid codeword at bit {pos}")));
            }
        }
    }
    if pos != bits.len() {
        return Err(Error::MalformedHeader(format!("{} trailing bits", bits.len() - pos)));
    }
    Ok(out)
}

/// Overhead figures for one message.
#[derive(Debug, Clone, PartialEq)]
pub struct HeaderStats {
    pub word_count: usize,
    pub letters: usize,
    pub payload_bits: usize,
    pub sum_theta: usize,
    pub phi: usize,
    pub rho: f64,
}

pub fn header_stats(ws: &WordStream) -> Result<HeaderStats> {
    let header = FrameHeader::encode(ws.lengths())?;
    Ok(HeaderStats {
        word_count: ws.len(),
        letters: ws.total_letters(),
        payload_bits: ws.payload_bits(),
        sum_theta: header.sum_theta(),
        phi: header.phi(),
        rho: overhead(header.sum_theta(), header.phi(), ws.payload_bits())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_hist() -> LengthHistogram {
        LengthHistogram::from_counts([
            (3, 31),
            (4, 21),
            (2, 19),
            (5, 14),
            (6, 10),
            (8, 8),
            (7, 7),
            (10, 4),
            (1, 4),
            (9, 2),
            (12, 1),
            (11, 0),
        ])
    }

    #[test]
    fn reproduces_table2() {
        let cb = build_codebook(&table2_hist());
        let expected = [
            (3, "00"),
            (4, "01"),
            (2, "100"),
            (5, "101"),
            (6, "1100"),
            (8, "1101"),
            (7, "1110"),
            (10, "11110"),
            (1, "111110"),
            (9, "1111110"),
            (12, "1111111"),
        ];
        for (len, code) in expected {
            assert_eq!(cb.get(len).unwrap().to_string(), code, "word length {len}");
        }
        assert!(cb.get(11).is_none());
        assert_eq!(cb.max_word_length(), 12);
        assert_eq!(serialize_codebook(&cb).unwrap().len(), 36);
    }

    #[test]
    fn single_symbol_gets_one_bit() {
        let cb = build_codebook(&LengthHistogram::from_counts([(5, 10)]));
        assert_eq!(cb.get(5).unwrap().to_string(), "0");
        let fields = serialize_codebook(&cb).unwrap();
        assert_eq!(fields.len(), 15);
        let values: Vec<u64> = fields.chunks(3).map(read_field).collect();
        assert_eq!(values, vec![0, 0, 0, 0, 1]);
    }

    #[test]
    fn two_symbols() {
        let cb = build_codebook(&LengthHistogram::from_counts([(2, 3), (7, 9)]));
        assert_eq!(cb.get(7).unwrap().to_string(), "0");
        assert_eq!(cb.get(2).unwrap().to_string(), "1");
    }

    #[test]
    fn encodes_with_table2() {
        let cb = build_codebook(&table2_hist());
        assert_eq!(encode_lengths(&[3], &cb).unwrap(), vec![0, 0]);
        assert_eq!(encode_lengths(&[11], &cb).unwrap_err(), Error::UnknownLength(11));
    }

    #[test]
    fn overhead_arithmetic() {
        assert!((overhead(368, 36, 4256).unwrap() - 0.0949).abs() < 5e-5);
        assert_eq!(overhead(0, 0, 17).unwrap(), 0.0);
        assert!((overhead(100, 36, 1000).unwrap() - 0.136).abs() < 1e-12);
        assert_eq!(overhead(1, 1, 0).unwrap_err(), Error::ZeroPayload);
    }

    #[test]
    fn rejects_deep_trees() {
        // Fibonacci weights force a degenerate chain of depth 8
        let hist = LengthHistogram::from_counts(
            [1u64, 1, 2, 3, 5, 8, 13, 21, 34].into_iter().enumerate().map(|(i, c)| (i + 1, c)),
        );
        let cb = build_codebook(&hist);
        assert_eq!(serialize_codebook(&cb).unwrap_err(), Error::CodewordTooLong(8));
    }

    #[test]
    fn truncated_header_is_malformed() {
        let header = FrameHeader::encode(&[3, 4, 3, 5, 2]).unwrap().to_bits();
        for cut in [0, 10, 21, 30, header.len() - 1] {
            assert!(matches!(decode_header(&header[..cut]), Err(Error::MalformedHeader(_))));
        }
    }

    #[test]
    fn constant_length_header() {
        let lengths = vec![4; 9];
        let header = FrameHeader::encode(&lengths).unwrap();
        assert_eq!(header.sum_theta(), 9);
        assert_eq!(decode_header(&header.to_bits()).unwrap(), lengths);
    }

    #[test]
    fn receiver_order_differs_only_within_equal_lengths() {
        let cb = build_codebook(&table2_hist());
        let rx = cb.to_transmittable();
        assert_eq!(cb.code_lengths(), rx.code_lengths());
        assert_eq!(rx.get(7).unwrap().to_string(), "1101");
        assert_eq!(rx.get(8).unwrap().to_string(), "1110");
    }

    #[test]
    fn framing_limits() {
        assert_eq!(FrameHeader::encode(&[3, 32]).unwrap_err(), Error::WordTooLong(32));
        assert!(FrameHeader::encode(&[]).is_err());
    }
}
