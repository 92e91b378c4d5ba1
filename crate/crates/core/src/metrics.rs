//! Bit, word and text-overlap error measures.

use crate::error::{Error, Result};

/// Fraction of differing bits.
pub fn ber(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

/// Fraction of positions whose words differ in any character.
pub fn wer<S: AsRef<str>, T: AsRef<str>>(reference: &[S], hypothesis: &[T]) -> Result<f64> {
    if reference.len() != hypothesis.len() {
        return Err(Error::WordCountMismatch { reference: reference.len(), hypothesis: hypothesis.len() });
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let diff = reference.iter().zip(hypothesis).filter(|(r, h)| r.as_ref() != h.as_ref()).count();
    Ok(diff as f64 / reference.len() as f64)
}

/// Length of the longest common subsequence, in two rows of memory.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut prev = vec![0usize; short.len() + 1];
    let mut cur = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}

/// LCS F-measure between token sequences, scaled to [0, 100].
pub fn rouge_l_tokens<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> f64 {
    if reference.is_empty() || hypothesis.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(reference, hypothesis) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let p = lcs / hypothesis.len() as f64;
    let r = lcs / reference.len() as f64;
    100.0 * 2.0 * p * r / (p + r)
}

/// ROUGE-L over whitespace-separated words.
pub fn rouge_l(reference: &str, hypothesis: &str) -> f64 {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    rouge_l_tokens(&r, &h)
}
