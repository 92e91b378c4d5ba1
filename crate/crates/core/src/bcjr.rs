//! Symbol-by-symbol MAP (BCJR) decoding of the terminated convolutional code
//! over the binary symmetric channel left by hard demodulation.
//!
//! Forward and backward recursions run in the log domain over the whole
//! frame, with per-step normalization. Source bits are equiprobable, so the
//! a-posteriori LLR equals the likelihood ratio.

use crate::error::{Error, Result};
use crate::logprob::{ln_prob_one, ln_prob_zero, log_add};
use crate::phy::CodeParams;

/// Output LLRs are clamped to `±LLR_CLAMP`.
pub const LLR_CLAMP: f64 = 50.0;

/// Per-source-bit LLRs `ln P(u=0|ĉ)/P(u=1|ĉ)`; positive favours 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `(P(u=0), P(u=1))` for every bit.
    pub fn bit_posteriors(&self) -> Vec<(f64, f64)> {
        bit_posteriors(&self.0)
    }

    pub fn hard_decision(&self) -> Vec<u8> {
        hard_decision(&self.0)
    }
}

pub fn bit_posteriors(llrs: &[f64]) -> Vec<(f64, f64)> {
    llrs.iter().map(|&l| (ln_prob_zero(l).exp(), ln_prob_one(l).exp())).collect()
}

/// `û = 0` iff `λ >= 0`.
pub fn hard_decision(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| (l < 0.0) as u8).collect()
}

/// State-transition table of a feed-forward code.
#[derive(Debug, Clone)]
pub struct Trellis {
    num_states: usize,
    /// `next[2*s + b]`
    next: Vec<usize>,
    /// Coded outputs of transition `2*s + b`, packed with the first generator in bit 0.
    output: Vec<u32>,
}

impl Trellis {
    pub fn new(params: &CodeParams) -> Self {
        let num_states = params.num_states();
        let mut next = Vec::with_capacity(2 * num_states);
        let mut output = Vec::with_capacity(2 * num_states);
        for s in 0..num_states {
            for b in 0..2u8 {
                let (ns, out) = params.step(s, b);
                next.push(ns);
                output.push(out.enumerate().fold(0u32, |acc, (i, bit)| acc | (bit as u32) << i));
            }
        }
        Self { num_states, next, output }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn next_state(&self, state: usize, input: u8) -> usize {
        self.next[2 * state + input as usize]
    }

    pub fn output(&self, state: usize, input: u8) -> u32 {
        self.output[2 * state + input as usize]
    }
}

fn pack(bits: &[u8]) -> u32 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b & 1) as u32) << i)
}

/// A-posteriori LLRs of the `K` source bits given hard coded bits `ĉ`.
///
/// `coded_hat` must hold `(K + ν)/R` bits from a zero-terminated encoder and
/// `crossover` must lie in `(0, 0.5]`.
pub fn bcjr_decode(coded_hat: &[u8], params: &CodeParams, crossover: f64) -> Result<LlrVector> {
    if !(crossover > 0.0 && crossover <= 0.5) {
        return Err(Error::InvalidCrossover(crossover));
    }
    let n = params.inverse_rate();
    let nu = params.memory();
    if coded_hat.len() % n != 0 || coded_hat.len() / n < nu {
        return Err(Error::LengthMismatch {
            expected: params.coded_len(coded_hat.len() / n),
            actual: coded_hat.len(),
        });
    }
    let steps = coded_hat.len() / n;
    let k = steps - nu;
    let trellis = Trellis::new(params);
    let ns = trellis.num_states();

    let ln_err = crossover.ln();
    let ln_ok = (1.0 - crossover).ln();
    // branch metric by Hamming distance between received and expected outputs
    let metric: Vec<f64> = (0..=n).map(|d| d as f64 * ln_err + (n - d) as f64 * ln_ok).collect();
    let received: Vec<u32> = coded_hat.chunks_exact(n).map(pack).collect();
    let gamma = |t: usize, s: usize, b: u8| {
        metric[(trellis.output(s, b) ^ received[t]).count_ones() as usize]
    };
    let inputs = |t: usize| if t < k { 2u8 } else { 1u8 };

    let neg = f64::NEG_INFINITY;
    let mut alpha = vec![neg; (steps + 1) * ns];
    alpha[0] = 0.0;
    for t in 0..steps {
        let (cur, nxt) = alpha.split_at_mut((t + 1) * ns);
        let cur = &cur[t * ns..];
        let nxt = &mut nxt[..ns];
        for s in 0..ns {
            if cur[s] == neg {
                continue;
            }
            for b in 0..inputs(t) {
                let to = trellis.next_state(s, b);
                nxt[to] = log_add(nxt[to], cur[s] + gamma(t, s, b));
            }
        }
        renormalize(nxt);
    }

    let mut beta = vec![neg; (steps + 1) * ns];
    beta[steps * ns] = 0.0;
    for t in (0..steps).rev() {
        let (cur, nxt) = beta.split_at_mut((t + 1) * ns);
        let cur = &mut cur[t * ns..];
        let nxt = &nxt[..ns];
        for s in 0..ns {
            let mut acc = neg;
            for b in 0..inputs(t) {
                let to = trellis.next_state(s, b);
                if nxt[to] != neg {
                    acc = log_add(acc, gamma(t, s, b) + nxt[to]);
                }
            }
            cur[s] = acc;
        }
        renormalize(cur);
    }

    let llrs = (0..k)
        .map(|t| {
            let (mut zero, mut one) = (neg, neg);
            for s in 0..ns {
                let a = alpha[t * ns + s];
                if a == neg {
                    continue;
                }
                for b in 0..2u8 {
                    let to = trellis.next_state(s, b);
                    let v = a + gamma(t, s, b) + beta[(t + 1) * ns + to];
                    if b == 0 {
                        zero = log_add(zero, v);
                    } else {
                        one = log_add(one, v);
                    }
                }
            }
            clamp_llr(zero - one)
        })
        .collect();
    Ok(LlrVector(llrs))
}

fn renormalize(xs: &mut [f64]) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_finite() {
        xs.iter_mut().for_each(|x| *x -= max);
    }
}

pub fn clamp_llr(l: f64) -> f64 {
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}
