//! Physical layer: convolutional encoder, random interleaver, Gray QPSK,
//! complex AWGN and hard-decision demodulation.
//!
//! All randomness comes from ChaCha8 streams seeded with a `u64`, so frames,
//! permutations and noise are reproducible from the seed alone.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feed-forward convolutional code of rate `1/generators.len()`.
///
/// Each generator is a polynomial of degree at most `memory`; its MSB taps
/// the current input bit and its LSB the oldest register bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    memory: usize,
    generators: Vec<u32>,
}

impl Default for CodeParams {
    /// The (7, 5) octal code: ν = 2, R = 1/2.
    fn default() -> Self {
        Self { memory: 2, generators: vec![0o7, 0o5] }
    }
}

impl CodeParams {
    pub fn new(memory: usize, generators: Vec<u32>) -> Result<Self> {
        if memory == 0 || memory > 16 {
            return Err(Error::InvalidCode(format!("memory {memory} outside 1..=16")));
        }
        if generators.len() < 2 {
            return Err(Error::InvalidCode("need at least two generators (1/R >= 2)".into()));
        }
        for &g in &generators {
            if g == 0 || g >= 1 << (memory + 1) {
                return Err(Error::InvalidCode(format!(
                    "generator {g:o} (octal) is not a nonzero polynomial of degree <= {memory}"
                )));
            }
        }
        Ok(Self { memory, generators })
    }

    /// Parses generators written in octal, e.g. `["7", "5"]`.
    pub fn from_octal<S: AsRef<str>>(memory: usize, generators: &[S]) -> Result<Self> {
        let gens = generators
            .iter()
            .map(|g| {
                u32::from_str_radix(g.as_ref().trim(), 8)
                    .map_err(|e| Error::InvalidCode(format!("bad octal generator {:?}: {e}", g.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(memory, gens)
    }

    /// ν
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// 1/R, coded bits per input bit.
    pub fn inverse_rate(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// M = (K + ν)/R
    pub fn coded_len(&self, k: usize) -> usize {
        (k + self.memory) * self.inverse_rate()
    }

    /// Output bits for `input` leaving `state`, plus the next state.
    ///
    /// `state` holds the previous `memory` inputs, most recent in the top bit.
    pub fn step(&self, state: usize, input: u8) -> (usize, impl Iterator<Item = u8> + '_) {
        let reg = ((input as usize) << self.memory) | state;
        let out = self.generators.iter().map(move |&g| ((reg as u32 & g).count_ones() & 1) as u8);
        (reg >> 1, out)
    }
}

/// Shift-register encoding followed by ν zero flush bits.
pub fn conv_encode(u: &[u8], params: &CodeParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(params.coded_len(u.len()));
    let mut state = 0;
    let tail = std::iter::repeat_n(0u8, params.memory());
    for bit in u.iter().copied().chain(tail) {
        let (next, outputs) = params.step(state, bit & 1);
        out.extend(outputs);
        state = next;
    }
    debug_assert_eq!(state, 0);
    out
}

/// Pseudo-random permutation π of `0..len`.
///
/// Fisher–Yates driven by ChaCha8 seeded with `seed_from_u64(seed)`: for
/// `i = len-1 down to 1`, swap `i` with `next_u64() % (i + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            perm.swap(i, j);
        }
        Self { perm }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// `b[i] = c[π(i)]`
    pub fn interleave<T: Copy>(&self, c: &[T]) -> Vec<T> {
        assert_eq!(c.len(), self.perm.len(), "interleaver length mismatch");
        self.perm.iter().map(|&p| c[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.perm.len(), "interleaver length mismatch");
        let mut c = vec![T::default(); b.len()];
        for (&p, &v) in self.perm.iter().zip(b) {
            c[p] = v;
        }
        c
    }
}

pub fn interleave(c: &[u8], seed: u64) -> Vec<u8> {
    Interleaver::new(c.len(), seed).interleave(c)
}

pub fn deinterleave(b: &[u8], seed: u64) -> Vec<u8> {
    Interleaver::new(b.len(), seed).deinterleave(b)
}

/// Gray QPSK: `(b0, b1) -> (A/√2)((1-2b0) + j(1-2b1))`.
pub fn qpsk_modulate(bits: &[u8], amplitude: f64) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::OddBitCount(bits.len()));
    }
    let a = amplitude / std::f64::consts::SQRT_2;
    Ok(bits
        .chunks_exact(2)
        .map(|p| Complex64::new(a * (1.0 - 2.0 * p[0] as f64), a * (1.0 - 2.0 * p[1] as f64)))
        .collect())
}

/// Adds CN(0, σ²) noise, σ²/2 per real dimension.
pub fn awgn_with<R: rand::Rng + ?Sized>(x: &[Complex64], sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    assert!(sigma2 >= 0.0, "noise power must be nonnegative");
    if sigma2 == 0.0 {
        return x.to_vec();
    }
    let sd = (sigma2 / 2.0).sqrt();
    x.iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s + Complex64::new(sd * re, sd * im)
        })
        .collect()
}

pub fn awgn(x: &[Complex64], sigma2: f64, seed: u64) -> Vec<Complex64> {
    awgn_with(x, sigma2, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Sign slicer per dimension; a bit is 0 iff its component is `>= 0`.
pub fn qpsk_demod_hard(y: &[Complex64]) -> Vec<u8> {
    y.iter()
        .flat_map(|s| [(s.re < 0.0) as u8, (s.im < 0.0) as u8])
        .collect()
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub const CROSSOVER_FLOOR: f64 = 1e-12;

/// Crossover probability of the BSC seen after hard QPSK demodulation,
/// `ε = Q(√SNR)`, clamped to `[1e-12, 0.5 - 1e-12]`.
pub fn crossover_from_snr(snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    q_function(snr.sqrt()).clamp(CROSSOVER_FLOOR, 0.5 - CROSSOVER_FLOOR)
}

/// AWGN channel operating point; SNR is `A²/σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub snr_db: f64,
    pub amplitude: f64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64) -> Self {
        Self { snr_db, amplitude: 1.0 }
    }

    /// A channel with `σ² = 0`.
    pub fn noiseless() -> Self {
        Self::new(f64::INFINITY)
    }

    pub fn sigma2(&self) -> f64 {
        self.amplitude * self.amplitude / 10f64.powf(self.snr_db / 10.0)
    }

    pub fn crossover(&self) -> f64 {
        crossover_from_snr(self.snr_db)
    }
}

/// What the receiver holds after one pass through the link.
#[derive(Debug, Clone)]
pub struct Reception {
    /// Deinterleaved hard coded bits ĉ.
    pub coded_hat: Vec<u8>,
    /// Transmitted coded bits c, kept for raw-BER bookkeeping.
    pub coded: Vec<u8>,
}

impl Reception {
    pub fn raw_bit_errors(&self) -> usize {
        self.coded.iter().zip(&self.coded_hat).filter(|(a, b)| a != b).count()
    }
}

/// Encode, interleave, modulate, add noise, demodulate, deinterleave.
///
/// The interleaver uses `seed` and the noise uses an independent stream of
/// the same seed.
pub fn transmit(u: &[u8], params: &CodeParams, channel: &ChannelConfig, seed: u64) -> Result<Reception> {
    let coded = conv_encode(u, params);
    let pi = Interleaver::new(coded.len(), seed);
    let b = pi.interleave(&coded);
    let x = qpsk_modulate(&b, channel.amplitude)?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);
    let y = awgn_with(&x, channel.sigma2(), &mut noise_rng);
    let b_hat = qpsk_demod_hard(&y);
    Ok(Reception { coded_hat: pi.deinterleave(&b_hat), coded })
}
