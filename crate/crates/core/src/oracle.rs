//! Slow, obviously-correct reference implementations used to check the fast
//! paths. Everything here is exhaustive and only practical for small inputs.

use crate::phy::{conv_encode, CodeParams};

/// Exact per-bit LLRs by enumerating all `2^K` source words.
///
/// Each source word is weighted by `ε^d (1-ε)^(n-d)`, where `d` is the
/// Hamming distance between its codeword and `coded_hat`.
pub fn brute_force_llrs(coded_hat: &[u8], params: &CodeParams, crossover: f64) -> Vec<f64> {
    let k = coded_hat.len() / params.inverse_rate() - params.memory();
    assert!(k <= 20, "enumeration over 2^{k} words is too large");
    let n = coded_hat.len();
    let mut p0 = vec![0.0f64; k];
    let mut p1 = vec![0.0f64; k];
    let mut u = vec![0u8; k];
    for word in 0u32..(1 << k) {
        for (i, b) in u.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
        let c = conv_encode(&u, params);
        let d = c.iter().zip(coded_hat).filter(|(a, b)| a != b).count();
        let w = crossover.powi(d as i32) * (1.0 - crossover).powi((n - d) as i32);
        for i in 0..k {
            if u[i] == 0 {
                p0[i] += w;
            } else {
                p1[i] += w;
            }
        }
    }
    p0.iter().zip(&p1).map(|(a, b)| (a / b).ln()).collect()
}

/// Full `(n+1)×(m+1)` LCS table; returns the LCS length.
pub fn lcs_table<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    t[a.len()][b.len()]
}

/// ROUGE-L F-measure × 100 from [`lcs_table`].
pub fn rouge_l_reference(reference: &str, hypothesis: &str) -> f64 {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    if r.is_empty() || h.is_empty() {
        return 0.0;
    }
    let l = lcs_table(&r, &h) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let (p, rc) = (l / h.len() as f64, l / r.len() as f64);
    200.0 * p * rc / (p + rc)
}

/// Smallest `Σ count_i ℓ_i` over all codeword-length assignments that satisfy
/// Kraft's inequality, by exhaustive search. Zero counts are ignored.
///
/// Only non-decreasing length sequences are enumerated, paired with counts in
/// descending order; any other pairing of the same multiset costs at least as much.
pub fn optimal_prefix_cost(counts: &[u64]) -> u64 {
    let mut counts: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    match counts.len() {
        0 => 0,
        1 => counts[0],
        k => {
            assert!(k <= 12, "exhaustive search over {k} symbols is too large");
            let mut lens = Vec::with_capacity(k);
            let mut best = u64::MAX;
            search(&counts, &mut lens, 1, 0.0, &mut best);
            best
        }
    }
}

fn search(counts: &[u64], lens: &mut Vec<u32>, min_len: u32, kraft: f64, best: &mut u64) {
    let k = counts.len();
    if lens.len() == k {
        if kraft > 1.0 + 1e-12 {
            return;
        }
        let cost = counts.iter().zip(lens.iter()).map(|(c, &l)| c * l as u64).sum();
        *best = (*best).min(cost);
        return;
    }
    for l in min_len..k as u32 {
        if kraft + 0.5f64.powi(l as i32) > 1.0 + 1e-12 {
            continue;
        }
        lens.push(l);
        search(counts, lens, l, kraft + 0.5f64.powi(l as i32), best);
        lens.pop();
    }
}

/// Word posterior straight from bit posteriors, in the linear domain.
pub fn word_posterior_direct(llrs: &[f64], candidates: &[String]) -> Vec<f64> {
    let weights: Vec<f64> = candidates
        .iter()
        .map(|w| {
            let mut bits = Vec::new();
            crate::textcodec::word_bits(w, &mut bits);
            bits.iter()
                .zip(llrs)
                .map(|(&b, &l)| if b == 0 { 1.0 / (1.0 + (-l).exp()) } else { 1.0 / (1.0 + l.exp()) })
                .product()
        })
        .collect();
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Compares the fast implementations against the oracles above on random
/// inputs drawn from `seed`.
pub fn self_check(seed: u64) -> Vec<CheckResult> {
    use rand::{Rng, SeedableRng};

    use crate::bcjr::bcjr_decode;
    use crate::header::{decode_header, huffman_code_lengths, FrameHeader, LengthHistogram};
    use crate::metrics::rouge_l;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let params = CodeParams::default();
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for &eps in &[0.05, 0.2, 0.45] {
        for _ in 0..50 {
            let k = rng.random_range(1..=10);
            let u: Vec<u8> = (0..k).map(|_| rng.random_range(0..2)).collect();
            let mut c = conv_encode(&u, &params);
            c.iter_mut().for_each(|b| *b ^= rng.random_bool(eps) as u8);
            let fast = bcjr_decode(&c, &params, eps).map(|l| l.0).unwrap_or_default();
            let slow = brute_force_llrs(&c, &params, eps);
            for (a, b) in fast.iter().zip(&slow) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    out.push(CheckResult {
        name: "bcjr matches enumeration",
        passed: worst <= 1e-9,
        detail: format!("max |Δλ| = {worst:.3e}"),
    });

    let mut mismatches = 0;
    for _ in 0..300 {
        let text = |rng: &mut rand_chacha::ChaCha8Rng| {
            let n = rng.random_range(0..12);
            (0..n).map(|_| ["a", "b", "c", "d"][rng.random_range(0..4)]).collect::<Vec<_>>().join(" ")
        };
        let (r, h) = (text(&mut rng), text(&mut rng));
        if rouge_l(&r, &h) != rouge_l_reference(&r, &h) {
            mismatches += 1;
        }
    }
    out.push(CheckResult {
        name: "rouge-l matches LCS table",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches in 300 pairs"),
    });

    let mut bad = 0;
    for _ in 0..200 {
        let symbols = rng.random_range(1..=8);
        let hist = LengthHistogram::from_counts((1..=symbols).map(|s| (s, rng.random_range(1..50u64))));
        let lengths = huffman_code_lengths(&hist);
        let cost: u64 = lengths.iter().map(|(s, &l)| hist.count(*s) * l as u64).sum();
        let counts: Vec<u64> = hist.counts().values().copied().collect();
        if cost != optimal_prefix_cost(&counts) {
            bad += 1;
        }
    }
    out.push(CheckResult {
        name: "huffman cost is optimal",
        passed: bad == 0,
        detail: format!("{bad} suboptimal of 200"),
    });

    let mut bad = 0;
    for _ in 0..200 {
        // at most 8 distinct lengths keeps every codeword within 7 bits
        let palette: Vec<usize> = (0..rng.random_range(1..=8)).map(|_| rng.random_range(1..=31)).collect();
        let n = rng.random_range(1..200);
        let lengths: Vec<usize> = (0..n).map(|_| palette[rng.random_range(0..palette.len())]).collect();
        let ok = FrameHeader::encode(&lengths)
            .and_then(|h| decode_header(&h.to_bits()))
            .is_ok_and(|back| back == lengths);
        bad += usize::from(!ok);
    }
    out.push(CheckResult {
        name: "header round trip",
        passed: bad == 0,
        detail: format!("{bad} failures of 200"),
    });
    out
}
