use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clsec::bcjr::{bcjr_decode, bit_posteriors};
use clsec::oracle::brute_force_llrs;
use clsec::phy::{
    awgn, conv_encode, deinterleave, interleave, q_function, qpsk_demod_hard, qpsk_modulate, transmit,
    ChannelConfig, CodeParams, Interleaver,
};

fn bits(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 1..max)
}

proptest! {
    #[test]
    fn encoded_length_and_flush(u in bits(200)) {
        let p = CodeParams::default();
        let c = conv_encode(&u, &p);
        prop_assert_eq!(c.len(), p.coded_len(u.len()));
        // the flushed encoder ends in state 0: appending zeros adds only zeros
        let mut padded = u.clone();
        padded.extend([0, 0]);
        prop_assert!(conv_encode(&padded, &p)[c.len()..].iter().all(|&b| b == 0));
    }

    #[test]
    fn interleaver_is_a_permutation(c in bits(300), seed in any::<u64>()) {
        prop_assert_eq!(deinterleave(&interleave(&c, seed), seed), c.clone());
        let mut perm = Interleaver::new(c.len(), seed).permutation().to_vec();
        perm.sort_unstable();
        prop_assert_eq!(perm, (0..c.len()).collect::<Vec<_>>());
    }

    #[test]
    fn noiseless_chain_reproduces_source(u in bits(300), seed in any::<u64>()) {
        let p = CodeParams::default();
        let ch = ChannelConfig::noiseless();
        let rx = transmit(&u, &p, &ch, seed).unwrap();
        prop_assert_eq!(rx.raw_bit_errors(), 0);
        let llrs = bcjr_decode(&rx.coded_hat, &p, ch.crossover()).unwrap();
        prop_assert_eq!(llrs.hard_decision(), u);
    }

    #[test]
    fn llrs_vanish_on_a_useless_channel(u in bits(40), flips in prop::collection::vec(any::<bool>(), 84)) {
        let p = CodeParams::default();
        let mut c = conv_encode(&u, &p);
        c.iter_mut().zip(&flips).for_each(|(b, &f)| *b ^= f as u8);
        let llrs = bcjr_decode(&c, &p, 0.5).unwrap();
        prop_assert!(llrs.as_slice().iter().all(|l| l.abs() < 1e-9));
    }

    #[test]
    fn posteriors_sum_to_one(l in prop::collection::vec(-60.0f64..60.0, 1..50)) {
        for (a, b) in bit_posteriors(&l) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    // On an error-free received codeword every |λ| shrinks as ε grows. This
    // does not extend to arbitrary received words; see the test below.
    #[test]
    fn reliability_falls_with_crossover_on_codewords(u in bits(11)) {
        let p = CodeParams::default();
        let c = conv_encode(&u, &p);
        let mut prev: Option<Vec<f64>> = None;
        for i in 1..50 {
            let l = bcjr_decode(&c, &p, i as f64 / 100.0).unwrap().0;
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&l) {
                    prop_assert!(b.abs() <= a.abs() + 1e-9);
                }
            }
            prev = Some(l);
        }
    }
}

#[test]
fn reliability_can_rise_with_crossover_on_corrupted_words() {
    // Exact enumeration shows the ratio P(0)/P(1) is not monotone in ε once
    // the received word is not a codeword.
    let p = CodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let found = (0..2000).any(|_| {
        let k = rng.random_range(2..=8);
        let u: Vec<u8> = (0..k).map(|_| rng.random_range(0..2)).collect();
        let mut c = conv_encode(&u, &p);
        c.iter_mut().for_each(|b| *b ^= rng.random_bool(0.25) as u8);
        let lo = brute_force_llrs(&c, &p, 0.1);
        let hi = brute_force_llrs(&c, &p, 0.3);
        lo.iter().zip(&hi).any(|(a, b)| b.abs() > a.abs() + 1e-6)
    });
    assert!(found);
}

#[test]
fn qpsk_gray_mapping_and_hard_demod() {
    let x = qpsk_modulate(&[0, 0, 0, 1, 1, 0, 1, 1], 1.0).unwrap();
    let signs: Vec<(bool, bool)> = x.iter().map(|s| (s.re > 0.0, s.im > 0.0)).collect();
    assert_eq!(signs, [(true, true), (true, false), (false, true), (false, false)]);
    assert_eq!(qpsk_demod_hard(&x), vec![0, 0, 0, 1, 1, 0, 1, 1]);
    assert!(qpsk_modulate(&[1], 1.0).is_err());
}

#[test]
fn raw_ber_tracks_q_function() {
    let n = 400_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    for snr_db in [0.0, 2.0, 4.0, 6.0] {
        let ch = ChannelConfig::new(snr_db);
        let y = awgn(&qpsk_modulate(&b, 1.0).unwrap(), ch.sigma2(), 99);
        let errs = qpsk_demod_hard(&y).iter().zip(&b).filter(|(a, c)| a != c).count();
        let q = q_function(10f64.powf(snr_db / 10.0).sqrt());
        let se = (q * (1.0 - q) / n as f64).sqrt();
        let measured = errs as f64 / n as f64;
        assert!((measured - q).abs() <= 3.0 * se, "{snr_db} dB: {measured} vs {q}");
        assert!((ch.crossover() - q).abs() < 1e-15);
    }
}

#[test]
fn decoding_gain_at_low_crossover() {
    let p = CodeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for eps in [0.01, 0.05] {
        let (mut errs, mut total) = (0usize, 0usize);
        for _ in 0..100 {
            let u: Vec<u8> = (0..1000).map(|_| rng.random_range(0..2)).collect();
            let mut c = conv_encode(&u, &p);
            c.iter_mut().for_each(|b| *b ^= rng.random_bool(eps) as u8);
            let hd = bcjr_decode(&c, &p, eps).unwrap().hard_decision();
            errs += hd.iter().zip(&u).filter(|(a, b)| a != b).count();
            total += u.len();
        }
        assert!((errs as f64 / total as f64) < eps, "eps {eps}: {errs}/{total}");
    }
}

#[test]
fn other_codes_decode_exactly() {
    let p = CodeParams::from_octal(3, &["15", "17"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let k = rng.random_range(1..=9);
        let u: Vec<u8> = (0..k).map(|_| rng.random_range(0..2)).collect();
        let mut c = conv_encode(&u, &p);
        c.iter_mut().for_each(|b| *b ^= rng.random_bool(0.1) as u8);
        let fast = bcjr_decode(&c, &p, 0.1).unwrap();
        for (a, b) in fast.as_slice().iter().zip(brute_force_llrs(&c, &p, 0.1)) {
            assert!((a - b.clamp(-50.0, 50.0)).abs() < 1e-9);
        }
    }
}
