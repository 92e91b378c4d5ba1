use std::path::PathBuf;

use proptest::prelude::*;

use clsec::corpus::load_corpus;
use clsec::header::{
    build_codebook, decode_header, header_stats, huffman_code_lengths, CanonicalCodebook, FrameHeader,
    LengthHistogram,
};
use clsec::oracle::optimal_prefix_cost;
use clsec::textcodec::{ascii_decode, ascii_encode, strip_message, WordStream};

fn word() -> impl Strategy<Value = String> {
    "[A-Za-z0-9]{1,12}"
}

fn histogram() -> impl Strategy<Value = LengthHistogram> {
    prop::collection::btree_map(1usize..=31, 1u64..500, 2..=8).prop_map(LengthHistogram::from_counts)
}

proptest! {
    #[test]
    fn ascii_round_trip(words in prop::collection::vec(word(), 1..40)) {
        let ws = WordStream::new(words).unwrap();
        let bits = ascii_encode(&ws);
        prop_assert_eq!(bits.len(), 8 * ws.total_letters());
        prop_assert_eq!(ascii_decode(&bits, ws.lengths()).unwrap(), ws);
    }

    #[test]
    fn strip_is_idempotent(text in "[ -~\t\n]{0,200}") {
        if let Ok(ws) = strip_message(&text) {
            prop_assert_eq!(strip_message(&ws.joined()).unwrap(), ws);
        }
    }

    #[test]
    fn kraft_equality_and_prefix_freeness(hist in histogram()) {
        let cb = build_codebook(&hist);
        let kraft: f64 = cb.entries().values().map(|c| 0.5f64.powi(c.len as i32)).sum();
        prop_assert_eq!(kraft, 1.0);
        for book in [cb.clone(), cb.to_transmittable()] {
            let codes: Vec<String> = book.entries().values().map(|c| c.to_string()).collect();
            for (i, a) in codes.iter().enumerate() {
                for (j, b) in codes.iter().enumerate() {
                    prop_assert!(i == j || !b.starts_with(a.as_str()), "{} prefixes {}", a, b);
                }
            }
        }
    }

    #[test]
    fn huffman_cost_is_optimal(hist in histogram()) {
        let lengths = huffman_code_lengths(&hist);
        let cost: u64 = lengths.iter().map(|(s, &l)| hist.count(*s) * l as u64).sum();
        let counts: Vec<u64> = hist.counts().values().copied().collect();
        prop_assert_eq!(cost, optimal_prefix_cost(&counts));
    }

    #[test]
    fn receiver_rebuilds_transmitted_codebook(hist in histogram()) {
        let cb = build_codebook(&hist);
        let rebuilt = CanonicalCodebook::from_code_lengths(&cb.code_lengths()).unwrap();
        prop_assert_eq!(rebuilt, cb.to_transmittable());
    }

    #[test]
    fn header_round_trip(
        palette in prop::collection::btree_set(1usize..=31, 1..=8),
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..300),
    ) {
        let palette: Vec<usize> = palette.into_iter().collect();
        let lengths: Vec<usize> = picks.iter().map(|i| palette[i.index(palette.len())]).collect();
        let h = FrameHeader::encode(&lengths).unwrap();
        prop_assert_eq!(h.to_bits().len(), 16 + 5 + h.phi() + h.sum_theta());
        prop_assert_eq!(decode_header(&h.to_bits()).unwrap(), lengths);
    }
}

#[test]
fn corpus_overhead_in_expected_band() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus");
    let passages = load_corpus(dir).unwrap();
    assert_eq!(passages.len(), 50);
    let rhos: Vec<f64> = passages
        .iter()
        .map(|p| header_stats(&strip_message(&p.text).unwrap()).unwrap().rho)
        .collect();
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    assert!((0.07..=0.11).contains(&mean), "mean overhead {mean}");
}
