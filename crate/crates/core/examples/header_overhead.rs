//! Length-header codebook for one message and the overhead across the corpus.
//!
//! cargo run --example header_overhead -- "There is a beach with palm trees"

use std::path::PathBuf;

use clsec::corpus::load_corpus;
use clsec::header::{build_codebook, decode_header, header_stats, FrameHeader, LengthHistogram};
use clsec::textcodec::strip_message;

fn main() -> clsec::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let passages = load_corpus(data.join("corpus"))?;
    let text = std::env::args().nth(1).unwrap_or_else(|| passages[0].text.clone());

    let ws = strip_message(&text)?;
    let hist = LengthHistogram::from_lengths(ws.lengths());
    let cb = build_codebook(&hist);
    println!("{:>6} {:>6} {:>10}", "length", "count", "codeword");
    for (len, code) in cb.entries() {
        println!("{len:>6} {:>6} {:>10}", hist.count(*len), code.to_string());
    }

    let header = FrameHeader::encode(ws.lengths())?;
    assert_eq!(decode_header(&header.to_bits())?, ws.lengths());
    let s = header_stats(&ws)?;
    println!("\nN={} letters={} payload={} sum_theta={} phi={} rho={:.2}%",
        s.word_count, s.letters, s.payload_bits, s.sum_theta, s.phi, 100.0 * s.rho);

    let rhos: Vec<f64> = passages
        .iter()
        .map(|p| Ok(header_stats(&strip_message(&p.text)?)?.rho))
        .collect::<clsec::Result<_>>()?;
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let (lo, hi) = rhos.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    println!("corpus: {} passages, rho mean {:.2}% (min {:.2}%, max {:.2}%)",
        rhos.len(), 100.0 * mean, 100.0 * lo, 100.0 * hi);
    Ok(())
}
