//! Runs every correction scheme on one passage and prints the outputs.
//!
//! cargo run --release --example compare_schemes -- [snr_db] [oracle_p]

use std::path::PathBuf;
use std::sync::Arc;

use clsec::corpus::load_corpus;
use clsec::phy::CodeParams;
use clsec::sim::{run_trial, Runtime, ScorerSource};
use clsec::vocab::Vocabulary;

fn main() -> clsec::Result<()> {
    let mut args = std::env::args().skip(1);
    let snr_db: f64 = args.next().map_or(1.0, |s| s.parse().expect("snr_db"));
    let oracle_p: Option<f64> = args.next().map(|s| s.parse().expect("oracle_p"));

    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let vocab = Vocabulary::load_word_list(data.join("vocab.txt"), None)?;
    let scorer = match oracle_p {
        Some(p) => ScorerSource::Oracle(p),
        None => ScorerSource::Shared(Arc::new(clsec::scorer::UnigramScorer::load_tsv(data.join("unigram.tsv"))?)),
    };
    let passages = load_corpus(data.join("corpus"))?;
    let rt = Runtime::new(CodeParams::default(), vocab, scorer);

    let out = run_trial(&rt, 0, &passages[0], snr_db, 0)?;
    println!("sent: {}\n", out.sent.joined());
    println!("{} out-of-vocabulary words, {} raw bit errors in {} coded bits\n",
        out.analysis.errors.len(), out.raw_bit_errors, out.coded_bits);
    for (o, r) in out.outputs.iter().zip(&out.records) {
        let text = match (&o.text, &o.words) {
            (Some(t), _) => t.clone(),
            (None, Ok(w)) => w.join(" "),
            (None, Err(e)) => format!("<{e}>"),
        };
        println!("{:<9} wer={:.3} rouge_l={:.1} [{}]\n  {text}\n",
            o.scheme.as_str(), r.wer.unwrap_or(f64::NAN), r.rouge_l.unwrap_or(f64::NAN), r.status);
    }
    Ok(())
}
