//! Small SNR sweep over the first passages with the built-in unigram scorer.

use std::path::PathBuf;
use std::sync::Arc;

use clsec::corpus::load_corpus;
use clsec::phy::CodeParams;
use clsec::scorer::UnigramScorer;
use clsec::sim::{sweep_passages, write_summary_csv, Runtime, ScorerSource};
use clsec::vocab::Vocabulary;

fn main() -> clsec::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let vocab = Vocabulary::load_word_list(data.join("vocab.txt"), None)?;
    let scorer = UnigramScorer::load_tsv(data.join("unigram.tsv"))?;
    let passages = load_corpus(data.join("corpus"))?;

    let mut rt = Runtime::new(CodeParams::default(), vocab, ScorerSource::Shared(Arc::new(scorer)));
    rt.trials = 3;
    let result = sweep_passages(&rt, &passages[..10], &[0.0, 2.0, 4.0, 6.0]);
    write_summary_csv(&result.summary, std::io::stdout())?;
    eprintln!("{} trial rows in {:.1?}", result.records.len(), result.elapsed);
    Ok(())
}
