//! Decodes one noisy frame and prints, for each out-of-vocabulary word, the
//! top candidates under the decoder, the language model and their product.

use std::path::PathBuf;

use clsec::bcjr::bcjr_decode;
use clsec::correction::{combine, CandidateDistribution, FrameAnalysis};
use clsec::corpus::load_corpus;
use clsec::phy::{transmit, ChannelConfig, CodeParams};
use clsec::scorer::UnigramScorer;
use clsec::textcodec::{ascii_decode, ascii_encode, strip_message};
use clsec::vocab::Vocabulary;

fn top(d: &CandidateDistribution, k: usize) -> String {
    let p = d.probabilities();
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    idx.iter()
        .take(k)
        .map(|&i| format!("{}:{:.3}", d.candidates().words()[i], p[i]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> clsec::Result<()> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let vocab = Vocabulary::load_word_list(data.join("vocab.txt"), None)?;
    let scorer = UnigramScorer::load_tsv(data.join("unigram.tsv"))?;
    let passage = &load_corpus(data.join("corpus"))?[0];

    let params = CodeParams::default();
    let ch = ChannelConfig::new(2.0);
    let sent = strip_message(&passage.text)?;
    let rx = transmit(&ascii_encode(&sent), &params, &ch, 5)?;
    let llrs = bcjr_decode(&rx.coded_hat, &params, ch.crossover())?;
    let hd = ascii_decode(&llrs.hard_decision(), sent.lengths())?;

    let analysis = FrameAnalysis::new(&hd, llrs.as_slice(), &vocab, &params)?;
    let app = analysis.application(&scorer)?;
    println!("{} words, {} out of vocabulary", hd.len(), analysis.errors.len());
    for (n, phy) in &analysis.physical {
        println!("\n#{n} sent {:?} received {:?} ({} candidates)",
            sent.words()[*n], hd.words()[*n], phy.candidates().len());
        println!("  physical    {}", top(phy, 3));
        println!("  application {}", top(&app[n], 3));
        println!("  cross-layer {}", top(&combine(phy, &app[n])?, 3));
    }
    Ok(())
}
