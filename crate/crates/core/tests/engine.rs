use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;

use clsec::bcjr::bcjr_decode;
use clsec::correction::{
    app_word_dists, combine, phy_word_dist, run_scheme, word_window, CandidateDistribution, FrameAnalysis, Layer,
    Scheme,
};
use clsec::corpus::load_corpus;
use clsec::oracle::word_posterior_direct;
use clsec::phy::{transmit, ChannelConfig, CodeParams};
use clsec::scorer::{OracleScorer, Scorer, UniformScorer, UnigramScorer};
use clsec::sim::{
    read_trials_csv, run_trial, summarize, sweep_passages, write_trials_csv, Runtime, ScorerSource,
};
use clsec::textcodec::{ascii_decode, ascii_encode, strip_message, WordStream};
use clsec::vocab::{CandidateSet, Vocabulary};

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn small_vocab() -> Vocabulary {
    Vocabulary::from_words(
        [
            "the", "cat", "sat", "on", "mat", "a", "hat", "bat", "rat", "dog", "ran", "in", "sun", "fun", "run", "to",
            "it", "at", "is", "an", "as", "cot", "cut", "sit", "set", "mad", "map", "man",
        ],
        Some("[MASK]"),
    )
    .unwrap()
}

fn set_of(words: &[&str]) -> CandidateSet {
    CandidateSet::from_words(0, words.iter().map(|w| w.to_string()).collect())
}

proptest! {
    #[test]
    fn word_posterior_is_product_of_bit_posteriors(
        llrs in prop::collection::vec(-12.0f64..12.0, 24),
        pick in prop::collection::btree_set(0usize..28, 1..10),
    ) {
        let v = small_vocab();
        let bucket = v.bucket(3);
        let words: Vec<String> = pick.iter().map(|&i| bucket[i % bucket.len()].clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let cands = CandidateSet::from_words(0, words.clone());
        let w = word_window(0, &[3], &llrs, &CodeParams::default()).unwrap();
        let fast = phy_word_dist(&w, &cands).unwrap().probabilities();
        let slow = word_posterior_direct(&llrs, &words);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn distributions_are_normalized(ws in prop::collection::vec(-30.0f64..0.0, 1..20)) {
        let words: Vec<String> = (0..ws.len()).map(|i| format!("x{i:02}")).collect();
        let d = CandidateDistribution::new(CandidateSet::from_words(0, words), ws, Layer::Application).unwrap();
        prop_assert!((d.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn combine_commutes_in_its_selection(
        a in prop::collection::vec(0.01f64..1.0, 2..15),
        b in prop::collection::vec(0.01f64..1.0, 2..15),
    ) {
        let n = a.len().min(b.len());
        let words: Vec<String> = (0..n).map(|i| format!("y{i:02}")).collect();
        let set = CandidateSet::from_words(0, words);
        let d = |w: &[f64], l| CandidateDistribution::new(set.clone(), w[..n].iter().map(|x| x.ln()).collect(), l).unwrap();
        let ab = combine(&d(&a, Layer::Physical), &d(&b, Layer::Application)).unwrap();
        let ba = combine(&d(&b, Layer::Physical), &d(&a, Layer::Application)).unwrap();
        for (x, y) in ab.probabilities().iter().zip(ba.probabilities()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn only_flagged_words_change(seed in any::<u64>(), snr in 0.0f64..4.0) {
        let v = small_vocab();
        let sent = WordStream::new(["the", "cat", "sat", "on", "the", "mat", "in", "the", "sun"]).unwrap();
        let p = CodeParams::default();
        let ch = ChannelConfig::new(snr);
        let rx = transmit(&ascii_encode(&sent), &p, &ch, seed).unwrap();
        let llrs = bcjr_decode(&rx.coded_hat, &p, ch.crossover()).unwrap();
        let hd = ascii_decode(&llrs.hard_decision(), sent.lengths()).unwrap();
        let scorer = UnigramScorer::new([("the", 50.0), ("cat", 5.0)]);
        for scheme in Scheme::ALL {
            let (out, a) = run_scheme(scheme, &hd, llrs.as_slice(), &v, &scorer, &p).unwrap();
            for (i, (o, h)) in out.words().iter().zip(hd.words()).enumerate() {
                if !a.errors.contains(&i) || a.uncorrectable.contains(&i) {
                    prop_assert_eq!(o, h);
                } else if scheme != Scheme::Bcjr {
                    prop_assert!(v.contains(o));
                    prop_assert_eq!(o.chars().count(), h.chars().count());
                }
            }
        }
    }
}

#[test]
fn corpus_words_are_all_in_vocabulary() {
    let v = Vocabulary::load_word_list(data("vocab.txt"), Some("[MASK]")).unwrap();
    for p in load_corpus(data("corpus")).unwrap() {
        let ws = strip_message(&p.text).unwrap();
        assert!(v.detect_errors(ws.words()).is_empty(), "{}", p.id);
    }
}

#[test]
fn candidate_sets_are_length_matched_subsets() {
    let v = small_vocab();
    for len in 1..6 {
        let c = v.candidates(0, len);
        assert!(c.words().iter().all(|w| w.len() == len && v.contains(w)));
        assert!(c.words().windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn worked_example_palm_trees() {
    // the application layer settles a word the channel leaves ambiguous
    let v = Vocabulary::from_words(["palm", "trees", "treas", "tress", "there", "beach"], None).unwrap();
    let words: Vec<String> = ["palm", "treXs"].iter().map(|s| s.to_string()).collect();
    let cands = v.candidates(1, 5);
    let scorer = UnigramScorer::new([("trees", 90.0), ("tress", 5.0), ("treas", 1.0)]);
    let app = app_word_dists(&words, std::slice::from_ref(&cands), &scorer).unwrap();
    assert_eq!(app[0].best(), "trees");

    // flat channel evidence on the fourth letter, strong elsewhere
    let target = |w: &str| {
        let mut bits = Vec::new();
        clsec::textcodec::word_bits(w, &mut bits);
        bits
    };
    let t = target("trees");
    let mut llrs: Vec<f64> = t.iter().map(|&b| if b == 0 { 8.0 } else { -8.0 }).collect();
    llrs[24..32].fill(0.0);
    let w = word_window(0, &[5], &llrs, &CodeParams::default()).unwrap();
    let phy = phy_word_dist(&w, &cands).unwrap();
    let cl = combine(&phy, &app[0]).unwrap();
    assert_eq!(cl.best(), "trees");
}

#[test]
fn scheme5_words_equal_scheme4_and_runs_are_deterministic() {
    let passages = load_corpus(data("corpus")).unwrap();
    let v = Vocabulary::load_word_list(data("vocab.txt"), Some("[MASK]")).unwrap();
    let mut rt = Runtime::new(CodeParams::default(), v, ScorerSource::Oracle(0.8));
    rt.trials = 2;
    for (i, p) in passages.iter().take(5).enumerate() {
        let a = run_trial(&rt, i, p, 1.5, 1).unwrap();
        let b = run_trial(&rt, i, p, 1.5, 1).unwrap();
        let words = |o: &clsec::sim::TrialOutcome, s: Scheme| {
            o.outputs.iter().find(|x| x.scheme == s).unwrap().words.clone().unwrap()
        };
        assert_eq!(words(&a, Scheme::ClsecPr), words(&a, Scheme::Clsec));
        for s in Scheme::ALL {
            assert_eq!(words(&a, s), words(&b, s));
        }
        let strip_elapsed = |o: &clsec::sim::TrialOutcome| {
            o.records.iter().map(|r| (r.scheme, r.ber, r.wer, r.rouge_l, r.status.clone())).collect::<Vec<_>>()
        };
        assert_eq!(strip_elapsed(&a), strip_elapsed(&b));
        let pr = a.records.iter().find(|r| r.scheme == Scheme::ClsecPr).unwrap();
        assert_eq!(pr.status, "punctuation_unavailable");
    }
}

#[test]
fn sweep_output_is_reproducible_and_aggregates() {
    let passages: Vec<_> = load_corpus(data("corpus")).unwrap().into_iter().take(6).collect();
    let v = Vocabulary::load_word_list(data("vocab.txt"), Some("[MASK]")).unwrap();
    let unigram = UnigramScorer::load_tsv(data("unigram.tsv")).unwrap();
    let mut rt = Runtime::new(CodeParams::default(), v, ScorerSource::Shared(Arc::new(unigram)));
    rt.trials = 3;
    let run = || {
        let res = sweep_passages(&rt, &passages, &[1.0, 3.0]);
        let mut buf = Vec::new();
        write_trials_csv(&res.records, &mut buf).unwrap();
        (res, buf)
    };
    let (res, csv1) = run();
    let (_, csv2) = run();
    assert_eq!(csv1, csv2);
    assert_eq!(res.records.len(), 6 * 2 * 3 * Scheme::ALL.len());

    let header = std::str::from_utf8(&csv1).unwrap().lines().next().unwrap();
    assert_eq!(header, "passage,snr_db,trial,scheme,ber,wer,rouge_l,bertscore,n_words,n_errors,n_uncorrectable,status");
    let back = read_trials_csv(csv1.as_slice()).unwrap();
    assert_eq!(back.len(), res.records.len());
    for (a, b) in back.iter().zip(&res.records) {
        assert_eq!((&a.passage, a.snr_db, a.trial, a.scheme, a.ber, a.wer, a.rouge_l), (&b.passage, b.snr_db, b.trial, b.scheme, b.ber, b.wer, b.rouge_l));
        assert_eq!((a.bertscore, a.n_words, a.n_errors, a.n_uncorrectable, &a.status), (b.bertscore, b.n_words, b.n_errors, b.n_uncorrectable, &b.status));
    }

    for row in summarize(&res.records) {
        let cell: Vec<f64> = res
            .records
            .iter()
            .filter(|r| r.scheme == row.scheme && r.snr_db == row.snr_db)
            .map(|r| r.wer.unwrap())
            .collect();
        assert_eq!(row.trials, cell.len());
        assert!((row.wer.unwrap() - cell.iter().sum::<f64>() / cell.len() as f64).abs() < 1e-12);
        for r in res.records.iter().filter(|r| r.scheme == row.scheme) {
            assert!((0.0..=1.0).contains(&r.ber.unwrap()) && (0.0..=100.0).contains(&r.rouge_l.unwrap()));
        }
    }
}

#[test]
fn uniform_scorer_rows_equal_wl_llr_rows() {
    let passages: Vec<_> = load_corpus(data("corpus")).unwrap().into_iter().take(10).collect();
    let v = Vocabulary::load_word_list(data("vocab.txt"), Some("[MASK]")).unwrap();
    let mut rt = Runtime::new(CodeParams::default(), v, ScorerSource::Shared(Arc::new(UniformScorer)));
    rt.trials = 2;
    rt.schemes = vec![Scheme::WlLlr, Scheme::Clsec];
    let res = sweep_passages(&rt, &passages, &[0.0, 2.0, 4.0]);
    for pair in res.records.chunks(2) {
        assert_eq!((pair[0].ber, pair[0].wer, pair[0].rouge_l), (pair[1].ber, pair[1].wer, pair[1].rouge_l));
    }
}

#[test]
fn scorer_failure_only_affects_scorer_schemes() {
    struct Broken;
    impl Scorer for Broken {
        fn capabilities(&self) -> clsec::scorer::Capabilities {
            clsec::scorer::Capabilities::builtin("broken")
        }
        fn score(&self, _: &clsec::scorer::ScorerRequest) -> clsec::Result<clsec::scorer::ScorerResponse> {
            Err(clsec::Error::ScorerUnavailable("down".into()))
        }
    }
    let passages = load_corpus(data("corpus")).unwrap();
    let v = Vocabulary::load_word_list(data("vocab.txt"), Some("[MASK]")).unwrap();
    let rt = Runtime::new(CodeParams::default(), v, ScorerSource::Shared(Arc::new(Broken)));
    let o = run_trial(&rt, 0, &passages[0], 1.0, 0).unwrap();
    for r in &o.records {
        if r.scheme.uses_scorer() {
            assert!(r.status.starts_with("scorer_error") && r.wer.is_none(), "{r:?}");
        } else {
            assert!(r.status == "ok" && r.wer.is_some());
        }
    }
}

#[test]
fn oracle_scorer_with_chance_level_is_uniform() {
    let truth = vec!["cat".to_string()];
    let o = OracleScorer::new(truth, 0.25);
    let c = set_of(&["bat", "cat", "hat", "mat"]);
    let d = app_word_dists(&["cXt".to_string()], std::slice::from_ref(&c), &o).unwrap();
    for p in d[0].probabilities() {
        assert!((p - 0.25).abs() < 1e-12);
    }
}

#[test]
fn frame_analysis_counts_uncorrectable() {
    let v = small_vocab();
    let hd = WordStream::new(["the", "zzzzzzzz", "cXt"]).unwrap();
    let a = FrameAnalysis::new(&hd, &vec![0.0; 8 * 14], &v, &CodeParams::default()).unwrap();
    assert_eq!(a.errors, BTreeSet::from([1, 2]));
    assert_eq!(a.uncorrectable, BTreeSet::from([1]));
    assert_eq!(a.physical.keys().copied().collect::<Vec<_>>(), [2]);
}
