//! Cross-layer semantic error correction for short English text.
//!
//! A message is stripped to its words, sent as 8-bit ASCII through a
//! terminated rate-1/2 convolutional code, a random interleaver and Gray QPSK
//! over AWGN, then decoded with BCJR. Words that come out of the decoder
//! outside the vocabulary are replaced by combining the decoder's bit
//! reliabilities with a language model's view of the surrounding words.
//!
//! ```
//! use clsec::prelude::*;
//!
//! let sent = strip_message("The cat sat, quietly.").unwrap();
//! let params = CodeParams::default();
//! let u = ascii_encode(&sent);
//! let rx = transmit(&u, &params, &ChannelConfig::new(3.0), 7).unwrap();
//! let llrs = bcjr_decode(&rx.coded_hat, &params, crossover_from_snr(3.0)).unwrap();
//! let hd = ascii_decode(&llrs.hard_decision(), sent.lengths()).unwrap();
//!
//! let vocab = Vocabulary::from_words(["The", "cat", "sat", "quietly", "bat", "mat"], None).unwrap();
//! let (out, _) = run_scheme(Scheme::WlLlr, &hd, llrs.as_slice(), &vocab, &UniformScorer, &params).unwrap();
//! assert_eq!(out.len(), 4);
//! ```

pub mod bcjr;
pub mod corpus;
pub mod correction;
pub mod error;
pub mod header;
pub mod logprob;
pub mod metrics;
pub mod oracle;
pub mod phy;
pub mod remote;
pub mod scorer;
pub mod sim;
pub mod textcodec;
pub mod vocab;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::bcjr::{bcjr_decode, LlrVector};
    pub use crate::correction::{
        combine, phy_word_dist, run_scheme, word_window, CandidateDistribution, FrameAnalysis, Scheme,
    };
    pub use crate::error::{Error, Result};
    pub use crate::header::{build_codebook, header_stats, FrameHeader, LengthHistogram};
    pub use crate::metrics::{ber, rouge_l, wer};
    pub use crate::phy::{crossover_from_snr, transmit, ChannelConfig, CodeParams};
    pub use crate::scorer::{OracleScorer, Scorer, UniformScorer, UnigramScorer};
    pub use crate::textcodec::{ascii_decode, ascii_encode, strip_message, WordStream};
    pub use crate::vocab::Vocabulary;
}
