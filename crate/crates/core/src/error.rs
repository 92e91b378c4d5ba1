use thiserror::Error;

/// Errors raised anywhere along the encode, channel, decode and correction chain.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("message contains no codeable word after stripping punctuation and whitespace")]
    EmptyAfterStrip,
    #[error("character {ch:?} (U+{code:04X}) is outside the codeable range")]
    NonAsciiCharacter { ch: char, code: u32 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("word count mismatch: reference has {reference}, hypothesis has {hypothesis}")]
    WordCountMismatch { reference: usize, hypothesis: usize },

    #[error("word length {0} has no codeword in the codebook")]
    UnknownLength(usize),
    #[error("codeword length {0} does not fit in a 3-bit field")]
    CodewordTooLong(u8),
    #[error("word length {0} exceeds the header limit of 31 letters")]
    WordTooLong(usize),
    #[error("{0} words exceed the 16-bit header word count")]
    TooManyWords(usize),
    #[error("payload must be non-empty to compute header overhead")]
    ZeroPayload,
    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),
    #[error("crossover probability {0} is outside (0, 0.5]")]
    InvalidCrossover(f64),

    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("source unavailable: {0}")]
    SourceUnavailable(String),

    #[error("word index {index} is out of range for {len} words")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("distributions do not share a candidate set")]
    CandidateMismatch,
    #[error("masked text has {in_text} mask tokens but {slots} candidate lists were supplied")]
    MaskCountMismatch { in_text: usize, slots: usize },
    #[error("malformed scorer request: {0}")]
    MalformedRequest(String),
    #[error("scorer unavailable: {0}")]
    ScorerUnavailable(String),
    #[error("protocol error: {0}")]
    ProtocolError(String),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
