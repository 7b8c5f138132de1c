use crate::lang::LanguageTag;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid language tag {0:?}: expected 2-8 uppercase ASCII letters")]
    InvalidLanguageTag(String),

    #[error("invalid phone symbol {0:?}")]
    InvalidPhone(String),

    #[error("lexicon line {line}: {reason}")]
    LexiconParse { line: usize, reason: String },

    #[error("invalid lexicon entry: {0}")]
    InvalidLexiconEntry(String),

    #[error("lexicon merge: part {index} contains more than one language")]
    MultiLanguagePart { index: usize },

    #[error("lexicon merge: language {0} appears in more than one part")]
    DuplicatePartLanguage(LanguageTag),

    #[error("cannot train a language model on an empty corpus")]
    EmptyCorpus,

    #[error("n-gram order must be at least 1")]
    InvalidOrder,

    #[error("ARPA line {line}: {reason}")]
    ArpaParse { line: usize, reason: String },

    #[error("ARPA header declares {declared} {order}-grams but the section lists {found}")]
    ArpaCountMismatch {
        order: usize,
        declared: usize,
        found: usize,
    },

    #[error("CTM line {line}: {reason}")]
    CtmParse { line: usize, reason: String },

    #[error("phone table line {line}: {reason}")]
    PhoneTableParse { line: usize, reason: String },

    #[error("record {index}: phone id {id} not present in the phone table")]
    UnknownPhoneId { index: usize, id: u32 },

    #[error("record {index}: symbol {symbol:?} is neither a tagged phone nor a silence symbol")]
    UnmappableSymbol { index: usize, symbol: String },

    #[error("no evidence: empty tally and empty tie-break order")]
    NoEvidence,

    #[error("no speech evidence: utterance contains no language-tagged phones")]
    NoSpeech,

    #[error("code-switch threshold must be at least 1")]
    InvalidThreshold,

    #[error("predictions line {line}: {reason}")]
    PredictionsParse { line: usize, reason: String },

    #[error("gold labels line {line}: {reason}")]
    GoldParse { line: usize, reason: String },

    #[error("no utterance ids in common between predictions and gold labels")]
    EmptyIntersection,

    #[error("invalid simulation spec: {0}")]
    InvalidSimSpec(String),
}
