//! Closed-set spoken language identification by phone vote.
//!
//! The pipeline works on phone alignments whose symbols carry a language
//! prefix (`ES_b`, `FR_aa`, ...): per-language pronunciation lexicons are
//! tagged and merged ([`lexicon`]), a multilingual n-gram language model is
//! trained and exchanged in ARPA format ([`corpus`], [`ngram`]), decoder
//! alignments are read from CTM files ([`ctm`]), each utterance's language
//! is predicted by plurality vote over its phone tags ([`vote`]),
//! mid-utterance language changes are located with a run-length threshold
//! ([`codeswitch`]), and predictions are scored against gold labels
//! ([`eval`]). A deterministic generator ([`sim`]) takes the place of the
//! acoustic model so everything is testable without audio.
//!
//! All randomness flows from explicit seeds through ChaCha8, so outputs are
//! reproducible across runs and platforms.

pub mod codeswitch;
pub mod corpus;
pub mod ctm;
mod error;
pub mod eval;
pub mod lang;
pub mod lexicon;
pub mod ngram;
pub mod sim;
pub mod vote;

pub use error::{Error, Result};
pub use lang::{LanguageTag, PhoneLabel, TaggedPhone};

/// Double-precision n-gram model, the default for training and scoring.
pub type NgramModelF64 = ngram::NgramModel<f64>;
/// Single-precision n-gram model for memory-constrained use.
pub type NgramModelF32 = ngram::NgramModel<f32>;
