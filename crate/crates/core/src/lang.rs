//! Language tags and language-tagged phone symbols.
//!
//! Every phone in the combined lexicon carries the language it came from as
//! an uppercase prefix, `ES_b`, `FR_aa`, and so on. Voting and segmentation
//! read nothing but these prefixes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Short uppercase identifier for a language, e.g. `ES`, `FR`, `AR`, `TR`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageTag(String);

impl LanguageTag {
    /// Validates and wraps a tag: 2-8 uppercase ASCII letters.
    pub fn new(code: impl Into<String>) -> Result<Self, Error> {
        let code = code.into();
        let ok = (2..=8).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_uppercase());
        if ok {
            Ok(Self(code))
        } else {
            Err(Error::InvalidLanguageTag(code))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::new(s)
    }
}

impl TryFrom<String> for LanguageTag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        Self::new(s)
    }
}

impl From<LanguageTag> for String {
    fn from(tag: LanguageTag) -> String {
        tag.0
    }
}

/// A phone symbol bound to the language it belongs to.
///
/// Serialized form is `<tag>_<base>`; parsing splits on the first underscore,
/// so the base itself may contain underscores.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaggedPhone {
    pub language: LanguageTag,
    pub base: String,
}

impl TaggedPhone {
    pub fn new(language: LanguageTag, base: impl Into<String>) -> Result<Self, Error> {
        let base = base.into();
        if base.is_empty() || base.chars().any(char::is_whitespace) {
            return Err(Error::InvalidPhone(base));
        }
        Ok(Self { language, base })
    }
}

impl fmt::Display for TaggedPhone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.language, self.base)
    }
}

impl FromStr for TaggedPhone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (code, base) = s
            .split_once('_')
            .ok_or_else(|| Error::InvalidPhone(s.to_owned()))?;
        let language = LanguageTag::new(code).map_err(|_| Error::InvalidPhone(s.to_owned()))?;
        if base.is_empty() || base.chars().any(char::is_whitespace) {
            return Err(Error::InvalidPhone(s.to_owned()));
        }
        Ok(Self {
            language,
            base: base.to_owned(),
        })
    }
}

/// Silence and garbage symbols that may appear in alignments. They carry no
/// language and are skipped by voting and segmentation.
pub const SILENCE_SYMBOLS: &[&str] = &["SIL", "SPN", "NSN"];

/// One token of a phone alignment: either a language-tagged phone or one of
/// the declared silence symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PhoneLabel {
    Phone(TaggedPhone),
    Silence(String),
}

impl PhoneLabel {
    pub fn is_silence(&self) -> bool {
        matches!(self, PhoneLabel::Silence(_))
    }

    /// The language of a tagged phone, `None` for silence.
    pub fn language(&self) -> Option<&LanguageTag> {
        match self {
            PhoneLabel::Phone(p) => Some(&p.language),
            PhoneLabel::Silence(_) => None,
        }
    }

    pub fn phone(&self) -> Option<&TaggedPhone> {
        match self {
            PhoneLabel::Phone(p) => Some(p),
            PhoneLabel::Silence(_) => None,
        }
    }
}

impl fmt::Display for PhoneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhoneLabel::Phone(p) => p.fmt(f),
            PhoneLabel::Silence(s) => f.write_str(s),
        }
    }
}

impl FromStr for PhoneLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if SILENCE_SYMBOLS.contains(&s) {
            return Ok(PhoneLabel::Silence(s.to_owned()));
        }
        s.parse::<TaggedPhone>().map(PhoneLabel::Phone)
    }
}
