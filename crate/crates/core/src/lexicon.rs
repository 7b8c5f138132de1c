//! Pronunciation lexicons: loading per-language dictionaries, frequency
//! filtering, and merging into one combined multilingual lexicon.
//!
//! The combined lexicon is where language identification is wired in: every
//! phone is prefixed with its language tag, and identically spelled words
//! from different languages (or alternative pronunciations within one
//! language) are renumbered `word`, `word(2)`, `word(3)`, ...

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::corpus::normalize_line;
use crate::error::{Error, Result};
use crate::lang::{LanguageTag, TaggedPhone};

/// One dictionary row: a surface word, its variant index (1 for the base
/// spelling, n for `word(n)`), and its pronunciation as tagged phones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexiconEntry {
    pub word: String,
    pub variant: u32,
    pub pron: Vec<TaggedPhone>,
}

impl LexiconEntry {
    /// Builds an entry, checking that the word has no whitespace, the
    /// variant is positive, and all phones share one language.
    pub fn new(word: impl Into<String>, variant: u32, pron: Vec<TaggedPhone>) -> Result<Self> {
        let word = word.into();
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::InvalidLexiconEntry(format!("invalid word {word:?}")));
        }
        if variant == 0 {
            return Err(Error::InvalidLexiconEntry("variant must be positive".into()));
        }
        let Some(first) = pron.first() else {
            return Err(Error::InvalidLexiconEntry(format!(
                "empty pronunciation of {word:?}"
            )));
        };
        if pron.iter().any(|p| p.language != first.language) {
            return Err(Error::InvalidLexiconEntry(format!(
                "mixed languages in pronunciation of {word:?}"
            )));
        }
        Ok(Self {
            word,
            variant,
            pron,
        })
    }

    /// The language shared by all phones of this entry.
    pub fn language(&self) -> &LanguageTag {
        &self.pron[0].language
    }

    /// The word as written in a lexicon file: `word` or `word(n)`.
    pub fn written_word(&self) -> String {
        if self.variant >= 2 {
            format!("{}({})", self.word, self.variant)
        } else {
            self.word.clone()
        }
    }
}

/// An ordered pronunciation lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The set of languages appearing in this lexicon.
    pub fn languages(&self) -> BTreeSet<LanguageTag> {
        self.entries
            .iter()
            .map(|e| e.language().clone())
            .collect()
    }

    /// Parses a per-language lexicon file and tags every phone with
    /// `tag`.
    ///
    /// Each non-empty line is `WORD  phone phone ...`; words may carry a
    /// `(n)` variant suffix; lines starting with `;;;` are comments. Words
    /// are lowercased. A phone that already carries the `<tag>_` prefix is
    /// kept as is, so a combined lexicon re-split by language loads back
    /// unchanged.
    pub fn parse(text: &str, tag: &LanguageTag) -> Result<Self> {
        let mut entries = Vec::new();
        let prefix = format!("{tag}_");
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with(";;;") {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let word_field = fields.next().expect("non-empty line has a first field");
            let phones: Vec<&str> = fields.collect();
            if phones.is_empty() {
                return Err(Error::LexiconParse {
                    line,
                    reason: "expected a word and at least one phone".into(),
                });
            }
            let (word, variant) = split_variant(word_field, line)?;
            let mut pron = Vec::with_capacity(phones.len());
            for p in phones {
                let phone = if let Some(base) = p.strip_prefix(&prefix) {
                    TaggedPhone::new(tag.clone(), base)
                } else {
                    TaggedPhone::new(tag.clone(), p)
                };
                pron.push(phone.map_err(|e| Error::LexiconParse {
                    line,
                    reason: e.to_string(),
                })?);
            }
            entries.push(LexiconEntry {
                word: word.to_lowercase(),
                variant,
                pron,
            });
        }
        Ok(Self { entries })
    }

    /// Keeps only entries whose word is among the `k` most frequent tokens
    /// of `corpus` (raw transcription lines, normalized before counting).
    ///
    /// All variants of a kept word are kept and entry order is preserved.
    /// Ties at the frequency cutoff go to the lexicographically smaller
    /// token.
    pub fn filter_top_k<I, S>(&self, corpus: I, k: usize) -> Lexicon
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut freq: HashMap<String, u64> = HashMap::new();
        for line in corpus {
            for token in normalize_line(line.as_ref()) {
                *freq.entry(token).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(String, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let keep: HashSet<String> = ranked.into_iter().take(k).map(|(w, _)| w).collect();
        Lexicon {
            entries: self
                .entries
                .iter()
                .filter(|e| keep.contains(&e.word))
                .cloned()
                .collect(),
        }
    }

    /// Merges single-language lexicons into one combined lexicon.
    ///
    /// Entries are concatenated in part order; exact duplicates (same word,
    /// language, and pronunciation) are dropped; then each surface word gets
    /// fresh variant numbers 1..k in encounter order, so homographs across
    /// languages come out as `word`, `word(2)`, ...
    pub fn merge(parts: &[Lexicon]) -> Result<Lexicon> {
        let mut seen_tags: BTreeSet<LanguageTag> = BTreeSet::new();
        for (index, part) in parts.iter().enumerate() {
            let langs = part.languages();
            if langs.len() > 1 {
                return Err(Error::MultiLanguagePart { index });
            }
            if let Some(tag) = langs.into_iter().next() {
                if !seen_tags.insert(tag.clone()) {
                    return Err(Error::DuplicatePartLanguage(tag));
                }
            }
        }

        let mut seen: HashSet<(String, LanguageTag, Vec<TaggedPhone>)> = HashSet::new();
        let mut next_variant: HashMap<String, u32> = HashMap::new();
        let mut entries = Vec::new();
        for entry in parts.iter().flat_map(|p| p.entries.iter()) {
            let key = (
                entry.word.clone(),
                entry.language().clone(),
                entry.pron.clone(),
            );
            if !seen.insert(key) {
                continue;
            }
            let variant = next_variant.entry(entry.word.clone()).or_insert(0);
            *variant += 1;
            entries.push(LexiconEntry {
                word: entry.word.clone(),
                variant: *variant,
                pron: entry.pron.clone(),
            });
        }
        Ok(Lexicon { entries })
    }

    /// Splits a combined lexicon back into per-language lexicons, in
    /// language encounter order.
    pub fn split_by_language(&self) -> Vec<Lexicon> {
        let mut order: Vec<LanguageTag> = Vec::new();
        for entry in &self.entries {
            if !order.contains(entry.language()) {
                order.push(entry.language().clone());
            }
        }
        order
            .into_iter()
            .map(|tag| Lexicon {
                entries: self
                    .entries
                    .iter()
                    .filter(|e| *e.language() == tag)
                    .cloned()
                    .collect(),
            })
            .collect()
    }
}

/// Lexicon file content: `WORD[(n)]`, two spaces, space-joined tagged phones.
impl fmt::Display for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            write!(f, "{}  ", entry.written_word())?;
            for (i, phone) in entry.pron.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{phone}")?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Splits a trailing `(n)` variant suffix off a word field.
fn split_variant(word_field: &str, line: usize) -> Result<(&str, u32)> {
    if let Some(stripped) = word_field.strip_suffix(')') {
        if let Some((word, digits)) = stripped.rsplit_once('(') {
            let variant: u32 = digits.parse().map_err(|_| Error::LexiconParse {
                line,
                reason: format!("variant suffix ({digits}) is not a positive integer"),
            })?;
            if variant == 0 {
                return Err(Error::LexiconParse {
                    line,
                    reason: "variant suffix (0) is not a positive integer".into(),
                });
            }
            if word.is_empty() {
                return Err(Error::LexiconParse {
                    line,
                    reason: "empty word before variant suffix".into(),
                });
            }
            return Ok((word, variant));
        }
    }
    Ok((word_field, 1))
}
