//! Transcript normalization and multilingual corpus assembly.

use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use crate::lang::LanguageTag;

static PUNCTUATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\p{P}").expect("valid punctuation pattern"));

/// Lowercases a transcription line, strips Unicode punctuation, and splits
/// it into tokens. May return an empty sequence.
pub fn normalize_line(raw: &str) -> Vec<String> {
    let lowered = raw.to_lowercase();
    let stripped = PUNCTUATION.replace_all(&lowered, "");
    stripped.split_whitespace().map(str::to_owned).collect()
}

/// A shuffled multilingual corpus: normalized token lines, each tagged with
/// the language it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    lines: Vec<Vec<String>>,
    languages: Vec<LanguageTag>,
}

impl Corpus {
    /// Normalizes all lines of all parts, drops lines that come out empty,
    /// and shuffles the result with a ChaCha8 generator keyed by `seed`.
    /// Equal seeds give identical line orders on every platform.
    pub fn build(parts: &[(LanguageTag, Vec<String>)], seed: u64) -> Corpus {
        let mut items: Vec<(Vec<String>, LanguageTag)> = Vec::new();
        for (tag, lines) in parts {
            for raw in lines {
                let tokens = normalize_line(raw);
                if !tokens.is_empty() {
                    items.push((tokens, tag.clone()));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        items.shuffle(&mut rng);
        let (lines, languages) = items.into_iter().unzip();
        Corpus { lines, languages }
    }

    /// Builds a corpus from pre-tokenized lines without shuffling. Empty
    /// lines are dropped.
    pub fn from_token_lines(lines: Vec<Vec<String>>, tag: &LanguageTag) -> Corpus {
        let lines: Vec<Vec<String>> = lines.into_iter().filter(|l| !l.is_empty()).collect();
        let languages = vec![tag.clone(); lines.len()];
        Corpus { lines, languages }
    }

    pub fn lines(&self) -> &[Vec<String>] {
        &self.lines
    }

    pub fn language_of_line(&self, index: usize) -> &LanguageTag {
        &self.languages[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], &LanguageTag)> {
        self.lines
            .iter()
            .map(Vec::as_slice)
            .zip(self.languages.iter())
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}
