//! Utterance-level language identification by plurality vote over the
//! language tags of aligned phones.

use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::ctm::{group_by_utterance, CtmRecord};
use crate::error::{Error, Result};
use crate::lang::LanguageTag;

/// Per-utterance count of tagged phones by language. Silence carries no
/// language and is never counted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageTally {
    counts: BTreeMap<LanguageTag, u64>,
}

impl LanguageTally {
    pub fn add(&mut self, tag: &LanguageTag) {
        *self.counts.entry(tag.clone()).or_insert(0) += 1;
    }

    pub fn counts(&self) -> &BTreeMap<LanguageTag, u64> {
        &self.counts
    }

    pub fn count(&self, tag: &LanguageTag) -> u64 {
        self.counts.get(tag).copied().unwrap_or(0)
    }

    /// Total number of tallied phones.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Top count minus runner-up count; the top count itself when only one
    /// language is present, 0 when empty.
    pub fn margin(&self) -> u64 {
        let mut sorted: Vec<u64> = self.counts.values().copied().collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        match sorted.as_slice() {
            [] => 0,
            [top] => *top,
            [top, runner_up, ..] => top - runner_up,
        }
    }

    /// The tally as a JSON object with sorted keys, e.g. `{"ES":3,"FR":2}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(
            &self
                .counts
                .iter()
                .map(|(k, v)| (k.as_str().to_owned(), *v))
                .collect::<BTreeMap<String, u64>>(),
        )
        .expect("tally serializes")
    }
}

/// Counts the tagged phones of one utterance by language.
pub fn tally(records: &[CtmRecord]) -> LanguageTally {
    let mut tally = LanguageTally::default();
    for record in records {
        if let Some(tag) = record.token.language() {
            tally.add(tag);
        }
    }
    tally
}

/// Picks the language with the greatest tally. Exact ties go to the tied
/// language listed earliest in `tie_break`; tied languages missing from the
/// list rank after listed ones, in lexicographic order. An empty tally
/// falls back to the first tie-break language and is an error when no
/// tie-break order is given.
pub fn predict(tally: &LanguageTally, tie_break: &[LanguageTag]) -> Result<LanguageTag> {
    let Some(top) = tally.counts().values().copied().max() else {
        return tie_break.first().cloned().ok_or(Error::NoEvidence);
    };
    let rank = |tag: &LanguageTag| {
        tie_break
            .iter()
            .position(|t| t == tag)
            .unwrap_or(usize::MAX)
    };
    let winner = tally
        .counts()
        .iter()
        .filter(|(_, count)| **count == top)
        .map(|(tag, _)| tag)
        .min_by_key(|tag| (rank(tag), (*tag).clone()))
        .expect("non-empty tally has a maximum");
    Ok(winner.clone())
}

/// The identification result for one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub utterance_id: String,
    pub language: LanguageTag,
    pub tally: LanguageTally,
    pub margin: u64,
}

impl Prediction {
    /// One prediction file line: `utt_id  language  margin  tally-JSON`,
    /// tab-separated.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.utterance_id,
            self.language,
            self.margin,
            self.tally.to_json()
        )
    }
}

/// Batch identification outcome: one prediction per decidable utterance,
/// plus the utterances that could not be decided.
#[derive(Debug, Default)]
pub struct IdentifyResult {
    pub predictions: IndexMap<String, Prediction>,
    pub failures: Vec<(String, Error)>,
}

/// Groups a CTM by utterance and votes each one. Per-utterance failures
/// (only possible with an empty tie-break order) are collected, not fatal.
pub fn identify(records: Vec<CtmRecord>, tie_break: &[LanguageTag]) -> IdentifyResult {
    let mut result = IdentifyResult::default();
    for (utterance_id, group) in group_by_utterance(records) {
        let tally = tally(&group);
        match predict(&tally, tie_break) {
            Ok(language) => {
                let margin = tally.margin();
                result.predictions.insert(
                    utterance_id.clone(),
                    Prediction {
                        utterance_id,
                        language,
                        tally,
                        margin,
                    },
                );
            }
            Err(e) => result.failures.push((utterance_id, e)),
        }
    }
    result
}

/// Renders predictions as a prediction file, one line per utterance.
pub fn write_predictions(result: &IdentifyResult) -> String {
    let mut out = String::new();
    for prediction in result.predictions.values() {
        out.push_str(&prediction.to_line());
        out.push('\n');
    }
    out
}

/// Reads `utt_id  language` from the first two tab/whitespace fields of each
/// line, as written by [`write_predictions`].
pub fn parse_predictions(text: &str) -> Result<BTreeMap<String, LanguageTag>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(utt), Some(tag)) = (fields.next(), fields.next()) else {
            return Err(Error::PredictionsParse {
                line,
                reason: "expected utterance id and language".into(),
            });
        };
        let tag: LanguageTag = tag.parse().map_err(|e: Error| Error::PredictionsParse {
            line,
            reason: e.to_string(),
        })?;
        if map.insert(utt.to_owned(), tag).is_some() {
            return Err(Error::PredictionsParse {
                line,
                reason: format!("duplicate utterance id {utt:?}"),
            });
        }
    }
    Ok(map)
}
