//! Scoring language predictions against gold labels: overall accuracy,
//! per-language accuracy, and a confusion matrix.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lang::LanguageTag;

/// Known language per utterance id.
pub type GoldLabels = BTreeMap<String, LanguageTag>;

/// Parses a gold labels file of `utt_id  language` lines.
pub fn parse_gold(text: &str) -> Result<GoldLabels> {
    let mut gold = GoldLabels::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::GoldParse {
                line,
                reason: format!("expected utterance id and language, found {} fields", fields.len()),
            });
        }
        let tag: LanguageTag = fields[1].parse().map_err(|e: Error| Error::GoldParse {
            line,
            reason: e.to_string(),
        })?;
        if gold.insert(fields[0].to_owned(), tag).is_some() {
            return Err(Error::GoldParse {
                line,
                reason: format!("duplicate utterance id {:?}", fields[0]),
            });
        }
    }
    Ok(gold)
}

pub fn write_gold(gold: &GoldLabels) -> String {
    let mut out = String::new();
    for (utt, tag) in gold {
        out.push_str(&format!("{utt}\t{tag}\n"));
    }
    out
}

/// Per-language score row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LanguageScore {
    pub correct: u64,
    pub total: u64,
    pub accuracy: f64,
}

/// The evaluation result over the utterances common to predictions and gold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub overall_accuracy: f64,
    pub scored: u64,
    pub correct: u64,
    /// Keyed by gold language; languages with zero gold utterances have no
    /// row.
    pub per_language: BTreeMap<LanguageTag, LanguageScore>,
    /// `confusion[gold][predicted]` counts; zero cells omitted.
    pub confusion: BTreeMap<LanguageTag, BTreeMap<LanguageTag, u64>>,
    /// Utterance ids present on one side only, sorted.
    pub skipped: Vec<String>,
}

/// Scores the intersection of prediction and gold ids. Ids on one side only
/// are listed in `skipped`; an empty intersection is an error.
pub fn score(
    predictions: &BTreeMap<String, LanguageTag>,
    gold: &GoldLabels,
) -> Result<EvalReport> {
    let mut skipped: Vec<String> = predictions
        .keys()
        .filter(|utt| !gold.contains_key(*utt))
        .chain(gold.keys().filter(|utt| !predictions.contains_key(*utt)))
        .cloned()
        .collect();
    skipped.sort();

    let mut scored = 0u64;
    let mut correct = 0u64;
    let mut per_language: BTreeMap<LanguageTag, LanguageScore> = BTreeMap::new();
    let mut confusion: BTreeMap<LanguageTag, BTreeMap<LanguageTag, u64>> = BTreeMap::new();
    for (utt, gold_tag) in gold {
        let Some(predicted) = predictions.get(utt) else {
            continue;
        };
        scored += 1;
        let row = per_language.entry(gold_tag.clone()).or_insert(LanguageScore {
            correct: 0,
            total: 0,
            accuracy: 0.0,
        });
        row.total += 1;
        if predicted == gold_tag {
            row.correct += 1;
            correct += 1;
        }
        *confusion
            .entry(gold_tag.clone())
            .or_default()
            .entry(predicted.clone())
            .or_insert(0) += 1;
    }
    if scored == 0 {
        return Err(Error::EmptyIntersection);
    }
    for row in per_language.values_mut() {
        row.accuracy = row.correct as f64 / row.total as f64;
    }
    Ok(EvalReport {
        overall_accuracy: correct as f64 / scored as f64,
        scored,
        correct,
        per_language,
        confusion,
        skipped,
    })
}

impl EvalReport {
    /// All languages appearing as gold or predicted, sorted.
    fn language_order(&self) -> Vec<LanguageTag> {
        let mut tags: Vec<LanguageTag> = self
            .confusion
            .iter()
            .flat_map(|(gold, row)| std::iter::once(gold.clone()).chain(row.keys().cloned()))
            .collect();
        tags.sort();
        tags.dedup();
        tags
    }

    /// Human-readable report: overall accuracy, per-language rows, and the
    /// confusion matrix in sorted language order.
    pub fn text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "overall {:.2}% ({}/{} correct)\n",
            self.overall_accuracy * 100.0,
            self.correct,
            self.scored
        ));
        if !self.skipped.is_empty() {
            out.push_str(&format!("skipped {} unmatched utterance(s)\n", self.skipped.len()));
        }
        out.push_str("per-language accuracy:\n");
        for (tag, row) in &self.per_language {
            out.push_str(&format!(
                "  {tag}  {}/{}  {:.2}%\n",
                row.correct,
                row.total,
                row.accuracy * 100.0
            ));
        }
        let order = self.language_order();
        let width = order
            .iter()
            .map(|t| t.as_str().len())
            .max()
            .unwrap_or(2)
            .max(2);
        out.push_str("confusion matrix (rows gold, columns predicted):\n");
        out.push_str(&format!("  {:>width$}", ""));
        for tag in &order {
            out.push_str(&format!(" {:>width$}", tag.as_str()));
        }
        out.push('\n');
        for gold_tag in &order {
            let Some(row) = self.confusion.get(gold_tag) else {
                continue;
            };
            out.push_str(&format!("  {:>width$}", gold_tag.as_str()));
            for predicted in &order {
                let count = row.get(predicted).copied().unwrap_or(0);
                out.push_str(&format!(" {count:>width$}"));
            }
            out.push('\n');
        }
        out
    }

    /// The report as pretty-printed JSON mirroring the struct fields.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
