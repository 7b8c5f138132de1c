//! Code-switch detection: segmenting a time-aligned tagged-phone stream into
//! maximal same-language blocks with a run-length threshold.
//!
//! The scanner tracks the current language and a pending run of consecutive
//! phones in one foreign language. A run shorter than the threshold is
//! absorbed into the current segment; the moment a run reaches the threshold
//! the segment closes at the run's first phone and a new segment in the
//! run's language opens there. A foreign run mixing two languages never
//! accumulates: each language change restarts it.

use serde::Serialize;

use crate::ctm::CtmRecord;
use crate::error::{Error, Result};
use crate::lang::LanguageTag;

/// A maximal same-language block of an utterance. Consecutive segments have
/// different languages and share a boundary timestamp.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub language: LanguageTag,
    pub phone_count: usize,
}

/// Segments one utterance's time-sorted records. Silence is removed first
/// and never breaks a run; an utterance with no tagged phones is an error.
pub fn segment(records: &[CtmRecord], threshold: usize) -> Result<Vec<Segment>> {
    if threshold == 0 {
        return Err(Error::InvalidThreshold);
    }
    let speech: Vec<&CtmRecord> = records.iter().filter(|r| !r.token.is_silence()).collect();
    let Some(first) = speech.first() else {
        return Err(Error::NoSpeech);
    };

    let mut segments: Vec<Segment> = Vec::new();
    let mut current_language = first
        .token
        .language()
        .expect("non-silence record has a language")
        .clone();
    let mut current_start = first.start;
    let mut current_count = 0usize;
    // pending run of consecutive phones in a single foreign language
    let mut run: Vec<&CtmRecord> = Vec::new();

    for record in &speech {
        let language = record
            .token
            .language()
            .expect("non-silence record has a language");
        if *language == current_language {
            current_count += 1 + run.len();
            run.clear();
            continue;
        }
        let same_run = run
            .last()
            .map(|r| r.token.language() == Some(language))
            .unwrap_or(true);
        if !same_run {
            // a different foreign language: the old run is absorbed
            current_count += run.len();
            run.clear();
        }
        run.push(record);
        if run.len() == threshold {
            let boundary = run[0].start;
            segments.push(Segment {
                start: current_start,
                end: boundary,
                language: current_language.clone(),
                phone_count: current_count,
            });
            current_language = language.clone();
            current_start = boundary;
            current_count = run.len();
            run.clear();
        }
    }
    current_count += run.len();

    let last = speech.last().expect("speech is non-empty");
    segments.push(Segment {
        start: current_start,
        end: last.start + last.duration,
        language: current_language,
        phone_count: current_count,
    });
    Ok(segments)
}

/// Report text: one `switch` line per boundary with the timestamp and the
/// language change, then one summary line per segment. Times at 2 decimals.
pub fn segment_report(segments: &[Segment]) -> String {
    let mut out = String::new();
    for pair in segments.windows(2) {
        out.push_str(&format!(
            "switch\t{:.2}\t{}->{}\n",
            pair[1].start, pair[0].language, pair[1].language
        ));
    }
    for s in segments {
        out.push_str(&format!(
            "segment\t{:.2}\t{:.2}\t{}\t{}\n",
            s.start, s.end, s.language, s.phone_count
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctm::parse_ctm;
    use proptest::prelude::*;

    fn tag(code: &str) -> LanguageTag {
        LanguageTag::new(code).unwrap()
    }

    /// Builds contiguous records with the given tokens, each 0.3 s long.
    fn stream(tokens: &[&str]) -> Vec<CtmRecord> {
        let text: String = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| format!("utt1 1 {:.2} 0.30 {t}\n", i as f64 * 0.3))
            .collect();
        parse_ctm(&text).unwrap()
    }

    /// Run-length encoding of the language sequence: the expected output for
    /// threshold 1, implemented directly as an independent check.
    fn rle_segments(records: &[CtmRecord]) -> Vec<Segment> {
        let speech: Vec<&CtmRecord> =
            records.iter().filter(|r| !r.token.is_silence()).collect();
        let mut out: Vec<Segment> = Vec::new();
        for r in &speech {
            let lang = r.token.language().unwrap().clone();
            match out.last_mut() {
                Some(seg) if seg.language == lang => seg.phone_count += 1,
                _ => {
                    if let Some(seg) = out.last_mut() {
                        seg.end = r.start;
                    }
                    out.push(Segment {
                        start: r.start,
                        end: 0.0,
                        language: lang,
                        phone_count: 1,
                    });
                }
            }
        }
        if let Some(seg) = out.last_mut() {
            let last = speech.last().unwrap();
            seg.end = last.start + last.duration;
        }
        out
    }

    #[test]
    fn lone_foreign_phone_is_absorbed_and_a_block_triggers_a_switch() {
        // ES ES ES FR ES ES FR FR FR FR with T=3: the single FR phone does
        // not switch; the FR block does, at its first phone.
        let tokens = [
            "ES_a", "ES_b", "ES_c", "FR_x", "ES_d", "ES_e", "FR_y", "FR_z", "FR_w", "FR_v",
        ];
        let segments = segment(&stream(&tokens), 3).unwrap();
        assert_eq!(segments.len(), 2);
        assert_eq!(segments[0].language, tag("ES"));
        assert_eq!(segments[0].phone_count, 6);
        assert_eq!(segments[1].language, tag("FR"));
        assert_eq!(segments[1].phone_count, 4);
        // boundary at the start of the first phone of the FR block (index 6)
        assert_eq!(segments[0].end, segments[1].start);
        assert!((segments[1].start - 1.8).abs() < 1e-9);
        assert!((segments[1].end - 3.0).abs() < 1e-9);
    }

    #[test]
    fn report_lists_switch_time_and_languages() {
        let mut records = stream(&["ES_a", "ES_b", "ES_c"]);
        for (i, t) in ["FR_x", "FR_y", "FR_z"].iter().enumerate() {
            records.extend(parse_ctm(&format!(
                "utt1 1 {:.2} 0.30 {t}\n",
                2.41 + 0.3 * i as f64
            )).unwrap());
        }
        let segments = segment(&records, 3).unwrap();
        let report = segment_report(&segments);
        assert!(report.starts_with("switch\t2.41\tES->FR\n"), "{report}");
        let switches = report.lines().filter(|l| l.starts_with("switch")).count();
        assert_eq!(switches, segments.len() - 1);
    }

    #[test]
    fn single_language_spans_the_whole_utterance() {
        for threshold in [1, 2, 5] {
            let segments = segment(&stream(&["TR_a", "TR_b", "TR_c"]), threshold).unwrap();
            assert_eq!(segments.len(), 1);
            assert_eq!(segments[0].start, 0.0);
            assert!((segments[0].end - 0.9).abs() < 1e-9);
            assert_eq!(segments[0].phone_count, 3);
        }
    }

    #[test]
    fn threshold_one_matches_run_length_encoding() {
        let records = stream(&["ES_a", "FR_x", "ES_b"]);
        let segments = segment(&records, 1).unwrap();
        assert_eq!(segments.len(), 3);
        assert_eq!(segments, rle_segments(&records));
    }

    #[test]
    fn mixed_foreign_run_does_not_accumulate() {
        // FR and TR alternate: no single foreign language reaches T=2
        let tokens = ["ES_a", "ES_b", "FR_x", "TR_y", "FR_z", "TR_w", "ES_c"];
        let segments = segment(&stream(&tokens), 2).unwrap();
        assert_eq!(segments.len(), 1);
        assert_eq!(segments[0].language, tag("ES"));
        assert_eq!(segments[0].phone_count, 7);
    }

    #[test]
    fn silence_does_not_break_a_run() {
        let tokens = ["ES_a", "FR_x", "SIL", "FR_y", "ES_b"];
        let segments = segment(&stream(&tokens), 2).unwrap();
        assert_eq!(segments.len(), 2);
        assert_eq!(segments[1].language, tag("FR"));
    }

    #[test]
    fn all_silence_input_is_an_error() {
        assert!(matches!(
            segment(&stream(&["SIL", "SIL"]), 3),
            Err(Error::NoSpeech)
        ));
        assert!(matches!(segment(&[], 3), Err(Error::NoSpeech)));
    }

    #[test]
    fn zero_threshold_is_rejected() {
        assert!(matches!(
            segment(&stream(&["ES_a"]), 0),
            Err(Error::InvalidThreshold)
        ));
    }

    #[test]
    fn single_segment_report_has_no_switch_lines() {
        let segments = segment(&stream(&["ES_a", "ES_b"]), 3).unwrap();
        let report = segment_report(&segments);
        assert!(!report.contains("switch"));
        assert_eq!(report.lines().count(), 1);
    }

    fn language_strategy() -> impl Strategy<Value = String> {
        prop_oneof![
            8 => proptest::sample::select(vec!["ES", "FR", "AR", "TR"])
                .prop_map(|t| format!("{t}_p")),
            1 => Just("SIL".to_owned()),
        ]
    }

    proptest! {
        #[test]
        fn segments_tile_the_speech_span(
            tokens in proptest::collection::vec(language_strategy(), 1..60),
            threshold in 1usize..6,
        ) {
            let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let records = stream(&toks);
            let speech: Vec<&CtmRecord> =
                records.iter().filter(|r| !r.token.is_silence()).collect();
            prop_assume!(!speech.is_empty());
            let segments = segment(&records, threshold).unwrap();
            prop_assert_eq!(segments[0].start, speech[0].start);
            let last = speech.last().unwrap();
            prop_assert_eq!(segments.last().unwrap().end, last.start + last.duration);
            for pair in segments.windows(2) {
                prop_assert_eq!(pair[0].end, pair[1].start);
                prop_assert_ne!(&pair[0].language, &pair[1].language);
            }
            let total: usize = segments.iter().map(|s| s.phone_count).sum();
            prop_assert_eq!(total, speech.len());
        }

        #[test]
        fn raising_the_threshold_never_adds_segments(
            tokens in proptest::collection::vec(language_strategy(), 1..60),
        ) {
            let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let records = stream(&toks);
            prop_assume!(records.iter().any(|r| !r.token.is_silence()));
            let mut previous = usize::MAX;
            for threshold in [1usize, 2, 3, 5, 10] {
                let count = segment(&records, threshold).unwrap().len();
                prop_assert!(count <= previous);
                previous = count;
            }
        }

        #[test]
        fn threshold_one_equals_rle_everywhere(
            tokens in proptest::collection::vec(language_strategy(), 1..60),
        ) {
            let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let records = stream(&toks);
            prop_assume!(records.iter().any(|r| !r.token.is_silence()));
            prop_assert_eq!(segment(&records, 1).unwrap(), rle_segments(&records));
        }

        #[test]
        fn oversized_threshold_gives_one_segment(
            tokens in proptest::collection::vec(language_strategy(), 1..30),
        ) {
            let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let records = stream(&toks);
            let speech: Vec<&CtmRecord> =
                records.iter().filter(|r| !r.token.is_silence()).collect();
            prop_assume!(!speech.is_empty());
            let segments = segment(&records, speech.len() + 1).unwrap();
            prop_assert_eq!(segments.len(), 1);
            prop_assert_eq!(
                &segments[0].language,
                speech[0].token.language().unwrap()
            );
        }
    }
}
