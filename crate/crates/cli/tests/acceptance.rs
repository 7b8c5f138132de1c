//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line and holding its runtime budget.
//!
//! Run with `cargo test -p phonevote-cli --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::collections::BTreeMap;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phonevote::codeswitch::{segment, Segment};
use phonevote::corpus::Corpus;
use phonevote::ctm::{group_by_utterance, parse_ctm, CtmRecord};
use phonevote::eval::score;
use phonevote::lexicon::Lexicon;
use phonevote::ngram::NgramModel;
use phonevote::sim::{simulate, simulate_codeswitch, SimSpec};
use phonevote::vote::{identify, predict, tally};
use phonevote::LanguageTag;

fn tag(code: &str) -> LanguageTag {
    LanguageTag::new(code).unwrap()
}

fn budget(name: &str, started: Instant, limit: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < limit,
        "{name} took {elapsed:?}, budget {limit:?}"
    );
    println!("acceptance {name}: pass in {elapsed:?}");
}

fn four_language_spec() -> SimSpec {
    SimSpec {
        languages: vec![tag("AR"), tag("ES"), tag("FR"), tag("TR")],
        inventory: [
            (tag("AR"), vec!["q".into(), "h".into(), "3".into()]),
            (tag("ES"), vec!["a".into(), "e".into(), "o".into()]),
            (tag("FR"), vec!["x".into(), "y".into(), "z".into()]),
            (tag("TR"), vec!["u".into(), "i".into(), "c".into()]),
        ]
        .into_iter()
        .collect(),
        confusion: BTreeMap::new(),
        utterances_per_language: 250,
        phones_min: 10,
        phones_max: 40,
        silence_rate: 0.1,
        mean_phone_duration: 0.08,
        seed: 2024,
    }
}

fn predictions_of(result: &phonevote::vote::IdentifyResult) -> BTreeMap<String, LanguageTag> {
    result
        .predictions
        .values()
        .map(|p| (p.utterance_id.clone(), p.language.clone()))
        .collect()
}

/// 1. Voting exactness: the worked six-phone utterance tallies ES:3 FR:2
///    AR:1 and is predicted ES, bit-exactly.
#[test]
fn criterion_1_voting_exactness() {
    let started = Instant::now();
    let ctm = "\
utt1 1 0.00 0.08 ES_b
utt1 1 0.08 0.08 ES_a
utt1 1 0.16 0.08 FR_s
utt1 1 0.24 0.08 FR_u
utt1 1 0.32 0.08 ES_r
utt1 1 0.40 0.08 AR_a
";
    let records = parse_ctm(ctm).unwrap();
    let t = tally(&records);
    let counts: Vec<(&str, u64)> = t
        .counts()
        .iter()
        .map(|(tag, count)| (tag.as_str(), *count))
        .collect();
    assert_eq!(counts, [("AR", 1), ("ES", 3), ("FR", 2)]);
    let winner = predict(&t, &[tag("AR"), tag("ES"), tag("FR"), tag("TR")]).unwrap();
    assert_eq!(winner, tag("ES"));
    budget("1 (voting exactness)", started, Duration::from_secs(1));
}

/// 2. Accuracy formulas: overall and per-language accuracy on a hand-built
///    10-utterance fixture match hand-computed values exactly.
#[test]
fn criterion_2_accuracy_formulas() {
    let started = Instant::now();
    let gold: BTreeMap<String, LanguageTag> = [
        ("u01", "AR"), ("u02", "AR"), ("u03", "AR"),
        ("u04", "ES"), ("u05", "ES"), ("u06", "ES"),
        ("u07", "FR"), ("u08", "FR"),
        ("u09", "TR"), ("u10", "TR"),
    ]
    .into_iter()
    .map(|(u, t)| (u.to_owned(), tag(t)))
    .collect();
    let predictions: BTreeMap<String, LanguageTag> = [
        ("u01", "AR"), ("u02", "AR"), ("u03", "ES"),
        ("u04", "ES"), ("u05", "ES"), ("u06", "ES"),
        ("u07", "FR"), ("u08", "ES"),
        ("u09", "TR"), ("u10", "AR"),
    ]
    .into_iter()
    .map(|(u, t)| (u.to_owned(), tag(t)))
    .collect();

    let report = score(&predictions, &gold).unwrap();
    assert_eq!(report.scored, 10);
    assert_eq!(report.overall_accuracy, 7.0 / 10.0);
    let row = |code: &str| report.per_language[&tag(code)];
    assert_eq!(row("AR").accuracy, 2.0 / 3.0);
    assert_eq!(row("ES").accuracy, 1.0);
    assert_eq!(row("FR").accuracy, 1.0 / 2.0);
    assert_eq!(row("TR").accuracy, 1.0 / 2.0);
    assert_eq!(report.confusion[&tag("AR")][&tag("ES")], 1);
    assert_eq!(report.confusion[&tag("FR")][&tag("ES")], 1);
    assert_eq!(report.confusion[&tag("TR")][&tag("AR")], 1);
    let cells: u64 = report.confusion.values().flat_map(|r| r.values()).sum();
    assert_eq!(cells, 10);
    budget("2 (accuracy formulas)", started, Duration::from_secs(1));
}

/// 3. End-to-end identity: diagonal confusion over 4 languages x 250
///    utterances of 10-40 phones scores overall accuracy exactly 1.0.
#[test]
fn criterion_3_end_to_end_identity() {
    let started = Instant::now();
    let spec = four_language_spec();
    let output = simulate(&spec).unwrap();
    assert_eq!(output.gold.len(), 1000);
    let result = identify(output.ctm, &spec.languages);
    assert!(result.failures.is_empty());
    let report = score(&predictions_of(&result), &output.gold).unwrap();
    assert_eq!(report.overall_accuracy, 1.0);
    assert!(report.skipped.is_empty());
    budget("3 (end-to-end identity)", started, Duration::from_secs(5));
}

/// 4. The biased-confusion scenario: with an FR emission row of
///    {FR: 0.4, ES: 0.6} and 1000 long FR utterances, FR accuracy is at
///    most 0.10 and at least 90% of FR errors land in the (FR, ES) cell.
///    The accuracy bound is first cross-checked by a Monte-Carlo draw that
///    bypasses the simulator entirely.
#[test]
fn criterion_4_fr_to_es_confusion() {
    let started = Instant::now();

    // Monte-Carlo oracle: per-phone Bernoulli(0.4) for FR over utterances
    // of 80..=120 phones; an utterance is an FR win only on strict majority
    // (ties break toward ES in the tie-break order used below).
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 4000u32;
    let mut fr_wins = 0u32;
    for _ in 0..trials {
        let n = rng.random_range(80..=120);
        let mut fr = 0i64;
        for _ in 0..n {
            if rng.random::<f64>() < 0.4 {
                fr += 1;
            } else {
                fr -= 1;
            }
        }
        if fr > 0 {
            fr_wins += 1;
        }
    }
    let oracle = f64::from(fr_wins) / f64::from(trials);
    assert!(oracle <= 0.08, "Monte-Carlo FR-win rate {oracle} leaves no margin");

    let mut spec = four_language_spec();
    spec.languages = vec![tag("ES"), tag("FR")];
    spec.utterances_per_language = 1000;
    spec.phones_min = 80;
    spec.phones_max = 120;
    spec.silence_rate = 0.0;
    spec.confusion.insert(
        tag("FR"),
        [(tag("FR"), 0.4), (tag("ES"), 0.6)].into_iter().collect(),
    );
    let output = simulate(&spec).unwrap();
    let result = identify(output.ctm, &spec.languages);
    let report = score(&predictions_of(&result), &output.gold).unwrap();

    let fr = report.per_language[&tag("FR")];
    assert_eq!(fr.total, 1000);
    assert!(fr.accuracy <= 0.10, "FR accuracy {}", fr.accuracy);
    let fr_row = &report.confusion[&tag("FR")];
    let errors: u64 = fr_row
        .iter()
        .filter(|(predicted, _)| **predicted != tag("FR"))
        .map(|(_, count)| *count)
        .sum();
    let to_es = fr_row.get(&tag("ES")).copied().unwrap_or(0);
    assert!(errors > 0);
    assert!(
        to_es as f64 >= 0.90 * errors as f64,
        "only {to_es}/{errors} FR errors went to ES"
    );
    budget("4 (FR->ES confusion)", started, Duration::from_secs(10));
}

/// 5. Code-switch detection: two-block utterances with identity confusion,
///    segmented at threshold 3, give the right new language for >= 99% of
///    200 utterances and a switch time within twice the mean phone duration
///    of gold for >= 95%.
#[test]
fn criterion_5_codeswitch_detection() {
    let started = Instant::now();
    let mut spec = four_language_spec();
    spec.utterances_per_language = 50; // x4 languages = 200 utterances
    spec.phones_min = 10;
    spec.phones_max = 30;
    let output = simulate_codeswitch(&spec, 2).unwrap();
    let switch_gold = output.switch_gold.as_ref().unwrap();
    assert_eq!(switch_gold.len(), 200);

    let mut language_correct = 0u32;
    let mut time_close = 0u32;
    let total = switch_gold.len() as u32;
    for (utterance, group) in group_by_utterance(output.ctm.clone()) {
        let segments = segment(&group, 3).unwrap();
        let (gold_time, gold_language) = &switch_gold[&utterance][0];
        if let Some(detected) = segments.get(1) {
            if detected.language == *gold_language {
                language_correct += 1;
            }
            if (detected.start - gold_time).abs() <= 2.0 * spec.mean_phone_duration {
                time_close += 1;
            }
        }
    }
    let language_rate = f64::from(language_correct) / f64::from(total);
    let time_rate = f64::from(time_close) / f64::from(total);
    assert!(language_rate >= 0.99, "language rate {language_rate}");
    assert!(time_rate >= 0.95, "time rate {time_rate}");
    budget("5 (code-switch detection)", started, Duration::from_secs(5));
}

/// Run-length encoding of a phone stream's language sequence, written out
/// directly as the reference for threshold 1.
fn rle(records: &[CtmRecord]) -> Vec<Segment> {
    let speech: Vec<&CtmRecord> = records.iter().filter(|r| !r.token.is_silence()).collect();
    let mut out: Vec<Segment> = Vec::new();
    for record in &speech {
        let language = record.token.language().unwrap().clone();
        match out.last_mut() {
            Some(last) if last.language == language => last.phone_count += 1,
            _ => {
                if let Some(last) = out.last_mut() {
                    last.end = record.start;
                }
                out.push(Segment {
                    start: record.start,
                    end: 0.0,
                    language,
                    phone_count: 1,
                });
            }
        }
    }
    if let Some(last_segment) = out.last_mut() {
        let last = speech.last().unwrap();
        last_segment.end = last.start + last.duration;
    }
    out
}

/// 6. Segmenter properties over 1000 random phone streams: threshold 1
///    equals run-length encoding, segment counts never grow with the
///    threshold, and segments tile the utterance span without gaps.
#[test]
fn criterion_6_segmenter_properties() {
    let started = Instant::now();
    let languages = ["AR", "ES", "FR", "TR"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..1000 {
        let len = rng.random_range(1..=60);
        let mut records: Vec<CtmRecord> = Vec::with_capacity(len);
        let mut clock = 0.0;
        for _ in 0..len {
            let token = if rng.random::<f64>() < 0.1 {
                "SIL".to_owned()
            } else {
                format!("{}_p", languages[rng.random_range(0..languages.len())])
            };
            let duration = 0.05 + rng.random::<f64>() * 0.2;
            records.push(CtmRecord {
                utterance_id: "u".to_owned(),
                channel: "1".to_owned(),
                start: clock,
                duration,
                token: token.parse().unwrap(),
                confidence: None,
            });
            clock += duration;
        }
        let speech: Vec<&CtmRecord> =
            records.iter().filter(|r| !r.token.is_silence()).collect();
        if speech.is_empty() {
            assert!(segment(&records, 1).is_err());
            continue;
        }

        assert_eq!(segment(&records, 1).unwrap(), rle(&records), "case {case}");

        let mut previous = usize::MAX;
        for threshold in [1usize, 2, 3, 5, 10] {
            let segments = segment(&records, threshold).unwrap();
            assert!(segments.len() <= previous, "case {case} T={threshold}");
            previous = segments.len();

            assert_eq!(segments.first().unwrap().start, speech[0].start);
            let last = speech.last().unwrap();
            assert_eq!(segments.last().unwrap().end, last.start + last.duration);
            for pair in segments.windows(2) {
                assert_eq!(pair[0].end, pair[1].start, "case {case} has a gap");
            }
        }
    }
    budget("6 (segmenter properties)", started, Duration::from_secs(5));
}

/// 7. ARPA integrity: an order-4 model over a 1000-line synthetic corpus
///    serializes byte-stably through write -> parse -> write; conditional
///    distributions over the vocabulary sum to 1 +/- 1e-6 for 100 random
///    contexts; and on a 3-line corpus every entry agrees with a direct
///    counting oracle within 1e-9.
#[test]
fn criterion_7_arpa_integrity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vocabulary: Vec<String> = (0..40).map(|i| format!("w{i:02}")).collect();
    let lines: Vec<Vec<String>> = (0..1000)
        .map(|_| {
            let len = rng.random_range(3..=12);
            (0..len)
                .map(|_| vocabulary[rng.random_range(0..vocabulary.len())].clone())
                .collect()
        })
        .collect();
    let corpus = Corpus::from_token_lines(lines, &tag("ES"));
    let model: NgramModel<f64> = NgramModel::train(&corpus, 4).unwrap();

    let first = model.to_arpa();
    let reparsed: NgramModel<f64> = NgramModel::from_arpa(&first).unwrap();
    assert_eq!(reparsed.to_arpa(), first, "write->parse->write not byte-identical");

    let vocab: Vec<String> = model.vocab().map(str::to_owned).collect();
    for _ in 0..100 {
        let len = rng.random_range(0..=3);
        let context: Vec<String> = (0..len)
            .map(|_| {
                if rng.random::<f64>() < 0.1 {
                    "zzz-oov".to_owned()
                } else {
                    vocab[rng.random_range(0..vocab.len())].clone()
                }
            })
            .collect();
        let sum: f64 = vocab.iter().map(|w| model.cond_prob(&context, w)).sum();
        assert!(
            (sum - 1.0).abs() <= 1e-6,
            "context {context:?} sums to {sum}"
        );
    }

    oracle_agreement_on_three_lines();
    budget("7 (ARPA integrity)", started, Duration::from_secs(10));
}

/// Direct counting oracle for Witten-Bell backoff estimates, recomputing
/// every quantity by scanning the padded lines.
mod counting_oracle {
    pub const LINES: [&str; 3] = ["uno dos tres", "dos tres", "tres uno uno"];

    fn padded() -> Vec<Vec<String>> {
        LINES
            .iter()
            .map(|l| {
                let mut p = vec!["<s>".to_owned()];
                p.extend(l.split_whitespace().map(str::to_owned));
                p.push("</s>".to_owned());
                p
            })
            .collect()
    }

    fn windows(n: usize) -> Vec<Vec<String>> {
        padded()
            .iter()
            .flat_map(|line| line.windows(n).map(<[String]>::to_vec))
            .collect()
    }

    pub fn occurrences(gram: &[String]) -> usize {
        windows(gram.len()).iter().filter(|w| w.as_slice() == gram).count()
    }

    pub fn continuations(context: &[String]) -> Vec<String> {
        let mut out: Vec<String> = windows(context.len() + 1)
            .into_iter()
            .filter(|w| &w[..context.len()] == context)
            .map(|w| w[context.len()].clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn unigram(word: &str) -> f64 {
        let events: Vec<Vec<String>> = windows(1)
            .into_iter()
            .filter(|w| w[0] != "<s>")
            .collect();
        let total = events.len() as f64;
        let mut types: Vec<&str> = events.iter().map(|w| w[0].as_str()).collect();
        types.sort();
        types.dedup();
        let t = types.len() as f64;
        let count = events.iter().filter(|w| w[0] == word).count() as f64;
        count / (total + t) + t / (total + t) / (t + 1.0)
    }

    pub fn discounted(gram: &[String]) -> f64 {
        let context = &gram[..gram.len() - 1];
        let continuation_total = windows(gram.len())
            .iter()
            .filter(|w| &w[..context.len()] == context)
            .count() as f64;
        let t = continuations(context).len() as f64;
        occurrences(gram) as f64 / (continuation_total + t)
    }

    pub fn conditional(context: &[String], word: &str) -> f64 {
        if context.is_empty() {
            return if word == "<s>" { 1e-99 } else { unigram(word) };
        }
        let mut gram = context.to_vec();
        gram.push(word.to_owned());
        if occurrences(&gram) > 0 {
            return discounted(&gram);
        }
        let bow = if continuations(context).is_empty() {
            1.0
        } else {
            backoff(context)
        };
        bow * conditional(&context[1..], word)
    }

    pub fn backoff(context: &[String]) -> f64 {
        let seen = continuations(context);
        let mut seen_here = 0.0;
        let mut seen_lower = 0.0;
        for word in &seen {
            let mut gram = context.to_vec();
            gram.push(word.clone());
            seen_here += discounted(&gram);
            seen_lower += conditional(&context[1..], word);
        }
        (1.0 - seen_here) / (1.0 - seen_lower)
    }
}

fn oracle_agreement_on_three_lines() {
    use counting_oracle as oracle;
    let lines: Vec<Vec<String>> = oracle::LINES
        .iter()
        .map(|l| l.split_whitespace().map(str::to_owned).collect())
        .collect();
    let corpus = Corpus::from_token_lines(lines, &tag("ES"));
    let model: NgramModel<f64> = NgramModel::train(&corpus, 4).unwrap();
    for n in 1..=4 {
        for (gram, entry) in model.ngrams(n) {
            let expected = if n == 1 {
                if gram[0] == "<s>" {
                    -99.0
                } else {
                    oracle::unigram(&gram[0]).log10()
                }
            } else {
                oracle::discounted(gram).log10()
            };
            assert!(
                (entry.logprob - expected).abs() < 1e-9,
                "logprob {gram:?}: {} vs oracle {expected}",
                entry.logprob
            );
            if let Some(bow) = entry.backoff {
                let expected = oracle::backoff(gram).log10();
                assert!(
                    (bow - expected).abs() < 1e-9,
                    "backoff {gram:?}: {bow} vs oracle {expected}"
                );
            }
        }
    }
}

/// 8. Lexicon merge properties: over seeded random multi-language lexicons
///    riddled with homographs, the merged output has dense per-word
///    variants, fully tagged phones, and survives the write/load round
///    trip per language.
#[test]
fn criterion_8_lexicon_merge_properties() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let words = ["a", "b", "ab", "ba", "casa"];
    let phones = ["p", "q", "r", "s"];
    let languages = [tag("ES"), tag("FR"), tag("TR")];
    for case in 0..200 {
        let mut parts = Vec::new();
        for language in &languages {
            let rows = rng.random_range(1..=10);
            let text: String = (0..rows)
                .map(|_| {
                    let word = words[rng.random_range(0..words.len())];
                    let len = rng.random_range(1..=4);
                    let pron: Vec<&str> = (0..len)
                        .map(|_| phones[rng.random_range(0..phones.len())])
                        .collect();
                    format!("{word}  {}\n", pron.join(" "))
                })
                .collect();
            parts.push(Lexicon::parse(&text, language).unwrap());
        }
        let merged = Lexicon::merge(&parts).unwrap();

        // tag totality: serialized phones carry a 2-8 letter uppercase prefix
        for entry in merged.entries() {
            for phone in &entry.pron {
                let serialized = phone.to_string();
                let (prefix, base) = serialized.split_once('_').expect("tagged phone");
                assert!(
                    (2..=8).contains(&prefix.len())
                        && prefix.bytes().all(|b| b.is_ascii_uppercase()),
                    "case {case}: bad prefix in {serialized}"
                );
                assert!(!base.is_empty());
            }
        }
        // variant density per word
        let mut by_word: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for entry in merged.entries() {
            by_word
                .entry(entry.word.as_str())
                .or_default()
                .push(entry.variant);
        }
        for (word, mut variants) in by_word {
            variants.sort_unstable();
            let dense: Vec<u32> = (1..=variants.len() as u32).collect();
            assert_eq!(variants, dense, "case {case}: word {word}");
        }
        // write/load round trip per language
        for part in merged.split_by_language() {
            let language = part.languages().into_iter().next().unwrap();
            let reparsed = Lexicon::parse(&part.to_string(), &language).unwrap();
            assert_eq!(reparsed, part, "case {case}: round trip for {language}");
        }
    }
    budget("8 (lexicon merge properties)", started, Duration::from_secs(5));
}

/// 9. Determinism: two runs of the `pipeline` subcommand with the same spec
///    and seed produce byte-identical artifacts.
#[test]
fn criterion_9_pipeline_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
languages = ["AR", "ES", "FR", "TR"]
utterances_per_language = 250
phones_min = 10
phones_max = 40
silence_rate = 0.1
mean_phone_duration = 0.08
seed = 9

[inventory]
AR = ["q", "h", "3"]
ES = ["a", "e", "o"]
FR = ["x", "y", "z"]
TR = ["u", "i", "c"]
"#;
    fs::write(dir.path().join("sim.toml"), spec).unwrap();
    for run in ["one", "two"] {
        let output = Command::new(env!("CARGO_BIN_EXE_phonevote"))
            .args(["pipeline", "--spec", "sim.toml", "--out-dir", run, "--json"])
            .current_dir(dir.path())
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    for file in [
        "sim.ctm",
        "sim.gold",
        "predictions.tsv",
        "report.txt",
        "report.json",
    ] {
        let one = fs::read(dir.path().join("one").join(file)).unwrap();
        let two = fs::read(dir.path().join("two").join(file)).unwrap();
        assert!(!one.is_empty());
        assert_eq!(one, two, "{file} differs between runs");
    }
    budget("9 (pipeline determinism)", started, Duration::from_secs(10));
}
