//! Backoff n-gram language models with Witten-Bell smoothing, trained from a
//! [`Corpus`](crate::corpus::Corpus) and serialized in the ARPA text format.
//!
//! The model is generic over the probability scalar; see the crate root for
//! the concrete `f32`/`f64` aliases.
//!
//! Smoothing follows the Witten-Bell scheme: a context that has been
//! continued by `T` distinct types out of `c` total continuations keeps
//! `c/(c+T)` of its probability mass for seen events and reserves `T/(c+T)`
//! for backoff. At the unigram level the reserved mass is spread uniformly
//! over the predictable vocabulary (observed tokens, `</s>`, and `<unk>`),
//! which keeps every observed token strictly more probable than `<unk>`.
//! The sentence-start marker is never predicted and is written with the
//! conventional `-99` placeholder log probability.

use std::collections::BTreeMap;

use num_traits::Float;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Sentence-start marker.
pub const SENTENCE_START: &str = "<s>";
/// Sentence-end marker.
pub const SENTENCE_END: &str = "</s>";
/// Stand-in for out-of-vocabulary tokens.
pub const UNKNOWN: &str = "<unk>";

/// One ARPA table row: a log10 probability and, below the highest order, an
/// optional log10 backoff weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEntry<F> {
    pub logprob: F,
    pub backoff: Option<F>,
}

/// An order-N backoff language model over log10 probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel<F> {
    order: usize,
    /// `tables[n-1]` maps n-token tuples to their entries, sorted
    /// lexicographically.
    tables: Vec<BTreeMap<Vec<String>, ProbEntry<F>>>,
}

fn num<F: Float>(x: f64) -> F {
    F::from(x).expect("finite f64 converts to the model scalar")
}

fn ten<F: Float>() -> F {
    num(10.0)
}

/// Conditional log10 probability of `word` after `context`, resolving
/// unseen n-grams through backoff weights. Absent backoff weights count as
/// log10(1) = 0; a word missing from the unigram table has probability 0.
fn backoff_logprob<F: Float>(
    tables: &[BTreeMap<Vec<String>, ProbEntry<F>>],
    context: &[String],
    word: &str,
) -> F {
    let mut key: Vec<String> = Vec::with_capacity(context.len() + 1);
    key.extend(context.iter().cloned());
    key.push(word.to_owned());
    if let Some(entry) = tables.get(context.len()).and_then(|t| t.get(&key)) {
        return entry.logprob;
    }
    if context.is_empty() {
        return F::neg_infinity();
    }
    let bow = tables[context.len() - 1]
        .get(context)
        .and_then(|e| e.backoff)
        .unwrap_or_else(F::zero);
    bow + backoff_logprob(tables, &context[1..], word)
}

impl<F: Float> NgramModel<F> {
    /// Trains an order-N Witten-Bell backoff model. Every line is counted
    /// wrapped as `<s> tokens </s>`; no count cutoff is applied.
    pub fn train(corpus: &Corpus, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let mut counts: Vec<BTreeMap<Vec<String>, u64>> = vec![BTreeMap::new(); order];
        for (tokens, _) in corpus.iter() {
            let mut padded: Vec<String> = Vec::with_capacity(tokens.len() + 2);
            padded.push(SENTENCE_START.to_owned());
            padded.extend(tokens.iter().cloned());
            padded.push(SENTENCE_END.to_owned());
            for (n, table) in counts.iter_mut().enumerate() {
                for window in padded.windows(n + 1) {
                    *table.entry(window.to_vec()).or_insert(0) += 1;
                }
            }
        }

        let mut tables: Vec<BTreeMap<Vec<String>, ProbEntry<F>>> =
            vec![BTreeMap::new(); order];

        // Unigrams. <s> is context only: it is excluded from the event
        // space and pinned at -99.
        let total: u64 = counts[0]
            .iter()
            .filter(|(k, _)| k[0] != SENTENCE_START)
            .map(|(_, c)| *c)
            .sum();
        let types = counts[0].len() as u64 - 1;
        let predictable = types + 1; // observed types plus <unk>
        let denom = num::<F>(total as f64) + num(types as f64);
        let uniform_share = num::<F>(types as f64) / denom / num(predictable as f64);
        for (key, count) in &counts[0] {
            let logprob = if key[0] == SENTENCE_START {
                num(-99.0)
            } else {
                (num::<F>(*count as f64) / denom + uniform_share).log10()
            };
            tables[0].insert(
                key.clone(),
                ProbEntry {
                    logprob,
                    backoff: None,
                },
            );
        }
        tables[0].insert(
            vec![UNKNOWN.to_owned()],
            ProbEntry {
                logprob: uniform_share.log10(),
                backoff: None,
            },
        );

        for n in 2..=order {
            // group order-n counts by their (n-1)-token context
            let mut by_context: BTreeMap<Vec<String>, Vec<(String, u64)>> = BTreeMap::new();
            for (key, count) in &counts[n - 1] {
                by_context
                    .entry(key[..n - 1].to_vec())
                    .or_default()
                    .push((key[n - 1].clone(), *count));
            }
            for (context, continuations) in &by_context {
                let c_total: u64 = continuations.iter().map(|(_, c)| *c).sum();
                let types = continuations.len() as u64;
                let denom = num::<F>(c_total as f64) + num(types as f64);
                for (word, count) in continuations {
                    let mut key = context.clone();
                    key.push(word.clone());
                    tables[n - 1].insert(
                        key,
                        ProbEntry {
                            logprob: (num::<F>(*count as f64) / denom).log10(),
                            backoff: None,
                        },
                    );
                }
                // backoff weight of the context, attached to its (n-1)-gram
                // entry: reserved mass over the lower-order mass of unseen
                // continuations
                let reserved = num::<F>(types as f64) / denom;
                let mut seen_lower = F::zero();
                for (word, _) in continuations {
                    seen_lower = seen_lower
                        + ten::<F>().powf(backoff_logprob(&tables, &context[1..], word));
                }
                let bow = reserved / (F::one() - seen_lower);
                let entry = tables[n - 2]
                    .get_mut(context)
                    .expect("every context is a counted lower-order n-gram");
                entry.backoff = Some(bow.log10());
            }
        }

        Ok(Self { order, tables })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored n-grams at order `n` (1-based).
    pub fn count_at(&self, n: usize) -> usize {
        self.tables[n - 1].len()
    }

    /// All n-grams of order `n` with their entries, lexicographically.
    pub fn ngrams(&self, n: usize) -> impl Iterator<Item = (&[String], &ProbEntry<F>)> {
        self.tables[n - 1].iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn entry(&self, ngram: &[String]) -> Option<&ProbEntry<F>> {
        self.tables.get(ngram.len().wrapping_sub(1))?.get(ngram)
    }

    /// The model vocabulary (unigram tokens, markers included).
    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.tables[0].keys().map(|k| k[0].as_str())
    }

    pub fn in_vocab(&self, word: &str) -> bool {
        let key = [word.to_owned()];
        self.tables[0].contains_key(&key[..])
    }

    /// Conditional log10 probability of `word` given `context`, truncating
    /// the context to the model order and mapping an out-of-vocabulary word
    /// to `<unk>`.
    pub fn cond_logprob(&self, context: &[String], word: &str) -> F {
        let word = if self.in_vocab(word) { word } else { UNKNOWN };
        let start = context.len().saturating_sub(self.order - 1);
        backoff_logprob(&self.tables, &context[start..], word)
    }

    /// Conditional probability, `10^cond_logprob`.
    pub fn cond_prob(&self, context: &[String], word: &str) -> F {
        ten::<F>().powf(self.cond_logprob(context, word))
    }

    /// Log10 probability of a sentence: the sum of the conditional log
    /// probabilities of every token plus `</s>`, each given its backed-off
    /// history after `<s>`. OOV tokens are scored as `<unk>`.
    pub fn sentence_logprob(&self, tokens: &[String]) -> F {
        let mut history: Vec<String> = vec![SENTENCE_START.to_owned()];
        let mut total = F::zero();
        let targets = tokens
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(SENTENCE_END));
        for target in targets {
            let word = if self.in_vocab(target) { target } else { UNKNOWN };
            let start = history.len().saturating_sub(self.order - 1);
            total = total + backoff_logprob(&self.tables, &history[start..], word);
            history.push(word.to_owned());
        }
        total
    }

    /// Serializes the model in ARPA text format: a `\data\` header with
    /// per-order counts, one `\n-grams:` section per order with entries
    /// sorted lexicographically, and a closing `\end\`. Log values are
    /// printed with 6 decimal places, fields tab-separated.
    pub fn to_arpa(&self) -> String {
        let mut out = String::from("\\data\\\n");
        for (i, table) in self.tables.iter().enumerate() {
            out.push_str(&format!("ngram {}={}\n", i + 1, table.len()));
        }
        for (i, table) in self.tables.iter().enumerate() {
            out.push_str(&format!("\n\\{}-grams:\n", i + 1));
            for (key, entry) in table {
                out.push_str(&format!(
                    "{:.6}\t{}",
                    entry.logprob.to_f64().expect("finite log probability"),
                    key.join(" ")
                ));
                if let Some(bow) = entry.backoff {
                    out.push_str(&format!("\t{:.6}", bow.to_f64().expect("finite backoff")));
                }
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    /// Parses ARPA text, validating header counts, entry shapes, and that
    /// every n-gram's prefix exists at the next lower order. Blank lines and
    /// CRLF endings are tolerated.
    pub fn from_arpa(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum State {
            Preamble,
            Header,
            Section(usize),
            Done,
        }

        let mut declared: Vec<usize> = Vec::new();
        let mut tables: Vec<BTreeMap<Vec<String>, ProbEntry<F>>> = Vec::new();
        let mut state = State::Preamble;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            match state {
                State::Preamble => {
                    if line == "\\data\\" {
                        state = State::Header;
                    } else {
                        return Err(Error::ArpaParse {
                            line: line_no,
                            reason: format!("expected \\data\\ header, found {line:?}"),
                        });
                    }
                }
                State::Header => {
                    if let Some(rest) = line.strip_prefix("ngram ") {
                        let (n, count) =
                            rest.split_once('=').ok_or_else(|| Error::ArpaParse {
                                line: line_no,
                                reason: "expected ngram <order>=<count>".into(),
                            })?;
                        let n: usize = n.trim().parse().map_err(|_| Error::ArpaParse {
                            line: line_no,
                            reason: format!("bad n-gram order {n:?}"),
                        })?;
                        let count: usize =
                            count.trim().parse().map_err(|_| Error::ArpaParse {
                                line: line_no,
                                reason: format!("bad n-gram count {count:?}"),
                            })?;
                        if n != declared.len() + 1 {
                            return Err(Error::ArpaParse {
                                line: line_no,
                                reason: format!(
                                    "expected ngram {}=..., found order {n}",
                                    declared.len() + 1
                                ),
                            });
                        }
                        declared.push(count);
                        tables.push(BTreeMap::new());
                    } else if let Some(n) = parse_section_header(line) {
                        if declared.is_empty() {
                            return Err(Error::ArpaParse {
                                line: line_no,
                                reason: "section before any ngram count".into(),
                            });
                        }
                        check_section_order(n, 1, line_no)?;
                        state = State::Section(n);
                    } else {
                        return Err(Error::ArpaParse {
                            line: line_no,
                            reason: format!("unexpected header line {line:?}"),
                        });
                    }
                }
                State::Section(current) => {
                    if line == "\\end\\" {
                        state = State::Done;
                    } else if let Some(n) = parse_section_header(line) {
                        check_section_order(n, current + 1, line_no)?;
                        if n > declared.len() {
                            return Err(Error::ArpaParse {
                                line: line_no,
                                reason: format!("section order {n} not declared in header"),
                            });
                        }
                        state = State::Section(n);
                    } else {
                        parse_entry_line(
                            line,
                            line_no,
                            current,
                            declared.len(),
                            &mut tables,
                        )?;
                    }
                }
                State::Done => {
                    return Err(Error::ArpaParse {
                        line: line_no,
                        reason: format!("content after \\end\\: {line:?}"),
                    });
                }
            }
        }

        match state {
            State::Done => {}
            State::Preamble => {
                return Err(Error::ArpaParse {
                    line: 0,
                    reason: "missing \\data\\ header".into(),
                })
            }
            _ => {
                return Err(Error::ArpaParse {
                    line: 0,
                    reason: "missing \\end\\ terminator".into(),
                })
            }
        }

        for (i, table) in tables.iter().enumerate() {
            if table.len() != declared[i] {
                return Err(Error::ArpaCountMismatch {
                    order: i + 1,
                    declared: declared[i],
                    found: table.len(),
                });
            }
        }

        Ok(Self {
            order: declared.len(),
            tables,
        })
    }
}

fn parse_section_header(line: &str) -> Option<usize> {
    let rest = line.strip_prefix('\\')?;
    let rest = rest.strip_suffix("-grams:")?;
    rest.parse().ok()
}

fn check_section_order(found: usize, expected: usize, line: usize) -> Result<()> {
    if found != expected {
        return Err(Error::ArpaParse {
            line,
            reason: format!("expected \\{expected}-grams: section, found \\{found}-grams:"),
        });
    }
    Ok(())
}

fn parse_entry_line<F: Float>(
    line: &str,
    line_no: usize,
    order: usize,
    max_order: usize,
    tables: &mut [BTreeMap<Vec<String>, ProbEntry<F>>],
) -> Result<()> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let has_backoff = match fields.len() {
        len if len == order + 1 => false,
        len if len == order + 2 => true,
        _ => {
            return Err(Error::ArpaParse {
                line: line_no,
                reason: format!(
                    "expected a log probability, {order} token(s), and an optional backoff"
                ),
            })
        }
    };
    let logprob: f64 = fields[0].parse().map_err(|_| Error::ArpaParse {
        line: line_no,
        reason: format!("non-numeric log probability {:?}", fields[0]),
    })?;
    if logprob > 0.0 {
        return Err(Error::ArpaParse {
            line: line_no,
            reason: format!("positive log probability {logprob}"),
        });
    }
    let backoff = if has_backoff {
        if order == max_order {
            return Err(Error::ArpaParse {
                line: line_no,
                reason: "backoff weight on a highest-order entry".into(),
            });
        }
        let bow: f64 = fields[order + 1].parse().map_err(|_| Error::ArpaParse {
            line: line_no,
            reason: format!("non-numeric backoff weight {:?}", fields[order + 1]),
        })?;
        Some(num::<F>(bow))
    } else {
        None
    };
    let key: Vec<String> = fields[1..=order].iter().map(|s| s.to_string()).collect();
    if order >= 2 && !tables[order - 2].contains_key(&key[..order - 1]) {
        return Err(Error::ArpaParse {
            line: line_no,
            reason: format!(
                "{order}-gram {:?} has no {}-gram prefix",
                key.join(" "),
                order - 1
            ),
        });
    }
    let previous = tables[order - 1].insert(
        key,
        ProbEntry {
            logprob: num(logprob),
            backoff,
        },
    );
    if previous.is_some() {
        return Err(Error::ArpaParse {
            line: line_no,
            reason: "duplicate n-gram".into(),
        });
    }
    Ok(())
}
