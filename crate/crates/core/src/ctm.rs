//! Time-marked phone alignment files (CTM) and the phone symbol table used
//! to map numeric decoder output back to symbols.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::lang::PhoneLabel;

/// One timed token prediction. `T` is the token representation: numeric
/// phone ids straight out of a decoder, or [`PhoneLabel`]s after mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct CtmRecord<T = PhoneLabel> {
    pub utterance_id: String,
    pub channel: String,
    /// Start time in seconds.
    pub start: f64,
    /// Duration in seconds.
    pub duration: f64,
    pub token: T,
    pub confidence: Option<f64>,
}

fn parse_with<T>(
    text: &str,
    parse_token: impl Fn(&str) -> Result<T>,
) -> Result<Vec<CtmRecord<T>>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 && fields.len() != 6 {
            return Err(Error::CtmParse {
                line,
                reason: format!("expected 5 or 6 fields, found {}", fields.len()),
            });
        }
        let time = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::CtmParse {
                line,
                reason: format!("non-numeric {what} {s:?}"),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::CtmParse {
                    line,
                    reason: format!("negative or non-finite {what} {s:?}"),
                });
            }
            Ok(v)
        };
        let start = time(fields[2], "start time")?;
        let duration = time(fields[3], "duration")?;
        let token = parse_token(fields[4]).map_err(|e| Error::CtmParse {
            line,
            reason: e.to_string(),
        })?;
        let confidence = match fields.get(5) {
            None => None,
            Some(s) => {
                let v: f64 = s.parse().map_err(|_| Error::CtmParse {
                    line,
                    reason: format!("non-numeric confidence {s:?}"),
                })?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::CtmParse {
                        line,
                        reason: format!("confidence {v} outside [0,1]"),
                    });
                }
                Some(v)
            }
        };
        records.push(CtmRecord {
            utterance_id: fields[0].to_owned(),
            channel: fields[1].to_owned(),
            start,
            duration,
            token,
            confidence,
        });
    }
    Ok(records)
}

/// Parses a CTM file whose token column holds phone symbols.
pub fn parse_ctm(text: &str) -> Result<Vec<CtmRecord>> {
    parse_with(text, |s| s.parse::<PhoneLabel>())
}

/// Parses a CTM file whose token column holds numeric phone ids, as emitted
/// before symbol mapping.
pub fn parse_ctm_ids(text: &str) -> Result<Vec<CtmRecord<u32>>> {
    parse_with(text, |s| {
        s.parse::<u32>().map_err(|_| Error::CtmParse {
            line: 0,
            reason: format!("non-numeric phone id {s:?}"),
        })
    })
}

/// Serializes records with times and confidences at 2 decimal places.
pub fn write_ctm(records: &[CtmRecord]) -> String {
    let mut out = String::new();
    for r in records {
        write!(
            out,
            "{} {} {:.2} {:.2} {}",
            r.utterance_id, r.channel, r.start, r.duration, r.token
        )
        .expect("writing to String cannot fail");
        if let Some(c) = r.confidence {
            write!(out, " {c:.2}").expect("writing to String cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Bijective map between numeric phone ids and phone symbols, as read from
/// a `phones.txt`-style table of `SYMBOL ID` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhoneTable {
    by_id: BTreeMap<u32, String>,
}

impl PhoneTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut by_id: BTreeMap<u32, String> = BTreeMap::new();
        let mut seen_symbols: BTreeMap<String, u32> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::PhoneTableParse {
                    line,
                    reason: format!("expected SYMBOL ID, found {} fields", fields.len()),
                });
            }
            let symbol = fields[0].to_owned();
            let id: u32 = fields[1].parse().map_err(|_| Error::PhoneTableParse {
                line,
                reason: format!("non-numeric id {:?}", fields[1]),
            })?;
            if let Some(previous) = by_id.get(&id) {
                return Err(Error::PhoneTableParse {
                    line,
                    reason: format!("id {id} already maps to {previous:?}"),
                });
            }
            if let Some(previous) = seen_symbols.get(&symbol) {
                return Err(Error::PhoneTableParse {
                    line,
                    reason: format!("symbol {symbol:?} already has id {previous}"),
                });
            }
            seen_symbols.insert(symbol.clone(), id);
            by_id.insert(id, symbol);
        }
        Ok(Self { by_id })
    }

    pub fn symbol(&self, id: u32) -> Option<&str> {
        self.by_id.get(&id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.by_id.iter().map(|(id, s)| (*id, s.as_str()))
    }
}

/// Replaces numeric phone ids by their symbols from the table. Fails on ids
/// missing from the table and on symbols that are neither tagged phones nor
/// silence.
pub fn map_phone_ids(records: &[CtmRecord<u32>], table: &PhoneTable) -> Result<Vec<CtmRecord>> {
    records
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let symbol = table.symbol(r.token).ok_or(Error::UnknownPhoneId {
                index,
                id: r.token,
            })?;
            let token: PhoneLabel = symbol.parse().map_err(|_| Error::UnmappableSymbol {
                index,
                symbol: symbol.to_owned(),
            })?;
            Ok(CtmRecord {
                utterance_id: r.utterance_id.clone(),
                channel: r.channel.clone(),
                start: r.start,
                duration: r.duration,
                token,
                confidence: r.confidence,
            })
        })
        .collect()
}

/// Groups records by utterance in order of first appearance; within each
/// utterance records are sorted by start time, stable on ties.
pub fn group_by_utterance<T>(records: Vec<CtmRecord<T>>) -> IndexMap<String, Vec<CtmRecord<T>>> {
    let mut groups: IndexMap<String, Vec<CtmRecord<T>>> = IndexMap::new();
    for record in records {
        groups
            .entry(record.utterance_id.clone())
            .or_default()
            .push(record);
    }
    for group in groups.values_mut() {
        group.sort_by(|a, b| a.start.total_cmp(&b.start));
    }
    groups
}
