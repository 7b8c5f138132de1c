//! Deterministic synthetic phone-alignment generator.
//!
//! Stands in for an acoustic model so the identification pipeline can be
//! exercised end to end: it emits CTM phone streams plus gold labels from
//! per-language phone inventories and a configurable cross-language
//! confusion matrix. A ChaCha8 generator keyed by the spec seed drives all
//! randomness, with one stream per utterance, so equal specs reproduce
//! byte-identical output on any platform.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::ctm::CtmRecord;
use crate::error::{Error, Result};
use crate::eval::GoldLabels;
use crate::lang::{LanguageTag, PhoneLabel, TaggedPhone};

/// Generation parameters, readable from a TOML file; see
/// [`SimSpec::from_toml_str`].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    /// Closed set of true languages, in tie-break order.
    pub languages: Vec<LanguageTag>,
    /// Base phone symbols per emitted language.
    pub inventory: BTreeMap<LanguageTag, Vec<String>>,
    /// `confusion[true][emitted]` probabilities; rows must sum to 1.
    /// Languages without a row emit their own phones only.
    #[serde(default)]
    pub confusion: BTreeMap<LanguageTag, BTreeMap<LanguageTag, f64>>,
    pub utterances_per_language: usize,
    /// Speech phones per utterance (per block in code-switch mode),
    /// inclusive bounds.
    pub phones_min: usize,
    pub phones_max: usize,
    /// Probability of inserting a silence phone before each speech phone.
    #[serde(default)]
    pub silence_rate: f64,
    /// Mean phone duration in seconds; actual durations are uniform in
    /// [0.5, 1.5] times this.
    pub mean_phone_duration: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SimSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidSimSpec(e.to_string()))
    }

    /// Checks every spec invariant, naming the violated one.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSimSpec(msg));
        if self.languages.is_empty() {
            return fail("languages must be non-empty".into());
        }
        for (i, tag) in self.languages.iter().enumerate() {
            if self.languages[..i].contains(tag) {
                return fail(format!("duplicate language {tag}"));
            }
        }
        if self.utterances_per_language == 0 {
            return fail("utterances_per_language must be at least 1".into());
        }
        if self.phones_min == 0 {
            return fail("phones_min must be at least 1".into());
        }
        if self.phones_min > self.phones_max {
            return fail(format!(
                "phones_min {} exceeds phones_max {}",
                self.phones_min, self.phones_max
            ));
        }
        if !(0.0..1.0).contains(&self.silence_rate) {
            return fail(format!("silence_rate {} outside [0,1)", self.silence_rate));
        }
        if !self.mean_phone_duration.is_finite() || self.mean_phone_duration <= 0.0 {
            return fail(format!(
                "mean_phone_duration {} must be positive",
                self.mean_phone_duration
            ));
        }
        for tag in &self.languages {
            if self.inventory.get(tag).is_none_or(Vec::is_empty) {
                return fail(format!("inventory for {tag} is missing or empty"));
            }
        }
        for (truth, row) in &self.confusion {
            if !self.languages.contains(truth) {
                return fail(format!("confusion row for {truth} is not a spec language"));
            }
            let mut sum = 0.0;
            for (emitted, p) in row {
                if !(0.0..=1.0).contains(p) {
                    return fail(format!(
                        "confusion probability {truth}->{emitted} = {p} outside [0,1]"
                    ));
                }
                if *p > 0.0 && self.inventory.get(emitted).is_none_or(Vec::is_empty) {
                    return fail(format!("inventory for emitted language {emitted} is missing or empty"));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return fail(format!("confusion row for {truth} sums to {sum}, not 1"));
            }
        }
        Ok(())
    }

    /// The confusion row of `language`, defaulting to identity.
    fn row(&self, language: &LanguageTag) -> Vec<(LanguageTag, f64)> {
        match self.confusion.get(language) {
            Some(row) => row.iter().map(|(t, p)| (t.clone(), *p)).collect(),
            None => vec![(language.clone(), 1.0)],
        }
    }
}

/// Generated alignment plus ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub ctm: Vec<CtmRecord>,
    pub gold: GoldLabels,
    /// Per code-switched utterance: each block boundary's start time and the
    /// language switched to.
    pub switch_gold: Option<BTreeMap<String, Vec<(f64, LanguageTag)>>>,
}

/// One ChaCha8 stream per utterance keyed by the spec seed, so utterances
/// can be generated independently yet reproducibly.
fn utterance_rng(seed: u64, utterance_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(utterance_index);
    rng
}

struct UtteranceBuilder<'a> {
    spec: &'a SimSpec,
    id: String,
    records: Vec<CtmRecord>,
    clock: f64,
}

impl<'a> UtteranceBuilder<'a> {
    fn new(spec: &'a SimSpec, id: String) -> Self {
        Self {
            spec,
            id,
            records: Vec::new(),
            clock: 0.0,
        }
    }

    fn push(&mut self, token: PhoneLabel, rng: &mut ChaCha8Rng) {
        let duration = self.spec.mean_phone_duration * (0.5 + rng.random::<f64>());
        self.records.push(CtmRecord {
            utterance_id: self.id.clone(),
            channel: "1".to_owned(),
            start: self.clock,
            duration,
            token,
            confidence: None,
        });
        self.clock += duration;
    }

    /// Emits one block of `count` speech phones under the confusion row of
    /// `language`, returning the start time of the block's first speech
    /// phone.
    fn block(&mut self, language: &LanguageTag, count: usize, rng: &mut ChaCha8Rng) -> f64 {
        let row = self.spec.row(language);
        let mut first_start = None;
        for _ in 0..count {
            if self.spec.silence_rate > 0.0 && rng.random::<f64>() < self.spec.silence_rate {
                self.push(PhoneLabel::Silence("SIL".to_owned()), rng);
            }
            let emitted = sample_language(&row, rng);
            let bases = &self.spec.inventory[&emitted];
            let base = bases[rng.random_range(0..bases.len())].clone();
            first_start.get_or_insert(self.clock);
            self.push(
                PhoneLabel::Phone(TaggedPhone {
                    language: emitted,
                    base,
                }),
                rng,
            );
        }
        first_start.expect("block emits at least one phone")
    }
}

fn sample_language(row: &[(LanguageTag, f64)], rng: &mut ChaCha8Rng) -> LanguageTag {
    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    for (tag, p) in row {
        cumulative += p;
        if draw < cumulative {
            return tag.clone();
        }
    }
    row.last().expect("confusion row is non-empty").0.clone()
}

/// Generates `utterances_per_language` single-language utterances per spec
/// language. Identical specs give identical output.
pub fn simulate(spec: &SimSpec) -> Result<SimOutput> {
    spec.validate()?;
    let mut ctm = Vec::new();
    let mut gold = GoldLabels::new();
    let mut stream = 0u64;
    for language in &spec.languages {
        for i in 0..spec.utterances_per_language {
            let mut rng = utterance_rng(spec.seed, stream);
            stream += 1;
            let id = format!("{language}-{i:04}");
            let count = rng.random_range(spec.phones_min..=spec.phones_max);
            let mut builder = UtteranceBuilder::new(spec, id.clone());
            builder.block(language, count, &mut rng);
            ctm.extend(builder.records);
            gold.insert(id, language.clone());
        }
    }
    Ok(SimOutput {
        ctm,
        gold,
        switch_gold: None,
    })
}

/// Generates code-switched utterances: each is a concatenation of
/// `blocks_per_utterance` blocks whose true languages are drawn from the
/// spec languages with distinct consecutive choices. The phone count range
/// applies per block. The gold label of an utterance is its first block's
/// language; `switch_gold` records each later block's start time and
/// language.
pub fn simulate_codeswitch(spec: &SimSpec, blocks_per_utterance: usize) -> Result<SimOutput> {
    spec.validate()?;
    if blocks_per_utterance < 2 {
        return Err(Error::InvalidSimSpec(
            "blocks_per_utterance must be at least 2".into(),
        ));
    }
    if spec.languages.len() < 2 {
        return Err(Error::InvalidSimSpec(
            "code-switch generation needs at least 2 languages".into(),
        ));
    }
    let total = spec.utterances_per_language * spec.languages.len();
    let mut ctm = Vec::new();
    let mut gold = GoldLabels::new();
    let mut switch_gold: BTreeMap<String, Vec<(f64, LanguageTag)>> = BTreeMap::new();
    for utterance in 0..total {
        let mut rng = utterance_rng(spec.seed, utterance as u64);
        let id = format!("cs-{utterance:04}");
        let mut builder = UtteranceBuilder::new(spec, id.clone());
        let mut switches = Vec::new();
        let mut previous: Option<LanguageTag> = None;
        for block in 0..blocks_per_utterance {
            let language = draw_distinct_language(spec, previous.as_ref(), &mut rng);
            let count = rng.random_range(spec.phones_min..=spec.phones_max);
            let start = builder.block(&language, count, &mut rng);
            if block == 0 {
                gold.insert(id.clone(), language.clone());
            } else {
                switches.push((start, language.clone()));
            }
            previous = Some(language);
        }
        switch_gold.insert(id, switches);
        ctm.extend(builder.records);
    }
    Ok(SimOutput {
        ctm,
        gold,
        switch_gold: Some(switch_gold),
    })
}

fn draw_distinct_language(
    spec: &SimSpec,
    previous: Option<&LanguageTag>,
    rng: &mut ChaCha8Rng,
) -> LanguageTag {
    let candidates: Vec<&LanguageTag> = spec
        .languages
        .iter()
        .filter(|l| Some(*l) != previous)
        .collect();
    candidates[rng.random_range(0..candidates.len())].clone()
}

/// Renders `switch_gold` as `utt_id  time  language` lines, times at 2
/// decimals.
pub fn write_switch_gold(switch_gold: &BTreeMap<String, Vec<(f64, LanguageTag)>>) -> String {
    let mut out = String::new();
    for (utt, switches) in switch_gold {
        for (time, language) in switches {
            out.push_str(&format!("{utt}\t{time:.2}\t{language}\n"));
        }
    }
    out
}
