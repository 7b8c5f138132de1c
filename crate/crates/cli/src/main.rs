//! Command-line front end for the phone-vote language identification
//! pipeline.
//!
//! Exit codes: 0 on success, 1 on data or processing errors, 2 on usage
//! errors (bad flags, unreadable input paths).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use phonevote::codeswitch::{segment, segment_report, Segment};
use phonevote::corpus::Corpus;
use phonevote::ctm::{group_by_utterance, map_phone_ids, parse_ctm, parse_ctm_ids, write_ctm, PhoneTable};
use phonevote::eval::{parse_gold, score, write_gold};
use phonevote::lexicon::Lexicon;
use phonevote::sim::{simulate, simulate_codeswitch, write_switch_gold, SimSpec};
use phonevote::vote::{identify, parse_predictions, write_predictions};
use phonevote::{LanguageTag, NgramModelF64};

#[derive(Parser)]
#[command(
    name = "phonevote",
    version,
    about = "Spoken language identification by phone vote over language-tagged alignments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge per-language pronunciation lexicons into one tagged lexicon
    Lexicon {
        /// Per-language lexicon as TAG=PATH, repeatable, merge order
        #[arg(long = "lexicon", value_name = "TAG=PATH", required = true)]
        lexicons: Vec<String>,
        /// Per-language transcript corpus as TAG=PATH for frequency
        /// filtering; languages without a corpus are not filtered
        #[arg(long = "corpus", value_name = "TAG=PATH")]
        corpora: Vec<String>,
        /// Keep only the k most frequent corpus words per language
        #[arg(long = "top-k", default_value_t = 2000)]
        top_k: usize,
        /// Output path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a multilingual n-gram language model in ARPA format
    Lm {
        /// Per-language transcript corpus as TAG=PATH, repeatable
        #[arg(long = "corpus", value_name = "TAG=PATH", required = true)]
        corpora: Vec<String>,
        /// Model order
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Seed for the corpus shuffle
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Predict each utterance's language from a CTM phone alignment
    Identify {
        /// CTM file with phone symbols (or numeric ids with --phone-table)
        #[arg(long)]
        ctm: PathBuf,
        /// Phone symbol table (SYMBOL ID per line) for numeric CTM input
        #[arg(long)]
        phone_table: Option<PathBuf>,
        /// Closed language set, also the tie-break order
        #[arg(long, value_delimiter = ',', required = true)]
        languages: Vec<LanguageTag>,
        /// Output path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Detect mid-utterance language switches in a CTM phone alignment
    Codeswitch {
        #[arg(long)]
        ctm: PathBuf,
        /// Run length of foreign phones that triggers a switch
        #[arg(long, default_value_t = 3)]
        threshold: usize,
        /// Emit segments as JSON instead of report text
        #[arg(long)]
        json: bool,
        /// Output path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against gold labels
    Score {
        /// Predictions file as written by identify
        #[arg(long)]
        predictions: PathBuf,
        /// Gold labels file (utt_id<TAB>language per line)
        #[arg(long)]
        gold: PathBuf,
        /// Emit the report as JSON instead of text
        #[arg(long)]
        json: bool,
        /// Output path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic CTM alignment and gold labels from a spec file
    Simulate {
        /// TOML generation spec
        #[arg(long)]
        spec: PathBuf,
        /// CTM output path
        #[arg(long)]
        ctm: PathBuf,
        /// Gold labels output path
        #[arg(long)]
        gold: PathBuf,
        /// Generate code-switched utterances with this many blocks each
        #[arg(long)]
        blocks: Option<usize>,
        /// Switch timestamps output path (code-switch mode)
        #[arg(long)]
        switch_gold: Option<PathBuf>,
    },
    /// Run simulate, identify, and score end to end into a directory
    Pipeline {
        /// TOML generation spec
        #[arg(long)]
        spec: PathBuf,
        /// Directory for sim.ctm, sim.gold, predictions.tsv, report.txt
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write report.json
        #[arg(long)]
        json: bool,
    },
}

enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<phonevote::Error> for CliError {
    fn from(e: phonevote::Error) -> Self {
        CliError::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Reads an input file; failures are usage errors (bad path).
fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes via a temp file and rename so partial runs never leave a torn
/// output behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = file_name.to_owned();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)
        .with_context(|| format!("writing {}", tmp.display()))
        .map_err(CliError::Data)?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", tmp.display()))
        .map_err(CliError::Data)?;
    Ok(())
}

fn emit(output: Option<&PathBuf>, contents: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Splits a repeatable TAG=PATH flag value.
fn tagged_path(value: &str) -> Result<(LanguageTag, PathBuf), CliError> {
    let (tag, path) = value
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected TAG=PATH, found {value:?}")))?;
    let tag: LanguageTag = tag
        .parse()
        .map_err(|e: phonevote::Error| CliError::Usage(e.to_string()))?;
    Ok((tag, PathBuf::from(path)))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Lexicon {
            lexicons,
            corpora,
            top_k,
            output,
        } => {
            let mut corpus_by_tag: BTreeMap<LanguageTag, Vec<String>> = BTreeMap::new();
            for value in &corpora {
                let (tag, path) = tagged_path(value)?;
                let lines = read_input(&path)?.lines().map(str::to_owned).collect();
                corpus_by_tag.insert(tag, lines);
            }
            let mut parts = Vec::new();
            for value in &lexicons {
                let (tag, path) = tagged_path(value)?;
                let text = read_input(&path)?;
                let mut lexicon = Lexicon::parse(&text, &tag)?;
                if let Some(lines) = corpus_by_tag.get(&tag) {
                    lexicon = lexicon.filter_top_k(lines, top_k);
                }
                parts.push(lexicon);
            }
            let merged = Lexicon::merge(&parts)?;
            emit(output.as_ref(), &merged.to_string())
        }
        Command::Lm {
            corpora,
            order,
            seed,
            output,
        } => {
            let mut parts = Vec::new();
            for value in &corpora {
                let (tag, path) = tagged_path(value)?;
                let lines: Vec<String> =
                    read_input(&path)?.lines().map(str::to_owned).collect();
                parts.push((tag, lines));
            }
            let corpus = Corpus::build(&parts, seed);
            let model = NgramModelF64::train(&corpus, order)?;
            emit(output.as_ref(), &model.to_arpa())
        }
        Command::Identify {
            ctm,
            phone_table,
            languages,
            output,
        } => {
            let text = read_input(&ctm)?;
            let records = match phone_table {
                Some(table_path) => {
                    let table = PhoneTable::parse(&read_input(&table_path)?)?;
                    map_phone_ids(&parse_ctm_ids(&text)?, &table)?
                }
                None => parse_ctm(&text)?,
            };
            let result = identify(records, &languages);
            for (utterance, error) in &result.failures {
                eprintln!("warning: {utterance}: {error}");
            }
            emit(output.as_ref(), &write_predictions(&result))
        }
        Command::Codeswitch {
            ctm,
            threshold,
            json,
            output,
        } => {
            let records = parse_ctm(&read_input(&ctm)?)?;
            let groups = group_by_utterance(records);
            if json {
                let mut segments: BTreeMap<String, Vec<Segment>> = BTreeMap::new();
                for (utterance, group) in &groups {
                    segments.insert(utterance.clone(), segment(group, threshold)?);
                }
                let rendered = serde_json::to_string_pretty(&segments)
                    .context("serializing segments")
                    .map_err(CliError::Data)?;
                emit(output.as_ref(), &format!("{rendered}\n"))
            } else {
                let mut out = String::new();
                for (utterance, group) in &groups {
                    out.push_str(&format!("utterance\t{utterance}\n"));
                    out.push_str(&segment_report(&segment(group, threshold)?));
                }
                emit(output.as_ref(), &out)
            }
        }
        Command::Score {
            predictions,
            gold,
            json,
            output,
        } => {
            let predictions = parse_predictions(&read_input(&predictions)?)?;
            let gold = parse_gold(&read_input(&gold)?)?;
            let report = score(&predictions, &gold)?;
            let rendered = if json {
                format!("{}\n", report.to_json())
            } else {
                report.text()
            };
            emit(output.as_ref(), &rendered)
        }
        Command::Simulate {
            spec,
            ctm,
            gold,
            blocks,
            switch_gold,
        } => {
            let spec = SimSpec::from_toml_str(&read_input(&spec)?)?;
            let output = match blocks {
                Some(blocks) => simulate_codeswitch(&spec, blocks)?,
                None => simulate(&spec)?,
            };
            write_atomic(&ctm, &write_ctm(&output.ctm))?;
            write_atomic(&gold, &write_gold(&output.gold))?;
            if let Some(path) = switch_gold {
                let switches = output.switch_gold.unwrap_or_default();
                write_atomic(&path, &write_switch_gold(&switches))?;
            }
            Ok(())
        }
        Command::Pipeline { spec, out_dir, json } => {
            let spec = SimSpec::from_toml_str(&read_input(&spec)?)?;
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))
                .map_err(CliError::Data)?;
            let ctm_path = out_dir.join("sim.ctm");
            let gold_path = out_dir.join("sim.gold");
            let predictions_path = out_dir.join("predictions.tsv");
            let report_path = out_dir.join("report.txt");

            let output = simulate(&spec)?;
            write_atomic(&ctm_path, &write_ctm(&output.ctm))?;
            write_atomic(&gold_path, &write_gold(&output.gold))?;

            // chain through the files on disk, exactly as the separate
            // subcommands would
            let records = parse_ctm(&read_input(&ctm_path)?)?;
            let result = identify(records, &spec.languages);
            write_atomic(&predictions_path, &write_predictions(&result))?;

            let predictions = parse_predictions(&read_input(&predictions_path)?)?;
            let gold = parse_gold(&read_input(&gold_path)?)?;
            let report = score(&predictions, &gold)?;
            write_atomic(&report_path, &report.text())?;
            if json {
                write_atomic(&out_dir.join("report.json"), &format!("{}\n", report.to_json()))?;
            }
            print!("{}", report.text());
            Ok(())
        }
    }
}
