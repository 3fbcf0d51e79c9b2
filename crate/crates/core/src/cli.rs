//! `ctcfuse` command line: one subcommand per pipeline stage.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 internal invariant violation (for example an empty decoding beam).

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::warn;
use serde::Serialize;

use crate::alphabet::Alphabet;
use crate::decoder::{self, DecodeError, DecoderConfig};
use crate::emissions::{load_emissions, EmissionMatrix};
use crate::eval::{self, WerReportWithRate};
use crate::lm::{self, ArpaOptions, LmError, PruneThresholds, MAX_ORDER};
use crate::manifest;
use crate::segmenter::{self, DEFAULT_MAX_LEN};
use crate::textnorm::{
    self, BracketPattern, NormalizationConfig, NormalizedTranscript, ReplacementTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Data = 2,
    Internal = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Usage,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Data,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::data(format!("{}: {e}", path.display()))
    }
}

impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        let status = match &e {
            DecodeError::EmptyBeam { .. } => ExitStatus::Internal,
            DecodeError::Item { source, .. }
                if matches!(**source, DecodeError::EmptyBeam { .. }) =>
            {
                ExitStatus::Internal
            }
            DecodeError::InvalidConfig(_) => ExitStatus::Usage,
            _ => ExitStatus::Data,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ctcfuse",
    version,
    about = "CTC decoding with n-gram LM fusion, LM training, normalization, segmentation and WER"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize transcripts line by line (lowercase, no punctuation or non-speech markers).
    Normalize(NormalizeArgs),
    /// Slice utterances at pauses so no segment exceeds --max-len seconds.
    Segment(SegmentArgs),
    /// Train a pruned backoff n-gram LM and write it as ARPA.
    LmTrain(LmTrainArgs),
    /// Decode emission matrices with greedy CTC or LM-fused beam search.
    Decode(DecodeArgs),
    /// Score hypotheses against references and report WER.
    Eval(EvalArgs),
    /// Print hours, word count and average record length of a segment manifest.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    /// Raw transcripts, one per line.
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Two-column TSV of literal replacements applied first, in file order.
    #[arg(long)]
    replacements: Option<PathBuf>,
    /// Do not lowercase.
    #[arg(long)]
    keep_case: bool,
    /// Keep hyphens inside words instead of splitting on them.
    #[arg(long)]
    keep_hyphens: bool,
    /// Non-speech marker pattern such as `[...]`; repeatable.
    #[arg(long = "nonspeech", default_value = "[...]")]
    nonspeech: Vec<String>,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// JSON Lines: {"id", "duration", "pauses": [...]}.
    #[arg(long)]
    manifest: PathBuf,
    /// Maximum segment length in seconds.
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    max_len: f64,
    /// Segment manifest (JSON Lines) to write.
    #[arg(long)]
    output: PathBuf,
    /// JSON report of discarded utterance ids.
    #[arg(long)]
    discards: PathBuf,
}

#[derive(Debug, Args)]
struct LmTrainArgs {
    /// Normalized text, one sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Drop unigrams seen fewer times than this.
    #[arg(long, default_value_t = 10)]
    prune_unigram: u64,
    /// Drop n-grams of order >= 2 seen fewer times than this.
    #[arg(long, default_value_t = 100)]
    prune_higher: u64,
    #[arg(long)]
    arpa_out: PathBuf,
    /// Permit orders above 4.
    #[arg(long)]
    allow_high_order: bool,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Directory of emission files; every regular file is decoded, in name order.
    #[arg(long)]
    emissions_dir: PathBuf,
    /// Alphabet JSON: {"tokens": [...], "blank_index": n, "delimiter_index": m}.
    #[arg(long)]
    alphabet: PathBuf,
    /// ARPA language model for shallow fusion.
    #[arg(long)]
    arpa: Option<PathBuf>,
    /// Accept an ARPA model above order 4.
    #[arg(long)]
    allow_high_order: bool,
    #[arg(long, default_value_t = 100)]
    beam_width: usize,
    /// LM weight [default: 0.5]
    #[arg(long)]
    alpha: Option<f64>,
    /// Word insertion bonus [default: 1.5]
    #[arg(long)]
    beta: Option<f64>,
    /// Skip tokens whose per-frame natural-log probability is below this.
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    token_min_logp: f64,
    /// Best-path decoding; LM options are ignored.
    #[arg(long)]
    greedy: bool,
    /// Number of ranked hypotheses per utterance.
    #[arg(long, default_value_t = 1)]
    nbest: usize,
    /// Worker threads; 0 uses all cores. Output order never depends on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// JSON Lines output.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Reference JSON Lines {"id", "text"}; comma-separated for several datasets.
    #[arg(long = "ref", value_delimiter = ',', required = true)]
    references: Vec<PathBuf>,
    /// Hypothesis JSON Lines, paired with --ref in order.
    #[arg(long = "hyp", value_delimiter = ',', required = true)]
    hypotheses: Vec<PathBuf>,
    /// JSON report with per-utterance and aggregate counts.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Segment manifest (JSON Lines) as written by `segment`.
    #[arg(long)]
    manifest: PathBuf,
    /// JSON Lines {"id", "text"} keyed by segment id.
    #[arg(long)]
    transcripts: PathBuf,
    /// Print JSON instead of a text table.
    #[arg(long)]
    json: bool,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitStatus::Success as i32
                }
                _ => ExitStatus::Usage as i32,
            };
        }
    };
    let result = match cli.command {
        Command::Normalize(a) => cmd_normalize(a),
        Command::Segment(a) => cmd_segment(a),
        Command::LmTrain(a) => cmd_lm_train(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitStatus::Success as i32,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.status as i32
        }
    }
}

fn open_read(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_json_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

fn cmd_normalize(a: NormalizeArgs) -> CliResult {
    let mut config = NormalizationConfig {
        lowercase: !a.keep_case,
        keep_hyphens: a.keep_hyphens,
        nonspeech_patterns: a
            .nonspeech
            .iter()
            .map(|p| BracketPattern::parse(p))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::usage(e.to_string()))?,
        ..Default::default()
    };
    if let Some(path) = &a.replacements {
        config.replacements = ReplacementTable::load(path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    }
    let input = open_read(&a.input)?;
    let mut out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    let (mut lines, mut words_in, mut words_out) = (0usize, 0usize, 0usize);
    for line in input.lines() {
        let line = line.map_err(|e| CliError::io(&a.input, e))?;
        let t = textnorm::normalize(&line, &config);
        lines += 1;
        words_in += line.split_whitespace().count();
        words_out += t.len();
        writeln!(out, "{}", textnorm::render(&t)).map_err(|e| CliError::data(e.to_string()))?;
    }
    out.flush().map_err(|e| CliError::data(e.to_string()))?;
    eprintln!(
        "normalized {lines} lines: {words_in} tokens in, {words_out} words out, {} removed",
        words_in.saturating_sub(words_out)
    );
    Ok(())
}

#[derive(Serialize)]
struct DiscardReport<'a> {
    max_len: f64,
    utterances: usize,
    segments: usize,
    discarded: &'a [String],
}

fn cmd_segment(a: SegmentArgs) -> CliResult {
    if a.max_len.is_nan() || a.max_len <= 0.0 {
        return Err(CliError::usage("--max-len must be positive"));
    }
    let utterances = segmenter::read_utterances(open_read(&a.manifest)?)
        .map_err(|e| CliError::data(format!("{}: {e}", a.manifest.display())))?;
    let sliced = segmenter::slice_corpus(&utterances, a.max_len)
        .map_err(|e| CliError::data(e.to_string()))?;
    let mut out = create(&a.output)?;
    segmenter::write_segments(&mut out, &sliced.segments)
        .and_then(|_| out.flush().map_err(Into::into))
        .map_err(|e| CliError::data(e.to_string()))?;
    let report = DiscardReport {
        max_len: a.max_len,
        utterances: utterances.len(),
        segments: sliced.segments.len(),
        discarded: &sliced.discarded_ids,
    };
    let mut d = create(&a.discards)?;
    serde_json::to_writer_pretty(&mut d, &report).map_err(|e| CliError::data(e.to_string()))?;
    writeln!(d)
        .and_then(|_| d.flush())
        .map_err(|e| CliError::io(&a.discards, e))?;
    eprintln!(
        "{} utterances -> {} segments, {} discarded",
        utterances.len(),
        sliced.segments.len(),
        sliced.discarded_ids.len()
    );
    Ok(())
}

fn cmd_lm_train(a: LmTrainArgs) -> CliResult {
    let limit = if a.allow_high_order {
        a.order.max(MAX_ORDER)
    } else {
        MAX_ORDER
    };
    if a.order == 0 || a.order > limit {
        return Err(CliError::usage(format!(
            "--order {} outside 1..={MAX_ORDER}; pass --allow-high-order to exceed the cap",
            a.order
        )));
    }
    let corpus: Vec<NormalizedTranscript> = open_read(&a.corpus)?
        .lines()
        .map(|l| l.map(|l| NormalizedTranscript::from_normalized_text(&l)))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::io(&a.corpus, e))?;
    if corpus.iter().all(NormalizedTranscript::is_empty) {
        return Err(CliError::data(format!(
            "{}: corpus has no words",
            a.corpus.display()
        )));
    }
    let counts = lm::count_ngrams_with_limit(&corpus, a.order, limit)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let pruned = lm::prune(
        &counts,
        PruneThresholds::new(a.prune_unigram, a.prune_higher),
    );
    let model = lm::estimate(&pruned).map_err(|e| match e {
        LmError::DegenerateCounts => CliError::data("no n-grams survived pruning"),
        other => CliError::data(other.to_string()),
    })?;
    lm::write_arpa(&model, &a.arpa_out).map_err(|e| CliError::data(e.to_string()))?;
    let words = model
        .vocab()
        .iter()
        .filter(|(id, _)| *id > lm::Vocab::EOS_ID)
        .count();
    let counts: Vec<String> = (1..=model.order())
        .map(|n| format!("{n}-grams={}", model.num_entries(n)))
        .collect();
    eprintln!(
        "{} sentences; vocabulary {words} words ({} entries with markers); order {}; {}",
        corpus.len(),
        model.vocab_size(),
        model.order(),
        counts.join(" ")
    );
    Ok(())
}

#[derive(Serialize)]
struct NBestEntry<'a> {
    text: &'a str,
    score: f64,
    acoustic: f64,
    lm_log10: f64,
    words: usize,
}

#[derive(Serialize)]
struct DecodeLine<'a> {
    id: &'a str,
    text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    nbest: Vec<NBestEntry<'a>>,
}

fn list_emission_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn cmd_decode(a: DecodeArgs) -> CliResult {
    let alphabet = Alphabet::load(&a.alphabet)
        .map_err(|e| CliError::data(format!("{}: {e}", a.alphabet.display())))?;
    let files = list_emission_files(&a.emissions_dir)?;
    let ids: Vec<String> = files
        .iter()
        .map(|p| {
            p.file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    let emissions: Vec<EmissionMatrix> = files
        .iter()
        .map(|p| {
            load_emissions(p, &alphabet)
                .map_err(|e| CliError::data(format!("{}: {e}", p.display())))
        })
        .collect::<Result<_, _>>()?;

    let mut out = create(&a.output)?;
    let write_err = |e: std::io::Error| CliError::io(&a.output, e);

    if a.greedy {
        if a.arpa.is_some() || a.alpha.is_some() || a.beta.is_some() {
            warn!("--greedy ignores --arpa, --alpha and --beta");
        }
        for (id, e) in ids.iter().zip(&emissions) {
            let t = decoder::greedy_decode(e, &alphabet);
            let line = DecodeLine {
                id,
                text: t.to_string(),
                score: None,
                nbest: Vec::new(),
            };
            write_json_line(&mut out, &line).map_err(write_err)?;
        }
        return out.flush().map_err(write_err);
    }

    let model = match &a.arpa {
        Some(path) => Some(
            lm::read_arpa(
                path,
                ArpaOptions {
                    allow_high_order: a.allow_high_order,
                },
            )
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let defaults = DecoderConfig::default();
    let cfg = DecoderConfig {
        beam_width: a.beam_width,
        alpha: a.alpha.unwrap_or(defaults.alpha),
        beta: a.beta.unwrap_or(defaults.beta),
        token_min_logp: a.token_min_logp,
        nbest: a.nbest,
        lm: model.as_ref(),
    };
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError {
            status: ExitStatus::Internal,
            message: e.to_string(),
        })?;
    let results = pool.install(|| decoder::decode_batch(&emissions, &alphabet, &cfg))?;
    for (id, r) in ids.iter().zip(&results) {
        let line = DecodeLine {
            id,
            text: r.transcript.to_string(),
            score: Some(r.score),
            nbest: r
                .nbest
                .iter()
                .map(|h| NBestEntry {
                    text: h.text.trim(),
                    score: h.fused_score,
                    acoustic: h.acoustic_logp(),
                    lm_log10: h.lm_log10,
                    words: h.completed_words,
                })
                .collect(),
        };
        write_json_line(&mut out, &line).map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}

fn read_normalized(
    path: &Path,
    config: &NormalizationConfig,
) -> Result<Vec<(String, NormalizedTranscript)>, CliError> {
    let records = eval::read_records(open_read(path)?)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    Ok(records
        .into_iter()
        .map(|r| (r.id, textnorm::normalize(&r.text, config)))
        .collect())
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    if a.references.len() != a.hypotheses.len() {
        return Err(CliError::usage(format!(
            "{} reference files but {} hypothesis files",
            a.references.len(),
            a.hypotheses.len()
        )));
    }
    let config = NormalizationConfig::default();
    let mut datasets = Vec::new();
    let mut totals = Vec::new();
    for (r, h) in a.references.iter().zip(&a.hypotheses) {
        let refs = read_normalized(r, &config)?;
        let hyps = read_normalized(h, &config)?;
        let ev = eval::evaluate_corpus(&refs, &hyps)
            .map_err(|e| CliError::data(format!("{} vs {}: {e}", r.display(), h.display())))?;
        if a.references.len() > 1 {
            println!("{}\tWER {}", r.display(), ev.aggregate.percent());
        }
        totals.push(ev.aggregate);
        let mut json = ev.to_json();
        json["reference"] = serde_json::Value::String(r.display().to_string());
        json["hypothesis"] = serde_json::Value::String(h.display().to_string());
        datasets.push(json);
    }
    let total = eval::aggregate(&totals).map_err(|e| CliError::data(e.to_string()))?;
    println!("WER {}", total.percent());
    let report = serde_json::json!({
        "datasets": datasets,
        "aggregate": WerReportWithRate(total),
    });
    let mut out = create(&a.report)?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::data(e.to_string()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(&a.report, e))
}

fn cmd_stats(a: StatsArgs) -> CliResult {
    let segments = segmenter::read_segments(open_read(&a.manifest)?)
        .map_err(|e| CliError::data(format!("{}: {e}", a.manifest.display())))?;
    let mut by_id: HashMap<String, NormalizedTranscript> = HashMap::new();
    for (id, t) in read_normalized(&a.transcripts, &NormalizationConfig::default())? {
        if by_id.insert(id.clone(), t).is_some() {
            return Err(CliError::data(format!("duplicate transcript id {id:?}")));
        }
    }
    let mut transcripts = Vec::with_capacity(segments.len());
    for s in &segments {
        let t = by_id
            .remove(&s.id)
            .ok_or_else(|| CliError::data(format!("no transcript for segment {:?}", s.id)))?;
        transcripts.push(t);
    }
    if let Some(extra) = by_id.keys().min() {
        return Err(CliError::data(format!(
            "transcript {extra:?} has no segment"
        )));
    }
    let stats =
        manifest::stats(&segments, &transcripts).map_err(|e| CliError::data(e.to_string()))?;
    if a.json {
        let v: BTreeMap<&str, serde_json::Value> = [
            ("hours", serde_json::json!(stats.total_hours)),
            ("words", serde_json::json!(stats.word_count)),
            ("avg_len_s", serde_json::json!(stats.avg_len)),
            ("segments", serde_json::json!(stats.segment_count)),
        ]
        .into_iter()
        .collect();
        println!("{}", serde_json::to_string(&v).expect("stats serialize"));
    } else {
        let name = a
            .manifest
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        println!("dataset\thours\twords\tavg length");
        println!("{}", stats.table_row(&name));
    }
    Ok(())
}
