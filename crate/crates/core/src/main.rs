//! `gendermt` — command-line front end for the annotation pipeline:
//! filter -> annotate -> inject -> trigger -> eval, plus corpus statistics.
//!
//! Exit codes: 0 success, 1 input/configuration error, 2 internal
//! invariant violation. Every subcommand computes its full result before
//! writing, so failures leave no partial output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use gendermt::alignment_filter::{self, DecisionTree, FilterMode, Thresholds};
use gendermt::annotator::{annotate_corpus, GatingMode, Lexicons};
use gendermt::codec::{build_training_set, TrainingMode};
use gendermt::config::Config;
use gendermt::corpus_io::{
    self, annotations_to_string, read_annotations, read_parallel_corpus,
    read_parallel_corpus_tagged_tgt, read_tagged_corpus,
};
use gendermt::error::{Error, Result};
use gendermt::eval::{
    compare_systems, corpus_bleu, dependence_stats, tokenize_lines, Smoothing,
};
use gendermt::trigger::{parse_pattern_file, Decision, TriggerEngine};
use gendermt::types::{Lang, ParallelPair};

#[derive(Parser)]
#[command(
    name = "gendermt",
    version,
    about = "Gender annotation toolkit for English-Arabic MT corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Flat key=value config file (dotted keys); flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Drop poorly aligned sentence pairs (thresholds or decision tree).
    Filter(FilterArgs),
    /// Label pairs with speaker/listener gender via the Arabic rules.
    Annotate(AnnotateArgs),
    /// Build NMT training files with gender side-constraint tokens.
    Inject(InjectArgs),
    /// Route English sentences to the base or adapted model.
    Trigger(TriggerArgs),
    /// Score translations: plain corpus BLEU or baseline-vs-proposed.
    Eval(EvalArgs),
    /// Gender-dependence statistics over an annotation file.
    Stats(StatsArgs),
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
    #[arg(long)]
    align: PathBuf,
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Serialized decision tree JSON; wins over thresholds when given.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    min_score: Option<f64>,
    #[arg(long)]
    max_unaligned: Option<f64>,
    #[arg(long)]
    min_one_to_one: Option<f64>,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct AnnotateArgs {
    /// Plain English source text, one sentence per line.
    #[arg(long)]
    src: PathBuf,
    /// CoNLL-style tagged Arabic target.
    #[arg(long)]
    tgt_tags: PathBuf,
    #[arg(long)]
    align: PathBuf,
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Disable alignment gating (Arabic-only rule application).
    #[arg(long)]
    arabic_only: bool,
    /// Annotation output, JSON Lines.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    /// all: every pair, labels injected where present; labeled-only: keep
    /// only pairs with at least one label.
    #[arg(long, value_parser = ["all", "labeled-only"], default_value = "all")]
    mode: String,
    #[arg(long)]
    out_src: PathBuf,
    #[arg(long)]
    out_tgt: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct TriggerArgs {
    /// CoNLL-style tagged English source.
    #[arg(long)]
    src_tags: PathBuf,
    /// Trigger pattern file; overrides the built-in table.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Routing output, JSON Lines.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct EvalArgs {
    /// Candidate translation for plain BLEU mode.
    #[arg(long, conflicts_with_all = ["baseline", "adapted", "routes"])]
    candidate: Option<PathBuf>,
    #[arg(long)]
    reference: PathBuf,
    /// Baseline system output for comparison mode.
    #[arg(long, requires = "adapted", requires = "routes")]
    baseline: Option<PathBuf>,
    #[arg(long)]
    adapted: Option<PathBuf>,
    /// Routing file produced by `trigger`.
    #[arg(long)]
    routes: Option<PathBuf>,
    /// Emit the report as JSON instead of a text table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    config: ConfigArg,
}

/// Routing record as written by `trigger` and read back by `eval`.
#[derive(Debug, Serialize, Deserialize)]
struct RouteRecord {
    id: usize,
    route: Decision,
    matched: Vec<String>,
}

fn load_config(arg: &ConfigArg) -> Result<Config> {
    match &arg.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    }
}

fn read_text_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<String> = text.split('\n').map(str::to_string).collect();
    if lines.last().is_some_and(String::is_empty) {
        lines.pop();
    }
    Ok(lines)
}

/// Writes through a temp file in the destination directory, then renames.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path, e))?;
    fs::write(file.path(), content).map_err(|e| Error::io(path, e))?;
    file.persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn format_score(score: f64) -> String {
    // Shortest round-trip representation keeps re-reads exact.
    let mut s = format!("{score}");
    if !s.contains('.') && !s.contains('e') {
        s.push_str(".0");
    }
    s
}

fn pharaoh_line(pair: &ParallelPair) -> String {
    let parts: Vec<String> = pair
        .links
        .iter()
        .map(|(i, j)| format!("{i}-{j}"))
        .collect();
    parts.join(" ")
}

fn lexicons_from(config: &Config) -> Result<Lexicons> {
    let mut lex = Lexicons::default();
    if let Some(path) = &config.lex_doubly_transitive {
        lex.load_doubly_transitive(path)?;
    }
    if let Some(path) = &config.lex_incomplete_verbs {
        lex.load_incomplete_verbs(path)?;
    }
    if let Some(path) = &config.lex_call_particles {
        lex.load_call_particles(path)?;
    }
    Ok(lex)
}

fn cmd_filter(args: FilterArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let pairs = read_parallel_corpus(
        &args.src,
        &args.tgt,
        &args.align,
        args.scores.as_deref(),
    )?;

    let tree_path = args.tree.or(config.filter_tree);
    let mode = match tree_path {
        Some(path) => {
            let json = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            FilterMode::Tree(DecisionTree::from_json(&json)?)
        }
        None => FilterMode::Thresholds(Thresholds {
            min_score: args.min_score.unwrap_or(config.filter.min_score),
            max_unaligned: args.max_unaligned.unwrap_or(config.filter.max_unaligned),
            min_one_to_one: args.min_one_to_one.unwrap_or(config.filter.min_one_to_one),
        }),
    };

    let (kept, report) = alignment_filter::filter_corpus(pairs, &mode);

    let join = |f: &dyn Fn(&ParallelPair) -> String| {
        let mut out = String::new();
        for pair in &kept {
            out.push_str(&f(pair));
            out.push('\n');
        }
        out
    };
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    write_atomic(&args.out_dir.join("filtered.src"), &join(&|p| p.src.text()))?;
    write_atomic(&args.out_dir.join("filtered.tgt"), &join(&|p| p.tgt.text()))?;
    write_atomic(&args.out_dir.join("filtered.align"), &join(&pharaoh_line))?;
    write_atomic(
        &args.out_dir.join("filtered.scores"),
        &join(&|p| format_score(p.align_score)),
    )?;
    let report_json = serde_json::json!({
        "kept": report.kept,
        "dropped": report.dropped,
        "kept_feature_means": alignment_filter::feature_summary(&kept),
    });
    write_atomic(
        &args.out_dir.join("report.json"),
        &format!("{report_json:#}\n"),
    )?;
    println!("kept {} pairs, dropped {}", report.kept, report.dropped);
    Ok(())
}

fn cmd_annotate(args: AnnotateArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let lex = lexicons_from(&config)?;
    let pairs = read_parallel_corpus_tagged_tgt(
        &args.src,
        &args.tgt_tags,
        &args.align,
        args.scores.as_deref(),
    )?;
    let mode = if args.arabic_only {
        GatingMode::ArabicOnly
    } else {
        GatingMode::AlignmentGated
    };
    let (records, summary) = annotate_corpus(&pairs, &lex, mode)?;
    write_atomic(&args.out, &annotations_to_string(&records)?)?;
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Internal(format!("summary serialization failed: {e}")))?;
    println!("{summary_json}");
    Ok(())
}

fn cmd_inject(args: InjectArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let src_lines = read_text_lines(&args.src)?;
    let tgt_lines = read_text_lines(&args.tgt)?;
    if src_lines.len() != tgt_lines.len() {
        return Err(Error::LineCountMismatch {
            left_path: args.src.display().to_string(),
            left: src_lines.len(),
            right_path: args.tgt.display().to_string(),
            right: tgt_lines.len(),
        });
    }
    let pairs: Vec<ParallelPair> = src_lines
        .iter()
        .zip(&tgt_lines)
        .enumerate()
        .map(|(id, (s, t))| {
            ParallelPair::new(
                id,
                gendermt::types::TaggedSentence::from_plain(Lang::En, s),
                gendermt::types::TaggedSentence::from_plain(Lang::Ar, t),
                Default::default(),
                1.0,
            )
        })
        .collect::<Result<_>>()?;
    let annotations = read_annotations(&args.annotations)?;
    let mode = if args.mode == "all" {
        TrainingMode::All
    } else {
        TrainingMode::LabeledOnly
    };
    let (out_src, out_tgt) = build_training_set(&pairs, &annotations, mode, &config.tokens)?;
    let to_text = |lines: &[String]| {
        let mut text = lines.join("\n");
        if !lines.is_empty() {
            text.push('\n');
        }
        text
    };
    write_atomic(&args.out_src, &to_text(&out_src))?;
    write_atomic(&args.out_tgt, &to_text(&out_tgt))?;
    println!("wrote {} sentence pairs", out_src.len());
    Ok(())
}

fn cmd_trigger(args: TriggerArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let pattern_path = args.patterns.or(config.trigger_patterns);
    let engine = match pattern_path {
        Some(path) => TriggerEngine::new(parse_pattern_file(path)?),
        None => TriggerEngine::default(),
    };
    let sentences = read_tagged_corpus(&args.src_tags, Lang::En)?;
    let (routes, counts) = engine.route_corpus(&sentences)?;
    let mut out = String::new();
    for (id, route) in routes.iter().enumerate() {
        let record = RouteRecord {
            id,
            route: route.decision,
            matched: route.matched.clone(),
        };
        out.push_str(
            &serde_json::to_string(&record)
                .map_err(|e| Error::Internal(format!("route serialization failed: {e}")))?,
        );
        out.push('\n');
    }
    write_atomic(&args.out, &out)?;
    println!(
        "{}",
        serde_json::json!({"base": counts.base, "adapted": counts.adapted})
    );
    Ok(())
}

fn read_tokens(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(tokenize_lines(&read_text_lines(path)?))
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    load_config(&args.config)?;
    let references = read_tokens(&args.reference)?;
    match (&args.candidate, &args.baseline, &args.adapted, &args.routes) {
        (Some(candidate), None, None, None) => {
            let candidates = read_tokens(candidate)?;
            let report = corpus_bleu(&candidates, &references, Smoothing::None)?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report)
                        .map_err(|e| Error::Internal(e.to_string()))?
                );
            } else {
                println!("BLEU {}", report.display_score());
            }
        }
        (None, Some(baseline), Some(adapted), Some(routes)) => {
            let baseline = read_tokens(baseline)?;
            let adapted = read_tokens(adapted)?;
            let route_records: Vec<RouteRecord> = read_text_lines(routes)?
                .iter()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(idx, line)| {
                    serde_json::from_str(line).map_err(|e| {
                        Error::parse(args.routes.as_ref().unwrap(), idx + 1, e.to_string())
                    })
                })
                .collect::<Result<_>>()?;
            for (idx, record) in route_records.iter().enumerate() {
                if record.id != idx {
                    return Err(Error::Invalid(format!(
                        "route ids must be consecutive from 0; found {} at line {}",
                        record.id,
                        idx + 1
                    )));
                }
            }
            let decisions: Vec<Decision> = route_records.iter().map(|r| r.route).collect();
            let report = compare_systems(&baseline, &adapted, &references, &decisions)?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report)
                        .map_err(|e| Error::Internal(e.to_string()))?
                );
            } else {
                print!("{report}");
            }
        }
        _ => {
            return Err(Error::Invalid(
                "eval needs either --candidate, or all of --baseline/--adapted/--routes"
                    .to_string(),
            ))
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    load_config(&args.config)?;
    let records = read_annotations(&args.annotations)?;
    let sets: Vec<_> = records.iter().map(corpus_io::AnnotationRecord::label_set).collect();
    let stats = dependence_stats(&sets)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&stats).map_err(|e| Error::Internal(e.to_string()))?
        );
    } else {
        print!("{stats}");
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Filter(args) => cmd_filter(args),
        Command::Annotate(args) => cmd_annotate(args),
        Command::Inject(args) => cmd_inject(args),
        Command::Trigger(args) => cmd_trigger(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
