mod record;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use natvar::baseline::{predict, CandidateSet};
use natvar::corpus_io::{
    export_manifest, parse, read_predictions, serialize, write_origin_sidecar, write_predictions,
    EvalManifest, RawFile,
};
use natvar::metrics::{compare, evaluate, EntityScope, EvalReport};
use natvar::patterns::{list_patterns, PhraseBank};
use natvar::planner::{ablate, execute, plan, sample_review, PlanConfig, MAX_SEED, PRESETS};
use natvar::stats::corpus_stats;
use natvar::{DialogCorpus, Error, PatternEngine, PatternId, SourceFormat};

use record::{with_suffix, Outputs, RunRecord};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SHORTFALL: u8 = 3;

/// Inject naturalistic conversation patterns into goal-oriented dialog test
/// sets and evaluate responses on the original and updated versions.
#[derive(Debug, Parser)]
#[command(name = "natvar", version)]
struct Cli {
    /// Worker threads (0 = all cores). Outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Babi,
    Smd,
}

impl From<Format> for SourceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Babi => SourceFormat::Babi,
            Format::Smd => SourceFormat::Smd,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Scope {
    Global,
    Dialog,
}

impl From<Scope> for EntityScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Global => EntityScope::Global,
            Scope::Dialog => EntityScope::Dialog,
        }
    }
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus format.
    #[arg(long, value_enum)]
    format: Format,
    /// Corpus file.
    #[arg(long)]
    input: PathBuf,
    /// Origin sidecar marking injected turns (default: `<input>.origin` if present).
    #[arg(long)]
    origins: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("plan").required(true).args(["config", "preset"])))]
struct PlanArgs {
    /// Plan configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in targets.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    /// Overrides the configured seed.
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
    seed: Option<u64>,
    /// Cap targets at eligibility instead of failing.
    #[arg(long)]
    allow_shortfall: bool,
    /// Replacement phrase bank (TOML).
    #[arg(long)]
    phrase_bank: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan and apply injections; writes the updated corpus with its origin
    /// sidecar, evaluation manifest, plan dump and run record.
    Inject {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        plan: PlanArgs,
        /// Updated corpus path; companions get `.origin`, `.manifest.tsv`,
        /// `.plan.tsv` and `.run.json` appended.
        #[arg(long)]
        output: PathBuf,
    },
    /// One updated corpus per pattern, each holding only that pattern.
    Ablate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        plan: PlanArgs,
        /// Pattern name or NCF code (repeatable).
        #[arg(long = "pattern", required_unless_present = "all")]
        patterns: Vec<String>,
        /// Every pattern with a nonzero target.
        #[arg(long, conflicts_with = "patterns")]
        all: bool,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Per-pattern counts, overlap histogram, utterance means, lexicon size.
    Stats {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Export the evaluation manifest (original agent responses).
    Manifest {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against a manifest.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        origins: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "global")]
        entity_scope: Scope,
        /// Column label used in comparisons.
        #[arg(long)]
        label: Option<String>,
        /// Text report path (stdout when absent).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Report of the original run; the comparison table goes to stdout.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Comparison table of two reports (text or JSON).
    Compare {
        original: PathBuf,
        updated: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Random sample of updated dialogs for manual review.
    Review {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(..=MAX_SEED))]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// TF-IDF retrieval predictions for a manifest.
    Baseline {
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        origins: Option<PathBuf>,
        /// Candidate file, one response per line.
        #[arg(long, required_unless_present = "candidates_from")]
        candidates: Option<PathBuf>,
        /// Use every agent response of this corpus (same format) as candidates.
        #[arg(long, conflicts_with = "candidates")]
        candidates_from: Option<PathBuf>,
        /// Manifest to predict (default: exported from the corpus).
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// The pattern catalog.
    Patterns {
        /// Only patterns with a recipe for this format.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Shortfall(_)) => EXIT_SHORTFALL,
        Some(
            Error::UnknownPattern(_)
            | Error::NotApplicable { .. }
            | Error::BadFraction(_)
            | Error::Config(_)
            | Error::PhraseBank(_),
        ) => EXIT_USAGE,
        _ if err.downcast_ref::<UsageError>().is_some() => EXIT_USAGE,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
    {
        log::warn!("thread pool: {e}");
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Inject {
            corpus,
            plan,
            output,
        } => cmd_inject(&corpus, &plan, &output),
        Command::Ablate {
            corpus,
            plan,
            patterns,
            all,
            output_dir,
        } => cmd_ablate(&corpus, &plan, &patterns, all, &output_dir),
        Command::Stats {
            corpus,
            json,
            output,
        } => cmd_stats(&corpus, json, output.as_deref()),
        Command::Manifest { corpus, output } => cmd_manifest(&corpus, output.as_deref()),
        Command::Eval {
            predictions,
            manifest,
            corpus,
            format,
            origins,
            entity_scope,
            label,
            output,
            json,
            compare,
        } => {
            let input = CorpusArgs {
                format,
                input: corpus,
                origins,
            };
            cmd_eval(EvalArgs {
                predictions: &predictions,
                manifest: &manifest,
                corpus: &input,
                scope: entity_scope.into(),
                label,
                output: output.as_deref(),
                json: json.as_deref(),
                compare: compare.as_deref(),
            })
        }
        Command::Compare {
            original,
            updated,
            output,
        } => cmd_compare(&original, &updated, output.as_deref()),
        Command::Review {
            corpus,
            fraction,
            seed,
            output,
        } => cmd_review(&corpus, fraction, seed, output.as_deref()),
        Command::Baseline {
            format,
            corpus,
            origins,
            candidates,
            candidates_from,
            manifest,
            out,
        } => {
            let input = CorpusArgs {
                format,
                input: corpus,
                origins,
            };
            cmd_baseline(
                &input,
                candidates.as_deref(),
                candidates_from.as_deref(),
                manifest.as_deref(),
                &out,
            )
        }
        Command::Patterns { format } => cmd_patterns(format.map(Into::into)),
    }
}

fn read(path: &Path, record: &mut RunRecord) -> Result<RawFile> {
    let raw = RawFile::read(path).with_context(|| format!("reading {}", path.display()))?;
    record.input(path, &raw.bytes);
    Ok(raw)
}

fn load_corpus(args: &CorpusArgs, record: &mut RunRecord) -> Result<DialogCorpus> {
    let raw = read(&args.input, record)?;
    let sidecar = match &args.origins {
        Some(p) => Some(p.clone()),
        None => Some(with_suffix(&args.input, ".origin")).filter(|p| p.exists()),
    };
    let origins = match &sidecar {
        Some(p) => {
            let bytes = read(p, record)?;
            Some(String::from_utf8(bytes.bytes).map_err(|e| anyhow!("{}: {e}", p.display()))?)
        }
        None => None,
    };
    let corpus = parse(args.format.into(), &raw, origins.as_deref())
        .with_context(|| format!("parsing {}", args.input.display()))?;
    record.set("format", SourceFormat::from(args.format).as_str());
    Ok(corpus)
}

fn load_plan(
    args: &PlanArgs,
    format: SourceFormat,
    record: &mut RunRecord,
) -> Result<(PlanConfig, PatternEngine)> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let raw = read(path, record)?;
            let text =
                String::from_utf8(raw.bytes).map_err(|e| anyhow!("{}: {e}", path.display()))?;
            PlanConfig::from_toml(&text, format)?
        }
        (None, Some(name)) => {
            let cfg = PlanConfig::preset(name)?;
            if !name.starts_with(format.as_str()) {
                return Err(
                    UsageError(format!("preset {name} does not match --format {format}")).into(),
                );
            }
            record.set("preset", name.as_str());
            cfg
        }
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.allow_shortfall |= args.allow_shortfall;
    let engine = match &args.phrase_bank {
        Some(path) => {
            let raw = read(path, record)?;
            let text =
                String::from_utf8(raw.bytes).map_err(|e| anyhow!("{}: {e}", path.display()))?;
            PatternEngine::new(PhraseBank::from_toml(&text)?)?
        }
        None => PatternEngine::default(),
    };
    record.seed = Some(cfg.seed);
    record.set("plan_config", cfg.to_toml());
    Ok((cfg, engine))
}

/// Adds the updated corpus and its companions to `out`.
fn corpus_outputs(out: &mut Outputs, path: &Path, corpus: &DialogCorpus, plan_tsv: &str) {
    out.add(path, serialize(corpus));
    out.add(with_suffix(path, ".origin"), write_origin_sidecar(corpus));
    out.add(
        with_suffix(path, ".manifest.tsv"),
        export_manifest(corpus).to_tsv(),
    );
    out.add(with_suffix(path, ".plan.tsv"), plan_tsv.to_string());
}

fn cmd_inject(args: &CorpusArgs, plan_args: &PlanArgs, output: &Path) -> Result<()> {
    let mut record = RunRecord::new("inject", None);
    let corpus = load_corpus(args, &mut record)?;
    let (cfg, engine) = load_plan(plan_args, corpus.source_format, &mut record)?;
    let p = plan(&corpus, &cfg, &engine)?;
    for s in &p.shortfalls {
        log::warn!("shortfall: {s}");
    }
    let updated = execute(&corpus, &p, &engine, cfg.seed)?;
    let mut out = Outputs::default();
    corpus_outputs(&mut out, output, &updated, &p.to_tsv());
    out.write(record, &with_suffix(output, ".run.json"))?;
    log::info!(
        "{} assignments over {} dialogs written to {}",
        p.assignments.len(),
        updated.dialogs.iter().filter(|d| d.is_updated()).count(),
        output.display()
    );
    Ok(())
}

fn recipe_list(engine: &PatternEngine, format: SourceFormat) -> String {
    engine
        .recipes_for(format)
        .map(|r| r.id.name())
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_ablate(
    args: &CorpusArgs,
    plan_args: &PlanArgs,
    names: &[String],
    all: bool,
    dir: &Path,
) -> Result<()> {
    let mut record = RunRecord::new("ablate", None);
    let corpus = load_corpus(args, &mut record)?;
    let format = corpus.source_format;
    let (cfg, engine) = load_plan(plan_args, format, &mut record)?;
    let ids: Vec<PatternId> = if all {
        cfg.pattern_order
            .iter()
            .copied()
            .filter(|id| cfg.targets.get(id).copied().unwrap_or(0) > 0)
            .filter(|id| engine.recipe(*id).is_some_and(|r| r.applies_to(format)))
            .collect()
    } else {
        names
            .iter()
            .map(|n| {
                engine.recipe_by_name(n).map(|r| r.id).map_err(|_| {
                    UsageError(format!(
                        "unknown pattern `{n}`; patterns with recipes for {format}: {}",
                        recipe_list(&engine, format)
                    ))
                })
            })
            .collect::<std::result::Result<_, _>>()?
    };
    let ext = match format {
        SourceFormat::Smd => "json",
        SourceFormat::Babi => "txt",
    };
    let mut out = Outputs::default();
    for id in &ids {
        let (p, updated) = ablate(&corpus, &cfg, *id, &engine)?;
        for s in &p.shortfalls {
            log::warn!("shortfall: {s}");
        }
        let path = dir.join(format!("{}.{ext}", id.name()));
        corpus_outputs(&mut out, &path, &updated, &p.to_tsv());
    }
    record.set("patterns", ids.iter().map(|p| p.name()).collect::<Vec<_>>());
    out.write(record, &dir.join("ablate.run.json"))?;
    Ok(())
}

/// Writes to `output` with a run record, or to stdout.
fn emit(text: String, output: Option<&Path>, record: RunRecord) -> Result<()> {
    match output {
        Some(path) => {
            let mut out = Outputs::default();
            out.add(path, text);
            out.write(record, &with_suffix(path, ".run.json"))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_stats(args: &CorpusArgs, json: bool, output: Option<&Path>) -> Result<()> {
    let mut record = RunRecord::new("stats", None);
    let corpus = load_corpus(args, &mut record)?;
    let stats = corpus_stats(&corpus, &PatternEngine::default());
    let text = if json {
        let mut s = serde_json::to_string_pretty(&stats)?;
        s.push('\n');
        s
    } else {
        stats.to_text()
    };
    record.set("json", json);
    emit(text, output, record)
}

fn cmd_manifest(args: &CorpusArgs, output: Option<&Path>) -> Result<()> {
    let mut record = RunRecord::new("manifest", None);
    let corpus = load_corpus(args, &mut record)?;
    emit(export_manifest(&corpus).to_tsv(), output, record)
}

struct EvalArgs<'a> {
    predictions: &'a Path,
    manifest: &'a Path,
    corpus: &'a CorpusArgs,
    scope: EntityScope,
    label: Option<String>,
    output: Option<&'a Path>,
    json: Option<&'a Path>,
    compare: Option<&'a Path>,
}

fn load_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EvalReport::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_eval(a: EvalArgs<'_>) -> Result<()> {
    let mut record = RunRecord::new("eval", None);
    let corpus = load_corpus(a.corpus, &mut record)?;
    let manifest = EvalManifest::from_tsv(&read(a.manifest, &mut record)?.bytes)?;
    let preds =
        read_predictions(&read(a.predictions, &mut record)?, &manifest).with_context(|| {
            format!(
                "aligning {} to {}",
                a.predictions.display(),
                a.manifest.display()
            )
        })?;
    let mut report = evaluate(&preds, &manifest, &corpus, a.scope)?;
    report.label = a.label;
    record.set("entity_scope", a.scope.as_str());
    let text = report.to_text();
    let table = match a.compare {
        Some(path) => {
            let original = load_report(path)?;
            record.input(path, fs::read(path)?.as_slice());
            Some(compare(&original, &report)?.render())
        }
        None => None,
    };
    let mut stdout = std::io::stdout().lock();
    if a.output.is_none() {
        stdout.write_all(text.as_bytes())?;
        if table.is_some() {
            stdout.write_all(b"\n")?;
        }
    }
    if let Some(table) = &table {
        stdout.write_all(table.as_bytes())?;
    }
    let Some(record_at) = a.output.or(a.json) else {
        return Ok(());
    };
    let mut out = Outputs::default();
    if let Some(p) = a.output {
        out.add(p, text);
    }
    if let Some(p) = a.json {
        out.add(p, report.to_json());
    }
    out.write(record, &with_suffix(record_at, ".run.json"))
}

fn cmd_compare(original: &Path, updated: &Path, output: Option<&Path>) -> Result<()> {
    let mut record = RunRecord::new("compare", None);
    let a = load_report(original)?;
    let b = load_report(updated)?;
    record.input(original, &fs::read(original)?);
    record.input(updated, &fs::read(updated)?);
    emit(compare(&a, &b)?.render(), output, record)
}

fn cmd_review(args: &CorpusArgs, fraction: f64, seed: u64, output: Option<&Path>) -> Result<()> {
    let mut record = RunRecord::new("review", Some(seed));
    let corpus = load_corpus(args, &mut record)?;
    let sheet = sample_review(&corpus, fraction, seed)?;
    record.set("fraction", fraction);
    emit(sheet.to_markdown(&corpus), output, record)
}

fn cmd_baseline(
    args: &CorpusArgs,
    candidates: Option<&Path>,
    candidates_from: Option<&Path>,
    manifest: Option<&Path>,
    out_path: &Path,
) -> Result<()> {
    let mut record = RunRecord::new("baseline", None);
    let corpus = load_corpus(args, &mut record)?;
    let set = match (candidates, candidates_from) {
        (Some(p), _) => {
            let raw = read(p, &mut record)?;
            CandidateSet::parse(
                &String::from_utf8(raw.bytes).map_err(|e| anyhow!("{}: {e}", p.display()))?,
            )?
        }
        (None, Some(p)) => {
            let other = load_corpus(
                &CorpusArgs {
                    format: args.format,
                    input: p.to_path_buf(),
                    origins: None,
                },
                &mut record,
            )?;
            CandidateSet::from_corpus(&other)?
        }
        (None, None) => bail!(UsageError(
            "--candidates or --candidates-from is required".into()
        )),
    };
    let manifest = match manifest {
        Some(p) => EvalManifest::from_tsv(&read(p, &mut record)?.bytes)?,
        None => export_manifest(&corpus),
    };
    let preds = predict(&corpus, &manifest, &set)?;
    record.set("candidates", set.len());
    let mut out = Outputs::default();
    out.add(out_path, write_predictions(&preds));
    out.write(record, &with_suffix(out_path, ".run.json"))
}

fn cmd_patterns(format: Option<SourceFormat>) -> Result<()> {
    let engine = PatternEngine::default();
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "{:<8} {:<40} {:<5} datasets",
        "code", "name", "class"
    )?;
    for entry in list_patterns() {
        let id = PatternId::from_name(entry.name).expect("catalog names resolve");
        let datasets: Vec<&str> = engine
            .recipe(id)
            .map(|r| r.datasets.iter().map(|f| f.as_str()).collect())
            .unwrap_or_default();
        if let Some(f) = format {
            if !datasets.contains(&f.as_str()) {
                continue;
            }
        }
        let shown = if datasets.is_empty() {
            "-".to_string()
        } else {
            datasets.join(",")
        };
        writeln!(
            stdout,
            "{:<8} {:<40} {:<5} {shown}",
            entry.ncf_code,
            entry.name,
            format!("{:?}", entry.class)
        )?;
    }
    Ok(())
}
