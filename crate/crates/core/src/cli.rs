//! `medaug` command line. Every subcommand is non-interactive; logs go to stderr as
//! `key=value` lines, machine-readable results go to files or stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::augment::{
    build_provider, read_records, run_augmentation, sample_units, write_records, AugmentConfig,
    PromptTemplate, ProviderKind, Verdict,
};
use crate::baseline::{build_gazetteer, generate_synthetic, tag, RuleSet, SyntheticSpec};
use crate::corpus::{
    load_corpus, load_corpus_unchecked, load_predictions, read_texts, serialize_annotations,
    validate_corpus, write_corpus, AnnotatedDocument, CorpusError, EventLabel, MentionSpan, Split,
};
use crate::evalkit::{
    diff_reports, score_with, MatchPolicy, MetricsReport, ScoreOptions, TaskMode,
};
use crate::fsutil::write_atomic;
use crate::textproc::{export_conll, LabelScheme};

/// Process exit status. Each error kind maps to exactly one code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// The inputs were read but contain invalid annotations.
    ValidationIssues = 1,
    /// Bad flags, config or spec.
    Usage = 2,
    /// A provider call still failed after its retries.
    ProviderFailure = 3,
    /// A file could not be read, written or parsed.
    Io = 4,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug)]
struct Failure {
    exit: Exit,
    message: String,
}

fn fail(exit: Exit, message: impl Display) -> Failure {
    Failure {
        exit,
        message: message.to_string(),
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        fail(Exit::Io, e)
    }
}

type CmdResult = Result<Exit, Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "medaug",
    version,
    about = "Paraphrase augmentation and span evaluation for medication-annotated clinical notes"
)]
struct Cli {
    /// Maximum worker threads for augment and tag.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum TaskArg {
    Id,
    Event,
}

impl From<TaskArg> for TaskMode {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Id => TaskMode::Identification,
            TaskArg::Event => TaskMode::EventClassification,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Dev,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Dev => Split::Dev,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PolicyArg {
    Greedy,
    Maximum,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ProviderArg {
    Mock,
    Http,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum LabelArg {
    Disposition,
    NoDisposition,
    Undetermined,
}

impl From<LabelArg> for EventLabel {
    fn from(l: LabelArg) -> Self {
        match l {
            LabelArg::Disposition => EventLabel::Disposition,
            LabelArg::NoDisposition => EventLabel::NoDisposition,
            LabelArg::Undetermined => EventLabel::Undetermined,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every annotation of a corpus directory; exit 1 if any error is found.
    Validate { dir: PathBuf },
    /// Generate a synthetic corpus from a TOML spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the spec seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the sentence units an augment run would paraphrase, one JSON object per line.
    Sample {
        #[arg(long)]
        config: PathBuf,
        /// Override the corpus directory named in the config.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Paraphrase sampled units; writes records.jsonl and drift.json into --out.
    Augment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        provider: Option<ProviderArg>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Add accepted records to a corpus as new training documents.
    Merge {
        #[arg(long)]
        orig: PathBuf,
        #[arg(long)]
        aug: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tag raw texts with the gazetteer + trigger-rule baseline; writes one .ann per text.
    Tag {
        #[arg(long)]
        train: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Remove the trigger rules of a label (repeatable).
        #[arg(long = "drop-rule")]
        drop_rule: Vec<LabelArg>,
    },
    /// Score prediction .ann files against a gold corpus.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        task: TaskArg,
        #[arg(long)]
        report: PathBuf,
        /// Only score gold documents of this split.
        #[arg(long)]
        split: Option<SplitArg>,
        #[arg(long, default_value = "maximum")]
        policy: PolicyArg,
        /// Average macro scores over all classes, including ones absent from gold and predictions.
        #[arg(long)]
        macro_all_classes: bool,
    },
    /// Per-field differences between two reports (b - a), as JSON on stdout.
    Diff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a CoNLL-style BIO file for token-classification training.
    Export {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        scheme: TaskArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        split: Option<SplitArg>,
    },
}

/// Parse `argv` (program name first) and run the subcommand.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_exit(argv).into()
}

/// Same as [`run`] but returns the typed exit status.
pub fn run_exit<I, T>(argv: I) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Usage
            } else {
                Exit::Success
            };
        }
    };
    let jobs = usize::from(cli.jobs);
    let result = match cli.command {
        Command::Validate { dir } => validate(&dir),
        Command::Synth { spec, out, seed } => synth(&spec, &out, seed),
        Command::Sample {
            config,
            corpus,
            seed,
        } => sample(&config, corpus, seed),
        Command::Augment {
            config,
            out,
            corpus,
            provider,
            seed,
        } => augment(&config, &out, corpus, provider, seed, jobs),
        Command::Merge { orig, aug, out } => merge(&orig, &aug, &out),
        Command::Tag {
            train,
            input,
            out,
            drop_rule,
        } => tag_dir(&train, &input, &out, &drop_rule, jobs),
        Command::Score {
            gold,
            pred,
            task,
            report,
            split,
            policy,
            macro_all_classes,
        } => {
            let opts = ScoreOptions {
                policy: match policy {
                    PolicyArg::Greedy => MatchPolicy::Greedy,
                    PolicyArg::Maximum => MatchPolicy::Maximum,
                },
                macro_excludes_absent: !macro_all_classes,
                split: split.map(Split::from),
            };
            score_dirs(&gold, &pred, task.into(), &report, &opts)
        }
        Command::Diff { a, b, out } => diff(&a, &b, out.as_deref()),
        Command::Export {
            corpus,
            scheme,
            out,
            split,
        } => export(&corpus, scheme, &out, split),
    };
    match result {
        Ok(exit) => exit,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.exit
        }
    }
}

/// One `stage=<name> key=value ...` line on stderr.
fn log(stage: &str, fields: &[(&str, &dyn Display)]) {
    let mut line = format!("stage={stage}");
    for (k, v) in fields {
        let v = v.to_string();
        if v.is_empty() || v.contains([' ', '=', '"']) {
            line.push_str(&format!(" {k}={v:?}"));
        } else {
            line.push_str(&format!(" {k}={v}"));
        }
    }
    eprintln!("{line}");
}

/// Write to stdout, ignoring a closed pipe (e.g. output piped into `head`).
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    write_atomic(path, contents.as_bytes())
        .map_err(|e| fail(Exit::Io, format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(Exit::Io, format!("{}: {e}", path.display())))
}

fn validate(dir: &Path) -> CmdResult {
    let (corpus, mut issues) = load_corpus_unchecked(dir)?;
    issues.extend(validate_corpus(&corpus));
    let errors = issues.iter().filter(|i| i.is_error()).count();
    for issue in &issues {
        emit(&format!("{issue}\n"));
    }
    log(
        "validate",
        &[
            ("documents", &corpus.documents.len()),
            ("mentions", &corpus.mention_count()),
            ("errors", &errors),
            ("warnings", &(issues.len() - errors)),
        ],
    );
    Ok(if errors > 0 {
        Exit::ValidationIssues
    } else {
        Exit::Success
    })
}

fn synth(spec_path: &Path, out: &Path, seed: Option<u64>) -> CmdResult {
    let mut spec = SyntheticSpec::from_toml(&read_file(spec_path)?)
        .map_err(|e| fail(Exit::Usage, format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let corpus = generate_synthetic(&spec).map_err(|e| fail(Exit::Usage, e))?;
    write_corpus(&corpus, out)?;
    log(
        "synth",
        &[
            ("documents", &corpus.documents.len()),
            ("mentions", &corpus.mention_count()),
            ("seed", &spec.seed),
        ],
    );
    Ok(Exit::Success)
}

/// Read an augment config; relative paths inside it are taken relative to the config file.
fn load_config(path: &Path, seed: Option<u64>) -> Result<AugmentConfig, Failure> {
    let mut cfg = AugmentConfig::from_toml(&read_file(path)?)
        .map_err(|e| fail(Exit::Usage, format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    cfg.corpus = cfg.corpus.map(|p| base.join(p));
    cfg.templates_dir = cfg.templates_dir.map(|p| base.join(p));
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn config_corpus(cfg: &AugmentConfig, flag: Option<PathBuf>) -> Result<PathBuf, Failure> {
    flag.or_else(|| cfg.corpus.clone()).ok_or_else(|| {
        fail(
            Exit::Usage,
            "no corpus: pass --corpus or set `corpus` in the config",
        )
    })
}

fn sample(config: &Path, corpus: Option<PathBuf>, seed: Option<u64>) -> CmdResult {
    let cfg = load_config(config, seed)?;
    let corpus = load_corpus(&config_corpus(&cfg, corpus)?)?;
    let units = sample_units(&corpus, &cfg).map_err(|e| fail(Exit::Usage, e))?;
    for u in &units {
        emit(&format!(
            "{}\n",
            serde_json::to_string(u).expect("unit serializes")
        ));
    }
    log("sample", &[("sampled", &units.len()), ("seed", &cfg.seed)]);
    Ok(Exit::Success)
}

fn augment(
    config: &Path,
    out: &Path,
    corpus: Option<PathBuf>,
    provider: Option<ProviderArg>,
    seed: Option<u64>,
    jobs: usize,
) -> CmdResult {
    let mut cfg = load_config(config, seed)?;
    if let Some(p) = provider {
        cfg.provider.kind = match p {
            ProviderArg::Mock => ProviderKind::Mock,
            ProviderArg::Http => ProviderKind::Http,
        };
        cfg.validate().map_err(|e| fail(Exit::Usage, e))?;
    }
    let corpus = load_corpus(&config_corpus(&cfg, corpus)?)?;
    let template = PromptTemplate::load(cfg.templates_dir.as_deref(), &cfg.prompt_template_id)
        .map_err(|e| fail(Exit::Usage, e))?;
    let provider = build_provider(&cfg.provider).map_err(|e| fail(Exit::Usage, e))?;
    let run = run_augmentation(&corpus, &cfg, &template, provider.as_ref(), jobs)
        .map_err(|e| fail(Exit::Usage, e))?;

    write_file(&out.join("records.jsonl"), &write_records(&run.records))?;
    let c = &run.counts;
    let mut fields: Vec<(String, String)> = vec![
        ("provider".into(), provider.name().into()),
        ("sampled".into(), c.sampled.to_string()),
        ("attempts".into(), c.attempts.to_string()),
        ("generated".into(), c.generated.to_string()),
        ("accepted".into(), c.accepted.to_string()),
    ];
    for (cat, n) in &c.rejected {
        fields.push((cat.to_string(), n.to_string()));
    }
    fields.push((
        "provider_failed_units".into(),
        c.provider_failed_units.to_string(),
    ));
    match &run.drift {
        Ok(d) => {
            write_file(&out.join("drift.json"), &d.to_json())?;
            fields.push(("drift".into(), d.verdict.as_str().into()));
            fields.push(("l1".into(), format!("{:.6}", d.l1_distance)));
        }
        Err(e) => fields.push(("drift".into(), format!("none ({e})"))),
    }
    let borrowed: Vec<(&str, &dyn Display)> = fields
        .iter()
        .map(|(k, v)| (k.as_str(), v as &dyn Display))
        .collect();
    log("augment", &borrowed);
    Ok(if c.provider_failed_units > 0 {
        Exit::ProviderFailure
    } else {
        Exit::Success
    })
}

fn merge(orig: &Path, aug: &Path, out: &Path) -> CmdResult {
    let corpus = load_corpus(orig)?;
    let records = read_records(&read_file(aug)?)
        .map_err(|e| fail(Exit::Io, format!("{}: {e}", aug.display())))?;
    let accepted: Vec<_> = records
        .into_iter()
        .filter(|r| r.verdict == Verdict::Accepted)
        .collect();
    let merged = crate::augment::merge_corpus(&corpus, &accepted).map_err(|e| fail(Exit::Io, e))?;
    write_corpus(&merged, out)?;
    log(
        "merge",
        &[
            ("original", &corpus.documents.len()),
            ("accepted", &accepted.len()),
            ("documents", &merged.documents.len()),
        ],
    );
    Ok(Exit::Success)
}

fn tag_dir(
    train: &Path,
    input: &Path,
    out: &Path,
    drop_rule: &[LabelArg],
    jobs: usize,
) -> CmdResult {
    let train_corpus = load_corpus(train)?;
    let gazetteer = build_gazetteer(&train_corpus).map_err(|e| fail(Exit::Usage, e))?;
    let rules = drop_rule
        .iter()
        .fold(RuleSet::default(), |r, &l| r.without(l.into()));
    let texts: Vec<(String, String)> = read_texts(input)?.into_iter().collect();

    let chunk = texts.len().div_ceil(jobs.max(1)).max(1);
    let tagged: Vec<Vec<(String, AnnotatedDocument)>> = std::thread::scope(|s| {
        let handles: Vec<_> = texts
            .chunks(chunk)
            .map(|part| {
                let (g, r) = (&gazetteer, &rules);
                s.spawn(move || {
                    part.iter()
                        .map(|(id, text)| {
                            let mentions: Vec<MentionSpan> = tag(text, g, r);
                            let doc = AnnotatedDocument {
                                doc_id: id.clone(),
                                text: text.clone(),
                                mentions,
                            };
                            (id.clone(), doc)
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tagging worker"))
            .collect()
    });
    let mut mentions = 0;
    for (id, doc) in tagged.iter().flatten() {
        mentions += doc.mentions.len();
        write_file(&out.join(format!("{id}.ann")), &serialize_annotations(doc))?;
    }
    log(
        "tag",
        &[
            ("gazetteer", &gazetteer.len()),
            ("documents", &texts.len()),
            ("mentions", &mentions),
        ],
    );
    Ok(Exit::Success)
}

fn score_dirs(
    gold: &Path,
    pred: &Path,
    task: TaskMode,
    report_path: &Path,
    opts: &ScoreOptions,
) -> CmdResult {
    let gold_corpus = load_corpus(gold)?;
    let predictions: BTreeMap<String, Vec<MentionSpan>> = load_predictions(pred, &gold_corpus)?;
    let report =
        score_with(&gold_corpus, &predictions, task, opts).map_err(|e| fail(Exit::Io, e))?;
    write_file(report_path, &report.to_json())?;
    emit(&report.render_table());
    log(
        "score",
        &[
            ("task", &task.as_str()),
            ("documents", &report.documents),
            (
                "strict_micro_f",
                &format!("{:.4}", report.strict.micro.fscore),
            ),
            (
                "lenient_micro_f",
                &format!("{:.4}", report.lenient.micro.fscore),
            ),
            (
                "documents_with_overlapping_gold",
                &report.documents_with_overlapping_gold,
            ),
        ],
    );
    Ok(Exit::Success)
}

fn read_report(path: &Path) -> Result<MetricsReport, Failure> {
    MetricsReport::from_json(&read_file(path)?)
        .map_err(|e| fail(Exit::Io, format!("{}: {e}", path.display())))
}

fn diff(a: &Path, b: &Path, out: Option<&Path>) -> CmdResult {
    let delta =
        diff_reports(&read_report(a)?, &read_report(b)?).map_err(|e| fail(Exit::Usage, e))?;
    let json = delta.to_json();
    match out {
        Some(p) => write_file(p, &json)?,
        None => emit(&json),
    }
    log(
        "diff",
        &[
            ("fields", &delta.entries.len()),
            ("changed", &delta.changed().count()),
        ],
    );
    Ok(Exit::Success)
}

fn export(corpus: &Path, scheme: TaskArg, out: &Path, split: Option<SplitArg>) -> CmdResult {
    let corpus = load_corpus(corpus)?;
    let scheme = match scheme {
        TaskArg::Id => LabelScheme::Identification,
        TaskArg::Event => LabelScheme::Event,
    };
    let (text, stats) = export_conll(&corpus, scheme, split.map(Split::from));
    write_file(out, &text)?;
    log(
        "export",
        &[
            ("units", &stats.units),
            ("snapped", &stats.snapped),
            ("dropped", &stats.dropped),
        ],
    );
    Ok(Exit::Success)
}
