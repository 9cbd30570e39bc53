use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Parser, Subcommand, ValueEnum};
use ctlfilter_core::evaluation::{confusion_counts, f_measure, generate_drift_stream};
use ctlfilter_core::rules::parse_rules;
use ctlfilter_core::{ControlModel, Document, RuleSet};

use crate::config::{parse_drift_spec, TopicConfig};
use crate::corpus_io::{ingest_stream, write_corpus};
use crate::model_file::{model_from_str, model_to_string};
use crate::pipeline::{build_model, filter_corpus, supervise};
use crate::records::{read_labels, write_truth, write_verdicts};
use crate::report::{render_report, ReportKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// A failure together with the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Corpus, model, label files and outputs.
    #[error("{0}")]
    Data(String),
    /// Rule programs, topic configs and drift specs.
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }
}

fn data(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn config(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "ctlfilter", version, about = "Supervise a rule-based news filter with a learned control filter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the rule filter alone and write one verdict line per document.
    Filter {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a control filter from the rule filter's verdicts.
    BuildControl {
        #[arg(long)]
        topic: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to the topic's model_path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the topic's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare both filters and write a ranked alert report.
    Supervise {
        #[arg(long)]
        topic: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to the topic's model_path.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print precision, recall and F-measure of predictions against truth.
    Evaluate {
        #[arg(long)]
        predicted: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Generate a synthetic drift stream and its ground truth.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Precision,
    Recall,
    Both,
}

impl From<KindArg> for ReportKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Precision => ReportKind::Precision,
            KindArg::Recall => ReportKind::Recall,
            KindArg::Both => ReportKind::Both,
        }
    }
}

/// Write through a temporary file in the target directory, renamed into
/// place only once everything was written.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    let mut w = BufWriter::new(tmp);
    body(&mut w)?;
    let tmp = w.into_inner().map_err(|e| e.into_error())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn load_corpus(path: &Path) -> Result<Vec<Document>, CliError> {
    let f = File::open(path).map_err(|e| data(path, e))?;
    ingest_stream(BufReader::new(f)).map_err(|e| data(path, e))
}

fn load_rules(path: &Path) -> Result<RuleSet, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config(path, e))?;
    parse_rules(&text).map_err(|e| config(path, e))
}

fn load_topic(path: &Path) -> Result<TopicConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    TopicConfig::parse(&text, base).map_err(|e| config(path, e))
}

fn load_model(path: &Path) -> Result<ControlModel, CliError> {
    let text = fs::read_to_string(path).map_err(|e| data(path, e))?;
    model_from_str(&text).map_err(|e| data(path, e))
}

fn model_path(arg: Option<PathBuf>, topic: &TopicConfig, flag: &str) -> Result<PathBuf, CliError> {
    arg.or_else(|| topic.model_path.clone())
        .ok_or_else(|| CliError::Usage(format!("{flag} is required when the topic has no model_path")))
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Filter { rules, corpus, out } => {
            let rs = load_rules(&rules)?;
            let docs = load_corpus(&corpus)?;
            let verdicts = filter_corpus(&rs, &docs);
            match out {
                Some(p) => write_atomic(&p, |w| write_verdicts(w, &docs, &verdicts)).map_err(|e| data(&p, e)),
                None => write_verdicts(io::stdout().lock(), &docs, &verdicts)
                    .map_err(|e| CliError::Data(format!("stdout: {e}"))),
            }
        }
        Command::BuildControl {
            topic,
            corpus,
            out,
            seed,
        } => {
            let mut cfg = load_topic(&topic)?;
            let out = model_path(out, &cfg, "--out")?;
            if let Some(s) = seed {
                cfg.build.hyper.seed = s;
            }
            let rs = load_rules(&cfg.rules_path)?;
            let docs = load_corpus(&corpus)?;
            let model = build_model(&cfg.topic_name, &rs, &docs, &cfg.build).map_err(|e| data(&corpus, e))?;
            let text = model_to_string(&model);
            write_atomic(&out, |w| w.write_all(text.as_bytes())).map_err(|e| data(&out, e))
        }
        Command::Supervise {
            topic,
            corpus,
            model,
            kind,
            out,
        } => {
            let cfg = load_topic(&topic)?;
            let model_path = model_path(model, &cfg, "--model")?;
            let rs = load_rules(&cfg.rules_path)?;
            let model = load_model(&model_path)?;
            let docs = load_corpus(&corpus)?;
            let kind = ReportKind::from(kind);
            let alerts = supervise(&rs, &model, &docs, &cfg.supervisor, kind);
            let now = Utc::now();
            write_atomic(&out, |w| {
                render_report(w, &cfg.topic_name, kind, &cfg.supervisor, &alerts, &docs, now)
            })
            .map_err(|e| data(&out, e))
        }
        Command::Evaluate { predicted, truth } => {
            let open = |p: &Path| {
                let f = File::open(p).map_err(|e| data(p, e))?;
                read_labels(BufReader::new(f)).map_err(|e| data(p, e))
            };
            let pred = open(&predicted)?;
            let want = open(&truth)?;
            if pred.order.len() != want.order.len() {
                return Err(CliError::Data(format!(
                    "{} has {} documents but {} has {}",
                    predicted.display(),
                    pred.order.len(),
                    truth.display(),
                    want.order.len()
                )));
            }
            let mut p = Vec::with_capacity(want.order.len());
            for id in &want.order {
                let v = pred
                    .by_id
                    .get(id)
                    .ok_or_else(|| data(&predicted, format!("no prediction for document `{id}`")))?;
                p.push(*v);
            }
            let t: Vec<bool> = want.order.iter().map(|id| want.by_id[id]).collect();
            let counts = confusion_counts(&p, &t).map_err(|e| CliError::Data(e.to_string()))?;
            let r = f_measure(&counts);
            println!("precision {}", r.precision);
            println!("recall {}", r.recall);
            println!("f_measure {}", r.f_measure);
            Ok(())
        }
        Command::Simulate { spec, out, truth } => {
            let text = fs::read_to_string(&spec).map_err(|e| config(&spec, e))?;
            let ds = parse_drift_spec(&text).map_err(|e| config(&spec, e))?;
            let stream = generate_drift_stream(&ds).map_err(|e| config(&spec, e))?;
            write_atomic(&out, |w| write_corpus(w, &stream.documents)).map_err(|e| data(&out, e))?;
            write_atomic(&truth, |w| write_truth(w, &stream.documents, &stream.truth)).map_err(|e| data(&truth, e))
        }
    }
}

/// Run the command line `argv` (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ctlfilter: {e}");
            e.exit_code()
        }
    }
}
