//! Command-line driver.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or runtime error.
//! Diagnostics go to stderr only.
//!
//! Any flag can also come from a TOML file given with `--config`; each
//! subcommand reads its own table (`[tamper]`, `[build-task]`, `[probe]`,
//! `[report]`), keys are flag names, and flags on the command line win.
//! Relative input paths that do not exist are looked up under the
//! directory named by `VSPROBE_DATA`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{load_captions, load_corpus, load_image_list, load_splits, CorpusIndex};
use crate::embeddings::{load_embeddings, merge_avg, merge_concat, EmbeddingSet, Modality};
use crate::error::{Error, Result};
use crate::eval::{render_report, run_experiment_with_params, ReportFormat, ResultCell};
use crate::manifest::RunManifest;
use crate::probes::io::{save_history, save_weights};
use crate::probes::{train, ProbeKind, ProbeSpec, TrainConfig};
use crate::tamper::{
    load_parses, load_tampered, tamper_corpus, Lexicon, NgramScorer, ProcessScorer,
    SentenceScorer, TamperConfig,
};
use crate::tasks::{
    build_num_objects, build_object_categories, build_semantic_congruence, majority_baseline,
    FlipTable, Granularity, ProbeTaskDataset, TaskKind, TaskOptions,
};

pub const DATA_ROOT_ENV: &str = "VSPROBE_DATA";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vsprobe",
    version,
    about = "Probe what visual-semantic embeddings encode",
    args_override_self = true
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag, one table per subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate semantically incongruent versions of captions.
    Tamper(TamperArgs),
    /// Build a probing dataset archive from a corpus and embeddings.
    BuildTask(BuildTaskArgs),
    /// Train probes on a dataset archive and record test accuracy.
    Probe(ProbeArgs),
    /// Render result records as report tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct TamperArgs {
    /// COCO-style captions file.
    #[arg(long)]
    pub captions: PathBuf,
    /// Dependency parses of the captions (CoNLL-U).
    #[arg(long)]
    pub parses: PathBuf,
    /// Lexicon file (JSON).
    #[arg(long)]
    pub lexicon: PathBuf,
    /// `builtin-ngram`, or `exec:<command>` for an external line-protocol scorer.
    #[arg(long, default_value = "builtin-ngram")]
    pub scorer: String,
    #[arg(long, default_value_t = crate::tamper::DEFAULT_NUM_CANDIDATES)]
    pub num_candidates: usize,
    #[arg(long, default_value_t = 1974)]
    pub seed: u64,
    /// Tampered-corpus output (JSON lines). The skip log and run manifest are
    /// written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MergeArg {
    Avg,
    Conc,
}

#[derive(Debug, Args)]
pub struct BuildTaskArgs {
    #[arg(long, value_parser = parse_task)]
    pub task: TaskKind,
    /// Corpus directory holding `instances.json` and `captions.json`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Split assignment file.
    #[arg(long)]
    pub splits: PathBuf,
    /// One manifest, or two comma-separated manifests: text,image (with
    /// --merge) or original,tampered (semantic-congruence).
    #[arg(long, value_delimiter = ',', num_args = 1..=2, required = true)]
    pub embeddings: Vec<PathBuf>,
    /// Combine text and image manifests.
    #[arg(long, value_enum)]
    pub merge: Option<MergeArg>,
    /// Tampered-corpus file (semantic-congruence).
    #[arg(long)]
    pub tampered: Option<PathBuf>,
    /// Flip table: reused when the file exists, written otherwise.
    #[arg(long)]
    pub flips: Option<PathBuf>,
    /// Restrict the test split to the images listed in this file.
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    /// One sample per image instead of one per caption.
    #[arg(long)]
    pub per_image: bool,
    #[arg(long, default_value_t = 1974)]
    pub seed: u64,
    /// Dataset archive output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Dataset archive.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_parser = parse_probe, default_value = "mlp")]
    pub probe: ProbeKind,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    /// Adam learning rate (default depends on the task).
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 1974)]
    pub seed: u64,
    /// Also write per-epoch training histories.
    #[arg(long)]
    pub history: bool,
    /// Output directory for weights and the result record.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory searched recursively for `*.result.json` records.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_parser = parse_format, default_value = "text")]
    pub format: ReportFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_task(s: &str) -> std::result::Result<TaskKind, String> {
    s.parse()
}

fn parse_probe(s: &str) -> std::result::Result<ProbeKind, String> {
    s.parse()
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse()
}

/// What the probe command writes per dataset and probe.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResultRecord {
    pub cell: ResultCell,
    /// Majority-class accuracy on the test split.
    pub baseline: f64,
    pub config: TrainConfig,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult<T = ()> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Run the command line `args` (including the program name) and return the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_config_defaults(args) {
        Ok(a) => a,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return EXIT_USAGE;
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            return EXIT_DATA;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Tamper(a) => cmd_tamper(a),
        Command::BuildTask(a) => cmd_build_task(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

/// Splice flags from the `--config` file's subcommand table in front of the
/// command-line flags, so that the latter override them.
fn with_config_defaults(args: Vec<OsString>) -> CmdResult<Vec<OsString>> {
    let mut config_path = None;
    let mut sub_pos = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config_path = args.get(i + 1).map(PathBuf::from);
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(p));
        } else if sub_pos.is_none()
            && ["tamper", "build-task", "probe", "report"].contains(&a.as_ref())
        {
            sub_pos = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(pos)) = (config_path, sub_pos) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::parse(&path, "config", e.message()))?;
    let section = args[pos].to_string_lossy().into_owned();
    let mut injected = Vec::new();
    if let Some(table) = doc.get(&section) {
        let table = table
            .as_table()
            .ok_or_else(|| usage(format!("{}: [{section}] must be a table", path.display())))?;
        for (key, value) in table {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                toml::Value::Boolean(true) => injected.push(OsString::from(flag)),
                toml::Value::Boolean(false) => {}
                toml::Value::String(s) => {
                    injected.push(OsString::from(flag));
                    injected.push(OsString::from(s));
                }
                toml::Value::Integer(_) | toml::Value::Float(_) => {
                    injected.push(OsString::from(flag));
                    injected.push(OsString::from(value.to_string()));
                }
                toml::Value::Array(items) => {
                    let parts: Vec<String> = items
                        .iter()
                        .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
                        .collect();
                    injected.push(OsString::from(flag));
                    injected.push(OsString::from(parts.join(",")));
                }
                other => {
                    return Err(usage(format!(
                        "{}: unsupported value for `{key}`: {other}",
                        path.display()
                    )))
                }
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Resolve an input path, falling back to the data root for relative paths
/// that do not exist as given.
pub fn resolve_input(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(root) = std::env::var_os(DATA_ROOT_ENV) {
            let candidate = Path::new(&root).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

/// `dir/stem.<ext>` for a sidecar of `path` (`out/x.jsonl` → `out/x.<ext>`).
fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    path.with_file_name(format!("{stem}.{ext}"))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

fn cmd_tamper(a: &TamperArgs) -> CmdResult {
    let scorer_spec = a.scorer.trim();
    if scorer_spec != "builtin-ngram" && !scorer_spec.starts_with("exec:") {
        return Err(usage(format!(
            "--scorer must be `builtin-ngram` or `exec:<command>`, got `{scorer_spec}`"
        )));
    }
    if a.num_candidates == 0 {
        return Err(usage("--num-candidates must be at least 1"));
    }
    let captions = resolve_input(&a.captions);
    let parses_path = resolve_input(&a.parses);
    let lexicon_path = resolve_input(&a.lexicon);

    ensure_parent(&a.out)?;
    let mut manifest = RunManifest::new(
        "tamper",
        Some(a.seed),
        serde_json::json!({
            "scorer": scorer_spec,
            "num_candidates": a.num_candidates,
            "out": a.out,
        }),
    );
    manifest.add_input("captions", &captions)?;
    manifest.add_input("parses", &parses_path)?;
    manifest.add_input("lexicon", &lexicon_path)?;
    manifest.write(sidecar(&a.out, "manifest.json"))?;

    let corpus = load_captions(&captions)?;
    let parses = load_parses(&parses_path)?;
    let lexicon = Lexicon::load(&lexicon_path)?;
    let mut scorer: Box<dyn SentenceScorer> = match scorer_spec.strip_prefix("exec:") {
        Some(cmd) => Box::new(ProcessScorer::spawn(cmd)?),
        None => Box::new(NgramScorer::train(
            corpus.captions().values().map(|c| c.text.as_str()),
        )),
    };
    let config = TamperConfig {
        num_candidates: a.num_candidates,
        seed: a.seed,
    };
    let outcome = tamper_corpus(&corpus, &parses, &lexicon, scorer.as_mut(), &config)?;
    outcome.write(&a.out, sidecar(&a.out, "skips.jsonl"))?;
    eprintln!(
        "tampered {} of {} captions ({} skipped)",
        outcome.tampered.len(),
        corpus.captions().len(),
        outcome.skipped.len()
    );
    Ok(())
}

fn load_corpus_dir(dir: &Path) -> Result<CorpusIndex> {
    load_corpus(dir.join("instances.json"), dir.join("captions.json"))
}

fn cmd_build_task(a: &BuildTaskArgs) -> CmdResult {
    let congruence = a.task == TaskKind::SemanticCongruence;
    if congruence {
        if a.tampered.is_none() {
            return Err(usage("semantic-congruence requires --tampered"));
        }
        if a.embeddings.len() != 2 {
            return Err(usage(
                "semantic-congruence requires --embeddings <original>,<tampered>",
            ));
        }
        if a.merge.is_some() {
            return Err(usage("--merge does not apply to semantic-congruence"));
        }
    } else {
        match (a.embeddings.len(), a.merge) {
            (1, None) | (2, Some(_)) => {}
            (1, Some(_)) => return Err(usage("--merge needs two manifests: text,image")),
            _ => return Err(usage("two manifests need --merge avg|conc")),
        }
        if a.tampered.is_some() || a.flips.is_some() {
            return Err(usage("--tampered and --flips apply to semantic-congruence only"));
        }
    }

    let corpus_dir = resolve_input(&a.corpus);
    let splits_path = resolve_input(&a.splits);
    let emb_paths: Vec<PathBuf> = a.embeddings.iter().map(|p| resolve_input(p)).collect();
    let flips_path = a.flips.clone().unwrap_or_else(|| sidecar(&a.out, "flips.json"));
    let reuse_flips = congruence && flips_path.exists();

    ensure_parent(&a.out)?;
    let mut manifest = RunManifest::new(
        "build-task",
        Some(a.seed),
        serde_json::json!({
            "task": a.task,
            "merge": a.merge.map(|m| format!("{m:?}").to_lowercase()),
            "per_image": a.per_image,
            "out": a.out,
        }),
    );
    manifest.add_input("instances", corpus_dir.join("instances.json"))?;
    manifest.add_input("captions", corpus_dir.join("captions.json"))?;
    manifest.add_input("splits", &splits_path)?;
    for (i, p) in emb_paths.iter().enumerate() {
        manifest.add_input(format!("embeddings.{i}"), p)?;
    }
    if let Some(t) = &a.tampered {
        manifest.add_input("tampered", resolve_input(t))?;
    }
    if reuse_flips {
        manifest.add_input("flips", &flips_path)?;
    }
    if let Some(t) = &a.test_images {
        manifest.add_input("test_images", resolve_input(t))?;
    }
    manifest.write(sidecar(&a.out, "manifest.json"))?;

    let corpus = load_corpus_dir(&corpus_dir)?;
    let splits = load_splits(&splits_path, &corpus)?;
    let options = TaskOptions {
        granularity: if a.per_image {
            Granularity::PerImage
        } else {
            Granularity::PerCaption
        },
        test_images: match &a.test_images {
            Some(p) => Some(load_image_list(resolve_input(p))?),
            None => None,
        },
        ..TaskOptions::default()
    };
    let sets = emb_paths
        .iter()
        .map(load_embeddings)
        .collect::<Result<Vec<EmbeddingSet>>>()?;

    let dataset = if congruence {
        let tampered = load_tampered(resolve_input(a.tampered.as_ref().expect("checked")))?;
        let existing = if reuse_flips {
            Some(FlipTable::load(&flips_path)?)
        } else {
            None
        };
        let (dataset, table) = build_semantic_congruence(
            &corpus,
            &splits,
            &tampered,
            &sets[0],
            &sets[1],
            existing.as_ref(),
            a.seed,
            &options,
        )?;
        if !reuse_flips {
            table.save(&flips_path)?;
        }
        dataset
    } else {
        let emb = match a.merge {
            None => sets.into_iter().next().expect("one manifest"),
            Some(m) => {
                let (text, image) = text_and_image(sets)?;
                match m {
                    MergeArg::Avg => merge_avg(&text, &image, &corpus)?,
                    MergeArg::Conc => merge_concat(&text, &image, &corpus)?,
                }
            }
        };
        match a.task {
            TaskKind::ObjectCategories => build_object_categories(&corpus, &splits, &emb, &options)?,
            TaskKind::NumObjects => build_num_objects(&corpus, &splits, &emb, &options)?,
            TaskKind::SemanticCongruence => unreachable!("handled above"),
        }
    };
    dataset.save(&a.out)?;
    eprintln!(
        "{}: {} classes, dim {}, {} / {} / {} train/validation/test samples",
        dataset.task,
        dataset.num_classes,
        dataset.dim,
        dataset.split(crate::corpus::Split::Train).len(),
        dataset.split(crate::corpus::Split::Validation).len(),
        dataset.split(crate::corpus::Split::Test).len()
    );
    Ok(())
}

/// Order two manifests as (text, image) by their declared modality.
fn text_and_image(sets: Vec<EmbeddingSet>) -> CmdResult<(EmbeddingSet, EmbeddingSet)> {
    let mut it = sets.into_iter();
    let (a, b) = (it.next().expect("two"), it.next().expect("two"));
    match (a.modality(), b.modality()) {
        (Modality::Text, Modality::Image) => Ok((a, b)),
        (Modality::Image, Modality::Text) => Ok((b, a)),
        (x, y) => Err(usage(format!(
            "--merge needs one text and one image manifest, got {x} and {y}"
        ))),
    }
}

/// File-name stem identifying a (dataset, probe) pair.
fn result_stem(dataset: &ProbeTaskDataset, probe: ProbeKind) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '+' { c } else { '_' })
            .collect()
    };
    format!(
        "{}.{}.{}.{}",
        dataset.task,
        clean(&dataset.model),
        clean(&dataset.variant),
        probe
    )
}

fn cmd_probe(a: &ProbeArgs) -> CmdResult {
    if a.runs == 0 || a.epochs == 0 || a.batch_size == 0 {
        return Err(usage("--runs, --epochs and --batch-size must be positive"));
    }
    if let Some(lr) = a.lr {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(usage("--lr must be positive"));
        }
    }
    let dataset_path = resolve_input(&a.dataset);
    let dataset = ProbeTaskDataset::load(&dataset_path)?;
    let config = TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr.unwrap_or(dataset.task.default_learning_rate()),
        batch_size: a.batch_size,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let spec = ProbeSpec::new(a.probe, dataset.dim, dataset.num_classes);
    let stem = result_stem(&dataset, a.probe);

    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut manifest = RunManifest::new(
        "probe",
        Some(a.seed),
        serde_json::json!({ "spec": spec, "train": config, "runs": a.runs }),
    );
    manifest.add_input("dataset", &dataset_path)?;
    manifest.write(a.out.join(format!("{stem}.manifest.json")))?;

    let baseline = majority_baseline(&dataset)?;
    let mut results = run_experiment_with_params(&dataset, &[spec], &config, a.runs)?;
    let (cell, params) = results.pop().expect("one spec");
    for (r, p) in params.iter().enumerate() {
        save_weights(a.out.join(format!("{stem}.run{r}.weights.txt")), &spec, p)?;
    }
    if a.history {
        for r in 0..a.runs {
            let run_config = TrainConfig {
                seed: crate::seed::derive_index(config.seed, r as u64),
                ..config
            };
            let (_, history) = train(&spec, &dataset, &run_config)?;
            save_history(a.out.join(format!("{stem}.run{r}.history.jsonl")), &history)?;
        }
    }
    if let Some(w) = &cell.warning {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "{} {} {}: mean test accuracy {} over {} runs (baseline {})",
        cell.task,
        cell.variant,
        cell.probe,
        crate::eval::fmt3(cell.mean),
        a.runs,
        crate::eval::fmt3(baseline)
    );
    let record = ResultRecord {
        cell,
        baseline,
        config,
    };
    crate::corpus::write_json(&a.out.join(format!("{stem}.result.json")), &record)?;
    Ok(())
}

fn collect_records(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_records(&path, out)?;
        } else if path
            .file_name()
            .is_some_and(|n| n.to_string_lossy().ends_with(".result.json"))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Read every result record under `dir`, in path order.
pub fn load_results(dir: &Path) -> Result<Vec<ResultRecord>> {
    let mut paths = Vec::new();
    collect_records(dir, &mut paths)?;
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_slice(&bytes).map_err(|e| {
                Error::parse(p, format!("line {} column {}", e.line(), e.column()), e)
            })
        })
        .collect()
}

fn cmd_report(a: &ReportArgs) -> CmdResult {
    let dir = resolve_input(&a.results);
    let records = load_results(&dir)?;
    if records.is_empty() {
        return Err(Error::Integrity(format!("no result records under {}", dir.display())).into());
    }
    let mut baselines = BTreeMap::new();
    for r in &records {
        baselines.entry(r.cell.task).or_insert(r.baseline);
    }
    let cells: Vec<ResultCell> = records.into_iter().map(|r| r.cell).collect();
    let text = render_report(&cells, &baselines, a.format)?;
    match &a.out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, text).map_err(|e| Error::io(path, e))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
