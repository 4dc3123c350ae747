//! Accuracy metrics, multi-run aggregation and report emission.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::probes::{predict, train, ProbeKind, ProbeParams, ProbeSpec, TrainConfig};
use crate::seed;
use crate::tasks::{ProbeTaskDataset, TaskKind};

/// Run-to-run variance above which a cell carries a warning.
pub const VARIANCE_WARNING_THRESHOLD: f64 = 0.01;
pub const DEFAULT_NUM_RUNS: usize = 5;

fn check_lengths(predictions: &[usize], labels: &[usize]) -> Result<()> {
    if predictions.len() != labels.len() {
        return Err(Error::Contract(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Contract("accuracy of an empty set".into()));
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    check_lengths(predictions, labels)?;
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Accuracy restricted to each true class; `None` for classes absent from
/// `labels`.
pub fn per_class_accuracy(
    predictions: &[usize],
    labels: &[usize],
    num_classes: usize,
) -> Result<Vec<Option<f64>>> {
    check_lengths(predictions, labels)?;
    let mut hits = vec![0usize; num_classes];
    let mut totals = vec![0usize; num_classes];
    for (&p, &l) in predictions.iter().zip(labels) {
        if l >= num_classes {
            return Err(Error::Contract(format!("label {l} outside [0, {num_classes})")));
        }
        totals[l] += 1;
        if p == l {
            hits[l] += 1;
        }
    }
    Ok(hits
        .iter()
        .zip(&totals)
        .map(|(&h, &t)| (t > 0).then(|| h as f64 / t as f64))
        .collect())
}

/// Aggregated test accuracy of one (task, embedding variant, probe) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultCell {
    pub task: TaskKind,
    pub model: String,
    pub variant: String,
    pub probe: ProbeKind,
    /// Test accuracy of each run, in run order.
    pub runs: Vec<f64>,
    pub mean: f64,
    /// Population variance of `runs`.
    pub variance: f64,
    pub std: f64,
    pub class_names: Vec<String>,
    /// Per-run, per-class test accuracy (`null` for classes without test samples).
    pub per_class: Vec<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ResultCell {
    /// Aggregate per-run results into a cell.
    pub fn from_runs(
        task: TaskKind,
        model: impl Into<String>,
        variant: impl Into<String>,
        probe: ProbeKind,
        class_names: Vec<String>,
        runs: Vec<f64>,
        per_class: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Contract("a result cell needs at least one run".into()));
        }
        let (mean, variance) = mean_and_variance(&runs);
        let warning = (variance > VARIANCE_WARNING_THRESHOLD).then(|| {
            format!("run variance {variance:.4} exceeds {VARIANCE_WARNING_THRESHOLD}")
        });
        Ok(ResultCell {
            task,
            model: model.into(),
            variant: variant.into(),
            probe,
            runs,
            mean,
            variance,
            std: variance.sqrt(),
            class_names,
            per_class,
            warning,
        })
    }

    /// Mean per-class accuracy over the runs in which the class is defined.
    pub fn mean_per_class(&self) -> Vec<Option<f64>> {
        let n = self.class_names.len();
        (0..n)
            .map(|c| {
                let vals: Vec<f64> = self
                    .per_class
                    .iter()
                    .filter_map(|run| run.get(c).copied().flatten())
                    .collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect()
    }

    fn sort_key(&self) -> (TaskKind, u8, String, u8, ProbeKind) {
        let (group, within) = variant_group(&self.variant);
        (self.task, group, self.model.clone(), within, self.probe)
    }
}

/// Arithmetic mean and population variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, variance)
}

/// Report group of a variant: image (0), text (1), merged (2); `within`
/// orders avg before conc.
fn variant_group(variant: &str) -> (u8, u8) {
    match variant {
        "image" => (0, 0),
        "text" => (1, 0),
        "avg" => (2, 0),
        "conc" => (2, 1),
        _ => (3, 0),
    }
}

/// Train and test `num_runs` probes of each spec; run `r` is seeded with
/// `derive_index(config.seed, r)`. Runs execute in parallel but each is
/// deterministic, so the result does not depend on scheduling.
pub fn run_experiment(
    dataset: &ProbeTaskDataset,
    specs: &[ProbeSpec],
    config: &TrainConfig,
    num_runs: usize,
) -> Result<Vec<ResultCell>> {
    Ok(run_experiment_with_params(dataset, specs, config, num_runs)?
        .into_iter()
        .map(|(cell, _)| cell)
        .collect())
}

/// As [`run_experiment`], also returning each run's trained parameters.
pub fn run_experiment_with_params(
    dataset: &ProbeTaskDataset,
    specs: &[ProbeSpec],
    config: &TrainConfig,
    num_runs: usize,
) -> Result<Vec<(ResultCell, Vec<ProbeParams>)>> {
    if num_runs == 0 {
        return Err(Error::Contract("num_runs must be at least 1".into()));
    }
    let test = dataset.split(Split::Test);
    if test.is_empty() {
        return Err(Error::Contract("test split is empty".into()));
    }
    let labels: Vec<usize> = test.iter().map(|s| s.label).collect();
    let vectors: Vec<&[f64]> = test.iter().map(|s| s.vector.as_slice()).collect();

    let mut cells = Vec::with_capacity(specs.len());
    for spec in specs {
        let coordinates = format!(
            "{} / {} {} / {}",
            dataset.task, dataset.model, dataset.variant, spec.kind
        );
        let runs: Vec<(f64, Vec<Option<f64>>, ProbeParams)> = (0..num_runs)
            .into_par_iter()
            .map(|r| {
                let run_config = TrainConfig {
                    seed: seed::derive_index(config.seed, r as u64),
                    ..*config
                };
                let (params, _) = train(spec, dataset, &run_config)?;
                let predictions = predict(spec, &params, &vectors)?;
                Ok((
                    accuracy(&predictions, &labels)?,
                    per_class_accuracy(&predictions, &labels, dataset.num_classes)?,
                    params,
                ))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.context(coordinates.clone()))?;

        let mut accs = Vec::with_capacity(num_runs);
        let mut per_class = Vec::with_capacity(num_runs);
        let mut params = Vec::with_capacity(num_runs);
        for (a, pc, p) in runs {
            accs.push(a);
            per_class.push(pc);
            params.push(p);
        }
        let cell = ResultCell::from_runs(
            dataset.task,
            dataset.model.clone(),
            dataset.variant.clone(),
            spec.kind,
            dataset.class_names.clone(),
            accs,
            per_class,
        )?;
        cells.push((cell, params));
    }
    Ok(cells)
}

/// Improvement by merging of one (task, model, probe): the best merged mean
/// minus the best unimodal mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergingImprovement {
    pub task: TaskKind,
    pub model: String,
    pub probe: ProbeKind,
    pub delta: f64,
}

/// Deltas for every (task, model, probe) with any merged cell. Each such
/// group must contain all four variants.
pub fn merging_improvement(cells: &[ResultCell]) -> Result<Vec<MergingImprovement>> {
    let mut groups: BTreeMap<(TaskKind, String, ProbeKind), BTreeMap<&str, f64>> = BTreeMap::new();
    for c in cells {
        groups
            .entry((c.task, c.model.clone(), c.probe))
            .or_default()
            .insert(c.variant.as_str(), c.mean);
    }
    let mut out = Vec::new();
    for ((task, model, probe), means) in groups {
        if !means.contains_key("avg") && !means.contains_key("conc") {
            continue;
        }
        let get = |v: &str| {
            means.get(v).copied().ok_or_else(|| {
                Error::Contract(format!(
                    "merging improvement for {model} ({task}, {probe}) needs the {v} variant"
                ))
            })
        };
        let merged = get("avg")?.max(get("conc")?);
        let unimodal = get("text")?.max(get("image")?);
        out.push(MergingImprovement {
            task,
            model,
            probe,
            delta: merged - unimodal,
        });
    }
    Ok(out)
}

/// Deltas for the groups that have all four variants; reports use this so a
/// partial grid still renders.
fn complete_improvements(cells: &[ResultCell]) -> Vec<MergingImprovement> {
    let mut variants: BTreeMap<(TaskKind, &str, ProbeKind), BTreeSet<&str>> = BTreeMap::new();
    for c in cells {
        variants
            .entry((c.task, c.model.as_str(), c.probe))
            .or_default()
            .insert(c.variant.as_str());
    }
    let complete: Vec<ResultCell> = cells
        .iter()
        .filter(|c| {
            let v = &variants[&(c.task, c.model.as_str(), c.probe)];
            ["text", "image", "avg", "conc"].iter().all(|x| v.contains(x))
        })
        .cloned()
        .collect();
    merging_improvement(&complete).expect("complete groups")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Text,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Text => "txt",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" | "machine-readable" => Ok(ReportFormat::Json),
            "text" | "text-table" | "txt" => Ok(ReportFormat::Text),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Three-decimal rendering (ties to even on the binary value).
pub fn fmt3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt3).unwrap_or_else(|| "—".to_string())
}

fn sorted(cells: &[ResultCell]) -> Vec<&ResultCell> {
    let mut v: Vec<&ResultCell> = cells.iter().collect();
    v.sort_by_key(|c| c.sort_key());
    v
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV report: one row per cell. `run_accs` and `per_class` (mean over runs,
/// in class order) are `;`-separated.
pub fn render_csv(cells: &[ResultCell]) -> String {
    let mut out = String::from("task,model,variant,probe,mean,variance,run_accs,per_class\n");
    for c in sorted(cells) {
        let runs: Vec<String> = c.runs.iter().map(|&x| fmt3(x)).collect();
        let per_class: Vec<String> = c.mean_per_class().into_iter().map(fmt_opt).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.task,
            csv_field(&c.model),
            csv_field(&c.variant),
            c.probe,
            fmt3(c.mean),
            fmt3(c.variance),
            runs.join(";"),
            per_class.join(";"),
        );
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    variance: &'static str,
    baselines: BTreeMap<String, f64>,
    cells: Vec<&'a ResultCell>,
    improvements: Vec<MergingImprovement>,
}

/// Machine-readable report: the cells verbatim plus baselines and merging
/// improvements.
pub fn render_json(cells: &[ResultCell], baselines: &BTreeMap<TaskKind, f64>) -> Result<String> {
    let report = JsonReport {
        variance: "population",
        baselines: baselines.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        cells: sorted(cells),
        improvements: complete_improvements(cells),
    };
    let mut s = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Contract(format!("report serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn row_label(model: &str, variant: &str) -> String {
    format!("{model}_{variant}")
}

/// Text tables, one per task, grouped Baseline / Image / Text / Merged /
/// Improvement by merging, with MLP and linear columns.
pub fn render_text(cells: &[ResultCell], baselines: &BTreeMap<TaskKind, f64>) -> Result<String> {
    let improvements = complete_improvements(cells);
    let tasks: BTreeSet<TaskKind> = cells.iter().map(|c| c.task).collect();
    let mut out = String::from("Test accuracy, mean over runs (variance: population).\n");

    for task in tasks {
        let task_cells: Vec<&ResultCell> = sorted(cells).into_iter().filter(|c| c.task == task).collect();
        let mut rows: Vec<(String, [Option<f64>; 2])> = Vec::new();
        let mut warnings = Vec::new();
        let b = baselines.get(&task).copied();
        rows.push(("Baseline".into(), [b, b]));

        for (group, title) in [(0u8, "Image"), (1, "Text"), (2, "Merged")] {
            let members: Vec<&&ResultCell> = task_cells
                .iter()
                .filter(|c| variant_group(&c.variant).0 == group)
                .collect();
            if members.is_empty() {
                continue;
            }
            rows.push((format!("[{title}]"), [None, None]));
            let mut by_label: BTreeMap<(String, u8, String), [Option<f64>; 2]> = BTreeMap::new();
            for c in members {
                let key = (c.model.clone(), variant_group(&c.variant).1, row_label(&c.model, &c.variant));
                let col = match c.probe {
                    ProbeKind::Mlp => 0,
                    ProbeKind::Linear => 1,
                };
                by_label.entry(key).or_default()[col] = Some(c.mean);
                if let Some(w) = &c.warning {
                    warnings.push(format!("{} {}: {w}", row_label(&c.model, &c.variant), c.probe));
                }
            }
            for ((_, _, label), vals) in by_label {
                rows.push((format!("  {label}"), vals));
            }
        }
        // Remaining variants not in the standard groups.
        for c in task_cells.iter().filter(|c| variant_group(&c.variant).0 == 3) {
            let mut vals = [None, None];
            vals[(c.probe == ProbeKind::Linear) as usize] = Some(c.mean);
            rows.push((row_label(&c.model, &c.variant), vals));
        }

        let task_impr: Vec<&MergingImprovement> = improvements.iter().filter(|m| m.task == task).collect();
        if !task_impr.is_empty() {
            rows.push(("[Improvement by merging]".into(), [None, None]));
            let mut by_model: BTreeMap<&str, [Option<f64>; 2]> = BTreeMap::new();
            for m in task_impr {
                by_model.entry(&m.model).or_default()[(m.probe == ProbeKind::Linear) as usize] = Some(m.delta);
            }
            for (model, vals) in by_model {
                rows.push((format!("  {model}"), vals));
            }
        }

        let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0).max(9);
        let _ = writeln!(out, "\n== {task} ==");
        let _ = writeln!(out, "{:<width$}  {:>7}  {:>7}", "Embedding", "MLP", "linear");
        for (label, vals) in rows {
            if label.starts_with('[') {
                let _ = writeln!(out, "{label}");
                continue;
            }
            let cell = |v: Option<f64>| v.map(fmt3).unwrap_or_else(|| "-".to_string());
            let _ = writeln!(out, "{label:<width$}  {:>7}  {:>7}", cell(vals[0]), cell(vals[1]));
        }
        for w in warnings {
            let _ = writeln!(out, "warning: {w}");
        }
    }
    Ok(out)
}

pub fn render_report(
    cells: &[ResultCell],
    baselines: &BTreeMap<TaskKind, f64>,
    format: ReportFormat,
) -> Result<String> {
    if cells.is_empty() {
        return Err(Error::Contract("no result cells to report".into()));
    }
    match format {
        ReportFormat::Csv => Ok(render_csv(cells)),
        ReportFormat::Json => render_json(cells, baselines),
        ReportFormat::Text => render_text(cells, baselines),
    }
}

/// Render and write a report file.
pub fn emit_report(
    cells: &[ResultCell],
    baselines: &BTreeMap<TaskKind, f64>,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(cells, baselines, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(variant: &str, probe: ProbeKind, mean: f64) -> ResultCell {
        ResultCell::from_runs(
            TaskKind::ObjectCategories,
            "m",
            variant,
            probe,
            vec!["a".into()],
            vec![mean],
            vec![vec![Some(mean)]],
        )
        .unwrap()
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert!((accuracy(&[0, 1, 1], &[0, 0, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(accuracy(&[1, 1], &[0, 0]).unwrap(), 0.0);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[1], &[0, 1]).is_err());
    }

    #[test]
    fn per_class_examples() {
        assert_eq!(
            per_class_accuracy(&[0, 1, 1], &[0, 0, 1], 2).unwrap(),
            vec![Some(0.5), Some(1.0)]
        );
        assert_eq!(
            per_class_accuracy(&[0, 0], &[0, 0], 2).unwrap(),
            vec![Some(1.0), None]
        );
    }

    #[test]
    fn rendering() {
        assert_eq!(fmt3(0.6049), "0.605");
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt_opt(None), "—");
    }

    #[test]
    fn single_run_has_zero_variance() {
        let c = cell("text", ProbeKind::Mlp, 0.7);
        assert_eq!((c.mean, c.variance, c.std), (0.7, 0.0, 0.0));
        assert!(c.warning.is_none());
    }

    #[test]
    fn high_variance_warns() {
        let c = ResultCell::from_runs(
            TaskKind::NumObjects,
            "m",
            "text",
            ProbeKind::Mlp,
            vec![],
            vec![0.2, 0.8],
            vec![vec![], vec![]],
        )
        .unwrap();
        assert!((c.variance - 0.09).abs() < 1e-15);
        assert!(c.warning.is_some());
    }

    #[test]
    fn improvement_example() {
        let cells = [
            cell("text", ProbeKind::Mlp, 0.5),
            cell("image", ProbeKind::Mlp, 0.6),
            cell("avg", ProbeKind::Mlp, 0.65),
            cell("conc", ProbeKind::Mlp, 0.7),
        ];
        let d = merging_improvement(&cells).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].delta - 0.1).abs() < 1e-12);
        assert!(merging_improvement(&cells[1..]).is_err());
    }
}
