//! The three probing datasets over frozen embedding vectors.
//!
//! Samples are image-caption pairs: image-level labels are broadcast to
//! every caption of the image. A sample's vector is looked up by caption id,
//! or by image id when the embedding set is image-keyed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_json, CaptionId, CorpusIndex, CrowdPolicy, ImageId, Split, SplitAssignment};
use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::seed;
use crate::tamper::TamperedCaption;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    ObjectCategories,
    NumObjects,
    SemanticCongruence,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [
        TaskKind::ObjectCategories,
        TaskKind::NumObjects,
        TaskKind::SemanticCongruence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::ObjectCategories => "object-categories",
            TaskKind::NumObjects => "num-objects",
            TaskKind::SemanticCongruence => "semantic-congruence",
        }
    }

    /// Adam learning rate used for this task.
    pub fn default_learning_rate(self) -> f64 {
        match self {
            TaskKind::ObjectCategories | TaskKind::NumObjects => 1e-4,
            TaskKind::SemanticCongruence => 1e-3,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

// ---------------------------------------------------------------------------
// Binning

pub const NUM_OBJECT_BINS: usize = 6;
const BIN_WIDTH: usize = 6;

/// Class index of an object count: five bins of width six over 0..=29 and
/// one bin for 30 or more.
pub fn bin_num_objects(count: usize) -> usize {
    (count / BIN_WIDTH).min(NUM_OBJECT_BINS - 1)
}

/// Bin labels `0-5`, `6-11`, ..., `>=30`.
pub fn bin_names() -> Vec<String> {
    (0..NUM_OBJECT_BINS)
        .map(|b| {
            if b + 1 == NUM_OBJECT_BINS {
                format!(">={}", b * BIN_WIDTH)
            } else {
                format!("{}-{}", b * BIN_WIDTH, b * BIN_WIDTH + BIN_WIDTH - 1)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Dataset

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub sample_id: String,
    pub label: usize,
    pub vector: Vec<f64>,
}

/// Labeled vectors per split.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTaskDataset {
    pub task: TaskKind,
    pub num_classes: usize,
    pub class_names: Vec<String>,
    pub dim: usize,
    /// Embedding model the vectors came from.
    pub model: String,
    /// Embedding variant (text, image, avg, conc).
    pub variant: String,
    splits: BTreeMap<Split, Vec<Sample>>,
}

impl ProbeTaskDataset {
    pub fn new(
        task: TaskKind,
        class_names: Vec<String>,
        dim: usize,
        model: impl Into<String>,
        variant: impl Into<String>,
        splits: BTreeMap<Split, Vec<Sample>>,
    ) -> Result<Self> {
        let num_classes = class_names.len();
        if num_classes == 0 {
            return Err(Error::Contract("dataset needs at least one class".into()));
        }
        for (split, samples) in &splits {
            for s in samples {
                if s.label >= num_classes {
                    return Err(Error::Contract(format!(
                        "{split} sample {} has label {} outside [0, {num_classes})",
                        s.sample_id, s.label
                    )));
                }
                if s.vector.len() != dim {
                    return Err(Error::Contract(format!(
                        "{split} sample {} has dimension {}, expected {dim}",
                        s.sample_id,
                        s.vector.len()
                    )));
                }
            }
        }
        Ok(ProbeTaskDataset {
            task,
            num_classes,
            class_names,
            dim,
            model: model.into(),
            variant: variant.into(),
            splits,
        })
    }

    pub fn split(&self, split: Split) -> &[Sample] {
        self.splits.get(&split).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn label_counts(&self, split: Split) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for s in self.split(split) {
            counts[s.label] += 1;
        }
        counts
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = ArchiveHeader {
            task_name: self.task,
            num_classes: self.num_classes,
            dim: self.dim,
            class_names: self.class_names.clone(),
            model: self.model.clone(),
            variant: self.variant.clone(),
        };
        let ser = |e: serde_json::Error| Error::io(path, e.into());
        serde_json::to_writer(&mut w, &header).map_err(ser)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        for (split, samples) in &self.splits {
            for s in samples {
                let rec = ArchiveRecord {
                    split: *split,
                    sample_id: s.sample_id.clone(),
                    label: s.label,
                    vector: s.vector.clone(),
                };
                serde_json::to_writer(&mut w, &rec).map_err(ser)?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let header: ArchiveHeader = match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&line).map_err(|e| Error::parse(path, "line 1", e))?
            }
            None => return Err(Error::parse(path, "line 1", "missing archive header")),
        };
        let mut splits: BTreeMap<Split, Vec<Sample>> = BTreeMap::new();
        for (n, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ArchiveRecord = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path, format!("line {}", n + 1), e))?;
            splits.entry(rec.split).or_default().push(Sample {
                sample_id: rec.sample_id,
                label: rec.label,
                vector: rec.vector,
            });
        }
        if header.class_names.len() != header.num_classes {
            return Err(Error::parse(path, "line 1", "class_names length differs from num_classes"));
        }
        ProbeTaskDataset::new(
            header.task_name,
            header.class_names,
            header.dim,
            header.model,
            header.variant,
            splits,
        )
        .map_err(|e| Error::parse(path, "records", e))
    }
}

#[derive(Serialize, Deserialize)]
struct ArchiveHeader {
    task_name: TaskKind,
    num_classes: usize,
    dim: usize,
    class_names: Vec<String>,
    #[serde(default)]
    model: String,
    #[serde(default)]
    variant: String,
}

#[derive(Serialize, Deserialize)]
struct ArchiveRecord {
    split: Split,
    sample_id: String,
    label: usize,
    vector: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Builders

/// Whether a sample is an image-caption pair or a whole image.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    #[default]
    PerCaption,
    /// One sample per image. Text-keyed sets use the image's first caption.
    PerImage,
}

#[derive(Debug, Clone, Default)]
pub struct TaskOptions {
    pub granularity: Granularity,
    pub crowd: CrowdPolicy,
    /// Restrict the test split to these images.
    pub test_images: Option<BTreeSet<ImageId>>,
}

struct Unit<'a> {
    split: Split,
    image: &'a ImageId,
    /// Caption for per-caption samples, first caption for per-image ones.
    caption: Option<&'a CaptionId>,
    sample_id: String,
}

fn units<'a>(
    corpus: &'a CorpusIndex,
    splits: &'a SplitAssignment,
    options: &TaskOptions,
) -> Vec<Unit<'a>> {
    let mut out = Vec::new();
    for split in Split::ALL {
        for image in splits.images_in(split) {
            if split == Split::Test {
                if let Some(keep) = &options.test_images {
                    if !keep.contains(image) {
                        continue;
                    }
                }
            }
            let captions = corpus.captions_of(image);
            match options.granularity {
                Granularity::PerCaption => {
                    for c in captions {
                        out.push(Unit {
                            split,
                            image,
                            caption: Some(c),
                            sample_id: c.0.clone(),
                        });
                    }
                }
                Granularity::PerImage => out.push(Unit {
                    split,
                    image,
                    caption: captions.first(),
                    sample_id: image.0.clone(),
                }),
            }
        }
    }
    out
}

fn vector_for(emb: &EmbeddingSet, unit: &Unit) -> Result<Vec<f64>> {
    let key = if emb.modality().keyed_by_image() {
        Some(unit.image.0.as_str())
    } else {
        unit.caption.map(|c| c.0.as_str())
    };
    key.and_then(|k| emb.get(k))
        .map(<[f64]>::to_vec)
        .ok_or_else(|| {
            Error::Pairing(format!(
                "no {} vector for sample {} in {}",
                emb.modality(),
                unit.sample_id,
                emb.model_name()
            ))
        })
}

fn assemble(
    task: TaskKind,
    class_names: Vec<String>,
    emb: &EmbeddingSet,
    labeled: Vec<(&Unit, usize, Vec<f64>)>,
) -> Result<ProbeTaskDataset> {
    let mut splits: BTreeMap<Split, Vec<Sample>> = Split::ALL.iter().map(|&s| (s, Vec::new())).collect();
    for (unit, label, vector) in labeled {
        splits.entry(unit.split).or_default().push(Sample {
            sample_id: unit.sample_id.clone(),
            label,
            vector,
        });
    }
    ProbeTaskDataset::new(
        task,
        class_names,
        emb.dim(),
        emb.model_name(),
        emb.modality().variant(),
        splits,
    )
}

/// Image-caption pairs whose image shows exactly one distinct category
/// (possibly several times), labeled with that category. Classes are the
/// corpus categories in ascending id order.
pub fn build_object_categories(
    corpus: &CorpusIndex,
    splits: &SplitAssignment,
    embeddings: &EmbeddingSet,
    options: &TaskOptions,
) -> Result<ProbeTaskDataset> {
    let class_of: BTreeMap<_, usize> = corpus
        .categories()
        .keys()
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();
    let names = corpus.categories().values().map(|c| c.name.clone()).collect();
    let units = units(corpus, splits, options);
    let mut labeled = Vec::new();
    for unit in &units {
        let present = corpus.categories_present(unit.image)?;
        if present.len() != 1 {
            continue;
        }
        let cat = present.into_iter().next().expect("one category");
        labeled.push((unit, class_of[&cat], vector_for(embeddings, unit)?));
    }
    assemble(TaskKind::ObjectCategories, names, embeddings, labeled)
}

/// Every image-caption pair, labeled with the bin of its image's object count.
pub fn build_num_objects(
    corpus: &CorpusIndex,
    splits: &SplitAssignment,
    embeddings: &EmbeddingSet,
    options: &TaskOptions,
) -> Result<ProbeTaskDataset> {
    let units = units(corpus, splits, options);
    let mut labeled = Vec::with_capacity(units.len());
    for unit in &units {
        let count = corpus.count_object_instances_with(unit.image, options.crowd)?;
        labeled.push((unit, bin_num_objects(count), vector_for(embeddings, unit)?));
    }
    assemble(TaskKind::NumObjects, bin_names(), embeddings, labeled)
}

/// Per-caption choice between the original (0) and modified (1) caption.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlipTable(pub BTreeMap<CaptionId, u8>);

impl FlipTable {
    /// One fair coin per caption, seeded from `(seed, caption id)`.
    pub fn draw<'a>(captions: impl IntoIterator<Item = &'a CaptionId>, seed: u64) -> Self {
        FlipTable(
            captions
                .into_iter()
                .map(|c| (c.clone(), u8::from(seed::rng_for(seed, &c.0).gen_bool(0.5))))
                .collect(),
        )
    }

    pub fn modified_fraction(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.values().filter(|&&v| v == 1).count() as f64 / self.0.len() as f64
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let table: FlipTable = serde_json::from_slice(&bytes).map_err(|e| {
            Error::parse(path, format!("line {} column {}", e.line(), e.column()), e)
        })?;
        if let Some((id, v)) = table.0.iter().find(|(_, v)| **v > 1) {
            return Err(Error::parse(path, &id.0, format!("flip value {v} is not 0 or 1")));
        }
        Ok(table)
    }
}

/// Original-vs-modified caption classification.
///
/// Only captions with a tamper record take part. With `flips` given, that
/// table is reused verbatim and must cover exactly those captions;
/// otherwise a fresh table is drawn from `seed`. Returns the dataset and
/// the table that was applied.
#[allow(clippy::too_many_arguments)]
pub fn build_semantic_congruence(
    corpus: &CorpusIndex,
    splits: &SplitAssignment,
    tampered: &BTreeMap<CaptionId, TamperedCaption>,
    embeddings_original: &EmbeddingSet,
    embeddings_tampered: &EmbeddingSet,
    flips: Option<&FlipTable>,
    seed: u64,
    options: &TaskOptions,
) -> Result<(ProbeTaskDataset, FlipTable)> {
    if embeddings_original.dim() != embeddings_tampered.dim() {
        return Err(Error::Contract(format!(
            "original and tampered embeddings differ in dimension ({} vs {})",
            embeddings_original.dim(),
            embeddings_tampered.dim()
        )));
    }
    let options = TaskOptions {
        granularity: Granularity::PerCaption,
        ..options.clone()
    };
    let units: Vec<Unit> = units(corpus, splits, &options)
        .into_iter()
        .filter(|u| u.caption.is_some_and(|c| tampered.contains_key(c)))
        .collect();
    let eligible: Vec<&CaptionId> = units.iter().filter_map(|u| u.caption).collect();

    let table = match flips {
        Some(t) => {
            let wanted: BTreeSet<&CaptionId> = eligible.iter().copied().collect();
            let have: BTreeSet<&CaptionId> = t.0.keys().collect();
            if wanted != have {
                let missing = wanted.difference(&have).next();
                let extra = have.difference(&wanted).next();
                return Err(Error::Consistency(format!(
                    "flip table does not match the tampered captions (first missing: {:?}, first extra: {:?})",
                    missing.map(|c| &c.0),
                    extra.map(|c| &c.0)
                )));
            }
            t.clone()
        }
        None => FlipTable::draw(eligible.iter().copied(), seed),
    };

    let mut labeled = Vec::with_capacity(units.len());
    for unit in &units {
        let caption = unit.caption.expect("filtered");
        let label = usize::from(table.0[caption]);
        let source = if label == 1 {
            embeddings_tampered
        } else {
            embeddings_original
        };
        labeled.push((unit, label, vector_for(source, unit)?));
    }
    let names = vec!["original".to_string(), "modified".to_string()];
    let dataset = assemble(TaskKind::SemanticCongruence, names, embeddings_original, labeled)?;
    Ok((dataset, table))
}

/// Accuracy of always predicting the most frequent training label (lowest
/// index on ties) on the test split, from label histograms.
pub fn majority_baseline_from_counts(train: &[usize], test: &[usize]) -> Result<f64> {
    let test_total: usize = test.iter().sum();
    if train.iter().sum::<usize>() == 0 || test_total == 0 {
        return Err(Error::Contract("majority baseline needs nonempty train and test splits".into()));
    }
    let mut majority = 0;
    for (i, &c) in train.iter().enumerate() {
        if c > train[majority] {
            majority = i;
        }
    }
    let hits = test.get(majority).copied().unwrap_or(0);
    Ok(hits as f64 / test_total as f64)
}

pub fn majority_baseline(dataset: &ProbeTaskDataset) -> Result<f64> {
    majority_baseline_from_counts(
        &dataset.label_counts(Split::Train),
        &dataset.label_counts(Split::Test),
    )
}
