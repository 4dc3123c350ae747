//! COCO-style corpus ingestion.
//!
//! Images, captions, category taxonomy and object-instance records are read
//! from the de-facto COCO annotation schema and cross-referenced into an
//! immutable [`CorpusIndex`]. Numeric dataset ids are mapped onto canonical
//! string ids: images become `img:<n>`, captions `cap:<n>#<k>` where `k` is
//! the rank of the caption among the image's captions by source caption id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tasks::bin_num_objects;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaptionId(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub u32);

impl ImageId {
    pub fn from_number(n: u64) -> Self {
        ImageId(format!("img:{n}"))
    }

    /// The numeric source id, when the id follows the `img:<n>` convention.
    pub fn number(&self) -> Option<u64> {
        self.0.strip_prefix("img:")?.parse().ok()
    }
}

impl CaptionId {
    pub fn for_image(image_number: u64, k: usize) -> Self {
        CaptionId(format!("cap:{image_number}#{k}"))
    }
}

impl fmt::Display for ImageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for CaptionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub number: u64,
    pub file_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caption {
    pub image: ImageId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    pub supercategory: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instance {
    pub image: ImageRef,
    pub category: CategoryId,
    pub crowd: bool,
}

/// Index of an image inside [`CorpusIndex`]; instances reference images by
/// position to keep the record `Copy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImageRef(pub usize);

/// How crowd-flagged instance records contribute to object counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrowdPolicy {
    /// Each crowd record counts as one instance.
    #[default]
    CountOnce,
    Exclude,
}

/// Cross-referenced, immutable corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusIndex {
    images: BTreeMap<ImageId, ImageMeta>,
    image_order: Vec<ImageId>,
    captions: BTreeMap<CaptionId, Caption>,
    categories: BTreeMap<CategoryId, Category>,
    instances: Vec<Instance>,
    instances_by_image: Vec<Vec<usize>>,
    captions_by_image: BTreeMap<ImageId, Vec<CaptionId>>,
}

/// Builder input for [`CorpusIndex::new`]: instances refer to images by id.
#[derive(Debug, Clone, Default)]
pub struct RawCorpus {
    pub images: Vec<(ImageId, ImageMeta)>,
    pub captions: Vec<(CaptionId, Caption)>,
    pub categories: Vec<(CategoryId, Category)>,
    pub instances: Vec<(ImageId, CategoryId, bool)>,
}

impl CorpusIndex {
    /// Cross-reference raw records. Rejects duplicate ids and dangling references.
    pub fn new(raw: RawCorpus) -> Result<Self> {
        let mut images = BTreeMap::new();
        for (id, meta) in raw.images {
            if images.insert(id.clone(), meta).is_some() {
                return Err(Error::Integrity(format!("duplicate image id {id}")));
            }
        }
        let image_order: Vec<ImageId> = images.keys().cloned().collect();
        let position: BTreeMap<&ImageId, usize> =
            image_order.iter().enumerate().map(|(i, id)| (id, i)).collect();

        let mut categories = BTreeMap::new();
        for (id, cat) in raw.categories {
            if categories.insert(id, cat).is_some() {
                return Err(Error::Integrity(format!("duplicate category id {id}")));
            }
        }

        let mut captions = BTreeMap::new();
        let mut captions_by_image: BTreeMap<ImageId, Vec<CaptionId>> = BTreeMap::new();
        for (id, cap) in raw.captions {
            if !images.contains_key(&cap.image) {
                return Err(Error::Integrity(format!(
                    "caption {id} references unknown image {}",
                    cap.image
                )));
            }
            captions_by_image
                .entry(cap.image.clone())
                .or_default()
                .push(id.clone());
            if captions.insert(id.clone(), cap).is_some() {
                return Err(Error::Integrity(format!("duplicate caption id {id}")));
            }
        }
        for ids in captions_by_image.values_mut() {
            ids.sort();
        }

        let mut instances = Vec::with_capacity(raw.instances.len());
        let mut instances_by_image = vec![Vec::new(); image_order.len()];
        for (n, (image, category, crowd)) in raw.instances.into_iter().enumerate() {
            let Some(&pos) = position.get(&image) else {
                return Err(Error::Integrity(format!(
                    "instance #{n} references unknown image {image}"
                )));
            };
            if !categories.contains_key(&category) {
                return Err(Error::Integrity(format!(
                    "instance #{n} references unknown category {category}"
                )));
            }
            instances_by_image[pos].push(instances.len());
            instances.push(Instance {
                image: ImageRef(pos),
                category,
                crowd,
            });
        }

        Ok(CorpusIndex {
            images,
            image_order,
            captions,
            categories,
            instances,
            instances_by_image,
            captions_by_image,
        })
    }

    pub fn images(&self) -> &BTreeMap<ImageId, ImageMeta> {
        &self.images
    }

    pub fn captions(&self) -> &BTreeMap<CaptionId, Caption> {
        &self.captions
    }

    pub fn categories(&self) -> &BTreeMap<CategoryId, Category> {
        &self.categories
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn image_of_instance(&self, instance: &Instance) -> &ImageId {
        &self.image_order[instance.image.0]
    }

    pub fn caption(&self, id: &CaptionId) -> Result<&Caption> {
        self.captions.get(id).ok_or_else(|| Error::Lookup {
            kind: "caption",
            id: id.0.clone(),
        })
    }

    /// Caption ids of an image in ascending order (empty if it has none).
    pub fn captions_of(&self, image: &ImageId) -> &[CaptionId] {
        self.captions_by_image
            .get(image)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn supercategories(&self) -> BTreeSet<&str> {
        self.categories
            .values()
            .map(|c| c.supercategory.as_str())
            .collect()
    }

    fn image_instances(&self, image: &ImageId) -> Result<impl Iterator<Item = &Instance>> {
        let pos = self
            .image_order
            .binary_search(image)
            .map_err(|_| Error::Lookup {
                kind: "image",
                id: image.0.clone(),
            })?;
        Ok(self.instances_by_image[pos]
            .iter()
            .map(move |&i| &self.instances[i]))
    }

    /// Number of instance records for the image; crowd records count once each.
    pub fn count_object_instances(&self, image: &ImageId) -> Result<usize> {
        self.count_object_instances_with(image, CrowdPolicy::CountOnce)
    }

    pub fn count_object_instances_with(
        &self,
        image: &ImageId,
        policy: CrowdPolicy,
    ) -> Result<usize> {
        Ok(self
            .image_instances(image)?
            .filter(|inst| policy == CrowdPolicy::CountOnce || !inst.crowd)
            .count())
    }

    /// Distinct categories annotated on the image.
    pub fn categories_present(&self, image: &ImageId) -> Result<BTreeSet<CategoryId>> {
        Ok(self.image_instances(image)?.map(|i| i.category).collect())
    }
}

// ---------------------------------------------------------------------------
// COCO schema

#[derive(Deserialize)]
struct CocoInstancesFile {
    images: Vec<CocoImage>,
    #[serde(default)]
    annotations: Vec<CocoInstance>,
    categories: Vec<CocoCategory>,
}

#[derive(Serialize, Deserialize)]
struct CocoImage {
    id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file_name: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CocoInstance {
    image_id: u64,
    category_id: u32,
    #[serde(default)]
    iscrowd: u8,
}

#[derive(Serialize, Deserialize)]
struct CocoCategory {
    id: u32,
    name: String,
    #[serde(default)]
    supercategory: String,
}

#[derive(Deserialize)]
struct CocoCaptionsFile {
    annotations: Vec<CocoCaption>,
}

#[derive(Serialize, Deserialize)]
struct CocoCaption {
    id: u64,
    image_id: u64,
    caption: String,
}

#[derive(Serialize)]
struct CocoInstancesOut {
    images: Vec<CocoImage>,
    annotations: Vec<CocoInstance>,
    categories: Vec<CocoCategory>,
}

#[derive(Serialize)]
struct CocoCaptionsOut {
    annotations: Vec<CocoCaption>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| {
        Error::parse(
            path,
            format!("line {} column {}", e.line(), e.column()),
            e,
        )
    })
}

/// Load a COCO instances file and a COCO captions file.
///
/// Unknown fields are ignored. Duplicate ids and dangling references are
/// rejected with an integrity error.
pub fn load_corpus(instances_path: impl AsRef<Path>, captions_path: impl AsRef<Path>) -> Result<CorpusIndex> {
    let inst: CocoInstancesFile = read_json(instances_path.as_ref())?;
    let caps: CocoCaptionsFile = read_json(captions_path.as_ref())?;

    let mut raw = RawCorpus::default();
    for img in inst.images {
        raw.images.push((
            ImageId::from_number(img.id),
            ImageMeta {
                number: img.id,
                file_name: img.file_name,
            },
        ));
    }
    for cat in inst.categories {
        raw.categories.push((
            CategoryId(cat.id),
            Category {
                name: cat.name,
                supercategory: cat.supercategory,
            },
        ));
    }
    for a in inst.annotations {
        raw.instances
            .push((ImageId::from_number(a.image_id), CategoryId(a.category_id), a.iscrowd != 0));
    }

    raw.captions = caption_records(caps, captions_path.as_ref())?;
    CorpusIndex::new(raw)
}

/// Caption records keyed `cap:<image>#<k>`, `k` ranking by source caption id.
fn caption_records(caps: CocoCaptionsFile, path: &Path) -> Result<Vec<(CaptionId, Caption)>> {
    let mut seen = BTreeSet::new();
    let mut per_image: BTreeMap<u64, Vec<(u64, String)>> = BTreeMap::new();
    for c in caps.annotations {
        if !seen.insert(c.id) {
            return Err(Error::Integrity(format!(
                "{}: duplicate caption id {}",
                path.display(),
                c.id
            )));
        }
        per_image.entry(c.image_id).or_default().push((c.id, c.caption));
    }
    let mut out = Vec::new();
    for (image, mut caps) in per_image {
        caps.sort_by_key(|(id, _)| *id);
        for (k, (_, text)) in caps.into_iter().enumerate() {
            out.push((
                CaptionId::for_image(image, k),
                Caption {
                    image: ImageId::from_number(image),
                    text,
                },
            ));
        }
    }
    Ok(out)
}

/// Load only a COCO captions file; images are implied by the captions and
/// the corpus has no categories or instances.
pub fn load_captions(captions_path: impl AsRef<Path>) -> Result<CorpusIndex> {
    let path = captions_path.as_ref();
    let caps: CocoCaptionsFile = read_json(path)?;
    let captions = caption_records(caps, path)?;
    let mut images: BTreeMap<ImageId, ImageMeta> = BTreeMap::new();
    for (_, c) in &captions {
        images.entry(c.image.clone()).or_insert_with(|| ImageMeta {
            number: c.image.number().expect("numeric image id"),
            file_name: None,
        });
    }
    CorpusIndex::new(RawCorpus {
        images: images.into_iter().collect(),
        captions,
        ..RawCorpus::default()
    })
}

/// Write the corpus back in the COCO schema. Caption source ids are
/// renumbered sequentially in caption-id order, which preserves `k`.
pub fn save_corpus(
    corpus: &CorpusIndex,
    instances_path: impl AsRef<Path>,
    captions_path: impl AsRef<Path>,
) -> Result<()> {
    let out = CocoInstancesOut {
        images: corpus
            .images
            .values()
            .map(|m| CocoImage {
                id: m.number,
                file_name: m.file_name.clone(),
            })
            .collect(),
        annotations: corpus
            .instances
            .iter()
            .map(|i| CocoInstance {
                image_id: corpus.images[corpus.image_of_instance(i)].number,
                category_id: i.category.0,
                iscrowd: u8::from(i.crowd),
            })
            .collect(),
        categories: corpus
            .categories
            .iter()
            .map(|(id, c)| CocoCategory {
                id: id.0,
                name: c.name.clone(),
                supercategory: c.supercategory.clone(),
            })
            .collect(),
    };
    write_json(instances_path.as_ref(), &out)?;

    // Sort by (image number, k) so reloading assigns the same ranks.
    let mut caps: Vec<(u64, usize, &CaptionId, &Caption)> = Vec::new();
    for (id, cap) in &corpus.captions {
        let number = corpus.images[&cap.image].number;
        let k = caption_rank(id).ok_or_else(|| {
            Error::Contract(format!("caption id {id} does not follow cap:<n>#<k>"))
        })?;
        caps.push((number, k, id, cap));
    }
    caps.sort_by_key(|&(n, k, _, _)| (n, k));
    let out = CocoCaptionsOut {
        annotations: caps
            .into_iter()
            .enumerate()
            .map(|(seq, (n, _, _, cap))| CocoCaption {
                id: seq as u64 + 1,
                image_id: n,
                caption: cap.text.clone(),
            })
            .collect(),
    };
    write_json(captions_path.as_ref(), &out)
}

fn caption_rank(id: &CaptionId) -> Option<usize> {
    id.0.rsplit_once('#')?.1.parse().ok()
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Contract(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Splits

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn from_name(name: &str) -> Option<Split> {
        match name {
            "train" => Some(Split::Train),
            "val" | "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Disjoint train/validation/test assignment covering every corpus image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    split: BTreeMap<ImageId, Split>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SplitEntry {
    Number(u64),
    Id(String),
}

impl SplitEntry {
    fn image_id(self) -> ImageId {
        match self {
            SplitEntry::Number(n) => ImageId::from_number(n),
            SplitEntry::Id(s) if s.starts_with("img:") => ImageId(s),
            SplitEntry::Id(s) => match s.parse::<u64>() {
                Ok(n) => ImageId::from_number(n),
                Err(_) => ImageId(s),
            },
        }
    }
}

impl SplitAssignment {
    /// Validate an assignment against the corpus.
    pub fn new(split: BTreeMap<ImageId, Split>, corpus: &CorpusIndex) -> Result<Self> {
        if let Some(id) = split.keys().find(|id| !corpus.images.contains_key(*id)) {
            return Err(Error::Integrity(format!("split lists unknown image {id}")));
        }
        if let Some(id) = corpus.images.keys().find(|id| !split.contains_key(*id)) {
            return Err(Error::Integrity(format!(
                "image {id} is not assigned to any split"
            )));
        }
        Ok(SplitAssignment { split })
    }

    /// Deterministic random assignment with the given train/validation
    /// fractions; the remainder goes to test.
    pub fn random(corpus: &CorpusIndex, train: f64, validation: f64, seed: u64) -> Self {
        let split = corpus
            .images
            .keys()
            .map(|id| {
                let u: f64 = seed::rng_for(seed, &id.0).gen();
                let s = if u < train {
                    Split::Train
                } else if u < train + validation {
                    Split::Validation
                } else {
                    Split::Test
                };
                (id.clone(), s)
            })
            .collect();
        SplitAssignment { split }
    }

    pub fn get(&self, image: &ImageId) -> Option<Split> {
        self.split.get(image).copied()
    }

    pub fn images_in(&self, split: Split) -> impl Iterator<Item = &ImageId> {
        self.split
            .iter()
            .filter(move |(_, s)| **s == split)
            .map(|(id, _)| id)
    }

    pub fn sizes(&self) -> BTreeMap<Split, usize> {
        let mut out: BTreeMap<Split, usize> = Split::ALL.iter().map(|&s| (s, 0)).collect();
        for s in self.split.values() {
            *out.entry(*s).or_default() += 1;
        }
        out
    }

    /// Serialize as `{split-name: [image ids]}`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut doc: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (id, s) in &self.split {
            doc.entry(s.name()).or_default().push(&id.0);
        }
        write_json(path.as_ref(), &doc)
    }
}

/// Load a split file mapping split name to image ids (numbers or `img:<n>`).
pub fn load_splits(path: impl AsRef<Path>, corpus: &CorpusIndex) -> Result<SplitAssignment> {
    let path = path.as_ref();
    let doc: BTreeMap<String, Vec<SplitEntry>> = read_json(path)?;
    let mut split = BTreeMap::new();
    for (name, entries) in doc {
        let s = Split::from_name(&name)
            .ok_or_else(|| Error::parse(path, format!("split `{name}`"), "unknown split name"))?;
        for entry in entries {
            let id = entry.image_id();
            if let Some(prev) = split.insert(id.clone(), s) {
                return Err(Error::Integrity(format!(
                    "image {id} assigned to both {prev} and {s}"
                )));
            }
        }
    }
    SplitAssignment::new(split, corpus)
}

/// Load a plain list of image ids (JSON array), e.g. a restricted test set.
pub fn load_image_list(path: impl AsRef<Path>) -> Result<BTreeSet<ImageId>> {
    let entries: Vec<SplitEntry> = read_json(path.as_ref())?;
    Ok(entries.into_iter().map(SplitEntry::image_id).collect())
}

// ---------------------------------------------------------------------------
// Synthetic corpora

const COCO_CATEGORIES: &str = include_str!("../data/coco_categories.tsv");

/// The 80-category COCO taxonomy used by the synthetic generator.
pub fn coco_taxonomy() -> Vec<(CategoryId, Category)> {
    COCO_CATEGORIES
        .lines()
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut cols = line.split('\t');
            let id = cols.next().and_then(|s| s.parse().ok()).expect("category id");
            let name = cols.next().expect("category name").to_string();
            let supercategory = cols.next().expect("supercategory").to_string();
            (CategoryId(id), Category { name, supercategory })
        })
        .collect()
}

/// What the generator drew for one image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundTruth {
    pub image: ImageId,
    pub count: usize,
    pub categories: BTreeSet<CategoryId>,
    pub bin: usize,
}

pub const SYNTHETIC_CAPTIONS_PER_IMAGE: usize = 5;

/// Generate a deterministic corpus over the COCO taxonomy.
///
/// Each image draws an instance count uniformly from `0..=max_instances`,
/// a number of distinct categories (one with probability 1/2, otherwise up
/// to four), and five template captions mentioning its categories. About 2%
/// of instance records are crowd-flagged.
pub fn generate_synthetic_corpus(
    num_images: usize,
    max_instances: usize,
    seed: u64,
) -> (CorpusIndex, Vec<GroundTruth>) {
    let taxonomy = coco_taxonomy();
    let mut rng = seed::rng_for(seed, "synthetic-corpus");
    let mut raw = RawCorpus {
        categories: taxonomy.clone(),
        ..RawCorpus::default()
    };
    let mut truth = Vec::with_capacity(num_images);

    for n in 1..=num_images as u64 {
        let image = ImageId::from_number(n);
        raw.images.push((
            image.clone(),
            ImageMeta {
                number: n,
                file_name: Some(format!("synthetic_{n:06}.jpg")),
            },
        ));

        let count = rng.gen_range(0..=max_instances);
        let distinct = match count {
            0 => 0,
            _ if rng.gen_bool(0.5) => 1,
            _ => rng.gen_range(1..=count.min(4)),
        };
        let chosen: Vec<CategoryId> = sample(&mut rng, taxonomy.len(), distinct)
            .into_iter()
            .map(|i| taxonomy[i].0)
            .collect();
        let mut per_category = vec![0usize; distinct];
        for slot in 0..count {
            let c = if slot < distinct {
                slot
            } else {
                rng.gen_range(0..distinct)
            };
            per_category[c] += 1;
            raw.instances
                .push((image.clone(), chosen[c], rng.gen_bool(0.02)));
        }

        let names: Vec<(&str, usize)> = chosen
            .iter()
            .zip(&per_category)
            .map(|(id, &k)| {
                let name = taxonomy
                    .iter()
                    .find(|(cid, _)| cid == id)
                    .map(|(_, c)| c.name.as_str())
                    .unwrap_or("thing");
                (name, k)
            })
            .collect();
        for (k, text) in synthetic_captions(&names).into_iter().enumerate() {
            raw.captions.push((
                CaptionId::for_image(n, k),
                Caption {
                    image: image.clone(),
                    text,
                },
            ));
        }

        truth.push(GroundTruth {
            image,
            count,
            categories: chosen.into_iter().collect(),
            bin: bin_num_objects(count),
        });
    }

    let corpus = CorpusIndex::new(raw).expect("generator produces a consistent corpus");
    (corpus, truth)
}

fn number_word(n: usize) -> String {
    const WORDS: [&str; 13] = [
        "no", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve",
    ];
    WORDS
        .get(n)
        .map(|w| w.to_string())
        .unwrap_or_else(|| "many".to_string())
}

fn phrase(name: &str, count: usize) -> String {
    if count == 1 {
        let article = if name.starts_with(['a', 'e', 'i', 'o', 'u']) {
            "an"
        } else {
            "a"
        };
        format!("{article} {name}")
    } else {
        format!("{} {name}s", number_word(count))
    }
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn synthetic_captions(objects: &[(&str, usize)]) -> Vec<String> {
    if objects.is_empty() {
        return vec![
            "An empty scene with nothing in it.".to_string(),
            "A blurry picture of a plain wall.".to_string(),
            "There is nothing to see in this photo.".to_string(),
            "A view of an empty room.".to_string(),
            "A dark image with no objects.".to_string(),
        ];
    }
    let phrases: Vec<String> = objects.iter().map(|&(n, k)| phrase(n, k)).collect();
    let list = join_list(&phrases);
    let (first, _) = objects[0];
    vec![
        format!("A photo showing {list}."),
        format!("There is {} in this scene.", phrases[0]),
        format!("Some {first} next to other things."),
        format!("An image of {list} in a room."),
        format!("A view with a {first} in it."),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CorpusIndex {
        let cat = |id: u32, name: &str| {
            (
                CategoryId(id),
                Category {
                    name: name.into(),
                    supercategory: "animal".into(),
                },
            )
        };
        let img = |n: u64| (ImageId::from_number(n), ImageMeta { number: n, file_name: None });
        CorpusIndex::new(RawCorpus {
            images: vec![img(1), img(2)],
            captions: vec![(
                CaptionId::for_image(1, 0),
                Caption {
                    image: ImageId::from_number(1),
                    text: "two cats and a dog".into(),
                },
            )],
            categories: vec![cat(17, "cat"), cat(18, "dog")],
            instances: vec![
                (ImageId::from_number(1), CategoryId(17), false),
                (ImageId::from_number(1), CategoryId(17), true),
                (ImageId::from_number(1), CategoryId(18), false),
            ],
        })
        .unwrap()
    }

    #[test]
    fn counts_and_categories() {
        let c = tiny();
        let one = ImageId::from_number(1);
        let two = ImageId::from_number(2);
        assert_eq!(c.count_object_instances(&one).unwrap(), 3);
        assert_eq!(
            c.count_object_instances_with(&one, CrowdPolicy::Exclude).unwrap(),
            2
        );
        assert_eq!(
            c.categories_present(&one).unwrap(),
            [CategoryId(17), CategoryId(18)].into_iter().collect()
        );
        assert_eq!(c.count_object_instances(&two).unwrap(), 0);
        assert!(c.categories_present(&two).unwrap().is_empty());
    }

    #[test]
    fn unknown_image_is_a_lookup_error() {
        let c = tiny();
        let err = c.count_object_instances(&ImageId::from_number(9)).unwrap_err();
        assert!(matches!(err, Error::Lookup { kind: "image", .. }));
        assert!(c.categories_present(&ImageId::from_number(9)).is_err());
    }

    #[test]
    fn dangling_category_is_rejected() {
        let raw = RawCorpus {
            images: vec![(ImageId::from_number(1), ImageMeta { number: 1, file_name: None })],
            instances: vec![(ImageId::from_number(1), CategoryId(5), false)],
            ..RawCorpus::default()
        };
        assert!(matches!(CorpusIndex::new(raw), Err(Error::Integrity(_))));
    }

    #[test]
    fn taxonomy_has_eighty_categories() {
        let t = coco_taxonomy();
        assert_eq!(t.len(), 80);
        let ids: BTreeSet<_> = t.iter().map(|(id, _)| *id).collect();
        assert_eq!(ids.len(), 80);
    }

    #[test]
    fn synthetic_ground_truth_matches_index() {
        let (corpus, truth) = generate_synthetic_corpus(50, 40, 3);
        for gt in &truth {
            assert_eq!(corpus.count_object_instances(&gt.image).unwrap(), gt.count);
            assert_eq!(corpus.categories_present(&gt.image).unwrap(), gt.categories);
            assert_eq!(corpus.captions_of(&gt.image).len(), SYNTHETIC_CAPTIONS_PER_IMAGE);
        }
    }

    #[test]
    fn phrases_read_naturally() {
        assert_eq!(phrase("apple", 1), "an apple");
        assert_eq!(phrase("cat", 3), "three cats");
        assert_eq!(
            join_list(&["a".into(), "b".into(), "c".into()]),
            "a, b and c"
        );
    }
}
