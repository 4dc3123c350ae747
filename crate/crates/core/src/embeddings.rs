//! Precomputed embedding vectors and their merged variants.
//!
//! A manifest is a JSON header line followed by one JSON record per line:
//!
//! ```text
//! {"model_name":"vsepp","modality":"text","dim":4,"count":2}
//! {"id":"cap:1#0","vector":[0.1,0.2,0.3,0.4]}
//! {"id":"cap:1#1","vector":[1e-3,0.0,-2.5,7]}
//! ```
//!
//! Components are stored as 32-bit floats on disk and widened to `f64` in
//! memory. Text and merged sets are keyed by caption id, image sets by image id.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::corpus::{CaptionId, CorpusIndex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modality {
    Text,
    Image,
    MergedAvg,
    MergedConcat,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::MergedAvg => "merged-avg",
            Modality::MergedConcat => "merged-concat",
        }
    }

    /// Short variant label used in reports: text / image / avg / conc.
    pub fn variant(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Image => "image",
            Modality::MergedAvg => "avg",
            Modality::MergedConcat => "conc",
        }
    }

    /// True when sample ids are image ids rather than caption ids.
    pub fn keyed_by_image(self) -> bool {
        self == Modality::Image
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(Modality::Text),
            "image" => Ok(Modality::Image),
            "merged-avg" | "avg" => Ok(Modality::MergedAvg),
            "merged-concat" | "conc" | "concat" => Ok(Modality::MergedConcat),
            other => Err(format!("unknown modality `{other}`")),
        }
    }
}

/// Id-keyed vectors of one dimension for one model and modality.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    model_name: String,
    modality: Modality,
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingSet {
    /// Build a set, checking dimension and finiteness of every vector.
    pub fn new(
        model_name: impl Into<String>,
        modality: Modality,
        dim: usize,
        vectors: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("embedding dimension must be positive".into()));
        }
        for (id, v) in &vectors {
            check_vector(id, v, dim).map_err(Error::Contract)?;
        }
        Ok(EmbeddingSet {
            model_name: model_name.into(),
            modality,
            dim,
            vectors,
        })
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Write the manifest. Components are written as `f32`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = ManifestHeader {
            model_name: self.model_name.clone(),
            modality: self.modality,
            dim: self.dim,
            count: self.vectors.len(),
        };
        let io = |e| Error::io(path, e);
        serde_json::to_writer(&mut w, &header).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(io)?;
        for (id, v) in &self.vectors {
            let id = serde_json::to_string(id).map_err(|e| Error::io(path, e.into()))?;
            write!(w, "{{\"id\":{id},\"vector\":[").map_err(io)?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    w.write_all(b",").map_err(io)?;
                }
                write!(w, "{}", *x as f32).map_err(io)?;
            }
            w.write_all(b"]}\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

fn check_vector(id: &str, v: &[f64], dim: usize) -> std::result::Result<(), String> {
    if v.len() != dim {
        return Err(format!(
            "vector `{id}` has {} components, expected {dim}",
            v.len()
        ));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(format!("vector `{id}` has non-finite component at {i}"));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ManifestHeader {
    model_name: String,
    modality: Modality,
    dim: usize,
    count: usize,
}

#[derive(Deserialize)]
struct ManifestRecord<'a> {
    id: String,
    #[serde(borrow)]
    vector: Vec<&'a RawValue>,
}

/// Load an embedding manifest.
pub fn load_embeddings(manifest_path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = manifest_path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header: ManifestHeader = loop {
        match lines.next() {
            Some((n, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line)
                    .map_err(|e| Error::parse(path, format!("line {}", n + 1), e))?;
            }
            None => return Err(Error::parse(path, "line 1", "missing manifest header")),
        }
    };
    if header.dim == 0 {
        return Err(Error::parse(path, "line 1", "declared dim must be positive"));
    }

    let mut vectors = BTreeMap::new();
    for (n, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let loc = format!("line {}", n + 1);
        let record: ManifestRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, &loc, e))?;
        let mut v = Vec::with_capacity(record.vector.len());
        for raw in &record.vector {
            let x: f32 = raw.get().trim().parse().map_err(|_| {
                Error::parse(path, &loc, format!("`{}` is not a number", raw.get()))
            })?;
            v.push(f64::from(x));
        }
        check_vector(&record.id, &v, header.dim).map_err(|m| Error::parse(path, &loc, m))?;
        if vectors.insert(record.id.clone(), v).is_some() {
            return Err(Error::parse(path, &loc, format!("duplicate id `{}`", record.id)));
        }
    }
    if vectors.len() != header.count {
        return Err(Error::parse(
            path,
            "header",
            format!("declared count {} but found {} records", header.count, vectors.len()),
        ));
    }
    Ok(EmbeddingSet {
        model_name: header.model_name,
        modality: header.modality,
        dim: header.dim,
        vectors,
    })
}

/// A caption id with its text vector and its image's vector.
type Pair<'a> = (&'a str, &'a [f64], &'a [f64]);

fn paired<'a>(
    text: &'a EmbeddingSet,
    image: &'a EmbeddingSet,
    corpus: &CorpusIndex,
) -> Result<Vec<Pair<'a>>> {
    if text.modality.keyed_by_image() || !image.modality.keyed_by_image() {
        return Err(Error::Contract(format!(
            "merging expects (text, image) sets, got ({}, {})",
            text.modality, image.modality
        )));
    }
    text.iter()
        .map(|(cid, tv)| {
            let cap = corpus
                .captions()
                .get(&CaptionId(cid.to_string()))
                .ok_or_else(|| Error::Pairing(format!("caption {cid} is not in the corpus")))?;
            let iv = image.get(&cap.image.0).ok_or_else(|| {
                Error::Pairing(format!(
                    "caption {cid}: no image vector for {}",
                    cap.image
                ))
            })?;
            Ok((cid, tv, iv))
        })
        .collect()
}

/// Elementwise mean of each caption vector with its image vector.
pub fn merge_avg(
    text: &EmbeddingSet,
    image: &EmbeddingSet,
    corpus: &CorpusIndex,
) -> Result<EmbeddingSet> {
    if text.dim != image.dim {
        return Err(Error::Contract(format!(
            "cannot average dimensions {} and {}",
            text.dim, image.dim
        )));
    }
    let vectors = paired(text, image, corpus)?
        .into_iter()
        .map(|(id, t, i)| {
            let v = t.iter().zip(i).map(|(a, b)| (a + b) / 2.0).collect();
            (id.to_string(), v)
        })
        .collect();
    Ok(EmbeddingSet {
        model_name: text.model_name.clone(),
        modality: Modality::MergedAvg,
        dim: text.dim,
        vectors,
    })
}

/// Caption vector followed by its image vector.
pub fn merge_concat(
    text: &EmbeddingSet,
    image: &EmbeddingSet,
    corpus: &CorpusIndex,
) -> Result<EmbeddingSet> {
    let vectors = paired(text, image, corpus)?
        .into_iter()
        .map(|(id, t, i)| {
            let mut v = Vec::with_capacity(t.len() + i.len());
            v.extend_from_slice(t);
            v.extend_from_slice(i);
            (id.to_string(), v)
        })
        .collect();
    Ok(EmbeddingSet {
        model_name: text.model_name.clone(),
        modality: Modality::MergedConcat,
        dim: text.dim + image.dim,
        vectors,
    })
}
