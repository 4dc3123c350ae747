//! Caption tampering: replace the linguistic head of a caption with a word
//! from the same lexicographer category, inflected and capitalized like the
//! original, and keep the most plausible of several such variants.
//!
//! Per caption the pipeline runs:
//!
//! 1. take the root of the dependency parse as the head word;
//! 2. disambiguate it with simplified Lesk against the rest of the caption;
//! 3. collect same-category replacement lemmas (frame-matching verbs first);
//! 4. shuffle each preference group with a per-caption generator and
//!    keep up to `num_candidates` distinct variants;
//! 5. score the variants with a [`SentenceScorer`] and keep the argmax.

pub mod inflect;
pub mod lesk;
pub mod lexicon;
pub mod parse;
pub mod replace;
pub mod scorer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CaptionId, CorpusIndex};
use crate::error::{Error, Result};
use crate::seed;

pub use inflect::{inflect, mimic_capitalization};
pub use lesk::lesk_disambiguate;
pub use lexicon::{Lexicon, Pos, Synset};
pub use parse::{extract_head, load_parses, save_parses, write_conllu, ParsedCaption, Token, Upos};
pub use replace::{candidate_replacements, Replacement};
pub use scorer::{ConstantScorer, NgramScorer, ProcessScorer, SentenceScorer};

pub const DEFAULT_NUM_CANDIDATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperConfig {
    pub num_candidates: usize,
    pub seed: u64,
}

impl Default for TamperConfig {
    fn default() -> Self {
        TamperConfig {
            num_candidates: DEFAULT_NUM_CANDIDATES,
            seed: 1974,
        }
    }
}

/// One modified caption. After selection the score is set and the record is
/// the caption's tampered version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TamperCandidate {
    pub caption_id: CaptionId,
    pub original: String,
    pub modified: String,
    pub head_index: usize,
    pub original_lemma: String,
    pub replacement_lemma: String,
    pub source_synset: String,
    pub replacement_synset: String,
    pub score: Option<f64>,
    /// Inflection fell back to the bare lemma.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inflection_fallback: bool,
}

pub type TamperedCaption = TamperCandidate;

/// Why a caption produced no tampered version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum SkipReason {
    MissingParse,
    ProperNounHead,
    UnsupportedHeadPos(String),
    NoSense(String),
    NoCandidate(String),
    /// Every replacement inflected to the original surface form.
    NoDistinctCandidate,
    Scoring(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::MissingParse => write!(f, "no parse for caption"),
            SkipReason::ProperNounHead => write!(f, "head is a proper noun"),
            SkipReason::UnsupportedHeadPos(p) => write!(f, "head part of speech {p} not handled"),
            SkipReason::NoSense(m) | SkipReason::NoCandidate(m) | SkipReason::Scoring(m) => {
                f.write_str(m)
            }
            SkipReason::NoDistinctCandidate => {
                write!(f, "all replacements equal the original word")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub caption_id: CaptionId,
    pub reason: SkipReason,
}

/// Candidates for one caption, or the reason there are none.
pub fn try_generate_candidates<R: Rng>(
    parsed: &ParsedCaption,
    lexicon: &Lexicon,
    config: &TamperConfig,
    rng: &mut R,
) -> std::result::Result<Vec<TamperCandidate>, SkipReason> {
    let head = extract_head(parsed);
    if head.upos == Upos::Propn {
        return Err(SkipReason::ProperNounHead);
    }
    let pos = Pos::from_upos(head.upos)
        .ok_or_else(|| SkipReason::UnsupportedHeadPos(head.upos.to_string()))?;

    let context: Vec<&str> = parsed
        .tokens()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != head.index)
        .flat_map(|(_, t)| [t.surface.as_str(), t.lemma.as_str()])
        .collect();
    let mut lemma = head.lemma.to_lowercase();
    let source = match lesk_disambiguate(lexicon, &context, &lemma, pos) {
        Ok(id) => id,
        Err(_) if head.surface.to_lowercase() != lemma => {
            lemma = head.surface.to_lowercase();
            lesk_disambiguate(lexicon, &context, &lemma, pos)
                .map_err(|e| SkipReason::NoSense(e.to_string()))?
        }
        Err(e) => return Err(SkipReason::NoSense(e.to_string())),
    };

    let replacements = candidate_replacements(lexicon, &source, &lemma)
        .map_err(|e| SkipReason::NoCandidate(e.to_string()))?;
    let (mut preferred, mut others): (Vec<_>, Vec<_>) =
        replacements.into_iter().partition(|r| r.frame_match);
    preferred.shuffle(rng);
    others.shuffle(rng);

    let original = parsed.sentence();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in preferred.into_iter().chain(others) {
        if out.len() == config.num_candidates {
            break;
        }
        let (word, fallback) = inflect(&r.lemma, &head.surface, &head.lemma, head.upos);
        let word = mimic_capitalization(&word, &head.surface);
        if word.to_lowercase() == head.surface.to_lowercase() || word.is_empty() {
            continue;
        }
        let modified = parsed.splice(head.index, &word);
        if !seen.insert(modified.clone()) {
            continue;
        }
        out.push(TamperCandidate {
            caption_id: parsed.caption_id.clone(),
            original: original.clone(),
            modified,
            head_index: head.index,
            original_lemma: lemma.clone(),
            replacement_lemma: r.lemma,
            source_synset: source.clone(),
            replacement_synset: r.synset,
            score: None,
            inflection_fallback: fallback,
        });
    }
    if out.is_empty() {
        return Err(SkipReason::NoDistinctCandidate);
    }
    Ok(out)
}

/// Up to `num_candidates` distinct modified captions; empty when the caption
/// has to be skipped.
pub fn generate_candidates<R: Rng>(
    parsed: &ParsedCaption,
    lexicon: &Lexicon,
    config: &TamperConfig,
    rng: &mut R,
) -> Vec<TamperCandidate> {
    try_generate_candidates(parsed, lexicon, config, rng).unwrap_or_default()
}

/// The highest-scoring candidate (earliest on ties), with its score recorded.
pub fn rank_and_select(
    candidates: Vec<TamperCandidate>,
    scorer: &mut dyn SentenceScorer,
) -> Result<TamperCandidate> {
    if candidates.is_empty() {
        return Err(Error::Contract("rank_and_select needs at least one candidate".into()));
    }
    let sentences: Vec<String> = candidates.iter().map(|c| c.modified.clone()).collect();
    let scores = scorer.score(&sentences)?;
    if scores.len() != sentences.len() {
        return Err(Error::Scoring {
            sentence: sentences[scores.len().min(sentences.len() - 1)].clone(),
            message: format!("expected {} scores, got {}", sentences.len(), scores.len()),
        });
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::Scoring {
                sentence: sentences[i].clone(),
                message: format!("non-finite score {s}"),
            });
        }
        if s > scores[best] {
            best = i;
        }
    }
    let mut chosen = candidates.into_iter().nth(best).expect("index in range");
    chosen.score = Some(scores[best]);
    Ok(chosen)
}

/// Result of tampering a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TamperOutcome {
    pub tampered: BTreeMap<CaptionId, TamperedCaption>,
    pub skipped: Vec<SkipRecord>,
}

/// Run the pipeline over every caption in the corpus.
///
/// Each caption's generator is seeded from `(config.seed, caption id)`, so
/// results do not depend on processing order. Candidate generation runs in
/// parallel; scoring is sequential through the single scorer. Failures are
/// recorded as skips and never abort the batch.
pub fn tamper_corpus(
    corpus: &CorpusIndex,
    parses: &BTreeMap<CaptionId, ParsedCaption>,
    lexicon: &Lexicon,
    scorer: &mut dyn SentenceScorer,
    config: &TamperConfig,
) -> Result<TamperOutcome> {
    if config.num_candidates == 0 {
        return Err(Error::Contract("num_candidates must be at least 1".into()));
    }
    let generated: Vec<(CaptionId, std::result::Result<Vec<TamperCandidate>, SkipReason>)> =
        corpus
            .captions()
            .par_iter()
            .map(|(id, caption)| {
                let Some(parsed) = parses.get(id) else {
                    return (id.clone(), Err(SkipReason::MissingParse));
                };
                let mut parsed = parsed.clone();
                if parsed.align(&caption.text).is_some() {
                    parsed.text = Some(caption.text.clone());
                }
                let mut rng = seed::rng_for(config.seed, &id.0);
                (id.clone(), try_generate_candidates(&parsed, lexicon, config, &mut rng))
            })
            .collect();

    let mut outcome = TamperOutcome::default();
    for (id, result) in generated {
        let selected = result.and_then(|cands| {
            rank_and_select(cands, scorer).map_err(|e| SkipReason::Scoring(e.to_string()))
        });
        match selected {
            Ok(c) => {
                outcome.tampered.insert(id, c);
            }
            Err(reason) => outcome.skipped.push(SkipRecord {
                caption_id: id,
                reason,
            }),
        }
    }
    Ok(outcome)
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

impl TamperOutcome {
    /// Write the tampered-corpus records and the skip log (JSON lines).
    pub fn write(&self, out: impl AsRef<Path>, skips: impl AsRef<Path>) -> Result<()> {
        write_lines(out.as_ref(), self.tampered.values())?;
        write_lines(skips.as_ref(), &self.skipped)
    }
}

/// Read a tampered-corpus file.
pub fn load_tampered(path: impl AsRef<Path>) -> Result<BTreeMap<CaptionId, TamperedCaption>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TamperedCaption = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, format!("line {}", n + 1), e))?;
        if out.insert(rec.caption_id.clone(), rec).is_some() {
            return Err(Error::parse(path, format!("line {}", n + 1), "duplicate caption id"));
        }
    }
    Ok(out)
}
