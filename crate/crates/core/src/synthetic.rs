//! Deterministic stand-ins for the external resources of a real run:
//! dependency parses of the synthetic template captions, a small lexicon
//! over their vocabulary, and toy text and image encoders.
//!
//! Together with [`crate::corpus::generate_synthetic_corpus`] these let the
//! whole pipeline run end to end without MS-COCO, a parser, WordNet or
//! pretrained models.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{
    coco_taxonomy, generate_synthetic_corpus, save_corpus, CaptionId, CorpusIndex, GroundTruth,
    SplitAssignment,
};
use crate::embeddings::{EmbeddingSet, Modality};
use crate::error::{Error, Result};
use crate::seed;
use crate::tamper::inflect::regular_plural;
use crate::tamper::{save_parses, Lexicon, ParsedCaption, Pos, Synset, TamperedCaption, Token, Upos};
use crate::text::tokenize;

/// Nouns the caption templates use for the picture itself.
const SCENE_NOUNS: [&str; 5] = ["photo", "image", "view", "scene", "picture"];

const NUMBER_WORDS: [&str; 13] = [
    "no", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve",
];

fn closed_class(word: &str) -> Option<Upos> {
    Some(match word {
        "a" | "an" | "the" | "some" | "this" | "other" => Upos::Det,
        "of" | "with" | "in" | "next" | "to" => Upos::Adp,
        "and" => Upos::Cconj,
        "there" => Upos::Pron,
        "it" | "nothing" => Upos::Pron,
        "is" | "are" => Upos::Verb,
        "showing" | "see" => Upos::Verb,
        "empty" | "blurry" | "plain" | "dark" => Upos::Adj,
        "many" => Upos::Adj,
        _ if NUMBER_WORDS.contains(&word) => Upos::Num,
        _ => return None,
    })
}

/// Category head nouns and their plurals, mapped to the singular lemma.
fn noun_lemmas() -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut add = |w: &str| {
        out.insert(w.to_string(), w.to_string());
        out.insert(regular_plural(w), w.to_string());
    };
    for (_, c) in coco_taxonomy() {
        for w in c.name.split_whitespace() {
            add(w);
        }
    }
    for w in SCENE_NOUNS
        .iter()
        .chain(&["room", "wall", "thing", "object", "photo"])
    {
        add(w);
    }
    out
}

/// Rule-based dependency analysis of a synthetic template caption.
///
/// The root is the copula of an existential ("There is ..."), else the
/// first scene noun ("A photo showing ..."), or otherwise the noun before "next"
/// ("Some dog next to ..."). Every other token attaches to the root. The
/// analysis is only meant for captions produced by the synthetic generator.
pub fn parse_template_caption(id: &CaptionId, text: &str) -> Result<ParsedCaption> {
    let lemmas = noun_lemmas();
    let mut tokens = Vec::new();
    let mut rest = text;
    for word in tokenize(text) {
        // Punctuation between words becomes its own token.
        let at = rest.find(word).expect("token comes from text");
        for p in rest[..at].chars().filter(|c| !c.is_whitespace()) {
            tokens.push((p.to_string(), p.to_string(), Upos::Punct));
        }
        rest = &rest[at + word.len()..];
        let lower = word.to_lowercase();
        let (lemma, upos) = match closed_class(&lower) {
            Some(Upos::Verb) if lower == "is" || lower == "are" => ("be".to_string(), Upos::Verb),
            Some(Upos::Verb) if lower == "showing" => ("show".to_string(), Upos::Verb),
            Some(u) => (lower.clone(), u),
            None => (
                lemmas.get(&lower).cloned().unwrap_or_else(|| lower.clone()),
                Upos::Noun,
            ),
        };
        tokens.push((word.to_string(), lemma, upos));
    }
    for p in rest.chars().filter(|c| !c.is_whitespace()) {
        tokens.push((p.to_string(), p.to_string(), Upos::Punct));
    }

    let lower: Vec<String> = tokens.iter().map(|t| t.0.to_lowercase()).collect();
    let root = (lower.first().map(String::as_str) == Some("there"))
        .then(|| lower.iter().position(|w| w == "is" || w == "are"))
        .flatten()
        .or_else(|| lower.iter().position(|w| SCENE_NOUNS.contains(&w.as_str())))
        .or_else(|| lower.iter().position(|w| w == "next").and_then(|i| i.checked_sub(1)))
        .unwrap_or(0);

    let tokens = tokens
        .into_iter()
        .enumerate()
        .map(|(i, (surface, lemma, upos))| Token {
            surface,
            lemma,
            upos,
            head: (i != root).then_some(root),
            deprel: if i == root {
                "root".into()
            } else if upos == Upos::Punct {
                "punct".into()
            } else {
                "dep".into()
            },
        })
        .collect();
    ParsedCaption::new(id.clone(), Some(text.to_string()), tokens)
}

/// Parses of every caption in a synthetic corpus.
pub fn template_parses(corpus: &CorpusIndex) -> Result<BTreeMap<CaptionId, ParsedCaption>> {
    corpus
        .captions()
        .iter()
        .map(|(id, c)| Ok((id.clone(), parse_template_caption(id, &c.text)?)))
        .collect()
}

fn lexname_for_supercategory(supercategory: &str) -> &'static str {
    match supercategory {
        "person" => "noun.person",
        "animal" => "noun.animal",
        "food" => "noun.food",
        _ => "noun.artifact",
    }
}

/// Lexicon covering the synthetic captions: one noun synset per COCO
/// category (filed under a lexicographer category by supercategory), a few
/// depiction and place nouns, and existential verbs.
pub fn template_lexicon() -> Lexicon {
    let mut synsets = Vec::new();
    let mut n = 0u32;
    let mut push = |pos: Pos, category: &str, lemmas: &[&str], gloss: String| {
        n += 1;
        let suffix = match pos {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adj => "a",
            Pos::Adv => "r",
        };
        synsets.push(Synset {
            id: format!("{:08}-{suffix}", n),
            pos,
            category: category.to_string(),
            lemmas: lemmas.iter().map(|s| s.to_string()).collect(),
            gloss,
            frames: BTreeSet::new(),
            proper_nouns: BTreeSet::new(),
        });
    };

    for (_, c) in coco_taxonomy() {
        let head = c.name.split_whitespace().last().unwrap_or(&c.name).to_string();
        let mut lemmas = vec![c.name.as_str()];
        if head != c.name {
            lemmas.push(head.as_str());
        }
        push(
            Pos::Noun,
            lexname_for_supercategory(&c.supercategory),
            &lemmas,
            format!("a {} of the {} kind, as in a {}", head, c.supercategory, c.name),
        );
    }
    let depictions: [(&[&str], &str); 7] = [
        (&["photo", "photograph"], "a picture recorded by a camera"),
        (&["image"], "a visual representation of a scene or object"),
        (&["picture", "depiction"], "a visual representation such as a painting or photo"),
        (&["drawing"], "a picture made with lines"),
        (&["sketch"], "a rough preliminary drawing"),
        (&["poster"], "a large printed picture"),
        (&["map"], "a diagram of an area"),
    ];
    for (lemmas, gloss) in depictions {
        push(Pos::Noun, "noun.communication", lemmas, gloss.to_string());
    }
    let places: [(&[&str], &str); 5] = [
        (&["view", "vista"], "the range of what can be seen from a place"),
        (&["scene", "setting"], "the place where something happens, seen as a whole"),
        (&["landscape"], "an expanse of scenery seen from one place"),
        (&["horizon"], "the line where the sky meets the ground"),
        (&["field"], "an open area of land"),
    ];
    for (lemmas, gloss) in places {
        push(Pos::Noun, "noun.location", lemmas, gloss.to_string());
    }
    let stative: [(&[&str], &str); 4] = [
        (&["be", "exist"], "have an existence, be present in a scene"),
        (&["remain", "stay"], "continue to be present"),
        (&["seem", "appear"], "give an impression of being present"),
        (&["belong"], "be in the right place"),
    ];
    for (lemmas, gloss) in stative {
        push(Pos::Verb, "verb.stative", lemmas, gloss.to_string());
    }
    Lexicon::new(synsets).expect("built-in lexicon is valid")
}

fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Toy sentence encoder: the normalized mean of per-word random vectors,
/// each word's vector drawn from a stream keyed by `(seed, word)`.
pub fn encode_text(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for w in tokenize(text) {
        let wv = gaussian_vector(&mut seed::rng_for(seed, &w.to_lowercase()), dim);
        v.iter_mut().zip(wv).for_each(|(a, b)| *a += b);
    }
    normalize(&mut v);
    v
}

/// Text embeddings of `(id, text)` pairs with [`encode_text`].
pub fn text_embeddings<'a>(
    model: &str,
    texts: impl IntoIterator<Item = (&'a str, &'a str)>,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingSet> {
    let vectors = texts
        .into_iter()
        .map(|(id, t)| (id.to_string(), encode_text(t, dim, seed)))
        .collect();
    EmbeddingSet::new(model, Modality::Text, dim, vectors)
}

/// Toy image encoder reading the ground truth: the sum of one random
/// direction per present category, plus the object count along a fixed
/// direction, plus isotropic noise of scale `noise`.
pub fn image_embeddings(
    model: &str,
    truth: &[GroundTruth],
    dim: usize,
    noise: f64,
    seed: u64,
) -> Result<EmbeddingSet> {
    let count_dir = gaussian_vector(&mut seed::rng_for(seed, "count-direction"), dim);
    let mut vectors = BTreeMap::new();
    for g in truth {
        let mut v = vec![0.0; dim];
        for cat in &g.categories {
            let cv = gaussian_vector(&mut seed::rng_for(seed, &format!("category:{cat}")), dim);
            v.iter_mut().zip(cv).for_each(|(a, b)| *a += b);
        }
        let scale = g.count as f64 / 10.0;
        v.iter_mut().zip(&count_dir).for_each(|(a, b)| *a += scale * b);
        let mut rng = seed::rng_for(seed, &format!("noise:{}", g.image));
        for x in v.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += noise * z;
        }
        vectors.insert(g.image.0.clone(), v);
    }
    EmbeddingSet::new(model, Modality::Image, dim, vectors)
}

/// Paths of the input files written by [`write_workspace`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    /// Directory holding `instances.json` and `captions.json`.
    pub corpus_dir: PathBuf,
    pub splits: PathBuf,
    pub parses: PathBuf,
    pub lexicon: PathBuf,
    pub text_embeddings: PathBuf,
    pub image_embeddings: PathBuf,
}

/// Settings of a synthetic workspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceConfig {
    pub num_images: usize,
    pub max_instances: usize,
    pub text_dim: usize,
    pub image_dim: usize,
    /// Scale of the image encoder's noise.
    pub image_noise: f64,
    pub seed: u64,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        WorkspaceConfig {
            num_images: 200,
            max_instances: 40,
            text_dim: 32,
            image_dim: 32,
            image_noise: 0.5,
            seed: 1974,
        }
    }
}

/// Model name recorded in synthetic embedding manifests.
pub const SYNTHETIC_MODEL: &str = "synthetic";

/// Seed of the synthetic text encoder for a workspace seed.
pub fn text_encoder_seed(seed: u64) -> u64 {
    seed::derive(seed, "text-encoder")
}

/// Write every input the command-line pipeline needs under `dir`: a COCO
/// style corpus, a 60/20/20 split, template parses, the template lexicon
/// and text and image embedding manifests.
pub fn write_workspace(dir: &Path, config: &WorkspaceConfig) -> Result<Workspace> {
    let corpus_dir = dir.join("corpus");
    std::fs::create_dir_all(&corpus_dir).map_err(|e| Error::io(&corpus_dir, e))?;
    let ws = Workspace {
        splits: dir.join("splits.json"),
        parses: dir.join("parses.conllu"),
        lexicon: dir.join("lexicon.json"),
        text_embeddings: dir.join("text.emb.jsonl"),
        image_embeddings: dir.join("image.emb.jsonl"),
        corpus_dir,
    };
    let (corpus, truth) =
        generate_synthetic_corpus(config.num_images, config.max_instances, config.seed);
    save_corpus(
        &corpus,
        ws.corpus_dir.join("instances.json"),
        ws.corpus_dir.join("captions.json"),
    )?;
    SplitAssignment::random(&corpus, 0.6, 0.2, config.seed).save(&ws.splits)?;
    save_parses(&ws.parses, template_parses(&corpus)?.values())?;
    template_lexicon().save(&ws.lexicon)?;
    text_embeddings(
        SYNTHETIC_MODEL,
        corpus.captions().iter().map(|(id, c)| (id.0.as_str(), c.text.as_str())),
        config.text_dim,
        text_encoder_seed(config.seed),
    )?
    .save(&ws.text_embeddings)?;
    image_embeddings(
        SYNTHETIC_MODEL,
        &truth,
        config.image_dim,
        config.image_noise,
        seed::derive(config.seed, "image-encoder"),
    )?
    .save(&ws.image_embeddings)?;
    Ok(ws)
}

/// Text embeddings of tampered captions, keyed by the original caption id,
/// with the same encoder [`write_workspace`] used for the originals.
pub fn tampered_embeddings(
    tampered: &BTreeMap<CaptionId, TamperedCaption>,
    config: &WorkspaceConfig,
) -> Result<EmbeddingSet> {
    text_embeddings(
        SYNTHETIC_MODEL,
        tampered.iter().map(|(id, t)| (id.0.as_str(), t.modified.as_str())),
        config.text_dim,
        text_encoder_seed(config.seed),
    )
}
