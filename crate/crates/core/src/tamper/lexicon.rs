//! Synset lexicon with WordNet-style lexicographer categories.
//!
//! The on-disk contract is a JSON document:
//!
//! ```json
//! {"synsets": [{"id": "01904930-v", "pos": "verb", "category": "verb.motion",
//!               "lemmas": ["walk"], "gloss": "use one's feet to advance",
//!               "frames": [1, 2], "proper_nouns": []}]}
//! ```
//!
//! [`Lexicon::from_wordnet_dir`] converts WordNet 3.x `data.*` files into
//! this form.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::parse::Upos;
use crate::corpus::write_json;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub fn name(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }

    /// Lexicon part of speech for a tagger tag; `None` for tags the
    /// replacement pipeline does not handle (including proper nouns).
    pub fn from_upos(upos: Upos) -> Option<Pos> {
        match upos {
            Upos::Noun => Some(Pos::Noun),
            Upos::Verb => Some(Pos::Verb),
            Upos::Adj => Some(Pos::Adj),
            Upos::Adv => Some(Pos::Adv),
            _ => None,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "noun" | "n" => Ok(Pos::Noun),
            "verb" | "v" => Ok(Pos::Verb),
            "adj" | "a" | "s" => Ok(Pos::Adj),
            "adv" | "r" => Ok(Pos::Adv),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synset {
    pub id: String,
    pub pos: Pos,
    pub category: String,
    pub lemmas: Vec<String>,
    #[serde(default)]
    pub gloss: String,
    #[serde(default)]
    pub frames: BTreeSet<u32>,
    #[serde(default, deserialize_with = "proper_noun_flags")]
    pub proper_nouns: BTreeSet<String>,
}

impl Synset {
    pub fn is_proper_noun(&self, lemma: &str) -> bool {
        self.proper_nouns.contains(lemma)
    }
}

/// Accept either a list of flagged lemmas or a lemma -> bool map.
fn proper_noun_flags<'de, D>(de: D) -> std::result::Result<BTreeSet<String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flags {
        List(Vec<String>),
        Map(BTreeMap<String, bool>),
    }
    Ok(match Flags::deserialize(de)? {
        Flags::List(v) => v.into_iter().collect(),
        Flags::Map(m) => m.into_iter().filter(|(_, v)| *v).map(|(k, _)| k).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct LexiconFile {
    synsets: Vec<Synset>,
}

/// Immutable synset store indexed by (lemma, pos) and by (category, pos).
#[derive(Debug, Clone)]
pub struct Lexicon {
    synsets: BTreeMap<String, Synset>,
    by_lemma: HashMap<(String, Pos), Vec<String>>,
    by_category: BTreeMap<(Pos, String), Vec<String>>,
}

impl Lexicon {
    pub fn new(synsets: impl IntoIterator<Item = Synset>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in synsets {
            if s.lemmas.is_empty() {
                return Err(Error::Integrity(format!("synset {} has no lemmas", s.id)));
            }
            let prefix = format!("{}.", s.pos.name());
            if !s.category.starts_with(&prefix) || s.category.len() == prefix.len() {
                return Err(Error::Integrity(format!(
                    "synset {}: category `{}` does not follow `{}<name>`",
                    s.id, s.category, prefix
                )));
            }
            if let Some(prev) = map.insert(s.id.clone(), s) {
                return Err(Error::Integrity(format!("duplicate synset id {}", prev.id)));
            }
        }
        let mut by_lemma: HashMap<(String, Pos), Vec<String>> = HashMap::new();
        let mut by_category: BTreeMap<(Pos, String), Vec<String>> = BTreeMap::new();
        for s in map.values() {
            let mut seen = BTreeSet::new();
            for lemma in &s.lemmas {
                let key = lemma.to_lowercase();
                if seen.insert(key.clone()) {
                    by_lemma.entry((key, s.pos)).or_default().push(s.id.clone());
                }
            }
            by_category
                .entry((s.pos, s.category.clone()))
                .or_default()
                .push(s.id.clone());
        }
        Ok(Lexicon {
            synsets: map,
            by_lemma,
            by_category,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let file: LexiconFile = serde_json::from_slice(&bytes).map_err(|e| {
            Error::parse(path, format!("line {} column {}", e.line(), e.column()), e)
        })?;
        Lexicon::new(file.synsets)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = LexiconFile {
            synsets: self.synsets.values().cloned().collect(),
        };
        write_json(path.as_ref(), &file)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn synset(&self, id: &str) -> Option<&Synset> {
        self.synsets.get(id)
    }

    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.values()
    }

    /// Synsets containing the lemma (case-insensitive), in id order.
    pub fn senses(&self, lemma: &str, pos: Pos) -> impl Iterator<Item = &Synset> {
        self.by_lemma
            .get(&(lemma.to_lowercase(), pos))
            .into_iter()
            .flatten()
            .map(|id| &self.synsets[id])
    }

    /// Synsets in a lexicographer category, in id order.
    pub fn in_category(&self, pos: Pos, category: &str) -> impl Iterator<Item = &Synset> {
        self.by_category
            .get(&(pos, category.to_string()))
            .into_iter()
            .flatten()
            .map(|id| &self.synsets[id])
    }

    /// Convert WordNet 3.x database files (`data.noun`, `data.verb`,
    /// `data.adj`, `data.adv`) found in `dir`. Missing files are skipped.
    pub fn from_wordnet_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut synsets = Vec::new();
        let mut found = false;
        for name in ["data.noun", "data.verb", "data.adj", "data.adv"] {
            let path = dir.join(name);
            if !path.exists() {
                continue;
            }
            found = true;
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            for (n, line) in text.lines().enumerate() {
                if line.starts_with("  ") || line.trim().is_empty() {
                    continue;
                }
                let synset = parse_wordnet_line(line)
                    .map_err(|m| Error::parse(&path, format!("line {}", n + 1), m))?;
                synsets.push(synset);
            }
        }
        if !found {
            return Err(Error::io(
                dir.join("data.noun"),
                std::io::Error::new(std::io::ErrorKind::NotFound, "no WordNet data files"),
            ));
        }
        Lexicon::new(synsets)
    }
}

/// Lexicographer file names, indexed by `lex_filenum`.
pub const LEXNAMES: [&str; 45] = [
    "adj.all",
    "adj.pert",
    "adv.all",
    "noun.Tops",
    "noun.act",
    "noun.animal",
    "noun.artifact",
    "noun.attribute",
    "noun.body",
    "noun.cognition",
    "noun.communication",
    "noun.event",
    "noun.feeling",
    "noun.food",
    "noun.group",
    "noun.location",
    "noun.motive",
    "noun.object",
    "noun.person",
    "noun.phenomenon",
    "noun.plant",
    "noun.possession",
    "noun.process",
    "noun.quantity",
    "noun.relation",
    "noun.shape",
    "noun.state",
    "noun.substance",
    "noun.time",
    "verb.body",
    "verb.change",
    "verb.cognition",
    "verb.communication",
    "verb.competition",
    "verb.consumption",
    "verb.contact",
    "verb.creation",
    "verb.emotion",
    "verb.motion",
    "verb.perception",
    "verb.possession",
    "verb.social",
    "verb.stative",
    "verb.weather",
    "adj.ppl",
];

/// One line of a WordNet `data.*` file.
fn parse_wordnet_line(line: &str) -> std::result::Result<Synset, String> {
    let (data, gloss) = line.split_once(" | ").unwrap_or((line, ""));
    let mut f = data.split_whitespace();
    let mut next = |what: &str| f.next().ok_or_else(|| format!("missing {what}"));

    let offset = next("synset offset")?.to_string();
    let lex_filenum: usize = next("lex_filenum")?
        .parse()
        .map_err(|_| "bad lex_filenum".to_string())?;
    let ss_type = next("ss_type")?;
    let pos: Pos = ss_type.parse()?;
    let category = LEXNAMES
        .get(lex_filenum)
        .ok_or_else(|| format!("lex_filenum {lex_filenum} out of range"))?
        .to_string();
    let w_cnt = usize::from_str_radix(next("w_cnt")?, 16).map_err(|_| "bad w_cnt".to_string())?;

    let mut lemmas = Vec::with_capacity(w_cnt);
    let mut proper_nouns = BTreeSet::new();
    for _ in 0..w_cnt {
        let word = next("word")?;
        next("lex_id")?;
        // Adjective syntactic markers: (a), (p), (ip).
        let word = word.split('(').next().unwrap_or(word);
        let lemma = word.replace('_', " ");
        if lemma.chars().next().is_some_and(char::is_uppercase) {
            proper_nouns.insert(lemma.clone());
        }
        lemmas.push(lemma);
    }

    let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| "bad p_cnt".to_string())?;
    for _ in 0..p_cnt * 4 {
        next("pointer field")?;
    }

    let mut frames = BTreeSet::new();
    if pos == Pos::Verb {
        if let Ok(f_cnt) = next("f_cnt").and_then(|s| s.parse::<usize>().map_err(|_| "bad f_cnt".into())) {
            for _ in 0..f_cnt {
                next("frame marker")?;
                let f_num = next("f_num")?.parse().map_err(|_| "bad f_num".to_string())?;
                next("w_num")?;
                frames.insert(f_num);
            }
        }
    }

    let letter = match pos {
        Pos::Noun => 'n',
        Pos::Verb => 'v',
        Pos::Adj => 'a',
        Pos::Adv => 'r',
    };
    Ok(Synset {
        id: format!("{offset}-{letter}"),
        pos,
        category,
        lemmas,
        gloss: gloss.trim().to_string(),
        frames,
        proper_nouns,
    })
}
