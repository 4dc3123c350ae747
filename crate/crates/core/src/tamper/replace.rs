//! Category-constrained replacement candidates.

use std::collections::BTreeSet;

use super::lexicon::{Lexicon, Pos};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub lemma: String,
    pub synset: String,
    /// The replacement's synset has exactly the source synset's verb frames.
    pub frame_match: bool,
}

/// Lemmas from other synsets of the source synset's category and part of
/// speech. Excluded: the source synset, its lemmas, the original lemma,
/// proper nouns and multiword lemmas. For verbs, frame-matching synsets come
/// first; otherwise order is by synset id then lemma position. Each lemma
/// appears once.
pub fn candidate_replacements(
    lexicon: &Lexicon,
    source_synset: &str,
    original_lemma: &str,
) -> Result<Vec<Replacement>> {
    let source = lexicon.synset(source_synset).ok_or_else(|| Error::Lookup {
        kind: "synset",
        id: source_synset.to_string(),
    })?;
    let mut excluded: BTreeSet<String> = source.lemmas.iter().map(|l| l.to_lowercase()).collect();
    excluded.insert(original_lemma.to_lowercase());

    let mut matched = Vec::new();
    let mut rest = Vec::new();
    for s in lexicon.in_category(source.pos, &source.category) {
        if s.id == source.id {
            continue;
        }
        let frame_match = source.pos == Pos::Verb && s.frames == source.frames;
        for lemma in &s.lemmas {
            if s.is_proper_noun(lemma)
                || lemma.contains([' ', '_'])
                || !excluded.insert(lemma.to_lowercase())
            {
                continue;
            }
            let r = Replacement {
                lemma: lemma.clone(),
                synset: s.id.clone(),
                frame_match,
            };
            if frame_match {
                matched.push(r);
            } else {
                rest.push(r);
            }
        }
    }
    matched.extend(rest);
    if matched.is_empty() {
        return Err(Error::NoCandidate {
            lemma: original_lemma.to_string(),
            synset: source_synset.to_string(),
        });
    }
    Ok(matched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tamper::lexicon::Synset;

    fn verb(id: &str, lemmas: &[&str], frames: &[u32]) -> Synset {
        Synset {
            id: id.into(),
            pos: Pos::Verb,
            category: "verb.motion".into(),
            lemmas: lemmas.iter().map(|s| s.to_string()).collect(),
            gloss: String::new(),
            frames: frames.iter().copied().collect(),
            proper_nouns: BTreeSet::new(),
        }
    }

    #[test]
    fn walk_can_become_fly() {
        let lex = Lexicon::new([
            verb("v1", &["walk"], &[1, 2]),
            verb("v2", &["fly", "aviate"], &[1]),
        ])
        .unwrap();
        let c = candidate_replacements(&lex, "v1", "walk").unwrap();
        assert!(c.iter().any(|r| r.lemma == "fly"));
    }

    #[test]
    fn lone_synset_has_no_candidates() {
        let lex = Lexicon::new([verb("v1", &["walk", "go on foot"], &[1])]).unwrap();
        assert!(matches!(
            candidate_replacements(&lex, "v1", "walk"),
            Err(Error::NoCandidate { .. })
        ));
    }

    #[test]
    fn frame_matching_synset_comes_first() {
        let lex = Lexicon::new([
            verb("v1", &["walk"], &[1, 2]),
            verb("v2", &["fly"], &[1]),
            verb("v3", &["run"], &[1, 2]),
            verb("v4", &["crawl"], &[2, 8]),
        ])
        .unwrap();
        let c = candidate_replacements(&lex, "v1", "walk").unwrap();
        let lemmas: Vec<_> = c.iter().map(|r| r.lemma.as_str()).collect();
        assert_eq!(lemmas, vec!["run", "fly", "crawl"]);
        assert!(c[0].frame_match && !c[1].frame_match);
    }

    #[test]
    fn exclusions() {
        let mut proper = verb("v2", &["Hike", "hike", "stroll along", "amble"], &[1]);
        proper.proper_nouns.insert("Hike".into());
        let lex = Lexicon::new([
            verb("v1", &["walk", "amble"], &[1]),
            proper,
        ])
        .unwrap();
        let c = candidate_replacements(&lex, "v1", "walk").unwrap();
        let lemmas: Vec<_> = c.iter().map(|r| r.lemma.as_str()).collect();
        assert_eq!(lemmas, vec!["hike"]);
    }
}
