//! Simplified Lesk word-sense disambiguation.

use super::lexicon::{Lexicon, Pos, Synset};
use crate::error::{Error, Result};
use crate::text::content_types;

/// Number of shared content-word types between a sense (gloss + lemmas) and
/// the context.
pub fn overlap(synset: &Synset, context: &std::collections::BTreeSet<String>) -> usize {
    let sense = content_types(
        std::iter::once(synset.gloss.as_str()).chain(synset.lemmas.iter().map(String::as_str)),
    );
    sense.intersection(context).count()
}

/// Pick the sense of `lemma` whose gloss and lemma bag overlaps most with the
/// context. Ties go to the lexicographically lowest synset id.
pub fn lesk_disambiguate<S: AsRef<str>>(
    lexicon: &Lexicon,
    context_tokens: &[S],
    lemma: &str,
    pos: Pos,
) -> Result<String> {
    let context = content_types(context_tokens.iter().map(AsRef::as_ref));
    // senses() yields in ascending id order, so keeping the first maximum
    // implements the tie rule.
    let mut best: Option<(&Synset, usize)> = None;
    for sense in lexicon.senses(lemma, pos) {
        let score = overlap(sense, &context);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((sense, score));
        }
    }
    best.map(|(s, _)| s.id.clone()).ok_or_else(|| Error::NoSense {
        lemma: lemma.to_string(),
        pos: pos.to_string(),
    })
}
