//! Caption text helpers shared by the Lesk overlap and the n-gram scorer.

use std::collections::BTreeSet;

/// Fixed English function-word list used for gloss/context overlap.
pub const STOPWORDS: [&str; 50] = [
    "a", "an", "the", "and", "or", "but", "if", "of", "at", "by", "for", "with", "about", "to",
    "from", "in", "on", "into", "over", "under", "up", "down", "out", "off", "is", "are", "was",
    "were", "be", "been", "being", "have", "has", "had", "do", "does", "did", "it", "its", "this",
    "that", "these", "those", "he", "she", "they", "them", "his", "her", "their",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}

/// Split on whitespace and punctuation; apostrophes and hyphens inside a word
/// are kept. Case is preserved.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (pos, &(i, c)) in chars.iter().enumerate() {
        let inner_joiner = (c == '\'' || c == '-')
            && start.is_some()
            && chars.get(pos + 1).is_some_and(|&(_, n)| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_joiner {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            out.push(&text[s..i]);
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

/// Lowercased tokens.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(str::to_lowercase).collect()
}

/// Lowercased non-stopword word types.
pub fn content_types<'a, I>(texts: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    texts
        .into_iter()
        .flat_map(words)
        .filter(|w| !is_stopword(w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_on_punctuation() {
        assert_eq!(
            tokenize("A giraffe rests it's neck, on rocks."),
            vec!["A", "giraffe", "rests", "it's", "neck", "on", "rocks"]
        );
        assert_eq!(tokenize("  "), Vec::<&str>::new());
        assert_eq!(tokenize("well-known -x"), vec!["well-known", "x"]);
    }

    #[test]
    fn stopword_list_has_fifty_distinct_entries() {
        let set: BTreeSet<_> = STOPWORDS.iter().collect();
        assert_eq!(set.len(), 50);
    }

    #[test]
    fn content_types_drop_stopwords_and_dedupe() {
        let types = content_types(["The club and the Club", "of hands"]);
        assert_eq!(
            types.into_iter().collect::<Vec<_>>(),
            vec!["club".to_string(), "hands".to_string()]
        );
    }
}
