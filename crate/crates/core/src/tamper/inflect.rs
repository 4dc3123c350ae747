//! English inflection by suffix rules plus irregular exception tables.
//!
//! The form of a template word (e.g. `walked` with lemma `walk`) is
//! detected first, then the same form is produced for the replacement lemma.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::parse::Upos;

const IRREGULAR_VERBS: &str = include_str!("../../data/irregular_verbs.tsv");
const IRREGULAR_PLURALS: &str = include_str!("../../data/irregular_plurals.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Base,
    Plural,
    ThirdSingular,
    Past,
    PastParticiple,
    Gerund,
    Comparative,
    Superlative,
}

struct VerbForms {
    past: String,
    participle: String,
}

struct Tables {
    verbs: HashMap<String, VerbForms>,
    plurals: HashMap<String, String>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let rows = |text: &'static str| {
            text.lines()
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.split('\t').collect::<Vec<_>>())
        };
        let verbs = rows(IRREGULAR_VERBS)
            .map(|c| {
                (
                    c[0].to_string(),
                    VerbForms {
                        past: c[1].to_string(),
                        participle: c[2].to_string(),
                    },
                )
            })
            .collect();
        let plurals = rows(IRREGULAR_PLURALS)
            .map(|c| (c[0].to_string(), c[1].to_string()))
            .collect();
        Tables { verbs, plurals }
    })
}

/// Number of entries in the irregular verb and plural tables.
pub fn table_sizes() -> (usize, usize) {
    let t = tables();
    (t.verbs.len(), t.plurals.len())
}

const IRREGULAR_COMPARATIVES: [(&str, &str, &str); 6] = [
    ("good", "better", "best"),
    ("well", "better", "best"),
    ("bad", "worse", "worst"),
    ("far", "farther", "farthest"),
    ("little", "less", "least"),
    ("many", "more", "most"),
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn ends_consonant_y(w: &str) -> bool {
    let mut rev = w.chars().rev();
    rev.next() == Some('y') && rev.next().is_some_and(|c| !is_vowel(c))
}

fn ends_consonant_o(w: &str) -> bool {
    let mut rev = w.chars().rev();
    rev.next() == Some('o') && rev.next().is_some_and(|c| !is_vowel(c))
}

/// Consonant-vowel-consonant ending on a single-syllable word (stop -> stopp-).
fn doubles_final_consonant(w: &str) -> bool {
    let chars: Vec<char> = w.chars().collect();
    let n = chars.len();
    if n < 3 || !chars.iter().all(|c| c.is_ascii_lowercase()) {
        return false;
    }
    let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
    let cvc = !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'y');
    let vowel_groups = chars
        .iter()
        .zip(std::iter::once(&' ').chain(chars.iter()))
        .filter(|(c, prev)| is_vowel(**c) && !is_vowel(**prev))
        .count();
    cvc && vowel_groups == 1
}

fn sibilant(w: &str) -> bool {
    ["s", "x", "z", "ch", "sh"].iter().any(|s| w.ends_with(s))
}

fn drop_last(w: &str) -> &str {
    &w[..w.len() - w.chars().last().map_or(0, char::len_utf8)]
}

fn with_suffix(w: &str, suffix: &str) -> String {
    // suffix starts with a vowel: e/i
    if doubles_final_consonant(w) {
        let last = w.chars().last().unwrap();
        format!("{w}{last}{suffix}")
    } else {
        format!("{w}{suffix}")
    }
}

pub fn regular_plural(w: &str) -> String {
    if sibilant(w) {
        format!("{w}es")
    } else if ends_consonant_y(w) {
        format!("{}ies", drop_last(w))
    } else {
        format!("{w}s")
    }
}

fn plural(w: &str) -> String {
    tables()
        .plurals
        .get(w)
        .cloned()
        .unwrap_or_else(|| regular_plural(w))
}

fn third_singular(w: &str) -> String {
    match w {
        "be" => "is".into(),
        "have" => "has".into(),
        _ if sibilant(w) || ends_consonant_o(w) => format!("{w}es"),
        _ if ends_consonant_y(w) => format!("{}ies", drop_last(w)),
        _ => format!("{w}s"),
    }
}

fn regular_past(w: &str) -> String {
    if w.ends_with('e') {
        format!("{w}d")
    } else if ends_consonant_y(w) {
        format!("{}ied", drop_last(w))
    } else {
        with_suffix(w, "ed")
    }
}

fn past(w: &str) -> String {
    match tables().verbs.get(w) {
        Some(f) => f.past.clone(),
        None => regular_past(w),
    }
}

fn participle(w: &str) -> String {
    match tables().verbs.get(w) {
        Some(f) => f.participle.clone(),
        None => regular_past(w),
    }
}

fn gerund(w: &str) -> String {
    if let Some(stem) = w.strip_suffix("ie") {
        format!("{stem}ying")
    } else if w.len() > 2
        && w.ends_with('e')
        && !(w.ends_with("ee") || w.ends_with("ye") || w.ends_with("oe"))
    {
        format!("{}ing", drop_last(w))
    } else {
        with_suffix(w, "ing")
    }
}

fn graded(w: &str, comparative: bool) -> String {
    if let Some(&(_, c, s)) = IRREGULAR_COMPARATIVES.iter().find(|(b, _, _)| *b == w) {
        return if comparative { c } else { s }.to_string();
    }
    let (e_suffix, suffix) = if comparative { ("r", "er") } else { ("st", "est") };
    if w.ends_with('e') {
        format!("{w}{e_suffix}")
    } else if ends_consonant_y(w) {
        format!("{}i{suffix}", drop_last(w))
    } else {
        with_suffix(w, suffix)
    }
}

/// Produce `form` of a lemma.
pub fn apply_form(lemma: &str, form: Form) -> String {
    match form {
        Form::Base => lemma.to_string(),
        Form::Plural => plural(lemma),
        Form::ThirdSingular => third_singular(lemma),
        Form::Past => past(lemma),
        Form::PastParticiple => participle(lemma),
        Form::Gerund => gerund(lemma),
        Form::Comparative => graded(lemma, true),
        Form::Superlative => graded(lemma, false),
    }
}

/// Identify which form of `lemma` the surface string is. `None` when no rule
/// or table entry explains it.
pub fn detect_form(surface: &str, lemma: &str, upos: Upos) -> Option<Form> {
    let surface = surface.to_lowercase();
    let lemma = lemma.to_lowercase();
    if surface == lemma {
        return Some(Form::Base);
    }
    match upos {
        Upos::Noun => {
            if surface == plural(&lemma)
                || surface == regular_plural(&lemma)
                || (surface.ends_with('s') && !lemma.ends_with('s'))
            {
                Some(Form::Plural)
            } else {
                None
            }
        }
        Upos::Verb | Upos::Aux => {
            if let Some(f) = tables().verbs.get(&lemma) {
                if surface == f.past {
                    return Some(Form::Past);
                }
                if surface == f.participle {
                    return Some(Form::PastParticiple);
                }
            }
            if lemma == "be" {
                return match surface.as_str() {
                    "is" => Some(Form::ThirdSingular),
                    "were" => Some(Form::Past),
                    "being" => Some(Form::Gerund),
                    _ => None,
                };
            }
            if surface == third_singular(&lemma) {
                Some(Form::ThirdSingular)
            } else if surface == gerund(&lemma) {
                Some(Form::Gerund)
            } else if surface == regular_past(&lemma) {
                Some(Form::Past)
            } else if surface.ends_with("ing") {
                Some(Form::Gerund)
            } else if surface.ends_with("ed") {
                Some(Form::Past)
            } else if surface.ends_with('s') {
                Some(Form::ThirdSingular)
            } else {
                None
            }
        }
        Upos::Adj | Upos::Adv => {
            if surface == graded(&lemma, true) {
                Some(Form::Comparative)
            } else if surface == graded(&lemma, false) || surface.ends_with("est") {
                Some(Form::Superlative)
            } else if surface.ends_with("er") {
                Some(Form::Comparative)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Inflect a replacement lemma to the form the template surface has.
///
/// Returns the inflected word and whether the fallback (lemma unchanged)
/// was used because the template's form could not be identified.
pub fn inflect(
    replacement_lemma: &str,
    template_surface: &str,
    template_lemma: &str,
    upos: Upos,
) -> (String, bool) {
    match detect_form(template_surface, template_lemma, upos) {
        Some(form) => (apply_form(&replacement_lemma.to_lowercase(), form), false),
        None => (replacement_lemma.to_string(), true),
    }
}

/// Copy the capitalization pattern of `template` onto `word`.
pub fn mimic_capitalization(word: &str, template: &str) -> String {
    let letters: Vec<char> = template.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
        return word.to_uppercase();
    }
    let lower = word.to_lowercase();
    if template.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = lower.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars).collect(),
            None => lower,
        }
    } else {
        lower
    }
}
