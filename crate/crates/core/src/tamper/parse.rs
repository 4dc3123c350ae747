//! Dependency parses in a CoNLL-U style format.
//!
//! Each sentence starts with `# sent_id = <caption-id>`, optionally followed
//! by `# text = <caption>`, then one token per line with tab-separated
//! columns ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL (further columns
//! are ignored). Multiword ranges (`1-2`) and empty nodes (`1.1`) are skipped.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::CaptionId;
use crate::error::{Error, Result};

/// Universal part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl FromStr for Upos {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ADJ" => Upos::Adj,
            "ADP" => Upos::Adp,
            "ADV" => Upos::Adv,
            "AUX" => Upos::Aux,
            "CCONJ" | "CONJ" => Upos::Cconj,
            "DET" => Upos::Det,
            "INTJ" => Upos::Intj,
            "NOUN" => Upos::Noun,
            "NUM" => Upos::Num,
            "PART" => Upos::Part,
            "PRON" => Upos::Pron,
            "PROPN" => Upos::Propn,
            "PUNCT" => Upos::Punct,
            "SCONJ" => Upos::Sconj,
            "SYM" => Upos::Sym,
            "VERB" => Upos::Verb,
            "X" | "_" => Upos::X,
            other => return Err(format!("unknown UPOS tag `{other}`")),
        })
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub upos: Upos,
    /// 0-based index of the governor; `None` for the root.
    pub head: Option<usize>,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCaption {
    pub caption_id: CaptionId,
    pub text: Option<String>,
    tokens: Vec<Token>,
    root: usize,
}

/// The root token of a parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Head {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: Upos,
}

impl ParsedCaption {
    /// Validate tokens: at least one, exactly one `root` relation, heads in range.
    pub fn new(caption_id: CaptionId, text: Option<String>, tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Integrity(format!("parse of {caption_id} has no tokens")));
        }
        let roots: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.deprel.eq_ignore_ascii_case("root"))
            .map(|(i, _)| i)
            .collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => {
                return Err(Error::Integrity(format!(
                    "parse of {caption_id} has no root token"
                )))
            }
            _ => {
                return Err(Error::Integrity(format!(
                    "parse of {caption_id} has {} root tokens",
                    roots.len()
                )))
            }
        };
        for (i, t) in tokens.iter().enumerate() {
            match t.head {
                None if i != root => {
                    return Err(Error::Integrity(format!(
                        "parse of {caption_id}: token {} attaches to 0 but is not the root",
                        i + 1
                    )))
                }
                Some(h) if h >= tokens.len() => {
                    return Err(Error::Integrity(format!(
                        "parse of {caption_id}: token {} has head {} out of range",
                        i + 1,
                        h + 1
                    )))
                }
                _ => {}
            }
        }
        if tokens[root].head.is_some() {
            return Err(Error::Integrity(format!(
                "parse of {caption_id}: root token must attach to 0"
            )));
        }
        Ok(ParsedCaption {
            caption_id,
            text,
            tokens,
            root,
        })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn head_index(&self) -> usize {
        self.root
    }

    /// Text the tokens were aligned against: the `# text` comment, or the
    /// tokens joined by single spaces.
    pub fn sentence(&self) -> String {
        match &self.text {
            Some(t) if self.align(t).is_some() => t.clone(),
            _ => self.joined(),
        }
    }

    fn joined(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Byte spans of each token in `text`, if every token appears in order
    /// separated only by whitespace.
    pub fn align(&self, text: &str) -> Option<Vec<Range<usize>>> {
        let mut cursor = 0;
        let mut spans = Vec::with_capacity(self.tokens.len());
        for t in &self.tokens {
            let rest = &text[cursor..];
            let skipped = rest.len() - rest.trim_start().len();
            let start = cursor + skipped;
            if !text[start..].starts_with(&t.surface) {
                return None;
            }
            cursor = start + t.surface.len();
            spans.push(start..cursor);
        }
        if text[cursor..].trim().is_empty() {
            Some(spans)
        } else {
            None
        }
    }

    /// [`Self::sentence`] with token `index` replaced by `replacement`.
    pub fn splice(&self, index: usize, replacement: &str) -> String {
        if let Some(text) = &self.text {
            if let Some(spans) = self.align(text) {
                let span = &spans[index];
                return format!("{}{}{}", &text[..span.start], replacement, &text[span.end..]);
            }
        }
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| if i == index { replacement } else { t.surface.as_str() })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// The root token's data.
pub fn extract_head(parsed: &ParsedCaption) -> Head {
    let t = &parsed.tokens[parsed.root];
    Head {
        index: parsed.root,
        surface: t.surface.clone(),
        lemma: t.lemma.clone(),
        upos: t.upos,
    }
}

/// Render parses as CoNLL-U (`# sent_id` and `# text` comments, ten columns,
/// `_` for unused fields), in caption-id order.
pub fn write_conllu<'a>(parses: impl IntoIterator<Item = &'a ParsedCaption>) -> String {
    let mut out = String::new();
    for p in parses {
        out.push_str(&format!("# sent_id = {}\n", p.caption_id));
        out.push_str(&format!("# text = {}\n", p.sentence()));
        for (i, t) in p.tokens.iter().enumerate() {
            let head = t.head.map_or(0, |h| h + 1);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_\n",
                i + 1,
                t.surface,
                t.lemma,
                t.upos,
                head,
                t.deprel
            ));
        }
        out.push('\n');
    }
    out
}

pub fn save_parses<'a>(
    path: impl AsRef<Path>,
    parses: impl IntoIterator<Item = &'a ParsedCaption>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_conllu(parses)).map_err(|e| Error::io(path, e))
}

/// Parse CoNLL-U text. `origin` names the source in error messages.
pub fn parse_conllu(
    reader: impl BufRead,
    origin: &Path,
) -> Result<BTreeMap<CaptionId, ParsedCaption>> {
    struct Pending {
        id: Option<CaptionId>,
        text: Option<String>,
        tokens: Vec<Token>,
        first_line: usize,
    }

    fn finish(
        p: Pending,
        origin: &Path,
        out: &mut BTreeMap<CaptionId, ParsedCaption>,
    ) -> Result<()> {
        if p.tokens.is_empty() && p.id.is_none() {
            return Ok(());
        }
        let id = p.id.ok_or_else(|| {
            Error::parse(origin, format!("line {}", p.first_line), "sentence without `# sent_id`")
        })?;
        let parsed = ParsedCaption::new(id.clone(), p.text, p.tokens).map_err(|e| match e {
            Error::Integrity(m) => Error::parse(origin, format!("line {}", p.first_line), m),
            other => other,
        })?;
        if out.insert(id.clone(), parsed).is_some() {
            return Err(Error::parse(
                origin,
                format!("line {}", p.first_line),
                format!("duplicate sentence id {id}"),
            ));
        }
        Ok(())
    }

    let new_pending = |line| Pending {
        id: None,
        text: None,
        tokens: Vec::new(),
        first_line: line,
    };

    let mut out = BTreeMap::new();
    let mut cur = new_pending(1);
    for (n, line) in reader.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(std::mem::replace(&mut cur, new_pending(lineno + 1)), origin, &mut out)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => cur.id = Some(CaptionId(value.trim().to_string())),
                    "text" => cur.text = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = |msg: String| Error::parse(origin, format!("line {lineno}"), msg);
        if cols.len() < 8 {
            return Err(bad(format!("expected at least 8 columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| bad(format!("bad token id `{}`", cols[0])))?;
        if id != cur.tokens.len() + 1 {
            return Err(bad(format!("token id {id} out of sequence")));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| bad(format!("bad head `{}`", cols[6])))?;
        let upos = cols[3].parse().map_err(bad)?;
        cur.tokens.push(Token {
            surface: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos,
            head: head.checked_sub(1),
            deprel: cols[7].to_string(),
        });
    }
    finish(cur, origin, &mut out)?;
    Ok(out)
}

/// Load a parse file keyed by caption id.
pub fn load_parses(path: impl AsRef<Path>) -> Result<BTreeMap<CaptionId, ParsedCaption>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWING: &str = "\
# sent_id = cap:1#0
# text = A man is swinging a club with both hands.
1\tA\ta\tDET\tDT\t_\t2\tdet\t_\t_
2\tman\tman\tNOUN\tNN\t_\t4\tnsubj\t_\t_
3\tis\tbe\tAUX\tVBZ\t_\t4\taux\t_\t_
4\tswinging\tswing\tVERB\tVBG\t_\t0\troot\t_\t_
5\ta\ta\tDET\tDT\t_\t6\tdet\t_\t_
6\tclub\tclub\tNOUN\tNN\t_\t4\tobj\t_\t_
7\twith\twith\tADP\tIN\t_\t9\tcase\t_\t_
8\tboth\tboth\tDET\tDT\t_\t9\tdet\t_\t_
9\thands\thand\tNOUN\tNNS\t_\t4\tobl\t_\t_
10\t.\t.\tPUNCT\t.\t_\t4\tpunct\t_\t_
";

    fn parse(s: &str) -> Result<BTreeMap<CaptionId, ParsedCaption>> {
        parse_conllu(s.as_bytes(), Path::new("fixture.conllu"))
    }

    #[test]
    fn conllu_round_trip() {
        let parsed = parse(SWING).unwrap();
        let again = parse(&write_conllu(parsed.values())).unwrap();
        assert_eq!(parsed, again);
    }

    #[test]
    fn head_of_swing_fixture() {
        let parses = parse(SWING).unwrap();
        let p = &parses[&CaptionId("cap:1#0".into())];
        let h = extract_head(p);
        assert_eq!(h.index, 3);
        assert_eq!(h.surface, "swinging");
        assert_eq!(h.lemma, "swing");
        assert_eq!(h.upos, Upos::Verb);
    }

    #[test]
    fn root_at_third_token() {
        let s = "# sent_id = s\n1\tx\tx\tDET\t_\t_\t3\tdet\n2\ty\ty\tADJ\t_\t_\t3\tamod\n3\tz\tz\tNOUN\t_\t_\t0\troot\n";
        let p = parse(s).unwrap();
        assert_eq!(p[&CaptionId("s".into())].head_index(), 2);
    }

    #[test]
    fn two_roots_rejected() {
        let s = "# sent_id = s\n1\tx\tx\tNOUN\t_\t_\t0\troot\n2\ty\ty\tNOUN\t_\t_\t0\troot\n";
        match parse(s) {
            Err(Error::Parse { location, message, .. }) => {
                assert_eq!(location, "line 1");
                assert!(message.contains("2 root"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_sent_id_rejected() {
        let s = "1\tx\tx\tNOUN\t_\t_\t0\troot\n";
        assert!(matches!(parse(s), Err(Error::Parse { .. })));
    }

    #[test]
    fn short_row_reports_line() {
        let s = "# sent_id = s\n1\tx\tx\n";
        match parse(s) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_token_caption() {
        let s = "# sent_id = s\n1\tBananas\tbanana\tNOUN\t_\t_\t0\troot\n";
        let p = parse(s).unwrap();
        let h = extract_head(&p[&CaptionId("s".into())]);
        assert_eq!((h.index, h.surface.as_str()), (0, "Bananas"));
    }

    #[test]
    fn proper_noun_head_returned_unchanged() {
        let s = "# sent_id = s\n1\tParis\tParis\tPROPN\t_\t_\t0\troot\n";
        let p = parse(s).unwrap();
        assert_eq!(extract_head(&p[&CaptionId("s".into())]).upos, Upos::Propn);
    }

    #[test]
    fn splice_preserves_original_spacing() {
        let parses = parse(SWING).unwrap();
        let p = &parses[&CaptionId("cap:1#0".into())];
        assert_eq!(
            p.splice(3, "flying"),
            "A man is flying a club with both hands."
        );
    }

    #[test]
    fn splice_falls_back_to_joined_tokens() {
        let mut p = parse(SWING).unwrap().remove(&CaptionId("cap:1#0".into())).unwrap();
        p.text = Some("text that does not align".into());
        assert_eq!(
            p.splice(1, "mime"),
            "A mime is swinging a club with both hands ."
        );
    }
}
