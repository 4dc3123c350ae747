//! Convert WordNet 3.x database files into the lexicon format used by the
//! tamper pipeline, and show the same-category neighbours of a word.
//!
//! ```bash
//! cargo run -p vsprobe --example convert_wordnet -- /usr/share/wordnet dog lexicon.json
//! ```
//!
//! Without arguments a three-synset excerpt of `data.noun` is converted.

use std::path::PathBuf;

use vsprobe::tamper::{Lexicon, Pos};

const EXCERPT: &str = "  1 This software and database is being provided to you, the LICENSEE, by
02084071 05 n 02 dog 0 domestic_dog 0 001 @ 02083346 n 0000 | a member of the genus Canis
02121620 05 n 02 cat 0 true_cat 0 001 @ 02120997 n 0000 | feline mammal usually having thick soft fur
10787470 18 n 02 woman 0 Eve 0 001 @ 09619168 n 0000 | an adult female person
";

fn main() -> vsprobe::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let temp = tempfile::tempdir().expect("temp dir");
    let dir: PathBuf = match args.first() {
        Some(d) => d.into(),
        None => {
            std::fs::write(temp.path().join("data.noun"), EXCERPT).expect("write excerpt");
            temp.path().to_path_buf()
        }
    };
    let word = args.get(1).map(String::as_str).unwrap_or("dog");

    let lexicon = Lexicon::from_wordnet_dir(&dir)?;
    println!("{} synsets from {}", lexicon.len(), dir.display());
    for sense in lexicon.senses(word, Pos::Noun) {
        let neighbours: Vec<&str> = lexicon
            .in_category(Pos::Noun, &sense.category)
            .filter(|s| s.id != sense.id)
            .flat_map(|s| s.lemmas.iter().filter(|l| !s.is_proper_noun(l)).map(String::as_str))
            .take(10)
            .collect();
        println!("{word} [{}, {}]: {}", sense.id, sense.category, sense.gloss);
        println!("  same category: {}", neighbours.join(", "));
    }
    if let Some(out) = args.get(2) {
        lexicon.save(out)?;
        println!("wrote {out}");
    }
    Ok(())
}
