//! Turn captions into semantically incongruent ones by replacing the
//! syntactic head with a word from the same lexicographer category, ranked
//! by a trigram scorer trained on the corpus.
//!
//! ```bash
//! cargo run -p vsprobe --example tamper_captions
//! ```

use std::collections::BTreeMap;

use vsprobe::corpus::generate_synthetic_corpus;
use vsprobe::synthetic::{template_lexicon, template_parses};
use vsprobe::tamper::{tamper_corpus, NgramScorer, TamperConfig};

fn main() -> vsprobe::Result<()> {
    let (corpus, _) = generate_synthetic_corpus(40, 10, 1974);
    let parses = template_parses(&corpus)?;
    let lexicon = template_lexicon();
    let mut scorer = NgramScorer::train(corpus.captions().values().map(|c| c.text.as_str()));

    let outcome = tamper_corpus(&corpus, &parses, &lexicon, &mut scorer, &TamperConfig::default())?;
    println!(
        "{} captions: {} tampered, {} skipped\n",
        corpus.captions().len(),
        outcome.tampered.len(),
        outcome.skipped.len()
    );
    for t in outcome.tampered.values().take(8) {
        println!("{}", t.caption_id);
        println!("  {}", t.original);
        println!(
            "  {}   [{} -> {}, {}]",
            t.modified, t.original_lemma, t.replacement_lemma, t.replacement_synset
        );
    }

    let mut reasons = BTreeMap::<String, usize>::new();
    for skip in &outcome.skipped {
        *reasons.entry(skip.reason.to_string()).or_default() += 1;
    }
    for (reason, n) in reasons {
        println!("skipped {n:>3}: {reason}");
    }
    Ok(())
}
