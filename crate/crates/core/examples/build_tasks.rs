//! Build the three probing datasets from one corpus and print their class
//! distributions and majority baselines.
//!
//! ```bash
//! cargo run -p vsprobe --example build_tasks
//! ```

use vsprobe::corpus::{generate_synthetic_corpus, Split, SplitAssignment};
use vsprobe::embeddings::merge_concat;
use vsprobe::synthetic::{image_embeddings, template_lexicon, template_parses, text_embeddings};
use vsprobe::tamper::{tamper_corpus, NgramScorer, TamperConfig};
use vsprobe::tasks::{
    build_num_objects, build_object_categories, build_semantic_congruence, majority_baseline,
    ProbeTaskDataset, TaskOptions,
};

fn describe(d: &ProbeTaskDataset) -> vsprobe::Result<()> {
    println!("{} ({} {}, dim {})", d.task, d.model, d.variant, d.dim);
    for split in Split::ALL {
        let counts = d.label_counts(split);
        println!("  {:<10} {:>5} samples", split.name(), d.split(split).len());
        if split == Split::Train {
            let nonzero: Vec<String> = d
                .class_names
                .iter()
                .zip(&counts)
                .filter(|(_, &n)| n > 0)
                .map(|(c, n)| format!("{c}:{n}"))
                .collect();
            println!("    classes {}", nonzero.join(" "));
        }
    }
    println!("  majority baseline {:.3}\n", majority_baseline(d)?);
    Ok(())
}

fn main() -> vsprobe::Result<()> {
    let (corpus, truth) = generate_synthetic_corpus(300, 40, 1974);
    let splits = SplitAssignment::random(&corpus, 0.6, 0.2, 1974);
    let options = TaskOptions::default();

    let texts = corpus.captions().iter().map(|(id, c)| (id.0.as_str(), c.text.as_str()));
    let text = text_embeddings("toy", texts, 16, 1)?;
    let image = image_embeddings("toy", &truth, 16, 0.5, 2)?;
    let conc = merge_concat(&text, &image, &corpus)?;

    describe(&build_object_categories(&corpus, &splits, &image, &options)?)?;
    describe(&build_num_objects(&corpus, &splits, &conc, &options)?)?;

    // Semantic congruence pairs every caption with its tampered version and
    // keeps one of the two at random.
    let parses = template_parses(&corpus)?;
    let mut scorer = NgramScorer::train(corpus.captions().values().map(|c| c.text.as_str()));
    let tampered = tamper_corpus(&corpus, &parses, &template_lexicon(), &mut scorer, &TamperConfig::default())?
        .tampered;
    let original = text_embeddings(
        "toy",
        tampered.values().map(|t| (t.caption_id.0.as_str(), t.original.as_str())),
        16,
        1,
    )?;
    let modified = text_embeddings(
        "toy",
        tampered.values().map(|t| (t.caption_id.0.as_str(), t.modified.as_str())),
        16,
        1,
    )?;
    let (congruence, flips) =
        build_semantic_congruence(&corpus, &splits, &tampered, &original, &modified, None, 1974, &options)?;
    describe(&congruence)?;
    println!("modified captions drawn: {:.1}%", 100.0 * flips.modified_fraction());
    Ok(())
}
