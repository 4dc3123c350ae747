//! Generate a synthetic COCO-style corpus and print what the probing tasks
//! will see: split sizes, object-count bins and single-category images.
//!
//! ```bash
//! cargo run -p vsprobe --example corpus_stats
//! ```

use std::collections::BTreeMap;

use vsprobe::corpus::{generate_synthetic_corpus, Split, SplitAssignment};
use vsprobe::tasks::{bin_names, bin_num_objects};

fn main() -> vsprobe::Result<()> {
    let (corpus, _) = generate_synthetic_corpus(500, 40, 1974);
    let splits = SplitAssignment::random(&corpus, 0.6, 0.2, 1974);

    println!(
        "{} images, {} captions, {} categories in {} supercategories, {} instances",
        corpus.images().len(),
        corpus.captions().len(),
        corpus.categories().len(),
        corpus.supercategories().len(),
        corpus.instances().len()
    );
    for split in Split::ALL {
        println!("  {:<10} {:>4} images", split.name(), splits.sizes()[&split]);
    }

    let names = bin_names();
    let mut bins = vec![0usize; names.len()];
    let mut single_category = BTreeMap::<String, usize>::new();
    for image in corpus.images().keys() {
        bins[bin_num_objects(corpus.count_object_instances(image)?)] += 1;
        let present = corpus.categories_present(image)?;
        if present.len() == 1 {
            let cat = present.iter().next().expect("one category");
            *single_category
                .entry(corpus.categories()[cat].name.clone())
                .or_default() += 1;
        }
    }

    println!("\nobject-count bins (crowd regions count once):");
    for (name, n) in names.iter().zip(&bins) {
        println!("  {name:<6} {n:>4}");
    }

    let mut top: Vec<_> = single_category.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    println!("\nmost frequent single-category images:");
    for (name, n) in top.iter().take(5) {
        println!("  {name:<14} {n:>3}");
    }
    Ok(())
}
