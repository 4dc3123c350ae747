//! Build text and image embedding sets, merge them by averaging and by
//! concatenation, and round-trip a merged set through its manifest.
//!
//! ```bash
//! cargo run -p vsprobe --example merge_embeddings
//! ```

use vsprobe::corpus::generate_synthetic_corpus;
use vsprobe::embeddings::{load_embeddings, merge_avg, merge_concat};
use vsprobe::synthetic::{image_embeddings, text_embeddings};

fn main() -> vsprobe::Result<()> {
    let (corpus, truth) = generate_synthetic_corpus(50, 20, 7);
    let texts = corpus
        .captions()
        .iter()
        .map(|(id, c)| (id.0.as_str(), c.text.as_str()));
    let text = text_embeddings("toy", texts, 16, 1)?;
    let image = image_embeddings("toy", &truth, 16, 0.5, 2)?;

    let avg = merge_avg(&text, &image, &corpus)?;
    let conc = merge_concat(&text, &image, &corpus)?;
    for set in [&text, &image, &avg, &conc] {
        println!(
            "{:<6} {:>4} vectors of dim {:>2}",
            set.modality().variant(),
            set.len(),
            set.dim()
        );
    }

    // Each caption is paired with its own image.
    let (id, caption) = corpus.captions().iter().next().expect("captions");
    let image_id = &caption.image.0;
    let v = conc.get(&id.0).expect("merged vector");
    assert_eq!(&v[..16], text.get(&id.0).unwrap());
    assert_eq!(&v[16..], image.get(image_id).unwrap());
    println!("{id} = text({id}) ++ image({image_id})");

    let dir = tempfile::tempdir().expect("temp dir");
    let manifest = dir.path().join("toy.conc.emb.jsonl");
    conc.save(&manifest)?;
    // Manifests store components as f32.
    let back = load_embeddings(&manifest)?;
    for (id, v) in conc.iter() {
        let w = back.get(id).expect("same ids");
        assert!(v.iter().zip(w).all(|(a, b)| *a as f32 == *b as f32));
    }
    println!("round trip through {} ok", manifest.file_name().unwrap().to_string_lossy());
    Ok(())
}
