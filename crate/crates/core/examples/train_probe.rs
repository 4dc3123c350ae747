//! Train an MLP and a linear probe on one dataset, print the per-epoch
//! history and test accuracy, and save the MLP weights.
//!
//! ```bash
//! cargo run -p vsprobe --release --example train_probe
//! ```

use vsprobe::corpus::{generate_synthetic_corpus, Split, SplitAssignment};
use vsprobe::embeddings::merge_concat;
use vsprobe::eval::accuracy;
use vsprobe::probes::io::{load_weights, save_weights};
use vsprobe::probes::{predict, train, ProbeKind, ProbeSpec, TrainConfig};
use vsprobe::synthetic::{image_embeddings, text_embeddings};
use vsprobe::tasks::{build_num_objects, majority_baseline, TaskKind, TaskOptions};

fn main() -> vsprobe::Result<()> {
    let (corpus, truth) = generate_synthetic_corpus(400, 40, 7);
    let splits = SplitAssignment::random(&corpus, 0.6, 0.2, 7);
    let texts = corpus.captions().iter().map(|(id, c)| (id.0.as_str(), c.text.as_str()));
    let text = text_embeddings("toy", texts, 16, 1)?;
    let image = image_embeddings("toy", &truth, 16, 0.1, 2)?;
    let dataset = build_num_objects(&corpus, &splits, &merge_concat(&text, &image, &corpus)?, &TaskOptions::default())?;

    let config = TrainConfig {
        learning_rate: TaskKind::NumObjects.default_learning_rate(),
        ..TrainConfig::default()
    };
    let test = dataset.split(Split::Test);
    let vectors: Vec<&[f64]> = test.iter().map(|s| s.vector.as_slice()).collect();
    let labels: Vec<usize> = test.iter().map(|s| s.label).collect();
    println!("majority baseline {:.3}", majority_baseline(&dataset)?);

    let dir = tempfile::tempdir().expect("temp dir");
    for kind in [ProbeKind::Mlp, ProbeKind::Linear] {
        let spec = ProbeSpec::new(kind, dataset.dim, dataset.num_classes);
        let (params, history) = train(&spec, &dataset, &config)?;
        println!("\n{kind} probe, lr {}:", config.learning_rate);
        for e in history.iter().step_by(5) {
            println!("  epoch {:>2}  loss {:.4}  train acc {:.3}", e.epoch, e.train_loss, e.train_acc);
        }
        let acc = accuracy(&predict(&spec, &params, &vectors)?, &labels)?;
        println!("  test accuracy {acc:.3}");

        if kind == ProbeKind::Mlp {
            let path = dir.path().join("mlp.weights");
            save_weights(&path, &spec, &params)?;
            let (_, restored) = load_weights(&path)?;
            assert_eq!(restored, params);
            println!("  weights saved and reloaded");
        }
    }
    Ok(())
}
