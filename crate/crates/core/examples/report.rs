//! Run the object-count probes over all four embedding variants, then
//! render the text, CSV and JSON reports with the improvement by merging.
//!
//! ```bash
//! cargo run -p vsprobe --release --example report
//! ```

use std::collections::BTreeMap;

use vsprobe::corpus::{generate_synthetic_corpus, SplitAssignment};
use vsprobe::embeddings::{merge_avg, merge_concat};
use vsprobe::eval::{merging_improvement, render_report, run_experiment, ReportFormat};
use vsprobe::probes::{ProbeKind, ProbeSpec, TrainConfig};
use vsprobe::synthetic::{image_embeddings, text_embeddings};
use vsprobe::tasks::{build_num_objects, majority_baseline, TaskKind, TaskOptions};

fn main() -> vsprobe::Result<()> {
    let (corpus, truth) = generate_synthetic_corpus(400, 40, 1974);
    let splits = SplitAssignment::random(&corpus, 0.6, 0.2, 1974);
    let texts = corpus.captions().iter().map(|(id, c)| (id.0.as_str(), c.text.as_str()));
    let text = text_embeddings("toy", texts, 16, 1)?;
    let image = image_embeddings("toy", &truth, 16, 0.1, 2)?;
    let avg = merge_avg(&text, &image, &corpus)?;
    let conc = merge_concat(&text, &image, &corpus)?;

    let config = TrainConfig {
        learning_rate: TaskKind::NumObjects.default_learning_rate(),
        ..TrainConfig::default()
    };
    let mut cells = Vec::new();
    let mut baselines = BTreeMap::new();
    for set in [&text, &image, &avg, &conc] {
        let d = build_num_objects(&corpus, &splits, set, &TaskOptions::default())?;
        baselines.insert(d.task, majority_baseline(&d)?);
        let specs = [ProbeKind::Mlp, ProbeKind::Linear].map(|k| ProbeSpec::new(k, d.dim, d.num_classes));
        cells.extend(run_experiment(&d, &specs, &config, 3)?);
    }

    print!("{}", render_report(&cells, &baselines, ReportFormat::Text)?);
    println!();
    print!("{}", render_report(&cells, &baselines, ReportFormat::Csv)?);
    for m in merging_improvement(&cells)? {
        println!("{} {} {}: merging improves by {:+.3}", m.task, m.model, m.probe, m.delta);
    }
    Ok(())
}
