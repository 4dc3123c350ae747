//! The whole command-line workflow on a synthetic workspace, driven through
//! the same entry point as the `vsprobe` binary: tamper captions, build the
//! three tasks, probe them and print the report.
//!
//! ```bash
//! cargo run -p vsprobe --release --example full_pipeline [-- <workdir>]
//! ```

use std::path::{Path, PathBuf};

use vsprobe::synthetic::{tampered_embeddings, write_workspace, WorkspaceConfig};
use vsprobe::tamper::load_tampered;

fn vsprobe(args: &[&str]) {
    println!("$ vsprobe {}", args.join(" "));
    let code = vsprobe::cli::run(std::iter::once("vsprobe").chain(args.iter().copied()));
    if code != 0 {
        eprintln!("command failed with exit code {code}");
        std::process::exit(code);
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn main() -> vsprobe::Result<()> {
    let temp;
    let dir: PathBuf = match std::env::args().nth(1) {
        Some(d) => d.into(),
        None => {
            temp = tempfile::tempdir().expect("temp dir");
            temp.path().to_path_buf()
        }
    };
    let config = WorkspaceConfig::default();
    let ws = write_workspace(&dir, &config)?;
    let seed = config.seed.to_string();

    let tampered = dir.join("tampered.jsonl");
    let captions = ws.corpus_dir.join("captions.json");
    vsprobe(&[
        "tamper", "--captions", s(&captions), "--parses", s(&ws.parses), "--lexicon", s(&ws.lexicon),
        "--seed", &seed, "--out", s(&tampered),
    ]);
    // Stand-in for running the text encoder over the modified captions.
    let tampered_emb = dir.join("tampered.emb.jsonl");
    tampered_embeddings(&load_tampered(&tampered)?, &config)?.save(&tampered_emb)?;

    let merged = format!("{},{}", s(&ws.text_embeddings), s(&ws.image_embeddings));
    let congruence = format!("{},{}", s(&ws.text_embeddings), s(&tampered_emb));
    let datasets = dir.join("datasets");
    let jobs: [(&str, &str, &str, &[&str]); 5] = [
        ("object-categories", "image", s(&ws.image_embeddings), &[]),
        ("object-categories", "conc", &merged, &["--merge", "conc"]),
        ("num-objects", "text", s(&ws.text_embeddings), &[]),
        ("num-objects", "avg", &merged, &["--merge", "avg"]),
        ("semantic-congruence", "text", &congruence, &["--tampered", s(&tampered)]),
    ];
    let results = dir.join("results");
    for (task, variant, embeddings, extra) in jobs {
        let out = datasets.join(format!("{task}.{variant}.jsonl"));
        let mut args = vec![
            "build-task", "--task", task, "--corpus", s(&ws.corpus_dir), "--splits", s(&ws.splits),
            "--embeddings", embeddings, "--seed", &seed, "--out", s(&out),
        ];
        args.extend(extra);
        vsprobe(&args);
        for probe in ["mlp", "linear"] {
            vsprobe(&[
                "probe", "--dataset", s(&out), "--probe", probe, "--runs", "3",
                "--seed", &seed, "--out", s(&results),
            ]);
        }
    }
    vsprobe(&["report", "--results", s(&results), "--format", "text"]);
    Ok(())
}
