//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use vsprobe::corpus::{load_captions, CaptionId, CorpusIndex};
use vsprobe::seed;
use vsprobe::tamper::{
    generate_candidates, load_parses, Lexicon, NgramScorer, ParsedCaption, SentenceScorer,
    TamperConfig, TamperOutcome,
};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub struct TamperFixture {
    pub corpus: CorpusIndex,
    pub parses: BTreeMap<CaptionId, ParsedCaption>,
    pub lexicon: Lexicon,
}

/// Load `<prefix>captions.json`, `<prefix>conllu` / `parses.conllu` and
/// `<prefix>lexicon.json` from the tamper fixture directory.
pub fn tamper_fixture(set: Option<&str>) -> TamperFixture {
    let (captions, parses, lexicon) = match set {
        None => ("captions.json".to_string(), "parses.conllu".to_string(), "lexicon.json".to_string()),
        Some(s) => (format!("{s}.captions.json"), format!("{s}.conllu"), format!("{s}.lexicon.json")),
    };
    TamperFixture {
        corpus: load_captions(fixture(&format!("tamper/{captions}"))).unwrap(),
        parses: load_parses(fixture(&format!("tamper/{parses}"))).unwrap(),
        lexicon: Lexicon::load(fixture(&format!("tamper/{lexicon}"))).unwrap(),
    }
}

/// A trigram scorer trained on the fixture's own captions.
pub fn corpus_scorer(corpus: &CorpusIndex) -> NgramScorer {
    NgramScorer::train(corpus.captions().values().map(|c| c.text.as_str()))
}

/// Check every tampered caption against the pipeline's contract. Returns
/// one message per violation.
pub fn tamper_violations(
    fx: &TamperFixture,
    outcome: &TamperOutcome,
    scorer: &mut dyn SentenceScorer,
    config: &TamperConfig,
) -> Vec<String> {
    let mut bad = Vec::new();
    for (id, t) in &outcome.tampered {
        let mut parsed = fx.parses[id].clone();
        let text = &fx.corpus.caption(id).unwrap().text;
        parsed.text = Some(text.clone());
        let spans = match parsed.align(text) {
            Some(s) => s,
            None => {
                bad.push(format!("{id}: parse does not align with caption"));
                continue;
            }
        };

        // Exactly the head token changed.
        if t.head_index != parsed.head_index() {
            bad.push(format!("{id}: replaced token {} is not the head", t.head_index));
        }
        let span = &spans[parsed.head_index()];
        let (pre, post) = (&text[..span.start], &text[span.end..]);
        let ok = t.modified.starts_with(pre)
            && t.modified.ends_with(post)
            && t.modified.len() >= pre.len() + post.len();
        if !ok {
            bad.push(format!("{id}: `{}` differs outside the head", t.modified));
            continue;
        }
        let word = &t.modified[pre.len()..t.modified.len() - post.len()];
        if word.is_empty() || word.contains(char::is_whitespace) {
            bad.push(format!("{id}: replacement `{word}` is not one token"));
        }
        if word.to_lowercase() == text[span.clone()].to_lowercase() {
            bad.push(format!("{id}: replacement equals the original word"));
        }

        // Category, proper-noun and synonym constraints.
        let source = fx.lexicon.synset(&t.source_synset).unwrap();
        let repl = fx.lexicon.synset(&t.replacement_synset).unwrap();
        if source.category != repl.category || source.pos != repl.pos {
            bad.push(format!(
                "{id}: category {} replaced from {}",
                source.category, repl.category
            ));
        }
        if !repl.lemmas.contains(&t.replacement_lemma) {
            bad.push(format!("{id}: lemma {} not in its synset", t.replacement_lemma));
        }
        if repl.is_proper_noun(&t.replacement_lemma) {
            bad.push(format!("{id}: proper noun {}", t.replacement_lemma));
        }
        if source
            .lemmas
            .iter()
            .any(|l| l.eq_ignore_ascii_case(&t.replacement_lemma))
        {
            bad.push(format!("{id}: {} is a synonym of the head", t.replacement_lemma));
        }

        // Selection is the first maximum over at most N candidates.
        let mut rng = seed::rng_for(config.seed, &id.0);
        let cands = generate_candidates(&parsed, &fx.lexicon, config, &mut rng);
        if cands.len() > config.num_candidates {
            bad.push(format!("{id}: {} candidates", cands.len()));
        }
        let sentences: Vec<String> = cands.iter().map(|c| c.modified.clone()).collect();
        let scores = scorer.score(&sentences).unwrap();
        let best = scores
            .iter()
            .enumerate()
            .fold(0, |b, (i, &s)| if s > scores[b] { i } else { b });
        if sentences.get(best) != Some(&t.modified) || t.score != Some(scores[best]) {
            bad.push(format!("{id}: `{}` is not the argmax", t.modified));
        }
    }
    bad
}

// ---------------------------------------------------------------------------
// Probes

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsprobe::probes::{init_params, loss_and_grads, Matrix, Mode, ProbeKind, ProbeSpec};

/// Denominator floor of the relative error, so that gradients that are zero
/// up to rounding compare by absolute error.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Maximum relative error between analytic gradients and central finite
/// differences (step `eps`) for one random probe of `kind`. Sizes are drawn
/// from 2..=8; train-mode dropout uses the same mask for every evaluation.
pub fn gradient_check(kind: ProbeKind, fixture: u64, eps: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(fixture);
    let mut spec = ProbeSpec::new(kind, rng.gen_range(2..=8), rng.gen_range(2..=8));
    spec.hidden_dim = rng.gen_range(2..=8);
    let n = rng.gen_range(2..=8);
    let batch = Matrix::from_vec(
        n,
        spec.input_dim,
        (0..n * spec.input_dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
    );
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..spec.num_classes)).collect();
    let mut params = init_params(&spec, &mut rng);
    for v in params.values_mut() {
        *v += rng.gen_range(-0.5..0.5);
    }
    let mode = if fixture.is_multiple_of(2) { Mode::Train } else { Mode::Eval };
    let mask_seed = rng.gen::<u64>();
    let loss = |p: &vsprobe::probes::ProbeParams| {
        let mut r = ChaCha8Rng::seed_from_u64(mask_seed);
        loss_and_grads(&spec, p, &batch, &labels, mode, &mut r).unwrap()
    };
    let (_, grads, _) = loss(&params);
    let analytic: Vec<f64> = grads.values().copied().collect();

    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut plus = params.clone();
        *plus.values_mut().nth(i).unwrap() += eps;
        let mut minus = params.clone();
        *minus.values_mut().nth(i).unwrap() -= eps;
        let numeric = (loss(&plus).0 - loss(&minus).0) / (2.0 * eps);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        worst = worst.max(rel);
    }
    worst
}

// ---------------------------------------------------------------------------
// Command line

use std::path::Path;
use std::process::{Command, Output};

use vsprobe::synthetic::{tampered_embeddings, write_workspace, WorkspaceConfig};
use vsprobe::tamper::load_tampered;

pub fn vsprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsprobe"))
        .args(args)
        .env_remove("VSPROBE_DATA")
        .output()
        .expect("spawn vsprobe")
}

/// Run and require exit code 0.
pub fn vsprobe_ok(args: &[&str]) -> Output {
    let out = vsprobe(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "vsprobe {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// The whole command-line pipeline on a synthetic workspace: tamper, build
/// all three tasks (every variant for the visual tasks), probe each dataset
/// with both probe kinds, and render the text report. Returns the report.
pub fn run_pipeline(dir: &Path, ws: &WorkspaceConfig, epochs: usize, runs: usize) -> String {
    let w = write_workspace(dir, ws).unwrap();
    let captions = w.corpus_dir.join("captions.json");
    let tampered = dir.join("tampered.jsonl");
    vsprobe_ok(&[
        "tamper", "--captions", s(&captions), "--parses", s(&w.parses), "--lexicon", s(&w.lexicon),
        "--seed", &ws.seed.to_string(), "--out", s(&tampered),
    ]);
    let tampered_emb = dir.join("tampered.emb.jsonl");
    tampered_embeddings(&load_tampered(&tampered).unwrap(), ws)
        .unwrap()
        .save(&tampered_emb)
        .unwrap();

    let seed = ws.seed.to_string();
    let common = ["--corpus", s(&w.corpus_dir), "--splits", s(&w.splits), "--seed", &seed];
    let datasets = dir.join("datasets");
    let mut archives = Vec::new();
    for task in ["object-categories", "num-objects"] {
        for (variant, emb, merge) in [
            ("text", w.text_embeddings.clone(), None),
            ("image", w.image_embeddings.clone(), None),
            ("avg", w.text_embeddings.clone(), Some("avg")),
            ("conc", w.text_embeddings.clone(), Some("conc")),
        ] {
            let out = datasets.join(format!("{task}.{variant}.jsonl"));
            let emb = match merge {
                Some(_) => format!("{},{}", s(&emb), s(&w.image_embeddings)),
                None => s(&emb).to_string(),
            };
            let mut args = vec!["build-task", "--task", task, "--embeddings", &emb, "--out", s(&out)];
            args.extend(common);
            if let Some(m) = merge {
                args.extend(["--merge", m]);
            }
            vsprobe_ok(&args);
            archives.push(out);
        }
    }
    let sc = datasets.join("semantic-congruence.text.jsonl");
    let emb = format!("{},{}", s(&w.text_embeddings), s(&tampered_emb));
    let mut args = vec![
        "build-task", "--task", "semantic-congruence", "--embeddings", &emb,
        "--tampered", s(&tampered), "--out", s(&sc),
    ];
    args.extend(common);
    vsprobe_ok(&args);
    archives.push(sc);

    let results = dir.join("results");
    let (epochs, runs) = (epochs.to_string(), runs.to_string());
    for archive in &archives {
        for probe in ["mlp", "linear"] {
            vsprobe_ok(&[
                "probe", "--dataset", s(archive), "--probe", probe, "--epochs", &epochs,
                "--runs", &runs, "--seed", &seed, "--out", s(&results),
            ]);
        }
    }
    let out = vsprobe_ok(&["report", "--results", s(&results), "--format", "text"]);
    String::from_utf8(out.stdout).unwrap()
}
