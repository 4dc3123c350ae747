//! Sentence plausibility scorers. Higher scores mean more plausible.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use crate::error::{Error, Result};
use crate::text::words;

pub trait SentenceScorer {
    /// One score per sentence, in order.
    fn score(&mut self, sentences: &[String]) -> Result<Vec<f64>>;
}

/// Scores every sentence with the same value.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantScorer(pub f64);

impl SentenceScorer for ConstantScorer {
    fn score(&mut self, sentences: &[String]) -> Result<Vec<f64>> {
        Ok(vec![self.0; sentences.len()])
    }
}

impl<F> SentenceScorer for F
where
    F: FnMut(&str) -> Result<f64>,
{
    fn score(&mut self, sentences: &[String]) -> Result<Vec<f64>> {
        sentences.iter().map(|s| self(s)).collect()
    }
}

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Add-one smoothed word trigram model.
///
/// The score of a sentence is the mean natural-log probability per predicted
/// token, including the end-of-sentence marker.
#[derive(Debug, Clone, Default)]
pub struct NgramScorer {
    trigrams: HashMap<(String, String, String), u64>,
    bigrams: HashMap<(String, String), u64>,
    vocab_size: usize,
}

impl NgramScorer {
    pub fn train<'a>(sentences: impl IntoIterator<Item = &'a str>) -> Self {
        let mut trigrams = HashMap::new();
        let mut bigrams = HashMap::new();
        let mut vocab = std::collections::HashSet::new();
        for s in sentences {
            let toks = padded(s);
            for w in &toks[2..] {
                vocab.insert(w.clone());
            }
            for win in toks.windows(3) {
                *bigrams.entry((win[0].clone(), win[1].clone())).or_insert(0) += 1;
                *trigrams
                    .entry((win[0].clone(), win[1].clone(), win[2].clone()))
                    .or_insert(0) += 1;
            }
        }
        // +1 reserves mass for unseen words.
        NgramScorer {
            trigrams,
            bigrams,
            vocab_size: vocab.len() + 1,
        }
    }

    pub fn log_prob(&self, u: &str, v: &str, w: &str) -> f64 {
        let key3 = (u.to_string(), v.to_string(), w.to_string());
        let key2 = (u.to_string(), v.to_string());
        let c3 = self.trigrams.get(&key3).copied().unwrap_or(0) as f64;
        let c2 = self.bigrams.get(&key2).copied().unwrap_or(0) as f64;
        ((c3 + 1.0) / (c2 + self.vocab_size as f64)).ln()
    }

    pub fn sentence_score(&self, sentence: &str) -> f64 {
        let toks = padded(sentence);
        let n = toks.len() - 2;
        let total: f64 = toks
            .windows(3)
            .map(|w| self.log_prob(&w[0], &w[1], &w[2]))
            .sum();
        total / n as f64
    }
}

fn padded(sentence: &str) -> Vec<String> {
    let mut toks = vec![BOS.to_string(), BOS.to_string()];
    toks.extend(words(sentence));
    toks.push(EOS.to_string());
    toks
}

impl SentenceScorer for NgramScorer {
    fn score(&mut self, sentences: &[String]) -> Result<Vec<f64>> {
        Ok(sentences.iter().map(|s| self.sentence_score(s)).collect())
    }
}

/// External scorer process speaking the line protocol: one sentence per
/// line on its stdin, one decimal score per line on its stdout.
pub struct ProcessScorer {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
    command: String,
}

impl ProcessScorer {
    /// Spawn `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::io(command, e))?;
        let stdin = child.stdin.take().map(BufWriter::new);
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessScorer {
            child,
            stdin,
            stdout,
            command: command.to_string(),
        })
    }

    fn score_one(&mut self, sentence: &str) -> Result<f64> {
        let fail = |message: String| Error::Scoring {
            sentence: sentence.to_string(),
            message,
        };
        let line = sentence.replace(['\n', '\r'], " ");
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| fail("scorer input closed".into()))?;
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| fail(format!("{}: {e}", self.command)))?;
        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| fail(format!("{}: {e}", self.command)))?;
        if n == 0 {
            return Err(fail(format!("{} closed its output", self.command)));
        }
        reply
            .trim()
            .parse::<f64>()
            .map_err(|_| fail(format!("not a decimal score: {:?}", reply.trim())))
    }
}

impl SentenceScorer for ProcessScorer {
    fn score(&mut self, sentences: &[String]) -> Result<Vec<f64>> {
        sentences.iter().map(|s| self.score_one(s)).collect()
    }
}

impl Drop for ProcessScorer {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.wait();
    }
}
