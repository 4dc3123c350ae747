//! Weight and training-history files.
//!
//! A weight file is a JSON header line `{kind, input_dim, num_classes,
//! hidden_dim}` followed, per layer, by one line per weight row and one bias
//! line, all as space-separated shortest round-trip decimals.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dense, EpochStats, Matrix, ProbeKind, ProbeParams, ProbeSpec};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct WeightHeader {
    kind: ProbeKind,
    input_dim: usize,
    num_classes: usize,
    hidden_dim: usize,
}

fn write_row(out: &mut String, row: &[f64]) {
    for (i, x) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{x:?}"));
    }
    out.push('\n');
}

/// Render a weight file; identical parameters give identical bytes.
pub fn weights_to_string(spec: &ProbeSpec, params: &ProbeParams) -> String {
    let header = WeightHeader {
        kind: spec.kind,
        input_dim: spec.input_dim,
        num_classes: spec.num_classes,
        hidden_dim: spec.hidden_dim,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for layer in &params.layers {
        for i in 0..layer.weight.rows() {
            write_row(&mut out, layer.weight.row(i));
        }
        write_row(&mut out, &layer.bias);
    }
    out
}

pub fn save_weights(path: impl AsRef<Path>, spec: &ProbeSpec, params: &ProbeParams) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, weights_to_string(spec, params)).map_err(|e| Error::io(path, e))
}

/// Read a weight file. The returned spec carries default dropout settings,
/// which do not affect prediction.
pub fn load_weights(path: impl AsRef<Path>) -> Result<(ProbeSpec, ProbeParams)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((_, Err(e))) => Err(Error::io(path, e)),
            None => Err(Error::parse(path, "end of file", format!("missing {what}"))),
        }
    };

    let (n, header_line) = next("header")?;
    let header: WeightHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::parse(path, format!("line {n}"), e))?;
    let mut spec = ProbeSpec::new(header.kind, header.input_dim, header.num_classes);
    spec.hidden_dim = header.hidden_dim;

    let mut layers = Vec::new();
    for (rows, cols) in spec.layer_shapes() {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (n, line) = next("weight row")?;
            data.extend(parse_row(path, n, &line, cols)?);
        }
        let (n, line) = next("bias row")?;
        let bias = parse_row(path, n, &line, rows)?;
        layers.push(Dense {
            weight: Matrix::from_vec(rows, cols, data),
            bias,
        });
    }
    Ok((spec, ProbeParams { layers }))
}

fn parse_row(path: &Path, line_no: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let row = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(path, format!("line {line_no}"), format!("bad number {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if row.len() != expected {
        return Err(Error::parse(
            path,
            format!("line {line_no}"),
            format!("expected {expected} values, found {}", row.len()),
        ));
    }
    Ok(row)
}

/// One JSON record per epoch.
pub fn history_to_string(history: &[EpochStats]) -> String {
    let mut out = String::new();
    for h in history {
        out.push_str(&serde_json::to_string(h).expect("stats serialize"));
        out.push('\n');
    }
    out
}

pub fn save_history(path: impl AsRef<Path>, history: &[EpochStats]) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(history_to_string(history).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::init_params;
    use rand::SeedableRng;

    #[test]
    fn weights_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = ProbeSpec::new(ProbeKind::Mlp, 5, 3);
        spec.hidden_dim = 4;
        let params = init_params(&spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        let path = dir.path().join("w.txt");
        save_weights(&path, &spec, &params).unwrap();
        let (spec2, params2) = load_weights(&path).unwrap();
        assert_eq!(spec2.layer_shapes(), spec.layer_shapes());
        assert_eq!(params2, params);
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        fs::write(&path, "{\"kind\":\"linear\",\"input_dim\":2,\"num_classes\":2,\"hidden_dim\":256}\n1 2\n").unwrap();
        assert!(matches!(load_weights(&path), Err(Error::Parse { .. })));
    }
}
