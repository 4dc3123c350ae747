mod common;

use common::{fixture, gradient_check};
use vsprobe::corpus::Split;
use vsprobe::eval::accuracy;
use vsprobe::probes::io::{load_weights, save_weights};
use vsprobe::probes::{
    adam_step, predict, train, AdamConfig, AdamState, Dense, Matrix, ProbeKind, ProbeParams,
    ProbeSpec, TrainConfig,
};
use vsprobe::tasks::ProbeTaskDataset;
use vsprobe::Error;

fn test_accuracy(kind: ProbeKind, name: &str, config: &TrainConfig) -> f64 {
    let data = ProbeTaskDataset::load(fixture(&format!("probes/{name}.jsonl"))).unwrap();
    let spec = ProbeSpec::new(kind, data.dim, data.num_classes);
    let (params, history) = train(&spec, &data, config).unwrap();
    assert_eq!(history.len(), config.epochs);
    let test = data.split(Split::Test);
    let vectors: Vec<&[f64]> = test.iter().map(|s| s.vector.as_slice()).collect();
    let labels: Vec<usize> = test.iter().map(|s| s.label).collect();
    accuracy(&predict(&spec, &params, &vectors).unwrap(), &labels).unwrap()
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for kind in [ProbeKind::Linear, ProbeKind::Mlp] {
        for f in 0..20 {
            let err = gradient_check(kind, 100 + f, 1e-6);
            assert!(err <= 1e-4, "{kind} fixture {f}: relative error {err:e}");
        }
    }
}

#[test]
fn xor_separates_the_probe_kinds() {
    let config = TrainConfig::default();
    let mlp = test_accuracy(ProbeKind::Mlp, "xor", &config);
    let linear = test_accuracy(ProbeKind::Linear, "xor", &config);
    assert!(mlp >= 0.95, "mlp {mlp}");
    assert!(linear <= 0.60, "linear {linear}");
}

#[test]
fn gaussian_is_solved_by_both_probes() {
    let config = TrainConfig::default();
    for kind in [ProbeKind::Mlp, ProbeKind::Linear] {
        let acc = test_accuracy(kind, "gaussian", &config);
        assert!(acc >= 0.99, "{kind} {acc}");
    }
}

#[test]
fn training_is_a_function_of_the_seed() {
    let data = ProbeTaskDataset::load(fixture("probes/gaussian.jsonl")).unwrap();
    let spec = ProbeSpec::new(ProbeKind::Mlp, data.dim, data.num_classes);
    let config = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let a = train(&spec, &data, &config).unwrap();
    let b = train(&spec, &data, &config).unwrap();
    assert_eq!(a, b);
    let c = train(&spec, &data, &TrainConfig { seed: 5, ..config }).unwrap();
    assert_ne!(a.0, c.0);
}

#[test]
fn divergence_is_reported() {
    let data = ProbeTaskDataset::load(fixture("probes/gaussian.jsonl")).unwrap();
    let spec = ProbeSpec::new(ProbeKind::Linear, data.dim, data.num_classes);
    let config = TrainConfig {
        epochs: 2,
        learning_rate: 1e308,
        ..TrainConfig::default()
    };
    match train(&spec, &data, &config) {
        Err(Error::Divergence { .. }) => {}
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn adam_follows_hand_trajectory_on_a_quadratic() {
    // f(x) = (x - 3)^2 from x = 0, lr 0.5, default betas. Computed
    // independently in double precision; the first step is
    // 0.5 * 6 / (6 + 1e-8).
    let expected = [
        0.49999999916666665,
        0.9955864355743378,
        1.4822918697676717,
        1.954084531098864,
        2.403092543067627,
    ];
    let mut p = ProbeParams {
        layers: vec![Dense {
            weight: Matrix::from_vec(1, 1, vec![0.0]),
            bias: vec![],
        }],
    };
    let mut state = AdamState::with_len(1);
    for want in expected {
        let x = p.layers[0].weight.get(0, 0);
        let g = ProbeParams {
            layers: vec![Dense {
                weight: Matrix::from_vec(1, 1, vec![2.0 * (x - 3.0)]),
                bias: vec![],
            }],
        };
        adam_step(&mut p, &g, &mut state, 0.5, &AdamConfig::default()).unwrap();
        let got = p.layers[0].weight.get(0, 0);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn weights_round_trip_through_text() {
    let data = ProbeTaskDataset::load(fixture("probes/gaussian.jsonl")).unwrap();
    let spec = ProbeSpec::new(ProbeKind::Mlp, data.dim, data.num_classes);
    let (params, _) = train(&spec, &data, &TrainConfig { epochs: 1, ..TrainConfig::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.txt");
    save_weights(&path, &spec, &params).unwrap();
    let (spec2, params2) = load_weights(&path).unwrap();
    assert_eq!(spec2.kind, spec.kind);
    assert_eq!(spec2.hidden_dim, spec.hidden_dim);
    assert_eq!(params2, params);
}
