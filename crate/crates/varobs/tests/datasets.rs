use varobs::data::{bin_counts, generate, DatasetConfig, Family, QubitInput, Sampler, TrainingSet};
use varobs::state::negativity;

fn histogram(labels: &[f64], bins: usize) -> Vec<usize> {
    let mut h = vec![0; bins];
    for &l in labels {
        h[((l * bins as f64).floor() as usize).min(bins - 1)] += 1;
    }
    h
}

#[test]
fn binned_pure_sampler_fills_bins_exactly() {
    let set = generate(&DatasetConfig::new(Family::RandomPure, Sampler::Binned { count: 103, bins: 10 }).seed(4)).unwrap();
    assert_eq!(histogram(&set.labels(), 10), bin_counts(103, 10));
    for e in &set.entries {
        assert!((negativity(&e.state).unwrap() - e.label).abs() < 1e-9);
    }
}

#[test]
fn binned_mixed_sampler_fills_bins_exactly() {
    let set = generate(&DatasetConfig::new(Family::RandomMixed, Sampler::Binned { count: 60, bins: 20 }).seed(9)).unwrap();
    assert_eq!(histogram(&set.labels(), 20), vec![3; 20]);
}

#[test]
fn squared_labels_are_binned_on_the_square() {
    let set = generate(
        &DatasetConfig::new(Family::RandomPure, Sampler::Binned { count: 40, bins: 20 })
            .copies(2)
            .label_power(2)
            .seed(1),
    )
    .unwrap();
    assert_eq!(set.n_qubits(), 4);
    assert_eq!(histogram(&set.labels(), 20), vec![2; 20]);
}

#[test]
fn generation_is_deterministic_and_seed_sensitive() {
    let cfg = DatasetConfig::new(Family::RandomMixed, Sampler::Binned { count: 20, bins: 5 }).seed(77);
    assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    assert_ne!(generate(&cfg).unwrap(), generate(&cfg.clone().seed(78)).unwrap());
}

fn assert_same_contents(a: &TrainingSet, b: &TrainingSet) {
    assert_eq!(a.len(), b.len());
    assert_eq!((a.copies, a.label_range, a.label_power, a.seed), (b.copies, b.label_range, b.label_power, b.seed));
    assert_eq!(a.family, b.family);
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(x.label, y.label);
        assert_eq!(x.state, y.state);
        assert_eq!(x.family_tag, y.family_tag);
    }
}

#[test]
fn json_roundtrip_preserves_sets() {
    let configs = [
        DatasetConfig::new(Family::AmplitudeDamping { input: QubitInput::Plus }, Sampler::Uniform { count: 7 }).seed(3),
        DatasetConfig::new(Family::BellType, Sampler::Grid { count: 5 }).copies(2),
        DatasetConfig::new(Family::RandomPure, Sampler::Binned { count: 10, bins: 5 }).seed(8),
        DatasetConfig::new(
            Family::Ising {
                n_qubits: 4,
                coupling: 1.0,
                h_min: 0.05,
                h_max: 2.0,
            },
            Sampler::Linspace { count: 4 },
        ),
    ];
    for cfg in configs {
        let set = generate(&cfg).unwrap();
        let back = TrainingSet::from_json(&set.to_json().unwrap()).unwrap();
        assert_same_contents(&back, &set);
    }
}

#[test]
fn malformed_json_is_rejected() {
    let set = generate(&DatasetConfig::new(Family::Isotropic, Sampler::Grid { count: 2 })).unwrap();
    let text = set.to_json().unwrap();
    assert!(text.contains("\"schema_version\":1"));
    assert!(TrainingSet::from_json(&text.replace("\"schema_version\":1", "\"schema_version\":99")).is_err());
    assert!(TrainingSet::from_json(&text[..text.len() / 2]).is_err());
    assert!(TrainingSet::from_json_bytes(&[0xff, 0xfe, 0x00]).is_err());
}

#[test]
fn ising_sets_respect_the_field_floor() {
    let family = Family::Ising {
        n_qubits: 4,
        coupling: 1.0,
        h_min: 0.0,
        h_max: 1.0,
    };
    assert!(generate(&DatasetConfig::new(family, Sampler::Linspace { count: 3 })).is_err());
}
