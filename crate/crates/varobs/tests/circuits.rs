use proptest::prelude::*;
use rand::Rng as _;
use varobs::ansatz::{build_unitary, AnsatzSpec};
use varobs::linalg::{frobenius_norm, identity, operator_norm, ComplexMatrix, C64};
use varobs::observable::{
    expectation, induced_povm, observable_matrix, outcome_probabilities, projectors, sample_shots, variance,
    ObservableSpec, OutcomeDistribution,
};
use varobs::rng::rng_from_seed;
use varobs::state::{random_mixed, DensityOperator};

fn random_theta(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng_from_seed(seed);
    (0..n).map(|_| r.random_range(0.0..std::f64::consts::TAU)).collect()
}

fn random_x(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng_from_seed(seed ^ 0xF00D);
    (0..n).map(|_| r.random_range(-2.0..2.0)).collect()
}

/// `|ψ⟩ ↦ |ψ⟩ ⊗ |0…0⟩` for `m'` trailing ancillas.
fn ancilla_isometry(n: usize, naimark: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut v = ComplexMatrix::zeros(d << naimark, d);
    for i in 0..d {
        v[(i << naimark, i)] = C64::new(1.0, 0.0);
    }
    v
}

fn spec_strategy() -> impl Strategy<Value = ObservableSpec> {
    (1usize..=3, 0usize..=1, 1usize..=2).prop_flat_map(|(n, naimark, layers)| {
        (1..=n).prop_map(move |m| ObservableSpec::hea(n, m, naimark, layers).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hea_is_lipschitz_in_each_angle(n in 1usize..=4, layers in 1usize..=3, seed in any::<u64>(), delta in -0.5f64..0.5) {
        let spec = AnsatzSpec::hea(n, layers);
        let theta = random_theta(spec.param_count(), seed);
        let u0 = build_unitary(&spec, &theta).unwrap();
        for k in 0..theta.len() {
            let mut t = theta.clone();
            t[k] += delta;
            let u1 = build_unitary(&spec, &t).unwrap();
            prop_assert!(operator_norm(&(&u1 - &u0)) <= 2.0 * delta.abs() + 1e-12);
        }
    }

    #[test]
    fn spec_roundtrip_reproduces_unitary(n in 1usize..=4, layers in 1usize..=3, qcnn in any::<bool>(), seed in any::<u64>()) {
        let spec = if qcnn && n.is_power_of_two() && n >= 2 { AnsatzSpec::qcnn(n) } else { AnsatzSpec::hea(n, layers) };
        let text = serde_json::to_string(&spec).unwrap();
        let back: AnsatzSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, spec);
        let theta = random_theta(spec.param_count(), seed);
        prop_assert_eq!(build_unitary(&spec, &theta).unwrap(), build_unitary(&back, &theta).unwrap());
    }

    #[test]
    fn probability_and_operator_routes_agree(spec in spec_strategy(), seed in any::<u64>()) {
        let theta = random_theta(spec.param_count(), seed);
        let x = random_x(spec.n_outcomes(), seed);
        let rho = random_mixed(spec.n_qubits, &mut rng_from_seed(seed));
        let v = ancilla_isometry(spec.n_qubits, spec.naimark);
        let extended = DensityOperator::new(&v * rho.matrix() * v.adjoint()).unwrap();
        let h = observable_matrix(&spec, &x, &theta).unwrap();
        let mean = extended.expectation(&h);
        let var = extended.expectation(&(&h * &h)) - mean * mean;
        prop_assert!((expectation(&spec, &x, &theta, &rho).unwrap() - mean).abs() < 1e-9);
        prop_assert!((variance(&spec, &x, &theta, &rho).unwrap() - var).abs() < 1e-9);
        let p = outcome_probabilities(&spec, &theta, &rho).unwrap();
        prop_assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projectors_are_orthogonal_and_complete(spec in spec_strategy(), seed in any::<u64>()) {
        let theta = random_theta(spec.param_count(), seed);
        let pis = projectors(&spec, &theta).unwrap();
        let d = pis[0].nrows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, a) in pis.iter().enumerate() {
            sum += a;
            for (j, b) in pis.iter().enumerate() {
                let prod = a * b;
                let expected = if i == j { a.clone() } else { ComplexMatrix::zeros(d, d) };
                prop_assert!(frobenius_norm(&(prod - expected)) < 1e-10);
            }
        }
        prop_assert!(frobenius_norm(&(sum - identity(d))) < 1e-10);
    }

    #[test]
    fn naimark_povm_is_compressed_projector(n in 1usize..=2, naimark in 1usize..=2, seed in any::<u64>()) {
        let spec = ObservableSpec::hea(n, 1, naimark, 2).unwrap();
        let theta = random_theta(spec.param_count(), seed);
        let v = ancilla_isometry(n, naimark);
        let povm = induced_povm(&spec, &theta).unwrap();
        let pis = projectors(&spec, &theta).unwrap();
        let rho = random_mixed(n, &mut rng_from_seed(seed));
        let p = outcome_probabilities(&spec, &theta, &rho).unwrap();
        let d = 1usize << n;
        let mut sum = ComplexMatrix::zeros(d, d);
        for (i, (e, pi)) in povm.iter().zip(&pis).enumerate() {
            let compressed = v.adjoint() * pi * &v;
            prop_assert!(frobenius_norm(&(e - &compressed)) < 1e-10);
            let eig = varobs::linalg::hermitian_eig(e).unwrap();
            prop_assert!(eig.min() > -1e-10);
            prop_assert!((rho.expectation(e) - p.probabilities[i]).abs() < 1e-10);
            sum += e;
        }
        prop_assert!(frobenius_norm(&(sum - identity(d))) < 1e-10);
    }
}

#[test]
fn observable_spectrum_has_forced_multiplicities() {
    let spec = ObservableSpec::hea(3, 1, 0, 2).unwrap();
    let theta = random_theta(spec.param_count(), 5);
    let h = observable_matrix(&spec, &[1.0, -2.0], &theta).unwrap();
    let eig = varobs::linalg::hermitian_eig(&h).unwrap();
    let expected = [-2.0, -2.0, -2.0, -2.0, 1.0, 1.0, 1.0, 1.0];
    for (v, e) in eig.eigenvalues.iter().zip(expected) {
        assert!((v - e).abs() < 1e-10);
    }
}

#[test]
fn shot_estimates_are_unbiased_with_the_right_spread() {
    let dist = OutcomeDistribution {
        probabilities: vec![0.1, 0.2, 0.3, 0.4],
    };
    let x = [-1.0, 0.5, 2.0, 3.0];
    let (mean, var) = dist.moments(&x);
    let mu = 50;
    let repeats = 10_000;
    let mut r = rng_from_seed(3);
    let estimates: Vec<f64> = (0..repeats)
        .map(|_| sample_shots(&dist, &x, mu, &mut r).unwrap().estimate)
        .collect();
    let m = estimates.iter().sum::<f64>() / repeats as f64;
    let v = estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (repeats - 1) as f64;
    let se = (var / mu as f64 / repeats as f64).sqrt();
    assert!((m - mean).abs() < 3.0 * se, "mean {m} vs {mean}");
    assert!((v / (var / mu as f64) - 1.0).abs() < 0.1, "variance {v} vs {}", var / mu as f64);
}

#[test]
fn deterministic_distribution_gives_exact_estimate() {
    let dist = OutcomeDistribution {
        probabilities: vec![1.0, 0.0],
    };
    let s = sample_shots(&dist, &[0.7, -3.0], 17, &mut rng_from_seed(0)).unwrap();
    assert_eq!(s.estimate, 0.7);
    assert_eq!(s.counts, vec![17, 0]);
}
