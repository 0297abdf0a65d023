use varobs::data::{generate, DatasetConfig, Family, QubitInput, Sampler, TrainingSet};
use varobs::experiments::equispaced;
use varobs::linalg::identity;
use varobs::observable::{observable_matrix, ObservableSpec};
use varobs::regression::{
    cost, cost_gradient, evaluate, fit_bias, initial_point, polyval, predict, train, train_from, CostWeights, Shots,
    TrainConfig, TrainedModel,
};

fn ad() -> Family {
    Family::AmplitudeDamping { input: QubitInput::Plus }
}

fn bell_set(count: usize) -> TrainingSet {
    generate(&DatasetConfig::new(Family::BellType, Sampler::Uniform { count }).seed(5)).unwrap()
}

fn random_params(spec: &ObservableSpec, seed: u64) -> (Vec<f64>, Vec<f64>) {
    initial_point(spec, (0.0, 1.0), seed)
}

#[test]
fn equal_weights_cost_is_t_times_bayes_risk() {
    let set = bell_set(12);
    let spec = ObservableSpec::hea(2, 2, 0, 2).unwrap();
    for seed in 0..10 {
        let (x, theta) = random_params(&spec, seed);
        let c = cost(&spec, &x, &theta, &set, CostWeights::new(1.0, 1.0).unwrap(), Shots::Exact, 0).unwrap();
        let h = observable_matrix(&spec, &x, &theta).unwrap();
        let risk: f64 = set
            .entries
            .iter()
            .map(|e| {
                let shifted = &h - identity(4).scale(e.label);
                e.state.expectation(&(&shifted * &shifted))
            })
            .sum();
        assert!((c - risk).abs() < 1e-9 * risk.max(1.0), "{c} vs {risk}");
    }
}

#[test]
fn gradient_matches_richardson_oracle() {
    let set = bell_set(6);
    let spec = ObservableSpec::hea(2, 1, 0, 2).unwrap();
    let weights = CostWeights::default();
    let f = |x: &[f64], t: &[f64]| cost(&spec, x, t, &set, weights, Shots::Exact, 0).unwrap();
    for seed in 0..20 {
        let (x, theta) = random_params(&spec, seed);
        let g = cost_gradient(&spec, &x, &theta, &set, weights, 1e-7).unwrap();
        let z: Vec<f64> = x.iter().chain(&theta).copied().collect();
        let h = 1e-3;
        let eval = |k: usize, s: f64| {
            let mut w = z.clone();
            w[k] += s;
            f(&w[..x.len()], &w[x.len()..])
        };
        let oracle: Vec<f64> = (0..z.len())
            .map(|k| (8.0 * (eval(k, h) - eval(k, -h)) - (eval(k, 2.0 * h) - eval(k, -2.0 * h))) / (12.0 * h))
            .collect();
        let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in g.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-4 * scale, "{a} vs {b} (scale {scale})");
        }
    }
}

#[test]
fn training_is_deterministic() {
    let set = generate(&DatasetConfig::new(ad(), Sampler::Uniform { count: 5 }).seed(3)).unwrap();
    let spec = ObservableSpec::hea(1, 1, 0, 1).unwrap();
    for shots in [Shots::Exact, Shots::Count(64)] {
        let config = TrainConfig {
            seed: 9,
            shots,
            max_iterations: 40,
            ..TrainConfig::default()
        };
        let a = train(&set, &spec, CostWeights::default(), &config).unwrap();
        let b = train(&set, &spec, CostWeights::default(), &config).unwrap();
        let bits = |m: &TrainedModel| m.history.iter().map(|r| (r.cost.to_bits(), r.evaluations)).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.x_star, b.x_star);
        assert_eq!(a.theta_star, b.theta_star);
        assert!(a.history.windows(2).all(|w| w[1].cost <= w[0].cost));
    }
}

#[test]
fn shot_estimates_inside_the_cost_are_unbiased() {
    // with w_var = 0 and common noise, two labels pin down the sampled estimate:
    // c(L1) − c(L2) = L1² − L2² − 2â(L1 − L2)
    let mut set = generate(&DatasetConfig::new(ad(), Sampler::Labels { labels: vec![0.4] }).seed(0)).unwrap();
    let spec = ObservableSpec::hea(1, 1, 0, 1).unwrap();
    let (x, theta) = random_params(&spec, 4);
    let weights = CostWeights::new(1.0, 0.0).unwrap();
    let exact = predict(
        &TrainedModel::from_parts(spec.clone(), 1, x.clone(), theta.clone(), weights, (0.0, 1.0)).unwrap(),
        &set.entries[0].state,
    )
    .unwrap();
    let (l1, l2) = (0.0, 1.0);
    let mu = 16;
    let repeats = 4000;
    let mut estimates = Vec::with_capacity(repeats);
    for seed in 0..repeats as u64 {
        set.entries[0].label = l1;
        let c1 = cost(&spec, &x, &theta, &set, weights, Shots::Count(mu), seed).unwrap();
        set.entries[0].label = l2;
        let c2 = cost(&spec, &x, &theta, &set, weights, Shots::Count(mu), seed).unwrap();
        estimates.push((l1 * l1 - l2 * l2 - (c1 - c2)) / (2.0 * (l1 - l2)));
    }
    let mean = estimates.iter().sum::<f64>() / repeats as f64;
    let sd = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64).sqrt();
    assert!(sd > 0.0);
    assert!((mean - exact).abs() < 3.0 * sd / (repeats as f64).sqrt(), "{mean} vs {exact}");
}

fn some_model(set: &TrainingSet, seed: u64) -> TrainedModel {
    let spec = ObservableSpec::hea(2, 1, 0, 1).unwrap();
    let (x, theta) = random_params(&spec, seed);
    TrainedModel::from_parts(spec, set.copies, x, theta, CostWeights::default(), set.label_range).unwrap()
}

#[test]
fn bias_fit_recovers_exact_offsets() {
    let mut set = bell_set(15);
    let model = some_model(&set, 1);
    let ev = evaluate(&model, &set).unwrap();
    for (e, a) in set.entries.iter_mut().zip(&ev.predictions) {
        e.label = a - 0.3;
    }
    let fitted = fit_bias(&model, &set, 1).unwrap();
    let poly = fitted.bias_poly.clone().unwrap();
    assert!((poly[0] - 0.3).abs() < 1e-9 && poly[1].abs() < 1e-9, "{poly:?}");
    assert!(evaluate(&fitted, &set).unwrap().mse < 1e-18);

    for (e, a) in set.entries.iter_mut().zip(&ev.predictions) {
        e.label = *a;
    }
    let zero = fit_bias(&model, &set, 3).unwrap().bias_poly.unwrap();
    assert!(zero.iter().all(|c| c.abs() < 1e-9), "{zero:?}");
    assert_eq!(polyval(&[1.0, 2.0, 3.0], 2.0), 17.0);
}

#[test]
fn constant_predictor_error_is_label_spread() {
    let set = bell_set(20);
    let spec = ObservableSpec::hea(2, 1, 0, 1).unwrap();
    let (_, theta) = random_params(&spec, 0);
    let model = TrainedModel::from_parts(spec, 1, vec![0.25, 0.25], theta, CostWeights::default(), (0.0, 1.0)).unwrap();
    let ev = evaluate(&model, &set).unwrap();
    let expected = set.labels().iter().map(|l| (l - 0.25).powi(2)).sum::<f64>() / set.len() as f64;
    assert!((ev.mse - expected).abs() < 1e-12);
    assert!(ev.variances.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn small_amplitude_damping_set_generalizes() {
    let set = generate(&DatasetConfig::new(ad(), Sampler::Grid { count: 5 }).seed(2)).unwrap();
    let test = varobs::data::build_training_set(&ad(), &equispaced(0.0, 1.0, 50), 1).unwrap();
    let model = train(&set, &ObservableSpec::hea(1, 1, 0, 1).unwrap(), CostWeights::default(), &TrainConfig::default()).unwrap();
    assert!(evaluate(&model, &test).unwrap().mse < 1e-3);
}

#[test]
fn isotropic_two_qubit_readout_predicts_negativity() {
    let set = generate(&DatasetConfig::new(Family::Isotropic, Sampler::IsotropicUniformQ { count: 10 }).seed(6)).unwrap();
    let config = TrainConfig {
        seed: 6,
        restarts: 2,
        ..TrainConfig::default()
    };
    let model = train(&set, &ObservableSpec::hea(2, 2, 0, 2).unwrap(), CostWeights::default(), &config).unwrap();
    let test = varobs::data::build_training_set(&Family::Isotropic, &equispaced(0.0, 1.0, 30), 1).unwrap();
    let ev = evaluate(&model, &test).unwrap();
    let worst = ev.labels.iter().zip(&ev.predictions).map(|(l, p)| (l - p).abs()).fold(0.0, f64::max);
    assert!(worst < 2e-2, "worst error {worst}");
}

#[test]
fn model_json_roundtrip_and_rejection() {
    let set = bell_set(4);
    let mut model = some_model(&set, 3);
    model.bias_poly = Some(vec![0.1, -0.2]);
    let text = model.to_json().unwrap();
    let back = TrainedModel::from_json(&text).unwrap();
    assert_eq!(back.x_star, model.x_star);
    assert_eq!(back.theta_star, model.theta_star);
    assert_eq!(back.bias_poly, model.bias_poly);
    for e in &set.entries {
        assert_eq!(predict(&back, &e.state).unwrap(), predict(&model, &e.state).unwrap());
    }
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["x_star"].as_array_mut().unwrap().push(1.0.into());
    assert!(TrainedModel::from_json(&value.to_string()).is_err());
    value = serde_json::from_str(&text).unwrap();
    value["surprise"] = 1.into();
    assert!(TrainedModel::from_json(&value.to_string()).is_err());
    assert!(TrainedModel::from_json("{}").is_err());
}

#[test]
fn warm_start_continues_from_the_given_model() {
    let set = generate(&DatasetConfig::new(ad(), Sampler::Grid { count: 6 }).seed(1)).unwrap();
    let spec = ObservableSpec::hea(1, 1, 0, 1).unwrap();
    let config = TrainConfig {
        max_iterations: 60,
        ..TrainConfig::default()
    };
    let first = train(&set, &spec, CostWeights::default(), &config).unwrap();
    let again = train_from(&set, &first, CostWeights::default(), &TrainConfig { max_iterations: 5, ..config }).unwrap();
    assert!(again.history[0].cost <= first.summary.final_cost * (1.0 + 1e-12));
    assert!(again.summary.final_cost <= first.summary.final_cost);

    let mut broken = first.clone();
    broken.theta_star.pop();
    assert!(train_from(&set, &broken, CostWeights::default(), &config).is_err());
}
