use std::f64::consts::PI;

use varobs::analytic::{
    ad_optimal, area_residual, bell_optimal, bell_optimal_limit, depolarizing_optimal, fourier_observable,
    fourier_partial_sum, iso_optimal, solve_optimal_observable, solve_optimal_observable_finite_t,
    total_variance_checks, two_copy_bound_operators, unitary_optimal, witness_haar_average, witness_haar_closed_form,
    NullPolicy, OperatorProblem, WeightRatio,
};
use varobs::data::{build_training_set, generate, DatasetConfig, Family, QubitInput, Sampler};
use varobs::experiments::equispaced;
use varobs::linalg::{frobenius_norm, hermiticity_error, ComplexMatrix};
use varobs::metrology::{operator_moments, StateFamily};
use varobs::observable::ObservableSpec;
use varobs::quadrature::QuadratureRule;
use varobs::regression::{train_bayes, BayesTarget, TrainConfig};
use varobs::rng::rng_from_seed;
use varobs::state::{haar_random_pure, negativity, random_mixed_two_qubit};

const PLUS: QubitInput = QubitInput::Plus;

fn problem(family: Family, copies: usize) -> (StateFamily, OperatorProblem) {
    let sf = StateFamily::from_family(&family, copies).unwrap();
    let p = OperatorProblem::from_family(&sf, QuadratureRule::default()).unwrap();
    (sf, p)
}

fn shipped() -> Vec<(Family, usize)> {
    vec![
        (Family::AmplitudeDamping { input: PLUS }, 1),
        (Family::Depolarizing { input: PLUS }, 1),
        (Family::ZRotation { input: PLUS }, 1),
        (Family::ZRotation { input: PLUS }, 2),
        (Family::Isotropic, 1),
        (Family::BellType, 1),
    ]
}

/// Same mean and variance on every grid point.
fn same_moments(sf: &StateFamily, a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
    let (lo, hi) = sf.range();
    for t in equispaced(lo, hi, 11) {
        let rho = sf.state(t).unwrap();
        let (ma, va) = operator_moments(a, &rho);
        let (mb, vb) = operator_moments(b, &rho);
        assert!((ma - mb).abs() < tol && (va - vb).abs() < tol, "at {t}: ({ma}, {va}) vs ({mb}, {vb})");
    }
}

#[test]
fn solver_residuals_and_area_for_shipped_families() {
    for (family, copies) in shipped() {
        let (_, p) = problem(family.clone(), copies);
        for k in [WeightRatio::Finite(0.5), WeightRatio::Finite(1.0), WeightRatio::Finite(30.0), WeightRatio::Infinite] {
            let sol = solve_optimal_observable(&p, k, NullPolicy::MinimumNorm).unwrap();
            assert!(sol.residual <= 1e-8, "{family:?} c={copies} {k:?}: residual {}", sol.residual);
            assert!(hermiticity_error(&sol.operator) < 1e-12);
            assert!(area_residual(&p, &sol.operator) < 1e-6, "{family:?} {k:?}");
        }
    }
}

#[test]
fn closed_forms_at_three_weight_ratios() {
    let (_, dep) = problem(Family::Depolarizing { input: PLUS }, 1);
    let (_, ad) = problem(Family::AmplitudeDamping { input: PLUS }, 1);
    let (iso_sf, iso) = problem(Family::Isotropic, 1);
    for k in [1.0, 10.0, 1e3] {
        let solve = |p: &OperatorProblem| solve_optimal_observable(p, WeightRatio::Finite(k), NullPolicy::Reject).unwrap().operator;
        assert!(frobenius_norm(&(solve(&dep) - depolarizing_optimal(k))) < 1e-6);
        assert!(frobenius_norm(&(solve(&ad) - ad_optimal(0.0, 1.0, k).unwrap())) < 1e-6);
        let h = solve(&iso);
        assert!(frobenius_norm(&(&h - iso_optimal(k))) < 1e-6);
        for n in [0.0, 0.4, 0.9] {
            let (mean, var) = operator_moments(&h, &iso_sf.state(n).unwrap());
            assert!((mean - (4.0 + n * k) / (8.0 + k)).abs() < 1e-8);
            assert!((var - (1.0 - n * n) * k * k / ((8.0 + k) * (8.0 + k))).abs() < 1e-8);
        }
    }
}

#[test]
fn depolarizing_closed_form_coefficients() {
    for k in [0.3, 1.0, 7.0] {
        let h = depolarizing_optimal(k);
        let c0 = (3.0 * k + 10.0) / (3.0 * k + 15.0);
        let cx = -k / (k + 5.0);
        assert!((h[(0, 0)].re - c0).abs() < 1e-14 && (h[(0, 1)].re - cx).abs() < 1e-14);
    }
}

#[test]
fn printed_forms_with_free_parameters_match_on_invariants() {
    let (bell, p) = problem(Family::BellType, 1);
    for k in [1.0, 10.0, 1e3] {
        let sol = solve_optimal_observable(&p, WeightRatio::Finite(k), NullPolicy::MinimumNorm).unwrap();
        assert!(sol.null_dim > 0);
        same_moments(&bell, &sol.operator, &bell_optimal(k), 1e-6);
    }
    for n in [0.1, 0.5, 0.95] {
        let (mean, var) = operator_moments(&bell_optimal_limit(), &bell.state(n).unwrap());
        assert!((mean - n).abs() < 1e-12 && (var - (1.0 - n * n)).abs() < 1e-12);
    }
    for copies in [1, 2] {
        let (rot, p) = problem(Family::ZRotation { input: PLUS }, copies);
        for k in [1.0, 5.0] {
            let sol = solve_optimal_observable(&p, WeightRatio::Finite(k), NullPolicy::MinimumNorm).unwrap();
            same_moments(&rot, &sol.operator, &unitary_optimal(copies, k).unwrap(), 1e-6);
        }
    }
    let k: f64 = 2.0;
    let h1 = unitary_optimal(1, k).unwrap();
    assert!((h1[(0, 0)].re - PI / 2.0).abs() < 1e-14);
    assert!((h1[(0, 1)].re + 4.0 * k / (PI * (1.0 + k))).abs() < 1e-14);
}

#[test]
fn unit_weight_ratio_solves_the_bayes_equation() {
    for (family, copies) in shipped() {
        let (_, p) = problem(family, copies);
        let h = solve_optimal_observable(&p, WeightRatio::Finite(1.0), NullPolicy::MinimumNorm).unwrap().operator;
        let rho_bar = p.mean_state();
        let lhs = (&rho_bar * &h + &h * &rho_bar).scale(0.5);
        assert!(frobenius_norm(&(lhs - p.first_moment())) < 1e-8);
    }
}

#[test]
fn total_variance_identity_and_bounds() {
    for (family, copies) in shipped() {
        let (_, p) = problem(family.clone(), copies);
        for k in [0.1, 1.0, 20.0] {
            let h = solve_optimal_observable(&p, WeightRatio::Finite(k), NullPolicy::MinimumNorm).unwrap().operator;
            let tv = total_variance_checks(&p, k, &h);
            assert!(tv.identity_residual() < 1e-6, "{family:?}: {}", tv.identity_residual());
            if let (Some(bound), Some(avg)) = (tv.bound, tv.average_bound) {
                assert!(tv.total <= bound + 1e-9);
                assert!(tv.average <= avg + 1e-9);
            }
        }
    }
    let (_, p) = problem(Family::AmplitudeDamping { input: PLUS }, 1);
    let h = solve_optimal_observable(&p, WeightRatio::Finite(0.1), NullPolicy::Reject).unwrap().operator;
    let tv = total_variance_checks(&p, 0.1, &h);
    assert!(tv.average <= 1.0 / 120.0);
    for k in [1.0, 1e3] {
        let h = solve_optimal_observable(&p, WeightRatio::Finite(k), NullPolicy::Reject).unwrap().operator;
        assert!(total_variance_checks(&p, k, &h).max_bias > 1e-6);
    }
}

#[test]
fn finite_sums_approach_the_integral_solution() {
    let family = Family::AmplitudeDamping { input: PLUS };
    let (_, p) = problem(family.clone(), 1);
    let set = generate(&DatasetConfig::new(family, Sampler::Grid { count: 500 })).unwrap();
    for k in [1.0, 10.0] {
        let exact = solve_optimal_observable(&p, WeightRatio::Finite(k), NullPolicy::Reject).unwrap().operator;
        let finite = solve_optimal_observable_finite_t(&set, WeightRatio::Finite(k), NullPolicy::Reject).unwrap();
        assert!(finite.residual < 1e-8);
        assert!(frobenius_norm(&(finite.operator - exact)) < 1e-3);
    }
}

#[test]
fn single_entry_pins_the_expectation() {
    let mixed = build_training_set(&Family::Isotropic, &[0.35], 1).unwrap();
    let pure = build_training_set(&Family::BellType, &[0.35], 1).unwrap();
    for k in [0.5, 3.0] {
        let sol = solve_optimal_observable_finite_t(&mixed, WeightRatio::Finite(k), NullPolicy::Reject).unwrap();
        assert_eq!(sol.null_dim, 0);
        assert!((mixed.entries[0].state.expectation(&sol.operator) - 0.35).abs() < 1e-10);
        let sol = solve_optimal_observable_finite_t(&pure, WeightRatio::Finite(k), NullPolicy::MinimumNorm).unwrap();
        assert!(sol.null_dim > 0);
        assert!((pure.entries[0].state.expectation(&sol.operator) - 0.35).abs() < 1e-10);
    }
    assert!(solve_optimal_observable_finite_t(&pure, WeightRatio::Finite(1.0), NullPolicy::Reject).is_err());
}

#[test]
fn unit_ratio_matches_trained_bayes_risk() {
    let family = Family::Depolarizing { input: PLUS };
    let set = generate(&DatasetConfig::new(family, Sampler::Grid { count: 60 })).unwrap();
    let sol = solve_optimal_observable_finite_t(&set, WeightRatio::Finite(1.0), NullPolicy::Reject).unwrap();
    let risk: f64 = set
        .entries
        .iter()
        .map(|e| {
            let (m, v) = operator_moments(&sol.operator, &e.state);
            v + (m - e.label).powi(2)
        })
        .sum::<f64>()
        / set.len() as f64;
    let config = TrainConfig {
        seed: 1,
        restarts: 2,
        ..TrainConfig::default()
    };
    let model = train_bayes(BayesTarget::Set(&set), &ObservableSpec::hea(1, 1, 0, 2).unwrap(), &config).unwrap();
    assert!((model.summary.final_cost - risk).abs() < 1e-6 * risk.max(1.0), "{} vs {risk}", model.summary.final_cost);
}

#[test]
fn fourier_observable_is_a_sine_series() {
    for c in 1..=4 {
        let h = fourier_observable(c).unwrap();
        assert_eq!(h.nrows(), 1 << c);
        assert!(hermiticity_error(&h) < 1e-12);
        for a in [0.2, 1.0, PI / 2.0, 2.8] {
            let series: f64 = (1..=c).map(|k| 2.0 * (-1f64).powi(k as i32 + 1) * (k as f64 * a).sin() / k as f64).sum();
            assert!((fourier_partial_sum(c, a) - series).abs() < 1e-12);
        }
    }
    assert!((fourier_partial_sum(1, 0.7) - 2.0 * 0.7f64.sin()).abs() < 1e-14);
}

#[test]
fn two_copy_operators_bound_squared_negativity() {
    let ops = two_copy_bound_operators();
    let mut r = rng_from_seed(31);
    for _ in 0..50 {
        let psi = haar_random_pure(2, &mut r);
        let n = negativity(&psi.density()).unwrap();
        let two = psi.tensor(&psi).density();
        for m in [&ops.m1, &ops.m2] {
            let (mean, var) = operator_moments(m, &two);
            assert!((mean - n * n).abs() < 1e-10);
            assert!((var - (4.0 * n * n - n.powi(4))).abs() < 1e-10);
        }
        let rho = random_mixed_two_qubit(&mut r);
        let n = negativity(&rho).unwrap();
        let two = rho.tensor(&rho);
        assert!(two.expectation(&ops.m1) >= n * n - 1e-9);
        assert!(two.expectation(&ops.m2) >= n * n - 1e-9);
    }
}

#[test]
fn witness_average_decreases_with_local_dimension() {
    let closed: Vec<f64> = (1..=3).map(witness_haar_closed_form).collect();
    assert!((closed[0] + 0.1).abs() < 1e-15 && (closed[1] + 9.0 / 34.0).abs() < 1e-15);
    assert!(closed.windows(2).all(|w| w[1] < w[0]) && closed[2] > -0.5);
    let mut r = rng_from_seed(8);
    let mc = witness_haar_average(3, 4000, &mut r).unwrap();
    assert!((mc.mean - closed[2]).abs() < 4.0 * mc.standard_error + 1e-3);
}
