use rand::Rng as _;
use varobs::data::{Family, QubitInput};
use varobs::linalg::{hermitian_eig, identity, ComplexMatrix, C64};
use varobs::metrology::{
    cfi, cfi_povm, eigenbasis_povm, local_optimal_observable, operator_moments, qfi, qfi_auto, sld, QfiMethod,
    SldMethod, StateFamily,
};
use varobs::observable::{Measurement, ObservableSpec};
use varobs::rng::{complex_gaussian, rng_from_seed, Rng};
use varobs::state::{haar_random_pure, random_mixed, DensityOperator, PureState};

fn random_hermitian(d: usize, r: &mut Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(r));
    (&g + g.adjoint()).scale(0.5)
}

fn evolution(g: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let eig = hermitian_eig(g).unwrap();
    let v = &eig.eigenvectors;
    let phases = ComplexMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
    v * phases * v.adjoint()
}

/// `(1 − t) W(α) ρ₀ W(α)† + t I/d` with `t` linear in `α`: full rank for `ρ₀` full rank.
fn random_mixed_family(n: usize, seed: u64) -> StateFamily {
    let mut r = rng_from_seed(seed);
    let rho0 = random_mixed(n, &mut r);
    let g = random_hermitian(1 << n, &mut r);
    let slope: f64 = r.random_range(0.05..0.4);
    let d = 1usize << n;
    StateFamily::new((0.0, 1.0), move |a| {
        let w = evolution(&g, a);
        let t = slope * a;
        DensityOperator::new((&w * rho0.matrix() * w.adjoint()).scale(1.0 - t) + identity(d).scale(t / d as f64))
    })
    .unwrap()
}

fn random_pure_family(n: usize, seed: u64) -> StateFamily {
    let mut r = rng_from_seed(seed);
    let psi0 = haar_random_pure(n, &mut r);
    let g = random_hermitian(1 << n, &mut r);
    StateFamily::pure((0.0, 1.0), move |a| PureState::normalized(evolution(&g, a) * psi0.amplitudes())).unwrap()
}

fn data_families() -> Vec<StateFamily> {
    let mut out = Vec::new();
    for input in [QubitInput::Plus, QubitInput::Zero] {
        out.push(StateFamily::from_family(&Family::AmplitudeDamping { input }, 1).unwrap());
        out.push(StateFamily::from_family(&Family::Depolarizing { input }, 1).unwrap());
    }
    out.push(StateFamily::from_family(&Family::ZRotation { input: QubitInput::Plus }, 1).unwrap());
    out.push(StateFamily::from_family(&Family::BellType, 1).unwrap());
    out.push(StateFamily::from_family(&Family::Isotropic, 1).unwrap());
    out
}

#[test]
fn classical_information_never_exceeds_quantum() {
    let families = data_families();
    let mut r = rng_from_seed(2024);
    let mut checked = 0;
    for i in 0..200u64 {
        let family = if i % 3 == 0 {
            random_mixed_family(1 + (i as usize / 3) % 2, i)
        } else {
            families[i as usize % families.len()].clone()
        };
        let (lo, hi) = family.range();
        let alpha = lo + (hi - lo) * r.random_range(0.1..0.9);
        let n = family.state(alpha).unwrap().n_qubits();
        let m = r.random_range(1..=n);
        let naimark = r.random_range(0..=1);
        let spec = ObservableSpec::hea(n, m, naimark, 2).unwrap();
        let theta: Vec<f64> = (0..spec.param_count()).map(|_| r.random_range(0.0..6.3)).collect();
        let measurement = Measurement::new(spec, &theta).unwrap();
        let fc = match cfi(&measurement, &family, alpha) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let fq = qfi_auto(&family, alpha).unwrap();
        assert!(fc >= -1e-12, "cfi {fc} negative");
        assert!(fc <= fq * (1.0 + 1e-5) + 1e-12, "cfi {fc} > qfi {fq} at config {i}");
        checked += 1;
    }
    assert!(checked >= 190, "only {checked} configurations had a regular cfi");
}

#[test]
fn qfi_methods_agree_on_mixed_qubits() {
    let mut r = rng_from_seed(7);
    for seed in 0..25 {
        let family = random_mixed_family(1, seed);
        let alpha = r.random_range(0.1..0.9);
        let reference = qfi(&family, alpha, QfiMethod::Sld).unwrap();
        for method in [QfiMethod::Fidelity, QfiMethod::FullRank] {
            let v = qfi(&family, alpha, method).unwrap();
            assert!(
                (v - reference).abs() <= 1e-4 * reference,
                "{method:?}: {v} vs {reference} (seed {seed})"
            );
        }
    }
}

#[test]
fn qfi_methods_agree_on_pure_families() {
    for seed in 0..10 {
        let family = random_pure_family(1 + seed as usize % 3, seed);
        let reference = qfi(&family, 0.4, QfiMethod::Pure).unwrap();
        for method in [QfiMethod::Sld, QfiMethod::Fidelity] {
            let v = qfi(&family, 0.4, method).unwrap();
            assert!((v - reference).abs() <= 1e-4 * reference, "{method:?}: {v} vs {reference}");
        }
    }
}

#[test]
fn sld_residuals_are_small() {
    for seed in 0..20 {
        let family = random_mixed_family(1, seed);
        for method in [SldMethod::Eigenbasis, SldMethod::Bloch, SldMethod::MixedQubit] {
            let s = sld(&family, 0.5, method).unwrap();
            assert!(s.residual < 1e-6, "{method:?} residual {}", s.residual);
        }
        let family = random_mixed_family(2, seed);
        assert!(sld(&family, 0.5, SldMethod::Eigenbasis).unwrap().residual < 1e-6);
        assert!(sld(&family, 0.5, SldMethod::Bloch).is_err());
        let family = random_pure_family(2, seed);
        for method in [SldMethod::Eigenbasis, SldMethod::Pure] {
            let s = sld(&family, 0.5, method).unwrap();
            assert!(s.residual < 1e-6, "{method:?} residual {}", s.residual);
        }
    }
}

#[test]
fn local_optimal_observable_saturates_the_bound() {
    for seed in 0..10 {
        let family = random_mixed_family(1 + seed as usize % 2, seed);
        let alpha = 0.3;
        let h = local_optimal_observable(&family, alpha).unwrap();
        let (mean, var) = operator_moments(&h, &family.state(alpha).unwrap());
        let step = 1e-5;
        let slope = (operator_moments(&h, &family.state(alpha + step).unwrap()).0
            - operator_moments(&h, &family.state(alpha - step).unwrap()).0)
            / (2.0 * step);
        assert!((mean - alpha).abs() < 1e-6);
        let fq = qfi(&family, alpha, QfiMethod::Sld).unwrap();
        assert!((var - slope * slope / fq).abs() < 1e-6 * var.max(1.0), "{var} vs {}", slope * slope / fq);
        // measuring the SLD eigenbasis attains the quantum information
        let fc = cfi_povm(&eigenbasis_povm(&h).unwrap(), &family, alpha).unwrap();
        assert!((fc - fq).abs() < 1e-4 * fq, "{fc} vs {fq}");
    }
}
