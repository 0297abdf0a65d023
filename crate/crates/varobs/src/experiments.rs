//! End-to-end pipelines with pass/fail targets: generate, train, evaluate and report.

use serde::Serialize;

use rand::Rng as _;

use crate::analytic::{
    ad_optimal, area_residual, depolarizing_optimal, iso_optimal, solve_optimal_observable, total_variance_checks,
    witness_haar_closed_form, NullPolicy, OperatorProblem, WeightRatio,
};
use crate::linalg::{frobenius_norm, hermitian_eig, identity, ComplexMatrix, C64};
use crate::observable::Measurement;
use crate::quadrature::QuadratureRule;
use crate::state::{random_mixed, DensityOperator};
use crate::data::{generate, DatasetConfig, Family, QubitInput, Sampler, TrainingSet};
use crate::error::{Error, Result};
use crate::metrology::{
    biased_identities, cfi, model_report, qfi, qfi_auto, sld, FisherReport, QfiMethod, SldMethod, StateFamily,
};
use crate::observable::ObservableSpec;
use crate::regression::{evaluate, fit_bias, train, train_bayes, train_from, BayesTarget, CostWeights, TrainConfig, TrainedModel};
use crate::rng;

/// One quantitative comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("{expected} ± {tolerance}"),
            pass: (value - expected).abs() <= tolerance,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            target: format!("< {limit}"),
            pass: value < limit,
        }
    }

    pub fn holds(name: impl Into<String>, value: f64, description: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            target: description.into(),
            pass,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {:.6e} (target {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.target
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    /// `(file name, contents)` pairs for the caller to persist.
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

pub fn equispaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect()
}

fn hea(n: usize, m: usize, naimark: usize, layers: usize) -> Result<ObservableSpec> {
    ObservableSpec::hea(n, m, naimark, layers)
}

fn config(seed: u64, restarts: usize) -> TrainConfig {
    TrainConfig {
        seed,
        restarts,
        ..TrainConfig::default()
    }
}

fn report_csv(rows: &[FisherReport]) -> String {
    let mut s = String::from(FisherReport::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn history_csv(model: &TrainedModel) -> String {
    let mut s = String::from("iteration,cost,evaluations\n");
    for r in &model.history {
        s.push_str(&format!("{},{},{}\n", r.iteration, r.cost, r.evaluations));
    }
    s
}

fn add_model(out: &mut Outcome, name: &str, model: &TrainedModel) -> Result<()> {
    out.artifacts.push((format!("{name}.model.json"), model.to_json()?));
    out.artifacts.push((format!("{name}.history.csv"), history_csv(model)));
    Ok(())
}

/// The six flat-prior Bayesian risk reproductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BayesCase {
    AmplitudeDamping,
    Depolarizing,
    Isotropic,
    Bell,
    Rotation1,
    Rotation2,
}

impl BayesCase {
    pub const ALL: [BayesCase; 6] = [
        BayesCase::AmplitudeDamping,
        BayesCase::Depolarizing,
        BayesCase::Isotropic,
        BayesCase::Bell,
        BayesCase::Rotation1,
        BayesCase::Rotation2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BayesCase::AmplitudeDamping => "amplitude-damping",
            BayesCase::Depolarizing => "depolarizing",
            BayesCase::Isotropic => "isotropic",
            BayesCase::Bell => "bell",
            BayesCase::Rotation1 => "rotation-c1",
            BayesCase::Rotation2 => "rotation-c2",
        }
    }

    pub fn family(self) -> (Family, usize) {
        let plus = QubitInput::Plus;
        match self {
            BayesCase::AmplitudeDamping => (Family::AmplitudeDamping { input: plus }, 1),
            BayesCase::Depolarizing => (Family::Depolarizing { input: plus }, 1),
            BayesCase::Isotropic => (Family::Isotropic, 1),
            BayesCase::Bell => (Family::BellType, 1),
            BayesCase::Rotation1 => (Family::ZRotation { input: plus }, 1),
            BayesCase::Rotation2 => (Family::ZRotation { input: plus }, 2),
        }
    }

    pub fn target(self) -> f64 {
        let pi = std::f64::consts::PI;
        let pi2 = pi * pi;
        match self {
            BayesCase::AmplitudeDamping => 178.0 / 2475.0,
            BayesCase::Depolarizing => 10.0 / 81.0,
            BayesCase::Isotropic => 2.0 / 27.0,
            BayesCase::Bell => (2.0 * pi2 - 8.0 * pi + 4.0) / (9.0 * pi2 - 108.0),
            BayesCase::Rotation1 => (pi2 * pi2 - 48.0) / (12.0 * pi2),
            BayesCase::Rotation2 => 0.28097,
        }
    }
}

pub const BAYES_TOLERANCE: f64 = 1e-3;

/// Discrete Bayesian risk minimization on a midpoint grid of `count` labels.
pub fn bayes_reproduction(case: BayesCase, count: usize, seed: u64) -> Result<(TrainedModel, Check)> {
    let (family, copies) = case.family();
    let set = generate(&DatasetConfig::new(family, Sampler::Grid { count }).copies(copies).seed(seed))?;
    let n = set.n_qubits();
    let spec = hea(n, n, 0, 2)?;
    let model = train_bayes(BayesTarget::Set(&set), &spec, &config(seed, 2))?;
    let check = Check::within(
        format!("bayes-mse {}", case.name()),
        model.summary.final_cost,
        case.target(),
        BAYES_TOLERANCE,
    );
    Ok((model, check))
}

pub fn ad_bayes(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (model, check) = bayes_reproduction(BayesCase::AmplitudeDamping, 500, seed)?;
    out.push(check);
    add_model(&mut out, "ad-bayes", &model)?;
    let family = StateFamily::from_family(&BayesCase::AmplitudeDamping.family().0, 1)?;
    let rows = model_report(&model, &family, &equispaced(0.02, 0.98, 49), 1.0)?;
    out.artifacts.push(("ad-bayes.report.csv".into(), report_csv(&rows)));
    Ok(out)
}

/// Largest relative deviation of the model variance from `1 − N²` on a grid.
fn qcrb_deviation(rows: &[FisherReport]) -> f64 {
    rows.iter()
        .map(|r| (r.variance - (1.0 - r.alpha * r.alpha)).abs() / (1.0 - r.alpha * r.alpha))
        .fold(0.0, f64::max)
}

fn max_abs_error(rows: &[FisherReport]) -> f64 {
    rows.iter().map(|r| (r.prediction - r.alpha).abs()).fold(0.0, f64::max)
}

pub const QCRB_TOLERANCE: f64 = 0.05;

/// Operator-equation solutions against the printed closed forms, plus the
/// area and total-variance identities.
pub fn closed_form_checks() -> Result<Outcome> {
    let mut out = Outcome::default();
    let plus = QubitInput::Plus;
    let cases: [(&str, Family, fn(f64) -> Result<ComplexMatrix>); 3] = [
        ("depolarizing", Family::Depolarizing { input: plus }, |k| Ok(depolarizing_optimal(k))),
        ("isotropic", Family::Isotropic, |k| Ok(iso_optimal(k))),
        ("amplitude-damping", Family::AmplitudeDamping { input: plus }, |k| ad_optimal(0.0, 1.0, k)),
    ];
    for (name, family, closed) in cases {
        let problem = OperatorProblem::from_family(&StateFamily::from_family(&family, 1)?, QuadratureRule::default())?;
        let mut worst = 0.0f64;
        let mut area = 0.0f64;
        let mut identity_residual = 0.0f64;
        for k in [1.0, 10.0, 1e3] {
            let sol = solve_optimal_observable(&problem, WeightRatio::Finite(k), NullPolicy::Reject)?;
            worst = worst.max(frobenius_norm(&(&sol.operator - closed(k)?)));
            area = area.max(area_residual(&problem, &sol.operator));
            identity_residual = identity_residual.max(total_variance_checks(&problem, k, &sol.operator).identity_residual());
        }
        out.push(Check::below(format!("{name} solver vs closed form (Frobenius, k in 1,10,1e3)"), worst, 1e-6));
        out.push(Check::below(format!("{name} area residual"), area, 1e-6));
        out.push(Check::below(format!("{name} total-variance identity residual"), identity_residual, 1e-6));
    }
    Ok(out)
}

fn random_hermitian(d: usize, r: &mut rng::Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng::complex_gaussian(r));
    (&g + g.adjoint()).scale(0.5)
}

/// `(1 − sα) W(α) ρ₀ W(α)† + sα I/d` on `α ∈ [0, 1]`, `W(α) = exp(−iαG)` for random `ρ₀`, `G`, `s`.
pub fn random_full_rank_family(n_qubits: usize, seed: u64) -> Result<StateFamily> {
    let mut r = rng::rng_from_seed(seed);
    let rho0 = random_mixed(n_qubits, &mut r);
    let d = 1usize << n_qubits;
    let eig = hermitian_eig(&random_hermitian(d, &mut r))?;
    let slope: f64 = r.random_range(0.05..0.4);
    StateFamily::new((0.0, 1.0), move |a| {
        let phases = ComplexMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * a)));
        let w = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        let t = slope * a;
        DensityOperator::new((&w * rho0.matrix() * w.adjoint()).scale(1.0 - t) + identity(d).scale(t / d as f64))
    })
}

/// cFI against qFI for random measurements, qFI methods against each other, SLD residuals.
pub fn fisher_consistency(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let plus = QubitInput::Plus;
    let families = [
        Family::AmplitudeDamping { input: plus },
        Family::Depolarizing { input: plus },
        Family::ZRotation { input: plus },
        Family::BellType,
        Family::Isotropic,
    ]
    .iter()
    .map(|f| StateFamily::from_family(f, 1))
    .collect::<Result<Vec<_>>>()?;
    let mut r = rng::rng_from_seed(seed);
    let mut worst_ratio = 0.0f64;
    let mut regular = 0usize;
    let configurations = 200u64;
    for i in 0..configurations {
        let family = if i % 3 == 0 {
            random_full_rank_family(1 + (i as usize / 3) % 2, rng::derive_seed(seed, i))?
        } else {
            families[i as usize % families.len()].clone()
        };
        let (lo, hi) = family.range();
        let alpha = lo + (hi - lo) * r.random_range(0.1..0.9);
        let n = family.state(alpha)?.n_qubits();
        let spec = ObservableSpec::hea(n, r.random_range(1..=n), r.random_range(0..=1), 2)?;
        let theta: Vec<f64> = (0..spec.param_count()).map(|_| r.random_range(0.0..std::f64::consts::TAU)).collect();
        let fc = match cfi(&Measurement::new(spec, &theta)?, &family, alpha) {
            Ok(v) => v,
            Err(Error::FisherSingularity { .. }) => continue,
            Err(e) => return Err(e),
        };
        let fq = qfi_auto(&family, alpha)?;
        worst_ratio = worst_ratio.max(fc / fq.max(f64::MIN_POSITIVE));
        regular += 1;
    }
    out.push(Check::holds(
        format!("max cfi/qfi over {regular} of {configurations} random configurations"),
        worst_ratio,
        "<= 1 + 1e-5",
        worst_ratio <= 1.0 + 1e-5 && regular as u64 * 10 >= configurations * 9,
    ));
    let mut spread = 0.0f64;
    let mut residual = 0.0f64;
    for j in 0..25 {
        let family = random_full_rank_family(1, rng::derive_seed(seed ^ 0xF1, j))?;
        let alpha = r.random_range(0.1..0.9);
        let reference = qfi(&family, alpha, QfiMethod::Sld)?;
        for method in [QfiMethod::Fidelity, QfiMethod::FullRank] {
            spread = spread.max((qfi(&family, alpha, method)? - reference).abs() / reference);
        }
        for method in [SldMethod::Eigenbasis, SldMethod::Bloch, SldMethod::MixedQubit] {
            residual = residual.max(sld(&family, alpha, method)?.residual);
        }
    }
    out.push(Check::below("qfi sld/fidelity/full-rank max relative spread", spread, 1e-4));
    out.push(Check::below("max SLD residual", residual, 1e-6));
    Ok(out)
}

/// Bell-type states, `T = 5`, one measured qubit.
pub fn bell_qcrb(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let family = Family::BellType;
    let set = generate(&DatasetConfig::new(family.clone(), Sampler::Grid { count: 5 }).seed(seed))?;
    let spec = hea(2, 1, 0, 2)?;
    let model = train(&set, &spec, CostWeights::default(), &config(seed, 3))?;
    let grid = equispaced(0.05, 0.95, 19);
    let rows = model_report(&model, &StateFamily::from_family(&family, 1)?, &grid, 1.0)?;
    out.push(Check::below("bell variance vs 1-N^2 (max rel. dev.)", qcrb_deviation(&rows), QCRB_TOLERANCE));
    out.push(Check::below("bell prediction max |a-N|", max_abs_error(&rows), 2e-2));
    add_model(&mut out, "bell-qcrb", &model)?;
    out.artifacts.push(("bell-qcrb.report.csv".into(), report_csv(&rows)));
    Ok(out)
}

/// Entangled isotropic states `q ~ U(1/3, 1]`, measured through one Naimark ancilla.
pub fn iso_naimark_qcrb(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let family = Family::Isotropic;
    let set = generate(&DatasetConfig::new(family.clone(), Sampler::IsotropicUniformQ { count: 10 }).seed(seed))?;
    let spec = hea(2, 1, 1, 2)?;
    let model = train(&set, &spec, CostWeights::default(), &config(seed, 4))?;
    let grid = equispaced(0.05, 0.95, 19);
    let rows = model_report(&model, &StateFamily::from_family(&family, 1)?, &grid, 1.0)?;
    out.push(Check::below("isotropic (m'=1) variance vs 1-N^2 (max rel. dev.)", qcrb_deviation(&rows), QCRB_TOLERANCE));
    out.push(Check::below("isotropic (m'=1) prediction max |a-N|", max_abs_error(&rows), 2e-2));
    add_model(&mut out, "iso-naimark", &model)?;
    out.artifacts.push(("iso-naimark.report.csv".into(), report_csv(&rows)));
    Ok(out)
}

/// Isotropic states with a single measured qubit: two-fold degenerate spectrum.
pub fn iso_degenerate(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let family = Family::Isotropic;
    let set = generate(&DatasetConfig::new(family.clone(), Sampler::IsotropicUniformQ { count: 10 }).seed(seed))?;
    let spec = hea(2, 1, 0, 2)?;
    let model = train(&set, &spec, CostWeights::default(), &config(seed, 3))?;
    let grid = equispaced(0.05, 0.95, 19);
    let rows = model_report(&model, &StateFamily::from_family(&family, 1)?, &grid, 1.0)?;
    let dev = rows
        .iter()
        .map(|r| {
            let n = r.alpha;
            let expected = 2.0 - n - n * n;
            (r.variance - expected).abs() / expected
        })
        .fold(0.0, f64::max);
    out.push(Check::below("isotropic (m=1) prediction max |a-N|", max_abs_error(&rows), 2e-2));
    out.push(Check::below("isotropic (m=1) variance vs 2-N-N^2 (max rel. dev.)", dev, 0.10));
    add_model(&mut out, "iso-m1", &model)?;
    out.artifacts.push(("iso-m1.report.csv".into(), report_csv(&rows)));
    Ok(out)
}

/// Amplitude damping model used for the finite-shot checks.
pub fn ad_model(seed: u64) -> Result<(TrainedModel, StateFamily)> {
    let family = Family::AmplitudeDamping { input: QubitInput::Plus };
    let set = generate(&DatasetConfig::new(family.clone(), Sampler::Grid { count: 10 }).seed(seed))?;
    let model = train(&set, &hea(1, 1, 0, 1)?, CostWeights::default(), &config(seed, 2))?;
    Ok((model, StateFamily::from_family(&family, 1)?))
}

/// Monte-Carlo biased error propagation and Cramér-Rao checks.
pub fn shot_identities(seed: u64, repeats: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (model, family) = ad_model(seed)?;
    let alphas = equispaced(0.05, 0.95, 10);
    let mut csv = String::from("mu,alpha,mse,stderr,predicted,ccrb_biased,qcrb_biased\n");
    for (i, mu) in [64u64, 1024].into_iter().enumerate() {
        let mut worst_z = 0.0f64;
        let mut bound_ok = true;
        for (j, &alpha) in alphas.iter().enumerate() {
            let mut r = rng::stream(seed, (i * alphas.len() + j) as u64);
            let b = biased_identities(&model, &family, alpha, mu, repeats, &mut r)?;
            worst_z = worst_z.max((b.mse - b.predicted).abs() / b.standard_error);
            bound_ok &= b.bound_holds(3.0);
            csv.push_str(&format!(
                "{mu},{alpha},{},{},{},{},{}\n",
                b.mse, b.standard_error, b.predicted, b.classical_bound, b.quantum_bound
            ));
        }
        out.push(Check::below(format!("shot mse vs var/mu + b^2, mu={mu} (max z)"), worst_z, 3.0));
        out.push(Check::holds(
            format!("shot mse >= biased ccrb >= biased qcrb, mu={mu}"),
            if bound_ok { 1.0 } else { 0.0 },
            "1",
            bound_ok,
        ));
    }
    add_model(&mut out, "ad-shots", &model)?;
    out.artifacts.push(("ad-shots.csv".into(), csv));
    Ok(out)
}

pub fn witness_haar(seed: u64, samples: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut csv = String::from("s,mean,stderr,closed_form\n");
    for (s, expected) in [(1usize, -0.1), (2, witness_haar_closed_form(2))] {
        let mut r = rng::stream(seed, s as u64);
        let mc = crate::analytic::witness_haar_average(s, samples, &mut r)?;
        out.push(Check::within(format!("witness Haar average s={s}"), mc.mean, expected, 0.01));
        csv.push_str(&format!("{s},{},{},{}\n", mc.mean, mc.standard_error, witness_haar_closed_form(s)));
    }
    out.artifacts.push(("witness-haar.csv".into(), csv));
    Ok(out)
}

/// Random pure two-qubit states, two copies, squared negativity labels.
pub fn two_copy_pure(seed: u64, count: usize) -> Result<Outcome> {
    let mut out = Outcome::default();
    let make = |count: usize, seed: u64| {
        generate(
            &DatasetConfig::new(Family::RandomPure, Sampler::Binned { count, bins: 20 })
                .copies(2)
                .label_power(2)
                .seed(seed),
        )
    };
    let set = make(count, seed)?;
    let test = make(200, seed ^ 0xA5A5)?;
    let spec = hea(4, 2, 0, 3)?;
    let model = train(&set, &spec, CostWeights::default(), &config(seed, 2))?;
    let ev = evaluate(&model, &test)?;
    out.push(Check::below("two-copy pure test mse (N^2)", ev.mse, 1e-3));
    // variance target 4N² − N⁴ in terms of the label y = N²
    let dev = ev
        .labels
        .iter()
        .zip(&ev.variances)
        .filter(|(y, _)| **y > 0.05)
        .map(|(&y, &v)| {
            let expected = 4.0 * y - y * y;
            (v - expected).abs() / expected
        })
        .fold(0.0, f64::max);
    out.push(Check::below("two-copy pure variance vs 4N^2-N^4 (max rel. dev., N^2>0.05)", dev, 0.10));
    add_model(&mut out, "neg-pure-c2", &model)?;
    Ok(out)
}

pub fn ising_family(n: usize, h_min: f64, h_max: f64) -> Family {
    Family::Ising {
        n_qubits: n,
        coupling: 1.0,
        h_min,
        h_max,
    }
}

/// Eight-qubit transverse-field Ising chain, `T = 10`.
pub fn ising(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let family = ising_family(8, 0.05, 2.0);
    let set = generate(&DatasetConfig::new(family.clone(), Sampler::Linspace { count: 10 }).seed(seed))?;
    let test = generate(&DatasetConfig::new(family.clone(), Sampler::Grid { count: 40 }))?;
    let spec = hea(8, 4, 0, 5)?;
    let cfg = TrainConfig {
        max_iterations: 400,
        ..config(seed, 1)
    };
    let model = train(&set, &spec, CostWeights::default(), &cfg)?;
    let ev = evaluate(&model, &test)?;
    let monotone = ev.predictions.windows(2).all(|w| w[1] >= w[0]);
    out.push(Check::below("ising test mse", ev.mse, 5e-2));
    out.push(Check::holds("ising predictions monotone in h", if monotone { 1.0 } else { 0.0 }, "1", monotone));
    let sf = StateFamily::from_family(&family, 1)?;
    let rows = model_report(&model, &sf, &equispaced(0.1, 1.95, 12), 1.0)?;
    let worst = rows.iter().map(|r| r.cfi - r.qfi * (1.0 + 1e-5)).fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::holds("ising cfi <= qfi on report grid (max cfi - qfi)", worst, "<= 0", worst <= 0.0));
    let biased = fit_bias(&model, &set, 5)?;
    let corrected = evaluate(&biased, &test)?;
    out.artifacts.push((
        "ising.bias.csv".into(),
        format!("uncorrected_mse,corrected_mse\n{},{}\n", ev.mse, corrected.mse),
    ));
    add_model(&mut out, "ising", &model)?;
    out.artifacts.push(("ising.report.csv".into(), report_csv(&rows)));
    Ok(out)
}

fn mixed_set(count: usize, copies: usize, seed: u64) -> Result<TrainingSet> {
    generate(
        &DatasetConfig::new(Family::RandomMixed, Sampler::Binned { count, bins: 20 })
            .copies(copies)
            .seed(seed),
    )
}

fn mixed_mse(count: usize, copies: usize, seed: u64, test: &TrainingSet) -> Result<(TrainedModel, f64, f64)> {
    let set = mixed_set(count, copies, seed)?;
    let n = set.n_qubits();
    let spec = hea(n, n.min(2), 0, 2)?;
    let cfg = TrainConfig {
        max_iterations: 500,
        ..config(seed, 1)
    };
    let model = train(&set, &spec, CostWeights::default(), &cfg)?;
    let ev = evaluate(&model, test)?;
    let spread = {
        let mean = ev.predictions.iter().sum::<f64>() / ev.predictions.len() as f64;
        (ev.predictions.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / ev.predictions.len() as f64).sqrt()
    };
    Ok((model, ev.mse, spread))
}

/// Random mixed states: two copies against the single-copy baseline.
pub fn mixed_negativity(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let test1 = mixed_set(400, 1, seed ^ 0x5EED)?;
    let test2 = mixed_set(400, 2, seed ^ 0x5EED)?;
    let (_, mse1, spread1) = mixed_mse(300, 1, seed, &test1)?;
    let (model2, mse2, _) = mixed_mse(300, 2, seed, &test2)?;
    let label_sd = {
        let l = test1.labels();
        let mean = l.iter().sum::<f64>() / l.len() as f64;
        (l.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / l.len() as f64).sqrt()
    };
    out.push(Check::holds(
        "mixed negativity c=2 mse below c=1",
        mse2,
        format!("< {mse1}"),
        mse2 < mse1,
    ));
    out.push(Check::below("c=1 prediction spread / label spread", spread1 / label_sd, 0.5));
    add_model(&mut out, "neg-mixed-c2", &model2)?;
    Ok(out)
}

/// Test error against training-set size for two-copy mixed states.
pub fn negativity_t_sweep(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let test = mixed_set(400, 2, seed ^ 0x5EED)?;
    let sizes = [100usize, 200, 300, 400, 500];
    let cfg = TrainConfig {
        max_iterations: 400,
        ..config(seed, 1)
    };
    let mut mses = Vec::new();
    let mut csv = String::from("t,mse\n");
    // each size starts from the previous optimum
    let mut previous: Option<TrainedModel> = None;
    for &t in &sizes {
        let set = mixed_set(t, 2, seed)?;
        let model = match &previous {
            None => train(&set, &hea(set.n_qubits(), 2, 0, 4)?, CostWeights::default(), &cfg)?,
            Some(m) => train_from(&set, m, CostWeights::default(), &cfg)?,
        };
        let mse = evaluate(&model, &test)?.mse;
        csv.push_str(&format!("{t},{mse}\n"));
        mses.push(mse);
        previous = Some(model);
    }
    let monotone = mses.windows(2).all(|w| w[1] <= w[0]);
    let xs: Vec<f64> = sizes.iter().map(|&t| (t as f64).ln()).collect();
    let ys: Vec<f64> = mses.iter().map(|m| m.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    out.push(Check::holds("T-sweep mse non-increasing", if monotone { 1.0 } else { 0.0 }, "1", monotone));
    out.push(Check::holds("T-sweep log-log slope", slope, "in [-2, -0.5]", (-2.0..=-0.5).contains(&slope)));
    out.artifacts.push(("neg-tsweep.csv".into(), csv));
    Ok(out)
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub id: &'static str,
    pub description: &'static str,
    pub long: bool,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        id: "ad-bayes",
        description: "amplitude damping, flat-prior Bayesian risk on a 500-point grid",
        long: false,
    },
    Preset {
        id: "closed-forms",
        description: "operator-equation solver against closed forms, area and total-variance identities",
        long: false,
    },
    Preset {
        id: "fisher",
        description: "cfi <= qfi on random measurements, qfi method agreement, SLD residuals",
        long: false,
    },
    Preset {
        id: "bell-qcrb",
        description: "Bell-type states, T=5, one measured qubit, variance against the qCRB",
        long: false,
    },
    Preset {
        id: "iso-naimark",
        description: "isotropic states through one Naimark ancilla, variance against the qCRB",
        long: false,
    },
    Preset {
        id: "iso-m1",
        description: "isotropic states with one measured qubit, degenerate-spectrum variance",
        long: false,
    },
    Preset {
        id: "ad-shots",
        description: "finite-shot error propagation and biased Cramér-Rao checks",
        long: false,
    },
    Preset {
        id: "witness-haar",
        description: "Haar average of the two-copy entanglement witness",
        long: false,
    },
    Preset {
        id: "neg-pure-c2",
        description: "random pure states, two copies, squared negativity",
        long: true,
    },
    Preset {
        id: "ising",
        description: "8-qubit transverse-field Ising chain, T=10",
        long: true,
    },
    Preset {
        id: "neg-mixed-c4",
        description: "random mixed states: two copies against the single-copy baseline",
        long: true,
    },
    Preset {
        id: "neg-Tsweep",
        description: "test error against training-set size for two-copy mixed states",
        long: true,
    },
];

pub fn find_preset(id: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.id == id)
}

pub fn run_preset(id: &str, seed: u64) -> Result<Outcome> {
    match id {
        "ad-bayes" => ad_bayes(seed),
        "closed-forms" => closed_form_checks(),
        "fisher" => fisher_consistency(seed),
        "bell-qcrb" => bell_qcrb(seed),
        "iso-naimark" => iso_naimark_qcrb(seed),
        "iso-m1" => iso_degenerate(seed),
        "ad-shots" => shot_identities(seed, 1000),
        "witness-haar" => witness_haar(seed, 100_000),
        "neg-pure-c2" => two_copy_pure(seed, 1000),
        "ising" => ising(seed),
        "neg-mixed-c4" => mixed_negativity(seed),
        "neg-Tsweep" => negativity_t_sweep(seed),
        _ => Err(Error::InvalidArgument(format!("unknown preset `{id}`"))),
    }
}
