//! Training of variational observables.
//!
//! The cost of a parameter vector `z = [x, θ]` is
//! `Σ_j c_j [w_ls (α_j − a_j)² + w_var Δ²_j]` with per-entry weights `c_j`
//! (all 1 for least squares, quadrature weights for the Bayesian risk).

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{Family, TrainingSet};
use crate::error::{Divergence, Error, Result};
use crate::observable::{moments, sample_counts, BatchEvaluator, Measurement, ObservableSpec, PreparedState};
use crate::optim::{self, BfgsOptions, IterationRecord, Objective, Termination};
use crate::quadrature::{Quadrature, QuadratureRule};
use crate::rng;
use crate::state::DensityOperator;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub w_ls: f64,
    pub w_var: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { w_ls: 1.0, w_var: 1e-4 }
    }
}

impl CostWeights {
    pub fn new(w_ls: f64, w_var: f64) -> Result<Self> {
        let w = Self { w_ls, w_var };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_ls.is_finite() && self.w_ls > 0.0) {
            return Err(Error::InvalidArgument(format!("w_ls must be positive, got {}", self.w_ls)));
        }
        if !(self.w_var.is_finite() && self.w_var >= 0.0) {
            return Err(Error::InvalidArgument(format!("w_var must be non-negative, got {}", self.w_var)));
        }
        Ok(())
    }
}

/// Exact expectation values or a finite number of shots per state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

impl std::str::FromStr for Shots {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        match s.parse::<u64>() {
            Ok(0) | Err(_) => Err(Error::InvalidArgument(format!(
                "shots must be `exact` or a positive integer, got `{s}`"
            ))),
            Ok(n) => Ok(Shots::Count(n)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iterations: usize,
    /// Central-difference step for `θ` with exact expectations.
    pub fd_step: f64,
    /// Central-difference step for `θ` under shot noise. With common random
    /// numbers the sampled cost is piecewise constant in `θ`, so the step has
    /// to be wide enough to move outcomes across the inverse-CDF thresholds.
    pub shot_fd_step: f64,
    pub gradient_tolerance: f64,
    pub shots: Shots,
    pub seed: u64,
    /// Independent random initializations; the lowest final cost wins.
    pub restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            fd_step: 1e-7,
            shot_fd_step: 0.05,
            gradient_tolerance: 1e-8,
            shots: Shots::Exact,
            seed: 0,
            restarts: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument("iterations and restarts must be positive".into()));
        }
        for (name, v) in [
            ("fd_step", self.fd_step),
            ("shot_fd_step", self.shot_fd_step),
            ("gradient_tolerance", self.gradient_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.shots == Shots::Count(0) {
            return Err(Error::InvalidArgument("shot count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistorySummary {
    pub iterations: usize,
    pub function_evaluations: usize,
    pub final_cost: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ObservableSpec,
    /// Number of copies of the family state the observable acts on.
    pub copies: usize,
    pub x_star: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub weights: CostWeights,
    pub history: Vec<IterationRecord>,
    pub summary: HistorySummary,
    /// Ascending coefficients of the fitted bias `b̃(a)`.
    pub bias_poly: Option<Vec<f64>>,
    pub label_range: (f64, f64),
}

/// Per-entry data the cost is built from.
struct Problem {
    evaluator: BatchEvaluator,
    labels: Vec<f64>,
    entry_weights: Vec<f64>,
}

impl Problem {
    fn new(spec: ObservableSpec, states: Vec<PreparedState>, labels: Vec<f64>, entry_weights: Vec<f64>) -> Result<Self> {
        Ok(Self {
            evaluator: BatchEvaluator::new(spec, states)?,
            labels,
            entry_weights,
        })
    }

    fn from_set(spec: &ObservableSpec, set: &TrainingSet) -> Result<Self> {
        set.validate()?;
        if set.n_qubits() != spec.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << spec.n_qubits,
                found: 1 << set.n_qubits(),
            });
        }
        let states = prepare(set, spec.naimark)?;
        Self::new(*spec, states, set.labels(), vec![1.0; set.len()])
    }
}

fn prepare(set: &TrainingSet, naimark: usize) -> Result<Vec<PreparedState>> {
    set.entries
        .iter()
        .map(|e| match &e.pure {
            Some(psi) => Ok(PreparedState::from_pure(psi, naimark)),
            None => PreparedState::from_density(&e.state, naimark),
        })
        .collect()
}

/// Cost terms given outcome frequencies of every entry.
fn cost_from_rows(rows: &[Vec<f64>], x: &[f64], labels: &[f64], cw: &[f64], w: CostWeights) -> f64 {
    rows.iter()
        .zip(labels)
        .zip(cw)
        .map(|((p, &alpha), &c)| {
            let (mean, var) = moments(x, p);
            c * (w.w_ls * (alpha - mean).powi(2) + w.w_var * var)
        })
        .sum()
}

fn x_gradient(rows: &[Vec<f64>], x: &[f64], labels: &[f64], cw: &[f64], w: CostWeights) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for ((p, &alpha), &c) in rows.iter().zip(labels).zip(cw) {
        let (mean, _) = moments(x, p);
        for i in 0..x.len() {
            g[i] += c * (-2.0 * w.w_ls * (alpha - mean) * p[i] + w.w_var * (2.0 * x[i] * p[i] - 2.0 * mean * p[i]));
        }
    }
    g
}

struct CostFunction<'a> {
    problem: &'a Problem,
    weights: CostWeights,
    shots: Shots,
    fd_step: f64,
    seed: u64,
    n_x: usize,
    calls: u64,
    evaluations: usize,
    cache: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl<'a> CostFunction<'a> {
    fn new(problem: &'a Problem, weights: CostWeights, config: &TrainConfig, seed: u64) -> Self {
        let fd_step = match config.shots {
            Shots::Exact => config.fd_step,
            Shots::Count(_) => config.shot_fd_step,
        };
        Self {
            problem,
            weights,
            shots: config.shots,
            fd_step,
            seed,
            n_x: problem.evaluator.spec().n_outcomes(),
            calls: 0,
            evaluations: 0,
            cache: None,
        }
    }

    fn exact_rows(&mut self, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        if let Some((t, rows)) = &self.cache {
            if t.as_slice() == theta {
                return Ok(rows.clone());
            }
        }
        self.evaluations += 1;
        let rows = self.problem.evaluator.probabilities(theta)?;
        self.cache = Some((theta.to_vec(), rows.clone()));
        Ok(rows)
    }

    /// Outcome frequencies; under shots every entry draws from its own stream of `noise`.
    fn rows(&mut self, theta: &[f64], noise: u64) -> Result<Vec<Vec<f64>>> {
        let rows = self.exact_rows(theta)?;
        Ok(match self.shots {
            Shots::Exact => rows,
            Shots::Count(mu) => rows
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    let mut r = rng::stream(noise, j as u64);
                    sample_counts(p, mu, &mut r)
                        .into_iter()
                        .map(|c| c as f64 / mu as f64)
                        .collect()
                })
                .collect(),
        })
    }

    fn fresh_noise(&mut self) -> u64 {
        self.calls += 1;
        rng::derive_seed(self.seed, self.calls)
    }

    fn eval(&mut self, x: &[f64], theta: &[f64], noise: u64) -> Result<f64> {
        let rows = self.rows(theta, noise)?;
        Ok(cost_from_rows(&rows, x, &self.problem.labels, &self.problem.entry_weights, self.weights))
    }
}

impl Objective for CostFunction<'_> {
    fn value(&mut self, z: &[f64]) -> Result<f64> {
        let (x, theta) = z.split_at(self.n_x);
        let noise = self.fresh_noise();
        self.eval(x, theta, noise)
    }

    fn gradient(&mut self, z: &[f64]) -> Result<Vec<f64>> {
        let (x, theta) = z.split_at(self.n_x);
        let noise = self.fresh_noise();
        let rows = self.rows(theta, noise)?;
        let mut g = x_gradient(&rows, x, &self.problem.labels, &self.problem.entry_weights, self.weights);
        let h = self.fd_step;
        let mut shifted = theta.to_vec();
        for k in 0..theta.len() {
            // both sides of a difference share one noise stream
            let pair = self.fresh_noise();
            shifted[k] = theta[k] + h;
            let plus = self.eval(x, &shifted, pair)?;
            shifted[k] = theta[k] - h;
            let minus = self.eval(x, &shifted, pair)?;
            shifted[k] = theta[k];
            g.push((plus - minus) / (2.0 * h));
        }
        Ok(g)
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }
}

/// Cost of `(x, θ)` on a training set. With shots the outcome noise is drawn from `seed`.
pub fn cost(
    spec: &ObservableSpec,
    x: &[f64],
    theta: &[f64],
    set: &TrainingSet,
    weights: CostWeights,
    shots: Shots,
    seed: u64,
) -> Result<f64> {
    weights.validate()?;
    check_params(spec, x, theta)?;
    let problem = Problem::from_set(spec, set)?;
    let config = TrainConfig {
        shots,
        ..TrainConfig::default()
    };
    let mut f = CostFunction::new(&problem, weights, &config, seed);
    f.eval(x, theta, seed)
}

/// Gradient of the exact cost: analytic in `x`, central differences with step `h` in `θ`.
pub fn cost_gradient(
    spec: &ObservableSpec,
    x: &[f64],
    theta: &[f64],
    set: &TrainingSet,
    weights: CostWeights,
    h: f64,
) -> Result<Vec<f64>> {
    weights.validate()?;
    check_params(spec, x, theta)?;
    let problem = Problem::from_set(spec, set)?;
    let config = TrainConfig {
        fd_step: h,
        ..TrainConfig::default()
    };
    let mut f = CostFunction::new(&problem, weights, &config, 0);
    let z: Vec<f64> = x.iter().chain(theta).copied().collect();
    f.gradient(&z)
}

fn check_params(spec: &ObservableSpec, x: &[f64], theta: &[f64]) -> Result<()> {
    spec.validate()?;
    if x.len() != spec.n_outcomes() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_outcomes(),
            found: x.len(),
        });
    }
    if theta.len() != spec.param_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.param_count(),
            found: theta.len(),
        });
    }
    Ok(())
}

/// Random starting point: `θ ~ U[0, 2π)`, `x ~ U[a − L/2, b + L/2]`.
pub fn initial_point(spec: &ObservableSpec, range: (f64, f64), seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng::rng_from_seed(seed);
    let (a, b) = range;
    let half = 0.5 * (b - a);
    let x = (0..spec.n_outcomes()).map(|_| r.random_range(a - half..b + half)).collect();
    let theta = (0..spec.param_count()).map(|_| r.random::<f64>() * TAU).collect();
    (x, theta)
}

fn fit(
    problem: &Problem,
    spec: &ObservableSpec,
    weights: CostWeights,
    config: &TrainConfig,
    range: (f64, f64),
    copies: usize,
    start: Option<&TrainedModel>,
) -> Result<TrainedModel> {
    weights.validate()?;
    config.validate()?;
    let n_x = spec.n_outcomes();
    let opts = BfgsOptions {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        ..BfgsOptions::default()
    };
    let mut best: Option<TrainedModel> = None;
    for restart in 0..config.restarts {
        let (x0, theta0) = match start {
            Some(m) if restart == 0 => (m.x_star.clone(), m.theta_star.clone()),
            _ => initial_point(spec, range, rng::derive_seed(config.seed, 2 * restart as u64)),
        };
        let z0: Vec<f64> = x0.into_iter().chain(theta0).collect();
        let noise_seed = rng::derive_seed(config.seed, 2 * restart as u64 + 1);
        let mut objective = CostFunction::new(problem, weights, config, noise_seed);
        let result = optim::minimize(&mut objective, &z0, &opts).map_err(|e| match e {
            Error::Divergence(d) => {
                let (x, theta) = d.x.split_at(n_x.min(d.x.len()));
                Error::Divergence(Box::new(Divergence {
                    iteration: d.iteration,
                    cost: d.cost,
                    x: x.to_vec(),
                    theta: theta.to_vec(),
                }))
            }
            other => other,
        })?;
        let (x, theta) = result.x.split_at(n_x);
        let model = TrainedModel {
            spec: *spec,
            copies,
            x_star: x.to_vec(),
            theta_star: theta.to_vec(),
            weights,
            summary: HistorySummary {
                iterations: result.history.last().map_or(0, |r| r.iteration),
                function_evaluations: objective.evaluations(),
                final_cost: result.cost,
                converged: result.termination == Termination::GradientTolerance,
            },
            history: result.history,
            bias_poly: None,
            label_range: range,
        };
        if best.as_ref().is_none_or(|b| model.summary.final_cost < b.summary.final_cost) {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Minimizes the weighted least-squares plus variance cost on a training set.
pub fn train(set: &TrainingSet, spec: &ObservableSpec, weights: CostWeights, config: &TrainConfig) -> Result<TrainedModel> {
    let problem = Problem::from_set(spec, set)?;
    fit(&problem, spec, weights, config, set.label_range, set.copies, None)
}

/// Like [`train`], but the first restart starts from `start`'s parameters.
pub fn train_from(
    set: &TrainingSet,
    start: &TrainedModel,
    weights: CostWeights,
    config: &TrainConfig,
) -> Result<TrainedModel> {
    let spec = start.spec;
    if start.x_star.len() != spec.n_outcomes() || start.theta_star.len() != spec.param_count() {
        return Err(Error::InvalidArgument("starting model does not match its spec".into()));
    }
    let problem = Problem::from_set(&spec, set)?;
    fit(&problem, &spec, weights, config, set.label_range, set.copies, Some(start))
}

/// What the Bayesian risk is averaged over.
#[derive(Debug, Clone, Copy)]
pub enum BayesTarget<'a> {
    /// Uniform average over the entries of a set.
    Set(&'a TrainingSet),
    /// Flat-prior integral over the family's label range by quadrature.
    Family {
        family: &'a Family,
        copies: usize,
        rule: QuadratureRule,
    },
}

/// Minimizes the flat-prior Bayesian risk `⟨Tr ρ_α (H − α)²⟩`.
///
/// With unit weights the variance-regularized cost per entry is exactly
/// `Tr ρ (H − α)²`, so the final cost of the returned model is the risk.
pub fn train_bayes(target: BayesTarget<'_>, spec: &ObservableSpec, config: &TrainConfig) -> Result<TrainedModel> {
    let weights = CostWeights { w_ls: 1.0, w_var: 1.0 };
    match target {
        BayesTarget::Set(set) => {
            let mut problem = Problem::from_set(spec, set)?;
            let t = set.len() as f64;
            problem.entry_weights = vec![1.0 / t; set.len()];
            fit(&problem, spec, weights, config, set.label_range, set.copies, None)
        }
        BayesTarget::Family { family, copies, rule } => {
            family.validate()?;
            if !family.is_deterministic() {
                return Err(Error::NotApplicable("Bayesian integral needs a deterministic family".into()));
            }
            let (a, b) = family.label_range();
            let quad = Quadrature::new(rule, a, b)?;
            let length = b - a;
            let mut states = Vec::with_capacity(quad.len());
            for &alpha in &quad.nodes {
                let rho = family.state(alpha)?.tensor_power(copies);
                if rho.n_qubits() != spec.n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: 1 << spec.n_qubits,
                        found: rho.dim(),
                    });
                }
                states.push(PreparedState::from_density(&rho, spec.naimark)?);
            }
            let cw = quad.weights.iter().map(|w| w / length).collect();
            let problem = Problem::new(*spec, states, quad.nodes.clone(), cw)?;
            fit(&problem, spec, weights, config, (a, b), copies, None)
        }
    }
}

impl TrainedModel {
    /// A model from given parameters, with an empty history and a zeroed summary.
    pub fn from_parts(
        spec: ObservableSpec,
        copies: usize,
        x_star: Vec<f64>,
        theta_star: Vec<f64>,
        weights: CostWeights,
        label_range: (f64, f64),
    ) -> Result<Self> {
        weights.validate()?;
        check_params(&spec, &x_star, &theta_star)?;
        if copies == 0 || spec.n_qubits % copies != 0 {
            return Err(Error::InvalidArgument(format!(
                "{copies} copies do not divide {} qubits",
                spec.n_qubits
            )));
        }
        Ok(Self {
            spec,
            copies,
            x_star,
            theta_star,
            weights,
            history: Vec::new(),
            summary: HistorySummary {
                iterations: 0,
                function_evaluations: 0,
                final_cost: 0.0,
                converged: false,
            },
            bias_poly: None,
            label_range,
        })
    }

    pub fn measurement(&self) -> Result<Measurement> {
        Measurement::new(self.spec, &self.theta_star)
    }

    /// Brings a single-copy state to the observable's register size.
    pub fn lift(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let n = self.spec.n_qubits;
        if rho.n_qubits() == n {
            Ok(rho.clone())
        } else if rho.n_qubits() * self.copies == n {
            Ok(rho.tensor_power(self.copies))
        } else {
            Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: rho.dim(),
            })
        }
    }

    /// `(⟨H⟩, Δ²H)` without bias compensation.
    pub fn moments_with(&self, m: &Measurement, rho: &DensityOperator) -> Result<(f64, f64)> {
        let rho = self.lift(rho)?;
        Ok(m.probabilities(&rho)?.moments(&self.x_star))
    }

    pub fn predict_with(&self, m: &Measurement, rho: &DensityOperator) -> Result<f64> {
        let (a, _) = self.moments_with(m, rho)?;
        Ok(self.compensate(a))
    }

    /// `a − b̃(a)` if a bias polynomial is present.
    pub fn compensate(&self, a: f64) -> f64 {
        match &self.bias_poly {
            Some(c) => a - polyval(c, a),
            None => a,
        }
    }
}

pub fn predict(model: &TrainedModel, rho: &DensityOperator) -> Result<f64> {
    model.predict_with(&model.measurement()?, rho)
}

/// Horner evaluation of ascending coefficients.
pub fn polyval(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Least-squares polynomial fit of ascending coefficients through `(t_j, y_j)`.
pub fn polyfit(t: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: y.len(),
        });
    }
    let lo = t.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * (hi - lo);
    if !(half > 1e-12 * (1.0 + lo.abs().max(hi.abs()))) {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let center = 0.5 * (hi + lo);
    let v = DMatrix::from_fn(t.len(), degree + 1, |j, k| ((t[j] - center) / half).powi(k as i32));
    let svd = v.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax).count();
    if rank < degree + 1 {
        return Err(Error::Degenerate(format!(
            "degree {degree} fit needs {} distinct abscissae",
            degree + 1
        )));
    }
    let scaled = svd
        .solve(&DVector::from_column_slice(y), 1e-12 * smax)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    // expand Σ s_k ((t − c)/h)^k into powers of t
    let mut raw = vec![0.0; degree + 1];
    for (k, &s) in scaled.iter().enumerate() {
        let scale = s / half.powi(k as i32);
        let mut binom = 1.0;
        for i in 0..=k {
            raw[i] += scale * binom * (-center).powi((k - i) as i32);
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
    }
    Ok(raw)
}

/// Fits `b̃(a)` to the training residuals `a_j − α_j` and stores it in the model.
pub fn fit_bias(model: &TrainedModel, set: &TrainingSet, degree: usize) -> Result<TrainedModel> {
    if degree == 0 {
        return Err(Error::InvalidArgument("bias degree must be at least 1".into()));
    }
    let m = model.measurement()?;
    let mut a = Vec::with_capacity(set.len());
    for e in &set.entries {
        a.push(model.moments_with(&m, &e.state)?.0);
    }
    let bias: Vec<f64> = a.iter().zip(&set.entries).map(|(ai, e)| ai - e.label).collect();
    let mut out = model.clone();
    out.bias_poly = Some(polyfit(&a, &bias, degree)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mse: f64,
    pub labels: Vec<f64>,
    pub predictions: Vec<f64>,
    pub variances: Vec<f64>,
}

pub fn evaluate(model: &TrainedModel, set: &TrainingSet) -> Result<Evaluation> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("test set is empty".into()));
    }
    let m = model.measurement()?;
    let mut predictions = Vec::with_capacity(set.len());
    let mut variances = Vec::with_capacity(set.len());
    for e in &set.entries {
        let (a, var) = model.moments_with(&m, &e.state)?;
        predictions.push(model.compensate(a));
        variances.push(var);
    }
    let labels = set.labels();
    let mse = labels.iter().zip(&predictions).map(|(l, p)| (l - p).powi(2)).sum::<f64>() / set.len() as f64;
    Ok(Evaluation {
        mse,
        labels,
        predictions,
        variances,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpecFile {
    #[serde(flatten)]
    observable: ObservableSpec,
    copies: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u32,
    spec: ModelSpecFile,
    x_star: Vec<f64>,
    theta_star: Vec<f64>,
    weights: CostWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias_poly: Option<Vec<f64>>,
    history_summary: HistorySummary,
    label_range: [f64; 2],
}

impl TrainedModel {
    /// Serializes everything except the per-iteration history.
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            spec: ModelSpecFile {
                observable: self.spec,
                copies: self.copies,
            },
            x_star: self.x_star.clone(),
            theta_star: self.theta_star.clone(),
            weights: self.weights,
            bias_poly: self.bias_poly.clone(),
            history_summary: self.summary.clone(),
            label_range: [self.label_range.0, self.label_range.1],
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported model schema {}", file.schema_version)));
        }
        let spec = file.spec.observable;
        spec.validate()?;
        let copies = file.spec.copies;
        if copies == 0 || spec.n_qubits % copies != 0 {
            return Err(Error::Format(format!("{copies} copies do not divide {} qubits", spec.n_qubits)));
        }
        check_params(&spec, &file.x_star, &file.theta_star).map_err(|e| Error::Format(e.to_string()))?;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&file.x_star) || !finite(&file.theta_star) {
            return Err(Error::Format("non-finite model parameters".into()));
        }
        if let Some(c) = &file.bias_poly {
            if c.is_empty() || !finite(c) {
                return Err(Error::Format("invalid bias polynomial".into()));
            }
        }
        file.weights.validate().map_err(|e| Error::Format(e.to_string()))?;
        let [a, b] = file.label_range;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Format("invalid label range".into()));
        }
        Ok(Self {
            spec,
            copies,
            x_star: file.x_star,
            theta_star: file.theta_star,
            weights: file.weights,
            history: Vec::new(),
            summary: file.history_summary,
            bias_poly: file.bias_poly,
            label_range: (a, b),
        })
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json(text)
    }
}
