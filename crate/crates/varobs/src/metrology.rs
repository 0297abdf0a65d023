//! Fisher information, symmetric logarithmic derivatives and the bounds
//! built from them. Label derivatives are finite differences of the family.

use std::sync::Arc;

use rand::Rng;

use crate::data::Family;
use crate::error::{Error, Result};
use crate::linalg::{
    frobenius_norm, hermitian_eig, identity, pauli_x, pauli_y, pauli_z, trace, ComplexMatrix, ComplexVector, C64,
};
use crate::observable::{sample_shots, Measurement};
use crate::quadrature::Quadrature;
use crate::regression::TrainedModel;
use crate::state::{fidelity, purity, DensityOperator, PureState};

pub const DERIVATIVE_STEP: f64 = 1e-6;
pub const FIDELITY_STEP: f64 = 1e-4;
pub const EIGENPAIR_THRESHOLD: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-9;

type DensityFn = dyn Fn(f64) -> Result<DensityOperator> + Send + Sync;
type PureFn = dyn Fn(f64) -> Result<PureState> + Send + Sync;

/// A map `α ↦ ρ_α` on a label interval.
#[derive(Clone)]
pub struct StateFamily {
    density: Arc<DensityFn>,
    pure: Option<Arc<PureFn>>,
    range: (f64, f64),
    step: f64,
}

impl std::fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateFamily")
            .field("range", &self.range)
            .field("step", &self.step)
            .field("pure", &self.pure.is_some())
            .finish()
    }
}

impl StateFamily {
    pub fn new(range: (f64, f64), density: impl Fn(f64) -> Result<DensityOperator> + Send + Sync + 'static) -> Result<Self> {
        let (a, b) = range;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidArgument(format!("label range [{a}, {b}] is empty")));
        }
        Ok(Self {
            density: Arc::new(density),
            pure: None,
            range,
            step: DERIVATIVE_STEP,
        })
    }

    pub fn pure(range: (f64, f64), psi: impl Fn(f64) -> Result<PureState> + Send + Sync + 'static) -> Result<Self> {
        let psi: Arc<PureFn> = Arc::new(psi);
        let inner = psi.clone();
        let mut fam = Self::new(range, move |a| Ok(inner(a)?.density()))?;
        fam.pure = Some(psi);
        Ok(fam)
    }

    /// `ρ_α^{⊗copies}` for a deterministic data family.
    pub fn from_family(family: &Family, copies: usize) -> Result<Self> {
        family.validate()?;
        if !family.is_deterministic() {
            return Err(Error::NotApplicable("random families have no label-to-state map".into()));
        }
        if copies == 0 {
            return Err(Error::InvalidArgument("copies must be >= 1".into()));
        }
        let range = family.label_range();
        if family.pure_state(range.0)?.is_some() {
            let f = family.clone();
            Self::pure(range, move |a| {
                let psi = f.pure_state(a)?.expect("pure family");
                let mut out = psi.clone();
                for _ in 1..copies {
                    out = out.tensor(&psi);
                }
                Ok(out)
            })
        } else {
            let f = family.clone();
            Self::new(range, move |a| Ok(f.state(a)?.tensor_power(copies)))
        }
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("derivative step must be positive, got {step}")));
        }
        self.step = step;
        Ok(self)
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn is_pure(&self) -> bool {
        self.pure.is_some()
    }

    pub fn state(&self, alpha: f64) -> Result<DensityOperator> {
        self.check(alpha)?;
        (self.density)(alpha)
    }

    fn check(&self, alpha: f64) -> Result<()> {
        let (a, b) = self.range;
        if !(alpha >= a && alpha <= b) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                low: a,
                high: b,
            });
        }
        Ok(())
    }

    /// Offsets and weights of a second-order first-derivative stencil that stays in range.
    fn stencil(&self, alpha: f64) -> Result<[(f64, f64); 3]> {
        self.check(alpha)?;
        let h = self.step;
        let (a, b) = self.range;
        if 2.0 * h > b - a {
            return Err(Error::InvalidArgument("derivative step exceeds half the label range".into()));
        }
        Ok(if alpha - h < a {
            [(0.0, -1.5 / h), (h, 2.0 / h), (2.0 * h, -0.5 / h)]
        } else if alpha + h > b {
            [(0.0, 1.5 / h), (-h, -2.0 / h), (-2.0 * h, 0.5 / h)]
        } else {
            [(h, 0.5 / h), (-h, -0.5 / h), (0.0, 0.0)]
        })
    }

    /// `∂_α` of any smooth matrix- or vector-valued function of the label.
    pub fn differentiate<T>(
        &self,
        alpha: f64,
        f: impl Fn(f64) -> Result<T>,
        axpy: impl Fn(&mut T, f64, &T),
        zero: T,
    ) -> Result<T> {
        let mut acc = zero;
        for (offset, w) in self.stencil(alpha)? {
            if w != 0.0 {
                let v = f(alpha + offset)?;
                axpy(&mut acc, w, &v);
            }
        }
        Ok(acc)
    }

    /// `∂_α ρ_α`.
    pub fn derivative(&self, alpha: f64) -> Result<ComplexMatrix> {
        let d = self.state(alpha)?.dim();
        self.differentiate(
            alpha,
            |a| Ok((self.density)(a)?.into_matrix()),
            |acc, w, m| *acc += m.scale(w),
            ComplexMatrix::zeros(d, d),
        )
    }

    /// Gauge-fixed state vector: the component largest at `reference` is real positive.
    fn pure_at(&self, alpha: f64, reference: Option<usize>) -> Result<(ComplexVector, usize)> {
        let v = match &self.pure {
            Some(p) => p(alpha)?.amplitudes().clone(),
            None => {
                let rho = (self.density)(alpha)?;
                if purity(&rho) < 1.0 - PURITY_TOL {
                    return Err(Error::NotApplicable("state is not pure".into()));
                }
                let eig = rho.eigen()?;
                eig.eigenvectors.column(eig.eigenvectors.ncols() - 1).into_owned()
            }
        };
        let idx = reference.unwrap_or_else(|| {
            (0..v.len())
                .max_by(|&i, &j| v[i].norm_sqr().total_cmp(&v[j].norm_sqr()))
                .unwrap_or(0)
        });
        let phase = v[idx].conj() / v[idx].norm();
        Ok((v * phase, idx))
    }
}

fn hermitian_check(l: &ComplexMatrix) -> ComplexMatrix {
    (l + l.adjoint()).scale(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SldMethod {
    Eigenbasis,
    Pure,
    Bloch,
    MixedQubit,
}

#[derive(Debug, Clone)]
pub struct Sld {
    pub operator: ComplexMatrix,
    /// `‖∂ρ − (ρL + Lρ)/2‖_F`.
    pub residual: f64,
}

fn bloch(rho: &ComplexMatrix) -> [f64; 3] {
    [pauli_x(), pauli_y(), pauli_z()].map(|s| trace(&(&s * rho)).re)
}

fn bloch_operator(r: [f64; 3]) -> ComplexMatrix {
    pauli_x().scale(r[0]) + pauli_y().scale(r[1]) + pauli_z().scale(r[2])
}

fn require_qubit(rho: &DensityOperator) -> Result<()> {
    if rho.n_qubits() != 1 {
        return Err(Error::NotApplicable("method needs a single-qubit family".into()));
    }
    Ok(())
}

fn sld_eigenbasis(rho: &DensityOperator, drho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = rho.eigen()?;
    let v = &eig.eigenvectors;
    let mut l = v.adjoint() * drho * v;
    let lam = &eig.eigenvalues;
    for k in 0..lam.len() {
        for j in 0..lam.len() {
            let s = lam[k] + lam[j];
            l[(k, j)] = if s > EIGENPAIR_THRESHOLD {
                l[(k, j)] * (2.0 / s)
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }
    Ok(hermitian_check(&(v * l * v.adjoint())))
}

pub fn sld(family: &StateFamily, alpha: f64, method: SldMethod) -> Result<Sld> {
    let rho = family.state(alpha)?;
    let drho = family.derivative(alpha)?;
    let operator = match method {
        SldMethod::Eigenbasis => sld_eigenbasis(&rho, &drho)?,
        SldMethod::Pure => {
            if purity(&rho) < 1.0 - PURITY_TOL {
                return Err(Error::NotApplicable("pure-state SLD needs a pure family".into()));
            }
            drho.scale(2.0)
        }
        SldMethod::Bloch => {
            require_qubit(&rho)?;
            let r = bloch(rho.matrix());
            let dr = bloch(&drho);
            let r2: f64 = r.iter().map(|v| v * v).sum();
            if 1.0 - r2 < EIGENPAIR_THRESHOLD {
                return Err(Error::NotApplicable("Bloch SLD needs a mixed qubit".into()));
            }
            let rdr: f64 = r.iter().zip(&dr).map(|(a, b)| a * b).sum();
            bloch_operator(dr) + (bloch_operator(r) - identity(2)).scale(rdr / (1.0 - r2))
        }
        SldMethod::MixedQubit => {
            require_qubit(&rho)?;
            let p = purity(&rho);
            if 1.0 - p < EIGENPAIR_THRESHOLD {
                return Err(Error::NotApplicable("mixed-qubit SLD needs a mixed qubit".into()));
            }
            let y = pauli_y();
            let inverse = (&y * rho.matrix().transpose() * &y).scale(2.0 / (1.0 - p));
            let dp = 2.0 * trace(&(rho.matrix() * &drho)).re;
            hermitian_check(&(drho.scale(2.0) - inverse.scale(0.5 * dp)))
        }
    };
    let residual = frobenius_norm(&(&drho - (rho.matrix() * &operator + &operator * rho.matrix()).scale(0.5)));
    Ok(Sld { operator, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiMethod {
    Sld,
    Fidelity,
    FullRank,
    Pure,
}

pub fn qfi(family: &StateFamily, alpha: f64, method: QfiMethod) -> Result<f64> {
    let value = match method {
        QfiMethod::Sld => {
            let rho = family.state(alpha)?;
            let l = sld(family, alpha, SldMethod::Eigenbasis)?.operator;
            trace(&(&l * &l * rho.matrix())).re
        }
        QfiMethod::Fidelity => {
            let h = FIDELITY_STEP;
            let (a, b) = family.range;
            let lo = (alpha - 0.5 * h).max(a);
            let hi = (lo + h).min(b);
            let lo = hi - h;
            if lo < a {
                return Err(Error::InvalidArgument("label range is narrower than the fidelity step".into()));
            }
            // eigenvalue noise of a rank-one root is ~1e-9, the size of 1 − F here
            let f = match &family.pure {
                Some(p) => p(lo)?.overlap(&p(hi)?).norm().min(1.0),
                None => fidelity(&family.state(lo)?, &family.state(hi)?)?,
            };
            8.0 * (1.0 - f) / (h * h)
        }
        QfiMethod::FullRank => {
            let rho = family.state(alpha)?;
            require_qubit(&rho)?;
            let m = rho.matrix();
            let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
            if det < EIGENPAIR_THRESHOLD {
                return Err(Error::NotApplicable("state is not full rank".into()));
            }
            let drho = family.derivative(alpha)?;
            let rd = m * &drho;
            trace(&(&drho * &drho)).re + trace(&(&rd * &rd)).re / det
        }
        QfiMethod::Pure => {
            let (psi, idx) = family.pure_at(alpha, None)?;
            let dim = psi.len();
            let dpsi = family.differentiate(
                alpha,
                |a| Ok(family.pure_at(a, Some(idx))?.0),
                |acc, w, v| *acc += v.scale(w),
                ComplexVector::zeros(dim),
            )?;
            4.0 * (dpsi.dotc(&dpsi).re - psi.dotc(&dpsi).norm_sqr())
        }
    };
    if !value.is_finite() {
        return Err(Error::Degenerate(format!("quantum Fisher information is not finite at {alpha}")));
    }
    Ok(value.max(0.0))
}

/// The pure-state formula when the family is pure, the SLD form otherwise.
pub fn qfi_auto(family: &StateFamily, alpha: f64) -> Result<f64> {
    if family.is_pure() {
        qfi(family, alpha, QfiMethod::Pure)
    } else {
        qfi(family, alpha, QfiMethod::Sld)
    }
}

pub const PROBABILITY_FLOOR: f64 = 1e-12;
pub const DERIVATIVE_FLOOR: f64 = 1e-9;

/// `Σ_i (∂p_i)² / p_i` for any label-dependent distribution.
pub fn cfi_from(family: &StateFamily, alpha: f64, probabilities: impl Fn(&DensityOperator) -> Result<Vec<f64>>) -> Result<f64> {
    let p = probabilities(&family.state(alpha)?)?;
    let dp = family.differentiate(
        alpha,
        |a| probabilities(&(family.density)(a)?),
        |acc: &mut Vec<f64>, w, v| acc.iter_mut().zip(v).for_each(|(x, y)| *x += w * y),
        vec![0.0; p.len()],
    )?;
    let mut total = 0.0;
    for (i, (&pi, &di)) in p.iter().zip(&dp).enumerate() {
        if pi < PROBABILITY_FLOOR {
            if di.abs() < DERIVATIVE_FLOOR {
                continue;
            }
            return Err(Error::FisherSingularity {
                outcome: i,
                probability: pi,
                derivative: di,
            });
        }
        total += di * di / pi;
    }
    Ok(total)
}

/// Classical Fisher information of the measurement defined by `(spec, θ)`.
pub fn cfi(measurement: &Measurement, family: &StateFamily, alpha: f64) -> Result<f64> {
    cfi_from(family, alpha, |rho| Ok(measurement.probabilities(rho)?.probabilities))
}

/// Classical Fisher information of a POVM given by its effects.
pub fn cfi_povm(effects: &[ComplexMatrix], family: &StateFamily, alpha: f64) -> Result<f64> {
    cfi_from(family, alpha, |rho| Ok(effects.iter().map(|e| rho.expectation(e)).collect()))
}

/// Rank-one projectors onto the eigenvectors of a Hermitian operator.
pub fn eigenbasis_povm(h: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    let eig = hermitian_eig(h)?;
    Ok(eig
        .eigenvectors
        .column_iter()
        .map(|v| &v * v.adjoint())
        .collect())
}

/// `αI + L/I_q`: unbiased at `α` with variance `1/I_q`.
pub fn local_optimal_observable(family: &StateFamily, alpha: f64) -> Result<ComplexMatrix> {
    let rho = family.state(alpha)?;
    let l = sld(family, alpha, SldMethod::Eigenbasis)?.operator;
    let fq = trace(&(&l * &l * rho.matrix())).re;
    if !(fq > 1e-12) {
        return Err(Error::Degenerate(format!("quantum Fisher information vanishes at {alpha}")));
    }
    Ok(identity(rho.dim()).scale(alpha) + l.scale(1.0 / fq))
}

/// `Δ²H / (μ |∂⟨H⟩|²)`.
pub fn error_propagation(variance: f64, slope: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument("shot count must be positive".into()));
    }
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::Degenerate("zero slope: the estimator does not resolve the label".into()));
    }
    Ok(variance / (mu * slope * slope))
}

/// `(⟨H⟩, Δ²H)` of a Hermitian operator.
pub fn operator_moments(h: &ComplexMatrix, rho: &DensityOperator) -> (f64, f64) {
    let mean = rho.expectation(h);
    let second = rho.expectation(&(h * h));
    (mean, (second - mean * mean).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub alpha: f64,
    pub prediction: f64,
    pub d_pred: f64,
    pub variance: f64,
    pub cfi: f64,
    pub qfi: f64,
    pub ccrb: f64,
    pub qcrb: f64,
    pub mu: f64,
}

impl FisherReport {
    pub const CSV_HEADER: &'static str = "alpha,pred,dpred,var,cfi,qfi,ccrb,qcrb";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.alpha, self.prediction, self.d_pred, self.variance, self.cfi, self.qfi, self.ccrb, self.qcrb
        )
    }
}

fn bound(mu: f64, info: f64) -> f64 {
    if info > 0.0 {
        1.0 / (mu * info)
    } else {
        f64::INFINITY
    }
}

/// Report rows for a trained model. Predictions are the raw expectation `⟨H⟩`.
pub fn model_report(model: &TrainedModel, family: &StateFamily, alphas: &[f64], mu: f64) -> Result<Vec<FisherReport>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("report grid is empty".into()));
    }
    let m = model.measurement()?;
    let x = &model.x_star;
    let moments = |rho: &DensityOperator| -> Result<(f64, f64)> { Ok(m.probabilities(rho)?.moments(x)) };
    alphas
        .iter()
        .map(|&alpha| {
            let (prediction, variance) = moments(&family.state(alpha)?)?;
            let d_pred = family.differentiate(alpha, |a| Ok(moments(&(family.density)(a)?)?.0), |acc, w, v| *acc += w * v, 0.0)?;
            let cfi = cfi(&m, family, alpha)?;
            let qfi = qfi_auto(family, alpha)?;
            Ok(FisherReport {
                alpha,
                prediction,
                d_pred,
                variance,
                cfi,
                qfi,
                ccrb: bound(mu, cfi),
                qcrb: bound(mu, qfi),
                mu,
            })
        })
        .collect()
}

/// Report rows for an explicit observable, measured in its eigenbasis.
pub fn observable_report(h: &ComplexMatrix, family: &StateFamily, alphas: &[f64], mu: f64) -> Result<Vec<FisherReport>> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("report grid is empty".into()));
    }
    let povm = eigenbasis_povm(h)?;
    alphas
        .iter()
        .map(|&alpha| {
            let (prediction, variance) = operator_moments(h, &family.state(alpha)?);
            let d_pred = family.differentiate(alpha, |a| Ok((family.density)(a)?.expectation(h)), |acc, w, v| *acc += w * v, 0.0)?;
            let cfi = cfi_povm(&povm, family, alpha)?;
            let qfi = qfi_auto(family, alpha)?;
            Ok(FisherReport {
                alpha,
                prediction,
                d_pred,
                variance,
                cfi,
                qfi,
                ccrb: bound(mu, cfi),
                qcrb: bound(mu, qfi),
                mu,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedIdentities {
    pub alpha: f64,
    pub mu: u64,
    /// Monte-Carlo mean of `(â − α)²`.
    pub mse: f64,
    pub standard_error: f64,
    pub bias: f64,
    pub slope: f64,
    pub variance: f64,
    /// `Δ²H/μ + b²`.
    pub predicted: f64,
    /// `|∂⟨H⟩|²/(μ I_c) + b²`.
    pub classical_bound: f64,
    /// `|∂⟨H⟩|²/(μ I_q) + b²`.
    pub quantum_bound: f64,
}

impl BiasedIdentities {
    /// `|mse − predicted|` within `sigmas` standard errors.
    pub fn equality_holds(&self, sigmas: f64) -> bool {
        (self.mse - self.predicted).abs() <= sigmas * self.standard_error
    }

    pub fn bound_holds(&self, sigmas: f64) -> bool {
        self.mse + sigmas * self.standard_error >= self.classical_bound
            && self.classical_bound >= self.quantum_bound * (1.0 - 1e-6)
    }
}

/// Monte-Carlo check of the biased error-propagation and Cramér-Rao relations
/// for the raw shot estimator of a trained model.
pub fn biased_identities<R: Rng + ?Sized>(
    model: &TrainedModel,
    family: &StateFamily,
    alpha: f64,
    mu: u64,
    repeats: usize,
    rng: &mut R,
) -> Result<BiasedIdentities> {
    if repeats < 2 {
        return Err(Error::InvalidArgument("need at least two repeats".into()));
    }
    let m = model.measurement()?;
    let x = &model.x_star;
    let dist = m.probabilities(&family.state(alpha)?)?;
    let (mean, variance) = dist.moments(x);
    let slope = family.differentiate(
        alpha,
        |a| Ok(m.probabilities(&(family.density)(a)?)?.moments(x).0),
        |acc, w, v| *acc += w * v,
        0.0,
    )?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..repeats {
        let e = sample_shots(&dist, x, mu, rng)?.estimate;
        let s = (e - alpha).powi(2);
        sum += s;
        sum_sq += s * s;
    }
    let n = repeats as f64;
    let mse = sum / n;
    let sample_var = ((sum_sq - n * mse * mse) / (n - 1.0)).max(0.0);
    let bias = mean - alpha;
    let muf = mu as f64;
    let cfi = cfi(&m, family, alpha)?;
    let qfi = qfi_auto(family, alpha)?;
    let b2 = bias * bias;
    Ok(BiasedIdentities {
        alpha,
        mu,
        mse,
        standard_error: (sample_var / n).sqrt(),
        bias,
        slope,
        variance,
        predicted: variance / muf + b2,
        classical_bound: slope * slope * bound(muf, cfi) + b2,
        quantum_bound: slope * slope * bound(muf, qfi) + b2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesBound {
    /// Prior second moment `(1/L)∫α² dα`.
    pub delta2_p: f64,
    /// `Tr ρ̄ M0²`.
    pub info: f64,
    pub bound: f64,
}

/// Flat-prior Bayesian bound `Δ²_p − Tr ρ̄ M0²` by quadrature on the family range.
pub fn bayes_bound(family: &StateFamily, quadrature: &Quadrature, m0: &ComplexMatrix) -> Result<BayesBound> {
    let length = quadrature.length();
    let mut delta2_p = 0.0;
    let mut info = 0.0;
    let m2 = m0 * m0;
    for (&alpha, &w) in quadrature.nodes.iter().zip(&quadrature.weights) {
        delta2_p += w * alpha * alpha;
        info += w * family.state(alpha)?.expectation(&m2);
    }
    delta2_p /= length;
    info /= length;
    Ok(BayesBound {
        delta2_p,
        info,
        bound: delta2_p - info,
    })
}

/// Flat-prior Bayesian MSE `(1/L)∫ Tr ρ_α (H − α)² dα` of an observable.
pub fn bayesian_mse(family: &StateFamily, quadrature: &Quadrature, h: &ComplexMatrix) -> Result<f64> {
    let mut total = 0.0;
    for (&alpha, &w) in quadrature.nodes.iter().zip(&quadrature.weights) {
        let rho = family.state(alpha)?;
        let (mean, var) = operator_moments(h, &rho);
        total += w * (var + (mean - alpha).powi(2));
    }
    Ok(total / quadrature.length())
}
