//! The trainable observable `H(x, θ) = Σ_i x_i U(θ)† (I ⊗ |i><i|) U(θ)`.
//!
//! The last `m + m'` qubits of the extended register are measured, where the
//! `m'` ancillas are appended after the input state in `|0>`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, Circuit};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::state::{DensityOperator, PureState};

pub const PROBABILITY_CLAMP: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableSpec {
    /// Qubits of the input state, copies included.
    pub n_qubits: usize,
    /// Measured input qubits `m` (the last `m` of the register).
    pub measured: usize,
    /// Naimark ancillas `m'`.
    #[serde(default)]
    pub naimark: usize,
    /// Ansatz acting on `n + m'` qubits.
    pub ansatz: AnsatzSpec,
}

impl ObservableSpec {
    pub fn new(n_qubits: usize, measured: usize, naimark: usize, ansatz: AnsatzSpec) -> Result<Self> {
        let spec = Self {
            n_qubits,
            measured,
            naimark,
            ansatz,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// HEA observable with `layers` layers.
    pub fn hea(n_qubits: usize, measured: usize, naimark: usize, layers: usize) -> Result<Self> {
        Self::new(n_qubits, measured, naimark, AnsatzSpec::hea(n_qubits + naimark, layers))
    }

    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        if self.n_qubits == 0 {
            return Err(Error::InvalidArgument("observable needs at least one input qubit".into()));
        }
        if self.measured > self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "cannot measure {} of {} qubits",
                self.measured, self.n_qubits
            )));
        }
        if self.measured + self.naimark == 0 {
            return Err(Error::InvalidArgument("m + m' must be at least 1".into()));
        }
        if self.ansatz.n_qubits != self.n_qubits + self.naimark {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits + self.naimark,
                found: self.ansatz.n_qubits,
            });
        }
        Ok(())
    }

    pub fn extended_qubits(&self) -> usize {
        self.n_qubits + self.naimark
    }

    pub fn outcome_bits(&self) -> usize {
        self.measured + self.naimark
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.outcome_bits()
    }

    pub fn param_count(&self) -> usize {
        self.ansatz.param_count()
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_outcomes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_outcomes(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn check_state(&self, rho: &DensityOperator) -> Result<()> {
        if rho.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n_qubits,
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

/// Outcome probabilities of the measured qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    fn from_raw(mut p: Vec<f64>) -> Result<Self> {
        for v in p.iter_mut() {
            if !v.is_finite() || *v < PROBABILITY_CLAMP {
                return Err(Error::InvalidState(format!("invalid outcome probability {v}")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self { probabilities: p })
    }

    /// `(Σ x_i p_i, Σ x_i² p_i − (Σ x_i p_i)²)`.
    pub fn moments(&self, x: &[f64]) -> (f64, f64) {
        moments(x, &self.probabilities)
    }
}

pub fn moments(x: &[f64], p: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (&xi, &pi) in x.iter().zip(p) {
        mean += xi * pi;
        second += xi * xi * pi;
    }
    (mean, (second - mean * mean).max(0.0))
}

/// `U(θ)` restricted to input columns with all ancillas in `|0>` (shape `2^(n+m') × 2^n`).
fn embedded_unitary(spec: &ObservableSpec, theta: &[f64]) -> Result<ComplexMatrix> {
    let circuit = spec.ansatz.circuit()?;
    let d = 1usize << spec.n_qubits;
    let big = 1usize << spec.extended_qubits();
    let mut cols = ComplexMatrix::zeros(big, d);
    for k in 0..d {
        cols[(k << spec.naimark, k)] = C64::new(1.0, 0.0);
    }
    circuit.apply(theta, &mut cols)?;
    Ok(cols)
}

fn diagonal_probabilities(w: &ComplexMatrix, u: &ComplexMatrix, mask: usize, k: usize) -> Vec<f64> {
    // p_i = Σ_{b: b & mask = i} Σ_l w_bl conj(u_bl)
    let mut p = vec![0.0; k];
    for l in 0..w.ncols() {
        for b in 0..w.nrows() {
            p[b & mask] += (w[(b, l)] * u[(b, l)].conj()).re;
        }
    }
    p
}

pub fn outcome_probabilities(spec: &ObservableSpec, theta: &[f64], rho: &DensityOperator) -> Result<OutcomeDistribution> {
    spec.check_state(rho)?;
    let u = embedded_unitary(spec, theta)?;
    Measurement::from_embedded(*spec, u).probabilities(rho)
}

pub fn expectation(spec: &ObservableSpec, x: &[f64], theta: &[f64], rho: &DensityOperator) -> Result<f64> {
    spec.check_x(x)?;
    Ok(outcome_probabilities(spec, theta, rho)?.moments(x).0)
}

pub fn variance(spec: &ObservableSpec, x: &[f64], theta: &[f64], rho: &DensityOperator) -> Result<f64> {
    spec.check_x(x)?;
    Ok(outcome_probabilities(spec, theta, rho)?.moments(x).1)
}

/// `Σ_i x_i Π_i(θ)` on the extended `n + m'` qubit space.
pub fn observable_matrix(spec: &ObservableSpec, x: &[f64], theta: &[f64]) -> Result<ComplexMatrix> {
    spec.validate()?;
    spec.check_x(x)?;
    let u = spec.ansatz.circuit()?.unitary(theta)?;
    let mask = spec.n_outcomes() - 1;
    let mut du = u.clone();
    for (b, mut row) in du.row_iter_mut().enumerate() {
        row *= C64::new(x[b & mask], 0.0);
    }
    Ok(crate::linalg::hermitian_part(&(u.adjoint() * du)))
}

/// Projectors `Π_i(θ)` on the extended space.
pub fn projectors(spec: &ObservableSpec, theta: &[f64]) -> Result<Vec<ComplexMatrix>> {
    let k = spec.n_outcomes();
    (0..k)
        .map(|i| {
            let mut x = vec![0.0; k];
            x[i] = 1.0;
            observable_matrix(spec, &x, theta)
        })
        .collect()
}

/// POVM `{E_i}` induced on the input space by the ancilla-extended measurement.
pub fn induced_povm(spec: &ObservableSpec, theta: &[f64]) -> Result<Vec<ComplexMatrix>> {
    spec.validate()?;
    let u = embedded_unitary(spec, theta)?;
    let k = spec.n_outcomes();
    let mask = k - 1;
    let d = u.ncols();
    let mut out = vec![ComplexMatrix::zeros(d, d); k];
    for b in 0..u.nrows() {
        let row = u.row(b);
        let e = &mut out[b & mask];
        *e += row.adjoint() * row;
    }
    Ok(out)
}

/// `Σ_i x_i E_i` on the input space; equals the observable when `m' = 0`.
pub fn effective_observable(spec: &ObservableSpec, x: &[f64], theta: &[f64]) -> Result<ComplexMatrix> {
    spec.check_x(x)?;
    let povm = induced_povm(spec, theta)?;
    let d = 1usize << spec.n_qubits;
    Ok(povm
        .iter()
        .zip(x)
        .fold(ComplexMatrix::zeros(d, d), |acc, (e, &xi)| acc + e.scale(xi)))
}

/// A measurement with `θ` fixed: the embedded unitary is computed once.
#[derive(Debug, Clone)]
pub struct Measurement {
    spec: ObservableSpec,
    embedded: ComplexMatrix,
}

impl Measurement {
    pub fn new(spec: ObservableSpec, theta: &[f64]) -> Result<Self> {
        spec.validate()?;
        let embedded = embedded_unitary(&spec, theta)?;
        Ok(Self { spec, embedded })
    }

    fn from_embedded(spec: ObservableSpec, embedded: ComplexMatrix) -> Self {
        Self { spec, embedded }
    }

    pub fn spec(&self) -> &ObservableSpec {
        &self.spec
    }

    pub fn probabilities(&self, rho: &DensityOperator) -> Result<OutcomeDistribution> {
        self.spec.check_state(rho)?;
        let w = &self.embedded * rho.matrix();
        let k = self.spec.n_outcomes();
        OutcomeDistribution::from_raw(diagonal_probabilities(&w, &self.embedded, k - 1, k))
    }

    pub fn probabilities_pure(&self, psi: &PureState) -> Result<OutcomeDistribution> {
        if psi.n_qubits() != self.spec.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.spec.n_qubits,
                found: psi.amplitudes().len(),
            });
        }
        let w = &self.embedded * psi.amplitudes();
        let k = self.spec.n_outcomes();
        let mut p = vec![0.0; k];
        for (b, z) in w.iter().enumerate() {
            p[b & (k - 1)] += z.norm_sqr();
        }
        OutcomeDistribution::from_raw(p)
    }
}

/// Result of a finite-shot estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotEstimate {
    pub estimate: f64,
    pub counts: Vec<u64>,
    pub empirical_variance: f64,
}

/// Samples `mu` outcomes by inverse CDF and returns `(1/μ) Σ x_i count_i`.
pub fn sample_shots<R: rand::Rng + ?Sized>(
    dist: &OutcomeDistribution,
    x: &[f64],
    mu: u64,
    rng: &mut R,
) -> Result<ShotEstimate> {
    if mu == 0 {
        return Err(Error::InvalidArgument("shot count must be positive".into()));
    }
    if x.len() != dist.probabilities.len() {
        return Err(Error::DimensionMismatch {
            expected: dist.probabilities.len(),
            found: x.len(),
        });
    }
    let counts = sample_counts(&dist.probabilities, mu, rng);
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / mu as f64).collect();
    let (estimate, empirical_variance) = moments(x, &freq);
    Ok(ShotEstimate {
        estimate,
        counts,
        empirical_variance,
    })
}

pub(crate) fn sample_counts<R: rand::Rng + ?Sized>(p: &[f64], mu: u64, rng: &mut R) -> Vec<u64> {
    let mut cumulative = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &v in p {
        acc += v.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    let mut counts = vec![0u64; p.len()];
    for _ in 0..mu {
        let u = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(p.len() - 1);
        counts[idx] += 1;
    }
    counts
}

/// A state held as a weighted ensemble of extended-register vectors.
#[derive(Debug, Clone)]
pub struct PreparedState {
    /// Columns are `√λ_r |v_r> ⊗ |0>^{m'}`.
    vectors: ComplexMatrix,
}

const ENSEMBLE_CUTOFF: f64 = 1e-14;

impl PreparedState {
    pub fn from_density(rho: &DensityOperator, naimark: usize) -> Result<Self> {
        let eig = rho.eigen()?;
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&k| eig.eigenvalues[k] > ENSEMBLE_CUTOFF)
            .collect();
        let d = rho.dim();
        let mut vectors = ComplexMatrix::zeros(d << naimark, keep.len());
        for (col, &k) in keep.iter().enumerate() {
            let s = eig.eigenvalues[k].sqrt();
            for i in 0..d {
                vectors[(i << naimark, col)] = eig.eigenvectors[(i, k)] * s;
            }
        }
        Ok(Self { vectors })
    }

    pub fn from_pure(psi: &PureState, naimark: usize) -> Self {
        let d = psi.amplitudes().len();
        let mut vectors = ComplexMatrix::zeros(d << naimark, 1);
        for i in 0..d {
            vectors[(i << naimark, 0)] = psi.amplitudes()[i];
        }
        Self { vectors }
    }

    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Gates,
    Unitary,
}

/// Evaluates outcome probabilities of a fixed list of states for many `θ`.
#[derive(Debug, Clone)]
pub struct BatchEvaluator {
    spec: ObservableSpec,
    circuit: Circuit,
    states: Vec<PreparedState>,
    strategy: Strategy,
}

impl BatchEvaluator {
    pub fn new(spec: ObservableSpec, states: Vec<PreparedState>) -> Result<Self> {
        spec.validate()?;
        let circuit = spec.ansatz.circuit()?;
        let big = 1usize << spec.extended_qubits();
        if let Some(s) = states.iter().find(|s| s.dim() != big) {
            return Err(Error::DimensionMismatch {
                expected: big,
                found: s.dim(),
            });
        }
        // gate application touches every column once per gate; the unitary route
        // pays for building U(θ) on 2^n columns and one product per state
        let g = circuit.gates.len().max(1) as f64;
        let small = (1usize << spec.n_qubits) as f64;
        let columns: f64 = states.iter().map(|s| s.rank() as f64).sum();
        let strategy = if small * (g + columns) < g * columns {
            Strategy::Unitary
        } else {
            Strategy::Gates
        };
        Ok(Self {
            spec,
            circuit,
            states,
            strategy,
        })
    }

    pub fn spec(&self) -> &ObservableSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Row `j` holds the outcome probabilities of state `j`.
    pub fn probabilities(&self, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        if theta.len() != self.circuit.n_params {
            return Err(Error::DimensionMismatch {
                expected: self.circuit.n_params,
                found: theta.len(),
            });
        }
        let k = self.spec.n_outcomes();
        let mask = k - 1;
        let naimark = self.spec.naimark;
        let project = |w: &ComplexMatrix| {
            let mut p = vec![0.0; k];
            for col in w.column_iter() {
                for (b, z) in col.iter().enumerate() {
                    p[b & mask] += z.norm_sqr();
                }
            }
            p
        };
        let rows: Vec<Vec<f64>> = match self.strategy {
            Strategy::Unitary => {
                let d = 1usize << self.spec.n_qubits;
                let big = d << naimark;
                let mut u = ComplexMatrix::zeros(big, d);
                for c in 0..d {
                    u[(c << naimark, c)] = C64::new(1.0, 0.0);
                }
                self.circuit.apply(theta, &mut u)?;
                let eval = |s: &PreparedState| {
                    // compress the ancilla-embedded vectors back to the input space
                    let mut v = ComplexMatrix::from_element(d, s.rank(), ZERO);
                    for r in 0..s.rank() {
                        for i in 0..d {
                            v[(i, r)] = s.vectors[(i << naimark, r)];
                        }
                    }
                    project(&(&u * v))
                };
                if self.states.len() > 64 {
                    self.states.par_iter().map(eval).collect()
                } else {
                    self.states.iter().map(eval).collect()
                }
            }
            Strategy::Gates => {
                let eval = |s: &PreparedState| -> Result<Vec<f64>> {
                    let mut w = s.vectors.clone();
                    self.circuit.apply(theta, &mut w)?;
                    Ok(project(&w))
                };
                if self.states.len() > 4 {
                    self.states.par_iter().map(eval).collect::<Result<_>>()?
                } else {
                    self.states.iter().map(eval).collect::<Result<_>>()?
                }
            }
        };
        rows.into_iter()
            .map(|p| OutcomeDistribution::from_raw(p).map(|d| d.probabilities))
            .collect()
    }
}
