//! Validated quantum states and the state-level primitives built on them.

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eig, ComplexMatrix, ComplexVector, HermitianEigen, C64, ONE, ZERO,
};
use crate::rng::complex_gaussian;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;
pub const MAX_QUBITS: usize = 16;

/// A density matrix on `n` qubits: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates all three state invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = check_square_qubit_dims(&matrix)?;
        if !linalg::is_finite(&matrix) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eig(&matrix)?.min();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Skips validation. Callers guarantee the invariants by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        let n_qubits = linalg::qubits_for_dim(matrix.nrows()).expect("power-of-two dimension");
        Self { n_qubits, matrix }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self {
            n_qubits: psi.n_qubits(),
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: linalg::identity(d).scale(1.0 / d as f64),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// `ρ^⊗c`; `c = 1` returns a copy.
    pub fn tensor_power(&self, copies: usize) -> DensityOperator {
        assert!(copies >= 1, "at least one copy");
        let mut out = self.clone();
        for _ in 1..copies {
            out = out.tensor(self);
        }
        out
    }

    /// `Re Tr(ρ A)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        linalg::trace_product(&self.matrix, op).re
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        hermitian_eig(&self.matrix)
    }
}

/// A normalized state vector on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        let n_qubits = qubits_of_len(amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm2} is not 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let d = 1usize << n_qubits;
        Self {
            n_qubits,
            amplitudes: linalg::basis_vector(d, index),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

fn qubits_of_len(len: usize) -> Result<usize> {
    match linalg::qubits_for_dim(len) {
        Some(n) if (1..=MAX_QUBITS).contains(&n) => Ok(n),
        _ => Err(Error::InvalidState(format!(
            "dimension {len} is not 2^n for 1 <= n <= {MAX_QUBITS}"
        ))),
    }
}

fn check_square_qubit_dims(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    qubits_of_len(m.nrows())
}

/// Bits of `index` at the given qubit positions, packed big-endian.
pub(crate) fn gather_bits(index: usize, n_qubits: usize, qubits: &[usize]) -> usize {
    qubits.iter().fold(0usize, |acc, &q| {
        (acc << 1) | ((index >> (n_qubits - 1 - q)) & 1)
    })
}

/// Reduced state on the qubits in `keep` (order of the output follows ascending index).
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let n = rho.n_qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return Err(Error::InvalidArgument(format!(
            "invalid qubit set {keep:?} for {n} qubits"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dk = 1usize << kept.len();
    let d = rho.dim();
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..d {
        let ti = gather_bits(i, n, &traced);
        let ki = gather_bits(i, n, &kept);
        for j in 0..d {
            if gather_bits(j, n, &traced) == ti {
                out[(ki, gather_bits(j, n, &kept))] += m[(i, j)];
            }
        }
    }
    Ok(DensityOperator::new_unchecked(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    FirstQubit,
    SecondQubit,
}

/// Partial transpose of a two-qubit state.
pub fn partial_transpose(rho: &DensityOperator, party: Party) -> Result<ComplexMatrix> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    // <ab|ρ^T|cd>
                    let (src_r, src_c) = match party {
                        Party::SecondQubit => (2 * a + d, 2 * c + b),
                        Party::FirstQubit => (2 * c + b, 2 * a + d),
                    };
                    out[(2 * a + b, 2 * c + d)] = m[(src_r, src_c)];
                }
            }
        }
    }
    Ok(out)
}

/// `‖ρ^{T_B}‖₁ − 1`, normalized so that a maximally entangled two-qubit state has 1.
pub fn negativity(rho: &DensityOperator) -> Result<f64> {
    let pt = partial_transpose(rho, Party::SecondQubit)?;
    let eig = hermitian_eig(&pt)?;
    let neg: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).sum();
    Ok((-2.0 * neg).clamp(0.0, 1.0))
}

/// Uhlmann fidelity `Tr √(√ρ τ √ρ)`.
pub fn fidelity(rho: &DensityOperator, tau: &DensityOperator) -> Result<f64> {
    if rho.dim() != tau.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: tau.dim(),
        });
    }
    let sqrt_rho = rho.eigen()?.map(|l| l.max(0.0).sqrt());
    let inner = &sqrt_rho * tau.matrix() * &sqrt_rho;
    let eig = hermitian_eig(&inner)?;
    let f: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

pub fn purity(rho: &DensityOperator) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

pub fn haar_random_pure<R: rand::Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PureState {
    let d = 1usize << n_qubits;
    let v = ComplexVector::from_fn(d, |_, _| complex_gaussian(rng));
    PureState::normalized(v).expect("Gaussian vector is nonzero")
}

/// Ginibre ensemble `GG†/Tr(GG†)` on `n` qubits.
pub fn random_mixed<R: rand::Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityOperator {
    let d = 1usize << n_qubits;
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    DensityOperator::new_unchecked(linalg::hermitian_part(&w).unscale(tr))
}

pub fn random_mixed_two_qubit<R: rand::Rng + ?Sized>(rng: &mut R) -> DensityOperator {
    random_mixed(2, rng)
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction.
pub fn haar_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Uniform real number in `[low, high)`.
pub(crate) fn uniform<R: rand::Rng + ?Sized>(rng: &mut R, low: f64, high: f64) -> f64 {
    low + (high - low) * rng.random::<f64>()
}

/// The Bell state `(|00> + |11>)/√2`.
pub fn phi_plus() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(ComplexVector::from_vec(vec![
        C64::new(s, 0.0),
        ZERO,
        ZERO,
        C64::new(s, 0.0),
    ]))
    .expect("normalized")
}
