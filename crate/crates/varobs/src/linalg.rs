//! Dense complex linear algebra.
//!
//! Qubit ordering is big-endian throughout: qubit 0 is the most significant
//! bit of a computational-basis index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const IM: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -IM, IM, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `|i><j|` on a `d`-dimensional space.
pub fn ket_bra(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn basis_vector(d: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d);
    v[i] = ONE;
    v
}

/// Kronecker product; the first factor occupies the most significant qubits.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = identity(1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn tensor_power(a: &ComplexMatrix, copies: usize) -> ComplexMatrix {
    let mut out = identity(1);
    for _ in 0..copies {
        out = out.kronecker(a);
    }
    out
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise deviation from hermiticity.
pub fn hermiticity_error(a: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Number of qubits `n` with `2^n = dim`, if `dim` is a power of two.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: DVector<f64>,
    /// Eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| x)
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= c(f(self.eigenvalues[k]), 0.0);
        }
        scaled * v.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the Hermitian part of `a` is used.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if !is_finite(a) {
        return Err(Error::InvalidArgument("non-finite matrix entries".into()));
    }
    let h = hermitian_part(a);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let d = a.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = ComplexMatrix::from_fn(d, d, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eig(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let h = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let d = a.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(d, d, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Permutation operator that moves qubit `i` of the input to position `perm[i]`.
pub fn qubit_permutation(perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let d = 1usize << n;
    let mut p = ComplexMatrix::zeros(d, d);
    for src in 0..d {
        let mut dst = 0usize;
        for (q, &target) in perm.iter().enumerate() {
            let bit = (src >> (n - 1 - q)) & 1;
            dst |= bit << (n - 1 - target);
        }
        p[(dst, src)] = ONE;
    }
    p
}

/// SWAP of qubits `a` and `b` in an `n`-qubit register.
pub fn swap_operator(n: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(a, b);
    qubit_permutation(&perm)
}
