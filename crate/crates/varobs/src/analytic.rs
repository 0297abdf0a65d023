//! Optimal observables of the variance-regularized regression problem.
//!
//! The stationarity condition of the cost in the large-sample limit is the
//! operator equation
//!
//! `½(ρ̃H + Hρ̃) − (k/L) Σ_q w_q α_q ρ_q + ((k−1)/L) Σ_q w_q Tr(Hρ_q) ρ_q = 0`,
//!
//! with `ρ̃ = (1/L) Σ_q w_q ρ_q` and `L = Σ_q w_q`. Quadrature weights give the
//! integral version on `[a, b]`, unit weights the finite-sample version.
//! Expanding `H` in an orthonormal Hermitian basis turns it into a real
//! symmetric positive semidefinite system.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::linalg::{
    c, frobenius_norm, identity, ket_bra, pauli_x, pauli_y, pauli_z, swap_operator, symmetric_eig, tensor_all,
    tensor_product, ComplexMatrix, C64,
};
use crate::metrology::{operator_moments, StateFamily};
use crate::quadrature::{Quadrature, QuadratureRule};
use crate::state::{haar_random_pure, DensityOperator};

/// Largest Hilbert-space dimension the basis expansion is used for.
pub const MAX_DIM: usize = 16;
const NULL_TOL: f64 = 1e-10;

/// `k = w_ls / w_var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRatio {
    Finite(f64),
    /// Vanishing variance weight.
    Infinite,
}

/// What to do when the linear system has free directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullPolicy {
    Reject,
    /// Pick the solution with zero component along the null space.
    #[default]
    MinimumNorm,
}

/// Orthonormal Hermitian basis of `d × d` matrices under `Tr(AB)`:
/// `I/√d`, the diagonal generalized Gell-Mann matrices and the
/// symmetric and antisymmetric off-diagonal ones. Stored sparsely.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<Vec<(usize, usize, C64)>>,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        let mut elements = Vec::with_capacity(dim * dim);
        let s = 1.0 / (dim as f64).sqrt();
        elements.push((0..dim).map(|i| (i, i, c(s, 0.0))).collect());
        for l in 1..dim {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut e: Vec<_> = (0..l).map(|j| (j, j, c(norm, 0.0))).collect();
            e.push((l, l, c(-(l as f64) * norm, 0.0)));
            elements.push(e);
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                elements.push(vec![(i, j, c(r, 0.0)), (j, i, c(r, 0.0))]);
                elements.push(vec![(i, j, c(0.0, -r)), (j, i, c(0.0, r))]);
            }
        }
        Self { dim, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, mu: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.elements[mu] {
            m[(i, j)] = v;
        }
        m
    }

    /// Real coordinates `Tr(B_μ A)` of a Hermitian matrix.
    pub fn coordinates(&self, a: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.elements
                .iter()
                .map(|e| e.iter().map(|&(i, j, v)| (v * a[(j, i)]).re).sum::<f64>()),
        )
    }

    pub fn compose(&self, h: &DVector<f64>) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (e, &hm) in self.elements.iter().zip(h.iter()) {
            for &(i, j, v) in e {
                m[(i, j)] += v * hm;
            }
        }
        m
    }

    /// `Re Tr(ρ B_ν B_μ)`.
    fn gram(&self, rho: &ComplexMatrix) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for nu in 0..n {
            for mu in nu..n {
                let mut s = C64::new(0.0, 0.0);
                for &(i, j, bv) in &self.elements[nu] {
                    for &(j2, k, bm) in &self.elements[mu] {
                        if j2 == j {
                            s += bv * bm * rho[(k, i)];
                        }
                    }
                }
                a[(nu, mu)] = s.re;
                a[(mu, nu)] = s.re;
            }
        }
        a
    }
}

/// Weighted label nodes `(α_q, ρ_q, w_q)`.
#[derive(Debug, Clone)]
pub struct OperatorProblem {
    pub labels: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub weights: Vec<f64>,
    pub range: (f64, f64),
}

impl OperatorProblem {
    pub fn new(labels: Vec<f64>, states: Vec<DensityOperator>, weights: Vec<f64>, range: (f64, f64)) -> Result<Self> {
        if labels.is_empty() || labels.len() != states.len() || labels.len() != weights.len() {
            return Err(Error::InvalidArgument("nodes, states and weights must be nonempty and aligned".into()));
        }
        let d = states[0].dim();
        if d > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {d} exceeds {MAX_DIM}")));
        }
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::InvalidArgument("states differ in dimension".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidArgument("weights must be non-negative with positive sum".into()));
        }
        Ok(Self {
            labels,
            states,
            weights,
            range,
        })
    }

    /// Integral over the family range by quadrature.
    pub fn from_family(family: &StateFamily, rule: QuadratureRule) -> Result<Self> {
        let (a, b) = family.range();
        let quad = Quadrature::new(rule, a, b)?;
        let states = quad.nodes.iter().map(|&x| family.state(x)).collect::<Result<Vec<_>>>()?;
        Self::new(quad.nodes, states, quad.weights, (a, b))
    }

    /// Unit weights on the entries of a training set.
    pub fn from_set(set: &TrainingSet) -> Result<Self> {
        set.validate()?;
        Self::new(
            set.labels(),
            set.entries.iter().map(|e| e.state.clone()).collect(),
            vec![1.0; set.len()],
            set.label_range,
        )
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `L = Σ w_q`.
    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn nodes(&self) -> impl Iterator<Item = (f64, &DensityOperator, f64)> {
        self.labels
            .iter()
            .zip(&self.states)
            .zip(&self.weights)
            .map(|((&a, s), &w)| (a, s, w))
    }

    pub fn mean_state(&self) -> ComplexMatrix {
        let d = self.dim();
        let l = self.length();
        self.nodes()
            .fold(ComplexMatrix::zeros(d, d), |acc, (_, s, w)| acc + s.matrix().scale(w / l))
    }

    /// `(1/L) Σ w α ρ`.
    pub fn first_moment(&self) -> ComplexMatrix {
        let d = self.dim();
        let l = self.length();
        self.nodes()
            .fold(ComplexMatrix::zeros(d, d), |acc, (a, s, w)| acc + s.matrix().scale(a * w / l))
    }

    /// Left side of the operator equation at `H`.
    pub fn residual_operator(&self, k: WeightRatio, h: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let l = self.length();
        let fit = self
            .nodes()
            .fold(ComplexMatrix::zeros(d, d), |acc, (_, s, w)| acc + s.matrix().scale(w * s.expectation(h) / l));
        let first = self.first_moment();
        match k {
            WeightRatio::Finite(k) => {
                let rt = self.mean_state();
                (&rt * h + h * &rt).scale(0.5) - first.scale(k) + fit.scale(k - 1.0)
            }
            WeightRatio::Infinite => fit - first,
        }
    }

    pub fn residual(&self, k: WeightRatio, h: &ComplexMatrix) -> f64 {
        frobenius_norm(&self.residual_operator(k, h))
    }
}

#[derive(Debug, Clone)]
pub struct OptimalObservable {
    pub operator: ComplexMatrix,
    /// Frobenius norm of the operator equation at the solution.
    pub residual: f64,
    /// Dimension of the solution space left free.
    pub null_dim: usize,
}

struct Split {
    range: Vec<(f64, DVector<f64>)>,
    null: Vec<DVector<f64>>,
}

fn split(m: &DMatrix<f64>) -> Result<Split> {
    let (values, vectors) = symmetric_eig(m)?;
    let top = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut out = Split {
        range: Vec::new(),
        null: Vec::new(),
    };
    for (i, &v) in values.iter().enumerate() {
        let col = vectors.column(i).into_owned();
        if v.abs() > NULL_TOL * top.max(f64::MIN_POSITIVE) {
            out.range.push((v, col));
        } else {
            out.null.push(col);
        }
    }
    Ok(out)
}

fn pseudo_solve(s: &Split, rhs: &DVector<f64>) -> DVector<f64> {
    let mut h = DVector::zeros(rhs.len());
    for (v, col) in &s.range {
        h += col * (col.dot(rhs) / v);
    }
    h
}

pub fn solve_optimal_observable(problem: &OperatorProblem, k: WeightRatio, policy: NullPolicy) -> Result<OptimalObservable> {
    if let WeightRatio::Finite(k) = k {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!("weight ratio must be positive, got {k}")));
        }
    }
    let basis = HermitianBasis::new(problem.dim());
    let n = basis.len();
    let l = problem.length();
    let a = basis.gram(&problem.mean_state());
    let mut b = DMatrix::zeros(n, n);
    let mut c = DVector::zeros(n);
    for (alpha, s, w) in problem.nodes() {
        let r = basis.coordinates(s.matrix());
        b.ger(w / l, &r, &r, 1.0);
        c.axpy(alpha * w / l, &r, 1.0);
    }
    let (h, null_dim) = match k {
        WeightRatio::Finite(k) => {
            let s = split(&(&a + &b * (k - 1.0)))?;
            (pseudo_solve(&s, &(&c * k)), s.null.len())
        }
        WeightRatio::Infinite => {
            // least-squares fit first, then the smallest variance among exact fits
            let sb = split(&b)?;
            let hp = pseudo_solve(&sb, &c);
            if sb.null.is_empty() {
                (hp, 0)
            } else {
                let nmat = DMatrix::from_columns(&sb.null);
                let reduced = nmat.transpose() * &a * &nmat;
                let rhs = -(nmat.transpose() * &a * &hp);
                let sr = split(&reduced)?;
                let z = pseudo_solve(&sr, &rhs);
                (hp + nmat * z, sr.null.len())
            }
        }
    };
    if null_dim > 0 && policy == NullPolicy::Reject {
        return Err(Error::Singular { null_dim });
    }
    let operator = basis.compose(&h);
    let residual = problem.residual(k, &operator);
    Ok(OptimalObservable {
        operator,
        residual,
        null_dim,
    })
}

/// The finite-sample equation with `ρ̃_f = (1/T) Σ ρ_j`.
pub fn solve_optimal_observable_finite_t(set: &TrainingSet, k: WeightRatio, policy: NullPolicy) -> Result<OptimalObservable> {
    solve_optimal_observable(&OperatorProblem::from_set(set)?, k, policy)
}

/// `Σ w Tr(Hρ) − Σ w α`; zero for every solution of the operator equation.
pub fn area_residual(problem: &OperatorProblem, h: &ComplexMatrix) -> f64 {
    problem.nodes().map(|(a, s, w)| w * (s.expectation(h) - a)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalVariance {
    /// `Σ w Δ²H`.
    pub total: f64,
    /// `k Σ w (α⟨H⟩ − ⟨H⟩²)`.
    pub identity_rhs: f64,
    /// `k (Σ w α² − (Σ w α)²/L)`, stated for `k ≤ 1`.
    pub bound: Option<f64>,
    /// `total / L` against `k L²/12` for a flat label range.
    pub average: f64,
    pub average_bound: Option<f64>,
    /// `max_q |⟨H⟩_q − α_q|`.
    pub max_bias: f64,
}

impl TotalVariance {
    pub fn identity_residual(&self) -> f64 {
        (self.total - self.identity_rhs).abs()
    }
}

pub fn total_variance_checks(problem: &OperatorProblem, k: f64, h: &ComplexMatrix) -> TotalVariance {
    let l = problem.length();
    let mut total = 0.0;
    let mut rhs = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut max_bias = 0.0f64;
    for (a, s, w) in problem.nodes() {
        let (mean, var) = operator_moments(h, s);
        total += w * var;
        rhs += w * (a * mean - mean * mean);
        m1 += w * a;
        m2 += w * a * a;
        max_bias = max_bias.max((mean - a).abs());
    }
    let (lo, hi) = problem.range;
    let width = hi - lo;
    let small_k = k <= 1.0;
    TotalVariance {
        total,
        identity_rhs: k * rhs,
        bound: small_k.then(|| k * (m2 - m1 * m1 / l)),
        average: total / l,
        average_bound: small_k.then(|| k * width * width / 12.0),
        max_bias,
    }
}

fn sigma(i: usize) -> ComplexMatrix {
    match i {
        0 => identity(2),
        1 => pauli_x(),
        2 => pauli_y(),
        _ => pauli_z(),
    }
}

/// Depolarized `|+>` on `α ∈ [0, 4/3]`.
pub fn depolarizing_optimal(k: f64) -> ComplexMatrix {
    identity(2).scale((3.0 * k + 10.0) / (3.0 * k + 15.0)) - pauli_x().scale(k / (k + 5.0))
}

/// Amplitude-damped `|+>` on `[a, b] ⊆ [0, 1]`: `½(h₀I + h₁σx + h₃σz)`.
pub fn ad_optimal(a: f64, b: f64, k: f64) -> Result<ComplexMatrix> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    let l = b - a;
    let c1 = 2.0 / 3.0 * ((1.0 - a).powf(1.5) - (1.0 - b).powf(1.5));
    let c3 = 0.4 * ((1.0 - b).powf(2.5) - (1.0 - a).powf(2.5));
    let c2 = (b * b - a * a) / 2.0;
    let c4 = (b.powi(3) - a.powi(3)) / 3.0;
    let km = k - 1.0;
    let m = nalgebra::Matrix3::new(
        l,
        c1,
        c2,
        k * c1,
        l + km * (l - c2),
        km * (c1 + c3),
        k * c2,
        km * (c1 + c3),
        l + km * c4,
    );
    let rhs = nalgebra::Vector3::new(2.0 * c2, 2.0 * k * (c1 + c3), 2.0 * k * c4);
    let h = m.lu().solve(&rhs).ok_or(Error::Singular { null_dim: 1 })?;
    Ok((identity(2).scale(h[0]) + pauli_x().scale(h[1]) + pauli_z().scale(h[2])).scale(0.5))
}

/// Isotropic family labeled by negativity.
pub fn iso_optimal(k: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    h[(0, 0)] = c(4.0, 0.0);
    h[(3, 3)] = c(4.0, 0.0);
    h[(1, 1)] = c(4.0 - k, 0.0);
    h[(2, 2)] = c(4.0 - k, 0.0);
    h[(0, 3)] = c(k, 0.0);
    h[(3, 0)] = c(k, 0.0);
    h.unscale(8.0 + k)
}

fn bell_matrix(d03: f64, d00: f64, d11: f64, d22: f64, d33: f64, d12: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    h[(0, 0)] = c(d00, 0.0);
    h[(1, 1)] = c(d11, 0.0);
    h[(2, 2)] = c(d22, 0.0);
    h[(3, 3)] = c(d33, 0.0);
    h[(0, 3)] = c(d03, 0.0);
    h[(3, 0)] = c(d03, 0.0);
    h[(1, 2)] = c(d12, 0.0);
    h[(2, 1)] = c(d12, 0.0);
    h
}

/// Bell-type family labeled by negativity, free parameters set to zero.
pub fn bell_optimal(k: f64) -> ComplexMatrix {
    let pi2 = PI * PI;
    let t1 = 3.0 * k * k * pi2 + 6.0 * k * pi2 - 12.0 * k * k * PI + 12.0 * k * PI + 8.0 * k * k - 100.0 * k - 16.0;
    let t2 = 3.0 * k * k * pi2 - 12.0 * k * k * PI + 6.0 * k * PI + 8.0 * k * k - 20.0 * k;
    let t3 = 24.0 * k * PI - 76.0 * k - 8.0;
    let t4 = 4.0 * k + 8.0;
    bell_matrix(t2 / t1, t3 / t1, t4 / t1, -t3 / t1, -t4 / t1, -t2 / t1)
}

/// `k → ∞` limit of [`bell_optimal`].
pub fn bell_optimal_limit() -> ComplexMatrix {
    bell_matrix(1.0, 0.0, 0.0, 0.0, 0.0, -1.0)
}

/// `z`-rotated `|+>` on `[0, π]` with `c ∈ {1, 2}` copies (free parameter `t = 0`).
pub fn unitary_optimal(copies: usize, k: f64) -> Result<ComplexMatrix> {
    match copies {
        1 => Ok(identity(2).scale(PI / 2.0) - pauli_x().scale(4.0 * k / (PI * (1.0 + k)))),
        2 => {
            let r = -32.0 - 64.0 * k + 27.0 * PI * PI + 9.0 * k * PI * PI;
            let two = |i: usize, j: usize| tensor_product(&sigma(i), &sigma(j));
            Ok(identity(4).scale(PI / 2.0)
                - (two(0, 1) + two(1, 0)).scale(12.0 * k * PI * (k + 8.0) / (r * (1.0 + 2.0 * k)))
                - (two(1, 2) + two(2, 1)).scale(3.0 * k * (3.0 * PI * PI - 32.0) / r))
        }
        _ => Err(Error::InvalidArgument(format!("closed form known for 1 or 2 copies, got {copies}"))),
    }
}

/// `i Σ_{k=1..c} ((−2)^k/k) (|0><1|^{⊗k} − |1><0|^{⊗k}) ⊗ I^{⊗(c−k)}`.
pub fn fourier_observable(copies: usize) -> Result<ComplexMatrix> {
    if copies == 0 || copies > 8 {
        return Err(Error::InvalidArgument(format!("copies must be in 1..=8, got {copies}")));
    }
    let d = 1usize << copies;
    let mut h = ComplexMatrix::zeros(d, d);
    for k in 1..=copies {
        let mut up = vec![ket_bra(2, 0, 1); k];
        let mut down = vec![ket_bra(2, 1, 0); k];
        up.extend(std::iter::repeat_n(identity(2), copies - k));
        down.extend(std::iter::repeat_n(identity(2), copies - k));
        let coef = (-2.0f64).powi(k as i32) / k as f64;
        h += (tensor_all(&up) - tensor_all(&down)).scale(coef);
    }
    Ok(h * c(0.0, 1.0))
}

/// `Σ_{k=1..c} (−1)^{k+1} (2/k) sin(kα)`, the partial Fourier sum of `α` on `(−π, π)`.
pub fn fourier_partial_sum(copies: usize, alpha: f64) -> f64 {
    (1..=copies)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * 2.0 / kf * (kf * alpha).sin()
        })
        .sum()
}

/// Two-copy operators on wires `A₁B₁A₂B₂`.
#[derive(Debug, Clone)]
pub struct TwoCopyBounds {
    pub m1: ComplexMatrix,
    pub m2: ComplexMatrix,
    pub v1: ComplexMatrix,
    pub v2: ComplexMatrix,
}

pub fn two_copy_bound_operators() -> TwoCopyBounds {
    let id = identity(16);
    let swap_a = swap_operator(4, 0, 2);
    let swap_b = swap_operator(4, 1, 3);
    let minus = |s: &ComplexMatrix| (&id - s).scale(0.5);
    let plus = |s: &ComplexMatrix| (&id + s).scale(0.5);
    let (pa, pb) = (minus(&swap_a), minus(&swap_b));
    TwoCopyBounds {
        m1: pa.scale(4.0),
        m2: pb.scale(4.0),
        v1: ((&pa - plus(&swap_a)) * &pb).scale(4.0),
        v2: (&pa * (&pb - plus(&swap_b))).scale(4.0),
    }
}

/// `W = (I − 2P⁻_A) ⊗ P⁻_B` on two copies of a bipartite state with `s`
/// qubits per side, wires `A₁B₁A₂B₂`.
pub fn witness_operator(s: usize) -> Result<ComplexMatrix> {
    if s == 0 || s > 2 {
        return Err(Error::InvalidArgument("dense witness is built for s = 1 or 2".into()));
    }
    let n = 4 * s;
    let id = identity(1 << n);
    let mut swap_a = identity(1 << n);
    let mut swap_b = identity(1 << n);
    for q in 0..s {
        swap_a = swap_operator(n, q, 2 * s + q) * swap_a;
        swap_b = swap_operator(n, s + q, 3 * s + q) * swap_b;
    }
    let pa = (&id - &swap_a).scale(0.5);
    let pb = (&id - &swap_b).scale(0.5);
    Ok((&id - pa.scale(2.0)) * pb)
}

/// Closed form `−(2^s − 1)² / (2(2^{2s} + 1))` of the Haar average of `⟨W⟩`.
pub fn witness_haar_closed_form(s: usize) -> f64 {
    let d = (1u64 << s) as f64;
    -(d - 1.0).powi(2) / (2.0 * (d * d + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
}

/// `⟨ψψ| S |ψψ⟩` where `S` permutes the two copies of the wires in `mask`.
fn copy_swap_expectation(psi: &[C64], bits: usize, mask: usize) -> f64 {
    let d = 1usize << bits;
    let mut total = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            // |i>|j> maps to |i'>|j'> exchanging the masked bits
            let ip = (i & !mask) | (j & mask);
            let jp = (j & !mask) | (i & mask);
            total += (psi[ip] * psi[jp]).conj() * psi[i] * psi[j];
        }
    }
    total.re
}

/// Monte-Carlo Haar average of the two-copy witness for `s` qubits per side.
pub fn witness_haar_average<R: Rng + ?Sized>(s: usize, samples: usize, rng: &mut R) -> Result<MonteCarlo> {
    if s == 0 || s > 4 {
        return Err(Error::InvalidArgument(format!("s must be in 1..=4, got {s}")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let bits = 2 * s;
    let mask_a = ((1usize << s) - 1) << s;
    let mask_ab = (1usize << bits) - 1;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let psi = haar_random_pure(bits, rng);
        let amps = psi.amplitudes().as_slice();
        // W = (S_A − S_A S_B)/2 with S_A S_B the full copy exchange
        let w = 0.5 * (copy_swap_expectation(amps, bits, mask_a) - copy_swap_expectation(amps, bits, mask_ab));
        sum += w;
        sum_sq += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(MonteCarlo {
        mean,
        standard_error: (var / n).sqrt(),
        samples,
    })
}
