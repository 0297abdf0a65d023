//! Labeled state families and training sets.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector, C64, ONE, ZERO};
use crate::rng::{self, Rng};
use crate::state::{
    self, haar_unitary, negativity, phi_plus, random_mixed_two_qubit, uniform, DensityOperator,
    PureState,
};

/// Input state fed to a single-qubit channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QubitInput {
    #[default]
    Plus,
    Zero,
    MaximallyMixed,
}

impl QubitInput {
    pub fn density(self) -> DensityOperator {
        match self {
            QubitInput::Plus => DensityOperator::new_unchecked(ComplexMatrix::from_element(
                2,
                2,
                c(0.5, 0.0),
            )),
            QubitInput::Zero => PureState::basis(1, 0).density(),
            QubitInput::MaximallyMixed => DensityOperator::maximally_mixed(1),
        }
    }
}

/// A one-parameter family of states indexed by its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Amplitude damping with decay probability α ∈ [0, 1].
    AmplitudeDamping {
        #[serde(default)]
        input: QubitInput,
    },
    /// Depolarizing channel with α ∈ [0, 4/3].
    Depolarizing {
        #[serde(default)]
        input: QubitInput,
    },
    /// z-rotation by angle α ∈ [0, π].
    ZRotation {
        #[serde(default)]
        input: QubitInput,
    },
    /// `√p|00> + √(1−p)|11>` labeled by its negativity N (p ≥ 1/2 branch).
    BellType,
    /// Isotropic state labeled by its negativity N ∈ [0, 1].
    Isotropic,
    /// Ground state of the periodic transverse-field Ising chain labeled by the field h.
    Ising {
        n_qubits: usize,
        coupling: f64,
        h_min: f64,
        h_max: f64,
    },
    /// Random two-qubit pure states labeled by negativity.
    RandomPure,
    /// Random two-qubit mixed states labeled by negativity.
    RandomMixed,
}

/// Compact family identifier attached to each labeled state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    AmplitudeDamping,
    Depolarizing,
    ZRotation,
    BellType,
    Isotropic,
    Ising,
    RandomPure,
    RandomMixed,
}

pub const ISING_MIN_FIELD: f64 = 0.05;
pub const ISING_MAX_QUBITS: usize = 8;

impl Family {
    pub fn tag(&self) -> FamilyTag {
        match self {
            Family::AmplitudeDamping { .. } => FamilyTag::AmplitudeDamping,
            Family::Depolarizing { .. } => FamilyTag::Depolarizing,
            Family::ZRotation { .. } => FamilyTag::ZRotation,
            Family::BellType => FamilyTag::BellType,
            Family::Isotropic => FamilyTag::Isotropic,
            Family::Ising { .. } => FamilyTag::Ising,
            Family::RandomPure => FamilyTag::RandomPure,
            Family::RandomMixed => FamilyTag::RandomMixed,
        }
    }

    pub fn label_range(&self) -> (f64, f64) {
        match self {
            Family::AmplitudeDamping { .. } => (0.0, 1.0),
            Family::Depolarizing { .. } => (0.0, 4.0 / 3.0),
            Family::ZRotation { .. } => (0.0, std::f64::consts::PI),
            Family::Ising { h_min, h_max, .. } => (*h_min, *h_max),
            Family::BellType | Family::Isotropic | Family::RandomPure | Family::RandomMixed => {
                (0.0, 1.0)
            }
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Family::AmplitudeDamping { .. } | Family::Depolarizing { .. } | Family::ZRotation { .. } => 1,
            Family::Ising { n_qubits, .. } => *n_qubits,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::Ising {
            n_qubits,
            coupling,
            h_min,
            h_max,
        } = self
        {
            if !(2..=ISING_MAX_QUBITS).contains(n_qubits) {
                return Err(Error::InvalidArgument(format!(
                    "Ising chain needs 2..={ISING_MAX_QUBITS} qubits, got {n_qubits}"
                )));
            }
            if !(coupling.is_finite() && *coupling > 0.0) {
                return Err(Error::InvalidArgument("Ising coupling must be positive".into()));
            }
            if !(h_min.is_finite() && h_max.is_finite() && *h_min >= ISING_MIN_FIELD && h_max > h_min) {
                return Err(Error::InvalidArgument(format!(
                    "Ising field range must satisfy {ISING_MIN_FIELD} <= h_min < h_max"
                )));
            }
        }
        Ok(())
    }

    /// Whether `state` is a deterministic function of the label.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Family::RandomPure | Family::RandomMixed)
    }

    /// The labeled state ρ_α for deterministic families.
    pub fn state(&self, label: f64) -> Result<DensityOperator> {
        let (a, b) = self.label_range();
        check_range("label", label, a, b)?;
        match self {
            Family::AmplitudeDamping { input } => ad_channel(&input.density(), label),
            Family::Depolarizing { input } => depolarizing_channel(&input.density(), label),
            Family::ZRotation { input } => z_rotation_channel(&input.density(), label),
            Family::BellType => Ok(bell_state_from_negativity(label)?.density()),
            Family::Isotropic => isotropic_from_negativity(label),
            Family::Ising {
                n_qubits, coupling, ..
            } => Ok(ising_ground_state(*n_qubits, label, *coupling)?.density()),
            Family::RandomPure | Family::RandomMixed => Err(Error::NotApplicable(
                "random families have no label-to-state map".into(),
            )),
        }
    }

    /// State vector for families whose states are pure.
    pub fn pure_state(&self, label: f64) -> Result<Option<PureState>> {
        let (a, b) = self.label_range();
        check_range("label", label, a, b)?;
        Ok(match self {
            Family::BellType => Some(bell_state_from_negativity(label)?),
            Family::Ising {
                n_qubits, coupling, ..
            } => Some(ising_ground_state(*n_qubits, label, *coupling)?),
            Family::ZRotation {
                input: QubitInput::Plus,
            } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let v = ComplexVector::from_vec(vec![
                    C64::from_polar(s, -label / 2.0),
                    C64::from_polar(s, label / 2.0),
                ]);
                Some(PureState::new(v)?)
            }
            _ => None,
        })
    }
}

fn require_single_qubit(rho: &DensityOperator) -> Result<()> {
    if rho.n_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Amplitude damping with Kraus operators `√α|0><1|` and `|0><0| + √(1−α)|1><1|`.
pub fn ad_channel(rho: &DensityOperator, alpha: f64) -> Result<DensityOperator> {
    require_single_qubit(rho)?;
    check_range("alpha", alpha, 0.0, 1.0)?;
    let v1 = ComplexMatrix::from_row_slice(2, 2, &[ZERO, c(alpha.sqrt(), 0.0), ZERO, ZERO]);
    let v2 = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c((1.0 - alpha).sqrt(), 0.0)]);
    let m = rho.matrix();
    let out = &v1 * m * v1.adjoint() + &v2 * m * v2.adjoint();
    DensityOperator::new(linalg::hermitian_part(&out))
}

/// `(1−α)ρ + (α/2) I`.
pub fn depolarizing_channel(rho: &DensityOperator, alpha: f64) -> Result<DensityOperator> {
    require_single_qubit(rho)?;
    check_range("alpha", alpha, 0.0, 4.0 / 3.0)?;
    let out = rho.matrix().scale(1.0 - alpha) + linalg::identity(2).scale(alpha / 2.0);
    DensityOperator::new(out)
}

/// `e^{−iασz/2} ρ e^{iασz/2}`.
pub fn z_rotation_channel(rho: &DensityOperator, alpha: f64) -> Result<DensityOperator> {
    require_single_qubit(rho)?;
    check_range("alpha", alpha, 0.0, std::f64::consts::PI)?;
    let u = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![
        C64::from_polar(1.0, -alpha / 2.0),
        C64::from_polar(1.0, alpha / 2.0),
    ]));
    let out = &u * rho.matrix() * u.adjoint();
    DensityOperator::new(linalg::hermitian_part(&out))
}

/// `√p|00> + √(1−p)|11>`.
pub fn bell_state(p: f64) -> Result<PureState> {
    check_range("p", p, 0.0, 1.0)?;
    PureState::new(ComplexVector::from_vec(vec![
        c(p.sqrt(), 0.0),
        ZERO,
        ZERO,
        c((1.0 - p).sqrt(), 0.0),
    ]))
}

/// Bell-type state with negativity `N`, taking `p ≥ 1/2`.
pub fn bell_state_from_negativity(n: f64) -> Result<PureState> {
    check_range("negativity", n, 0.0, 1.0)?;
    let r = (1.0 - n * n).max(0.0).sqrt();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::normalized(ComplexVector::from_vec(vec![
        c(s * (1.0 + r).sqrt(), 0.0),
        ZERO,
        ZERO,
        c(s * (1.0 - r).sqrt(), 0.0),
    ]))
}

/// `2√(p(1−p))`.
pub fn bell_negativity(p: f64) -> f64 {
    2.0 * (p * (1.0 - p)).max(0.0).sqrt()
}

/// `q|Φ><Φ| + (1−q) I/4`.
pub fn isotropic_state(q: f64) -> Result<DensityOperator> {
    check_range("q", q, 0.0, 1.0)?;
    let phi = phi_plus().density();
    let out = phi.matrix().scale(q) + linalg::identity(4).scale((1.0 - q) / 4.0);
    DensityOperator::new(out)
}

/// Isotropic state with negativity `N`, i.e. `q = (2N + 1)/3`.
pub fn isotropic_from_negativity(n: f64) -> Result<DensityOperator> {
    check_range("negativity", n, 0.0, 1.0)?;
    isotropic_state(((2.0 * n + 1.0) / 3.0).min(1.0))
}

/// `max(0, (3q − 1)/2)`.
pub fn isotropic_negativity(q: f64) -> f64 {
    (1.5 * q - 0.5).max(0.0)
}

/// `−J Σ_i (σz^i σz^{i+1} + h σx^i)` with periodic boundary, as a real matrix.
pub fn ising_hamiltonian(n: usize, h: f64, coupling: f64) -> Result<DMatrix<f64>> {
    if !(2..=ISING_MAX_QUBITS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Ising chain needs 2..={ISING_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for b in 0..d {
        let spin = |q: usize| if (b >> (n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
        let mut diag = 0.0;
        for i in 0..n {
            diag += spin(i) * spin((i + 1) % n);
        }
        m[(b, b)] = -coupling * diag;
        for i in 0..n {
            let flipped = b ^ (1 << (n - 1 - i));
            m[(flipped, b)] += -coupling * h;
        }
    }
    Ok(m)
}

/// Ground state with its energy and the gap to the next level of the same parity sector.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: PureState,
    pub energy: f64,
    pub gap: f64,
}

pub const DEGENERACY_TOL: f64 = 1e-10;

/// Ground state of the transverse-field Ising chain.
///
/// The Hamiltonian commutes with `∏σx` and its ground state sits in the even
/// sector, which is diagonalized on its own so the near-degenerate odd level
/// at small `h` cannot contaminate the result.
pub fn ising_ground(n: usize, h: f64, coupling: f64) -> Result<GroundState> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("field h = {h} must be positive")));
    }
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::InvalidArgument("coupling must be positive".into()));
    }
    let full = ising_hamiltonian(n, h, coupling)?;
    let d = 1usize << n;
    let half = d / 2;
    let mask = d - 1;
    // even-sector basis: (|b> + |b̄>)/√2 with the top bit of b clear
    let mut sector = DMatrix::<f64>::zeros(half, half);
    for i in 0..half {
        let ic = i ^ mask;
        for j in 0..half {
            let jc = j ^ mask;
            sector[(i, j)] =
                0.5 * (full[(i, j)] + full[(i, jc)] + full[(ic, j)] + full[(ic, jc)]);
        }
    }
    let (values, vectors) = linalg::symmetric_eig(&sector)?;
    let gap = values[1] - values[0];
    if gap < DEGENERACY_TOL {
        return Err(Error::Degenerate(format!(
            "Ising ground space is degenerate (gap {gap:e}) at n = {n}, h = {h}"
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amp = DVector::<f64>::zeros(d);
    for i in 0..half {
        amp[i] = s * vectors[(i, 0)];
        amp[i ^ mask] = s * vectors[(i, 0)];
    }
    if amp.sum() < 0.0 {
        amp = -amp;
    }
    let energy = values[0];
    let residual = (&full * &amp - &amp * energy).norm();
    if residual > 1e-9 {
        return Err(Error::Degenerate(format!(
            "Ising eigen-residual {residual:e} exceeds 1e-9"
        )));
    }
    let state = PureState::normalized(amp.map(|x| c(x, 0.0)))?;
    Ok(GroundState { state, energy, gap })
}

pub fn ising_ground_state(n: usize, h: f64, coupling: f64) -> Result<PureState> {
    Ok(ising_ground(n, h, coupling)?.state)
}

/// Random pure two-qubit state `(U_A ⊗ U_B)|Φ⁺_N>` with Haar local unitaries.
pub fn random_pure_with_negativity(n: f64, rng: &mut Rng) -> Result<PureState> {
    let base = bell_state_from_negativity(n)?;
    let local = haar_unitary(2, rng).kronecker(&haar_unitary(2, rng));
    PureState::normalized(local * base.amplitudes())
}

/// One entry of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    pub state: DensityOperator,
    pub label: f64,
    pub family_tag: FamilyTag,
    /// State vector when the stored state is known to be pure.
    pub pure: Option<PureState>,
}

/// Per-bin target counts: `total/bins`, remainder spread over the first bins.
pub fn bin_counts(total: usize, bins: usize) -> Vec<usize> {
    (0..bins)
        .map(|k| total / bins + usize::from(k < total % bins))
        .collect()
}

fn bin_of(value: f64, bins: usize) -> usize {
    ((value * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

/// Settings for the negativity-binned mixed-state sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedSampling {
    /// Ginibre draws attempted before the fallback kicks in.
    pub max_draws: usize,
    /// Populate remaining bins by mixing pure entangled states with Ginibre noise.
    pub fallback: bool,
}

impl Default for MixedSampling {
    fn default() -> Self {
        Self {
            max_draws: 200_000,
            fallback: true,
        }
    }
}

/// `count` random mixed two-qubit states whose negativities fill `bins` equal bins on [0, 1].
pub fn sample_mixed_by_negativity(
    count: usize,
    bins: usize,
    settings: MixedSampling,
    rng: &mut Rng,
) -> Result<Vec<LabeledState>> {
    if bins == 0 || count < bins {
        return Err(Error::InvalidArgument(format!(
            "need count >= bins >= 1, got count = {count}, bins = {bins}"
        )));
    }
    let targets = bin_counts(count, bins);
    let mut filled: Vec<Vec<LabeledState>> = vec![Vec::new(); bins];
    let mut draws = 0;
    while draws < settings.max_draws && filled.iter().zip(&targets).any(|(f, &t)| f.len() < t) {
        draws += 1;
        let rho = random_mixed_two_qubit(rng);
        let n = negativity(&rho)?;
        let k = bin_of(n, bins);
        if filled[k].len() < targets[k] {
            filled[k].push(LabeledState {
                state: rho,
                label: n,
                family_tag: FamilyTag::RandomMixed,
                pure: None,
            });
        }
    }
    for k in 0..bins {
        while filled[k].len() < targets[k] {
            if !settings.fallback {
                return Err(Error::SamplingExhausted { bin: k, draws });
            }
            let low = k as f64 / bins as f64;
            let high = (k + 1) as f64 / bins as f64;
            let target = uniform(rng, low, high);
            let rho = mixed_with_negativity(target, rng)?;
            let n = negativity(&rho)?;
            filled[k].push(LabeledState {
                state: rho,
                label: n,
                family_tag: FamilyTag::RandomMixed,
                pure: None,
            });
        }
    }
    Ok(interleave_bins(filled, rng))
}

/// Mix of a random entangled pure state with a Ginibre state tuned to negativity `target`.
fn mixed_with_negativity(target: f64, rng: &mut Rng) -> Result<DensityOperator> {
    let n0 = uniform(rng, target.max(0.0), 1.0).max(target);
    let psi = random_pure_with_negativity(n0, rng)?.density();
    let mut noise = random_mixed_two_qubit(rng);
    let mix = |t: f64, noise: &DensityOperator| {
        DensityOperator::new_unchecked(psi.matrix().scale(1.0 - t) + noise.matrix().scale(t))
    };
    if negativity(&mix(1.0, &noise))? > target {
        noise = DensityOperator::maximally_mixed(2);
    }
    // negativity decreases from n0 at t = 0 to below target at t = 1
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if negativity(&mix(mid, &noise))? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    DensityOperator::new(mix(0.5 * (lo + hi), &noise).into_matrix())
}

fn interleave_bins(filled: Vec<Vec<LabeledState>>, rng: &mut Rng) -> Vec<LabeledState> {
    use rand::seq::SliceRandom;
    let mut all: Vec<LabeledState> = filled.into_iter().flatten().collect();
    all.shuffle(rng);
    all
}

/// How labels (and, for random families, states) are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// Explicit labels.
    Labels { labels: Vec<f64> },
    /// Cell midpoints of an equispaced grid over the label range.
    Grid { count: usize },
    /// Equispaced grid including both endpoints.
    Linspace { count: usize },
    /// Independent uniform labels.
    Uniform { count: usize },
    /// Bell family: `p` uniform on [0, 1], state `√p|00> + √(1−p)|11>`, label `N(p)`.
    BellUniformP { count: usize },
    /// Isotropic family: `q` uniform on (1/3, 1], label `N(q)`.
    IsotropicUniformQ { count: usize },
    /// Random two-qubit states whose (transformed) labels are spread evenly over `bins` bins.
    Binned { count: usize, bins: usize },
}

impl Sampler {
    pub fn count(&self) -> usize {
        match self {
            Sampler::Labels { labels } => labels.len(),
            Sampler::Grid { count }
            | Sampler::Linspace { count }
            | Sampler::Uniform { count }
            | Sampler::BellUniformP { count }
            | Sampler::IsotropicUniformQ { count }
            | Sampler::Binned { count, .. } => *count,
        }
    }
}

/// Generator configuration for a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub family: Family,
    pub sampler: Sampler,
    pub copies: usize,
    /// Labels are stored as `label^label_power` (1 or 2).
    pub label_power: u32,
    pub seed: u64,
}

impl DatasetConfig {
    pub fn new(family: Family, sampler: Sampler) -> Self {
        Self {
            family,
            sampler,
            copies: 1,
            label_power: 1,
            seed: 0,
        }
    }

    pub fn copies(mut self, copies: usize) -> Self {
        self.copies = copies;
        self
    }

    pub fn label_power(mut self, power: u32) -> Self {
        self.label_power = power;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// An ordered list of labeled states plus the metadata that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub entries: Vec<LabeledState>,
    pub copies: usize,
    pub label_range: (f64, f64),
    pub label_power: u32,
    pub seed: u64,
    pub family: Family,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Qubits of the stored (tensor-power) states.
    pub fn n_qubits(&self) -> usize {
        self.entries[0].state.n_qubits()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidArgument("training set is empty".into()));
        }
        if self.copies == 0 {
            return Err(Error::InvalidArgument("copies must be >= 1".into()));
        }
        if !matches!(self.label_power, 1 | 2) {
            return Err(Error::InvalidArgument("label power must be 1 or 2".into()));
        }
        let (a, b) = self.label_range;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidArgument(format!("label range [{a}, {b}] is empty")));
        }
        let n = self.n_qubits();
        for e in &self.entries {
            if e.state.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: 1 << n,
                    found: e.state.dim(),
                });
            }
            let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
            if !(e.label.is_finite() && e.label >= a - tol && e.label <= b + tol) {
                return Err(Error::OutOfRange {
                    name: "label",
                    value: e.label,
                    low: a,
                    high: b,
                });
            }
        }
        if n % self.copies != 0 {
            return Err(Error::InvalidArgument(format!(
                "{n} qubits cannot hold {} copies",
                self.copies
            )));
        }
        Ok(())
    }
}

fn transformed_range(range: (f64, f64), power: u32) -> (f64, f64) {
    let (a, b) = range;
    if power == 1 {
        (a, b)
    } else {
        let (pa, pb) = (a.powi(power as i32), b.powi(power as i32));
        if a <= 0.0 && b >= 0.0 {
            (0.0, pa.max(pb))
        } else {
            (pa.min(pb), pa.max(pb))
        }
    }
}

fn make_entry(
    family: &Family,
    state: DensityOperator,
    pure: Option<PureState>,
    raw_label: f64,
    copies: usize,
    power: u32,
) -> LabeledState {
    let (state, pure) = if copies > 1 {
        let pure = pure.map(|p| {
            let mut out = p.clone();
            for _ in 1..copies {
                out = out.tensor(&p);
            }
            out
        });
        (state.tensor_power(copies), pure)
    } else {
        (state, pure)
    };
    LabeledState {
        state,
        label: raw_label.powi(power as i32),
        family_tag: family.tag(),
        pure,
    }
}

/// Builds a training set from explicit labels of a deterministic family.
pub fn build_training_set(family: &Family, labels: &[f64], copies: usize) -> Result<TrainingSet> {
    generate(&DatasetConfig::new(family.clone(), Sampler::Labels { labels: labels.to_vec() }).copies(copies))
}

/// Runs a dataset generator. Entry `j` draws from its own derived random stream.
pub fn generate(config: &DatasetConfig) -> Result<TrainingSet> {
    let family = &config.family;
    family.validate()?;
    if config.copies == 0 {
        return Err(Error::InvalidArgument("copies must be >= 1".into()));
    }
    if family.n_qubits() * config.copies > 8 {
        return Err(Error::InvalidArgument(format!(
            "{} copies of a {}-qubit state exceed 8 qubits",
            config.copies,
            family.n_qubits()
        )));
    }
    if !matches!(config.label_power, 1 | 2) {
        return Err(Error::InvalidArgument("label power must be 1 or 2".into()));
    }
    let count = config.sampler.count();
    if count == 0 {
        return Err(Error::InvalidArgument("sampler produces no entries".into()));
    }
    let (a, b) = family.label_range();
    let power = config.label_power;
    let copies = config.copies;
    let deterministic = |labels: Vec<f64>| -> Result<Vec<LabeledState>> {
        labels
            .into_iter()
            .map(|l| {
                let state = family.state(l)?;
                let pure = family.pure_state(l)?;
                Ok(make_entry(family, state, pure, l, copies, power))
            })
            .collect()
    };
    let entries = match &config.sampler {
        Sampler::Labels { labels } => deterministic(labels.clone())?,
        Sampler::Grid { count } => deterministic(
            (0..*count)
                .map(|j| a + (b - a) * (j as f64 + 0.5) / *count as f64)
                .collect(),
        )?,
        Sampler::Linspace { count } => deterministic(
            (0..*count)
                .map(|j| {
                    if *count == 1 {
                        0.5 * (a + b)
                    } else {
                        a + (b - a) * j as f64 / (*count - 1) as f64
                    }
                })
                .collect(),
        )?,
        Sampler::Uniform { count } => deterministic(
            (0..*count)
                .map(|j| uniform(&mut rng::stream(config.seed, j as u64), a, b))
                .collect(),
        )?,
        Sampler::BellUniformP { count } => {
            if *family != Family::BellType {
                return Err(Error::InvalidArgument("BellUniformP needs the Bell family".into()));
            }
            (0..*count)
                .map(|j| {
                    let p = uniform(&mut rng::stream(config.seed, j as u64), 0.0, 1.0);
                    let psi = bell_state(p)?;
                    Ok(make_entry(family, psi.density(), Some(psi), bell_negativity(p), copies, power))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Sampler::IsotropicUniformQ { count } => {
            if *family != Family::Isotropic {
                return Err(Error::InvalidArgument(
                    "IsotropicUniformQ needs the isotropic family".into(),
                ));
            }
            (0..*count)
                .map(|j| {
                    // (1/3, 1]
                    let u = uniform(&mut rng::stream(config.seed, j as u64), 0.0, 1.0);
                    let q = 1.0 - (2.0 / 3.0) * u;
                    Ok(make_entry(family, isotropic_state(q)?, None, isotropic_negativity(q), copies, power))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Sampler::Binned { count, bins } => {
            if *bins == 0 || count < bins {
                return Err(Error::InvalidArgument(format!(
                    "need count >= bins >= 1, got count = {count}, bins = {bins}"
                )));
            }
            match family {
                Family::RandomPure => {
                    let targets = bin_counts(*count, *bins);
                    let mut out = Vec::with_capacity(*count);
                    let mut j = 0u64;
                    for (k, &t) in targets.iter().enumerate() {
                        for _ in 0..t {
                            let mut r = rng::stream(config.seed, j);
                            j += 1;
                            let lo = k as f64 / *bins as f64;
                            let hi = (k + 1) as f64 / *bins as f64;
                            let target = uniform(&mut r, lo, hi);
                            let n = target.powf(1.0 / power as f64);
                            let psi = random_pure_with_negativity(n, &mut r)?;
                            let label_n = negativity(&psi.density())?;
                            out.push(make_entry(family, psi.density(), Some(psi), label_n, copies, power));
                        }
                    }
                    let mut r = rng::stream(config.seed, u64::MAX);
                    use rand::seq::SliceRandom;
                    out.shuffle(&mut r);
                    out
                }
                Family::RandomMixed => {
                    if power != 1 {
                        return Err(Error::InvalidArgument(
                            "binned mixed sampling supports label power 1 only".into(),
                        ));
                    }
                    let mut r = rng::rng_from_seed(config.seed);
                    sample_mixed_by_negativity(*count, *bins, MixedSampling::default(), &mut r)?
                        .into_iter()
                        .map(|e| make_entry(family, e.state, None, e.label, copies, 1))
                        .collect()
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "binned sampling applies to random two-qubit families".into(),
                    ))
                }
            }
        }
    };
    let set = TrainingSet {
        entries,
        copies,
        label_range: transformed_range((a, b), power),
        label_power: power,
        seed: config.seed,
        family: family.clone(),
    };
    set.validate()?;
    Ok(set)
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    schema_version: u32,
    family: Family,
    n_qubits: usize,
    copies_c: usize,
    label_range: [f64; 2],
    #[serde(default = "one")]
    label_power: u32,
    seed: u64,
    entries: Vec<EntryFile>,
}

fn one() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    label: f64,
    state: Vec<Vec<[f64; 2]>>,
}

pub(crate) fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Format("state matrix must be square and nonempty".into()));
    }
    if d > 1 << ISING_MAX_QUBITS {
        return Err(Error::Format(format!("state dimension {d} exceeds 256")));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        let [re, im] = rows[i][j];
        C64::new(re, im)
    }))
}

impl TrainingSet {
    pub fn to_json(&self) -> Result<String> {
        let file = DatasetFile {
            schema_version: SCHEMA_VERSION,
            family: self.family.clone(),
            n_qubits: self.n_qubits(),
            copies_c: self.copies,
            label_range: [self.label_range.0, self.label_range.1],
            label_power: self.label_power,
            seed: self.seed,
            entries: self
                .entries
                .iter()
                .map(|e| EntryFile {
                    label: e.label,
                    state: matrix_to_rows(e.state.matrix()),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    /// Parses and fully validates a dataset file.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema version {}",
                file.schema_version
            )));
        }
        file.family.validate()?;
        if file.n_qubits == 0 || file.n_qubits > ISING_MAX_QUBITS {
            return Err(Error::Format(format!("n_qubits {} out of range", file.n_qubits)));
        }
        let tag = file.family.tag();
        let mut entries = Vec::with_capacity(file.entries.len());
        for e in &file.entries {
            let m = rows_to_matrix(&e.state)?;
            if m.nrows() != 1 << file.n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: 1 << file.n_qubits,
                    found: m.nrows(),
                });
            }
            let state = DensityOperator::new(m)?;
            let pure = if state::purity(&state) > 1.0 - 1e-10 {
                let eig = state.eigen()?;
                let v = eig.eigenvectors.column(eig.eigenvalues.len() - 1).into_owned();
                PureState::normalized(v).ok()
            } else {
                None
            };
            entries.push(LabeledState {
                state,
                label: e.label,
                family_tag: tag,
                pure,
            });
        }
        let set = TrainingSet {
            entries,
            copies: file.copies_c,
            label_range: (file.label_range[0], file.label_range[1]),
            label_power: file.label_power,
            seed: file.seed,
            family: file.family,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json(text)
    }
}
