//! Parametrized circuits `U(θ)`.
//!
//! Gates follow `R_i(θ) = e^{−iθσ_i}` (no half angle). The hardware-efficient
//! ansatz has a zeroth layer of `(Rx, Rz)` on every qubit and then `layers`
//! blocks of a CRy cascade `i → i+1` followed by `(Rx, Rz)` on every qubit.
//!
//! Parameter layout, per layer: `Rx, Rz` for qubit 0, then qubit 1, ...,
//! then the CRy angles in cascade order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Hea,
    Qcnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    /// Entangling layers for HEA; ignored by QCNN.
    pub layers: usize,
}

pub const MAX_ANSATZ_QUBITS: usize = 10;

impl AnsatzSpec {
    pub fn hea(n_qubits: usize, layers: usize) -> Self {
        Self {
            kind: AnsatzKind::Hea,
            n_qubits,
            layers,
        }
    }

    pub fn qcnn(n_qubits: usize) -> Self {
        Self {
            kind: AnsatzKind::Qcnn,
            n_qubits,
            layers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_ANSATZ_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "ansatz needs 1..={MAX_ANSATZ_QUBITS} qubits, got {}",
                self.n_qubits
            )));
        }
        if self.layers > 1000 {
            return Err(Error::InvalidArgument("too many layers".into()));
        }
        if self.kind == AnsatzKind::Qcnn && (self.n_qubits < 2 || !self.n_qubits.is_power_of_two()) {
            return Err(Error::InvalidArgument(format!(
                "QCNN needs a power-of-two qubit count >= 2, got {}",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        let n = self.n_qubits;
        match self.kind {
            AnsatzKind::Hea => 3 * self.layers * n - self.layers + 2 * n,
            AnsatzKind::Qcnn => 9 * qcnn_cells(n).len(),
        }
    }

    pub fn circuit(&self) -> Result<Circuit> {
        self.validate()?;
        Ok(match self.kind {
            AnsatzKind::Hea => hea_circuit(self.n_qubits, self.layers),
            AnsatzKind::Qcnn => qcnn_circuit(self.n_qubits),
        })
    }
}

pub fn param_count(spec: &AnsatzSpec) -> usize {
    spec.param_count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Rz,
    Cry { control: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub param: usize,
}

/// A gate sequence with parameter bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub n_params: usize,
}

fn single_qubit_matrix(kind: GateKind, theta: f64) -> [C64; 4] {
    let (s, co) = theta.sin_cos();
    match kind {
        GateKind::Rx => [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)],
        GateKind::Rz => [c(co, -s), ZERO, ZERO, c(co, s)],
        GateKind::Cry { .. } => [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)],
    }
}

pub fn gate_rx(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &single_qubit_matrix(GateKind::Rx, theta))
}

pub fn gate_rz(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &single_qubit_matrix(GateKind::Rz, theta))
}

pub fn gate_ry(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &single_qubit_matrix(GateKind::Cry { control: 0 }, theta))
}

/// Controlled `R_y(θ)` with the control on the first (most significant) qubit.
pub fn gate_cry(theta: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4, 4);
    let ry = gate_ry(theta);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = ry[(i, j)];
        }
    }
    m
}

impl Circuit {
    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::DimensionMismatch {
                expected: self.n_params,
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// Applies `U(θ)` in place to every column of `states` (dimension `2^n × r`).
    pub fn apply(&self, theta: &[f64], states: &mut ComplexMatrix) -> Result<()> {
        self.check_theta(theta)?;
        let d = 1usize << self.n_qubits;
        if states.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: states.nrows(),
            });
        }
        for gate in &self.gates {
            self.apply_gate(gate, theta[gate.param], states.as_mut_slice(), d);
        }
        Ok(())
    }

    /// Applies one gate with an explicit angle to column-major data of height `d`.
    pub(crate) fn apply_gate(&self, gate: &Gate, angle: f64, data: &mut [C64], d: usize) {
        let n = self.n_qubits;
        let g = single_qubit_matrix(gate.kind, angle);
        let stride = 1usize << (n - 1 - gate.target);
        let control_mask = match gate.kind {
            GateKind::Cry { control } => 1usize << (n - 1 - control),
            _ => 0,
        };
        for col in data.chunks_exact_mut(d) {
            let mut base = 0;
            while base < d {
                for i in base..base + stride {
                    if i & control_mask != control_mask {
                        continue;
                    }
                    let a = col[i];
                    let b = col[i + stride];
                    col[i] = g[0] * a + g[1] * b;
                    col[i + stride] = g[2] * a + g[3] * b;
                }
                base += 2 * stride;
            }
        }
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        let d = 1usize << self.n_qubits;
        let mut u = ComplexMatrix::identity(d, d);
        self.apply(theta, &mut u)?;
        Ok(u)
    }
}

fn hea_circuit(n: usize, layers: usize) -> Circuit {
    let mut gates = Vec::new();
    let mut p = 0;
    let rotations = |gates: &mut Vec<Gate>, p: &mut usize| {
        for q in 0..n {
            gates.push(Gate {
                kind: GateKind::Rx,
                target: q,
                param: *p,
            });
            gates.push(Gate {
                kind: GateKind::Rz,
                target: q,
                param: *p + 1,
            });
            *p += 2;
        }
    };
    rotations(&mut gates, &mut p);
    for _ in 0..layers {
        // CRy angles are stored after this layer's rotation pairs
        let cry_base = p + 2 * n;
        for i in 0..n.saturating_sub(1) {
            gates.push(Gate {
                kind: GateKind::Cry { control: i },
                target: i + 1,
                param: cry_base + i,
            });
        }
        rotations(&mut gates, &mut p);
        p += n.saturating_sub(1);
    }
    Circuit {
        n_qubits: n,
        gates,
        n_params: p,
    }
}

/// Two-qubit cells `(a, b)` of the convolutional ansatz, in application order.
///
/// Stage 1 pairs neighbours `(0,1), (2,3), ...`; every later stage acts on the
/// surviving qubits (the second of each pair) with a pairing cell on
/// `(s0,s1), (s2,s3), ...` and a shifted cell on `(s1,s2), ..., (s_{r-1}, s0)`.
/// The final survivor is the last qubit.
pub fn qcnn_cells(n: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut stage = 0;
    while survivors.len() >= 2 {
        let r = survivors.len();
        for i in 0..r / 2 {
            cells.push((survivors[2 * i], survivors[2 * i + 1]));
        }
        if stage > 0 {
            for i in 0..r / 2 {
                cells.push((survivors[2 * i + 1], survivors[(2 * i + 2) % r]));
            }
        }
        survivors = survivors.iter().skip(1).step_by(2).cloned().collect();
        stage += 1;
    }
    cells
}

/// Number of stages, `log₂ n`.
pub fn qcnn_stages(n: usize) -> usize {
    n.trailing_zeros() as usize
}

fn qcnn_circuit(n: usize) -> Circuit {
    let mut gates = Vec::new();
    let mut p = 0;
    for (a, b) in qcnn_cells(n) {
        let rot = |gates: &mut Vec<Gate>, p: &mut usize| {
            for q in [a, b] {
                gates.push(Gate {
                    kind: GateKind::Rx,
                    target: q,
                    param: *p,
                });
                gates.push(Gate {
                    kind: GateKind::Rz,
                    target: q,
                    param: *p + 1,
                });
                *p += 2;
            }
        };
        rot(&mut gates, &mut p);
        gates.push(Gate {
            kind: GateKind::Cry { control: a },
            target: b,
            param: p,
        });
        p += 1;
        rot(&mut gates, &mut p);
    }
    Circuit {
        n_qubits: n,
        gates,
        n_params: p,
    }
}

pub fn build_unitary(spec: &AnsatzSpec, theta: &[f64]) -> Result<ComplexMatrix> {
    spec.circuit()?.unitary(theta)
}

pub fn build_qcnn_unitary(spec: &AnsatzSpec, theta: &[f64]) -> Result<ComplexMatrix> {
    if spec.kind != AnsatzKind::Qcnn {
        return Err(Error::InvalidArgument("spec is not a QCNN".into()));
    }
    build_unitary(spec, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, identity, pauli_x};

    #[test]
    fn counts() {
        assert_eq!(AnsatzSpec::hea(4, 2).param_count(), 30);
        assert_eq!(AnsatzSpec::hea(3, 0).param_count(), 6);
        assert_eq!(AnsatzSpec::hea(8, 5).param_count(), 131);
        assert_eq!(AnsatzSpec::qcnn(8).param_count(), 90);
        assert_eq!(qcnn_stages(8), 3);
        for spec in [AnsatzSpec::hea(4, 2), AnsatzSpec::hea(1, 3), AnsatzSpec::qcnn(8)] {
            assert_eq!(spec.circuit().unwrap().n_params, spec.param_count());
        }
    }

    #[test]
    fn single_qubit_example() {
        let u = build_unitary(&AnsatzSpec::hea(1, 0), &[std::f64::consts::FRAC_PI_4, 0.0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = identity(2).scale(s) - pauli_x() * c(0.0, s);
        assert!(frobenius_norm(&(u - expected)) < 1e-15);
    }

    #[test]
    fn cry_matches_dense_gate() {
        let circuit = Circuit {
            n_qubits: 2,
            gates: vec![Gate {
                kind: GateKind::Cry { control: 0 },
                target: 1,
                param: 0,
            }],
            n_params: 1,
        };
        let u = circuit.unitary(&[0.37]).unwrap();
        assert!(frobenius_norm(&(u - gate_cry(0.37))) < 1e-15);
    }

    #[test]
    fn every_parameter_is_used_once() {
        for spec in [AnsatzSpec::hea(3, 2), AnsatzSpec::qcnn(4)] {
            let c = spec.circuit().unwrap();
            let mut seen = vec![0; c.n_params];
            for g in &c.gates {
                seen[g.param] += 1;
            }
            assert!(seen.iter().all(|&k| k == 1));
        }
    }

    #[test]
    fn qcnn_last_survivor_is_last_qubit() {
        let cells = qcnn_cells(8);
        assert_eq!(cells.len(), 10);
        assert_eq!(cells.last().unwrap().0.max(cells.last().unwrap().1), 7);
    }
}
