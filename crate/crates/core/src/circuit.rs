use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::gate::{Gate, GateKind};
use crate::state::StateVector;

/// Ordered gate list on a fixed register. Every gate is validated on insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > crate::state::MAX_QUBITS {
            return Err(SimError::InvalidRegisterSize { got: num_qubits, max: crate::state::MAX_QUBITS });
        }
        Ok(Self { num_qubits, gates: Vec::new() })
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Self::new(num_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    /// Appends `other` with its qubit `q` mapped to `q + offset`.
    pub fn append_shifted(&mut self, other: &Circuit, offset: usize) -> Result<()> {
        self.extend(other.gates.iter().map(|g| g.shifted(offset)))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(Gate::is_native)
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    /// Number of multi-qubit gates (XX, CNOT, Swap, CSwap, Rzz).
    pub fn entangling_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_entangling()).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.len() - self.entangling_count()
    }

    /// Greedy as-soon-as-possible partition into layers of gates on disjoint
    /// qubits. Returns gate indices per layer; relative order on any qubit is kept.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        layer_assignment(self, |_| true)
    }

    /// Parallel depth: number of ASAP layers, with Rz treated as free.
    pub fn parallel_depth(&self) -> usize {
        layer_assignment(self, |g| g.kind() != GateKind::Rz).len()
    }

    /// Runs the circuit on `state` in place.
    pub fn apply_to(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(SimError::DimensionMismatch { expected: self.num_qubits, got: state.num_qubits() });
        }
        state.apply_all(&self.gates)
    }

    /// Final state when started from `|0…0⟩`.
    pub fn run(&self) -> Result<StateVector> {
        let mut s = StateVector::zero(self.num_qubits)?;
        self.apply_to(&mut s)?;
        Ok(s)
    }

    /// Dense unitary, column `j` being the image of basis state `j`.
    pub fn unitary(&self) -> Result<DMatrix<Complex64>> {
        let dim = 1usize << self.num_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = StateVector::basis(self.num_qubits, col)?;
            for g in &self.gates {
                s.apply_unchecked(g);
            }
            for (row, a) in s.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }
}

fn layer_assignment(circuit: &Circuit, counts: impl Fn(&Gate) -> bool) -> Vec<Vec<usize>> {
    // frontier[q] = number of layers already occupied on qubit q
    let mut frontier = vec![0usize; circuit.num_qubits];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (idx, gate) in circuit.gates.iter().enumerate() {
        if !counts(gate) {
            continue;
        }
        let qubits = gate.qubits();
        let layer = qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(idx);
        for q in qubits {
            frontier[q] = layer + 1;
        }
    }
    layers
}

/// Free-function form of [`Circuit::parallel_depth`].
pub fn parallel_depth(circuit: &Circuit) -> usize {
    circuit.parallel_depth()
}
