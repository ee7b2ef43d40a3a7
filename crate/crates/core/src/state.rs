//! Dense state-vector engine.
//!
//! Basis index `b` reads qubit 0 as the most significant bit, so on a
//! 5-qubit register the ancilla (qubit 0) carries weight 16.

use std::str::FromStr;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::shots::ShotRecord;

pub const MAX_QUBITS: usize = 20;
/// Allowed deviation of the norm from 1 before a gate application is rejected.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(SimError::DimensionMismatch { expected: dim, got: index });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(SimError::DimensionMismatch { expected: dim.next_power_of_two().max(2), got: dim });
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_size(num_qubits)?;
        let state = Self { num_qubits, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NormDrift { norm });
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(SimError::InvalidParameter("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    /// Kronecker product `self ⊗ other`; `self` occupies the low qubit indices.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_size(num_qubits)?;
        let mut amplitudes = Vec::with_capacity(1 << num_qubits);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn overlap_sqr(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies `gate` in place. The norm is checked afterwards and never rescaled.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.apply_unchecked(gate);
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NormDrift { norm });
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    /// Applies without index or norm checks. Callers validate the gate first.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        let qubits = gate.qubits();
        let matrix = gate.local_matrix();
        self.apply_local(&qubits, &matrix);
    }

    /// Applies a row-major `2^k × 2^k` matrix on `qubits` (first = local MSB).
    pub(crate) fn apply_local(&mut self, qubits: &[usize], matrix: &[Complex64]) {
        let n = self.num_qubits;
        let k = qubits.len();
        let d = 1usize << k;
        debug_assert_eq!(matrix.len(), d * d);
        let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
        let gate_mask: usize = masks.iter().sum();
        let offsets: Vec<usize> =
            (0..d).map(|local| (0..k).filter(|&j| local & (1 << (k - 1 - j)) != 0).map(|j| masks[j]).sum()).collect();
        let mut gathered = vec![Complex64::new(0.0, 0.0); d];
        for base in 0..self.amplitudes.len() {
            if base & gate_mask != 0 {
                continue;
            }
            for (slot, &off) in gathered.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, g) in gathered.iter().enumerate() {
                    acc += matrix[row * d + col] * g;
                }
                self.amplitudes[base | off] = acc;
            }
        }
    }

    /// Returns `U_gate · state`, leaving the input untouched.
    pub fn with_gate(&self, gate: &Gate) -> Result<StateVector> {
        let mut next = self.clone();
        next.apply(gate)?;
        Ok(next)
    }

    /// `|amplitude|²` per basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multinomial draw of `n_shots` outcomes, reproducible for a fixed seed.
    pub fn sample_shots(&self, n_shots: u64, seed: u64) -> Result<ShotRecord> {
        if n_shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = WeightedIndex::new(self.probabilities())
            .map_err(|e| SimError::InvalidParameter(format!("cannot sample state: {e}")))?;
        let mut counts = vec![0u64; self.dim()];
        for _ in 0..n_shots {
            counts[dist.sample(&mut rng)] += 1;
        }
        ShotRecord::from_dense_counts(self.num_qubits, &counts)
    }

    /// `⟨state|P|state⟩` for a Pauli string with one label per qubit.
    pub fn expectation_pauli(&self, pauli: &PauliString) -> Result<f64> {
        if pauli.len() != self.num_qubits {
            return Err(SimError::MalformedPauli(format!(
                "label {pauli} has length {} but the register has {} qubits",
                pauli.len(),
                self.num_qubits
            )));
        }
        let mut image = self.clone();
        for (q, p) in pauli.0.iter().enumerate() {
            if let Some(m) = p.matrix() {
                image.apply_local(&[q], &m);
            }
        }
        let value = self.inner(&image)?;
        debug_assert!(value.im.abs() < 1e-10);
        Ok(value.re)
    }
}

fn check_size(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(SimError::InvalidRegisterSize { got: num_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

/// Applies `gate` to a copy of `state`.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    state.with_gate(gate)
}

pub fn probabilities(state: &StateVector) -> Vec<f64> {
    state.probabilities()
}

pub fn sample_shots(state: &StateVector, n_shots: u64, seed: u64) -> Result<ShotRecord> {
    state.sample_shots(n_shots, seed)
}

pub fn expectation_pauli(state: &StateVector, label: &str) -> Result<f64> {
    state.expectation_pauli(&label.parse()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> Option<[Complex64; 4]> {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        match self {
            Pauli::I => None,
            Pauli::X => Some([o, l, l, o]),
            Pauli::Y => Some([o, -i, i, o]),
            Pauli::Z => Some([l, o, o, -l]),
        }
    }

    pub fn from_index(i: usize) -> Pauli {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i % 4]
    }

    /// Applies this Pauli to `qubit` of `state`.
    pub(crate) fn act(self, state: &mut StateVector, qubit: usize) {
        if let Some(m) = self.matrix() {
            state.apply_local(&[qubit], &m);
        }
    }
}

/// Per-qubit Pauli labels, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for PauliString {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(SimError::MalformedPauli("empty label".into()));
        }
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(SimError::MalformedPauli(format!("unexpected character {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for p in &self.0 {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}
