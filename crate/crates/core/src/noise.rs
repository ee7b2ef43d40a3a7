//! Stochastic Pauli gate noise and readout (SPAM) error models, plus
//! inverse-confusion-matrix readout correction.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Result, SimError};
use crate::gate::{Gate, GateKind};
use crate::shots::ShotRecord;
use crate::state::{Pauli, StateVector};

/// Default depolarizing probability per single-qubit native gate (99.1% fidelity).
pub const DEFAULT_P1: f64 = 0.009;
/// Default depolarizing probability per XX gate (98.5% fidelity).
pub const DEFAULT_P2: f64 = 0.015;
/// Default single-qubit readout fidelity.
pub const DEFAULT_DETECTION_FIDELITY: f64 = 0.994;

/// Depolarizing trajectory noise on native gates. After each R gate a random
/// non-identity Pauli hits its qubit with probability `p1`; after each XX gate
/// a random non-identity two-qubit Pauli hits its pair with probability `p2`.
/// Rz gates are phase advances and stay noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { p1: DEFAULT_P1, p2: DEFAULT_P2, seed: 0 }
    }
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, seed: u64) -> Result<Self> {
        let m = Self { p1, p2, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless(seed: u64) -> Self {
        Self { p1: 0.0, p2: 0.0, seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidParameter(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        Ok(())
    }

    fn error_probability(&self, gate: &Gate) -> f64 {
        match gate.kind() {
            GateKind::Rz => 0.0,
            _ if gate.is_entangling() => self.p2,
            _ => self.p1,
        }
    }
}

/// Per-shot generator: stream `shot` of the master seed, independent of
/// execution order.
fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Independent child seed for sub-run `stream` of a master seed (one per
/// grid point, basis or input), stable under reordering.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    shot_rng(seed, stream).gen()
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the accumulated total; take the last populated outcome
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Runs `n_shots` noisy trajectories of a native circuit from `|0…0⟩` and
/// measures every qubit in the Z basis.
pub fn run_noisy(circuit: &Circuit, noise: &NoiseModel, n_shots: u64) -> Result<ShotRecord> {
    let initial = StateVector::zero(circuit.num_qubits())?;
    run_noisy_from(circuit, &initial, noise, n_shots)
}

/// As [`run_noisy`], starting from an arbitrary state.
pub fn run_noisy_from(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
    n_shots: u64,
) -> Result<ShotRecord> {
    noise.validate()?;
    if n_shots == 0 {
        return Err(SimError::ZeroShots);
    }
    if let Some(g) = circuit.gates().iter().find(|g| !g.is_native()) {
        return Err(SimError::NotNative(g.kind().name()));
    }
    let mut ideal = initial.clone();
    circuit.apply_to(&mut ideal)?;
    let ideal_probs = ideal.probabilities();
    let gates = circuit.gates();
    let error_probs: Vec<f64> = gates.iter().map(|g| noise.error_probability(g)).collect();

    let outcomes: Vec<usize> = (0..n_shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = shot_rng(noise.seed, shot);
            let mut faults: Vec<(usize, usize)> = Vec::new();
            for (idx, (&p, g)) in error_probs.iter().zip(gates).enumerate() {
                if p > 0.0 && rng.gen::<f64>() < p {
                    let orbit = (1usize << (2 * g.qubits().len())) - 1;
                    faults.push((idx, rng.gen_range(1..=orbit)));
                }
            }
            let u: f64 = rng.gen();
            if faults.is_empty() {
                return sample_index(&ideal_probs, u);
            }
            let mut state = initial.clone();
            let mut next = faults.iter().peekable();
            for (idx, g) in gates.iter().enumerate() {
                state.apply_unchecked(g);
                while let Some(&&(fidx, label)) = next.peek() {
                    if fidx != idx {
                        break;
                    }
                    // label enumerates the Pauli tensor with the first qubit in the high digit
                    let qubits = g.qubits();
                    for (j, &q) in qubits.iter().enumerate() {
                        let digit = (label >> (2 * (qubits.len() - 1 - j))) & 3;
                        Pauli::from_index(digit).act(&mut state, q);
                    }
                    next.next();
                }
            }
            sample_index(&state.probabilities(), u)
        })
        .collect();

    let mut counts = vec![0u64; 1 << circuit.num_qubits()];
    for o in outcomes {
        counts[o] += 1;
    }
    ShotRecord::from_dense_counts(circuit.num_qubits(), &counts)
}

/// Per-qubit readout confusion matrices, `matrix[r][s] = P(read r | true s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpamModel {
    matrices: Vec<[[f64; 2]; 2]>,
}

impl SpamModel {
    pub fn new(matrices: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        let m = Self { matrices };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::symmetric(num_qubits, 1.0)
    }

    /// Symmetric bit flips: every qubit reads correctly with probability `fidelity`.
    pub fn symmetric(num_qubits: usize, fidelity: f64) -> Self {
        let e = 1.0 - fidelity;
        Self { matrices: vec![[[fidelity, e], [e, fidelity]]; num_qubits] }
    }

    pub fn num_qubits(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[[[f64; 2]; 2]] {
        &self.matrices
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrices.is_empty() {
            return Err(SimError::EmptyInput("SPAM model has no qubits"));
        }
        for (q, m) in self.matrices.iter().enumerate() {
            for (top, bottom) in m[0].iter().zip(&m[1]) {
                if (top + bottom - 1.0).abs() > 1e-9 || *top < 0.0 || *bottom < 0.0 {
                    return Err(SimError::InvalidParameter(format!(
                        "confusion matrix of qubit {q} is not column-stochastic"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: SpamModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spam model serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Errors unless the model covers exactly `num_qubits` qubits.
    pub fn check_qubits(&self, num_qubits: usize) -> Result<()> {
        if num_qubits != self.num_qubits() {
            return Err(SimError::DimensionMismatch { expected: self.num_qubits(), got: num_qubits });
        }
        Ok(())
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        let expected = 1usize << self.num_qubits();
        if len != expected {
            return Err(SimError::DimensionMismatch { expected, got: len });
        }
        Ok(())
    }
}

/// Applies `m` on `qubit` of a vector over `num_qubits` bits (qubit 0 = MSB).
fn apply_factor(v: &mut [f64], num_qubits: usize, qubit: usize, m: &[[f64; 2]; 2]) {
    let mask = 1usize << (num_qubits - 1 - qubit);
    for i in 0..v.len() {
        if i & mask == 0 {
            let (a, b) = (v[i], v[i | mask]);
            v[i] = m[0][0] * a + m[0][1] * b;
            v[i | mask] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Multiplies a distribution by the tensor-product confusion matrix.
pub fn apply_spam(probs: &[f64], spam: &SpamModel) -> Result<Vec<f64>> {
    spam.check_dim(probs.len())?;
    let mut out = probs.to_vec();
    for (q, m) in spam.matrices.iter().enumerate() {
        apply_factor(&mut out, spam.num_qubits(), q, m);
    }
    Ok(out)
}

/// Flips each recorded bit according to the confusion matrices.
pub fn apply_spam_record(record: &ShotRecord, spam: &SpamModel, seed: u64) -> Result<ShotRecord> {
    spam.check_dim(1 << record.num_qubits())?;
    let n = record.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ShotRecord::new(n)?;
    for (outcome, count) in record.iter() {
        for _ in 0..count {
            let mut read = outcome;
            for (q, m) in spam.matrices.iter().enumerate() {
                let mask = 1usize << (n - 1 - q);
                let truth = usize::from(outcome & mask != 0);
                if rng.gen::<f64>() < m[1 - truth][truth] {
                    read ^= mask;
                }
            }
            out.add(read, 1)?;
        }
    }
    Ok(out)
}

fn inverse(m: &[[f64; 2]; 2], qubit: usize) -> Result<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-12 {
        return Err(SimError::SingularMatrix { qubit });
    }
    Ok([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// Multiplies by the inverse confusion matrix without clipping. The result
/// can leave the probability simplex.
pub fn invert_spam(probs: &[f64], spam: &SpamModel) -> Result<Vec<f64>> {
    spam.check_dim(probs.len())?;
    let mut out = probs.to_vec();
    for (q, m) in spam.matrices.iter().enumerate() {
        apply_factor(&mut out, spam.num_qubits(), q, &inverse(m, q)?);
    }
    Ok(out)
}

/// Readout correction of an averaged distribution: inverse confusion matrix,
/// negatives clipped to zero, then renormalized.
pub fn correct_spam(probs: &[f64], spam: &SpamModel) -> Result<Vec<f64>> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 || probs.iter().any(|&p| p < -1e-12) {
        return Err(SimError::NotADistribution { sum });
    }
    let mut out = invert_spam(probs, spam)?;
    out.iter_mut().for_each(|p| *p = p.max(0.0));
    let total: f64 = out.iter().sum();
    if total <= 0.0 {
        return Err(SimError::NotADistribution { sum: total });
    }
    out.iter_mut().for_each(|p| *p /= total);
    Ok(out)
}

/// Total-variation distance between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
