//! Swap-test measurement of the second Renyi purity `R2 = Tr(ρ_A²)` on two
//! copies of the prepared dimer, read out through an ancilla, with the
//! C-Swap symmetry filter used for post-selection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::adiabatic::{build_prep_circuit, TrotterSchedule};
use crate::circuit::Circuit;
use crate::compiler::{lower_gate, SignParams};
use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::noise::{derive_seed, run_noisy_from, NoiseModel};
use crate::shots::ShotRecord;
use crate::state::StateVector;

pub const SWAP_TEST_QUBITS: usize = 5;

/// Qubit assignment of the five-qubit register. The swapped subsystem is
/// `{a1, a2}`: the first qubit of each copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapTestLayout {
    pub ancilla: usize,
    pub a1: usize,
    pub b1: usize,
    pub a2: usize,
    pub b2: usize,
}

impl Default for SwapTestLayout {
    fn default() -> Self {
        Self::STANDARD
    }
}

impl SwapTestLayout {
    /// Ancilla on top (most significant bit), then copy 1 `(A1, B1)`, then copy 2 `(A2, B2)`.
    pub const STANDARD: SwapTestLayout = SwapTestLayout { ancilla: 0, a1: 1, b1: 2, a2: 3, b2: 4 };

    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; SWAP_TEST_QUBITS];
        for q in [self.ancilla, self.a1, self.b1, self.a2, self.b2] {
            if q >= SWAP_TEST_QUBITS {
                return Err(SimError::QubitOutOfRange { index: q, num_qubits: SWAP_TEST_QUBITS });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(SimError::DuplicateQubit { gate: "layout", index: q });
            }
        }
        Ok(())
    }

    fn bit(&self, outcome: usize, qubit: usize) -> bool {
        outcome >> (SWAP_TEST_QUBITS - 1 - qubit) & 1 == 1
    }
}

/// Outcomes that an ideal C-Swap test can never produce: ancilla reads 1 while
/// the two A bits agree or the two B bits agree. The `|1⟩` branch carries
/// `(1 − Swap_A)|Ψ⟩|Ψ⟩/2`, whose amplitude on `|a b a' b'⟩` is
/// `(c_ab c_a'b' − c_a'b c_ab')/2`, zero when `a = a'` or `b = b'`.
pub fn zero_weight_set(layout: &SwapTestLayout) -> Result<BTreeSet<usize>> {
    layout.validate()?;
    Ok((0..1usize << SWAP_TEST_QUBITS)
        .filter(|&o| {
            layout.bit(o, layout.ancilla)
                && (layout.bit(o, layout.a1) == layout.bit(o, layout.a2)
                    || layout.bit(o, layout.b1) == layout.bit(o, layout.b2))
        })
        .collect())
}

/// Appends `H(anc)`, `CSwap(anc, A1, A2)`, `H(anc)` and, optionally, a
/// Hadamard on each data qubit.
fn append_swap_test(c: &mut Circuit, layout: &SwapTestLayout, final_hadamards: bool) -> Result<()> {
    c.push(Gate::H { target: layout.ancilla })?;
    c.push(Gate::CSwap { control: layout.ancilla, a: layout.a1, b: layout.a2 })?;
    c.push(Gate::H { target: layout.ancilla })?;
    if final_hadamards {
        for q in [layout.a1, layout.b1, layout.a2, layout.b2] {
            c.push(Gate::H { target: q })?;
        }
    }
    Ok(())
}

/// Full logical circuit: identical preparation on both copies, then the
/// ancilla-controlled swap of the A qubits. All five qubits are measured in Z.
pub fn build_swap_test_circuit(schedule: &TrotterSchedule, final_hadamards: bool) -> Result<Circuit> {
    build_swap_test_circuit_with(schedule, final_hadamards, &SwapTestLayout::STANDARD)
}

pub fn build_swap_test_circuit_with(
    schedule: &TrotterSchedule,
    final_hadamards: bool,
    layout: &SwapTestLayout,
) -> Result<Circuit> {
    layout.validate()?;
    let prep = build_prep_circuit(schedule)?;
    let mut c = Circuit::new(SWAP_TEST_QUBITS)?;
    for (a, b) in [(layout.a1, layout.b1), (layout.a2, layout.b2)] {
        c.extend(prep.gates().iter().map(|g| g.remapped(|q| if q == 0 { a } else { b })))?;
    }
    append_swap_test(&mut c, layout, final_hadamards)?;
    Ok(c)
}

/// Runs the swap test on two copies of an arbitrary two-qubit state and
/// returns the final five-qubit state (standard layout).
pub fn swap_test_state(psi: &StateVector, final_hadamards: bool) -> Result<StateVector> {
    if psi.num_qubits() != 2 {
        return Err(SimError::DimensionMismatch { expected: 2, got: psi.num_qubits() });
    }
    let mut state = StateVector::zero(1)?.tensor(psi)?.tensor(psi)?;
    let mut c = Circuit::new(SWAP_TEST_QUBITS)?;
    append_swap_test(&mut c, &SwapTestLayout::STANDARD, final_hadamards)?;
    c.apply_to(&mut state)?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R2Estimate {
    /// `P(anc = 0) − P(anc = 1)` over kept shots; `None` when nothing was kept.
    pub r2: Option<f64>,
    /// Binomial standard error `sqrt((1 − r2²)/kept)`.
    pub std_err: Option<f64>,
    pub p0: f64,
    pub p1: f64,
    pub yield_fraction: f64,
    pub post_selected: bool,
    /// Number of shots kept (possibly fractional when built from a corrected distribution).
    pub kept_shots: f64,
    pub total_shots: f64,
}

impl R2Estimate {
    pub fn is_defined(&self) -> bool {
        self.r2.is_some()
    }
}

/// Estimate from per-outcome weights (counts, or a distribution scaled by an
/// effective shot count).
pub fn estimate_r2_from_weights(weights: &[f64], post_select: bool) -> Result<R2Estimate> {
    if weights.len() != 1 << SWAP_TEST_QUBITS {
        return Err(SimError::DimensionMismatch { expected: 1 << SWAP_TEST_QUBITS, got: weights.len() });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(SimError::EmptyInput("shot record has no shots"));
    }
    let discard = if post_select { zero_weight_set(&SwapTestLayout::STANDARD)? } else { BTreeSet::new() };
    let layout = SwapTestLayout::STANDARD;
    let (mut w0, mut w1) = (0.0, 0.0);
    for (outcome, &w) in weights.iter().enumerate() {
        if discard.contains(&outcome) {
            continue;
        }
        if layout.bit(outcome, layout.ancilla) {
            w1 += w;
        } else {
            w0 += w;
        }
    }
    let kept = w0 + w1;
    let yield_fraction = kept / total;
    if kept <= 0.0 {
        return Ok(R2Estimate {
            r2: None,
            std_err: None,
            p0: 0.0,
            p1: 0.0,
            yield_fraction: 0.0,
            post_selected: post_select,
            kept_shots: 0.0,
            total_shots: total,
        });
    }
    let (p0, p1) = (w0 / kept, w1 / kept);
    let r2 = p0 - p1;
    Ok(R2Estimate {
        r2: Some(r2),
        std_err: Some(((1.0 - r2 * r2).max(0.0) / kept).sqrt()),
        p0,
        p1,
        yield_fraction,
        post_selected: post_select,
        kept_shots: kept,
        total_shots: total,
    })
}

/// Estimate from a five-qubit shot record, optionally discarding the zero-weight outcomes.
pub fn estimate_r2(record: &ShotRecord, post_select: bool) -> Result<R2Estimate> {
    if record.num_qubits() != SWAP_TEST_QUBITS {
        return Err(SimError::DimensionMismatch { expected: SWAP_TEST_QUBITS, got: record.num_qubits() });
    }
    let weights: Vec<f64> = record.dense_counts().into_iter().map(|c| c as f64).collect();
    estimate_r2_from_weights(&weights, post_select)
}

/// Estimate from an exact (or corrected) distribution; `shots` sets the
/// effective sample size used in the standard error.
pub fn estimate_r2_from_distribution(probs: &[f64], shots: f64, post_select: bool) -> Result<R2Estimate> {
    let weights: Vec<f64> = probs.iter().map(|p| p * shots).collect();
    estimate_r2_from_weights(&weights, post_select)
}

/// Output distribution of the lowered C-Swap for every computational input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    /// `probs[input][output]`, qubit order (control, a, b), MSB first.
    pub probs: [[f64; 8]; 8],
}

impl TruthTable {
    fn ideal_output(input: usize) -> usize {
        match input {
            5 => 6,
            6 => 5,
            other => other,
        }
    }

    /// Mean probability of the ideal output over the eight inputs.
    pub fn average_success(&self) -> f64 {
        (0..8).map(|i| self.probs[i][Self::ideal_output(i)]).sum::<f64>() / 8.0
    }

    /// Mean probability that the control bit is read unchanged.
    pub fn control_correctness(&self) -> f64 {
        (0..8).map(|i| (0..8).filter(|o| (o >> 2) == (i >> 2)).map(|o| self.probs[i][o]).sum::<f64>()).sum::<f64>()
            / 8.0
    }
}

/// Runs the lowered C-Swap on each basis input. Without noise the exact
/// output probabilities are returned; with noise, `shots` trajectories per input.
pub fn cswap_truth_table(noise: Option<&NoiseModel>, shots: u64, signs: SignParams) -> Result<TruthTable> {
    let native = lower_gate(&Gate::CSwap { control: 0, a: 1, b: 2 }, signs)?.native_circuit;
    let mut probs = [[0.0; 8]; 8];
    for (input, row) in probs.iter_mut().enumerate() {
        let initial = StateVector::basis(3, input)?;
        let dist = match noise {
            None => {
                let mut s = initial;
                native.apply_to(&mut s)?;
                s.probabilities()
            }
            Some(n) => {
                let run = n.with_seed(derive_seed(n.seed, input as u64));
                run_noisy_from(&native, &initial, &run, shots)?.frequencies()?
            }
        };
        row.copy_from_slice(&dist);
    }
    Ok(TruthTable { probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::{prepare_state, Method};
    use crate::hubbard::{exact_ground_state, exact_r2, subsystem_purity, HubbardParams};
    use num_complex::Complex64;

    const EXPECTED_DISCARDS: [usize; 12] = [16, 17, 18, 20, 21, 23, 24, 26, 27, 29, 30, 31];

    #[test]
    fn zero_weight_set_matches_hand_derived_list() {
        let set = zero_weight_set(&SwapTestLayout::STANDARD).unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), EXPECTED_DISCARDS);
    }

    #[test]
    fn outcome_nineteen_is_kept() {
        let set = zero_weight_set(&SwapTestLayout::STANDARD).unwrap();
        assert!(!set.contains(&19));
        assert!(set.iter().all(|o| o & 16 != 0));
    }

    #[test]
    fn bad_layout_rejected() {
        let l = SwapTestLayout { ancilla: 0, a1: 1, b1: 1, a2: 3, b2: 4 };
        assert!(zero_weight_set(&l).is_err());
    }

    #[test]
    fn method_i_zero_gate_count() {
        let s = TrotterSchedule::preset(Method::I, 0.0).unwrap();
        assert_eq!(build_swap_test_circuit(&s, false).unwrap().len(), 4 + 2 + 1);
        assert_eq!(build_swap_test_circuit(&s, true).unwrap().len(), 4 + 2 + 1 + 4);
    }

    #[test]
    fn noiseless_swap_test_equals_swap_expectation() {
        for u in [0.5, 2.0, 4.0] {
            let s = TrotterSchedule::preset(Method::II, u).unwrap();
            let psi = prepare_state(&s).unwrap();
            // Oracle: ⟨Ψ|⟨Ψ|Swap_A|Ψ⟩|Ψ⟩ computed directly on four qubits.
            let two = psi.tensor(&psi).unwrap();
            let swapped = two.with_gate(&Gate::Swap { a: 0, b: 2 }).unwrap();
            let oracle = two.inner(&swapped).unwrap().re;
            let probs = build_swap_test_circuit(&s, true).unwrap().run().unwrap().probabilities();
            let est = estimate_r2_from_distribution(&probs, 1.0, false).unwrap();
            assert!((est.r2.unwrap() - oracle).abs() < 1e-12);
            assert!((oracle - subsystem_purity(&psi)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_r2_matches_swap_operator_on_ground_state() {
        for u in [0.0, 1.0, 3.5, 9.0] {
            let g = exact_ground_state(HubbardParams::new(u)).unwrap().ground_state;
            let two = g.tensor(&g).unwrap();
            let swapped = two.with_gate(&Gate::Swap { a: 0, b: 2 }).unwrap();
            let via_swap = two.inner(&swapped).unwrap().re;
            assert!((via_swap - exact_r2(HubbardParams::new(u)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn u_zero_shots_give_unit_r2() {
        let s = TrotterSchedule::preset(Method::I, 0.0).unwrap();
        let rec = build_swap_test_circuit(&s, true).unwrap().run().unwrap().sample_shots(5000, 1).unwrap();
        let est = estimate_r2(&rec, true).unwrap();
        assert_eq!(est.r2, Some(1.0));
        assert_eq!(est.yield_fraction, 1.0);
    }

    #[test]
    fn bell_copies_give_half() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
        ])
        .unwrap();
        let rec = swap_test_state(&bell, true).unwrap().sample_shots(100_000, 8).unwrap();
        let est = estimate_r2(&rec, true).unwrap();
        let r2 = est.r2.unwrap();
        assert!((r2 - 0.5).abs() < 3.0 * est.std_err.unwrap(), "{r2}");
    }

    #[test]
    fn all_discarded_is_undefined_not_nan() {
        let rec = ShotRecord::from_counts(5, [(16, 40)]).unwrap();
        let est = estimate_r2(&rec, true).unwrap();
        assert_eq!(est.r2, None);
        assert_eq!(est.yield_fraction, 0.0);
        let raw = estimate_r2(&rec, false).unwrap();
        assert_eq!(raw.r2, Some(-1.0));
    }

    #[test]
    fn estimate_errors() {
        assert!(estimate_r2(&ShotRecord::new(5).unwrap(), false).is_err());
        assert!(estimate_r2(&ShotRecord::from_counts(2, [(0, 1)]).unwrap(), false).is_err());
    }

    #[test]
    fn noiseless_truth_table_is_fredkin_permutation() {
        let t = cswap_truth_table(None, 0, SignParams::default()).unwrap();
        assert!((t.probs[5][6] - 1.0).abs() < 1e-12);
        assert!((t.probs[3][3] - 1.0).abs() < 1e-12);
        assert!((t.average_success() - 1.0).abs() < 1e-12);
        assert!((t.control_correctness() - 1.0).abs() < 1e-12);
    }
}
