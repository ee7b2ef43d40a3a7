//! Lowering of logical gates onto the trapped-ion native set {R, Rz, XX}.
//!
//! Lowering is purely syntactic: every logical gate expands to a fixed
//! template and a circuit lowers to the concatenation of its gates'
//! templates. No cross-gate simplification is performed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Result, SimError};
use crate::gate::Gate;

/// Signs of the hardware XX interaction on the three pairs touched by a
/// C-Swap: `alpha` for (control, a), `beta` for (a, b), `gamma` for (control, b).
/// Two-qubit logical gates (CNOT, Swap, Rzz) use `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignParams {
    pub alpha: i32,
    pub beta: i32,
    pub gamma: i32,
}

impl Default for SignParams {
    fn default() -> Self {
        Self { alpha: 1, beta: 1, gamma: 1 }
    }
}

impl SignParams {
    pub fn new(alpha: i32, beta: i32, gamma: i32) -> Result<Self> {
        let s = Self { alpha, beta, gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.alpha, self.beta, self.gamma] {
            if v != 1 && v != -1 {
                return Err(SimError::InvalidSign(v));
            }
        }
        Ok(())
    }

    /// All eight sign combinations.
    pub fn all() -> impl Iterator<Item = SignParams> {
        (0..8).map(|bits| SignParams {
            alpha: if bits & 4 == 0 { 1 } else { -1 },
            beta: if bits & 2 == 0 { 1 } else { -1 },
            gamma: if bits & 1 == 0 { 1 } else { -1 },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoweringResult {
    pub native_circuit: Circuit,
    pub entangling_count: usize,
    /// Every single-qubit native gate, Rz phase advances included.
    pub single_qubit_count: usize,
    /// Parallel depth of the native circuit with Rz excluded.
    pub depth: usize,
}

impl LoweringResult {
    fn from_circuit(native_circuit: Circuit) -> Self {
        Self {
            entangling_count: native_circuit.entangling_count(),
            single_qubit_count: native_circuit.single_qubit_count(),
            depth: native_circuit.parallel_depth(),
            native_circuit,
        }
    }
}

fn rx(target: usize, theta: f64) -> Gate {
    Gate::R { target, theta, phi: 0.0 }
}

fn ry(target: usize, theta: f64) -> Gate {
    Gate::R { target, theta, phi: FRAC_PI_2 }
}

fn rz(target: usize, theta: f64) -> Gate {
    Gate::Rz { target, theta }
}

fn xx(a: usize, b: usize, chi: f64) -> Gate {
    Gate::XX { a, b, chi }
}

fn cnot_template(control: usize, target: usize, s: f64) -> [Gate; 5] {
    [
        ry(control, FRAC_PI_2),
        xx(control, target, s * FRAC_PI_4),
        rx(control, -s * FRAC_PI_2),
        rx(target, -s * FRAC_PI_2),
        ry(control, -FRAC_PI_2),
    ]
}

/// Seven XX gates and fourteen single-qubit rotations (five of them Rz).
fn cswap_template(c: usize, a: usize, b: usize, signs: SignParams) -> Vec<Gate> {
    let (al, be, ga) = (signs.alpha as f64, signs.beta as f64, signs.gamma as f64);
    let p = (2.0f64 / 3.0).sqrt().asin();
    let abg = al * be * ga;
    vec![
        ry(b, be * FRAC_PI_2),
        xx(a, b, be * FRAC_PI_4),
        rx(c, ga * FRAC_PI_2),
        rz(a, -be * FRAC_PI_2),
        rz(b, -FRAC_PI_2),
        rz(c, -FRAC_PI_2),
        rx(a, -be * FRAC_PI_4),
        rx(b, -be * FRAC_PI_2 + FRAC_PI_4),
        xx(a, b, be * PI / 8.0),
        xx(c, b, ga * PI / 8.0),
        Gate::R { target: c, theta: -2.0 * PI / 3.0, phi: (ga + 1.0) / 2.0 * PI - p },
        xx(c, a, al * FRAC_PI_4),
        Gate::R { target: c, theta: -abg * 2.0 * PI / 3.0, phi: (al * be + 1.0) / 2.0 * PI - abg * p },
        xx(c, b, ga * PI / 8.0),
        Gate::R { target: c, theta: PI, phi: -abg * FRAC_PI_4 },
        xx(c, a, al * FRAC_PI_4),
        rz(a, -be * FRAC_PI_2),
        ry(b, be * FRAC_PI_2),
        xx(a, b, be * FRAC_PI_4),
        ry(b, -be * FRAC_PI_2),
        rz(b, -FRAC_PI_2),
    ]
}

/// Native gate sequence for `gate`; native gates map to themselves.
pub fn native_gates(gate: &Gate, signs: SignParams) -> Result<Vec<Gate>> {
    signs.validate()?;
    let s = signs.alpha as f64;
    let gates = match *gate {
        Gate::R { .. } | Gate::Rz { .. } | Gate::XX { .. } => vec![*gate],
        Gate::H { target } => vec![rz(target, PI), ry(target, FRAC_PI_2)],
        Gate::Rx { target, theta } => vec![rx(target, theta)],
        Gate::Ry { target, theta } => vec![ry(target, theta)],
        Gate::Cnot { control, target } => cnot_template(control, target, s).to_vec(),
        Gate::Swap { a, b } => {
            let mut g = cnot_template(a, b, s).to_vec();
            g.extend(cnot_template(b, a, s));
            g.extend(cnot_template(a, b, s));
            g
        }
        Gate::Rzz { a, b, theta } => {
            let mut g = cnot_template(a, b, s).to_vec();
            g.push(rz(b, theta));
            g.extend(cnot_template(a, b, s));
            g
        }
        Gate::CSwap { control, a, b } => cswap_template(control, a, b, signs),
    };
    Ok(gates)
}

/// Lowers one gate onto the smallest register containing its qubits.
pub fn lower_gate(gate: &Gate, signs: SignParams) -> Result<LoweringResult> {
    let width = gate.qubits().into_iter().max().map_or(1, |q| q + 1);
    let native = Circuit::from_gates(width, native_gates(gate, signs)?)?;
    Ok(LoweringResult::from_circuit(native))
}

pub fn lower_circuit(circuit: &Circuit, signs: SignParams) -> Result<LoweringResult> {
    let mut native = Circuit::new(circuit.num_qubits())?;
    for g in circuit.gates() {
        native.extend(native_gates(g, signs)?)?;
    }
    Ok(LoweringResult::from_circuit(native))
}

/// `1 − |Tr(U†V)| / dim`: zero exactly when the unitaries agree up to a global phase.
pub fn unitary_distance(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<f64> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(SimError::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    let dim = u.nrows();
    let trace: Complex64 =
        (0..dim).flat_map(|c| (0..dim).map(move |r| (r, c))).map(|(r, c)| u[(r, c)].conj() * v[(r, c)]).sum();
    Ok((1.0 - trace.norm() / dim as f64).max(0.0))
}

/// Largest entry deviation between `u` and `v` after removing the best global phase.
pub fn max_entry_deviation(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(SimError::DimensionMismatch { expected: u.nrows(), got: v.nrows() });
    }
    let trace: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if trace.norm() > 0.0 { trace / trace.norm() } else { Complex64::new(1.0, 0.0) };
    Ok(u.iter().zip(v.iter()).map(|(a, b)| (a * phase - b).norm()).fold(0.0, f64::max))
}

/// Residual `unitary_distance(ideal, lowered)` for a circuit and its lowering.
pub fn verify_lowering(circuit: &Circuit, lowered: &LoweringResult) -> Result<f64> {
    unitary_distance(&circuit.unitary()?, &lowered.native_circuit.unitary()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(gate: Gate, signs: SignParams) -> f64 {
        let lowered = lower_gate(&gate, signs).unwrap();
        let width = lowered.native_circuit.num_qubits();
        let ideal = Circuit::from_gates(width, [gate]).unwrap();
        verify_lowering(&ideal, &lowered).unwrap()
    }

    #[test]
    fn cswap_counts_and_residual() {
        for signs in SignParams::all() {
            let r = lower_gate(&Gate::CSwap { control: 0, a: 1, b: 2 }, signs).unwrap();
            assert_eq!(r.entangling_count, 7);
            assert_eq!(r.single_qubit_count, 14);
            assert!(residual(Gate::CSwap { control: 0, a: 1, b: 2 }, signs) < 1e-10);
        }
    }

    #[test]
    fn hadamard_lowering() {
        let r = lower_gate(&Gate::H { target: 0 }, SignParams::default()).unwrap();
        assert_eq!(r.native_circuit.num_qubits(), 1);
        assert!(residual(Gate::H { target: 0 }, SignParams::default()) < 1e-12);
    }

    #[test]
    fn rzz_lowering_against_direct_diagonal() {
        let theta = 0.7;
        let r = lower_gate(&Gate::Rzz { a: 0, b: 1, theta }, SignParams::default()).unwrap();
        assert_eq!(r.entangling_count, 2);
        let e = |s: f64| Complex64::from_polar(1.0, s * theta / 2.0);
        let direct = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e(-1.0), e(1.0), e(1.0), e(-1.0)]));
        let dev = max_entry_deviation(&direct, &r.native_circuit.unitary().unwrap()).unwrap();
        assert!(dev < 1e-10, "{dev}");
    }

    #[test]
    fn distance_examples() {
        let id = DMatrix::<Complex64>::identity(2, 2);
        let x = Circuit::from_gates(1, [Gate::R { target: 0, theta: PI, phi: 0.0 }]).unwrap().unitary().unwrap();
        assert!(unitary_distance(&id, &id).unwrap().abs() < 1e-15);
        let phased = &x * Complex64::from_polar(1.0, PI / 3.0);
        assert!(unitary_distance(&x, &phased).unwrap() < 1e-12);
        assert!((unitary_distance(&id, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!(unitary_distance(&id, &DMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn bad_signs_rejected() {
        assert_eq!(SignParams::new(1, 0, 1), Err(SimError::InvalidSign(0)));
        let bad = SignParams { alpha: 2, beta: 1, gamma: 1 };
        assert!(lower_gate(&Gate::H { target: 0 }, bad).is_err());
    }

    #[test]
    fn empty_circuit_lowers_to_nothing() {
        let r = lower_circuit(&Circuit::new(2).unwrap(), SignParams::default()).unwrap();
        assert_eq!((r.entangling_count, r.single_qubit_count, r.depth), (0, 0, 0));
    }
}
