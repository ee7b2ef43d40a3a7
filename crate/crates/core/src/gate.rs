//! Gate set: the trapped-ion native gates {R, Rz, XX} and the logical gates
//! used to describe circuits before lowering.
//!
//! Rotation conventions are fixed for the whole crate:
//! `Rx(θ) = exp(−iθX/2)`, `Ry(θ) = exp(−iθY/2)`, `Rz(θ) = exp(−iθZ/2)`,
//! `R(θ, φ) = exp(−iθ(cos φ X + sin φ Y)/2)`, `XX(χ) = exp(−iχ X⊗X)` and
//! `Rzz(θ) = exp(−iθ Z⊗Z/2)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A single gate together with the qubits it acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// Native equatorial rotation by `theta` about `cos(phi) X + sin(phi) Y`.
    R {
        target: usize,
        theta: f64,
        phi: f64,
    },
    /// Native Z rotation (a phase advance on hardware).
    Rz {
        target: usize,
        theta: f64,
    },
    /// Native Mølmer–Sørensen gate `exp(−iχ X⊗X)`.
    XX {
        a: usize,
        b: usize,
        chi: f64,
    },
    H {
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Swap {
        a: usize,
        b: usize,
    },
    CSwap {
        control: usize,
        a: usize,
        b: usize,
    },
    Rx {
        target: usize,
        theta: f64,
    },
    Ry {
        target: usize,
        theta: f64,
    },
    Rzz {
        a: usize,
        b: usize,
        theta: f64,
    },
}

/// Discriminant of [`Gate`] without its operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    R,
    Rz,
    XX,
    H,
    CNOT,
    Swap,
    CSwap,
    Rx,
    Ry,
    Rzz,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::R => "R",
            GateKind::Rz => "Rz",
            GateKind::XX => "XX",
            GateKind::H => "H",
            GateKind::CNOT => "CNOT",
            GateKind::Swap => "Swap",
            GateKind::CSwap => "CSwap",
            GateKind::Rx => "Rx",
            GateKind::Ry => "Ry",
            GateKind::Rzz => "Rzz",
        }
    }

    /// Case-insensitive lookup by name.
    pub fn parse(name: &str) -> Option<GateKind> {
        let kind = match name.to_ascii_lowercase().as_str() {
            "r" => GateKind::R,
            "rz" => GateKind::Rz,
            "xx" | "ms" => GateKind::XX,
            "h" => GateKind::H,
            "cnot" | "cx" => GateKind::CNOT,
            "swap" => GateKind::Swap,
            "cswap" | "fredkin" | "c-swap" => GateKind::CSwap,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rzz" => GateKind::Rzz,
            _ => return None,
        };
        Some(kind)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::R | GateKind::Rz | GateKind::H | GateKind::Rx | GateKind::Ry => 1,
            GateKind::XX | GateKind::CNOT | GateKind::Swap | GateKind::Rzz => 2,
            GateKind::CSwap => 3,
        }
    }

    /// Number of rotation angles the gate takes.
    pub fn angle_count(self) -> usize {
        match self {
            GateKind::R => 2,
            GateKind::Rz | GateKind::XX | GateKind::Rx | GateKind::Ry | GateKind::Rzz => 1,
            GateKind::H | GateKind::CNOT | GateKind::Swap | GateKind::CSwap => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Gate {
    /// Builds a gate from its kind, qubits and angles, checking the counts.
    pub fn from_parts(kind: GateKind, qubits: &[usize], angles: &[f64]) -> Result<Gate> {
        if qubits.len() != kind.arity() || angles.len() != kind.angle_count() {
            return Err(SimError::Parse(format!(
                "{kind} takes {} qubit(s) and {} angle(s), got {} and {}",
                kind.arity(),
                kind.angle_count(),
                qubits.len(),
                angles.len()
            )));
        }
        let (q, a) = (qubits, angles);
        Ok(match kind {
            GateKind::R => Gate::R { target: q[0], theta: a[0], phi: a[1] },
            GateKind::Rz => Gate::Rz { target: q[0], theta: a[0] },
            GateKind::XX => Gate::XX { a: q[0], b: q[1], chi: a[0] },
            GateKind::H => Gate::H { target: q[0] },
            GateKind::CNOT => Gate::Cnot { control: q[0], target: q[1] },
            GateKind::Swap => Gate::Swap { a: q[0], b: q[1] },
            GateKind::CSwap => Gate::CSwap { control: q[0], a: q[1], b: q[2] },
            GateKind::Rx => Gate::Rx { target: q[0], theta: a[0] },
            GateKind::Ry => Gate::Ry { target: q[0], theta: a[0] },
            GateKind::Rzz => Gate::Rzz { a: q[0], b: q[1], theta: a[0] },
        })
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::R { .. } => GateKind::R,
            Gate::Rz { .. } => GateKind::Rz,
            Gate::XX { .. } => GateKind::XX,
            Gate::H { .. } => GateKind::H,
            Gate::Cnot { .. } => GateKind::CNOT,
            Gate::Swap { .. } => GateKind::Swap,
            Gate::CSwap { .. } => GateKind::CSwap,
            Gate::Rx { .. } => GateKind::Rx,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Rzz { .. } => GateKind::Rzz,
        }
    }

    /// Qubits in the order used by [`Gate::local_matrix`] (first = most significant).
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::R { target, .. }
            | Gate::Rz { target, .. }
            | Gate::H { target }
            | Gate::Rx { target, .. }
            | Gate::Ry { target, .. } => vec![target],
            Gate::XX { a, b, .. } | Gate::Swap { a, b } | Gate::Rzz { a, b, .. } => vec![a, b],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::CSwap { control, a, b } => vec![control, a, b],
        }
    }

    /// Rotation angles carried by the gate, in radians.
    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::R { theta, phi, .. } => vec![theta, phi],
            Gate::Rz { theta, .. } | Gate::Rx { theta, .. } | Gate::Ry { theta, .. } | Gate::Rzz { theta, .. } => {
                vec![theta]
            }
            Gate::XX { chi, .. } => vec![chi],
            Gate::H { .. } | Gate::Cnot { .. } | Gate::Swap { .. } | Gate::CSwap { .. } => vec![],
        }
    }

    pub fn is_native(&self) -> bool {
        matches!(self, Gate::R { .. } | Gate::Rz { .. } | Gate::XX { .. })
    }

    pub fn is_entangling(&self) -> bool {
        self.qubits().len() > 1
    }

    /// Checks indices against a register size and rejects repeated qubits.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(SimError::QubitOutOfRange { index: q, num_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(SimError::DuplicateQubit { gate: self.kind().name(), index: q });
            }
        }
        Ok(())
    }

    /// The inverse gate. Self-inverse logical gates return themselves.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::R { target, theta, phi } => Gate::R { target, theta: -theta, phi },
            Gate::Rz { target, theta } => Gate::Rz { target, theta: -theta },
            Gate::XX { a, b, chi } => Gate::XX { a, b, chi: -chi },
            Gate::Rx { target, theta } => Gate::Rx { target, theta: -theta },
            Gate::Ry { target, theta } => Gate::Ry { target, theta: -theta },
            Gate::Rzz { a, b, theta } => Gate::Rzz { a, b, theta: -theta },
            g @ (Gate::H { .. } | Gate::Cnot { .. } | Gate::Swap { .. } | Gate::CSwap { .. }) => g,
        }
    }

    /// Same gate acting on qubits shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Gate {
        self.remapped(|q| q + offset)
    }

    /// Same gate with every qubit index passed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::R { target, theta, phi } => Gate::R { target: map(target), theta, phi },
            Gate::Rz { target, theta } => Gate::Rz { target: map(target), theta },
            Gate::XX { a, b, chi } => Gate::XX { a: map(a), b: map(b), chi },
            Gate::H { target } => Gate::H { target: map(target) },
            Gate::Cnot { control, target } => Gate::Cnot { control: map(control), target: map(target) },
            Gate::Swap { a, b } => Gate::Swap { a: map(a), b: map(b) },
            Gate::CSwap { control, a, b } => Gate::CSwap { control: map(control), a: map(a), b: map(b) },
            Gate::Rx { target, theta } => Gate::Rx { target: map(target), theta },
            Gate::Ry { target, theta } => Gate::Ry { target: map(target), theta },
            Gate::Rzz { a, b, theta } => Gate::Rzz { a: map(a), b: map(b), theta },
        }
    }

    /// Dense unitary on the gate's own qubits, row-major, dimension `2^arity`.
    /// Local basis index uses the first listed qubit as most significant bit.
    pub fn local_matrix(&self) -> Vec<Complex64> {
        let i = Complex64::i();
        match *self {
            Gate::R { theta, phi, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                vec![
                    Complex64::new(c, 0.0),
                    -i * Complex64::from_polar(s, -phi),
                    -i * Complex64::from_polar(s, phi),
                    Complex64::new(c, 0.0),
                ]
            }
            Gate::Rx { theta, .. } => Gate::R { target: 0, theta, phi: 0.0 }.local_matrix(),
            Gate::Ry { theta, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                vec![c.into(), (-s).into(), s.into(), c.into()]
            }
            Gate::Rz { theta, .. } => {
                vec![Complex64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, theta / 2.0)]
            }
            Gate::H { .. } => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                vec![h, h, h, -h]
            }
            Gate::XX { chi, .. } => {
                let (s, c) = chi.sin_cos();
                let c = Complex64::new(c, 0.0);
                let s = -i * s;
                vec![
                    c, ZERO, ZERO, s, //
                    ZERO, c, s, ZERO, //
                    ZERO, s, c, ZERO, //
                    s, ZERO, ZERO, c,
                ]
            }
            Gate::Rzz { theta, .. } => {
                let even = Complex64::from_polar(1.0, -theta / 2.0);
                let odd = Complex64::from_polar(1.0, theta / 2.0);
                diagonal(&[even, odd, odd, even])
            }
            Gate::Cnot { .. } => permutation(&[0, 1, 3, 2]),
            Gate::Swap { .. } => permutation(&[0, 2, 1, 3]),
            Gate::CSwap { .. } => permutation(&[0, 1, 2, 3, 4, 6, 5, 7]),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.kind(), self.qubits())?;
        let angles = self.angles();
        if !angles.is_empty() {
            write!(f, "({})", angles.iter().map(|a| format!("{a:.6}")).collect::<Vec<_>>().join(", "))?;
        }
        Ok(())
    }
}

fn diagonal(entries: &[Complex64]) -> Vec<Complex64> {
    let d = entries.len();
    let mut m = vec![ZERO; d * d];
    for (k, &e) in entries.iter().enumerate() {
        m[k * d + k] = e;
    }
    m
}

/// `perm[input] = output` as a unitary matrix.
fn permutation(perm: &[usize]) -> Vec<Complex64> {
    let d = perm.len();
    let mut m = vec![ZERO; d * d];
    for (input, &output) in perm.iter().enumerate() {
        m[output * d + input] = ONE;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn is_unitary(m: &[Complex64]) -> bool {
        let d = (m.len() as f64).sqrt() as usize;
        for r in 0..d {
            for c in 0..d {
                let dot: Complex64 = (0..d).map(|k| m[k * d + r].conj() * m[k * d + c]).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                if (dot - expect).norm() > 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn every_kind_is_unitary() {
        let gates = [
            Gate::R { target: 0, theta: 0.3, phi: 1.1 },
            Gate::Rz { target: 0, theta: -0.7 },
            Gate::XX { a: 0, b: 1, chi: 0.4 },
            Gate::H { target: 0 },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Swap { a: 0, b: 1 },
            Gate::CSwap { control: 0, a: 1, b: 2 },
            Gate::Rx { target: 0, theta: 2.0 },
            Gate::Ry { target: 0, theta: -1.0 },
            Gate::Rzz { a: 0, b: 1, theta: 0.9 },
        ];
        for g in gates {
            assert!(is_unitary(&g.local_matrix()), "{g}");
        }
    }

    #[test]
    fn r_at_quarter_phase_is_ry() {
        let r = Gate::R { target: 0, theta: 0.8, phi: PI / 2.0 }.local_matrix();
        let ry = Gate::Ry { target: 0, theta: 0.8 }.local_matrix();
        for (a, b) in r.iter().zip(&ry) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn validate_rejects_bad_indices() {
        assert_eq!(Gate::H { target: 3 }.validate(2), Err(SimError::QubitOutOfRange { index: 3, num_qubits: 2 }));
        assert!(matches!(
            Gate::CSwap { control: 0, a: 1, b: 1 }.validate(3),
            Err(SimError::DuplicateQubit { index: 1, .. })
        ));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(GateKind::parse("CSWAP"), Some(GateKind::CSwap));
        assert_eq!(GateKind::parse("cx"), Some(GateKind::CNOT));
        assert_eq!(GateKind::parse("toffoli"), None);
    }

    #[test]
    fn from_parts_round_trips() {
        for g in [
            Gate::R { target: 1, theta: 0.3, phi: -0.2 },
            Gate::CSwap { control: 0, a: 2, b: 1 },
            Gate::Rzz { a: 0, b: 1, theta: 1.1 },
        ] {
            assert_eq!(Gate::from_parts(g.kind(), &g.qubits(), &g.angles()).unwrap(), g);
        }
        assert!(Gate::from_parts(GateKind::H, &[0, 1], &[]).is_err());
        assert!(Gate::from_parts(GateKind::Rx, &[0], &[]).is_err());
    }
}
