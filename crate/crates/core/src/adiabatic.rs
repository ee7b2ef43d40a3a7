//! Digitized adiabatic preparation of the dimer ground state.
//!
//! Starting from `|++⟩`, step `m` applies `exp(iδX)` on each qubit followed
//! by `exp(−i mδ²/(2τ) Z⊗Z)`, i.e. `Rx(−2δ) ⊗ Rx(−2δ)` then `Rzz(mδ²/τ)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::compiler::{lower_circuit, SignParams};
use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::noise::{run_noisy, NoiseModel};
use crate::shots::ShotRecord;
use crate::state::{PauliString, StateVector};

/// Fixed step count of the fixed-depth schedule.
pub const METHOD_II_STEPS: usize = 5;
/// Step bound imposed by the controller memory on experiment presets.
pub const MAX_PRESET_STEPS: usize = 6;
pub const METHOD_I_PRESET_DELTA: f64 = 0.1;
pub const METHOD_I_PRESET_TAU: f64 = 0.1;
pub const METHOD_II_PRESET_DELTA: f64 = 0.25;

/// Schedule family.
///
/// * `I`: fixed `δ` and `τ`, `N_steps = Uτ/δ` grows with the target interaction.
/// * `II`: fixed `N_steps = 5`, `τ = N_steps·δ/U`, same gate count for every `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    I,
    II,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::I => "I",
            Method::II => "II",
        })
    }
}

impl FromStr for Method {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Method::I),
            "II" | "2" => Ok(Method::II),
            other => Err(SimError::Parse(format!("unknown method {other:?} (expected I or II)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterSchedule {
    pub method: Method,
    pub u: f64,
    pub delta: f64,
    /// Evolution time per unit of `U`; infinite for the `U = 0` reference run.
    pub tau: f64,
    pub n_steps: usize,
}

impl TrotterSchedule {
    /// Fixed `δ`, `τ`; `Uτ/δ` must be an integer to within 1e-9.
    pub fn method_i(u: f64, delta: f64, tau: f64) -> Result<Self> {
        check_common(u, delta, tau)?;
        let exact = u * tau / delta;
        let n = exact.round();
        if (n - exact).abs() > 1e-9 {
            return Err(SimError::InvalidSchedule(format!("U·τ/δ = {exact} is not an integer step count")));
        }
        Ok(Self { method: Method::I, u, delta, tau, n_steps: n as usize })
    }

    /// Fixed `δ`, `τ` with `N_steps = round(Uτ/δ)`, for scans over arbitrary grids.
    pub fn method_i_rounded(u: f64, delta: f64, tau: f64) -> Result<Self> {
        check_common(u, delta, tau)?;
        let n = (u * tau / delta).round() as usize;
        Ok(Self { method: Method::I, u, delta, tau, n_steps: n })
    }

    /// Fixed five steps with `τ = 5δ/U`; `U` must be positive.
    pub fn method_ii(u: f64, delta: f64) -> Result<Self> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(SimError::InvalidSchedule(format!(
                "method II needs U > 0 (τ = N_steps·δ/U diverges at U = {u})"
            )));
        }
        let tau = METHOD_II_STEPS as f64 * delta / u;
        check_common(u, delta, tau)?;
        Ok(Self { method: Method::II, u, delta, tau, n_steps: METHOD_II_STEPS })
    }

    /// The full method-II gate sequence run at `U = 0`: five steps whose
    /// interaction angles are all zero. Used to measure the gate-error offset.
    pub fn method_ii_reference(delta: f64) -> Result<Self> {
        check_common(0.0, delta, f64::INFINITY)?;
        Ok(Self { method: Method::II, u: 0.0, delta, tau: f64::INFINITY, n_steps: METHOD_II_STEPS })
    }

    /// Experiment presets: `δ = τ = 0.1` for method I, `δ = 0.25` for method II.
    pub fn preset(method: Method, u: f64) -> Result<Self> {
        let s = match method {
            Method::I => Self::method_i(u, METHOD_I_PRESET_DELTA, METHOD_I_PRESET_TAU)?,
            Method::II => Self::method_ii(u, METHOD_II_PRESET_DELTA)?,
        };
        if s.n_steps > MAX_PRESET_STEPS {
            return Err(SimError::InvalidSchedule(format!(
                "preset needs {} Trotter steps; at most {MAX_PRESET_STEPS} are allowed",
                s.n_steps
            )));
        }
        Ok(s)
    }

    /// `Rzz` angle of step `m` (1-based): `mδ²/τ`.
    pub fn step_angle(&self, m: usize) -> f64 {
        if self.tau.is_infinite() {
            0.0
        } else {
            m as f64 * self.delta * self.delta / self.tau
        }
    }

    /// Interaction strength actually reached after the last step.
    pub fn reached_u(&self) -> f64 {
        if self.tau.is_infinite() {
            0.0
        } else {
            self.n_steps as f64 * self.delta / self.tau
        }
    }
}

fn check_common(u: f64, delta: f64, tau: f64) -> Result<()> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(SimError::InvalidSchedule(format!("U must be finite and non-negative, got {u}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(SimError::InvalidSchedule(format!("δ must be positive, got {delta}")));
    }
    if !(tau > 0.0) {
        return Err(SimError::InvalidSchedule(format!("τ must be positive, got {tau}")));
    }
    Ok(())
}

/// Gates of Trotter step `m` on qubits `(a, b)`.
pub fn trotter_step(schedule: &TrotterSchedule, m: usize, a: usize, b: usize) -> [Gate; 3] {
    let rx = -2.0 * schedule.delta;
    [
        Gate::Rx { target: a, theta: rx },
        Gate::Rx { target: b, theta: rx },
        Gate::Rzz { a, b, theta: schedule.step_angle(m) },
    ]
}

/// Preparation circuit on two qubits: `H ⊗ H` then `N_steps` Trotter steps.
pub fn build_prep_circuit(schedule: &TrotterSchedule) -> Result<Circuit> {
    let mut c = Circuit::new(2)?;
    c.extend([Gate::H { target: 0 }, Gate::H { target: 1 }])?;
    for m in 1..=schedule.n_steps {
        c.extend(trotter_step(schedule, m, 0, 1))?;
    }
    Ok(c)
}

pub fn prepare_state(schedule: &TrotterSchedule) -> Result<StateVector> {
    build_prep_circuit(schedule)?.run()
}

/// `⟨ψ|H|ψ⟩` for the dimer Hamiltonian at interaction `u`.
pub fn energy_of(state: &StateVector, u: f64) -> Result<f64> {
    let x1 = state.expectation_pauli(&"XI".parse()?)?;
    let x2 = state.expectation_pauli(&"IX".parse()?)?;
    let zz = state.expectation_pauli(&"ZZ".parse()?)?;
    Ok(-(x1 + x2) + u / 2.0 * zz)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub h_expect: f64,
    pub x1: f64,
    pub x2: f64,
    pub z1z2: f64,
    pub corrected: Option<f64>,
}

impl EnergyEstimate {
    fn from_components(u: f64, x1: f64, x2: f64, z1z2: f64) -> Self {
        Self { h_expect: -(x1 + x2) + u / 2.0 * z1z2, x1, x2, z1z2, corrected: None }
    }
}

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurement {
    /// Exact expectation values of the noiseless state.
    Exact,
    /// Noiseless state, finite shots per basis.
    Shots { shots: u64, seed: u64 },
    /// Lowered circuit under trajectory noise, finite shots per basis.
    Noisy { shots: u64, noise: NoiseModel },
}

/// Distinct seed for the X-basis run derived from the Z-basis seed.
fn x_basis_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Parities `(⟨Z_0⟩, ⟨Z_1⟩, ⟨Z_0 Z_1⟩)` of a two-qubit record.
fn parities(record: &ShotRecord) -> Result<(f64, f64, f64)> {
    let total = record.total_shots();
    if total == 0 {
        return Err(SimError::EmptyInput("shot record has no shots"));
    }
    let sign = |bit: bool| if bit { -1.0 } else { 1.0 };
    let (mut z0, mut z1, mut zz) = (0.0, 0.0, 0.0);
    for (outcome, count) in record.iter() {
        let (b0, b1) = (outcome & 2 != 0, outcome & 1 != 0);
        let c = count as f64;
        z0 += sign(b0) * c;
        z1 += sign(b1) * c;
        zz += sign(b0 ^ b1) * c;
    }
    let t = total as f64;
    Ok((z0 / t, z1 / t, zz / t))
}

/// Estimates `⟨H⟩ = −(⟨X₁⟩ + ⟨X₂⟩) + (U/2)⟨Z₁Z₂⟩` from a Z-basis run and a
/// second run with Hadamards on both qubits before measurement.
pub fn estimate_energy(schedule: &TrotterSchedule, measurement: Measurement) -> Result<EnergyEstimate> {
    let z_circuit = build_prep_circuit(schedule)?;
    let mut x_circuit = z_circuit.clone();
    x_circuit.extend([Gate::H { target: 0 }, Gate::H { target: 1 }])?;
    let u = schedule.u;
    match measurement {
        Measurement::Exact => {
            let state = z_circuit.run()?;
            let ev = |label: &str| -> Result<f64> { state.expectation_pauli(&label.parse::<PauliString>()?) };
            Ok(EnergyEstimate::from_components(u, ev("XI")?, ev("IX")?, ev("ZZ")?))
        }
        Measurement::Shots { shots, seed } => {
            let z = z_circuit.run()?.sample_shots(shots, seed)?;
            let x = x_circuit.run()?.sample_shots(shots, x_basis_seed(seed))?;
            let (_, _, zz) = parities(&z)?;
            let (x1, x2, _) = parities(&x)?;
            Ok(EnergyEstimate::from_components(u, x1, x2, zz))
        }
        Measurement::Noisy { shots, noise } => {
            let signs = SignParams::default();
            let z_native = lower_circuit(&z_circuit, signs)?.native_circuit;
            let x_native = lower_circuit(&x_circuit, signs)?.native_circuit;
            let z = run_noisy(&z_native, &noise, shots)?;
            let x = run_noisy(&x_native, &noise.with_seed(x_basis_seed(noise.seed)), shots)?;
            let (_, _, zz) = parities(&z)?;
            let (x1, x2, _) = parities(&x)?;
            Ok(EnergyEstimate::from_components(u, x1, x2, zz))
        }
    }
}

/// Gate-error offset of the method-II sequence: the `U = 0` reference run
/// measured with `measurement`, minus its noiseless value.
pub fn measure_offset(delta: f64, measurement: Measurement) -> Result<f64> {
    let reference = TrotterSchedule::method_ii_reference(delta)?;
    let measured = estimate_energy(&reference, measurement)?.h_expect;
    let ideal = estimate_energy(&reference, Measurement::Exact)?.h_expect;
    Ok(measured - ideal)
}

/// Method I subtracts `param · U` (a linear error growth); method II subtracts
/// the constant offset `param`.
pub fn apply_energy_correction(points: &[(f64, f64)], method: Method, param: f64) -> Result<Vec<(f64, f64)>> {
    if points.is_empty() {
        return Err(SimError::EmptyInput("no energy points to correct"));
    }
    Ok(points
        .iter()
        .map(|&(u, h)| match method {
            Method::I => (u, h - param * u),
            Method::II => (u, h - param),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hubbard::{exact_ground_state, ground_energy, qubit_hamiltonian, HubbardParams};

    #[test]
    fn method_i_at_zero_is_two_hadamards() {
        let s = TrotterSchedule::preset(Method::I, 0.0).unwrap();
        assert_eq!(s.n_steps, 0);
        let c = build_prep_circuit(&s).unwrap();
        assert_eq!(c.gates(), &[Gate::H { target: 0 }, Gate::H { target: 1 }]);
        for a in prepare_state(&s).unwrap().amplitudes() {
            assert!((a.re - 0.5).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn method_ii_preset_angles() {
        let s = TrotterSchedule::preset(Method::II, 5.0).unwrap();
        assert_eq!(s.n_steps, 5);
        assert!((s.tau - 0.25).abs() < 1e-15);
        for m in 1..=5 {
            assert!((s.step_angle(m) - 0.25 * m as f64).abs() < 1e-12);
        }
        assert!((s.reached_u() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gate_count_is_two_plus_three_per_step() {
        for n in 0..=6 {
            let s = TrotterSchedule::preset(Method::I, n as f64).unwrap();
            assert_eq!(build_prep_circuit(&s).unwrap().len(), 2 + 3 * n);
        }
        let a = build_prep_circuit(&TrotterSchedule::preset(Method::II, 1.0).unwrap()).unwrap();
        let b = build_prep_circuit(&TrotterSchedule::preset(Method::II, 4.3).unwrap()).unwrap();
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn schedule_validation() {
        assert!(TrotterSchedule::method_ii(0.0, 0.25).is_err());
        assert!(TrotterSchedule::method_i(0.55, 0.1, 0.1).is_err());
        assert!(TrotterSchedule::method_i(0.57, 0.1, 1.0).is_err());
        assert_eq!(TrotterSchedule::method_i_rounded(0.57, 0.1, 1.0).unwrap().n_steps, 6);
        assert!(TrotterSchedule::preset(Method::I, 7.0).is_err());
        assert!(TrotterSchedule::method_i(1.0, -0.1, 0.1).is_err());
        assert_eq!("ii".parse::<Method>().unwrap(), Method::II);
        assert!("III".parse::<Method>().is_err());
    }

    #[test]
    fn trotter_step_matches_dense_exponentials() {
        // exp(iδX)⊗exp(iδX) then exp(−i mδ²/(2τ) ZZ), built from closed forms.
        let s = TrotterSchedule::method_i(2.0, 0.2, 0.4).unwrap();
        for m in 1..=s.n_steps {
            let step = Circuit::from_gates(2, trotter_step(&s, m, 0, 1)).unwrap().unitary().unwrap();
            let (sn, cs) = s.delta.sin_cos();
            let ex = nalgebra::Matrix2::new(
                num_complex::Complex64::new(cs, 0.0),
                num_complex::Complex64::new(0.0, sn),
                num_complex::Complex64::new(0.0, sn),
                num_complex::Complex64::new(cs, 0.0),
            );
            let xx = ex.kronecker(&ex);
            let phi = m as f64 * s.delta * s.delta / (2.0 * s.tau);
            let zz = nalgebra::Matrix4::from_diagonal(&nalgebra::Vector4::from_iterator(
                [1.0, -1.0, -1.0, 1.0].map(|z: f64| num_complex::Complex64::from_polar(1.0, -phi * z)),
            ));
            let expect = zz * xx;
            for r in 0..4 {
                for c in 0..4 {
                    assert!((step[(r, c)] - expect[(r, c)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn slow_evolution_reaches_ground_state() {
        let s = TrotterSchedule::method_i(2.0, 0.05, 10.0).unwrap();
        let prepared = prepare_state(&s).unwrap();
        let exact = exact_ground_state(HubbardParams::new(2.0)).unwrap().ground_state;
        let overlap = prepared.overlap_sqr(&exact).unwrap();
        assert!(overlap > 0.999, "{overlap}");
    }

    #[test]
    fn rx_order_within_step_is_irrelevant() {
        let s = TrotterSchedule::preset(Method::II, 3.0).unwrap();
        let mut a = StateVector::zero(2).unwrap();
        let mut b = a.clone();
        a.apply_all(&build_prep_circuit(&s).unwrap().gates().to_vec()).unwrap();
        b.apply_all(&[Gate::H { target: 0 }, Gate::H { target: 1 }]).unwrap();
        for m in 1..=s.n_steps {
            let [r0, r1, zz] = trotter_step(&s, m, 0, 1);
            b.apply_all(&[r1, r0, zz]).unwrap();
        }
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_energy_examples() {
        let e = estimate_energy(&TrotterSchedule::preset(Method::I, 0.0).unwrap(), Measurement::Exact).unwrap();
        assert!((e.h_expect + 2.0).abs() < 1e-12);
        assert!((e.x1 - 1.0).abs() < 1e-12 && (e.x2 - 1.0).abs() < 1e-12 && e.z1z2.abs() < 1e-12);

        // Independent route: ⟨ψ|H|ψ⟩ with the dense Hamiltonian.
        let s = TrotterSchedule::preset(Method::II, 5.0).unwrap();
        let e = estimate_energy(&s, Measurement::Exact).unwrap();
        let psi = prepare_state(&s).unwrap();
        let h = qubit_hamiltonian(HubbardParams::new(5.0)).map(|x| num_complex::Complex64::new(x, 0.0));
        let v = nalgebra::Vector4::from_iterator(psi.amplitudes().iter().copied());
        let dense = (v.adjoint() * h * v)[(0, 0)].re;
        assert!((e.h_expect - dense).abs() < 1e-10);
        assert!(e.h_expect >= ground_energy(5.0) - 1e-12);
        assert!(e.x1.abs() <= 1.0 && e.x2.abs() <= 1.0 && e.z1z2.abs() <= 1.0);
    }

    #[test]
    fn shot_estimate_tracks_exact() {
        let s = TrotterSchedule::preset(Method::II, 3.0).unwrap();
        let exact = estimate_energy(&s, Measurement::Exact).unwrap().h_expect;
        let sampled = estimate_energy(&s, Measurement::Shots { shots: 1_000_000, seed: 17 }).unwrap().h_expect;
        assert!((exact - sampled).abs() < 0.01, "{exact} vs {sampled}");
    }

    #[test]
    fn corrections() {
        let pts = [(6.0, -1.0), (2.0, -1.5)];
        let c = apply_energy_correction(&pts, Method::I, 0.063).unwrap();
        assert_eq!(c[0], (6.0, -1.0 - 0.063 * 6.0));
        let c = apply_energy_correction(&pts, Method::II, 0.58).unwrap();
        assert_eq!(c, vec![(6.0, -1.0 - 0.58), (2.0, -1.5 - 0.58)]);
        assert_eq!(apply_energy_correction(&pts, Method::II, 0.0).unwrap(), pts.to_vec());
        assert!(apply_energy_correction(&[], Method::I, 0.1).is_err());
    }

    #[test]
    fn reference_run_has_no_interaction() {
        let r = TrotterSchedule::method_ii_reference(0.25).unwrap();
        assert!((1..=5).all(|m| r.step_angle(m) == 0.0));
        let e = estimate_energy(&r, Measurement::Exact).unwrap();
        assert!((e.h_expect + 2.0).abs() < 1e-12);
        assert!(measure_offset(0.25, Measurement::Exact).unwrap().abs() < 1e-12);
    }
}
