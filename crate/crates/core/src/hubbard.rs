//! Two-site Fermi-Hubbard dimer in the first-quantized two-qubit encoding.
//!
//! Basis `|σ↑ σ↓⟩`: the first qubit holds the site of the up electron, the
//! second the site of the down electron. With the hopping fixed to `t = 1`,
//! the qubit Hamiltonian is `−(X⊗I + I⊗X) + (U/2) Z⊗Z`.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::state::StateVector;

/// Below this spectral gap the ground level is treated as degenerate.
const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardParams {
    /// On-site interaction in units of the hopping.
    pub u: f64,
}

impl HubbardParams {
    pub fn new(u: f64) -> Self {
        Self { u }
    }

    /// Hopping strength; energies are measured in units of it.
    pub fn t(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    pub ground_state: StateVector,
    pub ground_energy: f64,
}

/// `−(X⊗I + I⊗X) + (U/2) Z⊗Z` in the computational basis.
pub fn qubit_hamiltonian(params: HubbardParams) -> Matrix4<f64> {
    let d = params.u / 2.0;
    let t = params.t();
    Matrix4::new(
        d, -t, -t, 0.0, //
        -t, -d, 0.0, -t, //
        -t, 0.0, -d, -t, //
        0.0, -t, -t, d,
    )
}

/// The dimer Hamiltonian over the four Slater determinants
/// `{1↑1↓, 1↑2↓, 2↑1↓, 2↑2↓}`. Differs from [`qubit_hamiltonian`] by `U/2`.
pub fn slater_hamiltonian(params: HubbardParams) -> Matrix4<f64> {
    let (u, t) = (params.u, params.t());
    Matrix4::new(
        u, -t, -t, 0.0, //
        -t, 0.0, 0.0, -t, //
        -t, 0.0, 0.0, -t, //
        0.0, -t, -t, u,
    )
}

/// Closed-form ground energy `(U − √(U² + 16)) / 2` of [`slater_hamiltonian`].
pub fn slater_ground_energy(u: f64) -> f64 {
    (u - (u * u + 16.0).sqrt()) / 2.0
}

/// Closed-form ground energy `−√(U² + 16) / 2` of [`qubit_hamiltonian`]:
/// the Slater value shifted by `−U/2`.
pub fn ground_energy(u: f64) -> f64 {
    slater_ground_energy(u) - u / 2.0
}

pub fn exact_ground_state(params: HubbardParams) -> Result<SpectralResult> {
    let eig = SymmetricEigen::new(qubit_hamiltonian(params));
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = [0, 1, 2, 3].map(|k| eig.eigenvalues[order[k]]);
    let gap = eigenvalues[1] - eigenvalues[0];
    if gap < DEGENERACY_GAP {
        return Err(SimError::DegenerateGround { gap });
    }
    let column = eig.eigenvectors.column(order[0]);
    let pivot = column.iter().copied().find(|a| a.abs() > 1e-12).unwrap_or(1.0);
    let sign = pivot.signum();
    let amplitudes = column.iter().map(|&a| Complex64::new(sign * a, 0.0)).collect();
    Ok(SpectralResult {
        eigenvalues,
        ground_state: StateVector::normalized(amplitudes)?,
        ground_energy: eigenvalues[0],
    })
}

/// `Tr(ρ_A²)` with subsystem A the first qubit (qubit 0) of `state` and B the rest.
pub fn subsystem_purity(state: &StateVector) -> f64 {
    let half = state.dim() / 2;
    let amps = state.amplitudes();
    let (upper, lower) = amps.split_at(half);
    let r00: f64 = upper.iter().map(|a| a.norm_sqr()).sum();
    let r11: f64 = lower.iter().map(|a| a.norm_sqr()).sum();
    let r01: Complex64 = upper.iter().zip(lower).map(|(a, b)| a * b.conj()).sum();
    r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr()
}

/// Second Renyi purity `Tr(ρ_A²)` of the exact ground state.
pub fn exact_r2(params: HubbardParams) -> Result<f64> {
    Ok(subsystem_purity(&exact_ground_state(params)?.ground_state))
}
