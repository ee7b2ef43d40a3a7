//! Trotter-error and resource scaling: ε_R2, ε_Ψ, circuit depth, and
//! log-log least-squares fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{build_prep_circuit, trotter_step, TrotterSchedule};
use crate::compiler::{lower_circuit, SignParams};
use crate::error::{Result, SimError};
use crate::gate::Gate;
use crate::hubbard::{exact_ground_state, subsystem_purity, HubbardParams};
use crate::state::StateVector;

/// Interaction reached by the depth scans.
pub const DEPTH_TARGET_U: f64 = 10.0;
pub const DEFAULT_FIXED_DELTA: f64 = 0.05;
pub const DEFAULT_FIXED_TAU: f64 = 10.0;

/// Geometric τ grid at δ = 0.05. Over most of this range the Trotter error
/// floor dominates, so it is not suited to isolating the nonadiabatic slope.
pub const REFERENCE_TAU_GRID: [f64; 8] = [2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 35.0, 50.0];
/// Geometric δ grid at τ = 10; the small-δ end sits on the nonadiabatic floor.
pub const REFERENCE_DELTA_GRID: [f64; 7] = [0.02, 0.03, 0.05, 0.08, 0.12, 0.2, 0.3];

/// τ window at δ = 0.05 where the nonadiabatic error dominates.
pub const EPSILON_TAU_WINDOW: [f64; 6] = [1.0, 1.5, 2.0, 3.0, 4.0, 5.0];
/// δ window at τ = 10 where the Trotter error dominates.
pub const EPSILON_DELTA_WINDOW: [f64; 10] = [0.05, 0.08, 0.1, 0.12, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    /// δ or τ.
    pub parameter: f64,
    /// ε_R2, ε_Ψ or depth.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Interaction grid `start, start+step, …, stop` (inclusive up to rounding).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for UGrid {
    fn default() -> Self {
        Self { start: 0.0, stop: 10.0, step: 0.1 }
    }
}

impl UGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) || self.start < 0.0 {
            return Err(SimError::InvalidParameter(format!("bad U grid {self:?}")));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

/// Per-grid-point comparison between the Trotterized and exact ground states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridComparison {
    pub u: f64,
    pub r2_exact: f64,
    pub r2_sim: f64,
    /// `|⟨Ψ_exact|Ψ_sim⟩|²`.
    pub overlap: f64,
}

/// Fixed-`δ`, fixed-`τ` evolution to every interaction in `grid`.
///
/// The step angles do not depend on the target `U`, so all targets lie on a
/// single trajectory; the state is recorded after `round(Uτ/δ)` steps.
pub fn sweep(delta: f64, tau: f64, grid: &UGrid) -> Result<Vec<GridComparison>> {
    let us = grid.values()?;
    let schedules: Vec<TrotterSchedule> =
        us.iter().map(|&u| TrotterSchedule::method_i_rounded(u, delta, tau)).collect::<Result<_>>()?;
    let max_steps = schedules.iter().map(|s| s.n_steps).max().unwrap_or(0);
    let reference = TrotterSchedule::method_i_rounded(0.0, delta, tau)?;
    let mut order: Vec<usize> = (0..us.len()).collect();
    order.sort_by_key(|&i| schedules[i].n_steps);

    let mut psi = StateVector::zero(2)?;
    psi.apply_all(&[Gate::H { target: 0 }, Gate::H { target: 1 }])?;
    let mut states: Vec<Option<StateVector>> = vec![None; us.len()];
    let mut next = order.iter().peekable();
    for m in 0..=max_steps {
        if m > 0 {
            psi.apply_all(&trotter_step(&reference, m, 0, 1))?;
        }
        while let Some(&&i) = next.peek() {
            if schedules[i].n_steps != m {
                break;
            }
            states[i] = Some(psi.clone());
            next.next();
        }
    }

    us.par_iter()
        .zip(states.into_par_iter())
        .map(|(&u, sim)| {
            let sim = sim.expect("every grid point is reached");
            let exact = exact_ground_state(HubbardParams::new(u))?.ground_state;
            Ok(GridComparison {
                u,
                r2_exact: subsystem_purity(&exact),
                r2_sim: subsystem_purity(&sim),
                overlap: exact.overlap_sqr(&sim)?,
            })
        })
        .collect()
}

/// `mean (R2_exact − R2_sim)² / R2_exact` over the rows.
pub fn epsilon_r2_of(rows: &[GridComparison]) -> Result<f64> {
    if rows.is_empty() {
        return Err(SimError::EmptyInput("U grid"));
    }
    Ok(rows.iter().map(|r| (r.r2_exact - r.r2_sim).powi(2) / r.r2_exact).sum::<f64>() / rows.len() as f64)
}

/// `mean 1 − |⟨Ψ_exact|Ψ_sim⟩|²` over the rows.
pub fn epsilon_psi_of(rows: &[GridComparison]) -> Result<f64> {
    if rows.is_empty() {
        return Err(SimError::EmptyInput("U grid"));
    }
    Ok(rows.iter().map(|r| (1.0 - r.overlap).max(0.0)).sum::<f64>() / rows.len() as f64)
}

pub fn epsilon_r2(delta: f64, tau: f64, grid: &UGrid) -> Result<f64> {
    epsilon_r2_of(&sweep(delta, tau, grid)?)
}

pub fn epsilon_psi(delta: f64, tau: f64, grid: &UGrid) -> Result<f64> {
    epsilon_psi_of(&sweep(delta, tau, grid)?)
}

/// Which metric a scan records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    EpsilonR2,
    EpsilonPsi,
}

/// Which schedule parameter a scan varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanParameter {
    Delta,
    Tau,
}

impl ScanParameter {
    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::Delta => "delta",
            ScanParameter::Tau => "tau",
        }
    }

    fn split(self, value: f64, fixed: f64) -> (f64, f64) {
        match self {
            ScanParameter::Delta => (value, fixed),
            ScanParameter::Tau => (fixed, value),
        }
    }
}

/// ε_R2 or ε_Ψ at each value of the varied parameter (grid points run in parallel).
pub fn epsilon_scan(
    metric: Metric,
    vary: ScanParameter,
    values: &[f64],
    fixed: f64,
    grid: &UGrid,
) -> Result<Vec<ScalingPoint>> {
    values
        .par_iter()
        .map(|&v| {
            let (delta, tau) = vary.split(v, fixed);
            let rows = sweep(delta, tau, grid)?;
            let value = match metric {
                Metric::EpsilonR2 => epsilon_r2_of(&rows)?,
                Metric::EpsilonPsi => epsilon_psi_of(&rows)?,
            };
            Ok(ScalingPoint { parameter: v, value })
        })
        .collect()
}

/// Parallel depth (Rz excluded) of the lowered preparation circuit reaching `U = 10`.
pub fn depth_scan(vary: ScanParameter, values: &[f64], fixed: f64) -> Result<Vec<ScalingPoint>> {
    values
        .par_iter()
        .map(|&v| {
            let (delta, tau) = vary.split(v, fixed);
            let schedule = TrotterSchedule::method_i_rounded(DEPTH_TARGET_U, delta, tau)?;
            let lowered = lower_circuit(&build_prep_circuit(&schedule)?, SignParams::default())?;
            Ok(ScalingPoint { parameter: v, value: lowered.depth as f64 })
        })
        .collect()
}

/// Ordinary least squares of `ln value` against `ln parameter`.
pub fn loglog_fit(points: &[ScalingPoint]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(SimError::InvalidParameter(format!("log-log fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.parameter > 0.0 && p.value > 0.0)) {
        return Err(SimError::InvalidParameter(format!(
            "log-log fit needs positive data, got ({}, {})",
            p.parameter, p.value
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.parameter.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::InvalidParameter("log-log fit needs distinct parameters".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::prepare_state;
    use crate::renyi::{estimate_r2_from_distribution, swap_test_state};

    fn pts(f: impl Fn(f64) -> f64) -> Vec<ScalingPoint> {
        [0.5, 1.0, 2.0, 4.0, 7.0].iter().map(|&x| ScalingPoint { parameter: x, value: f(x) }).collect()
    }

    #[test]
    fn fit_examples() {
        let f = loglog_fit(&pts(|x| x * x)).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!((loglog_fit(&pts(|x| 5.0 / x)).unwrap().slope + 1.0).abs() < 1e-12);
        // Scatter tied to the point index, so rescaling leaves it unchanged.
        let noisy: Vec<_> = pts(|x| x.powf(1.3))
            .into_iter()
            .enumerate()
            .map(|(i, p)| ScalingPoint { value: p.value * (1.0 + 0.1 * (i as f64).sin()), ..p })
            .collect();
        let scaled: Vec<_> =
            noisy.iter().map(|p| ScalingPoint { parameter: 3.0 * p.parameter, value: 0.2 * p.value }).collect();
        let (a, b) = (loglog_fit(&noisy).unwrap(), loglog_fit(&scaled).unwrap());
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((a.intercept - b.intercept).abs() > 1e-3);
    }

    #[test]
    fn fit_errors() {
        assert!(loglog_fit(&pts(|x| x)[..2]).is_err());
        assert!(loglog_fit(&pts(|x| x - 1.0)).is_err());
    }

    #[test]
    fn grid_default_has_101_points() {
        let v = UGrid::default().values().unwrap();
        assert_eq!(v.len(), 101);
        assert!((v[100] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_matches_independent_evolution() {
        let grid = UGrid { start: 0.0, stop: 3.0, step: 0.7 };
        let rows = sweep(0.1, 1.3, &grid).unwrap();
        for r in &rows {
            let s = TrotterSchedule::method_i_rounded(r.u, 0.1, 1.3).unwrap();
            let psi = prepare_state(&s).unwrap();
            assert!((subsystem_purity(&psi) - r.r2_sim).abs() < 1e-12);
            // Purity and noiseless swap-test expectation agree pointwise.
            let probs = swap_test_state(&psi, true).unwrap().probabilities();
            let via_swap = estimate_r2_from_distribution(&probs, 1.0, false).unwrap().r2.unwrap();
            assert!((via_swap - r.r2_sim).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilons_vanish_in_adiabatic_limit() {
        let grid = UGrid::default();
        let e = epsilon_r2(0.005, 50.0, &grid).unwrap();
        assert!((0.0..1e-4).contains(&e), "{e}");
        assert!(epsilon_psi(0.005, 50.0, &grid).unwrap() < epsilon_psi(0.1, 2.0, &grid).unwrap());
    }

    #[test]
    fn depth_grows_with_tau() {
        let d = depth_scan(ScanParameter::Tau, &[1.0, 2.0, 4.0], 0.05).unwrap();
        assert!(d.windows(2).all(|w| w[1].value >= w[0].value));
        assert!(d.iter().all(|p| p.value.fract() == 0.0 && p.value > 0.0));
        let per_step = (d[2].value - d[1].value) / 400.0;
        assert!((d[1].value - d[0].value - 200.0 * per_step).abs() < 1e-9);
    }
}
