//! Exact single-excitation dynamics of the emitter pair.
//!
//! With `|Φ(t)⟩ = Σ_i α_i(t)|i⟩ + Σ_k β_k(t)|k⟩` the bath amplitudes can be
//! eliminated, leaving
//! `α̇_i + iω₀α_i + Σ_j ∫₀ᵗ f_ij(t − τ) α_j(τ) dτ = 0`.

mod kernel;
mod laplace;
mod steady;
mod volterra;

use serde::Serialize;

pub use kernel::{memory_kernel, mode_sum, MemoryKernel};
pub use laplace::{laplace_amplitude, locate_pole, pole_residues, PoleAnalysis};
pub use steady::{
    arrival_time, revival_time, steady_estimate, steady_state_prediction, SteadyEstimate, SteadyStatePrediction,
    WindowStats, REVIVAL_FRACTION,
};
pub use volterra::{check_step, solve_amplitudes, step_error_estimate, SolverBasis, STEP_ERROR_LIMIT};

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::markovian::EmitterPair;
use crate::scalar::{lit, to_f64, Cplx, Real};

/// Sampled emitter amplitudes with the derived population and concurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub t_grid: Vec<T>,
    pub alpha1: Vec<Cplx<T>>,
    pub alpha2: Vec<Cplx<T>>,
    pub population: Vec<T>,
    pub concurrence: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(t_grid: Vec<T>, alpha1: Vec<Cplx<T>>, alpha2: Vec<Cplx<T>>) -> Self {
        let (population, concurrence) = observables(&alpha1, &alpha2);
        Self { t_grid, alpha1, alpha2, population, concurrence }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    /// Every `every`-th sample, always keeping the last one.
    pub fn subsample(&self, every: usize) -> Self {
        let every = every.max(1);
        let mut idx: Vec<usize> = (0..self.len()).step_by(every).collect();
        if idx.last() != Some(&(self.len() - 1)) {
            idx.push(self.len() - 1);
        }
        let pick = |v: &Vec<Cplx<T>>| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::new(idx.iter().map(|&i| self.t_grid[i]).collect(), pick(&self.alpha1), pick(&self.alpha2))
    }

    /// Sample index closest to `t`.
    pub fn index_at(&self, t: T) -> usize {
        let mut best = 0;
        for (i, &s) in self.t_grid.iter().enumerate() {
            if (s - t).abs() < (self.t_grid[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

/// `P_t = |α₁|² + |α₂|²` and `C_t = 2|α₁α₂|`.
pub fn observables<T: Real>(alpha1: &[Cplx<T>], alpha2: &[Cplx<T>]) -> (Vec<T>, Vec<T>) {
    alpha1
        .iter()
        .zip(alpha2)
        .map(|(a, b)| {
            let (p1, p2) = (a.norm_sqr(), b.norm_sqr());
            (p1 + p2, lit::<T>(2.0) * (p1 * p2).sqrt())
        })
        .unzip()
}

/// Solver settings for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSettings<T> {
    pub horizon: T,
    pub step: T,
    pub basis: SolverBasis,
    /// Length of the window used for the half-step test.
    pub probe_window: T,
    /// Number of times the step may be halved before giving up.
    pub max_halvings: u32,
}

impl<T: Real> SimulationSettings<T> {
    pub fn new(horizon: T, step: T) -> Self {
        Self { horizon, step, basis: SolverBasis::Decoupled, probe_window: lit(40.0), max_halvings: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation<T: Real> {
    pub trajectory: Trajectory<T>,
    /// Step actually used after halving.
    pub step: T,
    pub step_error: T,
    pub revival_risk: bool,
}

/// Builds the kernel, halves the step until the half-step test passes and
/// integrates to the horizon.
pub fn simulate<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, settings: &SimulationSettings<T>) -> Result<Simulation<T>> {
    if !(settings.horizon > T::zero()) || !(settings.step > T::zero()) || settings.step > settings.horizon {
        return Err(Error::BadTimeGrid);
    }
    let mut step = settings.step;
    let mut halvings = 0;
    loop {
        let steps = (settings.horizon / step).round().to_usize().ok_or(Error::BadTimeGrid)?;
        let probe = settings.probe_window.min(settings.horizon);
        let probe_steps = ((probe / step).round().to_usize().unwrap_or(2)).max(2);
        let probe_kernel = memory_kernel(bath, em, step, probe_steps + 1)?;
        match check_step(&probe_kernel, em, probe, settings.basis) {
            Ok(step_error) => {
                let kernel = memory_kernel(bath, em, step, steps + 1)?;
                let trajectory = solve_amplitudes(&kernel, em, steps, settings.basis)?;
                return Ok(Simulation {
                    trajectory,
                    step,
                    step_error,
                    revival_risk: settings.horizon > revival_time(bath),
                });
            }
            Err(Error::StepTooLarge { .. }) if halvings < settings.max_halvings => {
                step *= lit(0.5);
                halvings += 1;
            }
            Err(e) => return Err(e),
        }
        debug_assert!(to_f64(step) > 0.0);
    }
}
