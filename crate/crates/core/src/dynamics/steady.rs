use serde::Serialize;

use crate::bath::BathModel;
use crate::boundstate::{dfs_density_matrix, DfsReport};
use crate::error::{Error, Result};
use crate::scalar::{from_int, lit, real, Real};
use crate::sector::SectorDensityMatrix;

/// Fraction of the ring a wavefront may cross before the run is flagged.
pub const REVIVAL_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStatePrediction<T: Real> {
    pub rho: SectorDensityMatrix<T>,
    pub population: T,
    pub concurrence: T,
}

/// `ρ(∞) = (|C|²/2) ρ_DFS + (1 − |C|²/2)|0,0⟩⟨0,0|`, or the ground state
/// when there is no bound state.
pub fn steady_state_prediction<T: Real>(report: &DfsReport<T>) -> SteadyStatePrediction<T> {
    let Ok(dfs) = dfs_density_matrix(report) else {
        return SteadyStatePrediction {
            rho: SectorDensityMatrix::ground(),
            population: T::zero(),
            concurrence: T::zero(),
        };
    };
    let c2 = report.weight_c2.unwrap_or(T::zero());
    let w = c2 * lit(0.5);
    let rho = dfs.0 * real(w) + SectorDensityMatrix::<T>::ground().0 * real(T::one() - w);
    let rho = SectorDensityMatrix(rho);
    SteadyStatePrediction { population: rho.excited_population(), concurrence: rho.concurrence(), rho }
}

/// Mean, spread and drift of a series over the final window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats<T> {
    pub mean: T,
    pub std: T,
    /// Final-window mean minus the mean of the window before it.
    pub drift: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyEstimate<T> {
    pub window_start: T,
    pub window_end: T,
    pub population: WindowStats<T>,
    pub concurrence: WindowStats<T>,
}

fn mean_std<T: Real>(xs: &[T]) -> (T, T) {
    let n = from_int::<T>(xs.len() as i64);
    let mean = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let var = xs.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / n;
    (mean, var.sqrt())
}

fn window_stats<T: Real>(xs: &[T], width: usize) -> WindowStats<T> {
    let n = xs.len();
    let (mean, std) = mean_std(&xs[n - width..]);
    let prev_start = n.saturating_sub(2 * width);
    let (prev, _) = mean_std(&xs[prev_start..n - width]);
    WindowStats { mean, std, drift: mean - prev }
}

/// Steady-state estimate from the last `fraction` of the samples.
pub fn steady_estimate<T: Real>(t_grid: &[T], population: &[T], concurrence: &[T], fraction: T) -> Result<SteadyEstimate<T>> {
    let n = t_grid.len();
    let width = (from_int::<T>(n as i64) * fraction).floor().to_usize().unwrap_or(0);
    if width == 0 || 2 * width > n || population.len() != n || concurrence.len() != n {
        return Err(Error::BadTimeGrid);
    }
    Ok(SteadyEstimate {
        window_start: t_grid[n - width],
        window_end: t_grid[n - 1],
        population: window_stats(population, width),
        concurrence: window_stats(concurrence, width),
    })
}

/// Time after which radiation wrapping around the ring may return:
/// `0.4·N·x0 / v_max`.
pub fn revival_time<T: Real>(bath: &BathModel<T>) -> T {
    lit::<T>(REVIVAL_FRACTION) * from_int::<T>(bath.n_modes as i64) * bath.x0 / bath.max_group_velocity()
}

/// Earliest arrival of a signal across `separation` sites: `|Δm| x0 / v_max`.
pub fn arrival_time<T: Real>(bath: &BathModel<T>, separation: i64) -> T {
    from_int::<T>(separation.abs()) * bath.x0 / bath.max_group_velocity()
}
