//! Born–Markov description of the two emitters: collective decay matrix,
//! environment-induced shifts, the Markovian decoherence-free criterion and
//! Lindblad propagation in the single-excitation sector.

use nalgebra::Matrix2;

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::quad::principal_value_zone;
use crate::scalar::{from_int, imag, lit, real, to_f64, Real};
use crate::sector::{BranchSign, SectorDensityMatrix, SectorOperator, EXCITED_1, EXCITED_2, GROUND};

/// Relative tolerance of the Lamb-shift principal-value quadrature.
const LAMB_SHIFT_TOL: f64 = 1e-10;

/// Default tolerance for deciding that `k(ω₀)Δm/π` is an integer.
pub const DEFAULT_INTEGER_TOL: f64 = 1e-9;

/// Two identical emitters in cavities `site1` and `site2` of the ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterPair<T> {
    pub omega0: T,
    pub g: T,
    pub site1: i64,
    pub site2: i64,
}

impl<T: Real> EmitterPair<T> {
    pub fn new(omega0: T, g: T, site1: i64, site2: i64) -> Result<Self> {
        if !(g >= T::zero()) || !g.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling g must be >= 0, got {g}")));
        }
        if !omega0.is_finite() {
            return Err(Error::InvalidParameter("omega0 must be finite".into()));
        }
        Ok(Self { omega0, g, site1, site2 })
    }

    /// Emitters `separation` cavities apart, the lower one in cavity 1.
    pub fn separated(omega0: T, g: T, separation: i64) -> Result<Self> {
        if separation >= 0 {
            Self::new(omega0, g, 1 + separation, 1)
        } else {
            Self::new(omega0, g, 1, 1 - separation)
        }
    }

    /// `Δm = m₁ − m₂`.
    pub fn separation(&self) -> i64 {
        self.site1 - self.site2
    }
}

/// Collective decay rates `γ_ij` and coherent shifts `Ω_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovianRates<T: Real> {
    pub gamma: Matrix2<T>,
    pub omega_shift: Matrix2<T>,
    /// False when `ω₀` has no resonant bath modes (band gap); `gamma` is zero.
    pub resonant: bool,
}

impl<T: Real> MarkovianRates<T> {
    pub fn new(gamma: Matrix2<T>, omega_shift: Matrix2<T>) -> Self {
        Self { gamma, omega_shift, resonant: gamma[(0, 0)] > T::zero() }
    }

    /// Eigenvalues `γ₁₁ ± γ₁₂` of the decay matrix, smallest first.
    pub fn gamma_eigenvalues(&self) -> (T, T) {
        let a = self.gamma[(0, 0)];
        let b = self.gamma[(0, 1)];
        ((a - b.abs()), (a + b.abs()))
    }
}

/// `γ_ij = 2π Σ_k g_k² e^{ik(r_i − r_j)} δ(ω₀ − ω_k)` in the continuum limit,
/// summed over every resonant branch.
pub fn decay_matrix<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<Matrix2<T>> {
    if !bath.in_band(em.omega0) {
        let (lo, hi) = bath.band_edges();
        if em.omega0 == lo || em.omega0 == hi {
            return Err(Error::BandEdge { omega: to_f64(em.omega0) });
        }
        return Ok(Matrix2::zeros());
    }
    let dm = from_int::<T>(em.separation());
    let g2 = em.g * em.g;
    let mut self_rate = T::zero();
    let mut cross_rate = T::zero();
    for (k, v) in bath.resonant_branches(em.omega0)? {
        let w = g2 * bath.x0 / v;
        self_rate += w;
        cross_rate += w * (k * dm * bath.x0).cos();
    }
    Ok(Matrix2::new(self_rate, cross_rate, cross_rate, self_rate))
}

/// `Ω_ij = 𝒫 Σ_k g_k² e^{ik(r_i − r_j)} / (ω_k − ω₀)` in the continuum limit.
pub fn lamb_shifts<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<Matrix2<T>> {
    let g2 = em.g * em.g;
    if g2 == T::zero() {
        return Ok(Matrix2::zeros());
    }
    let dm = from_int::<T>(em.separation());
    let tol = lit::<T>(LAMB_SHIFT_TOL);
    let on_site = -g2 * principal_value_zone(bath, em.omega0, |_| T::one(), tol)?;
    let cross = -g2 * principal_value_zone(bath, em.omega0, |p| (p * dm).cos(), tol)?;
    Ok(Matrix2::new(on_site, cross, cross, on_site))
}

pub fn markovian_rates<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<MarkovianRates<T>> {
    let gamma = decay_matrix(bath, em)?;
    let omega_shift = lamb_shifts(bath, em)?;
    Ok(MarkovianRates { gamma, omega_shift, resonant: bath.in_band(em.omega0) })
}

/// Verdict of the Born–Markov decoherence-free criterion `k(ω₀)·R = lπ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BmaDfsReport<T: Real> {
    pub exists: bool,
    pub l: Option<i64>,
    pub sign: Option<BranchSign>,
    /// `k_b Δm x0 / π` for every resonant wavevector.
    pub orders: Vec<T>,
    /// `|Ψ⟩± ⟨Ψ|` when the state exists.
    pub projector: Option<SectorDensityMatrix<T>>,
}

/// Rounds `x` when it is an integer within `tol` (relative above 1).
pub(crate) fn as_integer<T: Real>(x: T, tol: T) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= tol * x.abs().max(T::one()) {
        r.to_i64()
    } else {
        None
    }
}

/// All resonant wavevectors of `ω₀` must satisfy the criterion with orders of
/// one parity, otherwise `γ₁₂ ≠ ±γ₁₁`.
pub fn bma_dfs_criterion<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, tol: T) -> BmaDfsReport<T> {
    let absent = |orders| BmaDfsReport { exists: false, l: None, sign: None, orders, projector: None };
    if !bath.in_band(em.omega0) {
        return absent(Vec::new());
    }
    let dm = from_int::<T>(em.separation());
    let ks = bath.degenerate_wavevectors(em.omega0, lit(1e-13));
    let orders: Vec<T> = ks.iter().map(|&k| k * dm * bath.x0 / T::pi()).collect();
    let ints: Option<Vec<i64>> = orders.iter().map(|&x| as_integer(x, tol)).collect();
    let Some(ints) = ints else {
        return absent(orders);
    };
    if ints.is_empty() || ints.iter().any(|l| (l - ints[0]).rem_euclid(2) != 0) {
        return absent(orders);
    }
    // Report the order of the smallest non-negative resonant wavevector.
    let l = ks
        .iter()
        .zip(&ints)
        .filter(|(k, _)| **k >= T::zero())
        .min_by(|a, b| a.0.partial_cmp(b.0).unwrap())
        .map(|(_, l)| *l)
        .unwrap_or(ints[0]);
    let sign = BranchSign::from_order(l);
    BmaDfsReport {
        exists: true,
        l: Some(l),
        sign: Some(sign),
        orders,
        projector: Some(SectorDensityMatrix::bell_state(sign)),
    }
}

/// Lowering operator of emitter `j` (0 or 1) inside the sector.
fn lowering<T: Real>(j: usize) -> SectorOperator<T> {
    let mut m = SectorOperator::<T>::zeros();
    m[(GROUND, if j == 0 { EXCITED_1 } else { EXCITED_2 })] = real(T::one());
    m
}

fn sector_hamiltonian<T: Real>(rates: &MarkovianRates<T>, omega0: T) -> SectorOperator<T> {
    let mut h = SectorOperator::<T>::zeros();
    h[(EXCITED_1, EXCITED_1)] = real(omega0 + rates.omega_shift[(0, 0)]);
    h[(EXCITED_2, EXCITED_2)] = real(omega0 + rates.omega_shift[(1, 1)]);
    h[(EXCITED_1, EXCITED_2)] = real(rates.omega_shift[(0, 1)]);
    h[(EXCITED_2, EXCITED_1)] = real(rates.omega_shift[(1, 0)]);
    h
}

/// Generator action `𝓛ρ`: coherent part with shifted frequencies and the
/// exchange coupling `Ω₁₂`, plus the collective dissipator
/// `Σ_ij γ_ij/2 (2 O_j ρ O_i† − {O_i† O_j, ρ})`.
pub fn lindblad_apply<T: Real>(rates: &MarkovianRates<T>, omega0: T, rho: &SectorOperator<T>) -> SectorOperator<T> {
    let h = sector_hamiltonian(rates, omega0);
    let mut out = (h * rho - rho * h) * imag(-T::one());
    let ops = [lowering::<T>(0), lowering::<T>(1)];
    let half = lit::<T>(0.5);
    for i in 0..2 {
        let oi_dag = ops[i].adjoint();
        for j in 0..2 {
            let gij = rates.gamma[(i, j)];
            if gij == T::zero() {
                continue;
            }
            let oj = &ops[j];
            let anti = oi_dag * oj;
            let term = oj * rho * oi_dag * real(lit::<T>(2.0)) - anti * rho - rho * anti;
            out += term * real(gij * half);
        }
    }
    out
}

/// Fixed-step RK4 propagation of the master equation over a uniform grid.
///
/// Each grid interval is subdivided so that `|λ|·dt ≤ 0.05` for the fastest
/// scale of the generator. Fails when the state leaves the positive cone by
/// more than `1e-8`.
pub fn lindblad_propagate<T: Real>(
    rates: &MarkovianRates<T>,
    omega0: T,
    rho0: &SectorDensityMatrix<T>,
    t_grid: &[T],
) -> Result<Vec<SectorDensityMatrix<T>>> {
    if t_grid.is_empty() {
        return Err(Error::BadTimeGrid);
    }
    let step = if t_grid.len() > 1 { t_grid[1] - t_grid[0] } else { T::zero() };
    for w in t_grid.windows(2) {
        if ((w[1] - w[0]) - step).abs() > lit::<T>(1e-9) * step.abs().max(T::one()) || !(step > T::zero()) {
            return Err(Error::BadTimeGrid);
        }
    }
    let scale = omega0.abs()
        + rates.omega_shift.iter().fold(T::zero(), |a, &b| a + b.abs())
        + rates.gamma.iter().fold(T::zero(), |a, &b| a + b.abs());
    let substeps = if step > T::zero() {
        (step * scale / lit::<T>(0.05)).ceil().to_usize().unwrap_or(1).max(1)
    } else {
        1
    };
    let dt = step / from_int::<T>(substeps as i64);
    let half_dt = real(dt * lit::<T>(0.5));
    let dt_c = real(dt);
    let sixth = real(dt / lit::<T>(6.0));
    let two = real(lit::<T>(2.0));
    let positivity_floor = lit::<T>(-1e-8);

    let mut rho = rho0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(rho0.clone());
    for (n, &t) in t_grid.iter().enumerate().skip(1) {
        for _ in 0..substeps {
            let k1 = lindblad_apply(rates, omega0, &rho);
            let k2 = lindblad_apply(rates, omega0, &(rho + k1 * half_dt));
            let k3 = lindblad_apply(rates, omega0, &(rho + k2 * half_dt));
            let k4 = lindblad_apply(rates, omega0, &(rho + k3 * dt_c));
            rho += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
        let state = SectorDensityMatrix(rho);
        let min_eig = state.min_eigenvalue();
        if min_eig < positivity_floor {
            return Err(Error::PositivityViolated { time: to_f64(t), min_eigenvalue: to_f64(min_eig) });
        }
        debug_assert!(n < t_grid.len());
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathModel;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn nn() -> BathModel<f64> {
        BathModel::nearest_neighbor(0.2, 1201).unwrap()
    }

    /// Lorentzian-broadened discrete mode sum, an independent route to γ.
    fn broadened_gamma(omega0: f64, g: f64, dm: i64, n: usize, width: f64) -> (f64, f64) {
        let bath = BathModel::nearest_neighbor(0.2, n).unwrap();
        let grid = bath.mode_grid(g).unwrap();
        let g2 = grid.coupling_scale.powi(2);
        let (mut s, mut c) = (0.0, 0.0);
        for (k, w) in grid.wavevectors.iter().zip(&grid.frequencies) {
            let l = width / PI / ((omega0 - w).powi(2) + width * width);
            s += 2.0 * PI * g2 * l;
            c += 2.0 * PI * g2 * l * (k * dm as f64).cos();
        }
        (s, c)
    }

    #[test]
    fn decay_matrix_band_center() {
        let em = EmitterPair::separated(1.0, 0.05, 2).unwrap();
        let gamma = decay_matrix(&nn(), &em).unwrap();
        assert_relative_eq!(gamma[(0, 0)], 0.0125, max_relative = 1e-12);
        assert_relative_eq!(gamma[(0, 1)], -0.0125, max_relative = 1e-10);
        let em1 = EmitterPair::separated(1.0, 0.05, 1).unwrap();
        let gamma1 = decay_matrix(&nn(), &em1).unwrap();
        assert!(gamma1[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn decay_matrix_matches_broadened_mode_sum() {
        for (w0, dm) in [(1.0, 2), (1.2, 3), (0.85, 1)] {
            let em = EmitterPair::separated(w0, 0.05, dm).unwrap();
            let gamma = decay_matrix(&nn(), &em).unwrap();
            let (s, c) = broadened_gamma(w0, 0.05, dm, 100_001, 1e-3);
            assert_relative_eq!(gamma[(0, 0)], s, max_relative = 1e-2);
            assert!((gamma[(0, 1)] - c).abs() <= 1e-2 * gamma[(0, 0)]);
        }
    }

    #[test]
    fn decay_matrix_out_of_band_is_zero() {
        let em = EmitterPair::separated(1.5, 0.05, 2).unwrap();
        let rates = markovian_rates(&nn(), &em).unwrap();
        assert!(!rates.resonant);
        assert_eq!(rates.gamma, Matrix2::zeros());
        let edge = EmitterPair::separated(1.4, 0.05, 2).unwrap();
        assert!(matches!(decay_matrix(&nn(), &edge), Err(Error::BandEdge { .. })));
    }

    #[test]
    fn gamma_is_positive_semidefinite_across_band() {
        let bath = BathModel::next_nearest_neighbor(0.2, 0.18, 1201).unwrap();
        for b in [nn(), bath] {
            let (lo, hi) = b.band_edges();
            for i in 1..60 {
                let w0 = lo + (hi - lo) * i as f64 / 60.0;
                for dm in 0..7 {
                    let em = EmitterPair::separated(w0, 0.05, dm).unwrap();
                    let Ok(gamma) = decay_matrix(&b, &em) else { continue };
                    assert_eq!(gamma[(0, 0)], gamma[(1, 1)]);
                    assert!(gamma[(0, 1)].abs() <= gamma[(0, 0)] * (1.0 + 1e-12));
                }
            }
        }
    }

    /// Discrete mode sum with the ±k pairs folded onto `(0, π)`. With `M`
    /// divisible by 6 the resonant wavevectors π/2 and π/3 sit on cell
    /// boundaries, midway between nodes, so the sum converges to the
    /// principal value.
    fn paired_mode_sum(omega0: f64, g: f64, dm: f64, m: usize) -> f64 {
        let dk = PI / m as f64;
        (0..m)
            .map(|j| (j as f64 + 0.5) * dk)
            .map(|k| g * g / m as f64 * (k * dm).cos() / (1.0 + 0.4 * k.cos() - omega0))
            .sum()
    }

    #[test]
    fn lamb_shifts_match_paired_discrete_sum() {
        let m = 50_004;
        for (w0, dm) in [(1.2, 0), (1.2, 1), (1.0, 1), (1.0, 2), (1.2, 3)] {
            let em = EmitterPair::separated(w0, 0.05, dm).unwrap();
            let shift = lamb_shifts(&nn(), &em).unwrap();
            let on_site = paired_mode_sum(w0, 0.05, 0.0, m);
            let cross = paired_mode_sum(w0, 0.05, dm as f64, m);
            assert!((shift[(0, 0)] - on_site).abs() < 1e-4 * 0.0025, "{w0} {dm}");
            assert!((shift[(0, 1)] - cross).abs() < 1e-4 * 0.0025, "{w0} {dm}");
        }
    }

    #[test]
    fn lamb_shift_trivial_cases() {
        let em = EmitterPair::separated(1.0, 0.05, 0).unwrap();
        let shift = lamb_shifts(&nn(), &em).unwrap();
        assert!(shift[(0, 0)].abs() < 1e-14);
        let em = EmitterPair::separated(1.2, 0.0, 3).unwrap();
        assert_eq!(lamb_shifts(&nn(), &em).unwrap(), Matrix2::zeros());
        // The nearest-neighbor ring has no on-site shift anywhere in the band.
        let em = EmitterPair::separated(1.2, 0.05, 0).unwrap();
        assert!(lamb_shifts(&nn(), &em).unwrap()[(0, 0)].abs() < 1e-13);
    }

    #[test]
    fn next_nearest_neighbor_on_site_shift_is_finite() {
        let bath = BathModel::next_nearest_neighbor(0.2, 0.18, 1201).unwrap();
        let em = EmitterPair::separated(1.2, 0.05, 0).unwrap();
        let shift = lamb_shifts(&bath, &em).unwrap();
        let v: f64 = shift[(0, 0)];
        assert!(v.is_finite() && shift[(0, 0)] != 0.0);
    }

    #[test]
    fn bma_criterion_examples() {
        let tol = DEFAULT_INTEGER_TOL;
        let r = bma_dfs_criterion(&nn(), &EmitterPair::separated(1.0, 0.05, 2).unwrap(), tol);
        assert!(r.exists);
        assert_eq!(r.l, Some(1));
        assert_eq!(r.sign, Some(BranchSign::Plus));
        let r = bma_dfs_criterion(&nn(), &EmitterPair::separated(1.2, 0.05, 3).unwrap(), tol);
        assert!(r.exists);
        assert_eq!(r.l, Some(1));
        let r = bma_dfs_criterion(&nn(), &EmitterPair::separated(1.0, 0.05, 1).unwrap(), tol);
        assert!(!r.exists);
        let r = bma_dfs_criterion(&nn(), &EmitterPair::separated(1.0, 0.05, 4).unwrap(), tol);
        assert_eq!((r.exists, r.l, r.sign), (true, Some(2), Some(BranchSign::Minus)));
        let r = bma_dfs_criterion(&nn(), &EmitterPair::separated(0.9, 0.05, 0).unwrap(), tol);
        assert_eq!((r.exists, r.l, r.sign), (true, Some(0), Some(BranchSign::Minus)));
    }

    #[test]
    fn bma_criterion_consistent_with_gamma() {
        let tol = DEFAULT_INTEGER_TOL;
        for dm in 0..8 {
            for w0 in [1.0, 1.2, 0.8] {
                let em = EmitterPair::separated(w0, 0.05, dm).unwrap();
                let r = bma_dfs_criterion(&nn(), &em, tol);
                let gamma = decay_matrix(&nn(), &em).unwrap();
                let saturated = (gamma[(0, 1)].abs() - gamma[(0, 0)]).abs() < 1e-9 * gamma[(0, 0)];
                assert_eq!(r.exists, saturated, "w0 {w0} dm {dm}");
                if let Some(sign) = r.sign {
                    // γ₁₂ = −γ₁₁ darkens the symmetric state.
                    assert_eq!(gamma[(0, 1)] < 0.0, sign == BranchSign::Plus);
                }
            }
        }
    }

    fn rates_with(g11: f64, g12: f64, o12: f64) -> MarkovianRates<f64> {
        MarkovianRates {
            gamma: Matrix2::new(g11, g12, g12, g11),
            omega_shift: Matrix2::new(0.003, o12, o12, 0.003),
            resonant: true,
        }
    }

    #[test]
    fn ground_state_is_stationary() {
        let rates = rates_with(0.0125, -0.0125, 0.004);
        let l = lindblad_apply(&rates, 1.0, SectorDensityMatrix::ground().matrix());
        assert!(l.iter().all(|z| z.norm_sqr() == 0.0));
    }

    #[test]
    fn dark_state_is_annihilated() {
        let rates = rates_with(0.0125, -0.0125, 0.0071);
        let rho = SectorDensityMatrix::bell_state(BranchSign::Plus);
        let l = lindblad_apply(&rates, 1.0, rho.matrix());
        assert!(l.norm() < 1e-15);
        let rates = rates_with(0.0125, 0.0125, 0.0071);
        let rho = SectorDensityMatrix::bell_state(BranchSign::Minus);
        assert!(lindblad_apply(&rates, 1.0, rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn bright_state_decays_at_twice_the_rate() {
        let g = 0.0125;
        let rates = rates_with(g, g, 0.0);
        let rho = SectorDensityMatrix::bell_state(BranchSign::Plus);
        let l = lindblad_apply(&rates, 1.0, rho.matrix());
        // d/dt of the excited population of |Ψ+⟩ is −2γ₁₁ at t = 0.
        let dp = l[(1, 1)].re + l[(2, 2)].re;
        assert_relative_eq!(dp, -2.0 * g, max_relative = 1e-14);
        assert_relative_eq!(l[(0, 0)].re, 2.0 * g, max_relative = 1e-14);
    }

    #[test]
    fn propagation_of_independent_decay() {
        let rates = rates_with(0.0125, 0.0, 0.0);
        let rho0 = SectorDensityMatrix::pure([real(0.0), real(1.0), real(0.0)]);
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.5).collect();
        let states = lindblad_propagate(&rates, 1.0, &rho0, &grid).unwrap();
        for (t, s) in grid.iter().zip(&states) {
            assert_relative_eq!(s.matrix()[(1, 1)].re, (-0.0125 * t).exp(), max_relative = 1e-9);
            assert!((s.trace().re - 1.0).abs() < 1e-12);
            assert!(s.hermiticity_error() < 1e-14);
        }
    }

    #[test]
    fn propagation_traps_half_of_the_excitation() {
        let rates = rates_with(0.0125, -0.0125, 0.002);
        let rho0 = SectorDensityMatrix::pure([real(0.0), real(1.0), real(0.0)]);
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 5.0).collect();
        let states = lindblad_propagate(&rates, 1.0, &rho0, &grid).unwrap();
        let last = states.last().unwrap();
        // Bright part decays as e^{-2γ t}; the dark half keeps ρ₁₁ = 1/4.
        assert_relative_eq!(last.matrix()[(1, 1)].re, 0.25, epsilon = 1e-9);
        assert_relative_eq!(last.excited_population(), 0.5, epsilon = 1e-9);
        assert!((last.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_ground_state_propagation() {
        let rates = rates_with(0.0125, 0.003, 0.001);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let states = lindblad_propagate(&rates, 1.0, &SectorDensityMatrix::ground(), &grid).unwrap();
        assert!(states.iter().all(|s| *s == SectorDensityMatrix::ground()));
        assert!(lindblad_propagate(&rates, 1.0, &SectorDensityMatrix::ground(), &[0.0, 1.0, 3.0]).is_err());
    }
}
