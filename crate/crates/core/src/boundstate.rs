//! Bound state in the continuum of the emitter pair and the exact
//! decoherence-free state it carries.
//!
//! In the single-excitation sector an eigenstate `c₁|1,0⟩ + c₂|0,1⟩ + Σ d_k|k⟩`
//! with `c₁ = ±c₂` has energy `E` solving
//! `E − ω₀ − (1/2π)∫dp g²(1 ± cos pΔ)/(E − ω(p) + i0⁺) = 0`. The imaginary part
//! vanishes only if `1 ± cos(k_b Δ) = 0` at every resonant wavevector `k_b`
//! of `E`, and then the state is normalizable and embedded in the band.

use serde::Serialize;

use crate::bath::{BathKind, BathModel};
use crate::error::{Error, Result};
use crate::markovian::{as_integer, EmitterPair, DEFAULT_INTEGER_TOL};
use crate::quad::{principal_value_zone, tanh_sinh};
use crate::scalar::{from_int, lit, to_f64, Real};
pub use crate::sector::BranchSign;
use crate::sector::SectorDensityMatrix;

/// Energies scanned across the band when solving the generic eigenvalue
/// equation.
const SCAN_POINTS: usize = 400;
/// Half-width (in `k x0`) of the window around each resonant wavevector where
/// the weight integrand is replaced by its limit.
const WEIGHT_WINDOW: f64 = 1e-4;
const PV_TOL: f64 = 1e-11;

/// A real root of the principal-value eigenvalue equation on one branch,
/// kept for diagnostics whether or not it is a bound state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicCandidate<T> {
    pub sign: BranchSign,
    pub energy: T,
    /// Largest `1 ± cos(k_b Δ x0)` over the resonant wavevectors.
    pub interference: T,
    pub bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsReport<T> {
    pub exists: bool,
    pub branch_sign: Option<BranchSign>,
    pub l: Option<i64>,
    pub e0: Option<T>,
    /// `|C|²`, the emitter weight of the bound state.
    pub weight_c2: Option<T>,
    /// `|C|⁴/2`.
    pub steady_population: T,
    pub steady_concurrence: T,
    pub candidates: Vec<BicCandidate<T>>,
}

impl<T: Real> DfsReport<T> {
    fn absent(candidates: Vec<BicCandidate<T>>) -> Self {
        Self {
            exists: false,
            branch_sign: None,
            l: None,
            e0: None,
            weight_c2: None,
            steady_population: T::zero(),
            steady_concurrence: T::zero(),
            candidates,
        }
    }

    fn found(sign: BranchSign, l: i64, e0: T, c2: T, candidates: Vec<BicCandidate<T>>) -> Self {
        let steady = c2 * c2 * lit(0.5);
        Self {
            exists: true,
            branch_sign: Some(sign),
            l: Some(l),
            e0: Some(e0),
            weight_c2: Some(c2),
            steady_population: steady,
            steady_concurrence: steady,
            candidates,
        }
    }
}

/// `|C|² = [1 + g²|Δm| / (4ξ² − (ω₀ − ωc)²)]⁻¹` for the nearest-neighbor ring.
pub fn closed_form_weight<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<T> {
    let delta = em.omega0 - bath.omega_c;
    let d = lit::<T>(4.0) * bath.xi * bath.xi - delta * delta;
    if d <= T::zero() {
        return Err(Error::BandEdge { omega: to_f64(em.omega0) });
    }
    let dm = from_int::<T>(em.separation().abs());
    Ok(T::one() / (T::one() + em.g * em.g * dm / d))
}

pub fn bic_solve<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<DfsReport<T>> {
    bic_solve_with(bath, em, lit(DEFAULT_INTEGER_TOL))
}

/// Nearest-neighbor rings use the closed forms (`E₀ = ω₀`); other baths go
/// through [`bic_solve_generic`].
pub fn bic_solve_with<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, tol: T) -> Result<DfsReport<T>> {
    bath.validate()?;
    if bath.kind != BathKind::NearestNeighbor {
        return bic_solve_generic(bath, em, tol);
    }
    if !bath.in_band(em.omega0) {
        return Ok(DfsReport::absent(Vec::new()));
    }
    let delta = (em.omega0 - bath.omega_c) / (lit::<T>(2.0) * bath.xi);
    let dm = em.separation().abs();
    let order = from_int::<T>(dm) * delta.acos() / T::pi();
    let Some(l) = as_integer(order, tol) else {
        return Ok(DfsReport::absent(Vec::new()));
    };
    let c2 = closed_form_weight(bath, em)?;
    Ok(DfsReport::found(BranchSign::from_order(l), l, em.omega0, c2, Vec::new()))
}

/// `E − ω₀ − g² PV(1/2π)∫dp (1 ± cos pΔ)/(E − ω(p))`.
fn eigen_residual<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, sign: BranchSign, e: T) -> Result<T> {
    let dm = from_int::<T>(em.separation());
    let s = lit::<T>(sign.factor());
    let pv = principal_value_zone(bath, e, |p| T::one() + s * (p * dm).cos(), lit(PV_TOL))?;
    Ok(e - em.omega0 - em.g * em.g * pv)
}

/// Largest `1 ± cos(k_b Δ x0)` over the resonant wavevectors of `e`, with the
/// interference order of the principal wavevector.
fn interference<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, sign: BranchSign, e: T) -> (T, T) {
    let dm = from_int::<T>(em.separation());
    let s = lit::<T>(sign.factor());
    let worst = bath
        .degenerate_wavevectors(e, lit(1e-14))
        .into_iter()
        .map(|k| (T::one() + s * (k * bath.x0 * dm).cos()).abs())
        .fold(T::zero(), |a, b| a.max(b));
    let order = bath
        .principal_wavevector(e)
        .map(|k| k * bath.x0 * dm.abs() / T::pi())
        .unwrap_or(lit(f64::NAN));
    (worst, order)
}

/// Scans the band for real roots of the eigenvalue equation on both
/// branches, bisects each sign change to `1e-12` and keeps the roots whose
/// interference factor vanishes at every resonant wavevector.
pub fn bic_solve_generic<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, tol: T) -> Result<DfsReport<T>> {
    bath.validate()?;
    let (lo, hi) = bath.band_edges();
    let critical = bath.critical_frequencies();
    let guard = lit::<T>(1e-6) * (hi - lo);
    let energies: Vec<T> = (1..SCAN_POINTS)
        .map(|j| lo + (hi - lo) * from_int::<T>(j as i64) / from_int::<T>(SCAN_POINTS as i64))
        .filter(|e| critical.iter().all(|c| (*e - *c).abs() > guard))
        .collect();
    let root_tol = lit::<T>(1e-12);
    let mut candidates = Vec::new();
    for sign in [BranchSign::Plus, BranchSign::Minus] {
        let samples: Vec<(T, Option<T>)> = energies
            .iter()
            .map(|&e| (e, eigen_residual(bath, em, sign, e).ok()))
            .collect();
        for pair in samples.windows(2) {
            let ((mut a, Some(mut fa)), (mut b, Some(fb))) = (pair[0], pair[1]) else { continue };
            if fa == T::zero() {
                // Recorded as the right end of the previous pair unless first.
                if a != energies[0] {
                    continue;
                }
                b = a;
            } else if fb != T::zero() && (fa > T::zero()) == (fb > T::zero()) {
                continue;
            } else if fb == T::zero() {
                a = b;
            }
            let mut ok = true;
            while b - a > root_tol {
                let m = (a + b) * lit(0.5);
                if m <= a || m >= b {
                    break;
                }
                let Ok(fm) = eigen_residual(bath, em, sign, m) else {
                    ok = false;
                    break;
                };
                if fm == T::zero() {
                    a = m;
                    b = m;
                } else if (fm > T::zero()) == (fa > T::zero()) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            if !ok {
                continue;
            }
            let e = (a + b) * lit(0.5);
            // A sign change across a divergence of the principal value is
            // not a root.
            match eigen_residual(bath, em, sign, e) {
                Ok(f) if f.abs() <= lit::<T>(1e-8) => {}
                _ => continue,
            }
            let (worst, _) = interference(bath, em, sign, e);
            candidates.push(BicCandidate { sign, energy: e, interference: worst, bound: false });
        }
    }
    let mut chosen = None;
    for c in candidates.iter_mut() {
        let (_, order) = interference(bath, em, c.sign, c.energy);
        let l = as_integer(order, tol);
        let ok = c.interference <= tol && l.is_some_and(|l| BranchSign::from_order(l) == c.sign);
        c.bound = ok;
        if ok && chosen.is_none() {
            chosen = Some((c.sign, l.unwrap(), c.energy));
        }
    }
    let Some((sign, l, e0)) = chosen else {
        return Ok(DfsReport::absent(candidates));
    };
    let c2 = weight_integral(bath, em, e0, sign)?;
    Ok(DfsReport::found(sign, l, e0, c2, candidates))
}

/// `|C|² = [1 + (g²/2π)∫dp (1 ± cos pΔ)/(E₀ − ω(p))²]⁻¹`.
///
/// The integrand has a removable singularity at each resonant wavevector
/// `p_b` when the criterion holds. Each `p_b` is excluded by a window of
/// half-width `1e-4` where the integrand is replaced by its limit
/// `Δ²/(2ω′(p_b)²)`; the gaps between windows are integrated by tanh-sinh.
pub fn weight_integral<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, e0: T, sign: BranchSign) -> Result<T> {
    let g2 = em.g * em.g;
    let dm = from_int::<T>(em.separation());
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    // 1 ± cos x written without cancellation.
    let numerator = |p: T| match sign {
        BranchSign::Plus => two * (p * dm * half).cos().powi(2),
        BranchSign::Minus => two * (p * dm * half).sin().powi(2),
    };
    let integrand = |p: T| {
        let d = e0 - bath.dispersion(p / bath.x0);
        numerator(p) / (d * d)
    };
    if em.separation() == 0 && sign == BranchSign::Minus {
        return Ok(T::one());
    }
    if !bath.in_band(e0) {
        // Ordinary smooth integral; no resonant wavevectors.
        let (lo, hi) = bath.band_edges();
        if e0 == lo || e0 == hi {
            return Err(Error::BandEdge { omega: to_f64(e0) });
        }
        let mean = crate::quad::periodic_mean(integrand, lit(1e-13))?;
        return Ok(T::one() / (T::one() + g2 * mean));
    }
    let branches = bath.resonant_branches(e0)?;
    let mut poles: Vec<(T, T)> = Vec::new();
    for &(k, v) in &branches {
        let factor = numerator(k * bath.x0);
        if factor > lit::<T>(1e-9) {
            return Err(Error::NonIntegrable { e0: to_f64(e0), factor: to_f64(factor) });
        }
        let slope = v / bath.x0;
        poles.push((k * bath.x0, dm * dm / (two * slope * slope)));
    }
    poles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let w = lit::<T>(WEIGHT_WINDOW);
    let tol = lit::<T>(1e-13);
    let mut total = T::zero();
    for (i, &(p, limit)) in poles.iter().enumerate() {
        total += limit * two * w;
        let next = if i + 1 < poles.len() { poles[i + 1].0 } else { poles[0].0 + T::two_pi() };
        let (a, b) = (p + w, next - w);
        if b > a {
            total += tanh_sinh(|x, _, _| integrand(x), a, b, tol)?;
        }
    }
    let mean = total / T::two_pi();
    Ok(T::one() / (T::one() + g2 * mean))
}

/// Large-separation law `|C|² ≈ [J(E₀) π α R]⁻¹` with `α = |∂k/∂ω|` at `E₀`
/// and `R` in units of `x0`.
pub fn asymptotic_weight<T: Real>(bath: &BathModel<T>, g: T, e0: T, separation: T) -> Result<T> {
    if !(separation > T::zero()) {
        return Err(Error::InvalidParameter(format!("separation must be positive, got {separation}")));
    }
    let j = bath.spectral_density(g, e0)?;
    let alpha = bath.group_velocity_inverse(e0)?;
    Ok(T::one() / (j * T::pi() * alpha * separation * bath.x0))
}

/// `ρ_DFS = |C|²|Ψ⟩±⟨Ψ| + (1 − |C|²)|0,0⟩⟨0,0|`.
pub fn dfs_density_matrix<T: Real>(report: &DfsReport<T>) -> Result<SectorDensityMatrix<T>> {
    let (true, Some(sign), Some(c2)) = (report.exists, report.branch_sign, report.weight_c2) else {
        return Err(Error::NoDfs);
    };
    let bell = SectorDensityMatrix::bell_state(sign).0;
    let ground = SectorDensityMatrix::ground().0;
    Ok(SectorDensityMatrix(
        bell * crate::scalar::real(c2) + ground * crate::scalar::real(T::one() - c2),
    ))
}
