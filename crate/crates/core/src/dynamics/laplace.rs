
use crate::bath::BathModel;
use crate::boundstate::{bic_solve, BranchSign};
use crate::error::{Error, Result};
use crate::markovian::EmitterPair;
use crate::scalar::{cis, from_int, imag, lit, real, to_f64, Cplx, Real};

/// Denominators with a smaller modulus are reported as pole proximity.
const POLE_GUARD: f64 = 1e-12;
const CONTOUR_RADIUS: f64 = 1e-6;
const CONTOUR_NODES: usize = 64;

/// The emitter pole on the imaginary axis and the residues of `α̃₁`, `α̃₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleAnalysis<T> {
    /// `E` with the pole at `s = −iE`.
    pub pole_energy: T,
    pub residue1: Cplx<T>,
    pub residue2: Cplx<T>,
    pub sign: Option<BranchSign>,
    /// Change of `residue1` when the contour nodes are doubled.
    pub refinement_change: T,
}

/// Discrete mode sums `F_Δ(s) = (g²/N) Σ_k e^{ikΔ x0}/(s + iω_k)` for the
/// same-site and cross-site separations, `±k` summed in pairs.
fn self_energies<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, s: Cplx<T>) -> Result<(Cplx<T>, Cplx<T>)> {
    let grid = bath.mode_grid(em.g)?;
    let dm = from_int::<T>(em.separation());
    let half = grid.len() / 2;
    let mut same = Cplx::new(T::zero(), T::zero());
    let mut cross = same;
    let two = lit::<T>(2.0);
    for j in half..grid.len() {
        let d = s + imag(grid.frequencies[j]);
        if d.norm_sqr().sqrt() < lit(POLE_GUARD) {
            return Err(Error::PoleProximity { distance: to_f64(d.norm_sqr().sqrt()) });
        }
        let inv = d.inv();
        if j == half {
            same += inv;
            cross += inv;
        } else {
            same += inv * two;
            cross += inv * (two * (grid.wavevectors[j] * dm * bath.x0).cos());
        }
    }
    let scale = real(em.g * em.g / from_int::<T>(bath.n_modes as i64));
    Ok((same * scale, cross * scale))
}

/// `α̃₁(s) = ½(1/D₊ + 1/D₋)` and `α̃₂(s) = ½(1/D₊ − 1/D₋)` with
/// `D± = s + iω₀ + F₀(s) ± F_Δ(s)`.
pub fn laplace_amplitude<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, s: Cplx<T>) -> Result<(Cplx<T>, Cplx<T>)> {
    let (same, cross) = self_energies(bath, em, s)?;
    let base = s + imag(em.omega0) + same;
    let (dp, dmn) = (base + cross, base - cross);
    for d in [dp, dmn] {
        let r = d.norm_sqr().sqrt();
        if r < lit(POLE_GUARD) {
            return Err(Error::PoleProximity { distance: to_f64(r) });
        }
    }
    let half = real(lit::<T>(0.5));
    let (ip, im) = (dp.inv(), dmn.inv());
    Ok(((ip + im) * half, (ip - im) * half))
}

/// `G(E) = E − ω₀ − (g²/N) Σ_k n_k/(E − ω_k)` and `G′(E)` on one branch,
/// `n_k = 1 ± cos(kΔ)`. The pole of `1/D±` sits at the root of `G`.
fn branch_function<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, sign: BranchSign, e: T) -> Result<(T, T)> {
    let grid = bath.mode_grid(em.g)?;
    let dm = from_int::<T>(em.separation());
    let s = lit::<T>(sign.factor());
    let scale = em.g * em.g / from_int::<T>(bath.n_modes as i64);
    let (mut v, mut dv) = (T::zero(), T::zero());
    for (&k, &w) in grid.wavevectors.iter().zip(&grid.frequencies) {
        let n = T::one() + s * (k * dm * bath.x0).cos();
        let d = e - w;
        if n == T::zero() {
            continue;
        }
        if d.abs() < lit(POLE_GUARD) {
            return Err(Error::PoleProximity { distance: to_f64(d.abs()) });
        }
        v += n / d;
        dv += n / (d * d);
    }
    Ok((e - em.omega0 - scale * v, T::one() + scale * dv))
}

/// Newton iteration for the real pole energy starting at `e`.
pub fn locate_pole<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>, sign: BranchSign, e: T) -> Result<T> {
    let mut e = e;
    for _ in 0..50 {
        let (g, dg) = branch_function(bath, em, sign, e)?;
        let delta = g / dg;
        e -= delta;
        if delta.abs() <= lit::<T>(4.0) * T::eps() * (T::one() + e.abs()) {
            return Ok(e);
        }
    }
    Err(Error::NoBoundState)
}

fn contour_residues<T: Real>(
    bath: &BathModel<T>,
    em: &EmitterPair<T>,
    pole: Cplx<T>,
    nodes: usize,
) -> Result<(Cplx<T>, Cplx<T>)> {
    let r = lit::<T>(CONTOUR_RADIUS);
    let mut z1 = Cplx::new(T::zero(), T::zero());
    let mut z2 = z1;
    for j in 0..nodes {
        let theta = T::two_pi() * from_int::<T>(j as i64) / from_int::<T>(nodes as i64);
        let u = cis(theta) * r;
        let (a1, a2) = laplace_amplitude(bath, em, pole + u)?;
        z1 += a1 * u;
        z2 += a2 * u;
    }
    let n = real(from_int::<T>(nodes as i64));
    Ok((z1 / n, z2 / n))
}

/// Residues of `α̃₁`, `α̃₂` at the bound-state pole `s = −iE₀` by a
/// 64-node trapezoidal contour of radius `1e-6`.
pub fn pole_residues<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<PoleAnalysis<T>> {
    if em.g == T::zero() {
        return Ok(PoleAnalysis {
            pole_energy: em.omega0,
            residue1: real(T::one()),
            residue2: real(T::zero()),
            sign: None,
            refinement_change: T::zero(),
        });
    }
    let report = bic_solve(bath, em)?;
    let (true, Some(sign), Some(e0)) = (report.exists, report.branch_sign, report.e0) else {
        return Err(Error::NoBoundState);
    };
    let e = locate_pole(bath, em, sign, e0)?;
    let pole = Cplx::new(T::zero(), -e);
    let (z1, z2) = contour_residues(bath, em, pole, CONTOUR_NODES)?;
    let (w1, _) = contour_residues(bath, em, pole, 2 * CONTOUR_NODES)?;
    Ok(PoleAnalysis {
        pole_energy: e,
        residue1: z1,
        residue2: z2,
        sign: Some(sign),
        refinement_change: (w1 - z1).norm_sqr().sqrt(),
    })
}
