use rayon::prelude::*;

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::markovian::EmitterPair;
use crate::scalar::{cis, from_int, lit, Cplx, Real};

/// Time samples computed per restart of the phase recurrence.
const CHUNK: usize = 512;

/// Bath correlation functions in the frame rotating at `ω₀`:
/// `f̄_ij(t) = (g²/N) Σ_k e^{−i(ω_k − ω₀)t} e^{ik(m_i − m_j)x0}`.
///
/// Only `f₁₁` and `f₁₂` are stored; the mode grid is reflection symmetric so
/// `f₂₂ = f₁₁` and `f₂₁ = f₁₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel<T: Real> {
    pub step: T,
    pub f_same: Vec<Cplx<T>>,
    pub f_cross: Vec<Cplx<T>>,
}

impl<T: Real> MemoryKernel<T> {
    pub fn len(&self) -> usize {
        self.f_same.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_same.is_empty()
    }

    pub fn time(&self, n: usize) -> T {
        from_int::<T>(n as i64) * self.step
    }

    /// Every `factor`-th sample, for a grid with step `factor·h`.
    pub fn subsample(&self, factor: usize) -> Self {
        Self {
            step: self.step * from_int::<T>(factor as i64),
            f_same: self.f_same.iter().step_by(factor).copied().collect(),
            f_cross: self.f_cross.iter().step_by(factor).copied().collect(),
        }
    }

    /// Prefix covering `samples` grid points.
    pub fn truncated(&self, samples: usize) -> Self {
        let n = samples.min(self.len());
        Self { step: self.step, f_same: self.f_same[..n].to_vec(), f_cross: self.f_cross[..n].to_vec() }
    }
}

/// Mode pairs `±k` with their detuning `ω_k − ω₀` and the weights of the
/// same-site and cross-site sums (`2` and `2cos kΔ`, or `1` at `k = 0`).
fn paired_modes<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<Vec<(T, T, T)>> {
    let grid = bath.mode_grid(em.g)?;
    let dm = from_int::<T>(em.separation());
    let half = grid.len() / 2;
    let two = lit::<T>(2.0);
    let mut out = Vec::with_capacity(half + 1);
    for j in half..grid.len() {
        let k = grid.wavevectors[j];
        let nu = grid.frequencies[j] - em.omega0;
        if j == half {
            out.push((nu, T::one(), T::one()));
        } else {
            out.push((nu, two, two * (k * dm * bath.x0).cos()));
        }
    }
    Ok(out)
}

/// Samples `f̄₁₁` and `f̄₁₂` at `t_n = n·step`, `n = 0..samples`.
///
/// Each chunk of time samples starts from exact phases and advances them by
/// repeated multiplication, so the cost is one complex product per mode and
/// sample.
pub fn memory_kernel<T: Real>(
    bath: &BathModel<T>,
    em: &EmitterPair<T>,
    step: T,
    samples: usize,
) -> Result<MemoryKernel<T>> {
    if !(step > T::zero()) || samples == 0 {
        return Err(Error::BadTimeGrid);
    }
    let modes = paired_modes(bath, em)?;
    let scale = em.g * em.g / from_int::<T>(bath.n_modes as i64);
    let mut f_same = vec![Cplx::new(T::zero(), T::zero()); samples];
    let mut f_cross = f_same.clone();
    f_same
        .par_chunks_mut(CHUNK)
        .zip(f_cross.par_chunks_mut(CHUNK))
        .enumerate()
        .for_each(|(c, (same, cross))| {
            let t0 = from_int::<T>((c * CHUNK) as i64) * step;
            for &(nu, ws, wc) in &modes {
                let mut z = cis(-nu * t0);
                let r = cis(-nu * step);
                for (s, x) in same.iter_mut().zip(cross.iter_mut()) {
                    *s += z * ws;
                    *x += z * wc;
                    z *= r;
                }
            }
            for s in same.iter_mut() {
                *s *= scale;
            }
            for x in cross.iter_mut() {
                *x *= scale;
            }
        });
    Ok(MemoryKernel { step, f_same, f_cross })
}

/// Direct evaluation of `f̄_ij(t)` for sites separated by `separation`,
/// summing `±k` pairs with freshly computed phases.
pub fn mode_sum<T: Real>(bath: &BathModel<T>, g: T, omega0: T, separation: i64, t: T) -> Result<Cplx<T>> {
    let grid = bath.mode_grid(g)?;
    let dm = from_int::<T>(separation);
    let half = grid.len() / 2;
    let mut acc = Cplx::new(T::zero(), T::zero());
    for i in 0..=half {
        let (a, b) = (half + i, half - i);
        let term = |j: usize| cis(-(grid.frequencies[j] - omega0) * t) * cis(grid.wavevectors[j] * dm * bath.x0);
        acc += if i == 0 { term(a) } else { term(a) + term(b) };
    }
    Ok(acc * (g * g / from_int::<T>(bath.n_modes as i64)))
}
