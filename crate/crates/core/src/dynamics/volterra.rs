use serde::{Deserialize, Serialize};

use super::kernel::MemoryKernel;
use super::Trajectory;
use crate::error::{Error, Result};
use crate::markovian::EmitterPair;
use crate::scalar::{cis, from_int, lit, real, to_f64, Cplx, Real};

/// Which set of amplitudes the integro-differential equations are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverBasis {
    /// `(α₁, α₂)` with the 2×2 kernel `[[f₁₁, f₁₂], [f₁₂, f₁₁]]`.
    Coupled,
    /// `α± = (α₁ ± α₂)/√2`, two scalar equations with kernels `f₁₁ ± f₁₂`.
    #[default]
    Decoupled,
}

/// Largest accepted half-step error estimate per step.
pub const STEP_ERROR_LIMIT: f64 = 1e-6;

/// A kernel series stored back to front as split real and imaginary parts,
/// so that the history sum walks both operands forward.
struct Reversed<T> {
    re: Vec<T>,
    im: Vec<T>,
}

impl<T: Real> Reversed<T> {
    fn new(series: &[Cplx<T>]) -> Self {
        Self {
            re: series.iter().rev().map(|z| z.re).collect(),
            im: series.iter().rev().map(|z| z.im).collect(),
        }
    }

    fn at(&self, n: usize) -> Cplx<T> {
        let i = self.re.len() - 1 - n;
        Cplx::new(self.re[i], self.im[i])
    }
}

/// `Σ_j K[j]·y[j]` over equal-length slices, four lanes at a time.
#[inline]
fn complex_dot<T: Real>(kr: &[T], ki: &[T], yr: &[T], yi: &[T]) -> Cplx<T> {
    let n = kr.len();
    let (kr, ki, yr, yi) = (&kr[..n], &ki[..n], &yr[..n], &yi[..n]);
    let mut sr = [T::zero(); 4];
    let mut si = [T::zero(); 4];
    let blocks = n / 4;
    for b in 0..blocks {
        let o = 4 * b;
        for l in 0..4 {
            let (a, c, x, y) = (kr[o + l], ki[o + l], yr[o + l], yi[o + l]);
            sr[l] += a * x - c * y;
            si[l] += a * y + c * x;
        }
    }
    for j in 4 * blocks..n {
        sr[0] += kr[j] * yr[j] - ki[j] * yi[j];
        si[0] += kr[j] * yi[j] + ki[j] * yr[j];
    }
    Cplx::new((sr[0] + sr[1]) + (sr[2] + sr[3]), (si[0] + si[1]) + (si[2] + si[3]))
}

/// Solves `ẏ_a(t) = −Σ_b ∫₀ᵗ K_ab(t − τ) y_b(τ) dτ` on the kernel grid.
///
/// The convolution is discretized with the trapezoidal rule and advanced
/// with an Euler predictor and one trapezoidal corrector per step. Returns
/// one series per component, `steps + 1` samples each.
fn solve_system<T: Real>(kernels: &[Vec<Cplx<T>>], y0: &[Cplx<T>], h: T, steps: usize) -> Vec<Vec<Cplx<T>>> {
    let m = y0.len();
    debug_assert_eq!(kernels.len(), m * m);
    let len = kernels[0].len();
    assert!(len > steps, "kernel shorter than requested horizon");
    let rev: Vec<Reversed<T>> = kernels.iter().map(|k| Reversed::new(&k[..=steps])).collect();
    let len = steps + 1;
    let half = lit::<T>(0.5);
    let mut yr: Vec<Vec<T>> = (0..m).map(|_| vec![T::zero(); len]).collect();
    let mut yi: Vec<Vec<T>> = (0..m).map(|_| vec![T::zero(); len]).collect();
    for a in 0..m {
        yr[a][0] = y0[a].re;
        yi[a][0] = y0[a].im;
    }
    let y_at = |yr: &Vec<Vec<T>>, yi: &Vec<Vec<T>>, a: usize, n: usize| Cplx::new(yr[a][n], yi[a][n]);
    let k0: Vec<Cplx<T>> = rev.iter().map(|r| r.at(0)).collect();
    let hc = real(h);
    let mut conv = vec![Cplx::new(T::zero(), T::zero()); m];
    let mut hist = conv.clone();
    let mut pred = conv.clone();
    let mut next = conv.clone();
    for n in 0..steps {
        // History part of the convolution at t_{n+1}: endpoint y_0 with half
        // weight plus the interior samples 1..=n.
        let lo = len - 1 - n;
        for a in 0..m {
            let mut acc = Cplx::new(T::zero(), T::zero());
            for b in 0..m {
                let r = &rev[a * m + b];
                acc += r.at(n + 1) * y_at(&yr, &yi, b, 0) * half;
                if n > 0 {
                    acc += complex_dot(&r.re[lo..len - 1], &r.im[lo..len - 1], &yr[b][1..=n], &yi[b][1..=n]);
                }
            }
            hist[a] = acc * hc;
        }
        for a in 0..m {
            pred[a] = y_at(&yr, &yi, a, n) - conv[a] * hc;
        }
        for a in 0..m {
            let mut c = hist[a];
            for b in 0..m {
                c += k0[a * m + b] * pred[b] * (h * half);
            }
            next[a] = y_at(&yr, &yi, a, n) - (conv[a] + c) * (h * half);
        }
        for a in 0..m {
            yr[a][n + 1] = next[a].re;
            yi[a][n + 1] = next[a].im;
        }
        for a in 0..m {
            let mut c = hist[a];
            for b in 0..m {
                c += k0[a * m + b] * next[b] * (h * half);
            }
            conv[a] = c;
        }
    }
    (0..m)
        .map(|a| (0..len).map(|n| Cplx::new(yr[a][n], yi[a][n])).collect())
        .collect()
}

/// Integrates the amplitude equations from `α₁(0) = 1`, `α₂(0) = 0` over
/// `steps` steps of the kernel grid and returns lab-frame amplitudes.
pub fn solve_amplitudes<T: Real>(
    kernel: &MemoryKernel<T>,
    em: &EmitterPair<T>,
    steps: usize,
    basis: SolverBasis,
) -> Result<Trajectory<T>> {
    if steps == 0 || kernel.len() <= steps {
        return Err(Error::BadTimeGrid);
    }
    let h = kernel.step;
    let zero = Cplx::new(T::zero(), T::zero());
    let one = real(T::one());
    let (a1, a2): (Vec<Cplx<T>>, Vec<Cplx<T>>) = match basis {
        SolverBasis::Coupled => {
            let ks = vec![kernel.f_same.clone(), kernel.f_cross.clone(), kernel.f_cross.clone(), kernel.f_same.clone()];
            let mut ys = solve_system(&ks, &[one, zero], h, steps);
            let y2 = ys.pop().unwrap();
            (ys.pop().unwrap(), y2)
        }
        SolverBasis::Decoupled => {
            let s = lit::<T>(0.5).sqrt();
            let kp: Vec<Cplx<T>> = kernel.f_same.iter().zip(&kernel.f_cross).map(|(a, b)| a + b).collect();
            let km: Vec<Cplx<T>> = kernel.f_same.iter().zip(&kernel.f_cross).map(|(a, b)| a - b).collect();
            let yp = solve_system(&[kp], &[real(s)], h, steps).pop().unwrap();
            let ym = solve_system(&[km], &[real(s)], h, steps).pop().unwrap();
            yp.iter().zip(&ym).map(|(p, q)| ((p + q) * s, (p - q) * s)).unzip()
        }
    };
    let t_grid: Vec<T> = (0..=steps).map(|n| kernel.time(n)).collect();
    let phases: Vec<Cplx<T>> = t_grid.iter().map(|&t| cis(-em.omega0 * t)).collect();
    let alpha1 = a1.iter().zip(&phases).map(|(a, p)| a * p).collect();
    let alpha2 = a2.iter().zip(&phases).map(|(a, p)| a * p).collect();
    Ok(Trajectory::new(t_grid, alpha1, alpha2))
}

/// Half-step error estimate per step: the equations are solved on
/// `[0, window]` with steps `h` and `2h`; for a second-order scheme the
/// difference is three times the error of the finer solution.
pub fn step_error_estimate<T: Real>(
    kernel: &MemoryKernel<T>,
    em: &EmitterPair<T>,
    window: T,
    basis: SolverBasis,
) -> Result<T> {
    let h = kernel.step;
    let mut steps = (window / h).round().to_usize().unwrap_or(0);
    steps -= steps % 2;
    steps = steps.min((kernel.len() - 1) / 2 * 2);
    if steps < 2 {
        return Err(Error::BadTimeGrid);
    }
    let fine = solve_amplitudes(&kernel.truncated(steps + 1), em, steps, basis)?;
    let coarse_kernel = kernel.truncated(steps + 1).subsample(2);
    let coarse = solve_amplitudes(&coarse_kernel, em, steps / 2, basis)?;
    let mut worst = T::zero();
    for (n, (c1, c2)) in coarse.alpha1.iter().zip(&coarse.alpha2).enumerate() {
        let d1 = (c1 - fine.alpha1[2 * n]).norm_sqr().sqrt();
        let d2 = (c2 - fine.alpha2[2 * n]).norm_sqr().sqrt();
        worst = worst.max(d1).max(d2);
    }
    Ok(worst / lit::<T>(3.0) / from_int::<T>(steps as i64))
}

/// Rejects a step whose half-step estimate exceeds [`STEP_ERROR_LIMIT`].
pub fn check_step<T: Real>(kernel: &MemoryKernel<T>, em: &EmitterPair<T>, window: T, basis: SolverBasis) -> Result<T> {
    let est = step_error_estimate(kernel, em, window, basis)?;
    if est > lit::<T>(STEP_ERROR_LIMIT) {
        return Err(Error::StepTooLarge { step: to_f64(kernel.step), estimate: to_f64(est) });
    }
    Ok(est)
}
