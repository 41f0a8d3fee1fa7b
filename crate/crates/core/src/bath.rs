//! One-dimensional coupled-cavity baths.
//!
//! Natural units throughout: the bare cavity frequency `ωc` is 1, the lattice
//! spacing `x0` is 1, and times are measured in `1/ωc`. The array is a ring
//! (periodic boundary conditions) so that plane waves diagonalize it exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_int, lit, to_f64, Real};

/// Resolution of the uniform wavevector scan used for root isolation, in
/// units of `1/x0`: the zone is cut into `2 * SCAN_INTERVALS_PER_HALF` cells.
const SCAN_INTERVALS_PER_HALF: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathKind {
    NearestNeighbor,
    NextNearestNeighbor,
}

/// A ring of `n_modes` coupled cavities with nearest (`xi`) and optionally
/// next-nearest (`xi_prime`) hopping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathModel<T> {
    pub kind: BathKind,
    pub omega_c: T,
    pub xi: T,
    pub xi_prime: T,
    pub n_modes: usize,
    pub x0: T,
}

/// Discrete plane-wave modes of a finite ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid<T> {
    pub wavevectors: Vec<T>,
    pub frequencies: Vec<T>,
    /// Per-mode coupling `g/√N`.
    pub coupling_scale: T,
}

impl<T: Real> ModeGrid<T> {
    pub fn len(&self) -> usize {
        self.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavevectors.is_empty()
    }
}

impl<T: Real> BathModel<T> {
    pub fn nearest_neighbor(xi: T, n_modes: usize) -> Result<Self> {
        Self::new(BathKind::NearestNeighbor, xi, T::zero(), n_modes)
    }

    pub fn next_nearest_neighbor(xi: T, xi_prime: T, n_modes: usize) -> Result<Self> {
        Self::new(BathKind::NextNearestNeighbor, xi, xi_prime, n_modes)
    }

    pub fn new(kind: BathKind, xi: T, xi_prime: T, n_modes: usize) -> Result<Self> {
        let bath = Self {
            kind,
            omega_c: T::one(),
            xi,
            xi_prime,
            n_modes,
            x0: T::one(),
        };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 3 || self.n_modes % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "n_modes must be odd and at least 3, got {}",
                self.n_modes
            )));
        }
        if !(self.xi > T::zero()) || !self.xi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if !(self.xi_prime >= T::zero()) || !self.xi_prime.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "xi_prime must be non-negative, got {}",
                self.xi_prime
            )));
        }
        if self.kind == BathKind::NearestNeighbor && self.xi_prime != T::zero() {
            return Err(Error::InvalidParameter(
                "nearest-neighbor bath cannot carry next-nearest hopping".into(),
            ));
        }
        if !(self.x0 > T::zero()) || !(self.omega_c.is_finite()) {
            return Err(Error::InvalidParameter("x0 and omega_c must be finite, x0 > 0".into()));
        }
        Ok(())
    }

    /// `ω(k) = ωc + 2ξ cos(k x0) + 2ξ′ cos(2k x0)`.
    pub fn dispersion(&self, k: T) -> T {
        let kx = self.wrap_phase(k * self.x0);
        let two = lit::<T>(2.0);
        self.omega_c + two * self.xi * kx.cos() + two * self.xi_prime * (two * kx).cos()
    }

    /// `dω/dk`.
    pub fn dispersion_slope(&self, k: T) -> T {
        let kx = self.wrap_phase(k * self.x0);
        let two = lit::<T>(2.0);
        -(two * self.xi * kx.sin() + lit::<T>(4.0) * self.xi_prime * (two * kx).sin()) * self.x0
    }

    /// Reduces a phase `k x0` into `(-π, π]`.
    fn wrap_phase(&self, phase: T) -> T {
        let pi = T::pi();
        if phase > -pi && phase <= pi {
            return phase;
        }
        let two_pi = T::two_pi();
        let mut p = phase - two_pi * (phase / two_pi).round();
        if p <= -pi {
            p += two_pi;
        }
        p
    }

    /// Wavevectors (in `(-π/x0, π/x0]`) where the dispersion is stationary.
    pub fn critical_wavevectors(&self) -> Vec<T> {
        let pi = T::pi() / self.x0;
        let mut ks = vec![T::zero(), pi];
        if self.xi_prime > T::zero() {
            let c = -self.xi / (lit::<T>(4.0) * self.xi_prime);
            if c.abs() < T::one() {
                let k = c.acos() / self.x0;
                ks.push(k);
                ks.push(-k);
            }
        }
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ks
    }

    /// Frequencies of the van Hove points (band edges included), ascending.
    pub fn critical_frequencies(&self) -> Vec<T> {
        let mut ws: Vec<T> = self
            .critical_wavevectors()
            .into_iter()
            .map(|k| self.dispersion(k))
            .collect();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ws.dedup_by(|a, b| (*a - *b).abs() <= T::eps() * lit(16.0));
        ws
    }

    /// `(lower, upper)` edges of the continuum.
    pub fn band_edges(&self) -> (T, T) {
        let ws = self.critical_frequencies();
        (ws[0], ws[ws.len() - 1])
    }

    /// True when `omega` lies strictly inside the band.
    pub fn in_band(&self, omega: T) -> bool {
        let (lo, hi) = self.band_edges();
        omega > lo && omega < hi
    }

    pub fn mode_grid(&self, g: T) -> Result<ModeGrid<T>> {
        self.validate()?;
        if !(g >= T::zero()) {
            return Err(Error::InvalidParameter(format!("coupling must be non-negative, got {g}")));
        }
        let n = self.n_modes;
        let half = ((n - 1) / 2) as i64;
        let dk = T::two_pi() / (from_int::<T>(n as i64) * self.x0);
        let wavevectors: Vec<T> = (-half..=half).map(|j| from_int::<T>(j) * dk).collect();
        let frequencies = wavevectors.iter().map(|&k| self.dispersion(k)).collect();
        Ok(ModeGrid {
            wavevectors,
            frequencies,
            coupling_scale: g / from_int::<T>(n as i64).sqrt(),
        })
    }

    /// All wavevectors of the continuum dispersion with `ω(k) = omega`.
    ///
    /// Roots are bracketed on a uniform scan of the zone (refined with the
    /// stationary points so that tangential pairs are split) and bisected
    /// down to `tol` in `k x0`.
    pub fn degenerate_wavevectors(&self, omega: T, tol: T) -> Vec<T> {
        let (lo, hi) = self.band_edges();
        if omega < lo || omega > hi {
            return Vec::new();
        }
        let pi = T::pi();
        let cells = 2 * SCAN_INTERVALS_PER_HALF;
        let dk = T::two_pi() / from_int::<T>(cells as i64);
        let mut nodes: Vec<T> = (0..=cells)
            .map(|j| -pi + from_int::<T>(j as i64) * dk)
            .collect();
        nodes[cells] = pi;
        for k in self.critical_wavevectors() {
            nodes.push(k * self.x0);
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup_by(|a, b| (*a - *b).abs() <= T::eps() * lit(8.0));

        let f = |phase: T| self.dispersion(phase / self.x0) - omega;
        let mut roots: Vec<T> = Vec::new();
        for pair in nodes.windows(2) {
            let (mut a, mut b) = (pair[0], pair[1]);
            let (mut fa, fb) = (f(a), f(b));
            if fb == T::zero() {
                roots.push(b);
                continue;
            }
            if fa == T::zero() {
                // Already recorded as the right end of the previous cell,
                // except for the very first node which equals -π ≡ π.
                continue;
            }
            if (fa > T::zero()) == (fb > T::zero()) {
                continue;
            }
            for _ in 0..200 {
                let m = (a + b) * lit(0.5);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if fm == T::zero() {
                    a = m;
                    b = m;
                    break;
                }
                if (fm > T::zero()) == (fa > T::zero()) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
                if b - a <= tol && fm.abs() <= tol {
                    break;
                }
            }
            roots.push((a + b) * lit(0.5));
        }
        // -π and π are the same point of the zone.
        roots.retain(|&r| r > -pi);
        roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
        roots.into_iter().map(|r| r / self.x0).collect()
    }

    /// Smallest positive wavevector resonant with `omega` (the branch used to
    /// state distance-dependent phases).
    pub fn principal_wavevector(&self, omega: T) -> Option<T> {
        self.degenerate_wavevectors(omega, lit(1e-13))
            .into_iter()
            .filter(|&k| k >= T::zero())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    fn require_interior(&self, omega: T) -> Result<()> {
        let (lo, hi) = self.band_edges();
        if omega < lo || omega > hi {
            return Err(Error::OutOfBand {
                omega: to_f64(omega),
                lower: to_f64(lo),
                upper: to_f64(hi),
            });
        }
        if omega == lo || omega == hi {
            return Err(Error::BandEdge { omega: to_f64(omega) });
        }
        Ok(())
    }

    /// Resonant wavevectors together with `|dω/dk|`, rejecting van Hove points.
    pub(crate) fn resonant_branches(&self, omega: T) -> Result<Vec<(T, T)>> {
        self.require_interior(omega)?;
        let scale = self.xi + self.xi_prime;
        let floor = scale * T::eps().sqrt() * self.x0;
        let mut out = Vec::new();
        for k in self.degenerate_wavevectors(omega, lit(1e-13)) {
            let v = self.dispersion_slope(k).abs();
            if v <= floor {
                return Err(Error::BandEdge { omega: to_f64(omega) });
            }
            out.push((k, v));
        }
        if out.is_empty() {
            return Err(Error::BandEdge { omega: to_f64(omega) });
        }
        Ok(out)
    }

    /// Continuum spectral density `J(ω) = Σ_k g_k² δ(ω − ω_k)` for a uniform
    /// site coupling `g`.
    pub fn spectral_density(&self, g: T, omega: T) -> Result<T> {
        let two_pi = T::two_pi();
        match self.kind {
            BathKind::NearestNeighbor => {
                self.require_interior(omega)?;
                let delta = omega - self.omega_c;
                let d = lit::<T>(4.0) * self.xi * self.xi - delta * delta;
                if d <= T::zero() {
                    return Err(Error::BandEdge { omega: to_f64(omega) });
                }
                Ok(g * g / (T::pi() * d.sqrt()))
            }
            BathKind::NextNearestNeighbor => {
                let branches = self.resonant_branches(omega)?;
                Ok(branches
                    .iter()
                    .fold(T::zero(), |acc, &(_, v)| acc + g * g * self.x0 / (two_pi * v)))
            }
        }
    }

    /// `∫ J(ω) dω` over the band, integrated piecewise between van Hove
    /// points; equals `g²` in the continuum limit.
    pub fn integrated_spectral_density(&self, g: T, tol: T) -> Result<T> {
        let ws = self.critical_frequencies();
        let mut total = T::zero();
        for pair in ws.windows(2) {
            total += crate::quad::tanh_sinh(
                |w, _, _| self.spectral_density(g, w).unwrap_or(T::zero()),
                pair[0],
                pair[1],
                tol,
            )?;
        }
        Ok(total)
    }

    /// `|∂k/∂ω|` on the principal branch.
    pub fn group_velocity_inverse(&self, omega: T) -> Result<T> {
        match self.kind {
            BathKind::NearestNeighbor => {
                self.require_interior(omega)?;
                let delta = omega - self.omega_c;
                let d = lit::<T>(4.0) * self.xi * self.xi - delta * delta;
                if d <= T::zero() {
                    return Err(Error::BandEdge { omega: to_f64(omega) });
                }
                Ok(T::one() / (self.x0 * d.sqrt()))
            }
            BathKind::NextNearestNeighbor => {
                let branches = self.resonant_branches(omega)?;
                let (_, v) = branches
                    .into_iter()
                    .filter(|&(k, _)| k >= T::zero())
                    .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                    .ok_or(Error::BandEdge { omega: to_f64(omega) })?;
                Ok(T::one() / v)
            }
        }
    }

    /// Largest `|dω/dk|` over the zone.
    pub fn max_group_velocity(&self) -> T {
        if self.kind == BathKind::NearestNeighbor {
            return lit::<T>(2.0) * self.xi * self.x0;
        }
        let samples = 8192;
        let pi = T::pi();
        let dk = pi / from_int::<T>(samples as i64);
        let coarse = (0..=samples)
            .map(|j| from_int::<T>(j as i64) * dk)
            .max_by(|a, b| {
                let va = self.dispersion_slope(*a / self.x0).abs();
                let vb = self.dispersion_slope(*b / self.x0).abs();
                va.partial_cmp(&vb).unwrap()
            })
            .unwrap();
        // Golden-section polish around the best sample.
        let (mut a, mut b) = ((coarse - dk).max(T::zero()), (coarse + dk).min(pi));
        let phi = lit::<T>(0.618_033_988_749_894_9);
        let speed = |p: T| self.dispersion_slope(p / self.x0).abs();
        for _ in 0..80 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if speed(c) > speed(d) {
                b = d;
            } else {
                a = c;
            }
        }
        speed((a + b) * lit(0.5))
    }
}
