//! Brute-force reference: the full single-excitation Hamiltonian in the site
//! basis, its exact propagation and its spectrum.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::bath::BathModel;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::markovian::EmitterPair;
use crate::scalar::{cis, from_int, lit, to_f64, Cplx, Real};

/// Default far-field weight above which a state counts as extended.
pub const DEFAULT_FAR_FIELD_MAX: f64 = 0.01;

/// Single-excitation Hamiltonian over `{emitter 1, emitter 2, cavity 1..N}`.
///
/// The ring and the couplings are real, so the matrix is real symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationHamiltonian<T: Real> {
    pub matrix: DMatrix<T>,
    pub n_sites: usize,
    pub site1: i64,
    pub site2: i64,
}

impl<T: Real> SingleExcitationHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Matrix index of cavity `site` (1-based).
    pub fn cavity_index(site: i64) -> usize {
        2 + (site - 1) as usize
    }

    pub fn eigen(&self) -> Result<Spectrum<T>> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        Ok(Spectrum { values: eig.eigenvalues, vectors: eig.eigenvectors })
    }

    /// Ring distance between two cavities.
    fn ring_distance(&self, a: i64, b: i64) -> i64 {
        let n = self.n_sites as i64;
        let d = (a - b).rem_euclid(n);
        d.min(n - d)
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub values: DVector<T>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<T>,
}

pub fn build_hamiltonian<T: Real>(bath: &BathModel<T>, em: &EmitterPair<T>) -> Result<SingleExcitationHamiltonian<T>> {
    bath.validate()?;
    let n = bath.n_modes;
    for site in [em.site1, em.site2] {
        if site < 1 || site > n as i64 {
            return Err(Error::SiteOutOfRange { site, n_sites: n });
        }
    }
    let dim = n + 2;
    let mut h = DMatrix::<T>::zeros(dim, dim);
    h[(0, 0)] = em.omega0;
    h[(1, 1)] = em.omega0;
    let idx = |m: usize| 2 + m % n;
    for m in 0..n {
        h[(idx(m), idx(m))] = bath.omega_c;
        for (hop, amp) in [(1, bath.xi), (2, bath.xi_prime)] {
            if amp == T::zero() {
                continue;
            }
            let (a, b) = (idx(m), idx(m + hop));
            h[(a, b)] += amp;
            h[(b, a)] += amp;
        }
    }
    for (e, site) in [(0usize, em.site1), (1, em.site2)] {
        let c = SingleExcitationHamiltonian::<T>::cavity_index(site);
        h[(e, c)] += em.g;
        h[(c, e)] += em.g;
    }
    Ok(SingleExcitationHamiltonian { matrix: h, n_sites: n, site1: em.site1, site2: em.site2 })
}

/// Exact propagation result. `bath` holds the cavity amplitudes at every
/// sample when requested.
#[derive(Debug, Clone)]
pub struct ExactEvolution<T: Real> {
    pub trajectory: Trajectory<T>,
    /// Total norm of the state at every sample.
    pub norm: Vec<T>,
    pub bath: Option<Vec<Vec<Cplx<T>>>>,
}

/// Propagates `|1,0,{0}⟩` by spectral synthesis over a precomputed spectrum.
pub fn evolve_spectrum<T: Real>(spectrum: &Spectrum<T>, t_grid: &[T], with_bath: bool) -> ExactEvolution<T> {
    let dim = spectrum.values.len();
    // Overlaps of the eigenvectors with the initial state.
    let overlap: Vec<T> = (0..dim).map(|j| spectrum.vectors[(0, j)]).collect();
    let mut alpha1 = Vec::with_capacity(t_grid.len());
    let mut alpha2 = Vec::with_capacity(t_grid.len());
    let mut norm = Vec::with_capacity(t_grid.len());
    let mut bath = with_bath.then(Vec::new);
    let mut coeff = vec![Cplx::new(T::zero(), T::zero()); dim];
    let mut state = coeff.clone();
    let columns = spectrum.vectors.as_slice();
    for &t in t_grid {
        for j in 0..dim {
            coeff[j] = cis(-spectrum.values[j] * t) * overlap[j];
        }
        state.iter_mut().for_each(|s| *s = Cplx::new(T::zero(), T::zero()));
        for (j, c) in coeff.iter().enumerate() {
            let col = &columns[j * dim..(j + 1) * dim];
            for (s, &v) in state.iter_mut().zip(col) {
                *s += c * v;
            }
        }
        alpha1.push(state[0]);
        alpha2.push(state[1]);
        norm.push(state.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()));
        if let Some(b) = bath.as_mut() {
            b.push(state[2..].to_vec());
        }
    }
    ExactEvolution { trajectory: Trajectory::new(t_grid.to_vec(), alpha1, alpha2), norm, bath }
}

pub fn evolve_exact<T: Real>(h: &SingleExcitationHamiltonian<T>, t_grid: &[T], with_bath: bool) -> Result<ExactEvolution<T>> {
    Ok(evolve_spectrum(&h.eigen()?, t_grid, with_bath))
}

/// An in-band eigenstate with a localized emitter component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralBic<T> {
    pub index: usize,
    pub energy: T,
    pub emitter_weight: T,
    pub c1: T,
    pub c2: T,
    /// Cavity probability farther than `N/4` from both emitters.
    pub far_field_weight: T,
}

/// Default emitter-weight threshold `10·(2/N)`.
pub fn default_weight_threshold<T: Real>(n_sites: usize) -> T {
    lit::<T>(20.0) / from_int::<T>(n_sites as i64)
}

/// Eigenstates strictly inside the band with emitter weight above
/// `threshold` and far-field weight below `far_field_max`.
pub fn find_bic_spectral<T: Real>(
    h: &SingleExcitationHamiltonian<T>,
    spectrum: &Spectrum<T>,
    bath: &BathModel<T>,
    threshold: T,
    far_field_max: T,
) -> Vec<SpectralBic<T>> {
    let (lo, hi) = bath.band_edges();
    let quarter = (h.n_sites / 4) as i64;
    let far: Vec<usize> = (1..=h.n_sites as i64)
        .filter(|&m| h.ring_distance(m, h.site1) > quarter && h.ring_distance(m, h.site2) > quarter)
        .map(SingleExcitationHamiltonian::<T>::cavity_index)
        .collect();
    let mut out = Vec::new();
    for (j, &e) in spectrum.values.iter().enumerate() {
        if !(e > lo && e < hi) {
            continue;
        }
        let v = spectrum.vectors.column(j);
        let weight = v[0] * v[0] + v[1] * v[1];
        if weight <= threshold {
            continue;
        }
        let far_weight = far.iter().fold(T::zero(), |acc, &i| acc + v[i] * v[i]);
        if far_weight >= far_field_max {
            continue;
        }
        // Fix the overall sign so that c1 ≥ 0.
        let sgn = if v[0] < T::zero() { -T::one() } else { T::one() };
        out.push(SpectralBic {
            index: j,
            energy: e,
            emitter_weight: weight,
            c1: v[0] * sgn,
            c2: v[1] * sgn,
            far_field_weight: far_weight,
        });
    }
    out
}

/// Mode amplitudes `d_k = N^{-1/2} Σ_m e^{−ikm x0} b_m` of a site-basis
/// eigenvector, on the grid of [`BathModel::mode_grid`].
pub fn mode_amplitudes<T: Real>(spectrum: &Spectrum<T>, index: usize, bath: &BathModel<T>) -> Result<Vec<Cplx<T>>> {
    let grid = bath.mode_grid(T::zero())?;
    let v = spectrum.vectors.column(index);
    let norm = T::one() / from_int::<T>(bath.n_modes as i64).sqrt();
    Ok(grid
        .wavevectors
        .iter()
        .map(|&k| {
            let mut acc = Cplx::new(T::zero(), T::zero());
            for m in 1..=bath.n_modes as i64 {
                acc += cis(-k * from_int::<T>(m) * bath.x0) * v[SingleExcitationHamiltonian::<T>::cavity_index(m)];
            }
            acc * norm
        })
        .collect())
}

/// Writes `index,energy,emitter_weight` for every eigenvalue.
pub fn write_spectrum_csv<T: Real, W: Write>(spectrum: &Spectrum<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,energy,emitter_weight")?;
    for (j, &e) in spectrum.values.iter().enumerate() {
        let v = spectrum.vectors.column(j);
        writeln!(out, "{},{:.15e},{:.15e}", j, to_f64(e), to_f64(v[0] * v[0] + v[1] * v[1]))?;
    }
    Ok(())
}

/// Writes one eigenvector as `component,amplitude` (emitters first).
pub fn write_eigenvector_csv<T: Real, W: Write>(spectrum: &Spectrum<T>, index: usize, mut out: W) -> std::io::Result<()> {
    writeln!(out, "component,amplitude")?;
    let v = spectrum.vectors.column(index);
    for (i, x) in v.iter().enumerate() {
        let name = match i {
            0 => "emitter1".to_string(),
            1 => "emitter2".to_string(),
            _ => format!("cavity{}", i - 1),
        };
        writeln!(out, "{},{:.15e}", name, to_f64(*x))?;
    }
    Ok(())
}
