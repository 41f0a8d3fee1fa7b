//! Reduced emitter states in the sector spanned by `|0,0⟩`, `|1,0⟩`, `|0,1⟩`.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};

use crate::scalar::{lit, real, Cplx, Real};

/// Index of each basis state inside a [`SectorDensityMatrix`].
pub const GROUND: usize = 0;
pub const EXCITED_1: usize = 1;
pub const EXCITED_2: usize = 2;

pub type SectorOperator<T> = Matrix3<Cplx<T>>;

/// Which emitter superposition `(|1,0⟩ ± |0,1⟩)/√2` a decoherence-free
/// state is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    /// Odd interference order `l` selects the symmetric state.
    pub fn from_order(l: i64) -> Self {
        if l.rem_euclid(2) == 1 {
            BranchSign::Plus
        } else {
            BranchSign::Minus
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BranchSign::Plus => "+",
            BranchSign::Minus => "-",
        }
    }
}

/// Two-emitter density matrix restricted to at most one excitation.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDensityMatrix<T: Real>(pub SectorOperator<T>);

impl<T: Real> SectorDensityMatrix<T> {
    pub fn from_matrix(m: SectorOperator<T>) -> Self {
        Self(m)
    }

    /// `|0,0⟩⟨0,0|`.
    pub fn ground() -> Self {
        let mut m = SectorOperator::<T>::zeros();
        m[(GROUND, GROUND)] = real(T::one());
        Self(m)
    }

    /// Projector on `c0|0,0⟩ + c1|1,0⟩ + c2|0,1⟩` (not normalized here).
    pub fn pure(amplitudes: [Cplx<T>; 3]) -> Self {
        let mut m = SectorOperator::<T>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = amplitudes[i] * amplitudes[j].conj();
            }
        }
        Self(m)
    }

    /// Projector on `(|1,0⟩ ± |0,1⟩)/√2`.
    pub fn bell_state(sign: BranchSign) -> Self {
        Self::bell(sign == BranchSign::Plus)
    }

    pub fn bell(plus: bool) -> Self {
        let s = T::one() / lit::<T>(2.0).sqrt();
        let second = if plus { s } else { -s };
        Self::pure([real(T::zero()), real(s), real(second)])
    }

    pub fn matrix(&self) -> &SectorOperator<T> {
        &self.0
    }

    pub fn trace(&self) -> Cplx<T> {
        self.0.trace()
    }

    /// Largest entry of `ρ − ρ†`.
    pub fn hermiticity_error(&self) -> T {
        let d = self.0 - self.0.adjoint();
        d.iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        let h = (self.0 + self.0.adjoint()) * real(lit::<T>(0.5));
        let eig = SymmetricEigen::new(h);
        eig.eigenvalues.iter().fold(T::max_value().unwrap(), |a, &b| a.min(b))
    }

    /// Total excited-state population `Tr[ρ Σ_j σ_j⁺σ_j⁻]`.
    pub fn excited_population(&self) -> T {
        self.0[(EXCITED_1, EXCITED_1)].re + self.0[(EXCITED_2, EXCITED_2)].re
    }

    /// Embeds into the full two-qubit space, ordered `|00⟩,|01⟩,|10⟩,|11⟩`
    /// with the first emitter as the left qubit.
    pub fn to_two_qubit(&self) -> Matrix4<Cplx<T>> {
        let map = [0usize, 2, 1];
        let mut out = Matrix4::<Cplx<T>>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out[(map[i], map[j])] = self.0[(i, j)];
            }
        }
        out
    }

    /// Wootters concurrence of the embedded two-qubit state.
    pub fn concurrence(&self) -> T {
        concurrence_two_qubit(&self.to_two_qubit())
    }
}

/// Wootters concurrence `max(0, √λ1 − √λ2 − √λ3 − √λ4)` where `λi` are the
/// eigenvalues of `√ρ ρ̃ √ρ`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn concurrence_two_qubit<T: Real>(rho: &Matrix4<Cplx<T>>) -> T {
    let zero = real(T::zero());
    // σy⊗σy has entries ±1 on the anti-diagonal (i·i = -1 corners).
    let mut yy = Matrix4::<Cplx<T>>::from_element(zero);
    yy[(0, 3)] = real(-T::one());
    yy[(1, 2)] = real(T::one());
    yy[(2, 1)] = real(T::one());
    yy[(3, 0)] = real(-T::one());
    let tilde = yy * rho.map(|z| z.conj()) * yy;

    let herm = (rho + rho.adjoint()) * real(lit::<T>(0.5));
    let eig = SymmetricEigen::new(herm);
    let sqrt_vals = eig.eigenvalues.map(|v| real(v.max(T::zero()).sqrt()));
    let sqrt_rho = &eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();

    let m = &sqrt_rho * tilde * &sqrt_rho;
    let m = (m + m.adjoint()) * real(lit::<T>(0.5));
    let mut roots: Vec<T> = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|v| v.max(T::zero()).sqrt())
        .collect();
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (roots[0] - roots[1] - roots[2] - roots[3]).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bell_states_are_maximally_entangled() {
        for plus in [true, false] {
            let rho = SectorDensityMatrix::<f64>::bell(plus);
            assert_relative_eq!(rho.trace().re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(rho.concurrence(), 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn product_states_have_zero_concurrence() {
        assert!(SectorDensityMatrix::<f64>::ground().concurrence() < 1e-7);
        let one = SectorDensityMatrix::<f64>::pure([real(0.0), real(1.0), real(0.0)]);
        assert!(one.concurrence() < 1e-7);
    }

    #[test]
    fn pure_single_excitation_concurrence_is_twice_product_of_amplitudes() {
        let a1 = Cplx::<f64>::new(0.3, 0.2);
        let a2 = Cplx::<f64>::new(-0.1, 0.5);
        let norm = (a1.norm_sqr() + a2.norm_sqr()).sqrt();
        let (a1, a2) = (a1 / norm, a2 / norm);
        let rho = SectorDensityMatrix::<f64>::pure([real(0.0), a1, a2]);
        let expected = 2.0 * (a1 * a2).norm_sqr().sqrt();
        assert_relative_eq!(rho.concurrence(), expected, epsilon = 1e-7);
    }

    #[test]
    fn min_eigenvalue_of_projector() {
        let rho = SectorDensityMatrix::<f64>::bell(true);
        assert!(rho.min_eigenvalue().abs() < 1e-15);
        assert!(rho.hermiticity_error() < 1e-15);
    }
}
