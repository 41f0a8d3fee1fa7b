//! Exact decoherence-free states of two distant emitters in a structured
//! one-dimensional bath.
//!
//! Two two-level emitters sit in cavities `m₁` and `m₂` of a coupled-cavity
//! ring. The crate computes
//!
//! * the bath dispersion, degeneracies and spectral density ([`bath`]),
//! * the Born–Markov decay matrix, Lamb shifts and Lindblad dynamics
//!   ([`markovian`]),
//! * the bound state in the continuum and the exact decoherence-free state it
//!   carries ([`boundstate`]),
//! * the exact non-Markovian amplitude dynamics and its Laplace-domain pole
//!   structure ([`dynamics`]),
//! * brute-force ground truth by exact diagonalization ([`oracle`]),
//!
//! and wires everything into a scenario runner ([`scenario`], [`runner`]).
//!
//! All numerics are generic over [`Real`]; the `*64` aliases below fix the
//! scalar to `f64`.

pub mod bath;
pub mod boundstate;
pub mod dynamics;
pub mod error;
pub mod markovian;
pub mod oracle;
pub mod quad;
pub mod runner;
pub mod scalar;
pub mod scenario;
pub mod sector;

pub use bath::{BathKind, BathModel, ModeGrid};
pub use boundstate::{BranchSign, DfsReport};
pub use dynamics::{MemoryKernel, PoleAnalysis, SolverBasis, Trajectory};
pub use error::{Error, Result};
pub use markovian::{EmitterPair, MarkovianRates};
pub use oracle::SingleExcitationHamiltonian;
pub use scalar::{Cplx, Real};
pub use sector::SectorDensityMatrix;

pub type BathModel64 = BathModel<f64>;
pub type EmitterPair64 = EmitterPair<f64>;
pub type MarkovianRates64 = MarkovianRates<f64>;
pub type DfsReport64 = DfsReport<f64>;
pub type MemoryKernel64 = MemoryKernel<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type PoleAnalysis64 = PoleAnalysis<f64>;
pub type SectorDensityMatrix64 = SectorDensityMatrix<f64>;
pub type SingleExcitationHamiltonian64 = SingleExcitationHamiltonian<f64>;

pub type BathModel32 = BathModel<f32>;
pub type EmitterPair32 = EmitterPair<f32>;
