//! Quantum reflection and diffraction of polarizable particles from flat,
//! periodically doped surfaces.
//!
//! The interaction is a retarded Casimir-Polder tail plus the electrostatic
//! potential of the doping charges. The coupled-channel equations for the
//! diffraction orders are integrated with Johnson's log-derivative method
//! from a WKB start near the surface out to the asymptotic region.
//!
//! SI quantities are `f64` throughout the public configuration types. The
//! numerical kernel works in reduced units (lengths in 1/κₓ, energies in
//! ħ²κₓ²/2m) and is generic over [`scalar::Real`] (`f32`, `f64`).

pub mod analysis;
pub mod channels;
pub mod constants;
pub mod error;
pub mod potentials;
pub mod propagator;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use potentials::{DopingProfile, ParticleParams, SurfaceConfig};
pub use propagator::{PropagatorConfig, ReflectionResult};

/// Double-precision potential table.
pub type PotentialTable = potentials::PotentialTable<f64>;
/// Double-precision log-derivative state.
pub type LogDerivativeState = propagator::LogDerivativeState<f64>;
/// Double-precision potential-matrix evaluator.
pub type PotentialMatrixEvaluator<'a> = channels::PotentialMatrixEvaluator<'a, f64>;
/// Single-precision potential table.
pub type PotentialTableF32 = potentials::PotentialTable<f32>;
