//! Deterministic spectral solvers for complex wave fields on a periodic
//! one-dimensional phase space `(x, p)`.
//!
//! The crate evolves wave fields under a Kramers-type transport equation with
//! momentum diffusion, alongside the classical reference equations
//! (Kramers/Fokker-Planck, Liouville) and a split-step Schrodinger solver on
//! the configuration axis. A transform toolkit maps between configuration
//! wave functions, phase-space fields and Wigner/Husimi distributions, and an
//! experiment harness turns the structural claims of the model (fast
//! relaxation onto a stationary subspace, emergent Schrodinger dynamics,
//! gauge and Galileo invariance, the classical Liouville limit, decoherence)
//! into machine-readable reports.
//!
//! All state types are immutable value objects; operations are pure functions
//! and may be called concurrently. Reductions (norms, masses) use a fixed
//! summation order so results do not depend on the parallel schedule.

pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod io;
pub mod operators;
pub mod params;
pub mod potential;
pub mod spectral;
pub mod transforms;

pub mod evolve;

pub use error::Error;
pub use field::{ConfigWavefunction, DensityField, Ensemble, FieldMetrics, WaveField};
pub use grid::PhaseGrid;
pub use params::PhysicalParams;
pub use potential::{PotentialKind, PotentialSpec};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
