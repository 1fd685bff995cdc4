//! Weak measurements on pre- and post-selected interferometers.
//!
//! The crate models a single photon in a two-arm interferometer, with path
//! `{A, B}` and polarisation `{H, V}` degrees of freedom, weakly coupled to a
//! Gaussian pointer. Modules, bottom up:
//!
//! - [`hilbert`]: states, operators, tensor products and spectral
//!   decomposition on the 4-dimensional path ⊗ polarisation space.
//! - [`weak`]: weak values, first-order pointer shifts and
//!   detection-probability disturbance.
//! - [`pointer`]: analytic Gaussian pointer and exact post-selected pointer
//!   states.
//! - [`experiments`]: the generalised Cheshire-cat interferometer, its dual,
//!   the duality map and closed-form references.
//! - [`montecarlo`]: shot-by-shot sampling of post-selected pointer readings.
//! - [`circuit`]: a small optical-table language, its unitary compiler and
//!   post-selection verifier.

pub mod circuit;
pub mod experiments;
pub mod hilbert;
pub mod montecarlo;
pub mod pointer;
pub mod weak;

pub use hilbert::{Basis, BasisLabel, Operator, Path, Polarisation, StateVector, C64};
pub use pointer::{GaussianPointer, Readout};
pub use weak::{PrePostPair, WeakValue};
