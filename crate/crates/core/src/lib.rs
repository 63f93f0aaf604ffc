//! Exact state-vector simulation of linear teleportation for qudits whose
//! observables have bounded, evenly spaced spectra.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectrum`]: exact half-integer quantum numbers and eigenvalue ladders.
//! - [`qstate`]: dense pure states, tensor products, Schmidt values, state files.
//! - [`fourier`]: the conjugate `|p>` basis and `q`/`p` transforms.
//! - [`teleport`]: the protocol engine (projectors, outcomes, sampling, correction).
//! - [`analysis`]: closed-form success probabilities, mean fidelity, outcome counts.
//! - [`cli`] and [`verify`]: the command-line front end and its self-check harness.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod fourier;
pub mod qstate;
pub mod spectrum;
pub mod teleport;
pub mod verify;

pub use error::{Error, Result};
pub use fourier::ConjugateBasis;
pub use qstate::PureState;
pub use spectrum::{HalfInt, Ladder, Spectrum};
