//! Exact spectra, minimal worst-case errors, information complexity,
//! tractability classification, and weighted least-squares sampling recovery
//! for L∞ approximation on periodic tensor-product reproducing-kernel
//! Hilbert spaces over the torus [0,1]^d.
//!
//! The kernel eigensystem is explicit: eigenfunctions are the pure
//! exponentials e^{2πi k·x}, k ∈ Z^d, and the eigenvalue attached to k is a
//! product of per-coordinate factors determined by a [`model::KernelModel`].
//! Everything downstream — approximation numbers, information complexity,
//! tractability verdicts, and the empirical least-squares recovery pipeline —
//! is driven by the nonincreasing rearrangement of that eigenvalue family.
//!
//! Module map:
//! - [`sequence`]: closed-form or tabulated parameter sequences.
//! - [`model`]: validated kernel models (two families) and per-coordinate data.
//! - [`spectrum`]: ranked eigenvalue enumeration, traces, tail sums.
//! - [`complexity`]: approximation numbers, L_q bounds, information complexity.
//! - [`tractability`]: verdicts for the standard tractability notions.
//! - [`recovery`]: node sampling, concentration, subsampling, least squares,
//!   and worst-case-error measurement of the fitted linear map.
//! - [`linalg`]: the small dense complex kernels the above require.

pub mod complexity;
pub mod linalg;
pub mod model;
pub mod recovery;
pub mod sequence;
pub mod spectrum;
pub mod tractability;
mod zeta;

pub use model::{KernelModel, ModelError};
pub use sequence::SequenceFamily;
pub use spectrum::{EigenEntry, Spectrum};
