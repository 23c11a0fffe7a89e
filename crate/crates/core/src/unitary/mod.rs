//! Finite-dimensional algebra of the Fourier/diagonal factorisation.
//!
//! State vectors are indexed in the spectrum domain (OAM charge or path
//! index). A spectrum-domain layer is the bare diagonal `D`; an angle-domain
//! layer acts as `F^dagger D F` with the unitary forward DFT
//! `F[j,k] = exp(-2 pi i j k / K) / sqrt(K)`.

mod matrix;
mod metrics;
mod stack;
mod window;

pub use matrix::{dft_matrix, ComplexMatrix};
pub use metrics::{central_block, fidelity, phase_test_fidelity, success_probability};
pub use stack::{compose_stack, DiagonalPhase, Domain, Layer, LayerStack};
pub use window::ChannelWindow;

/// Tolerance used when checking composed stacks for unitarity.
pub const UNITARITY_TOL: f64 = 1e-12;
