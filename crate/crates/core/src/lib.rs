//! Programmable unitary gates built from alternating diagonal phase layers
//! in two Fourier-conjugate bases, with wave-optical and path-encoded
//! verification models.

pub mod config;
pub mod error;
pub mod optics;
pub mod path;
pub mod report;
pub mod synthesis;
pub mod unitary;

pub use config::Config;
pub use error::{Error, Result};
pub use report::GateReport;
