use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::unitary::{ChannelWindow, ComplexMatrix};

/// What happens to amplitude outside the working window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Off-window channels exist and carry light through the stack.
    Open,
    /// Off-window amplitude is discarded at every layer plane.
    Filtered,
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(Self::Open),
            "filtered" => Ok(Self::Filtered),
            other => Err(Error::InvalidArgument(format!("unknown boundary policy '{other}'"))),
        }
    }
}

impl std::fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Open => "open",
            Self::Filtered => "filtered",
        })
    }
}

pub const DEFAULT_FIDELITY_FLOOR: f64 = 0.999;
/// Tolerance for accepting a target as unitary.
pub const TARGET_UNITARITY_TOL: f64 = 1e-10;

/// Target gate plus the geometry it is synthesised in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    target: ComplexMatrix,
    window: ChannelWindow,
    layer_count: usize,
    policy: BoundaryPolicy,
    fidelity_floor: f64,
}

impl GateSpec {
    pub fn new(
        target: ComplexMatrix,
        window: ChannelWindow,
        layer_count: usize,
        policy: BoundaryPolicy,
        fidelity_floor: f64,
    ) -> Result<Self> {
        if !target.is_square() || target.rows() != window.n() {
            return Err(crate::error::mismatch(
                format!("{0}x{0} target", window.n()),
                format!("{}x{}", target.rows(), target.cols()),
            ));
        }
        if !target.is_unitary(TARGET_UNITARITY_TOL) {
            return Err(Error::InvalidArgument(format!(
                "target is not unitary (error {:.3e})",
                target.unitarity_error()
            )));
        }
        if layer_count < 3 || layer_count % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "layer count must be odd and at least 3, got {layer_count}"
            )));
        }
        if !(0.0..=1.0).contains(&fidelity_floor) {
            return Err(Error::InvalidArgument(format!("fidelity floor {fidelity_floor} outside [0, 1]")));
        }
        Ok(Self { target, window, layer_count, policy, fidelity_floor })
    }

    /// Three layers, default floor.
    pub fn three_layer(target: ComplexMatrix, window: ChannelWindow, policy: BoundaryPolicy) -> Result<Self> {
        Self::new(target, window, 3, policy, DEFAULT_FIDELITY_FLOOR)
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn window(&self) -> &ChannelWindow {
        &self.window
    }

    pub fn n(&self) -> usize {
        self.window.n()
    }

    pub fn k(&self) -> usize {
        self.window.k()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_count
    }

    pub fn angle_layers(&self) -> usize {
        self.layer_count.div_ceil(2)
    }

    pub fn spectrum_layers(&self) -> usize {
        self.layer_count / 2
    }

    pub fn policy(&self) -> BoundaryPolicy {
        self.policy
    }

    pub fn fidelity_floor(&self) -> f64 {
        self.fidelity_floor
    }

    pub fn with_window(&self, window: ChannelWindow) -> Result<Self> {
        Self::new(self.target.clone(), window, self.layer_count, self.policy, self.fidelity_floor)
    }

    pub fn with_policy(&self, policy: BoundaryPolicy) -> Self {
        Self { policy, ..self.clone() }
    }
}

pub mod targets {
    //! Named target unitaries.

    use super::*;

    /// `H[j,k] = exp(2 pi i j k / n) / sqrt(n)`; real for `n = 2`.
    pub fn hadamard(n: usize) -> Result<ComplexMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let s = 1.0 / (n as f64).sqrt();
        Ok(ComplexMatrix::from_fn(n, n, |j, k| {
            Complex64::from_polar(s, TAU * ((j * k) % n) as f64 / n as f64)
        }))
    }

    /// The forward unitary DFT of size `n`.
    pub fn dft(n: usize) -> Result<ComplexMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(crate::unitary::dft_matrix(n))
    }

    /// Diagonal clock matrix `Diag(exp(2 pi i j / n))`.
    pub fn clock(n: usize) -> Result<ComplexMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(ComplexMatrix::from_phases(&(0..n).map(|j| TAU * j as f64 / n as f64).collect::<Vec<_>>()))
    }

    pub fn identity(n: usize) -> Result<ComplexMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(ComplexMatrix::identity(n))
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of `diag(R)` moved into `Q`.
    pub fn random_haar(n: usize, seed: u64) -> Result<ComplexMatrix> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = nalgebra::DMatrix::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) / 2f64.sqrt()
        });
        let qr = z.qr();
        let (mut q, r) = qr.unpack();
        for j in 0..n {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
        ComplexMatrix::from_dmatrix(q)
    }

    /// Resolves a target by name: `hadamard2`, `hadamardN`, `dftN`, `clock`,
    /// `identity`, `random-haar`. `n` is used by names without a size suffix.
    pub fn by_name(name: &str, n: usize, seed: u64) -> Result<ComplexMatrix> {
        let lower = name.to_ascii_lowercase();
        let sized = |prefix: &str| -> Option<Result<usize>> {
            lower.strip_prefix(prefix).map(|rest| {
                if rest.is_empty() {
                    Ok(n)
                } else {
                    rest.parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad size in target '{name}'")))
                }
            })
        };
        if let Some(sz) = sized("hadamard") {
            return hadamard(sz?);
        }
        if let Some(sz) = sized("dft") {
            return dft(sz?);
        }
        if let Some(sz) = sized("clock") {
            return clock(sz?);
        }
        if let Some(sz) = sized("identity") {
            return identity(sz?);
        }
        match lower.as_str() {
            "random-haar" | "haar" => random_haar(n, seed),
            _ => Err(Error::InvalidArgument(format!("unknown target '{name}'"))),
        }
    }
}
