use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::matrix::{dft_matrix, ComplexMatrix};
use crate::error::{mismatch, Error, Result};

/// Phase-only diagonal `Diag(exp(i*phase_k))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPhase {
    phases: Vec<f64>,
}

impl DiagonalPhase {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("diagonal needs at least one phase".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("diagonal phases"));
        }
        Ok(Self { phases })
    }

    pub fn zeros(k: usize) -> Self {
        Self { phases: vec![0.0; k] }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `exp(i*phase_k)` for every channel.
    pub fn factors(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_phases(&self.phases)
    }

    /// Equality of the induced operators, i.e. phases compared modulo 2*pi.
    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.phases.iter().zip(&other.phases).all(|(a, b)| {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d) <= tol
            })
    }
}

/// Basis in which a diagonal layer acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Azimuthal angle (or transverse momentum); acts as `F^dagger D F`.
    Angle,
    /// OAM charge (or path index); the basis state vectors live in.
    Spectrum,
}

impl Domain {
    pub fn other(self) -> Self {
        match self {
            Domain::Angle => Domain::Spectrum,
            Domain::Spectrum => Domain::Angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub domain: Domain,
    pub diagonal: DiagonalPhase,
}

/// Diagonal layers in order of application: `layers[0]` acts first on the
/// input state, so the composed operator is `L_M ... L_2 L_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    k: usize,
    layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(k: usize, layers: Vec<Layer>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("stack dimension must be positive".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.diagonal.dim() != k {
                return Err(mismatch(
                    format!("layer {i} of dimension {k}"),
                    layer.diagonal.dim(),
                ));
            }
        }
        if layers.windows(2).any(|w| w[0].domain == w[1].domain) {
            return Err(Error::InvalidArgument("layer domains must alternate".into()));
        }
        Ok(Self { k, layers })
    }

    /// Angle / spectrum / angle / ... stack from diagonals in application order.
    pub fn alternating(k: usize, first: Domain, diagonals: Vec<DiagonalPhase>) -> Result<Self> {
        let mut domain = first;
        let layers = diagonals
            .into_iter()
            .map(|diagonal| {
                let l = Layer { domain, diagonal };
                domain = domain.other();
                l
            })
            .collect();
        Self::new(k, layers)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Whether the layer count respects `M <= 2N - 1`. Advisory only.
    pub fn within_layer_bound(&self, n: usize) -> bool {
        self.layers.len() < 2 * n
    }
}

/// Multiplies out a layer stack into its `K x K` operator.
pub fn compose_stack(stack: &LayerStack) -> Result<ComplexMatrix> {
    let k = stack.k();
    let f = dft_matrix(k);
    let fh = f.adjoint();
    let mut v = ComplexMatrix::identity(k);
    for layer in stack.layers() {
        let d = layer.diagonal.to_matrix();
        let op = match layer.domain {
            Domain::Spectrum => d,
            Domain::Angle => &(&fh * &d) * &f,
        };
        v = op.matmul(&v)?;
    }
    Ok(v)
}
