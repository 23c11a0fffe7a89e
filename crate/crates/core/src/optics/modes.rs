use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::field::{Geometry, ScalarField};
use crate::error::{mismatch, Error, Result};

/// OAM modes sharing one annular carrier `exp(-(r - r0)^2 / w^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OamBasisSpec {
    pub charges: Vec<i64>,
    /// Ring radius, metres.
    pub ring_radius: f64,
    /// Radial width, metres.
    pub ring_width: f64,
    /// Interval between encoding charges.
    pub stride: i64,
}

impl OamBasisSpec {
    pub fn new(charges: Vec<i64>, ring_radius: f64, ring_width: f64, stride: i64) -> Result<Self> {
        let mut sorted = charges.clone();
        sorted.sort_unstable();
        if sorted.is_empty() || sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("charges must be non-empty and distinct".into()));
        }
        if !(ring_radius > 0.0 && ring_width > 0.0) {
            return Err(Error::InvalidArgument("ring radius and width must be positive".into()));
        }
        Ok(Self { charges, ring_radius, ring_width, stride })
    }

    /// Ring at half the grid half-width, radial width a quarter of that.
    pub fn default_ring(geometry: &Geometry, charges: Vec<i64>, stride: i64) -> Result<Self> {
        let r0 = geometry.width.min(geometry.height) as f64 * geometry.pitch / 4.0;
        Self::new(charges, r0, r0 / 4.0, stride)
    }

    /// `n` charges `stride` apart, symmetric about zero.
    pub fn symmetric(geometry: &Geometry, n: usize, stride: i64) -> Result<Self> {
        let half = (n as i64 - 1) as f64 / 2.0;
        let charges = (0..n as i64).map(|i| ((i as f64 - half) * stride as f64).round() as i64).collect();
        Self::default_ring(geometry, charges, stride)
    }

    /// Largest charge whose azimuthal phase is sampled at better than pi per
    /// pixel on the inner edge of the ring.
    pub fn max_charge(&self, geometry: &Geometry) -> i64 {
        let r_in = (self.ring_radius - 2.0 * self.ring_width).max(geometry.pitch);
        (PI * r_in / geometry.pitch).floor() as i64
    }

    pub fn check(&self, geometry: &Geometry) -> Result<()> {
        let lim = self.max_charge(geometry);
        if let Some(l) = self.charges.iter().find(|l| l.abs() > lim) {
            return Err(Error::Sampling(format!("charge {l} exceeds the angular sampling limit {lim}")));
        }
        let extent = geometry.width.min(geometry.height) as f64 * geometry.pitch / 2.0;
        if self.ring_radius + 3.0 * self.ring_width > extent {
            return Err(Error::Sampling("ring does not fit on the grid".into()));
        }
        Ok(())
    }
}

/// Unit-power mode `R(r) exp(i l phi)` sampled on the grid.
pub fn oam_mode(l: i64, basis: &OamBasisSpec, geometry: &Geometry) -> Result<ScalarField> {
    let (r0, w) = (basis.ring_radius, basis.ring_width);
    ScalarField::from_fn(*geometry, |x, y| {
        let r = x.hypot(y);
        Complex64::from_polar((-(r - r0).powi(2) / (w * w)).exp(), l as f64 * y.atan2(x))
    })
    .normalized()
}

/// `sum_l c_l mode_l` for a normalised coefficient vector, in basis order.
pub fn make_oam_superposition(coeffs: &[Complex64], basis: &OamBasisSpec, geometry: &Geometry) -> Result<ScalarField> {
    if coeffs.len() != basis.charges.len() {
        return Err(mismatch(basis.charges.len(), coeffs.len()));
    }
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("coefficients have norm^2 {norm}, expected 1")));
    }
    basis.check(geometry)?;
    let mut out = ScalarField::zeros(*geometry);
    for (&l, &c) in basis.charges.iter().zip(coeffs) {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let m = oam_mode(l, basis, geometry)?;
        out.data_mut().par_iter_mut().zip(m.data()).for_each(|(o, v)| *o += c * v);
    }
    // sampled modes are orthogonal only to rounding; fix the power exactly
    out.normalized()
}

/// Overlaps `<mode_l | field>` with each normalised basis mode.
pub fn mode_match_spectrum(field: &ScalarField, basis: &OamBasisSpec) -> Result<Vec<Complex64>> {
    let g = *field.geometry();
    basis.charges.iter().map(|&l| oam_mode(l, basis, &g)?.inner(field)).collect()
}

/// Squared normalised overlap of two coefficient vectors.
pub fn spectrum_fidelity(target: &[Complex64], actual: &[Complex64]) -> Result<f64> {
    if target.len() != actual.len() {
        return Err(mismatch(target.len(), actual.len()));
    }
    let t: Complex64 = target.iter().zip(actual).map(|(a, b)| a.conj() * b).sum();
    let na: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = actual.iter().map(|z| z.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((t.norm_sqr() / (na * nb)).clamp(0.0, 1.0))
}

/// Intensity averaged over radius in `bins` equal azimuthal sectors, starting at `-pi`.
pub fn angular_profile(field: &ScalarField, bins: usize) -> Vec<f64> {
    let g = field.geometry();
    let mut acc = vec![0.0; bins];
    for r in 0..g.height {
        for c in 0..g.width {
            let (x, y) = (g.x(c), g.y(r));
            if x == 0.0 && y == 0.0 {
                continue;
            }
            let t = (y.atan2(x) + PI) / (2.0 * PI);
            let b = ((t * bins as f64) as usize).min(bins - 1);
            acc[b] += field.get(c, r).norm_sqr();
        }
    }
    acc
}

/// Angle (radians, in `[0, 2 pi)`) by which rotating `reference` best matches
/// `signal`, from circular cross-correlation of two angular profiles.
pub fn best_rotation(reference: &[f64], signal: &[f64]) -> f64 {
    let n = reference.len();
    let mut best = (f64::NEG_INFINITY, 0);
    for shift in 0..n {
        let c: f64 = (0..n).map(|i| reference[i] * signal[(i + shift) % n]).sum();
        if c > best.0 {
            best = (c, shift);
        }
    }
    2.0 * PI * best.1 as f64 / n as f64
}
