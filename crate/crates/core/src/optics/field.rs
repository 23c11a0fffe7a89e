use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};

/// Sampling of a square-pixel transverse plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub width: usize,
    pub height: usize,
    /// Metres per pixel on both axes.
    pub pitch: f64,
    /// Metres.
    pub wavelength: f64,
}

impl Geometry {
    pub fn new(width: usize, height: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        for (name, n) in [("width", width), ("height", height)] {
            if n < 2 || n % 2 != 0 || !small_primes_only(n) {
                return Err(Error::InvalidArgument(format!(
                    "{name} {n} must be even and a product of primes <= 7"
                )));
            }
        }
        if !(pitch > 0.0 && pitch.is_finite()) || !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidArgument("pitch and wavelength must be positive".into()));
        }
        Ok(Self { width, height, pitch, wavelength })
    }

    /// 1080 x 1080 pixels of 8 um at 1550 nm.
    pub fn slm_default() -> Self {
        Self { width: 1080, height: 1080, pitch: 8e-6, wavelength: 1550e-9 }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical x of column `i`; pixel `width / 2` sits on the axis.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.width / 2) as f64) * self.pitch
    }

    /// Physical y of row `j`.
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.height / 2) as f64) * self.pitch
    }

    pub fn with_pitch(&self, pitch: f64) -> Self {
        Self { pitch, ..*self }
    }

    /// Evaluates `f(x, y)` on every pixel, row-major.
    pub fn sample<T: Send>(&self, f: impl Fn(f64, f64) -> T + Sync) -> Vec<T> {
        (0..self.len())
            .into_par_iter()
            .map(|idx| f(self.x(idx % self.width), self.y(idx / self.width)))
            .collect()
    }
}

fn small_primes_only(mut n: usize) -> bool {
    for p in [2, 3, 5, 7] {
        while n % p == 0 {
            n /= p;
        }
    }
    n == 1
}

/// Sampled complex scalar field, row-major with rows along y.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    geometry: Geometry,
    data: Vec<Complex64>,
    /// Fraction of power discarded by band limiting so far.
    clip_loss: f64,
}

impl ScalarField {
    pub fn new(geometry: Geometry, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != geometry.len() {
            return Err(mismatch(geometry.len(), data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self { geometry, data, clip_loss: 0.0 })
    }

    pub fn zeros(geometry: Geometry) -> Self {
        Self { geometry, data: vec![Complex64::new(0.0, 0.0); geometry.len()], clip_loss: 0.0 }
    }

    pub fn from_fn(geometry: Geometry, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        Self { data: geometry.sample(f), geometry, clip_loss: 0.0 }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, col: usize, row: usize) -> Complex64 {
        self.data[row * self.geometry.width + col]
    }

    pub fn clip_loss(&self) -> f64 {
        self.clip_loss
    }

    pub(crate) fn add_clip_loss(&mut self, fraction: f64) {
        self.clip_loss = 1.0 - (1.0 - self.clip_loss) * (1.0 - fraction);
    }

    pub(crate) fn set_geometry(&mut self, geometry: Geometry) {
        debug_assert_eq!(geometry.len(), self.data.len());
        self.geometry = geometry;
    }

    /// `sum |E|^2 * pitch^2`.
    pub fn power(&self) -> f64 {
        self.data.par_iter().map(|z| z.norm_sqr()).sum::<f64>() * self.geometry.pitch.powi(2)
    }

    pub fn scale(&mut self, s: f64) {
        self.data.par_iter_mut().for_each(|z| *z *= s);
    }

    /// Rescales to unit power.
    pub fn normalized(mut self) -> Result<Self> {
        let p = self.power();
        if p == 0.0 {
            return Err(Error::ZeroNorm);
        }
        self.scale(1.0 / p.sqrt());
        Ok(self)
    }

    /// `<self | other> = sum conj(self) * other * pitch^2`.
    pub fn inner(&self, other: &ScalarField) -> Result<Complex64> {
        if self.geometry != other.geometry {
            return Err(Error::InvalidArgument("fields sampled on different grids".into()));
        }
        let s: Complex64 = self.data.par_iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.geometry.pitch.powi(2))
    }

    pub fn apply(&mut self, mask: &PhaseMask) -> Result<()> {
        if mask.width != self.geometry.width || mask.height != self.geometry.height {
            return Err(mismatch(
                format!("{}x{}", self.geometry.width, self.geometry.height),
                format!("{}x{}", mask.width, mask.height),
            ));
        }
        self.data
            .par_iter_mut()
            .zip(&mask.phases)
            .for_each(|(z, &p)| *z *= Complex64::from_polar(1.0, p));
        Ok(())
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Real phase pattern applied as `exp(i * phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMask {
    pub width: usize,
    pub height: usize,
    pub phases: Vec<f64>,
}

impl PhaseMask {
    pub fn new(width: usize, height: usize, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != width * height {
            return Err(mismatch(width * height, phases.len()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("mask phases"));
        }
        Ok(Self { width, height, phases })
    }

    pub fn flat(geometry: &Geometry) -> Self {
        Self { width: geometry.width, height: geometry.height, phases: vec![0.0; geometry.len()] }
    }

    pub fn from_fn(geometry: &Geometry, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        Self { width: geometry.width, height: geometry.height, phases: geometry.sample(f) }
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.phases[row * self.width + col]
    }

    pub fn negated(&self) -> Self {
        Self { phases: self.phases.iter().map(|p| -p).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &PhaseMask) -> Result<Self> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(mismatch(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(Self { phases: self.phases.iter().zip(&other.phases).map(|(a, b)| a + b).collect(), ..self.clone() })
    }
}

/// Unnormalised 2-D FFT in place (`inverse` selects the sign), rows then columns.
pub(crate) fn fft2(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row_plan, col_plan) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    data.par_chunks_mut(width).for_each(|row| row_plan.process(row));
    let mut t = transpose(data, width, height);
    t.par_chunks_mut(height).for_each(|col| col_plan.process(col));
    data.copy_from_slice(&transpose(&t, height, width));
}

fn transpose(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(height).enumerate().for_each(|(c, col)| {
        for (r, v) in col.iter_mut().enumerate() {
            *v = data[r * width + c];
        }
    });
    out
}

/// Cyclic shift by half the grid on both axes (its own inverse for even sizes).
pub(crate) fn half_shift(data: &mut [Complex64], width: usize, height: usize) {
    let src = data.to_vec();
    data.par_chunks_mut(width).enumerate().for_each(|(r, row)| {
        let sr = (r + height / 2) % height;
        for (c, v) in row.iter_mut().enumerate() {
            *v = src[sr * width + (c + width / 2) % width];
        }
    });
}

/// Unitary DFT with the grid centre as the origin in both planes.
pub(crate) fn centered_fft2(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    half_shift(data, width, height);
    fft2(data, width, height, inverse);
    half_shift(data, width, height);
    let s = 1.0 / ((width * height) as f64).sqrt();
    data.par_iter_mut().for_each(|z| *z *= s);
}
