//! One-dimensional path-encoded model.
//!
//! Channel `n` (relative to the window centre) is a transverse tilt
//! `exp(-i n k_y y)` on a grating plane and a focused spot at `y = n L` on the
//! following mask plane. Planes are linked by exact Fourier stages of focal
//! length `2f`, so every second stage mirrors the coordinate; the model tracks
//! that parity instead of adding imaging optics.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{mismatch, Error, Result};
use crate::synthesis::{BoundaryPolicy, GateParams, GateSpec, ShaperFunction, SineSeries};
use crate::unitary::{phase_test_fidelity, ComplexMatrix};

/// Channel spacing, focal length and wavelength of the path setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLayout {
    /// Channel spacing `L` in the focal planes, metres.
    pub spacing: f64,
    pub focal_length: f64,
    pub wavelength: f64,
    /// Channels the grid must resolve (usually `N + 2d`).
    pub n_channels: usize,
}

impl PathLayout {
    pub fn new(spacing: f64, focal_length: f64, wavelength: f64, n_channels: usize) -> Result<Self> {
        if [spacing, focal_length, wavelength].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("spacing, focal length and wavelength must be positive".into()));
        }
        if n_channels == 0 {
            return Err(Error::InvalidArgument("need at least one channel".into()));
        }
        Ok(Self { spacing, focal_length, wavelength, n_channels })
    }

    /// `L = 2 mm`, `f = 40 cm`, 1550 nm.
    pub fn standard(n_channels: usize) -> Self {
        Self { spacing: 2e-3, focal_length: 0.4, wavelength: 1550e-9, n_channels }
    }

    /// `k_y = pi L / (lambda f)`.
    pub fn k_y(&self) -> f64 {
        PI * self.spacing / (self.wavelength * self.focal_length)
    }

    /// Grating period `2 lambda f / L`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.k_y()
    }

    /// Focal length of one plane-to-plane Fourier stage (planes sit `2f` apart).
    pub fn stage_focal_length(&self) -> f64 {
        2.0 * self.focal_length
    }
}

/// Sampling of the grating planes and the focal planes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub samples: usize,
    pub grating_pitch: f64,
    pub focal_pitch: f64,
    /// `1/e` field radius of the Gaussian envelope on grating planes.
    pub waist: f64,
}

impl PathGrid {
    pub const DEFAULT_SAMPLES: usize = 1 << 14;

    pub fn for_layout(layout: &PathLayout) -> Result<Self> {
        Self::with_samples(layout, Self::DEFAULT_SAMPLES)
    }

    /// Focal window of at least `8 n_channels L` (wider if critical sampling
    /// allows); focal spots of radius `L / 10`.
    pub fn with_samples(layout: &PathLayout, samples: usize) -> Result<Self> {
        if samples < 16 || samples % 2 != 0 {
            return Err(Error::InvalidArgument(format!("sample count {samples} must be even and >= 16")));
        }
        let lf = layout.wavelength * layout.stage_focal_length();
        let window = (8.0 * layout.n_channels as f64 * layout.spacing).max((lf * samples as f64).sqrt());
        let focal_pitch = window / samples as f64;
        let grating_pitch = lf / (samples as f64 * focal_pitch);
        let waist = lf / (PI * layout.spacing / 10.0);
        let grid = Self { samples, grating_pitch, focal_pitch, waist };
        if 4.0 * waist > grating_pitch * samples as f64 / 2.0 {
            return Err(Error::Sampling("Gaussian envelope does not fit the grating plane".into()));
        }
        if focal_pitch > layout.spacing / 20.0 {
            return Err(Error::Sampling("focal planes sample each channel too coarsely".into()));
        }
        Ok(grid)
    }

    fn coord(&self, i: usize, pitch: f64) -> f64 {
        (i as f64 - (self.samples / 2) as f64) * pitch
    }

    pub fn grating_y(&self, i: usize) -> f64 {
        self.coord(i, self.grating_pitch)
    }

    pub fn focal_y(&self, i: usize) -> f64 {
        self.coord(i, self.focal_pitch)
    }

    /// Largest `|n|` whose tilt stays below a quarter turn per sample.
    pub fn max_channel(&self, layout: &PathLayout) -> i64 {
        (PI / 2.0 / (layout.k_y() * self.grating_pitch)).floor() as i64
    }
}

/// Sampled 1-D field.
#[derive(Debug, Clone, PartialEq)]
pub struct PathField {
    pub data: Vec<Complex64>,
    pub pitch: f64,
}

impl PathField {
    pub fn power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.pitch
    }

    pub fn inner(&self, other: &PathField) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.pitch
    }

    fn normalized(mut self) -> Result<Self> {
        let p = self.power();
        if p == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / p.sqrt();
        self.data.iter_mut().for_each(|z| *z *= s);
        Ok(self)
    }

    fn apply_phase(&mut self, phase: &[f64]) {
        self.data.par_iter_mut().zip(phase).for_each(|(z, &p)| *z *= Complex64::from_polar(1.0, p));
    }
}

fn envelope(grid: &PathGrid) -> Vec<f64> {
    (0..grid.samples).map(|i| (-(grid.grating_y(i) / grid.waist).powi(2)).exp()).collect()
}

/// `sum_n c_n exp(-i sigma n k_y y)` on the Gaussian envelope, unit power.
fn tilted_field(coeffs: &[Complex64], channels: &[i64], sigma: f64, layout: &PathLayout, grid: &PathGrid) -> Result<PathField> {
    let lim = grid.max_channel(layout);
    if let Some(n) = channels.iter().find(|n| n.abs() > lim) {
        return Err(Error::Sampling(format!("channel {n} exceeds the grid Nyquist limit {lim}")));
    }
    let env = envelope(grid);
    let ky = layout.k_y();
    let data = (0..grid.samples)
        .into_par_iter()
        .map(|i| {
            let y = grid.grating_y(i);
            let s: Complex64 = coeffs
                .iter()
                .zip(channels)
                .map(|(c, &n)| c * Complex64::from_polar(1.0, -sigma * n as f64 * ky * y))
                .sum();
            s * env[i]
        })
        .collect();
    PathField { data, pitch: grid.grating_pitch }.normalized()
}

/// Input state with amplitude `c_n` on relative channel `channels[n]`.
pub fn path_input_field(coeffs: &[Complex64], channels: &[i64], layout: &PathLayout, grid: &PathGrid) -> Result<PathField> {
    if coeffs.len() != channels.len() {
        return Err(mismatch(channels.len(), coeffs.len()));
    }
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("coefficients have norm^2 {norm}, expected 1")));
    }
    tilted_field(coeffs, channels, 1.0, layout, grid)
}

/// `f(k_y y)` sampled on a grating plane.
pub fn grating_phase(series: &SineSeries, layout: &PathLayout, grid: &PathGrid) -> Vec<f64> {
    let ky = layout.k_y();
    (0..grid.samples).map(|i| series.eval(ky * grid.grating_y(i))).collect()
}

/// Grating realising an abstract angle layer on a plane of parity `sigma`.
fn layer_grating(series: &SineSeries, sigma: f64, layout: &PathLayout, grid: &PathGrid) -> Vec<f64> {
    let ky = layout.k_y();
    (0..grid.samples).map(|i| series.eval(sigma * ky * grid.grating_y(i) - PI)).collect()
}

/// Abstract channel index of focal sample `i` on a plane of parity `sigma`.
fn focal_channel(i: usize, sigma: f64, center: usize, layout: &PathLayout, grid: &PathGrid) -> i64 {
    center as i64 + (sigma * (grid.focal_y(i) / layout.spacing).round()) as i64
}

/// `g(center + round(y / L))`, zero outside `0..K`.
pub fn channel_mask(g: &ShaperFunction, center: usize, layout: &PathLayout, grid: &PathGrid) -> Vec<f64> {
    (0..grid.samples)
        .map(|i| {
            let j = focal_channel(i, 1.0, center, layout, grid);
            if (0..g.k() as i64).contains(&j) {
                g.get(j as usize)
            } else {
                0.0
            }
        })
        .collect()
}

fn half_shift(data: &mut [Complex64]) {
    let n = data.len();
    data.rotate_left(n / 2);
}

/// Exact Fourier stage between the grating and focal samplings.
fn stage(field: &PathField, layout: &PathLayout, grid: &PathGrid) -> PathField {
    let n = grid.samples;
    let to_focal = (field.pitch - grid.grating_pitch).abs() <= 1e-12 * grid.grating_pitch;
    let out_pitch = if to_focal { grid.focal_pitch } else { grid.grating_pitch };
    let mut data = field.data.clone();
    half_shift(&mut data);
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut data);
    half_shift(&mut data);
    let s = (field.pitch / out_pitch).sqrt() / (n as f64).sqrt();
    data.iter_mut().for_each(|z| *z *= s);
    debug_assert!((field.pitch * out_pitch * n as f64 - layout.wavelength * layout.stage_focal_length()).abs() < 1e-9 * field.pitch * out_pitch * n as f64);
    PathField { data, pitch: out_pitch }
}

/// Plane-by-plane drive of one input through the layers.
#[derive(Debug, Clone)]
pub struct PathRun {
    /// Field on the readout plane.
    pub output: PathField,
    /// Parity of the readout plane (channel `n` sits at `sigma n L`).
    pub sigma: f64,
}

/// Runs `input` through the gratings and channel masks of `params`. Under
/// the filtered policy every mask plane blocks light outside the working
/// channels.
pub fn run_path(input: &PathField, params: &GateParams, spec: &GateSpec, layout: &PathLayout, grid: &PathGrid) -> Result<PathRun> {
    if params.layer_count() != spec.layer_count() {
        return Err(mismatch(spec.layer_count(), params.layer_count()));
    }
    let window = spec.window();
    let center = window.center();
    let working = window.working_mask();
    let filtered = spec.policy() == BoundaryPolicy::Filtered;
    let mut field = input.clone();
    let mut sigma = 1.0;
    for (q, series) in params.series.iter().enumerate() {
        field.apply_phase(&layer_grating(series, sigma, layout, grid));
        field = stage(&field, layout, grid);
        if let Some(g) = params.shapers.get(q) {
            field.data.par_iter_mut().enumerate().for_each(|(i, z)| {
                let j = focal_channel(i, sigma, center, layout, grid);
                let inside = (0..g.k() as i64).contains(&j);
                if filtered && !(inside && working[j as usize]) {
                    *z = Complex64::new(0.0, 0.0);
                } else if inside {
                    *z *= Complex64::from_polar(1.0, g.get(j as usize));
                }
            });
            field = stage(&field, layout, grid);
            sigma = -sigma;
        }
    }
    Ok(PathRun { output: field, sigma })
}

/// Unit-power spot of relative channel `n` on a readout plane of parity `sigma`.
fn reference_spot(n: i64, sigma: f64, layout: &PathLayout, grid: &PathGrid) -> Result<PathField> {
    let tilt = tilted_field(&[Complex64::new(1.0, 0.0)], &[n], sigma, layout, grid)?;
    Ok(stage(&tilt, layout, grid))
}

/// Complex amplitudes on relative channels, by overlap with each channel's reference spot.
pub fn read_channels(run: &PathRun, channels: &[i64], layout: &PathLayout, grid: &PathGrid) -> Result<Vec<Complex64>> {
    channels
        .iter()
        .map(|&n| Ok(reference_spot(n, run.sigma, layout, grid)?.inner(&run.output)))
        .collect()
}

/// Fraction of readout power inside the strips of `channels`.
pub fn channel_power_fraction(run: &PathRun, channels: &[i64], layout: &PathLayout, grid: &PathGrid) -> f64 {
    let total = run.output.power();
    let inside: f64 = run
        .output
        .data
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let n = (run.sigma * (grid.focal_y(*i) / layout.spacing).round()) as i64;
            channels.contains(&n)
        })
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        * run.output.pitch;
    if total == 0.0 {
        0.0
    } else {
        inside / total
    }
}

fn relative_channels(spec: &GateSpec) -> Vec<i64> {
    let c = spec.window().center() as i64;
    spec.window().channel_indices().iter().map(|&j| j as i64 - c).collect()
}

/// `N x N` operator measured by driving each encoding channel through the model.
pub fn build_path_operator(params: &GateParams, spec: &GateSpec, layout: &PathLayout, grid: &PathGrid) -> Result<ComplexMatrix> {
    let channels = relative_channels(spec);
    let n = channels.len();
    let cols = channels
        .par_iter()
        .map(|&ch| {
            let input = tilted_field(&[Complex64::new(1.0, 0.0)], &[ch], 1.0, layout, grid)?;
            let run = run_path(&input, params, spec, layout, grid)?;
            read_channels(&run, &channels, layout, grid)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

/// Output magnitudes for basis inputs, each column scaled by its total output power.
pub fn amplitude_scan(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = v.shape();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for c in 0..cols {
        let p: f64 = (0..rows).map(|r| v.get(r, c).norm_sqr()).sum();
        if p == 0.0 {
            return Err(Error::ZeroNorm);
        }
        for r in 0..rows {
            out.set(r, c, Complex64::new(v.get(r, c).norm() / p.sqrt(), 0.0));
        }
    }
    Ok(out)
}

/// Drives the columns of `U^dagger` through `v` and scores the output magnitudes.
pub fn phase_test(v: &ComplexMatrix, target: &ComplexMatrix) -> Result<f64> {
    let w = v.matmul(&target.adjoint())?;
    phase_test_fidelity(target, &amplitude_scan(&w)?)
}
