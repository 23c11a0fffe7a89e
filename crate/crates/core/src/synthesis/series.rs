use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::unitary::DiagonalPhase;

/// Truncated sine expansion `f(phi) = sum_n A_n sin(n*phi + theta_n)`, `n = 1..=p`.
///
/// Amplitudes lie in `[0, m*pi)` and phases in `[0, 2*pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineSeries {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    bound: f64,
}

impl SineSeries {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>, bound: f64) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(crate::error::mismatch(amplitudes.len(), phases.len()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("amplitude bound multiplier {bound} must be positive")));
        }
        let amax = bound * PI;
        if let Some(a) = amplitudes.iter().find(|a| !(0.0..amax).contains(*a)) {
            return Err(Error::InvalidArgument(format!("amplitude {a} outside [0, {amax})")));
        }
        if let Some(t) = phases.iter().find(|t| !(0.0..TAU).contains(*t)) {
            return Err(Error::InvalidArgument(format!("phase {t} outside [0, 2pi)")));
        }
        Ok(Self { amplitudes, phases, bound })
    }

    /// All-zero series with `p` harmonics.
    pub fn flat(p: usize, bound: f64) -> Self {
        Self { amplitudes: vec![0.0; p], phases: vec![0.0; p], bound }
    }

    /// Builds a series from unconstrained values: amplitudes are clamped
    /// into range and phases wrapped. A negative amplitude is folded into
    /// its phase first.
    pub fn normalized(amplitudes: &[f64], phases: &[f64], bound: f64) -> Result<Self> {
        let amax = bound * PI;
        let mut a = Vec::with_capacity(amplitudes.len());
        let mut t = Vec::with_capacity(phases.len());
        for (&amp, &ph) in amplitudes.iter().zip(phases) {
            let (amp, ph) = if amp < 0.0 { (-amp, ph + PI) } else { (amp, ph) };
            a.push(amp.min(amax * (1.0 - 1e-12)));
            t.push(wrap_phase(ph));
        }
        Self::new(a, t, bound)
    }

    pub fn harmonics(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The amplitude-bound multiplier `m`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(i, (a, t))| a * ((i + 1) as f64 * phi + t).sin())
            .sum()
    }

    /// Squared parameter norm.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().chain(&self.phases).map(|v| v * v).sum()
    }
}

/// `x mod 2*pi` in `[0, 2*pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Angle of bin `k` out of `K`: bins start at `-pi` and cover `[-pi, pi)`.
pub fn bin_angle(k: usize, bins: usize) -> f64 {
    TAU * k as f64 / bins as f64 - PI
}

/// Samples the angular modulation on `K` bins: `phase_k = f(2 pi k / K - pi)`.
pub fn sample_angular_diagonal(series: &SineSeries, k: usize) -> Result<DiagonalPhase> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 angle bins, got {k}")));
    }
    DiagonalPhase::new((0..k).map(|i| series.eval(bin_angle(i, k))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_samples_to_zero() {
        let d = sample_angular_diagonal(&SineSeries::flat(3, 1.0), 16).unwrap();
        assert!(d.phases().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn single_harmonic_k4() {
        // A1 = pi is outside [0, pi), so build through the bound m = 2.
        let s = SineSeries::new(vec![PI], vec![0.0], 2.0).unwrap();
        let d = sample_angular_diagonal(&s, 4).unwrap();
        let expected = [0.0, -PI, 0.0, PI];
        for (got, want) in d.phases().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn validation() {
        assert!(SineSeries::new(vec![PI], vec![0.0], 1.0).is_err());
        assert!(SineSeries::new(vec![0.5], vec![TAU], 1.0).is_err());
        assert!(SineSeries::new(vec![0.5, 0.1], vec![0.0], 1.0).is_err());
        assert!(sample_angular_diagonal(&SineSeries::flat(1, 1.0), 1).is_err());
    }

    #[test]
    fn normalized_folds_sign() {
        let s = SineSeries::normalized(&[-1.0], &[0.5], 1.0).unwrap();
        assert!((s.amplitudes()[0] - 1.0).abs() < 1e-15);
        for phi in [-2.0, 0.3, 1.7] {
            assert!((s.eval(phi) - (-(phi + 0.5).sin())).abs() < 1e-12);
        }
    }
}
