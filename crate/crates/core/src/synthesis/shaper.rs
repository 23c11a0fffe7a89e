use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unitary::{ChannelWindow, DiagonalPhase};

/// Per-channel spectral phase `g` over all `K` channels. Channels outside
/// the working window carry zero phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShaperFunction {
    phases: Vec<f64>,
}

impl ShaperFunction {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("shaper needs at least one channel".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("shaper phases"));
        }
        Ok(Self { phases })
    }

    pub fn zeros(k: usize) -> Self {
        Self { phases: vec![0.0; k] }
    }

    /// Shaper with `values[i]` on `window.working_indices()[i]`, zero elsewhere.
    pub fn on_window(window: &ChannelWindow, values: &[f64]) -> Result<Self> {
        let idx = window.working_indices();
        if idx.len() != values.len() {
            return Err(crate::error::mismatch(idx.len(), values.len()));
        }
        let mut phases = vec![0.0; window.k()];
        for (&i, &v) in idx.iter().zip(values) {
            phases[i] = v;
        }
        Self::new(phases)
    }

    /// Linear ramp `g(l) = slope * (j - center)` over every channel.
    pub fn linear(k: usize, center: usize, slope: f64) -> Self {
        Self { phases: (0..k).map(|j| slope * (j as f64 - center as f64)).collect() }
    }

    pub fn k(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn get(&self, j: usize) -> f64 {
        self.phases[j]
    }

    pub fn to_diagonal(&self) -> DiagonalPhase {
        DiagonalPhase::new(self.phases.clone()).expect("shaper phases are finite")
    }

    pub fn norm_sq(&self) -> f64 {
        self.phases.iter().map(|v| v * v).sum()
    }

    /// Cyclic translation by `shift` channels.
    pub fn shifted(&self, shift: isize) -> Self {
        let k = self.k() as isize;
        let mut out = vec![0.0; self.k()];
        for (j, &p) in self.phases.iter().enumerate() {
            out[(j as isize + shift).rem_euclid(k) as usize] = p;
        }
        Self { phases: out }
    }
}

/// `conv(g, sum_i delta(l - l_i))` without any overlap check: copies of the
/// base pattern shifted by each offset are summed.
pub fn convolve_replicas(g: &ShaperFunction, shifts: &[isize]) -> ShaperFunction {
    let mut out = vec![0.0; g.k()];
    for &s in shifts {
        for (o, v) in out.iter_mut().zip(g.shifted(s).phases) {
            *o += v;
        }
    }
    ShaperFunction { phases: out }
}

/// Copies a single-gate shaper to several encoding positions.
///
/// `window` is the window the shaper was designed for; `centers` are the new
/// window centres. Returns the composite shaper and the union of the
/// replicated encoding channels. Working windows of different replicas must
/// not overlap.
pub fn replicate_parallel(
    g: &ShaperFunction,
    window: &ChannelWindow,
    centers: &[usize],
) -> Result<(ShaperFunction, ChannelWindow)> {
    if g.k() != window.k() {
        return Err(crate::error::mismatch(window.k(), g.k()));
    }
    if centers.is_empty() {
        return Err(Error::InvalidArgument("need at least one replica center".into()));
    }
    let replicas = centers
        .iter()
        .map(|&c| window.shifted(c as isize - window.center() as isize))
        .collect::<Result<Vec<_>>>()?;

    let mut owner: Vec<Option<usize>> = vec![None; window.k()];
    for (r, w) in replicas.iter().enumerate() {
        for i in w.working_indices() {
            if let Some(other) = owner[i] {
                return Err(Error::OverlappingWindows(format!(
                    "replicas {other} and {r} share channel {i}"
                )));
            }
            owner[i] = Some(r);
        }
    }

    let shifts: Vec<isize> = centers.iter().map(|&c| c as isize - window.center() as isize).collect();
    let composite = convolve_replicas(g, &shifts);
    let indices = replicas.iter().flat_map(|w| w.channel_indices().to_vec()).collect();
    let union = ChannelWindow::from_indices(window.k(), window.guard(), window.center(), indices)?;
    Ok((composite, union))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> (ShaperFunction, ChannelWindow) {
        let w = ChannelWindow::centered(64, 2, 2).unwrap();
        let g = ShaperFunction::on_window(&w, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        (g, w)
    }

    #[test]
    fn single_replica_at_origin_is_identity() {
        let (g, w) = base();
        let (g2, w2) = replicate_parallel(&g, &w, &[w.center()]).unwrap();
        assert_eq!(g2, g);
        assert_eq!(w2.channel_indices(), w.channel_indices());
    }

    #[test]
    fn two_replicas_copy_pattern() {
        let (g, w) = base();
        let (g2, w2) = replicate_parallel(&g, &w, &[20, 44]).unwrap();
        assert_eq!(w2.channel_indices(), &[20, 21, 44, 45]);
        for (j, v) in [(18, 0.1), (23, 0.6), (42, 0.1), (47, 0.6), (32, 0.0)] {
            assert_eq!(g2.get(j), v);
        }
    }

    #[test]
    fn overlapping_windows_rejected() {
        let (g, w) = base();
        assert!(matches!(
            replicate_parallel(&g, &w, &[30, 34]),
            Err(Error::OverlappingWindows(_))
        ));
        // unchecked convolution sums the overlap
        let c = convolve_replicas(&g, &[-2, 2]);
        assert!((c.get(32) - (0.5 + 0.1)).abs() < 1e-15);
    }
}
