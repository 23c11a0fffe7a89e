use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use super::series::{bin_angle, sample_angular_diagonal, SineSeries};
use super::shaper::ShaperFunction;
use super::spec::{BoundaryPolicy, GateSpec};
use crate::error::{mismatch, Error, Result};
use crate::unitary::{
    central_block, dft_matrix, fidelity, success_probability, ComplexMatrix, Domain, LayerStack,
};

/// Layer parameters in application order: angle layers are the
/// even-numbered layers, spectrum layers the odd-numbered ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub series: Vec<SineSeries>,
    pub shapers: Vec<ShaperFunction>,
}

impl GateParams {
    /// All-zero parameters (the identity stack).
    pub fn zeros(spec: &GateSpec, harmonics: usize, bound: f64) -> Self {
        Self {
            series: vec![SineSeries::flat(harmonics, bound); spec.angle_layers()],
            shapers: vec![ShaperFunction::zeros(spec.k()); spec.spectrum_layers()],
        }
    }

    pub fn layer_count(&self) -> usize {
        self.series.len() + self.shapers.len()
    }

    /// Stack of `K`-channel diagonals, starting and ending in the angle domain.
    pub fn to_stack(&self, k: usize) -> Result<LayerStack> {
        if self.series.len() != self.shapers.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} angle layers need {} spectrum layers, got {}",
                self.series.len(),
                self.series.len().saturating_sub(1),
                self.shapers.len()
            )));
        }
        let mut diags = Vec::with_capacity(self.layer_count());
        for (i, s) in self.series.iter().enumerate() {
            diags.push(sample_angular_diagonal(s, k)?);
            if let Some(g) = self.shapers.get(i) {
                if g.k() != k {
                    return Err(mismatch(k, g.k()));
                }
                diags.push(g.to_diagonal());
            }
        }
        LayerStack::alternating(k, Domain::Angle, diags)
    }
}

/// Encoding block and its two figures of merit.
#[derive(Debug, Clone, PartialEq)]
pub struct GateEvaluation {
    pub v_central: ComplexMatrix,
    pub fidelity: f64,
    pub probability: f64,
}

/// Full `K x K` operator of the stack under the spec's boundary policy.
/// With FILTERED, the working-window projector is applied before, between
/// and after all layers.
pub fn gate_operator(params: &GateParams, spec: &GateSpec) -> Result<ComplexMatrix> {
    if params.layer_count() != spec.layer_count() {
        return Err(mismatch(spec.layer_count(), params.layer_count()));
    }
    let k = spec.k();
    let stack = params.to_stack(k)?;
    let f = dft_matrix(k);
    let fh = f.adjoint();
    let projector = match spec.policy() {
        BoundaryPolicy::Open => None,
        BoundaryPolicy::Filtered => {
            let mask = spec.window().working_mask();
            Some(ComplexMatrix::from_fn(k, k, |r, c| {
                if r == c && mask[r] {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }))
        }
    };
    let mut v = projector.clone().unwrap_or_else(|| ComplexMatrix::identity(k));
    for layer in stack.layers() {
        let d = layer.diagonal.to_matrix();
        let op = match layer.domain {
            Domain::Spectrum => d,
            Domain::Angle => &(&fh * &d) * &f,
        };
        v = &op * &v;
        if let Some(p) = &projector {
            v = p * &v;
        }
    }
    Ok(v)
}

/// Builds the stack, applies the boundary policy and measures the encoding block.
pub fn evaluate_gate(params: &GateParams, spec: &GateSpec) -> Result<GateEvaluation> {
    let v = gate_operator(params, spec)?;
    let v_central = central_block(&v, spec.window())?;
    let probability = success_probability(&v_central)?;
    let fidelity = match fidelity(spec.target(), &v_central) {
        Ok(f) => f,
        Err(Error::ZeroNorm) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(GateEvaluation { v_central, fidelity, probability })
}

/// Mapping between [`GateParams`] and a flat real vector.
///
/// Per angle layer: `A_1..A_p, theta_1..theta_p`. Per spectrum layer: one
/// phase per working-window channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    k: usize,
    harmonics: usize,
    bound: f64,
    layer_count: usize,
    working: Vec<usize>,
}

impl ParamLayout {
    pub fn new(spec: &GateSpec, harmonics: usize, bound: f64) -> Result<Self> {
        if harmonics == 0 {
            return Err(Error::InvalidArgument("need at least one harmonic".into()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("amplitude bound {bound} must be positive")));
        }
        Ok(Self {
            k: spec.k(),
            harmonics,
            bound,
            layer_count: spec.layer_count(),
            working: spec.window().working_indices(),
        })
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn working(&self) -> &[usize] {
        &self.working
    }

    fn layer_len(&self, layer: usize) -> usize {
        if layer % 2 == 0 {
            2 * self.harmonics
        } else {
            self.working.len()
        }
    }

    /// Start offset of each layer's parameters.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.layer_count);
        let mut o = 0;
        for l in 0..self.layer_count {
            out.push(o);
            o += self.layer_len(l);
        }
        out
    }

    pub fn len(&self) -> usize {
        (0..self.layer_count).map(|l| self.layer_len(l)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest admissible amplitude; the range is half-open.
    pub fn amplitude_max(&self) -> f64 {
        self.bound * PI * (1.0 - 1e-12)
    }

    /// Box bounds: amplitudes in `[0, m pi)`, everything else free.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::NEG_INFINITY; self.len()];
        let mut hi = vec![f64::INFINITY; self.len()];
        for (l, o) in self.offsets().into_iter().enumerate() {
            if l % 2 == 0 {
                for i in o..o + self.harmonics {
                    lo[i] = 0.0;
                    hi[i] = self.amplitude_max();
                }
            }
        }
        (lo, hi)
    }

    /// Parameters from a flat vector; amplitudes are clamped and phases wrapped.
    pub fn to_params(&self, x: &[f64]) -> Result<GateParams> {
        if x.len() != self.len() {
            return Err(mismatch(self.len(), x.len()));
        }
        let p = self.harmonics;
        let mut series = Vec::new();
        let mut shapers = Vec::new();
        for (l, o) in self.offsets().into_iter().enumerate() {
            if l % 2 == 0 {
                series.push(SineSeries::normalized(&x[o..o + p], &x[o + p..o + 2 * p], self.bound)?);
            } else {
                let mut g = vec![0.0; self.k];
                for (j, &i) in self.working.iter().enumerate() {
                    g[i] = x[o + j];
                }
                shapers.push(ShaperFunction::new(g)?);
            }
        }
        Ok(GateParams { series, shapers })
    }

    /// Flat vector of existing parameters. Shaper values off the working
    /// window are dropped.
    pub fn from_params(&self, params: &GateParams) -> Result<Vec<f64>> {
        if params.layer_count() != self.layer_count {
            return Err(mismatch(self.layer_count, params.layer_count()));
        }
        let mut x = Vec::with_capacity(self.len());
        for l in 0..self.layer_count {
            if l % 2 == 0 {
                let s = &params.series[l / 2];
                if s.harmonics() != self.harmonics {
                    return Err(mismatch(self.harmonics, s.harmonics()));
                }
                x.extend_from_slice(s.amplitudes());
                x.extend_from_slice(s.phases());
            } else {
                let g = &params.shapers[l / 2];
                if g.k() != self.k {
                    return Err(mismatch(self.k, g.k()));
                }
                x.extend(self.working.iter().map(|&i| g.get(i)));
            }
        }
        Ok(x)
    }
}

/// Stored forward pass for one parameter vector.
pub struct Forward {
    /// Per layer: diagonal factors.
    factors: Vec<Vec<Complex64>>,
    /// Per layer, per input column: state entering the diagonal, in that layer's basis.
    states: Vec<Vec<Vec<Complex64>>>,
    pub v_central: ComplexMatrix,
    pub fidelity: f64,
    pub probability: f64,
    /// `Tr(U^dagger V)`, `|U|^2`, `|V|^2`.
    overlap: (Complex64, f64, f64),
}

/// FFT-based evaluator with adjoint gradients, used inside the optimizer.
pub struct Evaluator {
    layout: ParamLayout,
    target: ComplexMatrix,
    channels: Vec<usize>,
    mask: Option<Vec<bool>>,
    angles: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Evaluator {
    pub fn new(spec: &GateSpec, harmonics: usize, bound: f64) -> Result<Self> {
        let layout = ParamLayout::new(spec, harmonics, bound)?;
        let k = spec.k();
        let mut planner = FftPlanner::new();
        Ok(Self {
            layout,
            target: spec.target().clone(),
            channels: spec.window().channel_indices().to_vec(),
            mask: match spec.policy() {
                BoundaryPolicy::Open => None,
                BoundaryPolicy::Filtered => Some(spec.window().working_mask()),
            },
            angles: (0..k).map(|i| bin_angle(i, k)).collect(),
            fwd: planner.plan_fft_forward(k),
            inv: planner.plan_fft_inverse(k),
        })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    fn k(&self) -> usize {
        self.angles.len()
    }

    fn layer_phases(&self, x: &[f64], layer: usize, offset: usize) -> Vec<f64> {
        let p = self.layout.harmonics;
        if layer % 2 == 0 {
            self.angles
                .iter()
                .map(|&phi| (0..p).map(|n| x[offset + n] * ((n + 1) as f64 * phi + x[offset + p + n]).sin()).sum())
                .collect()
        } else {
            let mut g = vec![0.0; self.k()];
            for (j, &i) in self.layout.working.iter().enumerate() {
                g[i] = x[offset + j];
            }
            g
        }
    }

    fn unitary_fft(&self, plan: &Arc<dyn Fft<f64>>, v: &mut [Complex64]) {
        plan.process(v);
        let s = 1.0 / (v.len() as f64).sqrt();
        v.iter_mut().for_each(|z| *z *= s);
    }

    fn apply_mask(&self, v: &mut [Complex64]) {
        if let Some(mask) = &self.mask {
            for (z, &keep) in v.iter_mut().zip(mask) {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        if x.len() != self.layout.len() {
            return Err(mismatch(self.layout.len(), x.len()));
        }
        let k = self.k();
        let n = self.channels.len();
        let offsets = self.layout.offsets();
        let factors: Vec<Vec<Complex64>> = offsets
            .iter()
            .enumerate()
            .map(|(l, &o)| self.layer_phases(x, l, o).into_iter().map(|p| Complex64::from_polar(1.0, p)).collect())
            .collect();
        let mut states = vec![Vec::with_capacity(n); factors.len()];
        let mut v_central = ComplexMatrix::zeros(n, n);
        for (col, &c) in self.channels.iter().enumerate() {
            let mut psi = vec![Complex64::new(0.0, 0.0); k];
            psi[c] = Complex64::new(1.0, 0.0);
            for (l, d) in factors.iter().enumerate() {
                self.apply_mask(&mut psi);
                if l % 2 == 0 {
                    self.unitary_fft(&self.fwd, &mut psi);
                }
                states[l].push(psi.clone());
                psi.iter_mut().zip(d).for_each(|(z, f)| *z *= f);
                if l % 2 == 0 {
                    self.unitary_fft(&self.inv, &mut psi);
                }
            }
            self.apply_mask(&mut psi);
            for (row, &r) in self.channels.iter().enumerate() {
                v_central.set(row, col, psi[r]);
            }
        }
        let a = self.target.frobenius_sq();
        let b = v_central.frobenius_sq();
        let t: Complex64 = self
            .target
            .as_dmatrix()
            .iter()
            .zip(v_central.as_dmatrix().iter())
            .map(|(u, v)| u.conj() * v)
            .sum();
        let fidelity = if b > 0.0 { (t.norm_sqr() / (a * b)).clamp(0.0, 1.0) } else { 0.0 };
        let probability = b / n as f64;
        Ok(Forward { factors, states, v_central, fidelity, probability, overlap: (t, a, b) })
    }

    /// `2 dP/d conj(V)` for the success probability.
    pub fn gamma_probability(&self, fwd: &Forward) -> ComplexMatrix {
        fwd.v_central.scale(Complex64::new(2.0 / self.channels.len() as f64, 0.0))
    }

    /// `2 dF/d conj(V)` for the fidelity.
    pub fn gamma_fidelity(&self, fwd: &Forward) -> ComplexMatrix {
        let (t, a, b) = fwd.overlap;
        if b == 0.0 {
            return ComplexMatrix::zeros(self.channels.len(), self.channels.len());
        }
        let n = self.channels.len();
        ComplexMatrix::from_fn(n, n, |r, c| {
            2.0 * t * self.target.get(r, c) / (a * b) - 2.0 * t.norm_sqr() * fwd.v_central.get(r, c) / (a * b * b)
        })
    }

    /// Gradient of a real objective `J(V)` with `gamma = 2 dJ/d conj(V)`,
    /// by the adjoint method.
    pub fn backward(&self, x: &[f64], fwd: &Forward, gamma: &ComplexMatrix) -> Vec<f64> {
        let k = self.k();
        let m = fwd.factors.len();
        let mut phase_grad = vec![vec![0.0; k]; m];
        for (col, _) in self.channels.iter().enumerate() {
            let mut lam = vec![Complex64::new(0.0, 0.0); k];
            for (row, &r) in self.channels.iter().enumerate() {
                lam[r] = gamma.get(row, col);
            }
            self.apply_mask(&mut lam);
            for l in (0..m).rev() {
                if l % 2 == 0 {
                    self.unitary_fft(&self.fwd, &mut lam);
                }
                let u = &fwd.states[l][col];
                let d = &fwd.factors[l];
                for i in 0..k {
                    phase_grad[l][i] += (Complex64::i() * d[i] * u[i] * lam[i].conj()).re;
                    lam[i] *= d[i].conj();
                }
                if l % 2 == 0 {
                    self.unitary_fft(&self.inv, &mut lam);
                }
                self.apply_mask(&mut lam);
            }
        }
        let p = self.layout.harmonics;
        let mut grad = vec![0.0; self.layout.len()];
        for (l, o) in self.layout.offsets().into_iter().enumerate() {
            let gk = &phase_grad[l];
            if l % 2 == 0 {
                for h in 0..p {
                    let (amp, theta) = (x[o + h], x[o + p + h]);
                    let (mut da, mut dt) = (0.0, 0.0);
                    for (i, &phi) in self.angles.iter().enumerate() {
                        let arg = (h + 1) as f64 * phi + theta;
                        da += gk[i] * arg.sin();
                        dt += gk[i] * amp * arg.cos();
                    }
                    grad[o + h] = da;
                    grad[o + p + h] = dt;
                }
            } else {
                for (j, &i) in self.layout.working.iter().enumerate() {
                    grad[o + j] = gk[i];
                }
            }
        }
        grad
    }

    /// Random parameter vector: `A ~ U[0, fraction * m pi)`, phases and
    /// shaper values `~ U[0, 2 pi)`.
    pub fn random_point<R: rand::Rng>(&self, rng: &mut R, fraction: f64) -> Vec<f64> {
        let amax = self.layout.amplitude_max() * fraction.clamp(0.0, 1.0);
        let p = self.layout.harmonics;
        let mut x = vec![0.0; self.layout.len()];
        for (l, o) in self.layout.offsets().into_iter().enumerate() {
            if l % 2 == 0 {
                for h in 0..p {
                    x[o + h] = rng.random::<f64>() * amax;
                    x[o + p + h] = rng.random::<f64>() * TAU;
                }
            } else {
                for j in 0..self.layout.working.len() {
                    x[o + j] = rng.random::<f64>() * TAU;
                }
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::spec::targets;
    use crate::unitary::ChannelWindow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n: usize, d: usize, policy: BoundaryPolicy, m: usize) -> GateSpec {
        let w = ChannelWindow::centered(16, n, d).unwrap();
        GateSpec::new(targets::hadamard(n).unwrap(), w, m, policy, 0.999).unwrap()
    }

    #[test]
    fn zero_params_identity_target() {
        let w = ChannelWindow::centered(64, 3, 2).unwrap();
        let s = GateSpec::three_layer(ComplexMatrix::identity(3), w, BoundaryPolicy::Open).unwrap();
        let e = evaluate_gate(&GateParams::zeros(&s, 3, 2.0), &s).unwrap();
        assert!((e.fidelity - 1.0).abs() < 1e-12);
        assert!((e.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fft_forward_matches_dense() {
        for policy in [BoundaryPolicy::Open, BoundaryPolicy::Filtered] {
            for m in [3, 5] {
                let s = spec(3, 1, policy, m);
                let ev = Evaluator::new(&s, 3, 2.0).unwrap();
                let x = ev.random_point(&mut ChaCha8Rng::seed_from_u64(5), 1.0);
                let fwd = ev.forward(&x).unwrap();
                let dense = evaluate_gate(&ev.layout().to_params(&x).unwrap(), &s).unwrap();
                assert!(fwd.v_central.max_abs_diff(&dense.v_central) < 1e-12);
                assert!((fwd.fidelity - dense.fidelity).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn layout_round_trip() {
        let s = spec(2, 2, BoundaryPolicy::Open, 3);
        let ev = Evaluator::new(&s, 3, 1.0).unwrap();
        let x = ev.random_point(&mut ChaCha8Rng::seed_from_u64(1), 1.0);
        let back = ev.layout().from_params(&ev.layout().to_params(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(ev.layout().len(), 2 * 6 + 6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for (policy, seed) in [(BoundaryPolicy::Open, 3), (BoundaryPolicy::Filtered, 4)] {
            let s = spec(2, 2, policy, 3);
            let ev = Evaluator::new(&s, 3, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..5 {
                let x = ev.random_point(&mut rng, 1.0);
                let fwd = ev.forward(&x).unwrap();
                for (which, gamma) in [("P", ev.gamma_probability(&fwd)), ("F", ev.gamma_fidelity(&fwd))] {
                    let g = ev.backward(&x, &fwd, &gamma);
                    let val = |x: &[f64]| {
                        let f = ev.forward(x).unwrap();
                        if which == "P" { f.probability } else { f.fidelity }
                    };
                    let fd: Vec<f64> = (0..x.len())
                        .map(|i| {
                            let mut xp = x.clone();
                            let mut xm = x.clone();
                            xp[i] += h;
                            xm[i] -= h;
                            (val(&xp) - val(&xm)) / (2.0 * h)
                        })
                        .collect();
                    let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    let den: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
                    assert!(num / den < 1e-4, "{which} {policy}: rel err {}", num / den);
                }
            }
        }
    }
}
