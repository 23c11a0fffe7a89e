use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_gate, Evaluator, GateParams};
use super::lbfgs::{minimize, LbfgsOptions};
use super::spec::GateSpec;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Harmonics `p` per angular series.
    pub harmonics: usize,
    /// Amplitude bound multiplier `m`; `None` picks 1 for `N <= 2`, else 2.
    pub amplitude_bound: Option<f64>,
    /// L-BFGS iterations per penalty stage.
    pub max_iterations: usize,
    /// Penalty weights, applied in order.
    pub penalty_schedule: Vec<f64>,
    /// The penalty aims at `floor + margin` so the final point clears the floor.
    pub floor_margin: f64,
    /// Random starts draw amplitudes from `[0, fraction * m pi)`.
    pub init_amplitude_fraction: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            harmonics: 3,
            amplitude_bound: None,
            max_iterations: 400,
            penalty_schedule: vec![1e1, 1e2, 1e3, 1e4, 1e5, 1e6],
            floor_margin: 2e-4,
            init_amplitude_fraction: 0.2,
        }
    }
}

impl OptimizerConfig {
    pub fn bound_for(&self, n: usize) -> f64 {
        self.amplitude_bound.unwrap_or(if n <= 2 { 1.0 } else { 2.0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub params: GateParams,
    pub fidelity: f64,
    pub probability: f64,
    pub restarts_used: usize,
    /// Index of the restart that produced `params`.
    pub best_restart: usize,
    /// Whether the returned point meets the fidelity floor.
    pub converged: bool,
    pub seed: u64,
}

/// One local solve: penalty ramp followed by a fidelity polish if needed.
/// Returns the flat parameter vector.
pub fn local_solve(ev: &Evaluator, spec: &GateSpec, cfg: &OptimizerConfig, x0: Vec<f64>) -> Vec<f64> {
    let (lo, hi) = ev.layout().bounds();
    let opts = LbfgsOptions { max_iterations: cfg.max_iterations, ..Default::default() };
    let target = (spec.fidelity_floor() + cfg.floor_margin).min(1.0);
    // Warm-up on the product F * P = |Tr(U^dagger V)|^2 / N^2, which pulls
    // fidelity and probability up together.
    let warm = |x: &[f64]| {
        let fwd = ev.forward(x).expect("layout length");
        let gamma = &ev.gamma_fidelity(&fwd).scale(fwd.probability.into())
            + &ev.gamma_probability(&fwd).scale(fwd.fidelity.into());
        let grad = ev.backward(x, &fwd, &gamma).into_iter().map(|g| -g).collect();
        (-fwd.fidelity * fwd.probability, grad)
    };
    let mut x = minimize(warm, &x0, &lo, &hi, opts).0;
    for &lambda in &cfg.penalty_schedule {
        let obj = |x: &[f64]| {
            let fwd = ev.forward(x).expect("layout length");
            let gap = (target - fwd.fidelity).max(0.0);
            let value = -(fwd.probability - lambda * gap * gap);
            let mut gamma = ev.gamma_probability(&fwd);
            if gap > 0.0 {
                let gf = ev.gamma_fidelity(&fwd).scale((2.0 * lambda * gap).into());
                gamma = &gamma + &gf;
            }
            let grad = ev.backward(x, &fwd, &gamma).into_iter().map(|g| -g).collect();
            (value, grad)
        };
        x = minimize(obj, &x, &lo, &hi, opts).0;
    }
    let fid = ev.forward(&x).expect("layout length").fidelity;
    if fid < spec.fidelity_floor() {
        let obj = |x: &[f64]| {
            let fwd = ev.forward(x).expect("layout length");
            let gamma = ev.gamma_fidelity(&fwd);
            let grad = ev.backward(x, &fwd, &gamma).into_iter().map(|g| -g).collect();
            (-fwd.fidelity, grad)
        };
        x = minimize(obj, &x, &lo, &hi, opts).0;
    }
    x
}

struct Candidate {
    index: usize,
    params: GateParams,
    fidelity: f64,
    probability: f64,
    norm: f64,
}

/// Multi-start constrained search: maximise probability subject to
/// `fidelity >= floor`.
///
/// Restart 0 starts from the all-zero parameters; restart `r > 0` draws a
/// random start (small amplitudes, uniform phases) from a ChaCha8 stream `(seed, r)`. Restarts run in
/// parallel and are reduced in index order, so the result depends only on
/// the seed.
pub fn optimize(spec: &GateSpec, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    let bound = cfg.bound_for(spec.n());
    let ev = Evaluator::new(spec, cfg.harmonics, bound)?;
    let restarts = cfg.restarts.max(1);
    let candidates: Vec<Candidate> = (0..restarts)
        .into_par_iter()
        .map(|r| -> Result<Candidate> {
            let x0 = if r == 0 {
                vec![0.0; ev.layout().len()]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(r as u64);
                ev.random_point(&mut rng, cfg.init_amplitude_fraction)
            };
            let x = local_solve(&ev, spec, cfg, x0);
            let params = ev.layout().to_params(&x)?;
            let e = evaluate_gate(&params, spec)?;
            let norm = ev.layout().from_params(&params)?.iter().map(|v| v * v).sum();
            Ok(Candidate { index: r, params, fidelity: e.fidelity, probability: e.probability, norm })
        })
        .collect::<Result<_>>()?;

    let floor = spec.fidelity_floor();
    let feasible = candidates.iter().filter(|c| c.fidelity >= floor).fold(None::<&Candidate>, |best, c| {
        match best {
            None => Some(c),
            Some(b) => {
                let tie = (c.probability - b.probability).abs() <= 1e-12;
                if (!tie && c.probability > b.probability) || (tie && c.norm < b.norm) {
                    Some(c)
                } else {
                    Some(b)
                }
            }
        }
    });
    let (best, converged) = match feasible {
        Some(c) => (c, true),
        None => (
            candidates
                .iter()
                .fold(&candidates[0], |b, c| if c.fidelity > b.fidelity { c } else { b }),
            false,
        ),
    };
    Ok(OptimizationResult {
        params: best.params.clone(),
        fidelity: best.fidelity,
        probability: best.probability,
        restarts_used: restarts,
        best_restart: best.index,
        converged,
        seed: cfg.seed,
    })
}
