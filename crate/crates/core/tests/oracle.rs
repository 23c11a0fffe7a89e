//! Dense reference products checked against the library's stack composition
//! and forward model.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use common::{max_error, oracle, random_stack_error};
use phasegate::synthesis::{gate_operator, BoundaryPolicy, GateParams, GateSpec, ShaperFunction, SineSeries};
use phasegate::unitary::{compose_stack, ChannelWindow, ComplexMatrix, DiagonalPhase, Domain, LayerStack};

#[test]
fn compose_stack_matches_dense_oracle() {
    let worst = random_stack_error(200, 2024);
    assert!(worst < 1e-12, "max entrywise error {worst:e}");
}

#[test]
fn single_layers_have_closed_forms() {
    // An angle layer with phases 2 pi s j / K moves channel c to c - s.
    let k = 8;
    for s in 0..k {
        let phases: Vec<f64> = (0..k).map(|j| 2.0 * PI * (s * j) as f64 / k as f64).collect();
        let stack = LayerStack::alternating(k, Domain::Angle, vec![DiagonalPhase::new(phases).unwrap()]).unwrap();
        let v = compose_stack(&stack).unwrap();
        for c in 0..k {
            for r in 0..k {
                let expected = if r == (c + k - s) % k { 1.0 } else { 0.0 };
                assert!((v.get(r, c) - expected).norm() < 1e-12, "s={s} r={r} c={c}");
            }
        }
    }
}

#[test]
fn gate_operator_matches_dense_oracle_open_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let k = 16;
    let window = ChannelWindow::centered(k, 2, 2).unwrap();
    let target = ComplexMatrix::identity(2);
    for layers in [3usize, 5] {
        let spec = GateSpec::new(target.clone(), window.clone(), layers, BoundaryPolicy::Open, 0.999).unwrap();
        let bound = 3.0;
        let series: Vec<SineSeries> = (0..spec.angle_layers())
            .map(|_| {
                let a: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..bound / 3.0)).collect();
                let t: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                SineSeries::new(a, t, bound).unwrap()
            })
            .collect();
        let shapers: Vec<ShaperFunction> = (0..spec.spectrum_layers())
            .map(|_| ShaperFunction::new((0..k).map(|_| rng.random_range(-PI..PI)).collect()).unwrap())
            .collect();
        let params = GateParams { series: series.clone(), shapers: shapers.clone() };

        let mut dense = Vec::new();
        for i in 0..layers {
            if i % 2 == 0 {
                let s = &series[i / 2];
                let phases: Vec<f64> = (0..k).map(|j| s.eval(2.0 * PI * j as f64 / k as f64 - PI)).collect();
                dense.push((Domain::Angle, phases));
            } else {
                dense.push((Domain::Spectrum, shapers[i / 2].phases().to_vec()));
            }
        }
        let v = gate_operator(&params, &spec).unwrap();
        let err = max_error(&v, &oracle(k, &dense));
        assert!(err < 1e-12, "M={layers}: {err:e}");
    }
}
