//! Dense reference implementation shared by the oracle and acceptance tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use phasegate::unitary::{compose_stack, ComplexMatrix, DiagonalPhase, Domain, Layer, LayerStack};

pub type Vector = Vec<Complex64>;

/// `x -> F x` with `F[j,l] = exp(sign * 2 pi i j l / K) / sqrt(K)`, summed term by term.
pub fn naive_dft(x: &[Complex64], sign: f64) -> Vector {
    let k = x.len();
    let norm = 1.0 / (k as f64).sqrt();
    (0..k)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(l, &v)| v * Complex64::from_polar(norm, sign * 2.0 * PI * (j * l) as f64 / k as f64))
                .sum()
        })
        .collect()
}

pub fn apply_diag(x: &mut [Complex64], phases: &[f64]) {
    for (v, &p) in x.iter_mut().zip(phases) {
        *v *= Complex64::from_polar(1.0, p);
    }
}

/// Columns of the stack operator obtained by pushing each basis vector
/// through the layers one at a time.
pub fn oracle(k: usize, layers: &[(Domain, Vec<f64>)]) -> Vec<Vector> {
    (0..k)
        .map(|c| {
            let mut x = vec![Complex64::new(0.0, 0.0); k];
            x[c] = Complex64::new(1.0, 0.0);
            for (domain, phases) in layers {
                match domain {
                    Domain::Spectrum => apply_diag(&mut x, phases),
                    Domain::Angle => {
                        x = naive_dft(&x, -1.0);
                        apply_diag(&mut x, phases);
                        x = naive_dft(&x, 1.0);
                    }
                }
            }
            x
        })
        .collect()
}

pub fn max_error(m: &ComplexMatrix, cols: &[Vector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            worst = worst.max((m.get(r, c) - v).norm());
        }
    }
    worst
}

/// Largest entrywise gap between `compose_stack` and the oracle over `count`
/// random stacks with `K` cycling through 4, 8 and 16.
pub fn random_stack_error(count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for trial in 0..count {
        let k = [4, 8, 16][trial % 3];
        let m = rng.random_range(1..=7);
        let mut domain = if rng.random_bool(0.5) { Domain::Angle } else { Domain::Spectrum };
        let mut layers = Vec::with_capacity(m);
        for _ in 0..m {
            let phases: Vec<f64> = (0..k).map(|_| rng.random_range(-PI..PI)).collect();
            layers.push((domain, phases));
            domain = domain.other();
        }
        let stack = LayerStack::new(
            k,
            layers
                .iter()
                .map(|(d, p)| Layer { domain: *d, diagonal: DiagonalPhase::new(p.clone()).unwrap() })
                .collect(),
        )
        .unwrap();
        let v = compose_stack(&stack).unwrap();
        worst = worst.max(max_error(&v, &oracle(k, &layers)));
    }
    worst
}
