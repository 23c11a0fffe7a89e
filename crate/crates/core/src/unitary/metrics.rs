use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::window::ChannelWindow;
use crate::error::{mismatch, Error, Result};

/// The `N x N` block of a `K x K` operator on the window's encoding channels.
pub fn central_block(v: &ComplexMatrix, window: &ChannelWindow) -> Result<ComplexMatrix> {
    if v.shape() != (window.k(), window.k()) {
        return Err(mismatch(
            format!("{0}x{0}", window.k()),
            format!("{}x{}", v.rows(), v.cols()),
        ));
    }
    let idx = window.channel_indices();
    v.select(idx, idx)
}

/// Normalised squared trace overlap `|Tr(U^dagger V)|^2 / (Tr(U^dagger U) Tr(V^dagger V))`.
///
/// Insensitive to global phase and scale of either argument.
pub fn fidelity(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(mismatch(
            format!("{}x{}", u.rows(), u.cols()),
            format!("{}x{}", v.rows(), v.cols()),
        ));
    }
    let nu = u.frobenius_sq();
    let nv = v.frobenius_sq();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let overlap: Complex64 = u
        .as_dmatrix()
        .iter()
        .zip(v.as_dmatrix().iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((overlap.norm_sqr() / (nu * nv)).clamp(0.0, 1.0))
}

/// `Tr(V V^dagger) / N` for the encoding block of a unitary operator.
pub fn success_probability(v_central: &ComplexMatrix) -> Result<f64> {
    if !v_central.is_square() {
        return Err(mismatch("square matrix", format!("{}x{}", v_central.rows(), v_central.cols())));
    }
    Ok(v_central.frobenius_sq() / v_central.rows() as f64)
}

/// Fidelity estimate from measured output magnitudes of the phase test.
///
/// `measured` holds `|V U^dagger|` (inputs are the columns of `U^dagger`);
/// its diagonal phases are taken to be zero, so
/// `F = (sum_i |W_ii|)^2 / (N * sum_ij |W_ij|^2)`.
pub fn phase_test_fidelity(target: &ComplexMatrix, measured: &ComplexMatrix) -> Result<f64> {
    if !target.is_square() || target.shape() != measured.shape() {
        return Err(mismatch(
            format!("{}x{}", target.rows(), target.cols()),
            format!("{}x{}", measured.rows(), measured.cols()),
        ));
    }
    let n = target.rows();
    for r in 0..n {
        for c in 0..n {
            let z = measured.get(r, c);
            if z.re < 0.0 || z.im != 0.0 {
                return Err(Error::NegativeMagnitude { row: r, col: c, value: z.re.min(-z.im.abs()) });
            }
        }
    }
    let total = measured.frobenius_sq();
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let diag: f64 = (0..n).map(|i| measured.get(i, i).re).sum();
    Ok((diag * diag / (n as f64 * total)).clamp(0.0, 1.0))
}
