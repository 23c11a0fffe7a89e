use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::field::{centered_fft2, fft2, ScalarField};
use crate::error::{Error, Result};

/// Largest fraction of power the band limit may remove before
/// [`propagate`] reports a sampling error.
pub const MAX_CLIP_FRACTION: f64 = 1e-3;

fn fft_freq(i: usize, n: usize, pitch: f64) -> f64 {
    let k = if i < n.div_ceil(2) { i as f64 } else { i as f64 - n as f64 };
    k / (n as f64 * pitch)
}

/// Paraxial angular-spectrum propagation over `distance` metres (negative
/// distances propagate backwards).
///
/// Transfer function `exp(-i pi lambda z (fx^2 + fy^2))`, band-limited to
/// `|f| <= N pitch / (2 lambda |z|)` per axis so the sampled chirp does not
/// alias. Removed power accumulates in [`ScalarField::clip_loss`]; more than
/// [`MAX_CLIP_FRACTION`] is an error.
pub fn propagate(field: &ScalarField, distance: f64) -> Result<ScalarField> {
    if !distance.is_finite() {
        return Err(Error::NonFinite("propagation distance"));
    }
    if distance == 0.0 {
        return Ok(field.clone());
    }
    let g = *field.geometry();
    let (w, h, p, lam) = (g.width, g.height, g.pitch, g.wavelength);
    let mut out = field.clone();
    let data = out.data_mut();
    fft2(data, w, h, false);
    let total: f64 = data.par_iter().map(|z| z.norm_sqr()).sum();
    let lim_x = w as f64 * p / (2.0 * lam * distance.abs());
    let lim_y = h as f64 * p / (2.0 * lam * distance.abs());
    let clipped: f64 = data
        .par_chunks_mut(w)
        .enumerate()
        .map(|(r, row)| {
            let fy = fft_freq(r, h, p);
            let mut lost = 0.0;
            for (c, z) in row.iter_mut().enumerate() {
                let fx = fft_freq(c, w, p);
                if fx.abs() > lim_x || fy.abs() > lim_y {
                    lost += z.norm_sqr();
                    *z = Complex64::new(0.0, 0.0);
                } else {
                    *z *= Complex64::from_polar(1.0, -PI * lam * distance * (fx * fx + fy * fy));
                }
            }
            lost
        })
        .sum();
    let fraction = if total > 0.0 { clipped / total } else { 0.0 };
    if fraction > MAX_CLIP_FRACTION {
        return Err(Error::Sampling(format!(
            "band limit for z = {distance} m removes {fraction:.3e} of the power"
        )));
    }
    fft2(data, w, h, true);
    let s = 1.0 / (w * h) as f64;
    data.par_iter_mut().for_each(|z| *z *= s);
    out.add_clip_loss(fraction);
    Ok(out)
}

/// Thin lens `exp(-i pi (x^2 + y^2) / (lambda f))`. An infinite focal length
/// leaves the field unchanged.
pub fn apply_lens(field: &ScalarField, focal_length: f64) -> Result<ScalarField> {
    if focal_length.is_infinite() {
        return Ok(field.clone());
    }
    if focal_length == 0.0 || focal_length.is_nan() {
        return Err(Error::InvalidArgument("focal length must be nonzero".into()));
    }
    let g = *field.geometry();
    let k = PI / (g.wavelength * focal_length);
    let mut out = field.clone();
    out.data_mut().par_chunks_mut(g.width).enumerate().for_each(|(r, row)| {
        let y = g.y(r);
        for (c, z) in row.iter_mut().enumerate() {
            let x = g.x(c);
            *z *= Complex64::from_polar(1.0, -k * (x * x + y * y));
        }
    });
    Ok(out)
}

/// Output pitch of a lens-plus-propagation stage of focal length `f`.
pub fn fourier_pitch(width: usize, pitch: f64, wavelength: f64, focal_length: f64) -> f64 {
    wavelength * focal_length / (width as f64 * pitch)
}

fn require_square(field: &ScalarField) -> Result<()> {
    let g = field.geometry();
    if g.width != g.height {
        return Err(Error::Sampling("Fourier stages need a square grid".into()));
    }
    Ok(())
}

/// Lens of focal length `f` followed by free propagation over `f`:
/// `E2(u) = (1 / (i lambda f)) exp(i pi u^2 / (lambda f)) FT[E1](u / (lambda f))`,
/// evaluated with one centred FFT. The output pitch is `lambda f / (N pitch)`
/// and power is conserved exactly.
pub fn fourier_stage(field: &ScalarField, focal_length: f64) -> Result<ScalarField> {
    require_square(field)?;
    if !(focal_length > 0.0 && focal_length.is_finite()) {
        return Err(Error::InvalidArgument("focal length must be positive".into()));
    }
    let g = *field.geometry();
    let p_out = fourier_pitch(g.width, g.pitch, g.wavelength, focal_length);
    let mut out = field.clone();
    centered_fft2(out.data_mut(), g.width, g.height, false);
    let og = g.with_pitch(p_out);
    let k = PI / (g.wavelength * focal_length);
    let s = g.pitch / p_out;
    out.data_mut().par_chunks_mut(g.width).enumerate().for_each(|(r, row)| {
        let v = og.y(r);
        for (c, z) in row.iter_mut().enumerate() {
            let u = og.x(c);
            *z *= Complex64::from_polar(s, k * (u * u + v * v) - PI / 2.0);
        }
    });
    out.set_geometry(og);
    Ok(out)
}

/// Exact inverse of [`fourier_stage`] for the same focal length.
pub fn inverse_fourier_stage(field: &ScalarField, focal_length: f64) -> Result<ScalarField> {
    require_square(field)?;
    if !(focal_length > 0.0 && focal_length.is_finite()) {
        return Err(Error::InvalidArgument("focal length must be positive".into()));
    }
    let og = *field.geometry();
    // Input pitch of the forward stage that produced this sampling.
    let p_in = og.wavelength * focal_length / (og.width as f64 * og.pitch);
    let k = PI / (og.wavelength * focal_length);
    let s = og.pitch / p_in;
    let mut out = field.clone();
    out.data_mut().par_chunks_mut(og.width).enumerate().for_each(|(r, row)| {
        let v = og.y(r);
        for (c, z) in row.iter_mut().enumerate() {
            let u = og.x(c);
            *z *= Complex64::from_polar(s, -k * (u * u + v * v) + PI / 2.0);
        }
    });
    centered_fft2(out.data_mut(), og.width, og.height, true);
    out.set_geometry(og.with_pitch(p_in));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::Geometry;

    fn gaussian(g: Geometry, w0: f64) -> ScalarField {
        ScalarField::from_fn(g, |x, y| Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0))
    }

    #[test]
    fn fourier_stage_round_trip_and_power() {
        let g = Geometry::new(64, 64, 10e-6, 1e-6).unwrap();
        let f = ScalarField::from_fn(g, |x, y| Complex64::new((-(x * x + 2.0 * y * y) / 1e-8).exp(), x * 1e3));
        let h = fourier_stage(&f, 0.05).unwrap();
        assert!((h.power() - f.power()).abs() < 1e-12 * f.power());
        let back = inverse_fourier_stage(&h, 0.05).unwrap();
        assert!((back.geometry().pitch - g.pitch).abs() < 1e-18);
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn lens_power_and_infinity() {
        let g = Geometry::new(32, 32, 10e-6, 1e-6).unwrap();
        let f = gaussian(g, 50e-6);
        assert_eq!(apply_lens(&f, f64::INFINITY).unwrap(), f);
        let l = apply_lens(&f, 0.1).unwrap();
        assert!((l.power() - f.power()).abs() < 1e-14 * f.power());
    }
}
