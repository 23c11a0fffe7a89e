use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::field::{Geometry, PhaseMask};
use crate::error::{Error, Result};
use crate::synthesis::{ShaperFunction, SineSeries};

/// Log-polar sorter: scale `a`, offset `b`, auxiliary focal length `f` (metres).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SorterParams {
    pub a: f64,
    pub b: f64,
    pub f: f64,
}

impl SorterParams {
    pub fn new(a: f64, b: f64, f: f64) -> Result<Self> {
        if [a, b, f].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("sorter a, b, f must be positive".into()));
        }
        Ok(Self { a, b, f })
    }

    /// `a = b = W pitch / (4 pi)`, so the unwrapped strip spans half the grid,
    /// and `f = W pitch^2 / lambda`, so every Fourier stage keeps the pitch.
    pub fn for_geometry(g: &Geometry) -> Self {
        let a = g.width as f64 * g.pitch / (4.0 * PI);
        Self { a, b: a, f: g.width as f64 * g.pitch * g.pitch / g.wavelength }
    }

    /// Checks that the unwrapped strip `2 pi a` fits on the grid.
    pub fn validate(&self, g: &Geometry) -> Result<()> {
        let extent = g.height as f64 * super::propagation::fourier_pitch(g.width, g.pitch, g.wavelength, self.f);
        if 2.0 * PI * self.a > extent {
            return Err(Error::Sampling(format!(
                "unwrapped strip {:.3e} m exceeds the transformed grid {:.3e} m",
                2.0 * PI * self.a,
                extent
            )));
        }
        Ok(())
    }
}

/// The two sorter elements:
/// `Phi1 = (2 pi a / (lambda f)) [y atan2(y, x) - x ln(r / b) + x]` on the
/// input grid and `Phi2 = -(2 pi a b / (lambda f)) exp(-u / a) cos(v / a)` on
/// the transformed grid. The undefined origin pixel of `Phi1` is 0.
pub fn sorter_masks(params: &SorterParams, g: &Geometry) -> (PhaseMask, PhaseMask) {
    let SorterParams { a, b, f } = *params;
    let lam = g.wavelength;
    let k1 = 2.0 * PI * a / (lam * f);
    let phi1 = PhaseMask::from_fn(g, |x, y| {
        let r = x.hypot(y);
        if r == 0.0 {
            0.0
        } else {
            k1 * (y * y.atan2(x) - x * (r / b).ln() + x)
        }
    });
    let g2 = g.with_pitch(super::propagation::fourier_pitch(g.width, g.pitch, lam, f));
    let k2 = 2.0 * PI * a * b / (lam * f);
    let phi2 = PhaseMask::from_fn(&g2, |u, v| -k2 * (-u / a).exp() * (v / a).cos());
    (phi1, phi2)
}

/// Focal-plane coordinate `f lambda l / (2 pi a)` of charge `l`. Spots lie
/// along the grid's second (y) axis.
pub fn focus_position(l: i64, params: &SorterParams, wavelength: f64) -> f64 {
    params.f * wavelength * l as f64 / (2.0 * PI * params.a)
}

/// Placement of abstract channel indices on physical OAM charges:
/// `l = stride * (j - center) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeMap {
    pub stride: i64,
    pub offset: i64,
    pub center: usize,
}

impl ChargeMap {
    pub fn new(stride: i64, offset: i64, center: usize) -> Result<Self> {
        if stride < 1 {
            return Err(Error::InvalidArgument("charge stride must be >= 1".into()));
        }
        Ok(Self { stride, offset, center })
    }

    pub fn charge(&self, j: usize) -> i64 {
        self.stride * (j as i64 - self.center as i64) + self.offset
    }

    pub fn charges(&self, indices: &[usize]) -> Vec<i64> {
        indices.iter().map(|&j| self.charge(j)).collect()
    }
}

/// Staircase shaper mask: the row at height `y` carries `g[j]` for the
/// channel `j` whose focal strip contains `y`. Strip edges sit half a
/// channel from each focus; rows outside `0..K` carry zero.
pub fn oam_shaper_mask(g: &ShaperFunction, map: &ChargeMap, params: &SorterParams, geometry: &Geometry) -> PhaseMask {
    let scale = 2.0 * PI * params.a / (params.f * geometry.wavelength);
    PhaseMask::from_fn(geometry, |_, y| {
        let t = (scale * y - map.offset as f64) / map.stride as f64;
        // f64::round sends halves away from zero
        let j = map.center as i64 + t.round() as i64;
        if (0..g.k() as i64).contains(&j) {
            g.get(j as usize)
        } else {
            0.0
        }
    })
}

/// Radius-independent mask `f(atan2(y, x))`; the origin pixel uses angle 0.
pub fn angular_mask(geometry: &Geometry, f: impl Fn(f64) -> f64 + Sync) -> PhaseMask {
    PhaseMask::from_fn(geometry, |x, y| f(y.atan2(x)))
}

/// Physical angular profile realising an abstract angle-layer series on the
/// charges of `map`: `f_phys(psi) = f(-stride * psi - pi)`.
pub fn physical_angular_function<'a>(series: &'a SineSeries, map: &ChargeMap) -> impl Fn(f64) -> f64 + Sync + 'a {
    let s = map.stride as f64;
    move |psi| series.eval(-s * psi - PI)
}

pub fn angular_mask_for_series(series: &SineSeries, map: &ChargeMap, geometry: &Geometry) -> PhaseMask {
    angular_mask(geometry, physical_angular_function(series, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_on_positive_x_axis() {
        let g = Geometry::new(64, 64, 10e-6, 1.55e-6).unwrap();
        let p = SorterParams::new(1e-4, 2e-4, 0.1).unwrap();
        let (phi1, phi2) = sorter_masks(&p, &g);
        let k = 2.0 * PI * p.a / (g.wavelength * p.f);
        for c in [33usize, 40, 63] {
            let x = g.x(c);
            let want = k * (-x * (x / p.b).ln() + x);
            assert!((phi1.get(c, 32) - want).abs() < 1e-9 * want.abs().max(1.0));
        }
        assert_eq!(phi1.get(32, 32), 0.0);
        let want = -2.0 * PI * p.a * p.b / (g.wavelength * p.f);
        assert!((phi2.get(32, 32) - want).abs() < 1e-12 * want.abs());
        assert!(phi1.phases.iter().chain(&phi2.phases).all(|v| v.is_finite()));
    }

    #[test]
    fn focus_is_linear() {
        let p = SorterParams::new(1e-3, 1e-3, 0.05).unwrap();
        assert_eq!(focus_position(0, &p, 1.55e-6), 0.0);
        assert_eq!(focus_position(3, &p, 1.55e-6), -focus_position(-3, &p, 1.55e-6));
    }

    #[test]
    fn shaper_strips() {
        let g = Geometry::slm_default();
        let p = SorterParams::for_geometry(&g);
        let k = 64;
        let clock = ShaperFunction::linear(k, 32, PI / 4.0);
        let map = ChargeMap::new(1, 0, 32).unwrap();
        let m = oam_shaper_mask(&clock, &map, &p, &g);
        // focal spacing is 2 pixels per unit charge with the default sorter
        let per_charge = focus_position(1, &p, g.wavelength) / g.pitch;
        assert!((per_charge - 2.0).abs() < 1e-9);
        for l in -5i64..=5 {
            let row = (540 + 2 * l) as usize;
            assert!((m.get(100, row) - PI / 4.0 * l as f64).abs() < 1e-12);
        }
        assert!(oam_shaper_mask(&ShaperFunction::zeros(k), &map, &p, &g).phases.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn default_sorter_fits() {
        let g = Geometry::slm_default();
        let p = SorterParams::for_geometry(&g);
        assert!(p.validate(&g).is_ok());
        assert!((p.f - 1080.0 * 64e-12 / 1550e-9).abs() < 1e-12);
    }
}
