use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::field::{Geometry, PhaseMask, ScalarField};
use crate::error::{mismatch, Result};

/// Metadata written next to each exported mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub width: usize,
    pub height: usize,
    pub pitch: f64,
    pub wavelength: f64,
}

/// 8-bit gray level `floor(wrap(phi) / 2pi * 256) mod 256`.
pub fn phase_to_gray(phi: f64) -> u8 {
    let w = phi.rem_euclid(TAU);
    ((w / TAU * 256.0).floor() as i64).rem_euclid(256) as u8
}

/// Writes `<stem>.pgm` (binary P5), `<stem>.f32` (raw little-endian
/// wrapped phases) and `<stem>.json`. Returns the three paths.
pub fn export_mask(mask: &PhaseMask, geometry: &Geometry, dir: &Path, stem: &str) -> Result<[PathBuf; 3]> {
    if (mask.width, mask.height) != (geometry.width, geometry.height) {
        return Err(mismatch(
            format!("{}x{}", geometry.width, geometry.height),
            format!("{}x{}", mask.width, mask.height),
        ));
    }
    fs::create_dir_all(dir)?;
    let pgm = dir.join(format!("{stem}.pgm"));
    let raw = dir.join(format!("{stem}.f32"));
    let json = dir.join(format!("{stem}.json"));

    let mut out = fs::File::create(&pgm)?;
    write!(out, "P5\n{} {}\n255\n", mask.width, mask.height)?;
    out.write_all(&mask.phases.iter().map(|&p| phase_to_gray(p)).collect::<Vec<_>>())?;

    let bytes: Vec<u8> = mask.phases.iter().flat_map(|&p| (p.rem_euclid(TAU) as f32).to_le_bytes()).collect();
    fs::write(&raw, bytes)?;

    let side = MaskSidecar {
        width: geometry.width,
        height: geometry.height,
        pitch: geometry.pitch,
        wavelength: geometry.wavelength,
    };
    fs::write(&json, serde_json::to_string_pretty(&side).expect("sidecar serializes"))?;
    Ok([pgm, raw, json])
}

/// Writes a field snapshot as `<stem>_phase.*` (same format as masks) and
/// `<stem>_magnitude.*` (gray levels scaled to the peak, raw values unscaled).
pub fn export_field(field: &ScalarField, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let g = *field.geometry();
    let phase = PhaseMask::new(g.width, g.height, field.data().iter().map(|z| z.arg()).collect())?;
    let mut paths = export_mask(&phase, &g, dir, &format!("{stem}_phase"))?.to_vec();

    let mag: Vec<f64> = field.data().iter().map(|z| z.norm()).collect();
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    let pgm = dir.join(format!("{stem}_magnitude.pgm"));
    let raw = dir.join(format!("{stem}_magnitude.f32"));
    let mut out = fs::File::create(&pgm)?;
    write!(out, "P5\n{} {}\n255\n", g.width, g.height)?;
    let gray: Vec<u8> = mag
        .iter()
        .map(|&m| if peak > 0.0 { (m / peak * 255.0).round() as u8 } else { 0 })
        .collect();
    out.write_all(&gray)?;
    fs::write(&raw, mag.iter().flat_map(|&m| (m as f32).to_le_bytes()).collect::<Vec<u8>>())?;
    paths.push(pgm);
    paths.push(raw);
    Ok(paths)
}
