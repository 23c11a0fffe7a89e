//! TOML run configuration. Lengths are metres, phases radians.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optics::{ChargeMap, Geometry, OamSetup, SorterParams};
use crate::path::{PathGrid, PathLayout};
use crate::synthesis::{targets, BoundaryPolicy, GateSpec, OptimizerConfig, DEFAULT_FIDELITY_FLOOR};
use crate::unitary::{ChannelWindow, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    /// `hadamardN`, `dftN`, `clockN`, `identityN` or `random-haar`.
    pub name: String,
    /// Dimension for names without a suffix.
    pub n: Option<usize>,
    /// Seed for `random-haar`.
    pub seed: u64,
    /// Explicit target as rows of `[re, im]`; overrides `name`.
    pub matrix: Option<ComplexMatrix>,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self { name: "hadamard2".into(), n: None, seed: 0, matrix: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub k: usize,
    pub guard: usize,
    /// Defaults to `k / 2`.
    pub center: Option<usize>,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { k: 64, guard: 2, center: None, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub layers: usize,
    pub policy: BoundaryPolicy,
    pub fidelity_floor: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self { layers: 3, policy: BoundaryPolicy::Filtered, fidelity_floor: DEFAULT_FIDELITY_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsConfig {
    pub width: usize,
    pub height: usize,
    pub pitch: f64,
    pub wavelength: f64,
    /// Physical charge interval between adjacent channels.
    pub charge_stride: i64,
    /// Charge of the window centre channel.
    pub charge_offset: i64,
    pub sorter_a: Option<f64>,
    pub sorter_b: Option<f64>,
    pub sorter_f: Option<f64>,
    pub ring_radius: Option<f64>,
    pub ring_width: Option<f64>,
}

impl Default for OpticsConfig {
    fn default() -> Self {
        let g = Geometry::slm_default();
        Self {
            width: g.width,
            height: g.height,
            pitch: g.pitch,
            wavelength: g.wavelength,
            charge_stride: 4,
            charge_offset: 0,
            sorter_a: None,
            sorter_b: None,
            sorter_f: None,
            ring_radius: None,
            ring_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub spacing: f64,
    pub focal_length: f64,
    pub wavelength: f64,
    pub samples: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        let l = PathLayout::standard(1);
        Self { spacing: l.spacing, focal_length: l.focal_length, wavelength: l.wavelength, samples: PathGrid::DEFAULT_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub target: TargetConfig,
    pub window: WindowConfig,
    pub synthesis: SynthesisConfig,
    pub optimizer: OptimizerConfig,
    pub optics: OpticsConfig,
    pub path: PathConfig,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Target matrix and a label for reports.
    pub fn target_matrix(&self) -> Result<(ComplexMatrix, String)> {
        if let Some(m) = &self.target.matrix {
            return Ok((m.clone(), "custom".into()));
        }
        let n = self.target.n.unwrap_or(0);
        let m = targets::by_name(&self.target.name, n, self.target.seed)?;
        Ok((m, self.target.name.clone()))
    }

    pub fn channel_window(&self, n: usize) -> Result<ChannelWindow> {
        let w = &self.window;
        ChannelWindow::strided(w.k, n, w.guard, w.center.unwrap_or(w.k / 2), w.stride)
    }

    pub fn gate_spec(&self) -> Result<GateSpec> {
        let (target, _) = self.target_matrix()?;
        let window = self.channel_window(target.rows())?;
        GateSpec::new(target, window, self.synthesis.layers, self.synthesis.policy, self.synthesis.fidelity_floor)
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let o = &self.optics;
        Geometry::new(o.width, o.height, o.pitch, o.wavelength)
    }

    /// Wave-optics setup with charge `charge_stride * (j - center) + charge_offset`.
    pub fn oam_setup(&self, window: &ChannelWindow) -> Result<OamSetup> {
        let o = &self.optics;
        let geometry = self.geometry()?;
        let map = ChargeMap::new(o.charge_stride, o.charge_offset, window.center())?;
        let mut setup = OamSetup::new(geometry, map)?;
        let d = SorterParams::for_geometry(&geometry);
        setup.sorter = SorterParams::new(o.sorter_a.unwrap_or(d.a), o.sorter_b.unwrap_or(d.b), o.sorter_f.unwrap_or(d.f))?;
        setup.sorter.validate(&geometry)?;
        if let Some(r) = o.ring_radius {
            setup.ring_radius = r;
            setup.ring_width = r / 4.0;
        }
        if let Some(w) = o.ring_width {
            setup.ring_width = w;
        }
        Ok(setup)
    }

    /// Layout sized to the span of the working window (`N + 2d` when contiguous).
    pub fn path_layout(&self, window: &ChannelWindow) -> Result<PathLayout> {
        let p = &self.path;
        let w = window.working_indices();
        PathLayout::new(p.spacing, p.focal_length, p.wavelength, w[w.len() - 1] - w[0] + 1)
    }

    pub fn path_grid(&self, layout: &PathLayout) -> Result<PathGrid> {
        PathGrid::with_samples(layout, self.path.samples)
    }
}
