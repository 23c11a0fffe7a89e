use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{Geometry, PhaseMask, ScalarField};
use super::modes::{make_oam_superposition, mode_match_spectrum, OamBasisSpec};
use super::propagation::{apply_lens, fourier_stage, inverse_fourier_stage};
use super::sorter::{angular_mask_for_series, oam_shaper_mask, sorter_masks, ChargeMap, SorterParams};
use crate::error::{mismatch, Error, Result};
use crate::synthesis::{GateParams, ShaperFunction, SineSeries};
use crate::unitary::{ChannelWindow, ComplexMatrix};

/// Everything the wave model needs besides the layer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OamSetup {
    pub geometry: Geometry,
    pub sorter: SorterParams,
    pub map: ChargeMap,
    pub ring_radius: f64,
    pub ring_width: f64,
}

impl OamSetup {
    /// Default sorter and ring on `geometry`.
    pub fn new(geometry: Geometry, map: ChargeMap) -> Result<Self> {
        let sorter = SorterParams::for_geometry(&geometry);
        sorter.validate(&geometry)?;
        let ring = OamBasisSpec::default_ring(&geometry, vec![0], map.stride)?;
        Ok(Self { geometry, sorter, map, ring_radius: ring.ring_radius, ring_width: ring.ring_width })
    }

    /// Basis of the physical charges carrying `indices`.
    pub fn basis(&self, indices: &[usize]) -> Result<OamBasisSpec> {
        OamBasisSpec::new(self.map.charges(indices), self.ring_radius, self.ring_width, self.map.stride)
    }
}

/// Final field plus labelled intermediate planes.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub output: ScalarField,
    pub snapshots: Vec<(&'static str, ScalarField)>,
}

impl PipelineRun {
    pub fn snapshot(&self, label: &str) -> Option<&ScalarField> {
        self.snapshots.iter().find(|(l, _)| *l == label).map(|(_, f)| f)
    }

    /// Power fraction lost to band limiting over the run.
    pub fn clip_loss(&self) -> f64 {
        self.output.clip_loss()
    }
}

fn masked(mut field: ScalarField, mask: &PhaseMask) -> Result<ScalarField> {
    field.apply(mask)?;
    Ok(field)
}

/// Sorter, focal-plane staircase mask and the exact reverse sorter.
///
/// Snapshot labels: `input`, `after_phi1`, `after_phi2`, `focal`,
/// `focal_masked`, `output`. The reverse sorter applies the conjugate
/// elements and inverse Fourier stages, i.e. the forward sorter run backwards.
pub fn run_shaper_pipeline(
    input: &ScalarField,
    g: &ShaperFunction,
    map: &ChargeMap,
    sorter: &SorterParams,
) -> Result<PipelineRun> {
    let geom = *input.geometry();
    sorter.validate(&geom)?;
    let (phi1, phi2) = sorter_masks(sorter, &geom);
    let f = sorter.f;

    let after_phi1 = masked(input.clone(), &phi1)?;
    let plane2 = fourier_stage(&after_phi1, f)?;
    let after_phi2 = apply_lens(&masked(plane2, &phi2)?, f)?;
    let focal = fourier_stage(&after_phi2, f)?;
    let shaper = oam_shaper_mask(g, map, sorter, focal.geometry());
    let focal_masked = masked(focal.clone(), &shaper)?;

    let back2 = inverse_fourier_stage(&focal_masked, f)?;
    let back2 = masked(apply_lens(&back2, -f)?, &phi2.negated())?;
    let back1 = inverse_fourier_stage(&back2, f)?;
    let output = masked(back1, &phi1.negated())?;

    Ok(PipelineRun {
        snapshots: vec![
            ("input", input.clone()),
            ("after_phi1", after_phi1),
            ("after_phi2", after_phi2),
            ("focal", focal),
            ("focal_masked", focal_masked),
            ("output", output.clone()),
        ],
        output,
    })
}

/// Angle layers as angular masks, spectrum layers as shaper pipelines.
///
/// Snapshot labels: `input`, then per angle layer `angle_<i>` and per
/// spectrum layer `focal_<i>`, `focal_masked_<i>`, `sorted_<i>`; the last
/// entry is `output`.
pub fn run_layers(input: &ScalarField, params: &GateParams, setup: &OamSetup) -> Result<PipelineRun> {
    if params.series.len() != params.shapers.len() + 1 {
        return Err(Error::InvalidArgument("angle layers must bracket the spectrum layers".into()));
    }
    let geom = *input.geometry();
    let mut snaps: Vec<(&'static str, ScalarField)> = vec![("input", input.clone())];
    let mut field = input.clone();
    const ANGLE: [&str; 4] = ["angle_0", "angle_1", "angle_2", "angle_3"];
    const FOCAL: [&str; 3] = ["focal_0", "focal_1", "focal_2"];
    const MASKED: [&str; 3] = ["focal_masked_0", "focal_masked_1", "focal_masked_2"];
    const SORTED: [&str; 3] = ["sorted_0", "sorted_1", "sorted_2"];
    for (i, series) in params.series.iter().enumerate() {
        field = masked(field, &angular_mask_for_series(series, &setup.map, &geom))?;
        if let Some(label) = ANGLE.get(i) {
            snaps.push((label, field.clone()));
        }
        if let Some(g) = params.shapers.get(i) {
            let run = run_shaper_pipeline(&field, g, &setup.map, &setup.sorter)?;
            if i < FOCAL.len() {
                snaps.push((FOCAL[i], run.snapshot("focal").cloned().expect("pipeline snapshot")));
                snaps.push((MASKED[i], run.snapshot("focal_masked").cloned().expect("pipeline snapshot")));
                snaps.push((SORTED[i], run.output.clone()));
            }
            field = run.output;
        }
    }
    snaps.push(("output", field.clone()));
    Ok(PipelineRun { output: field, snapshots: snaps })
}

/// `f1` mask, shaper pipeline with `g`, `f2` mask.
pub fn run_three_layer(
    input: &ScalarField,
    f1: &SineSeries,
    g: &ShaperFunction,
    f2: &SineSeries,
    setup: &OamSetup,
) -> Result<PipelineRun> {
    let params = GateParams { series: vec![f1.clone(), f2.clone()], shapers: vec![g.clone()] };
    run_layers(input, &params, setup)
}

/// `N x N` operator on the window's encoding charges, measured by driving
/// each basis mode through the wave model and mode-matching the output.
pub fn extract_operator(params: &GateParams, window: &ChannelWindow, setup: &OamSetup) -> Result<ComplexMatrix> {
    let idx = window.channel_indices();
    let basis = setup.basis(idx)?;
    let n = idx.len();
    let cols = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
            coeffs[c] = Complex64::new(1.0, 0.0);
            let input = make_oam_superposition(&coeffs, &basis, &setup.geometry)?;
            let out = run_layers(&input, params, setup)?;
            mode_match_spectrum(&out.output, &basis)
        })
        .collect::<Result<Vec<_>>>()?;
    if cols.len() != n {
        return Err(mismatch(n, cols.len()));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| cols[c][r]))
}
