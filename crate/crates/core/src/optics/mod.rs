//! Scalar wave-optics model of the OAM implementation: sampled fields,
//! propagation, the log-polar sorter, OAM modes and SLM mask export.

mod export;
mod field;
mod modes;
mod pipeline;
mod propagation;
mod sorter;

pub use export::{export_field, export_mask, phase_to_gray, MaskSidecar};
pub use field::{Geometry, PhaseMask, ScalarField};
pub use modes::{
    angular_profile, best_rotation, make_oam_superposition, mode_match_spectrum, oam_mode, spectrum_fidelity,
    OamBasisSpec,
};
pub use pipeline::{extract_operator, run_layers, run_shaper_pipeline, run_three_layer, OamSetup, PipelineRun};
pub use propagation::{
    apply_lens, fourier_pitch, fourier_stage, inverse_fourier_stage, propagate, MAX_CLIP_FRACTION,
};
pub use sorter::{
    angular_mask, angular_mask_for_series, focus_position, oam_shaper_mask, physical_angular_function,
    sorter_masks, ChargeMap, SorterParams,
};
