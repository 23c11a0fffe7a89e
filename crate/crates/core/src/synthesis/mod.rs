//! Parameterisation of the diagonal layers and the constrained search for
//! gate parameters.

mod evaluate;
mod lbfgs;
mod optimize;
mod series;
mod shaper;
mod spec;
mod sweep;

pub use evaluate::{evaluate_gate, gate_operator, Evaluator, Forward, GateEvaluation, GateParams, ParamLayout};
pub use lbfgs::{minimize, LbfgsOptions};
pub use optimize::{local_solve, optimize, OptimizationResult, OptimizerConfig};
pub use series::{bin_angle, sample_angular_diagonal, wrap_phase, SineSeries};
pub use shaper::{convolve_replicas, replicate_parallel, ShaperFunction};
pub use spec::{targets, BoundaryPolicy, GateSpec, DEFAULT_FIDELITY_FLOOR, TARGET_UNITARITY_TOL};
pub use sweep::*;
