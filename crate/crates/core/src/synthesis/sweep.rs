use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_gate, GateParams};
use super::optimize::{optimize, OptimizerConfig};
use super::shaper::{convolve_replicas, replicate_parallel};
use super::spec::{BoundaryPolicy, GateSpec};
use crate::error::{Error, Result};
use crate::unitary::{fidelity, ChannelWindow, ComplexMatrix};

/// How a guard-band sweep obtains parameters at each `d`.
#[derive(Debug, Clone)]
pub enum SweepMode {
    /// Optimise afresh for every `(policy, d)`.
    Reoptimize(OptimizerConfig),
    /// Keep one parameter set; only the window (and hence the filter) changes.
    Fixed(GateParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardSweepRow {
    pub policy: BoundaryPolicy,
    pub guard: usize,
    pub fidelity: f64,
    pub probability: f64,
    pub converged: bool,
}

pub fn guard_band_sweep(
    spec: &GateSpec,
    d_values: &[usize],
    policies: &[BoundaryPolicy],
    mode: &SweepMode,
) -> Result<Vec<GuardSweepRow>> {
    let mut rows = Vec::with_capacity(d_values.len() * policies.len());
    for &policy in policies {
        for &d in d_values {
            let s = spec.with_window(spec.window().with_guard(d)?)?.with_policy(policy);
            let row = match mode {
                SweepMode::Reoptimize(cfg) => {
                    let r = optimize(&s, cfg)?;
                    GuardSweepRow {
                        policy,
                        guard: d,
                        fidelity: r.fidelity,
                        probability: r.probability,
                        converged: r.converged,
                    }
                }
                SweepMode::Fixed(params) => {
                    let e = evaluate_gate(params, &s)?;
                    GuardSweepRow {
                        policy,
                        guard: d,
                        fidelity: e.fidelity,
                        probability: e.probability,
                        converged: e.fidelity >= s.fidelity_floor(),
                    }
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Several copies of one gate evaluated together.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelEvaluation {
    /// Parameters with the replicated shaper.
    pub params: GateParams,
    /// Union of the replicas with the direct-sum target.
    pub spec: GateSpec,
    /// Encoding channels of each replica.
    pub replicas: Vec<ChannelWindow>,
    /// Block of the operator on all encoding channels, replicas in order.
    pub v_block: ComplexMatrix,
    /// Fidelity of each replica's diagonal block against the target.
    pub replica_fidelities: Vec<f64>,
    /// Fidelity of the whole block against the direct sum of targets.
    pub total_fidelity: f64,
    pub probability: f64,
    /// Power in off-diagonal (inter-replica) blocks over total block power.
    pub off_block_fraction: f64,
}

fn direct_sum_power(m: usize, target: &ComplexMatrix) -> ComplexMatrix {
    (1..m).fold(target.clone(), |acc, _| acc.direct_sum(target))
}

/// Evaluates replicas of `params` shifted by `shifts` channels. When
/// `checked` is set, overlapping working windows are rejected; otherwise
/// overlapping shaper contributions are summed.
pub fn evaluate_replicas(
    params: &GateParams,
    spec: &GateSpec,
    shifts: &[isize],
    checked: bool,
) -> Result<ParallelEvaluation> {
    if shifts.is_empty() {
        return Err(Error::InvalidArgument("need at least one replica".into()));
    }
    let base = spec.window();
    let replicas = shifts.iter().map(|&s| base.shifted(s)).collect::<Result<Vec<_>>>()?;
    let shapers = if checked {
        let centers: Vec<usize> = replicas.iter().map(|w| w.center()).collect();
        params
            .shapers
            .iter()
            .map(|g| replicate_parallel(g, base, &centers).map(|(g, _)| g))
            .collect::<Result<Vec<_>>>()?
    } else {
        params.shapers.iter().map(|g| convolve_replicas(g, shifts)).collect()
    };
    let mut indices: Vec<usize> = replicas.iter().flat_map(|w| w.channel_indices().to_vec()).collect();
    let sorted = {
        let mut v = indices.clone();
        v.sort_unstable();
        v
    };
    if sorted != indices {
        return Err(Error::InvalidArgument("replica shifts must be increasing and disjoint".into()));
    }
    indices.dedup();
    let union = ChannelWindow::from_indices(base.k(), base.guard(), base.center(), indices)?;
    let target = direct_sum_power(replicas.len(), spec.target());
    let pspec = GateSpec::new(target, union, spec.layer_count(), spec.policy(), spec.fidelity_floor())?;
    let pparams = GateParams { series: params.series.clone(), shapers };
    let e = evaluate_gate(&pparams, &pspec)?;

    let n = spec.n();
    let m = replicas.len();
    let mut replica_fidelities = Vec::with_capacity(m);
    let mut diag_power = 0.0;
    for r in 0..m {
        let idx: Vec<usize> = (r * n..(r + 1) * n).collect();
        let block = e.v_central.select(&idx, &idx)?;
        diag_power += block.frobenius_sq();
        replica_fidelities.push(fidelity(spec.target(), &block).unwrap_or(0.0));
    }
    let total_power = e.v_central.frobenius_sq();
    let off_block_fraction = if total_power > 0.0 { (total_power - diag_power).max(0.0) / total_power } else { 0.0 };
    Ok(ParallelEvaluation {
        spec: pspec,
        params: pparams,
        replicas,
        v_block: e.v_central,
        replica_fidelities,
        total_fidelity: e.fidelity,
        probability: e.probability,
        off_block_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkRow {
    pub separation: usize,
    pub replica_fidelities: Vec<f64>,
    pub worst_fidelity: f64,
    pub off_block_fraction: f64,
}

/// Shifts placing two copies of `window` with `separation` channels between
/// the last channel of the first and the first channel of the second, roughly
/// symmetric about the original position.
pub fn dual_shifts(window: &ChannelWindow, separation: usize) -> [isize; 2] {
    let idx = window.channel_indices();
    let span = (idx[idx.len() - 1] - idx[0]) as isize;
    let sep = separation as isize;
    let a = -(span + sep) / 2;
    [a, a + span + sep]
}

/// Worst per-replica fidelity of a dual gate as the replicas move together.
pub fn crosstalk_vs_separation(
    spec: &GateSpec,
    params: &GateParams,
    separations: &[usize],
) -> Result<Vec<CrosstalkRow>> {
    separations
        .iter()
        .map(|&sep| {
            if sep == 0 {
                return Err(Error::InvalidArgument("separation must be positive".into()));
            }
            let e = evaluate_replicas(params, spec, &dual_shifts(spec.window(), sep), false)?;
            let worst = e.replica_fidelities.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(CrosstalkRow {
                separation: sep,
                replica_fidelities: e.replica_fidelities,
                worst_fidelity: worst,
                off_block_fraction: e.off_block_fraction,
            })
        })
        .collect()
}
