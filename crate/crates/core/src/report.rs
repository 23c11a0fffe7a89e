use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::synthesis::{evaluate_gate, GateEvaluation, GateParams, GateSpec, OptimizationResult, OptimizerConfig};
use crate::unitary::ChannelWindow;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetrics {
    pub fidelity: f64,
    pub probability: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub restarts: usize,
    pub best_restart: usize,
    pub tool_version: String,
    /// Seconds since the Unix epoch; absent unless requested, so reports
    /// stay bitwise reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// Everything needed to rebuild and re-evaluate a synthesised gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub target_label: String,
    pub spec: GateSpec,
    pub optimizer: OptimizerConfig,
    pub params: GateParams,
    pub metrics: ReportMetrics,
    pub provenance: Provenance,
    /// Channel shifts of the copies when the gate was parallelised.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replica_shifts: Option<Vec<isize>>,
}

impl GateReport {
    pub fn from_result(label: &str, spec: &GateSpec, optimizer: &OptimizerConfig, result: &OptimizationResult) -> Self {
        Self {
            target_label: label.to_string(),
            spec: spec.clone(),
            optimizer: optimizer.clone(),
            params: result.params.clone(),
            metrics: ReportMetrics {
                fidelity: result.fidelity,
                probability: result.probability,
                converged: result.converged,
                wave_fidelity: None,
                wave_probability: None,
                path_fidelity: None,
                path_probability: None,
            },
            provenance: Provenance {
                seed: result.seed,
                restarts: result.restarts_used,
                best_restart: result.best_restart,
                tool_version: TOOL_VERSION.to_string(),
                timestamp: None,
            },
            replica_shifts: None,
        }
    }

    /// Stamps the current time.
    pub fn with_timestamp(mut self) -> Self {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        self.provenance.timestamp = Some(now);
        self
    }

    /// The stored spec with every invariant re-checked.
    pub fn validated_spec(&self) -> Result<GateSpec> {
        let w = self.spec.window();
        let window = ChannelWindow::from_indices(w.k(), w.guard(), w.center(), w.channel_indices().to_vec())?;
        GateSpec::new(
            self.spec.target().clone(),
            window,
            self.spec.layer_count(),
            self.spec.policy(),
            self.spec.fidelity_floor(),
        )
    }

    /// Recomputes the abstract metrics from the stored parameters.
    pub fn evaluate(&self) -> Result<GateEvaluation> {
        evaluate_gate(&self.params, &self.validated_spec()?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        r.validated_spec()?;
        Ok(r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{optimize, targets, BoundaryPolicy};

    fn quick() -> GateReport {
        let w = ChannelWindow::centered(16, 2, 1).unwrap();
        let spec = GateSpec::three_layer(targets::hadamard(2).unwrap(), w, BoundaryPolicy::Open).unwrap();
        let cfg = OptimizerConfig { restarts: 2, seed: 3, ..Default::default() };
        let r = optimize(&spec, &cfg).unwrap();
        GateReport::from_result("hadamard2", &spec, &cfg, &r)
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let rep = quick();
        let text = rep.to_json();
        let back = GateReport::from_json(&text).unwrap();
        assert_eq!(back, rep);
        assert_eq!(back.to_json(), text);
        assert!(!text.contains("timestamp"));
    }

    #[test]
    fn evaluation_reproduces_metrics() {
        let rep = quick();
        let e = rep.evaluate().unwrap();
        assert!((e.fidelity - rep.metrics.fidelity).abs() < 1e-9);
        assert!((e.probability - rep.metrics.probability).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_window() {
        let text = quick().to_json().replace("\"guard\": 1", "\"guard\": 40");
        assert!(GateReport::from_json(&text).is_err());
    }
}
