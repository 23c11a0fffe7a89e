use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use phasegate::path::{build_path_operator, phase_test, PathGrid, PathLayout};
use phasegate::synthesis::{
    crosstalk_vs_separation, evaluate_replicas, guard_band_sweep, optimize, targets, BoundaryPolicy, GateSpec,
    OptimizerConfig, SweepMode,
};
use phasegate::unitary::{self, ChannelWindow, ComplexMatrix};
use phasegate::{Config, GateReport};

type Rows = Vec<Vec<Complex64>>;

fn err(e: phasegate::Error) -> PyErr {
    match e {
        phasegate::Error::Io(m) => PyIOError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(err)
}

fn policy(name: &str) -> PyResult<BoundaryPolicy> {
    name.parse().map_err(err)
}

/// Named target unitary as nested lists of complex numbers.
#[pyfunction]
#[pyo3(signature = (name, n = 0, seed = 0))]
fn target(name: &str, n: usize, seed: u64) -> PyResult<Rows> {
    Ok(targets::by_name(name, n, seed).map_err(err)?.to_rows())
}

/// Normalised squared trace overlap of two square matrices.
#[pyfunction]
fn fidelity(u: Rows, v: Rows) -> PyResult<f64> {
    unitary::fidelity(&matrix(u)?, &matrix(v)?).map_err(err)
}

#[pyfunction]
fn success_probability(v: Rows) -> PyResult<f64> {
    unitary::success_probability(&matrix(v)?).map_err(err)
}

/// Target plus channel window, layer count and boundary policy.
#[pyclass(name = "GateSpec", module = "phasegate", from_py_object)]
#[derive(Clone)]
struct PyGateSpec {
    inner: GateSpec,
}

#[pymethods]
impl PyGateSpec {
    #[new]
    #[pyo3(signature = (target, k = 64, guard = 2, layers = 3, policy = "filtered", center = None, fidelity_floor = 0.999))]
    fn new(
        target: Rows,
        k: usize,
        guard: usize,
        layers: usize,
        policy: &str,
        center: Option<usize>,
        fidelity_floor: f64,
    ) -> PyResult<Self> {
        let t = matrix(target)?;
        let w = ChannelWindow::contiguous(k, t.rows(), guard, center.unwrap_or(k / 2)).map_err(err)?;
        let inner = GateSpec::new(t, w, layers, self::policy(policy)?, fidelity_floor).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn guard(&self) -> usize {
        self.inner.window().guard()
    }

    #[getter]
    fn channels(&self) -> Vec<usize> {
        self.inner.window().channel_indices().to_vec()
    }

    #[getter]
    fn policy(&self) -> String {
        self.inner.policy().to_string()
    }

    #[getter]
    fn target(&self) -> Rows {
        self.inner.target().to_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "GateSpec(n={}, k={}, guard={}, layers={}, policy='{}')",
            self.inner.n(),
            self.inner.k(),
            self.inner.window().guard(),
            self.inner.layer_count(),
            self.inner.policy()
        )
    }
}

/// Synthesised gate: parameters, metrics and provenance.
#[pyclass(name = "GateReport", module = "phasegate", from_py_object)]
#[derive(Clone)]
struct PyGateReport {
    inner: GateReport,
}

#[pymethods]
impl PyGateReport {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: GateReport::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: GateReport::load(path.as_ref()).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path.as_ref()).map_err(err)
    }

    #[getter]
    fn fidelity(&self) -> f64 {
        self.inner.metrics.fidelity
    }

    #[getter]
    fn probability(&self) -> f64 {
        self.inner.metrics.probability
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.metrics.converged
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.provenance.seed
    }

    #[getter]
    fn spec(&self) -> PyGateSpec {
        PyGateSpec { inner: self.inner.spec.clone() }
    }

    /// Angular series as `(amplitudes, phases)` pairs.
    #[getter]
    fn series(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.inner.params.series.iter().map(|s| (s.amplitudes().to_vec(), s.phases().to_vec())).collect()
    }

    /// Spectral shaper phases over all `K` channels.
    #[getter]
    fn shapers(&self) -> Vec<Vec<f64>> {
        self.inner.params.shapers.iter().map(|g| g.phases().to_vec()).collect()
    }

    /// Recomputed `(fidelity, probability)` of the abstract model.
    fn evaluate(&self) -> PyResult<(f64, f64)> {
        let e = self.inner.evaluate().map_err(err)?;
        Ok((e.fidelity, e.probability))
    }

    /// Encoding block of the abstract operator.
    fn operator(&self) -> PyResult<Rows> {
        Ok(self.inner.evaluate().map_err(err)?.v_central.to_rows())
    }

    /// Path-model operator, fidelity and phase-test fidelity.
    #[pyo3(signature = (config_toml = None))]
    fn verify_path(&self, py: Python<'_>, config_toml: Option<&str>) -> PyResult<(Rows, f64, f64)> {
        let cfg = match config_toml {
            Some(t) => Config::from_toml_str(t).map_err(err)?,
            None => Config::default(),
        };
        let report = self.inner.clone();
        py.detach(move || {
            let spec = report.validated_spec()?;
            let layout: PathLayout = cfg.path_layout(spec.window())?;
            let grid: PathGrid = cfg.path_grid(&layout)?;
            let v = build_path_operator(&report.params, &spec, &layout, &grid)?;
            let f = unitary::fidelity(spec.target(), &v)?;
            let pt = phase_test(&v, spec.target())?;
            Ok((v.to_rows(), f, pt))
        })
        .map_err(err)
    }

    /// Wave-optics operator and its fidelity (slow: one full-grid run per channel).
    #[pyo3(signature = (config_toml = None))]
    fn verify_wave(&self, py: Python<'_>, config_toml: Option<&str>) -> PyResult<(Rows, f64)> {
        let cfg = match config_toml {
            Some(t) => Config::from_toml_str(t).map_err(err)?,
            None => Config::default(),
        };
        let report = self.inner.clone();
        py.detach(move || {
            let spec = report.validated_spec()?;
            let setup = cfg.oam_setup(spec.window())?;
            let v = phasegate::optics::extract_operator(&report.params, spec.window(), &setup)?;
            let f = unitary::fidelity(spec.target(), &v)?;
            Ok((v.to_rows(), f))
        })
        .map_err(err)
    }

    /// Per-replica fidelities of copies shifted by `shifts` channels.
    fn replicate(&self, shifts: Vec<isize>) -> PyResult<Vec<f64>> {
        let spec = self.inner.validated_spec().map_err(err)?;
        Ok(evaluate_replicas(&self.inner.params, &spec, &shifts, true).map_err(err)?.replica_fidelities)
    }

    /// `(separation, worst replica fidelity)` for a dual copy of the gate.
    fn crosstalk(&self, separations: Vec<usize>) -> PyResult<Vec<(usize, f64)>> {
        let spec = self.inner.validated_spec().map_err(err)?;
        Ok(crosstalk_vs_separation(&spec, &self.inner.params, &separations)
            .map_err(err)?
            .into_iter()
            .map(|r| (r.separation, r.worst_fidelity))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "GateReport(target='{}', fidelity={:.6}, probability={:.4}, converged={})",
            self.inner.target_label, self.inner.metrics.fidelity, self.inner.metrics.probability, self.inner.metrics.converged
        )
    }
}

fn optimizer_config(restarts: usize, seed: u64, harmonics: usize) -> OptimizerConfig {
    OptimizerConfig { restarts, seed, harmonics, ..Default::default() }
}

/// Multi-start synthesis of `spec`.
#[pyfunction]
#[pyo3(signature = (spec, restarts = 32, seed = 0, harmonics = 3, label = "custom"))]
fn synthesize(py: Python<'_>, spec: PyGateSpec, restarts: usize, seed: u64, harmonics: usize, label: &str) -> PyResult<PyGateReport> {
    let cfg = optimizer_config(restarts, seed, harmonics);
    let s = spec.inner.clone();
    let r = py.detach(|| optimize(&s, &cfg)).map_err(err)?;
    Ok(PyGateReport { inner: GateReport::from_result(label, &spec.inner, &cfg, &r) })
}

/// Re-optimised `(policy, guard, fidelity, probability)` rows.
#[pyfunction]
#[pyo3(signature = (spec, guards, policies = vec!["open".to_string(), "filtered".to_string()], restarts = 32, seed = 0))]
fn guard_sweep(
    py: Python<'_>,
    spec: PyGateSpec,
    guards: Vec<usize>,
    policies: Vec<String>,
    restarts: usize,
    seed: u64,
) -> PyResult<Vec<(String, usize, f64, f64)>> {
    let pols = policies.iter().map(|p| policy(p)).collect::<PyResult<Vec<_>>>()?;
    let mode = SweepMode::Reoptimize(optimizer_config(restarts, seed, 3));
    let rows = py.detach(|| guard_band_sweep(&spec.inner, &guards, &pols, &mode)).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.policy.to_string(), r.guard, r.fidelity, r.probability)).collect())
}

#[pymodule]
#[pyo3(name = "phasegate")]
fn phasegate_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", phasegate::report::TOOL_VERSION)?;
    m.add_class::<PyGateSpec>()?;
    m.add_class::<PyGateReport>()?;
    m.add_function(wrap_pyfunction!(target, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(guard_sweep, m)?)?;
    Ok(())
}
