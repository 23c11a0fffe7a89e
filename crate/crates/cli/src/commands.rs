use num_complex::Complex64;
use phasegate::optics::{
    angular_mask_for_series, export_field, export_mask, extract_operator, fourier_pitch, make_oam_superposition,
    oam_shaper_mask, run_layers, sorter_masks,
};
use phasegate::path::{build_path_operator, phase_test};
use phasegate::synthesis::{
    crosstalk_vs_separation, evaluate_replicas, gate_operator, guard_band_sweep, optimize, SweepMode,
};
use phasegate::unitary::{central_block, fidelity, success_probability};
use phasegate::{Config, GateReport};
use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::{ExportArgs, GateArgs, ParallelizeArgs, ReportArgs, ReportFormat, SweepArgs, SweepKind, SynthesizeArgs, VerifyArgs, VerifyMode};

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; exit code 2.
    Usage(String),
    /// The optimizer missed the fidelity floor; exit code 3.
    Infeasible(String),
    /// Anything else; exit code 1.
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<phasegate::Error> for CliError {
    fn from(e: phasegate::Error) -> Self {
        match e {
            phasegate::Error::Parse(m) => CliError::Usage(m),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CmdResult = Result<(), CliError>;

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        Some(p) => Config::load(p).map_err(|e| match e {
            phasegate::Error::Io(m) => CliError::Usage(format!("cannot read {}: {m}", p.display())),
            other => other.into(),
        }),
        None => Ok(Config::default()),
    }
}

fn load_report(path: &Path) -> Result<GateReport, CliError> {
    GateReport::load(path).map_err(|e| match e {
        phasegate::Error::Io(m) => CliError::Usage(format!("cannot read {}: {m}", path.display())),
        phasegate::Error::Parse(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other.into(),
    })
}

fn gate_config(a: &GateArgs) -> Result<Config, CliError> {
    let mut c = load_config(a.config.as_deref())?;
    if let Some(t) = &a.target {
        c.target.name = t.clone();
        c.target.matrix = None;
    }
    if a.n.is_some() {
        c.target.n = a.n;
    }
    if let Some(s) = a.seed {
        c.optimizer.seed = s;
        c.target.seed = s;
    }
    if let Some(s) = a.target_seed {
        c.target.seed = s;
    }
    if let Some(v) = a.layers {
        c.synthesis.layers = v;
    }
    if let Some(v) = a.guard {
        c.window.guard = v;
    }
    if let Some(v) = a.k {
        c.window.k = v;
    }
    if a.center.is_some() {
        c.window.center = a.center;
    }
    if let Some(p) = a.policy {
        c.synthesis.policy = p;
    }
    if let Some(v) = a.restarts {
        c.optimizer.restarts = v;
    }
    if let Some(v) = a.harmonics {
        c.optimizer.harmonics = v;
    }
    Ok(c)
}

/// Configuration errors (bad names, windows, layer counts) are usage errors.
fn spec_from(c: &Config) -> Result<phasegate::synthesis::GateSpec, CliError> {
    c.gate_spec().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn synthesize(a: SynthesizeArgs) -> CmdResult {
    let cfg = gate_config(&a.gate)?;
    let spec = spec_from(&cfg)?;
    let (_, label) = cfg.target_matrix().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = optimize(&spec, &cfg.optimizer)?;
    let mut rep = GateReport::from_result(&label, &spec, &cfg.optimizer, &result);
    if a.timestamp {
        rep = rep.with_timestamp();
    }
    rep.save(&a.out)?;
    println!(
        "{label}: fidelity {:.6}, probability {:.4}, restart {} of {} -> {}",
        result.fidelity,
        result.probability,
        result.best_restart,
        result.restarts_used,
        a.out.display()
    );
    if result.converged {
        Ok(())
    } else {
        Err(CliError::Infeasible(format!(
            "best fidelity {:.6} is below the floor {}",
            result.fidelity,
            spec.fidelity_floor()
        )))
    }
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    mode: &'static str,
    fidelity: f64,
    probability: f64,
    /// Fidelity of the measured block against the abstract model's block.
    model_agreement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_test_fidelity: Option<f64>,
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let mut rep = load_report(&a.report)?;
    let cfg = load_config(a.config.as_deref())?;
    let spec = rep.validated_spec()?;
    let abstract_block = central_block(&gate_operator(&rep.params, &spec)?, spec.window())?;
    let out = match a.mode {
        VerifyMode::Abstract => {
            let e = rep.evaluate()?;
            VerifyOutput {
                mode: "abstract",
                fidelity: e.fidelity,
                probability: e.probability,
                model_agreement: 1.0,
                phase_test_fidelity: None,
            }
        }
        VerifyMode::Wave => {
            let setup = cfg.oam_setup(spec.window())?;
            let v = extract_operator(&rep.params, spec.window(), &setup)?;
            let out = VerifyOutput {
                mode: "wave",
                fidelity: fidelity(spec.target(), &v)?,
                probability: success_probability(&v)?,
                model_agreement: fidelity(&abstract_block, &v)?,
                phase_test_fidelity: None,
            };
            rep.metrics.wave_fidelity = Some(out.fidelity);
            rep.metrics.wave_probability = Some(out.probability);
            out
        }
        VerifyMode::Path => {
            let layout = cfg.path_layout(spec.window())?;
            let grid = cfg.path_grid(&layout)?;
            let v = build_path_operator(&rep.params, &spec, &layout, &grid)?;
            let out = VerifyOutput {
                mode: "path",
                fidelity: fidelity(spec.target(), &v)?,
                probability: success_probability(&v)?,
                model_agreement: fidelity(&abstract_block, &v)?,
                phase_test_fidelity: Some(phase_test(&v, spec.target())?),
            };
            rep.metrics.path_fidelity = Some(out.fidelity);
            rep.metrics.path_probability = Some(out.probability);
            out
        }
    };
    println!("{}", serde_json::to_string_pretty(&out).map_err(|e| CliError::Runtime(e.into()))?);
    if let Some(p) = a.update {
        rep.save(&p)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SeparationCsv {
    separation: usize,
    worst_fidelity: f64,
    off_block_fraction: f64,
    replica_0: f64,
    replica_1: f64,
}

pub fn sweep(a: SweepArgs) -> CmdResult {
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    match a.kind {
        SweepKind::Guard => {
            let cfg = gate_config(&a.gate)?;
            let spec = spec_from(&cfg)?;
            let mode = match &a.report {
                Some(p) => SweepMode::Fixed(load_report(p)?.params),
                None => SweepMode::Reoptimize(cfg.optimizer.clone()),
            };
            for row in guard_band_sweep(&spec, &a.d, &a.policies, &mode)? {
                w.serialize(row)?;
            }
        }
        SweepKind::Separation => {
            let p = a
                .report
                .as_ref()
                .ok_or_else(|| CliError::Usage("a separation sweep needs --report".into()))?;
            let rep = load_report(p)?;
            let spec = rep.validated_spec()?;
            for row in crosstalk_vs_separation(&spec, &rep.params, &a.separations)? {
                w.serialize(SeparationCsv {
                    separation: row.separation,
                    worst_fidelity: row.worst_fidelity,
                    off_block_fraction: row.off_block_fraction,
                    replica_0: row.replica_fidelities[0],
                    replica_1: row.replica_fidelities[1],
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn parallelize(a: ParallelizeArgs) -> CmdResult {
    let rep = load_report(&a.report)?;
    let spec = rep.validated_spec()?;
    let c = spec.window().center() as isize;
    let shifts: Vec<isize> = a.centers.iter().map(|&x| x as isize - c).collect();
    let par = evaluate_replicas(&rep.params, &spec, &shifts, true).map_err(|e| match e {
        phasegate::Error::OverlappingWindows(m) => CliError::Usage(format!("replica windows overlap: {m}")),
        other => other.into(),
    })?;
    let worst = par.replica_fidelities.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut out = rep.clone();
    out.target_label = format!("{}x{}", rep.target_label, shifts.len());
    out.spec = par.spec.clone();
    out.params = par.params.clone();
    out.metrics.fidelity = par.total_fidelity;
    out.metrics.probability = par.probability;
    out.metrics.converged = worst >= spec.fidelity_floor();
    out.metrics.wave_fidelity = None;
    out.metrics.wave_probability = None;
    out.metrics.path_fidelity = None;
    out.metrics.path_probability = None;
    out.replica_shifts = Some(shifts);
    out.save(&a.out)?;
    let per: Vec<String> = par.replica_fidelities.iter().map(|f| format!("{f:.6}")).collect();
    println!(
        "replica fidelities [{}], total {:.6}, off-block {:.2e} -> {}",
        per.join(", "),
        par.total_fidelity,
        par.off_block_fraction,
        a.out.display()
    );
    Ok(())
}

pub fn export_masks(a: ExportArgs) -> CmdResult {
    let rep = load_report(&a.report)?;
    let cfg = load_config(a.config.as_deref())?;
    let spec = rep.validated_spec()?;
    let setup = cfg.oam_setup(spec.window())?;
    let g = setup.geometry;
    let plane2 = g.with_pitch(fourier_pitch(g.width, g.pitch, g.wavelength, setup.sorter.f));
    let focal = plane2.with_pitch(fourier_pitch(g.width, plane2.pitch, g.wavelength, setup.sorter.f));
    let mut written = Vec::new();
    let (phi1, phi2) = sorter_masks(&setup.sorter, &g);
    written.extend(export_mask(&phi1, &g, &a.out_dir, "sorter_phi1")?);
    written.extend(export_mask(&phi2, &plane2, &a.out_dir, "sorter_phi2")?);
    for (i, s) in rep.params.series.iter().enumerate() {
        let m = angular_mask_for_series(s, &setup.map, &g);
        written.extend(export_mask(&m, &g, &a.out_dir, &format!("angle_{i}"))?);
    }
    for (i, sh) in rep.params.shapers.iter().enumerate() {
        let m = oam_shaper_mask(sh, &setup.map, &setup.sorter, &focal);
        written.extend(export_mask(&m, &focal, &a.out_dir, &format!("shaper_{i}"))?);
    }
    if a.snapshots {
        let basis = setup.basis(spec.window().channel_indices())?;
        let n = basis.charges.len();
        let c = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let input = make_oam_superposition(&c, &basis, &g)?;
        let run = run_layers(&input, &rep.params, &setup)?;
        for (label, field) in &run.snapshots {
            written.extend(export_field(field, &a.out_dir, &format!("snapshot_{label}"))?);
        }
    }
    println!("wrote {} files to {}", written.len(), a.out_dir.display());
    Ok(())
}

pub fn report(a: ReportArgs) -> CmdResult {
    let rep = load_report(&a.report)?;
    match a.format {
        ReportFormat::Json => print!("{}", rep.to_json()),
        ReportFormat::Text => {
            let s = &rep.spec;
            let w = s.window();
            println!("target       {} ({}x{})", rep.target_label, s.n(), s.n());
            println!("channels     {:?} of K = {}, guard {}", w.channel_indices(), w.k(), w.guard());
            println!("layers       {} ({} policy)", s.layer_count(), s.policy());
            println!("fidelity     {:.6} (floor {})", rep.metrics.fidelity, s.fidelity_floor());
            println!("probability  {:.4}", rep.metrics.probability);
            println!("converged    {}", rep.metrics.converged);
            if let (Some(f), Some(p)) = (rep.metrics.wave_fidelity, rep.metrics.wave_probability) {
                println!("wave model   fidelity {f:.6}, probability {p:.4}");
            }
            if let (Some(f), Some(p)) = (rep.metrics.path_fidelity, rep.metrics.path_probability) {
                println!("path model   fidelity {f:.6}, probability {p:.4}");
            }
            if let Some(sh) = &rep.replica_shifts {
                println!("replicas     shifts {sh:?}");
            }
            println!(
                "provenance   seed {}, {} restarts (best {}), version {}",
                rep.provenance.seed, rep.provenance.restarts, rep.provenance.best_restart, rep.provenance.tool_version
            );
        }
    }
    Ok(())
}
