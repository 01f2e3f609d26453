//! Spectrum and wavefunction jobs and their output files.
//!
//! All computation finishes before anything is written, and every file is
//! produced from ordered data by this single thread, so repeated runs of
//! the same configuration give byte-identical CSV files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use smx_core::{reconstruct, solve_spectrum, EnergyRoot, PiecewiseWavefunction, SmxError, SpectrumReport};

use crate::config::{Format, Job, RunConfig, SampleGrid};
use crate::error::CliError;

/// Where and how to write.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
}

impl Sink {
    /// Creates the directory and checks that it accepts files.
    pub fn prepare(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(self.dir.display(), e))?;
        let probe = self.dir.join(".smx-write-probe");
        fs::write(&probe, b"").map_err(|e| CliError::io(self.dir.display(), e))?;
        fs::remove_file(&probe).map_err(|e| CliError::io(probe.display(), e))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(path.display(), e))?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(format!("csv encoding: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv encoding: {e}")))
}

#[derive(Debug, Serialize)]
struct RootRecord {
    n: usize,
    energy: f64,
    energy_raw: f64,
    re_f: f64,
    parity: &'static str,
    iterations: usize,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct FailureRecord {
    bracket_lo: f64,
    bracket_hi: f64,
    error: String,
}

#[derive(Debug, Serialize)]
struct Timings {
    spectrum_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wavefunction_seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SpectrumDocument<'a> {
    config: &'a RunConfig,
    energy_unit: &'static str,
    energy_unit_raw: f64,
    roots: Vec<RootRecord>,
    failures: Vec<FailureRecord>,
    rejected_roots: usize,
    timings: Timings,
}

/// Result of the spectrum stage.
pub struct SpectrumOutcome {
    pub report: SpectrumReport<f64>,
    pub seconds: f64,
}

impl SpectrumOutcome {
    /// Non-convergence of any bracket, reported after outputs are written.
    pub fn status(&self) -> Result<(), CliError> {
        match self.report.failures.len() {
            0 => Ok(()),
            n => Err(CliError::Numerical(format!(
                "{n} bracket(s) did not converge; see the failure rows of spectrum.csv"
            ))),
        }
    }
}

pub fn compute_spectrum(job: &Job) -> Result<SpectrumOutcome, CliError> {
    let start = Instant::now();
    let report = solve_spectrum(&job.model, &job.scan).map_err(|e| match e {
        SmxError::Parameter(_) | SmxError::InvalidClosure(_) | SmxError::Domain { .. } => {
            CliError::Config(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    })?;
    let seconds = start.elapsed().as_secs_f64();
    info!("{} roots in {seconds:.3} s", report.roots.len());
    for (bracket, err) in &report.failures {
        warn!("bracket [{}, {}]: {err}", bracket.lo, bracket.hi);
    }
    Ok(SpectrumOutcome { report, seconds })
}

fn root_record(job: &Job, n: usize, root: &EnergyRoot<f64>) -> RootRecord {
    RootRecord {
        n,
        energy: root.energy / job.unit,
        energy_raw: root.energy,
        re_f: root.re_f,
        parity: root.parity.as_str(),
        iterations: root.iterations,
        residual: root.residual,
    }
}

pub fn write_spectrum(job: &Job, sink: &Sink, outcome: &SpectrumOutcome, wave_seconds: Option<f64>) -> Result<(), CliError> {
    let report = &outcome.report;
    let roots: Vec<RootRecord> = report.roots.iter().enumerate().map(|(n, r)| root_record(job, n, r)).collect();
    let failures: Vec<FailureRecord> = report
        .failures
        .iter()
        .map(|(b, e)| FailureRecord {
            bracket_lo: b.lo,
            bracket_hi: b.hi,
            error: e.to_string(),
        })
        .collect();

    if sink.format.csv() {
        let header = ["n", job.unit_label, "E_raw", "re_F", "parity", "iterations", "residual", "status"];
        let mut rows: Vec<Vec<String>> = roots
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.energy),
                    num(r.energy_raw),
                    num(r.re_f),
                    r.parity.to_string(),
                    r.iterations.to_string(),
                    num(r.residual),
                    "ok".to_string(),
                ]
            })
            .collect();
        for ((bracket, err), record) in report.failures.iter().zip(&failures) {
            let best = match err {
                SmxError::NonConvergence { best, .. } => *best,
                _ => 0.5 * (bracket.lo + bracket.hi),
            };
            let residual = match err {
                SmxError::NonConvergence { residual, .. } => num(*residual),
                _ => String::new(),
            };
            rows.push(vec![
                String::new(),
                num(best / job.unit),
                num(best),
                String::new(),
                String::new(),
                String::new(),
                residual,
                format!("failed: {}", record.error),
            ]);
        }
        sink.write("spectrum.csv", &csv_bytes(&header, &rows)?)?;
    }
    if sink.format.json() {
        let doc = SpectrumDocument {
            config: &job.config,
            energy_unit: job.unit_label,
            energy_unit_raw: job.unit,
            roots,
            failures,
            rejected_roots: report.rejected.len(),
            timings: Timings {
                spectrum_seconds: outcome.seconds,
                wavefunction_seconds: wave_seconds,
            },
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(format!("json encoding: {e}")))?;
        text.push('\n');
        sink.write("spectrum.json", text.as_bytes())?;
    }
    Ok(())
}

/// `smx spectrum`.
pub fn run_spectrum(job: &Job, sink: &Sink) -> Result<(), CliError> {
    sink.prepare()?;
    let outcome = compute_spectrum(job)?;
    write_spectrum(job, sink, &outcome, None)?;
    outcome.status()
}

struct StateResult {
    n: usize,
    energy: f64,
    wf: PiecewiseWavefunction,
    mean: f64,
    mean_sq: f64,
    sigma: f64,
    x: Vec<f64>,
    psi: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct StateDocument<'a> {
    n: usize,
    energy: f64,
    norm: f64,
    nodes: usize,
    mean_r: f64,
    mean_r2: f64,
    sigma_r: f64,
    x: &'a [f64],
    psi: &'a [f64],
}

fn state_result(job: &Job, n: usize, root: &EnergyRoot<f64>) -> Result<StateResult, CliError> {
    let numerical = |e: SmxError| CliError::Numerical(format!("state {n}: {e}"));
    let wf = reconstruct(&job.model, &job.scan, root, &job.reconstruct).map_err(numerical)?;
    let mean = wf.expectation(1).map_err(numerical)?;
    let mean_sq = wf.expectation(2).map_err(numerical)?;
    let sigma = wf.std_dev().map_err(numerical)?;
    let grid = job.config.output.sample.unwrap_or_else(|| {
        let (lo, hi) = wf.span();
        SampleGrid { start: lo, stop: hi, count: 2001 }
    });
    let x = grid.points();
    let psi = wf.sample(&x);
    Ok(StateResult {
        n,
        energy: root.energy,
        wf,
        mean,
        mean_sq,
        sigma,
        x,
        psi,
    })
}

/// `smx wavefn`: the spectrum, then the requested eigenfunctions.
pub fn run_wavefunctions(job: &Job, sink: &Sink) -> Result<(), CliError> {
    sink.prepare()?;
    let outcome = compute_spectrum(job)?;
    let roots = &outcome.report.roots;
    let states: Vec<usize> = job.config.output.states.clone().unwrap_or_else(|| (0..roots.len()).collect());
    if let Some(&bad) = states.iter().find(|&&n| n >= roots.len()) {
        write_spectrum(job, sink, &outcome, None)?;
        return Err(CliError::Numerical(format!(
            "state {bad} requested but only {} root(s) were found in the window",
            roots.len()
        )));
    }

    let start = Instant::now();
    let results: Vec<StateResult> = states
        .par_iter()
        .map(|&n| state_result(job, n, &roots[n]))
        .collect::<Result<_, _>>()?;
    let wave_seconds = start.elapsed().as_secs_f64();
    for r in &results {
        if r.wf.junction_mismatch > job.reconstruct.junction_warn {
            warn!("state {}: junction mismatch {:.2e}", r.n, r.wf.junction_mismatch);
        }
    }

    write_spectrum(job, sink, &outcome, Some(wave_seconds))?;
    if sink.format.csv() {
        for r in &results {
            let rows: Vec<Vec<String>> = r.x.iter().zip(&r.psi).map(|(x, p)| vec![num(*x), num(*p)]).collect();
            sink.write(&format!("psi_{}.csv", r.n), &csv_bytes(&["x", "psi"], &rows)?)?;
        }
        let header = ["n", job.unit_label, "norm", "nodes", "mean_r", "mean_r2", "sigma_r"];
        let rows: Vec<Vec<String>> = results
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.energy / job.unit),
                    num(r.wf.raw_norm()),
                    r.wf.node_count().to_string(),
                    num(r.mean),
                    num(r.mean_sq),
                    num(r.sigma),
                ]
            })
            .collect();
        sink.write("moments.csv", &csv_bytes(&header, &rows)?)?;
    }
    if sink.format.json() {
        let docs: Vec<StateDocument> = results
            .iter()
            .map(|r| StateDocument {
                n: r.n,
                energy: r.energy / job.unit,
                norm: r.wf.raw_norm(),
                nodes: r.wf.node_count(),
                mean_r: r.mean,
                mean_r2: r.mean_sq,
                sigma_r: r.sigma,
                x: &r.x,
                psi: &r.psi,
            })
            .collect();
        let mut text = serde_json::to_string(&docs).map_err(|e| CliError::Io(format!("json encoding: {e}")))?;
        text.push('\n');
        sink.write("wavefunctions.json", text.as_bytes())?;
    }
    outcome.status()
}

/// Output directory: the flag wins over the config file.
pub fn sink_for(job: &Job, dir: Option<&Path>, format: Option<Format>) -> Sink {
    Sink {
        dir: dir.map_or_else(|| job.config.output.dir.clone(), Path::to_path_buf),
        format: format.unwrap_or(job.config.output.format),
    }
}
