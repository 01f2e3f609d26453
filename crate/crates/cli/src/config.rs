//! Run configuration: TOML in, validated solver inputs out.
//!
//! Parsing goes through a raw layer that keeps source spans on every value
//! taking part in a cross-field check, so diagnostics can point at a line.
//! The resolved [`RunConfig`] has all defaults filled in and serialises
//! back to the same schema; it is what `spectrum.json` echoes.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smx_core::{
    make_builtin, Boundary, BuiltinParams, PotentialModel, ReconstructOptions, ScanConfig, Slicing,
    SolverSettings,
};
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialName {
    Harmonic,
    Hydrogen,
    LennardJones,
}

/// How energies in the file are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnits {
    /// Multiples of the model's natural unit (`hbar omega`, `|E1|`, `eps`).
    #[default]
    Natural,
    /// `hbar = m = 1` units.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosureSpec {
    Barrier,
    Open,
    Step { level: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SampleGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialBlock {
    pub name: PotentialName,
    pub energy_units: EnergyUnits,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2: Option<f64>,
    pub left_closure: ClosureSpec,
    pub right_closure: ClosureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverBlock {
    pub x0: f64,
    pub v0: f64,
    pub taylor_order: usize,
    pub series_order: usize,
    pub slicing: Slicing<f64>,
    pub eps_trunc: f64,
    pub eps_tilde: f64,
    pub max_slices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanBlock {
    pub e_min: f64,
    pub e_max: f64,
    pub n_grid: usize,
    pub refine_tol: f64,
    pub max_iter: usize,
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleGrid>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub potential: PotentialBlock,
    pub solver: SolverBlock,
    pub scan: ScanBlock,
    pub output: OutputBlock,
}

/// Everything a job needs, built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Job {
    pub config: RunConfig,
    pub model: PotentialModel<f64>,
    pub scan: ScanConfig<f64>,
    pub reconstruct: ReconstructOptions,
    /// Natural energy unit in raw units.
    pub unit: f64,
    /// Header label of the natural energy column.
    pub unit_label: &'static str,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: Spanned<RawPotential>,
    solver: Spanned<RawSolver>,
    scan: Spanned<RawScan>,
    #[serde(default)]
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    name: Spanned<PotentialName>,
    #[serde(default)]
    energy_units: EnergyUnits,
    omega: Option<Spanned<f64>>,
    l: Option<Spanned<u32>>,
    epsilon: Option<Spanned<f64>>,
    sigma: Option<Spanned<f64>>,
    h1: Option<Spanned<f64>>,
    h2: Option<Spanned<f64>>,
    left_closure: Option<Spanned<ClosureSpec>>,
    right_closure: Option<Spanned<ClosureSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    x0: Spanned<f64>,
    v0: Spanned<f64>,
    taylor_order: Spanned<usize>,
    series_order: Spanned<usize>,
    slicing: Spanned<Slicing<f64>>,
    eps_trunc: Option<Spanned<f64>>,
    eps_tilde: Option<Spanned<f64>>,
    max_slices: Option<Spanned<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    e_min: Spanned<f64>,
    e_max: Spanned<f64>,
    n_grid: Spanned<usize>,
    refine_tol: Option<Spanned<f64>>,
    max_iter: Option<Spanned<usize>>,
    #[serde(default)]
    symmetric: Option<Spanned<bool>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    format: Option<Format>,
    states: Option<Vec<usize>>,
    sample: Option<Spanned<SampleGrid>>,
}

/// Reads and validates a configuration file. `.json` files (for instance
/// the echo inside `spectrum.json`) are accepted as well.
pub fn load(path: &Path) -> Result<Job, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|ext| ext == "json");
    let source = if is_json { json_to_toml(&text, path)? } else { text };
    parse(&source, &path.display().to_string())
}

fn json_to_toml(text: &str, path: &Path) -> Result<String, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    // a full results file carries the configuration under "config"
    let config = value.get("config").cloned().unwrap_or(value);
    toml::to_string(&config).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses `source`; `origin` names it in diagnostics.
pub fn parse(source: &str, origin: &str) -> Result<Job, CliError> {
    let raw: RawConfig = toml::from_str(source).map_err(|e| {
        let location = e.span().map(|s| locate(source, &s)).unwrap_or_default();
        CliError::Config(format!("{origin}{location}: {}", e.message()))
    })?;
    Resolver { source, origin }.resolve(raw)
}

struct Resolver<'a> {
    source: &'a str,
    origin: &'a str,
}

impl Resolver<'_> {
    fn fail<T>(&self, span: Range<usize>, message: impl std::fmt::Display) -> Result<T, CliError> {
        Err(CliError::Config(format!(
            "{}{}: {message}",
            self.origin,
            locate(self.source, &span)
        )))
    }

    fn positive(&self, value: &Spanned<f64>, key: &str) -> Result<f64, CliError> {
        let v = *value.get_ref();
        if !(v > 0.0) || !v.is_finite() {
            return self.fail(value.span(), format!("{key} must be a positive finite number, got {v}"));
        }
        Ok(v)
    }

    fn resolve(&self, raw: RawConfig) -> Result<Job, CliError> {
        let pot_span = raw.potential.span();
        let pot = raw.potential.into_inner();
        let name = *pot.name.get_ref();
        let forbid = |field: &Option<Spanned<f64>>, key: &str| -> Result<(), CliError> {
            match field {
                Some(v) => self.fail(v.span(), format!("`{key}` does not apply to the {name:?} potential")),
                None => Ok(()),
            }
        };

        let l_value = pot.l.as_ref().map_or(0, |l| *l.get_ref());
        let params = match name {
            PotentialName::Harmonic => {
                for (field, key) in [(&pot.epsilon, "epsilon"), (&pot.sigma, "sigma"), (&pot.h1, "h1"), (&pot.h2, "h2")] {
                    forbid(field, key)?;
                }
                if let Some(l) = &pot.l {
                    return self.fail(l.span(), "`l` does not apply to the Harmonic potential");
                }
                let omega = match &pot.omega {
                    Some(v) => self.positive(v, "omega")?,
                    None => 1.0,
                };
                BuiltinParams::harmonic(omega)
            }
            PotentialName::Hydrogen => {
                for (field, key) in [(&pot.omega, "omega"), (&pot.epsilon, "epsilon"), (&pot.sigma, "sigma")] {
                    forbid(field, key)?;
                }
                let mut params = BuiltinParams::hydrogen(l_value);
                if let BuiltinParams::HydrogenEffective { h1, h2, .. } = &mut params {
                    self.window(&pot, pot_span.clone(), h1, h2)?;
                }
                params
            }
            PotentialName::LennardJones => {
                forbid(&pot.omega, "omega")?;
                let mut params = BuiltinParams::lennard_jones(l_value);
                if let BuiltinParams::LennardJones { epsilon, sigma, h1, h2, .. } = &mut params {
                    if let Some(v) = &pot.epsilon {
                        *epsilon = self.positive(v, "epsilon")?;
                    }
                    if let Some(v) = &pot.sigma {
                        *sigma = self.positive(v, "sigma")?;
                    }
                    self.window(&pot, pot_span.clone(), h1, h2)?;
                }
                params
            }
        };
        let mut model = make_builtin(params).map_err(|e| CliError::Config(format!("{}: {e}", self.origin)))?;
        let unit = model.energy_unit;
        let to_raw = |e: f64| match pot.energy_units {
            EnergyUnits::Natural => e * unit,
            EnergyUnits::Raw => e,
        };

        for (spec, side) in [(&pot.left_closure, 0), (&pot.right_closure, 1)] {
            let Some(spec) = spec else { continue };
            let bound = if side == 0 { model.domain_lo } else { model.domain_hi };
            let closure = match *spec.get_ref() {
                ClosureSpec::Barrier => Boundary::Barrier,
                ClosureSpec::Open => Boundary::Open,
                ClosureSpec::Step { level } => Boundary::Step { level: to_raw(level) },
            };
            if bound.is_finite() == matches!(closure, Boundary::Open) {
                return self.fail(
                    spec.span(),
                    "closure must be `open` exactly when that end of the domain is infinite",
                );
            }
            if side == 0 {
                model.left_closure = closure;
            } else {
                model.right_closure = closure;
            }
        }

        let solver_span = raw.solver.span();
        let s = raw.solver.into_inner();
        for (value, key) in [(&s.taylor_order, "taylor_order"), (&s.series_order, "series_order")] {
            if *value.get_ref() == 0 {
                return self.fail(value.span(), format!("{key} must be >= 1"));
            }
        }
        if *s.series_order.get_ref() < 2 {
            return self.fail(s.series_order.span(), "series_order must be >= 2");
        }
        match *s.slicing.get_ref() {
            Slicing::Uniform { half_width } if !(half_width > 0.0) || !half_width.is_finite() => {
                return self.fail(s.slicing.span(), format!("half_width must be positive, got {half_width}"));
            }
            Slicing::Geometric { ratio } if !(ratio > 1.0) || !ratio.is_finite() => {
                return self.fail(s.slicing.span(), format!("ratio must exceed 1, got {ratio}"));
            }
            Slicing::Geometric { .. } if !(model.domain_lo > 0.0) => {
                return self.fail(s.slicing.span(), "geometric slicing needs a domain on positive x");
            }
            _ => {}
        }
        let eps_trunc = match &s.eps_trunc {
            Some(v) => self.positive(v, "eps_trunc")?,
            None => SolverSettings::DEFAULT_EPS_TRUNC,
        };
        let eps_tilde = match &s.eps_tilde {
            Some(v) => self.positive(v, "eps_tilde")?,
            None => ReconstructOptions::default().eps_tilde,
        };
        let max_slices = match &s.max_slices {
            Some(v) if *v.get_ref() == 0 => return self.fail(v.span(), "max_slices must be >= 1"),
            Some(v) => *v.get_ref(),
            None => SolverSettings::DEFAULT_MAX_SLICES,
        };
        let x0 = *s.x0.get_ref();
        if !(x0 > model.domain_lo && x0 < model.domain_hi) {
            return self.fail(
                s.x0.span(),
                format!("x0 = {x0} must lie inside the domain ({}, {})", model.domain_lo, model.domain_hi),
            );
        }

        let scan_span = raw.scan.span();
        let sc = raw.scan.into_inner();
        let (e_min, e_max, v0) = (*sc.e_min.get_ref(), *sc.e_max.get_ref(), *s.v0.get_ref());
        if !(e_min < e_max) {
            return self.fail(sc.e_max.span(), format!("e_max = {e_max} must exceed e_min = {e_min}"));
        }
        if !(v0 < e_min) {
            return self.fail(s.v0.span(), format!("v0 = {v0} must lie below e_min = {e_min}"));
        }
        for closure in [model.left_closure, model.right_closure] {
            if let Boundary::Step { level } = closure {
                if !(to_raw(e_max) < level) {
                    return self.fail(
                        sc.e_max.span(),
                        format!("e_max = {e_max} must lie below the exterior level {}", level / to_raw(1.0)),
                    );
                }
            }
        }
        if *sc.n_grid.get_ref() < 2 {
            return self.fail(sc.n_grid.span(), "n_grid must be >= 2");
        }
        let refine_tol = match &sc.refine_tol {
            Some(v) => self.positive(v, "refine_tol")?,
            None => ScanConfig::DEFAULT_REFINE_TOL,
        };
        let max_iter = match &sc.max_iter {
            Some(v) if *v.get_ref() == 0 => return self.fail(v.span(), "max_iter must be >= 1"),
            Some(v) => *v.get_ref(),
            None => ScanConfig::DEFAULT_MAX_ITER,
        };
        let symmetric = sc.symmetric.as_ref().is_some_and(|v| *v.get_ref());
        if let Some(flag) = sc.symmetric.as_ref().filter(|v| *v.get_ref()) {
            if !model.symmetric || x0 != 0.0 {
                return self.fail(flag.span(), "symmetric mode needs a symmetric potential and x0 = 0");
            }
        }

        let output = raw.output.unwrap_or(RawOutput {
            dir: None,
            format: None,
            states: None,
            sample: None,
        });
        if let Some(grid) = &output.sample {
            let g = grid.get_ref();
            if g.count == 0 || !(g.start < g.stop) && g.count > 1 {
                return self.fail(grid.span(), "sample grid needs count >= 1 and start < stop");
            }
        }

        let mut solver = SolverSettings::new(to_raw(v0), *s.slicing.get_ref(), *s.taylor_order.get_ref(), *s.series_order.get_ref());
        solver.eps_trunc = eps_trunc;
        solver.max_slices = max_slices;
        let mut scan = ScanConfig::new(solver, x0, to_raw(e_min), to_raw(e_max), *sc.n_grid.get_ref()).with_symmetric(symmetric);
        scan.refine_tol = refine_tol;
        scan.max_iter = max_iter;
        // backstop for anything the field checks above missed
        if let Err(e) = scan.validate(&model) {
            let span = if e.to_string().contains("x0") { solver_span } else { scan_span };
            return self.fail(span, e);
        }

        let closure_spec = |b: Boundary<f64>| match b {
            Boundary::Barrier => ClosureSpec::Barrier,
            Boundary::Open => ClosureSpec::Open,
            Boundary::Step { level } => ClosureSpec::Step {
                level: match pot.energy_units {
                    EnergyUnits::Natural => level / unit,
                    EnergyUnits::Raw => level,
                },
            },
        };
        let (omega, epsilon, sigma, h1, h2) = match params {
            BuiltinParams::Harmonic { omega } => (Some(omega), None, None, None, None),
            BuiltinParams::HydrogenEffective { h1, h2, .. } => (None, None, None, Some(h1), Some(h2)),
            BuiltinParams::LennardJones { epsilon, sigma, h1, h2, .. } => {
                (None, Some(epsilon), Some(sigma), Some(h1), Some(h2))
            }
        };
        let config = RunConfig {
            potential: PotentialBlock {
                name,
                energy_units: pot.energy_units,
                omega,
                l: (name != PotentialName::Harmonic).then_some(l_value),
                epsilon,
                sigma,
                h1,
                h2,
                left_closure: closure_spec(model.left_closure),
                right_closure: closure_spec(model.right_closure),
            },
            solver: SolverBlock {
                x0,
                v0,
                taylor_order: *s.taylor_order.get_ref(),
                series_order: *s.series_order.get_ref(),
                slicing: *s.slicing.get_ref(),
                eps_trunc,
                eps_tilde,
                max_slices,
            },
            scan: ScanBlock {
                e_min,
                e_max,
                n_grid: *sc.n_grid.get_ref(),
                refine_tol,
                max_iter,
                symmetric,
            },
            output: OutputBlock {
                dir: output.dir.unwrap_or_else(|| PathBuf::from(".")),
                format: output.format.unwrap_or_default(),
                states: output.states,
                sample: output.sample.map(Spanned::into_inner),
            },
        };
        let unit_label = match name {
            PotentialName::Harmonic => "E/hbar_omega",
            PotentialName::Hydrogen => "E/|E1|",
            PotentialName::LennardJones => "E/epsilon",
        };
        Ok(Job {
            config,
            model,
            scan,
            reconstruct: ReconstructOptions {
                eps_tilde,
                ..ReconstructOptions::default()
            },
            unit,
            unit_label,
        })
    }

    /// Applies optional `h1`/`h2` overrides to a radial window.
    fn window(&self, pot: &RawPotential, span: Range<usize>, h1: &mut f64, h2: &mut f64) -> Result<(), CliError> {
        if let Some(v) = &pot.h1 {
            *h1 = self.positive(v, "h1")?;
        }
        if let Some(v) = &pot.h2 {
            *h2 = self.positive(v, "h2")?;
        }
        if !(*h1 < *h2) {
            let span = pot.h2.as_ref().map(Spanned::span).unwrap_or(span);
            return self.fail(span, format!("need h1 < h2, got h1 = {h1}, h2 = {h2}"));
        }
        Ok(())
    }
}

/// `:line:column` of the start of `span`, one-based.
fn locate(source: &str, span: &Range<usize>) -> String {
    let start = span.start.min(source.len());
    let before = &source[..start];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    format!(":{line}:{column}")
}
