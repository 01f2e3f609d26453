//! Bound-state search on `F(E) = S^{x0,L}(E) S^{x0,R}(E)`.
//!
//! `F` stays on the unit circle; a bound state sits where `F = 1`. The scan
//! looks for sign changes of `Im F` with `Re F > 0`, and each bracket is
//! refined by secant steps that fall back to regula falsi whenever an iterate
//! would leave the bracket. For a well symmetric about `x0 = 0` the right
//! phase alone decides: `Im S^{0,R} = 0`, with `Re = +1` (even) or `-1` (odd).

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmxError};
use crate::potential::{Boundary, PotentialModel};
use crate::scalar::Scalar;
use crate::smatrix::{sweep_halfline, Direction, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig<S: Scalar = f64> {
    pub solver: SolverSettings<S>,
    pub x0: S,
    pub e_min: S,
    pub e_max: S,
    pub n_grid: usize,
    /// Target on `|Im F|`.
    pub refine_tol: S,
    pub max_iter: usize,
    /// Use the single-phase criterion; requires a well symmetric about 0
    /// and `x0 = 0`.
    pub symmetric: bool,
}

impl ScanConfig<f64> {
    pub const DEFAULT_REFINE_TOL: f64 = 1e-14;
    pub const DEFAULT_MAX_ITER: usize = 60;

    pub fn new(solver: SolverSettings<f64>, x0: f64, e_min: f64, e_max: f64, n_grid: usize) -> Self {
        Self {
            solver,
            x0,
            e_min,
            e_max,
            n_grid,
            refine_tol: Self::DEFAULT_REFINE_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            symmetric: false,
        }
    }
}

impl<S: Scalar> ScanConfig<S> {
    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    /// Checks the cross-field constraints against `model`.
    pub fn validate(&self, model: &PotentialModel<S>) -> Result<()> {
        let fail = |msg: String| Err(SmxError::Parameter(msg));
        if self.n_grid < 2 {
            return fail(format!("n_grid must be >= 2, got {}", self.n_grid));
        }
        if !(self.e_min < self.e_max) {
            return fail(format!("need e_min < e_max, got [{}, {}]", self.e_min, self.e_max));
        }
        if !(self.solver.v0 < self.e_min) {
            return fail(format!(
                "reference level V0 = {} must lie below e_min = {}",
                self.solver.v0, self.e_min
            ));
        }
        for closure in [model.left_closure, model.right_closure] {
            if let Boundary::Step { level } = closure {
                if !(self.e_max < level) {
                    return fail(format!(
                        "e_max = {} must lie below the exterior level {level}",
                        self.e_max
                    ));
                }
            }
        }
        if !(self.x0 >= model.domain_lo && self.x0 <= model.domain_hi) {
            return fail(format!("x0 = {} lies outside the domain", self.x0));
        }
        if self.symmetric && (!model.symmetric || self.x0 != S::zero()) {
            return fail("symmetric mode needs a symmetric model and x0 = 0".into());
        }
        if self.max_iter == 0 {
            return fail("max_iter must be >= 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<S> {
        let n = self.n_grid;
        let step = (self.e_max - self.e_min) / S::from_usize_lossy(n - 1);
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.e_max
                } else {
                    self.e_min + step * S::from_usize_lossy(i)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
    #[serde(rename = "none")]
    NotApplicable,
}

impl Parity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::NotApplicable => "none",
        }
    }
}

/// A refined bound-state energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRoot<S: Scalar = f64> {
    pub energy: S,
    pub re_f: S,
    pub parity: Parity,
    pub iterations: usize,
    /// `|Im F|` at `energy`.
    pub residual: S,
}

/// Energy interval on which `Im F` changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<S: Scalar = f64> {
    pub lo: S,
    pub hi: S,
    pub f_lo: Complex<S>,
    pub f_hi: Complex<S>,
}

/// Evaluates the bound-state function `F(E)`.
pub fn eval_condition<S: Scalar>(model: &PotentialModel<S>, config: &ScanConfig<S>, energy: S) -> Result<Complex<S>> {
    let sweep = |dir| sweep_halfline(model, energy, config.x0, dir, &config.solver, false).map(|h| h.phase.value);
    if config.symmetric {
        return sweep(Direction::Right);
    }
    let (left, right) = rayon::join(|| sweep(Direction::Left), || sweep(Direction::Right));
    Ok(left? * right?)
}

/// Grid scan for sign changes of `Im F`.
///
/// Asymmetric mode keeps only crossings with `Re F > 0` at both ends;
/// symmetric mode keeps both kinds.
pub fn scan<S: Scalar>(model: &PotentialModel<S>, config: &ScanConfig<S>) -> Result<Vec<Bracket<S>>> {
    config.validate(model)?;
    let grid = config.grid();
    let values: Vec<Complex<S>> = grid
        .par_iter()
        .map(|&e| eval_condition(model, config, e))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        let crosses = fa.im * fb.im < S::zero() || (fb.im == S::zero() && fa.im != S::zero());
        if !crosses {
            continue;
        }
        if !config.symmetric && !(fa.re > S::zero() && fb.re > S::zero()) {
            continue;
        }
        brackets.push(Bracket {
            lo: grid[i],
            hi: grid[i + 1],
            f_lo: fa,
            f_hi: fb,
        });
    }
    Ok(brackets)
}

/// Refines one bracket; see [`refine_traced`].
pub fn refine<S: Scalar>(model: &PotentialModel<S>, config: &ScanConfig<S>, bracket: &Bracket<S>) -> Result<EnergyRoot<S>> {
    refine_traced(model, config, bracket).map(|(root, _)| root)
}

/// Secant iteration on `g(E) = Im F(E)` seeded with the bracket ends.
///
/// An iterate outside the current bracket is replaced by the regula falsi
/// point, and every evaluation shrinks the bracket. Iteration stops when
/// `|g| <= refine_tol` or the step falls to the resolution of the scalar
/// type. Also returns the bracket after every iteration.
pub fn refine_traced<S: Scalar>(
    model: &PotentialModel<S>,
    config: &ScanConfig<S>,
    bracket: &Bracket<S>,
) -> Result<(EnergyRoot<S>, Vec<(S, S)>)> {
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let (mut g_lo, mut g_hi) = (bracket.f_lo.im, bracket.f_hi.im);
    let mut history = vec![(lo, hi)];

    let make_root = |energy: S, f: Complex<S>, iterations: usize| EnergyRoot {
        energy,
        re_f: f.re,
        parity: if config.symmetric {
            if f.re > S::zero() {
                Parity::Even
            } else {
                Parity::Odd
            }
        } else {
            Parity::NotApplicable
        },
        iterations,
        residual: f.im.abs(),
    };

    for (e, f) in [(lo, bracket.f_lo), (hi, bracket.f_hi)] {
        if f.im.abs() <= config.refine_tol {
            return Ok((make_root(e, f, 0), history));
        }
    }

    let (mut x_prev, mut g_prev) = (lo, g_lo);
    let (mut x_cur, mut g_cur) = (hi, g_hi);
    let mut best = (hi, bracket.f_hi);
    if bracket.f_lo.im.abs() < bracket.f_hi.im.abs() {
        best = (lo, bracket.f_lo);
    }

    for iteration in 1..=config.max_iter {
        let mut x_new = x_cur - g_cur * (x_cur - x_prev) / (g_cur - g_prev);
        if !(x_new > lo && x_new < hi) {
            x_new = hi - g_hi * (hi - lo) / (g_hi - g_lo);
            if !(x_new > lo && x_new < hi) {
                x_new = (lo + hi) / S::lit(2.0);
            }
        }
        let f_new = eval_condition(model, config, x_new)?;
        let g_new = f_new.im;
        if g_new.abs() < best.1.im.abs() {
            best = (x_new, f_new);
        }
        if (g_new < S::zero()) == (g_lo < S::zero()) {
            lo = x_new;
            g_lo = g_new;
        } else {
            hi = x_new;
            g_hi = g_new;
        }
        history.push((lo, hi));

        let step = (x_new - x_cur).abs();
        x_prev = x_cur;
        g_prev = g_cur;
        x_cur = x_new;
        g_cur = g_new;

        let resolution = S::lit(2.0) * S::epsilon() * x_cur.abs().max(S::min_positive_value());
        if g_new.abs() <= config.refine_tol || step <= resolution || (hi - lo) <= resolution || g_new == g_prev {
            return Ok((make_root(best.0, best.1, iteration), history));
        }
    }
    Err(SmxError::NonConvergence {
        best: best.0.as_f64(),
        residual: best.1.im.abs().as_f64(),
        iterations: config.max_iter,
    })
}

/// Outcome of a full scan-and-refine run.
#[derive(Debug, Clone, Default)]
pub struct SpectrumReport<S: Scalar = f64> {
    /// Accepted roots, ascending in energy.
    pub roots: Vec<EnergyRoot<S>>,
    /// Brackets whose refinement failed, with the reason.
    pub failures: Vec<(Bracket<S>, SmxError)>,
    /// Refined roots dropped because `Re F < 0` there.
    pub rejected: Vec<EnergyRoot<S>>,
}

/// Scans the window and refines every bracket (in parallel). Failures are
/// collected rather than aborting the batch.
pub fn solve_spectrum<S: Scalar>(model: &PotentialModel<S>, config: &ScanConfig<S>) -> Result<SpectrumReport<S>> {
    let brackets = scan(model, config)?;
    let outcomes: Vec<(Bracket<S>, Result<EnergyRoot<S>>)> = brackets
        .par_iter()
        .map(|b| (*b, refine(model, config, b)))
        .collect();

    let mut report = SpectrumReport {
        roots: Vec::new(),
        failures: Vec::new(),
        rejected: Vec::new(),
    };
    for (bracket, outcome) in outcomes {
        match outcome {
            Ok(root) if config.symmetric || root.re_f > S::zero() => report.roots.push(root),
            Ok(root) => report.rejected.push(root),
            Err(err) => report.failures.push((bracket, err)),
        }
    }
    report
        .roots
        .sort_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energies"));
    let dedup_tol = S::lit(1e-12);
    report
        .roots
        .dedup_by(|b, a| (b.energy - a.energy).abs() <= dedup_tol * a.energy.abs().max(b.energy.abs()));
    Ok(report)
}
