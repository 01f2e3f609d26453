//! Piecewise bound-state wavefunctions.
//!
//! Given a refined root, each half line is swept again with its cumulative
//! S-matrices recorded. On every slice the exterior amplitudes at the inner
//! edge follow from the half-line phase and the cumulative matrix up to that
//! edge; matching value and slope there fixes the two local-solution weights.
//! The exponential factors are then expanded so each piece is a plain
//! polynomial in `t = (x - x̃)/h`, which makes norms and moments exact
//! monomial integrals.

use num_complex::Complex;

use crate::error::{Result, SmxError};
use crate::potential::PotentialModel;
use crate::smatrix::{sweep_halfline, CumulativeTrace, Direction, PhaseFactor};
use crate::spectrum::{EnergyRoot, Parity, ScanConfig};

type C64 = Complex<f64>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// One slice of a reconstructed wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceRecord {
    pub center: f64,
    pub half_width: f64,
    pub alpha_plus: C64,
    pub alpha_minus: C64,
    /// Coefficients of `psi(center + half_width * t) = sum c_n t^n`.
    pub merged_poly: Vec<C64>,
}

impl PieceRecord {
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn eval_t(&self, t: f64) -> C64 {
        self.merged_poly.iter().rev().fold(ZERO, |acc, &c| acc * t + c)
    }

    /// `(psi, dpsi/dx, d²psi/dx²)` at `t`.
    pub fn eval_derivs_t(&self, t: f64) -> (C64, C64, C64) {
        let (mut p, mut d1, mut d2) = (ZERO, ZERO, ZERO);
        for &c in self.merged_poly.iter().rev() {
            d2 = d2 * t + d1 * 2.0;
            d1 = d1 * t + p;
            p = p * t + c;
        }
        let h = self.half_width;
        (p, d1 / h, d2 / (h * h))
    }

    fn scaled(&self, factor: C64) -> Self {
        Self {
            alpha_plus: self.alpha_plus * factor,
            alpha_minus: self.alpha_minus * factor,
            merged_poly: self.merged_poly.iter().map(|&c| c * factor).collect(),
            ..self.clone()
        }
    }

    /// The same piece seen through `x -> 2 x0 - x`.
    fn mirrored(&self, x0: f64) -> Self {
        Self {
            center: 2.0 * x0 - self.center,
            merged_poly: self
                .merged_poly
                .iter()
                .enumerate()
                .map(|(n, &c)| if n % 2 == 1 { -c } else { c })
                .collect(),
            ..self.clone()
        }
    }

    /// Real coefficients of `|psi(t)|^2`, degree `2 * deg`.
    fn density_poly(&self) -> Vec<f64> {
        let n = self.merged_poly.len();
        let mut out = vec![0.0; 2 * n - 1];
        for (j, a) in self.merged_poly.iter().enumerate() {
            for (l, b) in self.merged_poly.iter().enumerate() {
                out[j + l] += (a * b.conj()).re;
            }
        }
        out
    }

    /// `∫ (x)^p |psi|^2 dx` over the piece.
    fn moment(&self, power: u32) -> f64 {
        let rho = self.density_poly();
        let h = self.half_width;
        let c = self.center;
        // (c + h t)^p = sum_i C(p,i) c^(p-i) h^i t^i
        let mut binom = 1.0;
        let mut total = 0.0;
        for i in 0..=power as usize {
            if i > 0 {
                binom *= (power as usize + 1 - i) as f64 / i as f64;
            }
            let weight = binom * c.powi(power as i32 - i as i32) * h.powi(i as i32);
            if weight == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for (n, r) in rho.iter().enumerate() {
                if (n + i) % 2 == 0 {
                    inner += r * 2.0 / (n + i + 1) as f64;
                }
            }
            total += weight * inner;
        }
        total * h
    }
}

/// Tuning knobs for [`reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Pieces are built only while `|S^{x0,R} - S11^{x0,x}| > eps_tilde`.
    pub eps_tilde: f64,
    /// Relative slope mismatch at `x0` above which the stitch is flagged.
    pub junction_warn: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            eps_tilde: 1e-12,
            junction_warn: 1e-8,
        }
    }
}

/// Bound-state wavefunction as ordered polynomial pieces.
#[derive(Debug, Clone)]
pub struct PiecewiseWavefunction {
    /// Pieces ordered by position.
    pub pieces: Vec<PieceRecord>,
    pub norm: f64,
    pub energy: f64,
    pub x0: f64,
    /// Exterior wavenumber of the associated potentials.
    pub k: f64,
    pub phase_right: C64,
    pub parity: Parity,
    /// Left and right ends of the reconstructed span; the tail beyond is zero.
    pub validity_cutoff: (f64, f64),
    /// Relative slope mismatch between the two halves at `x0`.
    pub junction_mismatch: f64,
}

/// Rebuilds the half line recorded in `trace`, in sweep coordinates.
/// Returns the pieces and the sweep coordinate where validity ran out.
///
/// The exterior amplitudes at each inner edge use the phase `S_x` of the
/// half line beyond that edge, obtained by closing the recorded slices from
/// the far end inward. Then `S_R - S11 = S12 S21 S_x / (1 - S22 S_x)`
/// exactly, and `D+ = S21 S_x / (1 - S22 S_x)` follows without subtracting
/// two nearly equal phases, which keeps the pieces accurate right up to the
/// validity cutoff. `phase` is the sweep result and fixes `S_x` at `x0`.
pub fn reconstruct_half(
    trace: &CumulativeTrace<f64>,
    phase: &PhaseFactor<f64>,
    eps_tilde: f64,
) -> Result<(Vec<PieceRecord>, f64)> {
    let k = trace.k;
    let one = C64::new(1.0, 0.0);
    let mut beyond = vec![ZERO; trace.steps.len()];
    let mut outer = trace.end_phase;
    for (slot, step) in beyond.iter_mut().zip(&trace.steps).rev() {
        let s = &step.slice;
        outer = s.s11 + s.s12 * s.s21 * outer / (one - s.s22 * outer);
        *slot = outer;
    }
    if let Some(first) = beyond.first_mut() {
        *first = phase.value;
    }

    let mut pieces = Vec::with_capacity(trace.steps.len());
    let mut cutoff = trace.cumulative.xb;
    for (step, &s_x) in trace.steps.iter().zip(&beyond) {
        let cum = &step.cumulative_before;
        let d_plus = cum.s21 * s_x / (one - cum.s22 * s_x);
        let gap = (cum.s12 * d_plus).norm();
        if !(gap > eps_tilde) {
            cutoff = cum.xb;
            break;
        }
        let d_minus = cum.s21 + cum.s22 * d_plus;
        let sol = &step.solutions;
        let h = sol.half_width;
        let value = d_minus + d_plus;
        let slope_t = C64::new(0.0, k * h) * (d_minus - d_plus);

        let p = sol.eval(true, -1.0);
        let m = sol.eval(false, -1.0);
        let det = p.value * m.dt - m.value * p.dt;
        let scale = (p.value * m.dt).norm() + (m.value * p.dt).norm();
        if !(det.norm() > f64::EPSILON * scale) {
            return Err(SmxError::Reconstruction(format!(
                "singular matching system on the slice at {}",
                sol.center
            )));
        }
        let alpha_plus = (value * m.dt - m.value * slope_t) / det;
        let alpha_minus = (p.value * slope_t - value * p.dt) / det;

        let lam = sol.order;
        let plus = merged(&sol.phi_plus, sol.q_scaled, lam);
        let minus = merged(&sol.phi_minus, -sol.q_scaled, lam);
        let merged_poly = plus
            .iter()
            .zip(&minus)
            .map(|(a, b)| alpha_plus * a + alpha_minus * b)
            .collect();
        pieces.push(PieceRecord {
            center: sol.center,
            half_width: h,
            alpha_plus,
            alpha_minus,
            merged_poly,
        });
    }
    Ok((pieces, cutoff))
}

/// `exp(i q t) * sum_{n<=lam} phi_n t^n` as a single polynomial. The product
/// is carried past degree `lam` until the exponential tail drops below
/// rounding on `|t| <= 1`, so the piece reproduces the local solution.
fn merged(phi: &[C64], q: C64, lam: usize) -> Vec<C64> {
    let iq = C64::new(0.0, 1.0) * q;
    let mut exp_series = vec![C64::new(1.0, 0.0)];
    let mut bound = 1.0_f64;
    let mut n = 0;
    while n < 200 && (n <= 2 || bound > 1e-18) {
        n += 1;
        let next = exp_series[n - 1] * iq / n as f64;
        bound = next.norm();
        exp_series.push(next);
    }
    let extra = exp_series.len() - 1;
    (0..=lam + extra)
        .map(|d| {
            let lo = d.saturating_sub(extra);
            (lo..=d.min(lam)).fold(ZERO, |acc, j| acc + phi[j] * exp_series[d - j])
        })
        .collect()
}

/// Reconstructs and normalises the wavefunction of `root`.
pub fn reconstruct(
    model: &PotentialModel<f64>,
    config: &ScanConfig<f64>,
    root: &EnergyRoot<f64>,
    options: &ReconstructOptions,
) -> Result<PiecewiseWavefunction> {
    let energy = root.energy;
    let x0 = config.x0;
    let right = sweep_halfline(model, energy, x0, Direction::Right, &config.solver, true)?;
    let trace_r = right.trace.as_ref().expect("trace requested");
    let (right_pieces, cut_r) = reconstruct_half(trace_r, &right.phase, options.eps_tilde)?;
    if right_pieces.is_empty() {
        return Err(SmxError::Reconstruction("no valid slice on the right half line".into()));
    }
    let k = trace_r.k;

    let (left_pieces, cut_l, mismatch) = if config.symmetric {
        let sign = if right.phase.value.re > 0.0 { 1.0 } else { -1.0 };
        let left: Vec<PieceRecord> = right_pieces
            .iter()
            .rev()
            .map(|p| p.mirrored(0.0).scaled(C64::new(sign, 0.0)))
            .collect();
        (left, -cut_r, 0.0)
    } else {
        let left = sweep_halfline(model, energy, x0, Direction::Left, &config.solver, true)?;
        let trace_l = left.trace.as_ref().expect("trace requested");
        let (pieces, cut) = reconstruct_half(trace_l, &left.phase, options.eps_tilde)?;
        if pieces.is_empty() {
            return Err(SmxError::Reconstruction("no valid slice on the left half line".into()));
        }
        let physical: Vec<PieceRecord> = pieces.iter().rev().map(|p| p.mirrored(x0)).collect();
        // match (psi, psi'/k) at x0 in the least-squares sense
        let (vr, dr, _) = right_pieces[0].eval_derivs_t(-1.0);
        let (vl, dl, _) = physical.last().expect("non-empty").eval_derivs_t(1.0);
        let denom = vl.norm_sqr() + dl.norm_sqr() / (k * k);
        let factor = (vr * vl.conj() + dr * dl.conj() / (k * k)) / denom;
        let value_gap = (vr - factor * vl).norm();
        let slope_gap = (dr - factor * dl).norm() / k;
        let mismatch = (value_gap + slope_gap) / (vr.norm() + dr.norm() / k);
        let physical = physical.iter().map(|p| p.scaled(factor)).collect();
        (physical, 2.0 * x0 - cut, mismatch)
    };

    let parity = root.parity;
    let mut pieces = left_pieces;
    pieces.extend(right_pieces);
    let wf = PiecewiseWavefunction {
        pieces,
        norm: 0.0,
        energy,
        x0,
        k,
        phase_right: right.phase.value,
        parity,
        validity_cutoff: (cut_l, cut_r),
        junction_mismatch: mismatch,
    };
    wf.normalize()
}

impl PiecewiseWavefunction {
    /// `∫ |psi|^2` summed over the pieces.
    pub fn raw_norm(&self) -> f64 {
        self.pieces.iter().map(|p| p.moment(0)).sum()
    }

    /// Scales to unit norm and rotates to a real function that is positive
    /// where `|psi|` is largest.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.raw_norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(SmxError::Reconstruction(format!("cannot normalise a state of norm {norm}")));
        }
        let mut peak = ZERO;
        for piece in &self.pieces {
            for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let v = piece.eval_t(t);
                if v.norm() > peak.norm() {
                    peak = v;
                }
            }
        }
        let rotation = peak.conj() / peak.norm();
        let factor = rotation / norm.sqrt();
        let mut out = self.clone();
        out.pieces = self.pieces.iter().map(|p| p.scaled(factor)).collect();
        out.norm = out.raw_norm();
        Ok(out)
    }

    /// `<x^p>` for a normalised state.
    pub fn expectation(&self, power: u32) -> Result<f64> {
        let total: f64 = self.pieces.iter().map(|p| p.moment(power)).sum();
        if !total.is_finite() {
            return Err(SmxError::Range(format!("<x^{power}> overflows")));
        }
        Ok(total / self.raw_norm())
    }

    /// `sqrt(<x^2> - <x>^2)`.
    pub fn std_dev(&self) -> Result<f64> {
        let mean = self.expectation(1)?;
        let sq = self.expectation(2)?;
        Ok((sq - mean * mean).max(0.0).sqrt())
    }

    fn locate(&self, x: f64) -> Option<&PieceRecord> {
        let idx = self.pieces.partition_point(|p| p.hi() < x);
        self.pieces.get(idx).filter(|p| x >= p.lo() && x <= p.hi())
    }

    pub fn sample_complex(&self, x: f64) -> C64 {
        self.locate(x)
            .map(|p| p.eval_t((x - p.center) / p.half_width))
            .unwrap_or(ZERO)
    }

    /// Real part of `psi(x)`; zero outside the reconstructed span.
    pub fn sample_one(&self, x: f64) -> f64 {
        self.sample_complex(x).re
    }

    pub fn sample(&self, positions: &[f64]) -> Vec<f64> {
        positions.iter().map(|&x| self.sample_one(x)).collect()
    }

    pub fn derivative(&self, x: f64) -> C64 {
        self.locate(x)
            .map(|p| p.eval_derivs_t((x - p.center) / p.half_width).1)
            .unwrap_or(ZERO)
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.pieces.first().map_or(0.0, PieceRecord::lo),
            self.pieces.last().map_or(0.0, PieceRecord::hi),
        )
    }

    fn edge_extremes(&self) -> (f64, f64) {
        self.pieces.iter().fold((0.0_f64, 0.0_f64), |(v, d), p| {
            let (a, da, _) = p.eval_derivs_t(-1.0);
            let (b, db, _) = p.eval_derivs_t(1.0);
            let (c, dc, _) = p.eval_derivs_t(0.0);
            (
                v.max(a.norm()).max(b.norm()).max(c.norm()),
                d.max(da.norm()).max(db.norm()).max(dc.norm()),
            )
        })
    }

    /// Largest value and slope jumps across adjacent piece edges, relative to
    /// the largest sampled `|psi|` and `|psi'|`.
    pub fn continuity_defect(&self) -> (f64, f64) {
        let (vmax, dmax) = self.edge_extremes();
        self.pieces.windows(2).fold((0.0_f64, 0.0_f64), |(v, d), w| {
            let (a, da, _) = w[0].eval_derivs_t(1.0);
            let (b, db, _) = w[1].eval_derivs_t(-1.0);
            (v.max((a - b).norm() / vmax), d.max((da - db).norm() / dmax))
        })
    }

    /// Sign changes of `Re psi`, ignoring samples below `1e-7` of the peak.
    pub fn node_count(&self) -> usize {
        const SAMPLES: usize = 16;
        let (vmax, _) = self.edge_extremes();
        let floor = 1e-7 * vmax;
        let mut last_sign = 0.0_f64;
        let mut nodes = 0;
        for piece in &self.pieces {
            for j in 0..SAMPLES {
                let t = -1.0 + 2.0 * j as f64 / SAMPLES as f64;
                let v = piece.eval_t(t).re;
                if v.abs() <= floor {
                    continue;
                }
                let s = v.signum();
                if last_sign != 0.0 && s != last_sign {
                    nodes += 1;
                }
                last_sign = s;
            }
        }
        nodes
    }

    /// Largest relative residual of `psi'' + 2 (E - V) psi` at five fixed
    /// interior points per piece, scaled by `|v| max|psi| + |psi''|`.
    pub fn ode_residual(&self, model: &PotentialModel<f64>) -> Result<f64> {
        const POINTS: [f64; 5] = [-0.83, -0.41, 0.07, 0.52, 0.91];
        let (vmax, _) = self.edge_extremes();
        let mut worst = 0.0_f64;
        for piece in &self.pieces {
            for t in POINTS {
                let x = piece.center + piece.half_width * t;
                let v = 2.0 * (self.energy - model.potential_value(x)?);
                let (psi, _, d2) = piece.eval_derivs_t(t);
                let residual = (d2 + psi * v).norm();
                let scale = v.abs() * vmax + d2.norm();
                worst = worst.max(residual / scale);
            }
        }
        Ok(worst)
    }

    /// `B-/B+` recovered from `psi(x0)` and `psi'(x0)`; equals the right
    /// phase factor at an eigenvalue.
    pub fn phase_from_origin(&self) -> C64 {
        let right = self
            .pieces
            .iter()
            .find(|p| p.lo() >= self.x0 - 1e-12 * self.x0.abs().max(1.0))
            .expect("right half present");
        let (psi, dpsi, _) = right.eval_derivs_t(-1.0);
        let ik = C64::new(0.0, self.k);
        (ik * psi - dpsi) / (ik * psi + dpsi)
    }

    /// Rough size of the norm dropped beyond the cutoffs:
    /// `|psi|^2 / (2 kappa)` at each end, relative to the total.
    pub fn truncated_norm_estimate(&self, model: &PotentialModel<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (piece, t) in [(self.pieces.first(), -1.0), (self.pieces.last(), 1.0)] {
            let Some(piece) = piece else { continue };
            let x = piece.center + piece.half_width * t;
            let kappa2 = 2.0 * (model.potential_value(x)? - self.energy);
            let amp = piece.eval_t(t).norm_sqr();
            if kappa2 > 0.0 {
                total += amp / (2.0 * kappa2.sqrt());
            } else {
                total += amp * piece.half_width;
            }
        }
        Ok(total / self.raw_norm())
    }
}
