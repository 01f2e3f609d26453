//! Local series solutions on one slice and the slice scattering matrix.
//!
//! On a slice centred at `x̃` with half-width `h`, the Schrödinger equation
//! `psi'' + v(x) psi = 0` is written in `t = (x - x̃)/h`, giving
//! `d²psi/dt² + u(t) psi = 0` with `u_mu = h^(mu+2) v_mu`. The two local
//! solutions are `psi_± = exp(± i q t) sum phi_n t^n`, `q² = u_0`, with the
//! polynomial coefficients generated by a three-term-style recursion. Working
//! in `t` keeps every coefficient O(1) even for slices of width `1e-12`.

use num_complex::Complex;

use crate::error::{Result, SmxError};
use crate::potential::TaylorSeries;
use crate::scalar::Scalar;
use crate::smatrix::SegmentS;

/// Below this `|q h|` the exponential pair becomes nearly collinear and the
/// slice switches to the exponent-free basis (see [`BasisKind`]).
pub const NEAR_TURNING_POINT: f64 = 0.05;

/// Number of dropped coefficients used to fit the start slope.
const TAIL_PROBE: usize = 4;
const MIN_INDEPENDENCE: f64 = 0.2;

/// Which square root of `v_0` the exponential factors use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Principal,
    Flipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// `exp(± i q t) P_±(t)` with `P_±(0) = 1` and `P'_±(0)` fitted to the tail.
    Exponential,
    /// `q = 0`; `P_+(0) = 1, P'_+(0) = 0` and `P_-(0) = 0, P'_-(0) = 1`.
    /// Used when the slice centre sits on a classical turning point.
    Polynomial,
}

/// The two local solutions on one slice, stored in the stretched variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolutionPair<S: Scalar = f64> {
    pub center: S,
    pub half_width: S,
    /// Physical wavenumber `sqrt(v_0)` (zero for the polynomial basis).
    pub q: Complex<S>,
    /// `q * half_width`.
    pub q_scaled: Complex<S>,
    /// `phi_n^(+) h^n`, n = 0..=order.
    pub phi_plus: Vec<Complex<S>>,
    /// `phi_n^(-) h^n`, n = 0..=order.
    pub phi_minus: Vec<Complex<S>>,
    pub order: usize,
    pub basis: BasisKind,
}

/// Value and `t`-derivative of a local solution at some `t`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeValue<S: Scalar> {
    pub value: Complex<S>,
    pub dt: Complex<S>,
}

pub type SliceSMatrix<S = f64> = SegmentS<S>;

/// Builds the local solution pair from the slice expansion of `v`.
pub fn local_solutions<S: Scalar>(series: &TaylorSeries<S>, lambda_order: usize) -> Result<SeriesSolutionPair<S>> {
    local_solutions_with(series, lambda_order, Branch::Principal)
}

pub fn local_solutions_with<S: Scalar>(
    series: &TaylorSeries<S>,
    lambda_order: usize,
    branch: Branch,
) -> Result<SeriesSolutionPair<S>> {
    if lambda_order < 3 {
        return Err(SmxError::Parameter(format!("series order must be >= 3, got {lambda_order}")));
    }
    if lambda_order < series.order() + 2 {
        return Err(SmxError::Parameter(format!(
            "series order {lambda_order} must be at least the Taylor order {} + 2",
            series.order()
        )));
    }
    let h = series.scale;
    let h2 = h * h;
    // u_mu = h^2 * (v_mu h^mu)
    let u: Vec<S> = series.coeffs.iter().map(|&c| c * h2).collect();
    let root = Complex::new(u[0], S::zero()).sqrt();
    let root = match branch {
        Branch::Principal => root,
        Branch::Flipped => -root,
    };

    let zero = Complex::new(S::zero(), S::zero());
    let one = Complex::new(S::one(), S::zero());
    let (basis, q_t, phi_plus, phi_minus) = if root.norm() < S::lit(NEAR_TURNING_POINT) {
        (
            BasisKind::Polynomial,
            zero,
            recurse(&u, u[0], zero, [one, zero], lambda_order),
            recurse(&u, u[0], zero, [zero, one], lambda_order),
        )
    } else {
        let mut plus_slope = tail_minimizing_slope(&u, root, lambda_order);
        let mut minus_slope = tail_minimizing_slope(&u, -root, lambda_order);
        // A slope comparable to q would pull both solutions towards the one
        // with psi(0) = 0 and ruin their independence.
        let iq = Complex::new(S::zero(), S::one()) * root;
        let wronskian = (iq * S::lit(2.0) + plus_slope - minus_slope).norm();
        let size = (iq + plus_slope).norm() + (minus_slope - iq).norm();
        if !(wronskian > S::lit(MIN_INDEPENDENCE) * size) {
            plus_slope = zero;
            minus_slope = zero;
        }
        (
            BasisKind::Exponential,
            root,
            recurse(&u, S::zero(), root, [one, plus_slope], lambda_order),
            recurse(&u, S::zero(), -root, [one, minus_slope], lambda_order),
        )
    };

    Ok(SeriesSolutionPair {
        center: series.center,
        half_width: h,
        q: q_t / h,
        q_scaled: q_t,
        phi_plus,
        phi_minus,
        order: lambda_order,
        basis,
    })
}

/// `phi_n = -(2 i q / n) phi_{n-1} - [w0 phi_{n-2} + sum_{mu>=1} u_mu phi_{n-2-mu}] / (n(n-1))`.
///
/// With `w0 = 0` and start values `(1, 0)` this gives `phi_2 = 0` and reduces to
/// the usual form where only `u_{n-2}` and `phi_3..phi_{n-3}` contribute.
fn recurse<S: Scalar>(u: &[S], w0: S, q: Complex<S>, start: [Complex<S>; 2], order: usize) -> Vec<Complex<S>> {
    let two_i_q = Complex::new(S::zero(), S::lit(2.0)) * q;
    #[cfg(feature = "mutation-recursion-sign")]
    let two_i_q = -two_i_q;
    let mut phi = Vec::with_capacity(order + 1);
    phi.push(start[0]);
    phi.push(start[1]);
    for n in 2..=order {
        let nf = S::from_usize_lossy(n);
        let mut acc = phi[n - 2] * w0;
        let top = (n - 2).min(u.len() - 1);
        for mu in 1..=top {
            acc = acc + phi[n - 2 - mu] * u[mu];
        }
        let value = -(two_i_q * phi[n - 1]) / nf - acc / (nf * (nf - S::one()));
        phi.push(value);
    }
    phi
}

/// Start slope `P'(0)` for `exp(i q t) P(t)`, chosen so the first coefficients
/// beyond the truncation order are as small as possible. `P` is linear in the
/// slope, so this is a one-parameter least-squares fit over the dropped tail.
/// It removes the counter-propagating admixture that would otherwise force
/// the polynomial factor to carry `exp(-2 i q t)`.
fn tail_minimizing_slope<S: Scalar>(u: &[S], q: Complex<S>, order: usize) -> Complex<S> {
    let zero = Complex::new(S::zero(), S::zero());
    let one = Complex::new(S::one(), S::zero());
    let probe = order + TAIL_PROBE;
    let flat = recurse(u, S::zero(), q, [one, zero], probe);
    let ramp = recurse(u, S::zero(), q, [zero, one], probe);
    let (mut num, mut den) = (zero, S::zero());
    for n in order + 1..=probe {
        num = num + ramp[n].conj() * flat[n];
        den = den + ramp[n].norm_sqr();
    }
    if den > S::zero() {
        -num / den
    } else {
        zero
    }
}

fn horner<S: Scalar>(coeffs: &[Complex<S>], t: S) -> (Complex<S>, Complex<S>) {
    let zero = Complex::new(S::zero(), S::zero());
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs.iter().rev() {
        dp = dp * t + p;
        p = p * t + c;
    }
    (p, dp)
}

impl<S: Scalar> SeriesSolutionPair<S> {
    /// `psi_±(t)` and `d psi_±/dt` with the exponential factor kept separate.
    pub fn eval(&self, plus: bool, t: S) -> EdgeValue<S> {
        let (coeffs, q) = if plus {
            (&self.phi_plus, self.q_scaled)
        } else {
            (&self.phi_minus, -self.q_scaled)
        };
        let (p, dp) = horner(coeffs, t);
        let iq = Complex::new(S::zero(), S::one()) * q;
        let phase = (iq * t).exp();
        EdgeValue {
            value: phase * p,
            dt: phase * (iq * p + dp),
        }
    }

    /// Unscaled coefficient `phi_n` of the physical-variable series.
    pub fn phi_unscaled(&self, plus: bool, n: usize) -> Complex<S> {
        let c = if plus { self.phi_plus[n] } else { self.phi_minus[n] };
        c / self.half_width.powi(n as i32)
    }

    /// Coefficients (in `t`) of `d²psi/dt² + u(t) psi` for one solution,
    /// with the exponential factor divided out, up to degree `order - 2`.
    pub fn residual(&self, plus: bool, series: &TaylorSeries<S>) -> Vec<Complex<S>> {
        let (phi, q) = if plus {
            (&self.phi_plus, self.q_scaled)
        } else {
            (&self.phi_minus, -self.q_scaled)
        };
        let h2 = self.half_width * self.half_width;
        let iq = Complex::new(S::zero(), S::one()) * q;
        let lam = self.order;
        // P'' + 2 i q P' + (u - q^2) P
        (0..=lam - 2)
            .map(|d| {
                let df = S::from_usize_lossy(d);
                let mut r = phi[d + 2] * ((df + S::lit(2.0)) * (df + S::one()))
                    + iq * phi[d + 1] * (S::lit(2.0) * (df + S::one()));
                for (mu, &c) in series.coeffs.iter().enumerate().take(d + 1) {
                    let mut w = Complex::new(c * h2, S::zero());
                    if mu == 0 {
                        w = w + iq * iq;
                    }
                    r = r + w * phi[d - mu];
                }
                r
            })
            .collect()
    }
}

/// Slice scattering matrix for exterior plane waves of wavenumber `k`.
///
/// Amplitudes follow the edge-referenced convention: incoming waves
/// `C+ e^{ik(x-xL)}` on the left and `D+ e^{-ik(x-xR)}` on the right map to
/// outgoing `(C-, D-) = S (C+, D+)`.
pub fn slice_smatrix<S: Scalar>(solutions: &SeriesSolutionPair<S>, k: S) -> Result<SliceSMatrix<S>> {
    let h = solutions.half_width;
    let center = solutions.center;
    if !(k > S::zero()) || !(h > S::zero()) {
        return Err(SmxError::DegenerateSlice { center: center.as_f64() });
    }
    let ik_t = Complex::new(S::zero(), k * h);
    let half = S::lit(0.5);

    let mut m_in = [[Complex::new(S::zero(), S::zero()); 2]; 2];
    let mut m_out = m_in;
    for (col, plus) in [(0usize, true), (1usize, false)] {
        let left = solutions.eval(plus, -S::one());
        let right = solutions.eval(plus, S::one());
        let dl = left.dt / ik_t;
        let dr = right.dt / ik_t;
        m_in[0][col] = (left.value + dl) * half;
        m_out[0][col] = (left.value - dl) * half;
        m_in[1][col] = (right.value - dr) * half;
        m_out[1][col] = (right.value + dr) * half;
    }

    let det = m_in[0][0] * m_in[1][1] - m_in[0][1] * m_in[1][0];
    let scale = (m_in[0][0] * m_in[1][1]).norm() + (m_in[0][1] * m_in[1][0]).norm();
    if !det.norm().is_finite() || det.norm() <= S::epsilon() * scale || det.norm() == S::zero() {
        return Err(SmxError::DegenerateSlice { center: center.as_f64() });
    }
    let inv = [
        [m_in[1][1] / det, -m_in[0][1] / det],
        [-m_in[1][0] / det, m_in[0][0] / det],
    ];
    let s = |r: usize, c: usize| m_out[r][0] * inv[0][c] + m_out[r][1] * inv[1][c];
    Ok(SegmentS {
        s11: s(0, 0),
        s12: s(0, 1),
        s21: s(1, 0),
        s22: s(1, 1),
        xa: center - h,
        xb: center + h,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(coeffs: Vec<f64>, scale: f64) -> TaylorSeries {
        TaylorSeries {
            center: 0.0,
            scale,
            coeffs,
        }
    }

    fn c_close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn initial_data_and_constant_potential() {
        let s = series(vec![4.0, 0.0, 0.0, 0.0], 1.0);
        let pair = local_solutions(&s, 12).unwrap();
        assert_eq!(pair.basis, BasisKind::Exponential);
        for phi in [&pair.phi_plus, &pair.phi_minus] {
            assert_eq!(phi[0], Complex::new(1.0, 0.0));
            assert!(phi[1..].iter().all(|c| *c == Complex::new(0.0, 0.0)));
        }
    }

    #[test]
    fn linear_term_first_step() {
        let v1 = 0.37;
        let s = series(vec![2.0, v1, 0.0], 1.0);
        let pair = local_solutions(&s, 6).unwrap();
        for (plus, q) in [(true, pair.q), (false, -pair.q)] {
            let two_iq = Complex::new(0.0, 2.0) * q;
            let (p1, p2, p3) = (pair.phi_unscaled(plus, 1), pair.phi_unscaled(plus, 2), pair.phi_unscaled(plus, 3));
            assert!(c_close(p2, -two_iq * p1 / 2.0, 1e-16));
            assert!(c_close(p3, -two_iq * p2 / 3.0 - v1 / 6.0, 1e-16));
        }
    }

    #[test]
    fn harmonic_residual_vanishes() {
        let s = series(vec![1.0, 0.0, -1.0], 1.0);
        let pair = local_solutions(&s, 10).unwrap();
        for plus in [true, false] {
            let res = pair.residual(plus, &s);
            assert_eq!(res.len(), 9);
            let largest = pair.phi_plus.iter().map(|c| c.norm()).fold(1.0, f64::max);
            assert!(res.iter().all(|r| r.norm() <= 1e-13 * largest), "{res:?}");
        }
    }

    #[test]
    fn free_slice_is_pure_propagation() {
        let k: f64 = 1.7;
        let h = 0.1;
        let s = series(vec![k * k, 0.0, 0.0], h);
        let m = slice_smatrix(&local_solutions(&s, 10).unwrap(), k).unwrap();
        let phase = Complex::new(0.0, 2.0 * k * h).exp();
        assert!(m.s11.norm() < 1e-15 && m.s22.norm() < 1e-15);
        assert!(c_close(m.s12, phase, 1e-15) && c_close(m.s21, phase, 1e-15));
    }

    /// Closed-form square barrier of height `kappa^2/2` above `E`, width `2h`.
    fn square_barrier(k: f64, kappa: f64, h: f64) -> (Complex<f64>, Complex<f64>) {
        let a = 2.0 * h;
        let (sh, ch) = ((kappa * a).sinh(), (kappa * a).cosh());
        let denom = Complex::new(2.0 * k * kappa * ch, (kappa * kappa - k * k) * sh);
        let t = Complex::new(2.0 * k * kappa, 0.0) / denom;
        let r = Complex::new(0.0, -(k * k + kappa * kappa) * sh) / denom;
        (r, t)
    }

    #[test]
    fn square_barrier_matches_closed_form() {
        let (k, kappa, h) = (1.3, 2.1, 0.4);
        let s = series(vec![-kappa * kappa, 0.0, 0.0], h);
        let m = slice_smatrix(&local_solutions(&s, 10).unwrap(), k).unwrap();
        let (r, t) = square_barrier(k, kappa, h);
        assert!(c_close(m.s11, r, 1e-12), "{} vs {}", m.s11, r);
        assert!(c_close(m.s22, r, 1e-12));
        assert!(c_close(m.s12, t, 1e-12));
        assert!(c_close(m.s21, t, 1e-12));
    }

    #[test]
    fn turning_point_slice_uses_polynomial_basis() {
        let s = series(vec![1e-6, 3.0, -0.5], 0.05);
        let pair = local_solutions(&s, 30).unwrap();
        assert_eq!(pair.basis, BasisKind::Polynomial);
        let res = pair.residual(true, &s);
        assert!(res.iter().all(|r| r.norm() < 1e-15));
        let m = slice_smatrix(&pair, 2.0).unwrap();
        assert!((m.s11.norm_sqr() + m.s21.norm_sqr() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn branch_flip_leaves_smatrix_unchanged() {
        let s = series(vec![3.0, 0.4, -0.2, 0.05], 0.3);
        let a = slice_smatrix(&local_solutions_with(&s, 12, Branch::Principal).unwrap(), 1.1).unwrap();
        let b = slice_smatrix(&local_solutions_with(&s, 12, Branch::Flipped).unwrap(), 1.1).unwrap();
        for (x, y) in [(a.s11, b.s11), (a.s12, b.s12), (a.s21, b.s21), (a.s22, b.s22)] {
            assert!(c_close(x, y, 1e-13));
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let s = series(vec![1.0, 0.0, 0.0], 0.1);
        let pair = local_solutions(&s, 6).unwrap();
        assert!(matches!(slice_smatrix(&pair, 0.0), Err(SmxError::DegenerateSlice { .. })));
        assert!(local_solutions(&s, 2).is_err());
        assert!(local_solutions(&series(vec![1.0; 8], 0.1), 6).is_err());
    }
}
