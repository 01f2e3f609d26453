//! Potential models and their local Taylor expansions.
//!
//! Every model answers one question: the Taylor coefficients of the scaled
//! kinetic term `v(x) = 2[E - V(x)]` (with `hbar = m = 1`) about a centre
//! `x̃`, optionally in the stretched variable `t = (x - x̃)/h`. Built-in models
//! use closed-form derivatives of power laws; custom models are pushed through
//! [`Jet`] arithmetic.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmxError};
use crate::scalar::Scalar;
use crate::taylor::Jet;

/// How the potential is closed beyond a finite end of its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary<S: Scalar = f64> {
    /// Infinite wall: the wavefunction vanishes at the edge.
    Barrier,
    /// Constant level `V1` extending to infinity; needs `E < V1`.
    Step { level: S },
    /// The domain is unbounded on this side and the sweep stops on the
    /// evanescent truncation criterion.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinKind {
    Harmonic,
    HydrogenEffective,
    LennardJones,
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BuiltinKind::Harmonic => "harmonic",
            BuiltinKind::HydrogenEffective => "hydrogen_effective",
            BuiltinKind::LennardJones => "lennard_jones",
        };
        f.write_str(name)
    }
}

/// Parameters of the built-in models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinParams<S: Scalar = f64> {
    /// `V = omega^2 x^2 / 2` on the whole line.
    Harmonic { omega: S },
    /// `V = l(l+1)/(2 r^2) - 1/r` in units of the Bohr radius, walled at `h1`
    /// and flattened to zero beyond `h2`.
    HydrogenEffective { l: u32, h1: S, h2: S },
    /// `V = l(l+1)/(2 r^2) + 4 eps [(sigma/r)^12 - (sigma/r)^6]`, walled at
    /// `h1` and flattened to zero beyond `h2`.
    LennardJones {
        epsilon: S,
        sigma: S,
        l: u32,
        h1: S,
        h2: S,
    },
}

impl BuiltinParams<f64> {
    pub const HYDROGEN_H1: f64 = 9.7844e-11;
    pub const HYDROGEN_H2: f64 = 20200.0;
    pub const LJ_H1: f64 = 0.22;
    pub const LJ_H2: f64 = 200.0;

    /// Well depth `1e4 hbar^2 / (2^{4/3} m sigma^2)` used for the
    /// nineteen-level reference spectrum.
    pub fn lj_reference_epsilon() -> f64 {
        1.0e4 / 2.0_f64.powf(4.0 / 3.0)
    }

    pub fn harmonic(omega: f64) -> Self {
        BuiltinParams::Harmonic { omega }
    }

    pub fn hydrogen(l: u32) -> Self {
        BuiltinParams::HydrogenEffective {
            l,
            h1: Self::HYDROGEN_H1,
            h2: Self::HYDROGEN_H2,
        }
    }

    pub fn lennard_jones(l: u32) -> Self {
        BuiltinParams::LennardJones {
            epsilon: Self::lj_reference_epsilon(),
            sigma: 1.0,
            l,
            h1: Self::LJ_H1,
            h2: Self::LJ_H2,
        }
    }
}

/// Caller-supplied potential: maps the jet of `x` to the jet of `V(x)`.
pub type SeriesProvider<S> = Arc<dyn Fn(&Jet<S>) -> Jet<S> + Send + Sync>;

/// `c * r^-p` term.
#[derive(Debug, Clone, Copy)]
struct PowerTerm<S> {
    coeff: S,
    power: i32,
}

#[derive(Clone)]
enum ModelKind<S: Scalar> {
    Harmonic { omega: S },
    PowerLaw { kind: BuiltinKind, terms: Vec<PowerTerm<S>> },
    Custom(SeriesProvider<S>),
}

impl<S: Scalar> fmt::Debug for ModelKind<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Harmonic { omega } => f.debug_struct("Harmonic").field("omega", omega).finish(),
            ModelKind::PowerLaw { kind, terms } => f
                .debug_struct("PowerLaw")
                .field("kind", kind)
                .field("terms", terms)
                .finish(),
            ModelKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Taylor coefficients `c_mu` of `sum c_mu ((x - center)/scale)^mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries<S: Scalar = f64> {
    pub center: S,
    pub scale: S,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> TaylorSeries<S> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Resums the series at `x = center + delta`.
    pub fn eval_at(&self, delta: S) -> S {
        let t = delta / self.scale;
        self.coeffs.iter().rev().fold(S::zero(), |acc, &c| acc * t + c)
    }

    /// Coefficients of the mirrored series `x -> 2 x0 - x`, recentred at
    /// `new_center`.
    pub fn reflected(&self, new_center: S) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mu, &c)| if mu % 2 == 1 { -c } else { c })
            .collect();
        Self {
            center: new_center,
            scale: self.scale,
            coeffs,
        }
    }
}

/// Immutable description of a one-dimensional potential well.
#[derive(Debug, Clone)]
pub struct PotentialModel<S: Scalar = f64> {
    pub domain_lo: S,
    pub domain_hi: S,
    pub left_closure: Boundary<S>,
    pub right_closure: Boundary<S>,
    /// Default reference level `V0` of the associated potentials.
    pub v_asymptotic: S,
    /// Natural energy unit (`hbar omega`, `|E1|`, `eps_LJ`, or 1).
    pub energy_unit: S,
    /// `V(x) = V(-x)`.
    pub symmetric: bool,
    kind: ModelKind<S>,
}

/// Builds a built-in model.
pub fn make_builtin<S: Scalar>(params: BuiltinParams<S>) -> Result<PotentialModel<S>> {
    match params {
        BuiltinParams::Harmonic { omega } => {
            if !(omega > S::zero()) || !omega.is_finite() {
                return Err(SmxError::Parameter(format!("harmonic omega must be > 0, got {omega}")));
            }
            Ok(PotentialModel {
                domain_lo: S::neg_infinity(),
                domain_hi: S::infinity(),
                left_closure: Boundary::Open,
                right_closure: Boundary::Open,
                v_asymptotic: -omega,
                energy_unit: omega,
                symmetric: true,
                kind: ModelKind::Harmonic { omega },
            })
        }
        BuiltinParams::HydrogenEffective { l, h1, h2 } => {
            check_radial_window(h1, h2)?;
            let mut terms = vec![PowerTerm {
                coeff: -S::one(),
                power: 1,
            }];
            push_centrifugal(&mut terms, l);
            radial_model(BuiltinKind::HydrogenEffective, terms, h1, h2, S::lit(0.5))
        }
        BuiltinParams::LennardJones {
            epsilon,
            sigma,
            l,
            h1,
            h2,
        } => {
            if !(epsilon > S::zero()) || !(sigma > S::zero()) {
                return Err(SmxError::Parameter(format!(
                    "Lennard-Jones needs epsilon > 0 and sigma > 0, got {epsilon}, {sigma}"
                )));
            }
            check_radial_window(h1, h2)?;
            let four_eps = S::lit(4.0) * epsilon;
            let mut terms = vec![
                PowerTerm {
                    coeff: four_eps * sigma.powi(12),
                    power: 12,
                },
                PowerTerm {
                    coeff: -four_eps * sigma.powi(6),
                    power: 6,
                },
            ];
            push_centrifugal(&mut terms, l);
            radial_model(BuiltinKind::LennardJones, terms, h1, h2, epsilon)
        }
    }
}

fn check_radial_window<S: Scalar>(h1: S, h2: S) -> Result<()> {
    if !(h1 > S::zero()) || !(h2 > h1) || !h2.is_finite() {
        return Err(SmxError::Parameter(format!(
            "radial window needs 0 < h1 < h2 < inf, got h1 = {h1}, h2 = {h2}"
        )));
    }
    Ok(())
}

fn push_centrifugal<S: Scalar>(terms: &mut Vec<PowerTerm<S>>, l: u32) {
    if l > 0 {
        let ll = S::from_u32(l * (l + 1)).expect("small integer");
        terms.push(PowerTerm {
            coeff: ll / S::lit(2.0),
            power: 2,
        });
    }
}

fn radial_model<S: Scalar>(
    kind: BuiltinKind,
    terms: Vec<PowerTerm<S>>,
    h1: S,
    h2: S,
    energy_unit: S,
) -> Result<PotentialModel<S>> {
    Ok(PotentialModel {
        domain_lo: h1,
        domain_hi: h2,
        left_closure: Boundary::Barrier,
        right_closure: Boundary::Step { level: S::zero() },
        v_asymptotic: S::zero(),
        energy_unit,
        symmetric: false,
        kind: ModelKind::PowerLaw { kind, terms },
    })
}

/// Wraps a caller-supplied potential.
///
/// `provider` receives the jet of `x` about the expansion centre and must
/// return the jet of `V(x)`. Non-finite output is reported as a singularity.
pub fn make_custom<S: Scalar>(
    provider: SeriesProvider<S>,
    domain: (S, S),
    left_closure: Boundary<S>,
    right_closure: Boundary<S>,
    v_asymptotic: S,
) -> Result<PotentialModel<S>> {
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(SmxError::Parameter(format!("domain needs lo < hi, got [{lo}, {hi}]")));
    }
    for (bound, closure, side) in [(lo, left_closure, "left"), (hi, right_closure, "right")] {
        let open = matches!(closure, Boundary::Open);
        if bound.is_finite() == open {
            return Err(SmxError::Parameter(format!(
                "{side} closure must be Open exactly when the {side} end is infinite"
            )));
        }
    }
    Ok(PotentialModel {
        domain_lo: lo,
        domain_hi: hi,
        left_closure,
        right_closure,
        v_asymptotic,
        energy_unit: S::one(),
        symmetric: false,
        kind: ModelKind::Custom(provider),
    })
}

impl<S: Scalar> PotentialModel<S> {
    pub fn builtin_kind(&self) -> Option<BuiltinKind> {
        match &self.kind {
            ModelKind::Harmonic { .. } => Some(BuiltinKind::Harmonic),
            ModelKind::PowerLaw { kind, .. } => Some(*kind),
            ModelKind::Custom(_) => None,
        }
    }

    /// Declares the model symmetric about `x = 0`.
    pub fn with_symmetry(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn contains(&self, x: S) -> bool {
        x > self.domain_lo && x < self.domain_hi
    }

    /// Taylor coefficients of `V` itself in the stretched variable.
    pub fn potential_series(&self, center: S, scale: S, order: usize) -> Result<Vec<S>> {
        if !self.contains(center) {
            return Err(SmxError::Domain {
                position: center.as_f64(),
                lo: self.domain_lo.as_f64(),
                hi: self.domain_hi.as_f64(),
            });
        }
        let coeffs = match &self.kind {
            ModelKind::Harmonic { omega } => {
                let half_w2 = *omega * *omega / S::lit(2.0);
                let mut c = vec![S::zero(); order + 1];
                c[0] = half_w2 * center * center;
                if order >= 1 {
                    c[1] = S::lit(2.0) * half_w2 * center * scale;
                }
                if order >= 2 {
                    c[2] = half_w2 * scale * scale;
                }
                c
            }
            ModelKind::PowerLaw { terms, .. } => {
                let mut c = vec![S::zero(); order + 1];
                let ratio = scale / center;
                for term in terms {
                    // d^mu/dx^mu r^-p / mu! = (-1)^mu C(p+mu-1, mu) r^(-p-mu)
                    let p = S::from_i32(term.power).expect("small integer");
                    let mut t = term.coeff * center.powi(-term.power);
                    c[0] = c[0] + t;
                    for (mu, slot) in c.iter_mut().enumerate().skip(1) {
                        let m = S::from_usize_lossy(mu);
                        t = -t * (p + m - S::one()) / m * ratio;
                        *slot = *slot + t;
                    }
                }
                c
            }
            ModelKind::Custom(provider) => {
                let x = Jet::variable(center, scale, order);
                let v = provider(&x);
                if v.order() < order {
                    return Err(SmxError::Singularity {
                        position: center.as_f64(),
                    });
                }
                let mut c = v.into_coeffs();
                c.truncate(order + 1);
                c
            }
        };
        if coeffs.iter().all(|c| c.is_finite()) {
            Ok(coeffs)
        } else {
            Err(SmxError::Singularity {
                position: center.as_f64(),
            })
        }
    }

    pub fn potential_value(&self, x: S) -> Result<S> {
        Ok(self.potential_series(x, S::one(), 0)?[0])
    }

    /// Expansion of `2[E - V(x)]` about `center` in `t = (x - center)/scale`.
    pub fn expand_scaled(&self, energy: S, center: S, scale: S, order: usize) -> Result<TaylorSeries<S>> {
        if !energy.is_finite() {
            return Err(SmxError::Parameter(format!("energy must be finite, got {energy}")));
        }
        let two = S::lit(2.0);
        let mut coeffs = self.potential_series(center, scale, order)?;
        coeffs[0] = two * (energy - coeffs[0]);
        for c in coeffs.iter_mut().skip(1) {
            *c = -two * *c;
        }
        Ok(TaylorSeries { center, scale, coeffs })
    }

    /// Location of the potential minimum when known in closed form or by a
    /// short Newton solve.
    pub fn minimum_location(&self) -> Option<S> {
        match &self.kind {
            ModelKind::Harmonic { .. } => Some(S::zero()),
            ModelKind::PowerLaw { kind, terms } => match kind {
                BuiltinKind::HydrogenEffective => {
                    // V' = -2c/r^3 + 1/r^2 = 0  ->  r = 2c = l(l+1)
                    let c = terms.iter().find(|t| t.power == 2)?.coeff;
                    let r = S::lit(2.0) * c;
                    self.contains(r).then_some(r)
                }
                _ => self.newton_minimum(terms),
            },
            ModelKind::Custom(_) => None,
        }
    }

    fn newton_minimum(&self, terms: &[PowerTerm<S>]) -> Option<S> {
        // start from the pure 12-6 minimum (2 c12 / |c6|)^(1/6)
        let c12 = terms.iter().find(|t| t.power == 12)?.coeff;
        let c6 = terms.iter().find(|t| t.power == 6)?.coeff;
        let mut r = (S::lit(2.0) * c12 / c6.abs()).powf(S::lit(1.0 / 6.0));
        for _ in 0..60 {
            let d = self.potential_series(r, S::one(), 2).ok()?;
            let step = d[1] / (S::lit(2.0) * d[2]);
            r = r - step;
            if step.abs() <= S::epsilon() * r.abs() {
                break;
            }
        }
        self.contains(r).then_some(r)
    }
}

/// Taylor coefficients of `2[E - V(x)]` about `center` (unit scale).
pub fn expand<S: Scalar>(model: &PotentialModel<S>, energy: S, center: S, order: usize) -> Result<TaylorSeries<S>> {
    model.expand_scaled(energy, center, S::one(), order)
}
