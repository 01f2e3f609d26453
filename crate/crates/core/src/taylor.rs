//! Truncated power series ("Taylor mode") arithmetic.
//!
//! A [`Jet`] holds the coefficients `c_0..c_M` of `sum c_n t^n`. Seeding a
//! variable as `x0 + h t` and pushing it through arithmetic yields the Taylor
//! coefficients of the result about `x0`, each already multiplied by `h^n`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S: Scalar = f64> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(value: S, order: usize) -> Self {
        let mut coeffs = vec![S::zero(); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The independent variable `center + scale * t`.
    pub fn variable(center: S, scale: S, order: usize) -> Self {
        let mut jet = Self::constant(center, order);
        if order >= 1 {
            jet.coeffs[1] = scale;
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn value(&self) -> S {
        self.coeffs[0]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Evaluates the truncated series at `t` (Horner).
    pub fn eval(&self, t: S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, &c| acc * t + c)
    }

    fn zip_order(&self, other: &Self) -> usize {
        self.order().min(other.order())
    }

    pub fn scale(&self, factor: S) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, value: S) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0] + value;
        out
    }

    pub fn recip(&self) -> Self {
        Self::constant(S::one(), self.order()).div_jet(self)
    }

    fn mul_jet(&self, other: &Self) -> Self {
        let order = self.zip_order(other);
        let coeffs = (0..=order)
            .map(|n| {
                (0..=n).fold(S::zero(), |acc, k| acc + self.coeffs[k] * other.coeffs[n - k])
            })
            .collect();
        Self { coeffs }
    }

    fn div_jet(&self, other: &Self) -> Self {
        let order = self.zip_order(other);
        let b0 = other.coeffs[0];
        let mut coeffs: Vec<S> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.coeffs[n];
            for k in 1..=n {
                acc = acc - other.coeffs[k] * coeffs[n - k];
            }
            coeffs.push(acc / b0);
        }
        Self { coeffs }
    }

    /// Real power `a^p` via the J.C.P. Miller recurrence; requires `a_0 != 0`.
    pub fn powf(&self, p: S) -> Self {
        self.power_series(p, self.coeffs[0].powf(p))
    }

    fn power_series(&self, p: S, b0: S) -> Self {
        let order = self.order();
        let a0 = self.coeffs[0];
        let mut coeffs: Vec<S> = Vec::with_capacity(order + 1);
        coeffs.push(b0);
        for n in 1..=order {
            let mut acc = S::zero();
            for k in 1..=n {
                let weight = p * S::from_usize_lossy(k) - S::from_usize_lossy(n - k);
                acc = acc + weight * self.coeffs[k] * coeffs[n - k];
            }
            coeffs.push(acc / (S::from_usize_lossy(n) * a0));
        }
        Self { coeffs }
    }

    /// Integer power. Uses repeated squaring when the constant term vanishes
    /// (where the recurrence is undefined); a negative power of such a jet
    /// produces non-finite coefficients.
    pub fn powi(&self, p: i32) -> Self {
        if self.coeffs[0] != S::zero() {
            let exponent = S::from_i32(p).expect("i32 fits any float");
            return self.power_series(exponent, self.coeffs[0].powi(p));
        }
        let magnitude = p.unsigned_abs();
        let mut result = Self::constant(S::one(), self.order());
        let mut base = self.clone();
        let mut e = magnitude;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            base = base.mul_jet(&base);
            e >>= 1;
        }
        if p < 0 {
            result.recip()
        } else {
            result
        }
    }

    pub fn exp(&self) -> Self {
        let order = self.order();
        let mut coeffs: Vec<S> = Vec::with_capacity(order + 1);
        coeffs.push(self.coeffs[0].exp());
        for n in 1..=order {
            let mut acc = S::zero();
            for k in 1..=n {
                acc = acc + S::from_usize_lossy(k) * self.coeffs[k] * coeffs[n - k];
            }
            coeffs.push(acc / S::from_usize_lossy(n));
        }
        Self { coeffs }
    }

    pub fn ln(&self) -> Self {
        let order = self.order();
        let a0 = self.coeffs[0];
        let mut coeffs: Vec<S> = Vec::with_capacity(order + 1);
        coeffs.push(a0.ln());
        for n in 1..=order {
            let mut acc = S::zero();
            for k in 1..n {
                acc = acc + S::from_usize_lossy(k) * coeffs[k] * self.coeffs[n - k];
            }
            coeffs.push((self.coeffs[n] - acc / S::from_usize_lossy(n)) / a0);
        }
        Self { coeffs }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(S::lit(0.5))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<S: Scalar> $trait<&Jet<S>> for &Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: &Jet<S>) -> Jet<S> {
                let f: fn(&Jet<S>, &Jet<S>) -> Jet<S> = $body;
                f(self, rhs)
            }
        }
        impl<S: Scalar> $trait<Jet<S>> for Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: Jet<S>) -> Jet<S> {
                (&self).$method(&rhs)
            }
        }
        impl<S: Scalar> $trait<&Jet<S>> for Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: &Jet<S>) -> Jet<S> {
                (&self).$method(rhs)
            }
        }
        impl<S: Scalar> $trait<Jet<S>> for &Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: Jet<S>) -> Jet<S> {
                self.$method(&rhs)
            }
        }
        impl<S: Scalar> $trait<S> for Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: S) -> Jet<S> {
                let order = self.order();
                (&self).$method(&Jet::constant(rhs, order))
            }
        }
        impl<S: Scalar> $trait<S> for &Jet<S> {
            type Output = Jet<S>;
            fn $method(self, rhs: S) -> Jet<S> {
                self.$method(&Jet::constant(rhs, self.order()))
            }
        }
    };
}

forward_binop!(Add, add, |a, b| {
    let n = a.zip_order(b);
    Jet {
        coeffs: (0..=n).map(|i| a.coeffs[i] + b.coeffs[i]).collect(),
    }
});
forward_binop!(Sub, sub, |a, b| {
    let n = a.zip_order(b);
    Jet {
        coeffs: (0..=n).map(|i| a.coeffs[i] - b.coeffs[i]).collect(),
    }
});
forward_binop!(Mul, mul, |a, b| a.mul_jet(b));
forward_binop!(Div, div, |a, b| a.div_jet(b));

impl<S: Scalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.scale(-S::one())
    }
}

impl<S: Scalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.scale(-S::one())
    }
}
