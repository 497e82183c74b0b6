//! Exponential polynomials `Σ c_{k,m} t^m e^{-ikωt/2}` in a time variable.
//!
//! The frequency ω is not stored; it is supplied at evaluation time, so the
//! phases `e^{-ikωt/2}` stay exact integer labels under multiplication.

use crate::coeff::Coeff;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    /// `(k, m) -> c` for the term `c t^m e^{-ikωt/2}`.
    terms: BTreeMap<(i32, u32), Complex64>,
}

impl ExpPoly {
    pub fn constant(c: Complex64) -> Self {
        Self::term(c, 0, 0)
    }

    /// `c t^m e^{-ikωt/2}`.
    pub fn term(c: Complex64, k: i32, m: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert((k, m), c);
        }
        Self { terms }
    }

    /// `e^{-ikωt/2}`.
    pub fn phase(k: i32) -> Self {
        Self::term(Complex64::new(1.0, 0.0), k, 0)
    }

    /// The time variable `t`.
    pub fn time() -> Self {
        Self::term(Complex64::new(1.0, 0.0), 0, 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u32, Complex64)> + '_ {
        self.terms.iter().map(|(&(k, m), &c)| (k, m, c))
    }

    pub fn coefficient(&self, k: i32, m: u32) -> Complex64 {
        self.terms.get(&(k, m)).copied().unwrap_or_default()
    }

    /// Value at a (possibly complex) time.
    pub fn eval(&self, t: Complex64, omega: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(k, m), &c)| {
                c * t.powu(m) * (Complex64::new(0.0, -(k as f64) * omega / 2.0) * t).exp()
            })
            .sum()
    }

    /// Value after the substitution `t = -iτ`, i.e. terms `c (-i)^m τ^m e^{-kωτ/2}`.
    pub fn eval_imag_time(&self, tau: f64, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, -tau), omega)
    }

    /// `ln |Z(-iτ)|` evaluated without overflow by factoring out the dominant exponent.
    pub fn ln_abs_imag_time(&self, tau: f64, omega: f64) -> f64 {
        let parts: Vec<(f64, Complex64)> = self
            .terms
            .iter()
            .map(|(&(k, m), &c)| {
                let c = c * Complex64::new(0.0, -1.0).powu(m);
                let log_mag = c.norm().ln() + m as f64 * tau.ln() - k as f64 * omega * tau / 2.0;
                (log_mag, c / c.norm())
            })
            .collect();
        let top = parts
            .iter()
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return f64::NEG_INFINITY;
        }
        let sum: Complex64 = parts.iter().map(|(l, u)| u * (l - top).exp()).sum();
        sum.norm().ln() + top
    }

    /// Drops coefficients below `eps` in absolute value.
    pub fn pruned(&self, eps: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > eps)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    fn insert_add(terms: &mut BTreeMap<(i32, u32), Complex64>, key: (i32, u32), c: Complex64) {
        let entry = terms.entry(key).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            terms.remove(&key);
        }
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(mut self, rhs: ExpPoly) -> ExpPoly {
        for (key, c) in rhs.terms {
            Self::insert_add(&mut self.terms, key, c);
        }
        self
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        self + (-rhs)
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        Self {
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl Mul for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: ExpPoly) -> ExpPoly {
        let mut terms = BTreeMap::new();
        for (&(k1, m1), &c1) in &self.terms {
            for (&(k2, m2), &c2) in &rhs.terms {
                Self::insert_add(&mut terms, (k1 + k2, m1 + m2), c1 * c2);
            }
        }
        Self { terms }
    }
}

impl Coeff for ExpPoly {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_c64(c: Complex64) -> Self {
        Self::constant(c)
    }
    fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }
    fn exp_coeff(&self) -> Option<Self> {
        match self.terms.len() {
            0 => Some(Self::one()),
            1 => {
                let (&(k, m), &c) = self.terms.iter().next()?;
                (k == 0 && m == 0).then(|| Self::constant(c.exp()))
            }
            _ => None,
        }
    }
    fn magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(k, m), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            if m > 0 {
                write!(f, "*t^{m}")?;
            }
            if k != 0 {
                write!(f, "*exp({}*i*w*t/2)", -k)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for crate::grassmann::GElem<ExpPoly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<&str> = (0..64)
                .filter(|i| m & (1u64 << i) != 0)
                .map(|i| self.registry().name(i))
                .collect();
            if names.is_empty() {
                write!(f, "[{c}]")?;
            } else {
                write!(f, "[{c}]*{}", names.join("*"))?;
            }
        }
        Ok(())
    }
}
