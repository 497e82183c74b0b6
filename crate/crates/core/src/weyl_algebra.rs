//! Polynomials in `x̂, p̂` under `[x̂, p̂] = iħ`, kept in normal order (all `x̂` left of `p̂`).

use crate::error::{Error, Result};
use crate::hpoly::{binomial, ci, cr, real};
use crate::moyal::{poisson_bracket, PhasePoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

pub use crate::hpoly::HPoly;

/// Linear combination of normal-ordered words; key `(a, b)` is `x̂^a p̂^b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorPoly {
    terms: BTreeMap<(u32, u32), HPoly>,
}

impl OperatorPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::word(0, 0, HPoly::one())
    }

    /// `c x̂^a p̂^b`.
    pub fn word(a: u32, b: u32, c: HPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    pub fn x() -> Self {
        Self::word(1, 0, HPoly::one())
    }

    pub fn p() -> Self {
        Self::word(0, 1, HPoly::one())
    }

    pub fn scalar(c: HPoly) -> Self {
        Self::word(0, 0, c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &HPoly)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, a: u32, b: u32) -> HPoly {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: &HPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_default();
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn scale(&self, c: &HPoly) -> Self {
        let mut out = Self::zero();
        for (&(a, b), v) in &self.terms {
            out.add_term(a, b, &(v * c));
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| op_mul(&acc, self))
    }

    /// Division by `iħ`; fails when a term carries no `ħ`.
    pub fn div_ihbar(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            let shifted = c.unshift(1).ok_or_else(|| {
                Error::InvalidArgument("operator is not divisible by i*hbar".into())
            })?;
            out.add_term(a, b, &shifted.scale(&ci(-1, 1)));
        }
        Ok(out)
    }

    /// Scalar value when the operator is a multiple of the identity.
    pub fn as_scalar(&self) -> Option<HPoly> {
        match self.terms.len() {
            0 => Some(HPoly::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }
}

impl Add for &OperatorPoly {
    type Output = OperatorPoly;
    fn add(self, rhs: &OperatorPoly) -> OperatorPoly {
        let mut out = self.clone();
        for (&(a, b), c) in &rhs.terms {
            out.add_term(a, b, c);
        }
        out
    }
}

impl Sub for &OperatorPoly {
    type Output = OperatorPoly;
    fn sub(self, rhs: &OperatorPoly) -> OperatorPoly {
        self + &(-rhs)
    }
}

impl Neg for &OperatorPoly {
    type Output = OperatorPoly;
    fn neg(self) -> OperatorPoly {
        OperatorPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl std::ops::Mul for &OperatorPoly {
    type Output = OperatorPoly;
    fn mul(self, rhs: &OperatorPoly) -> OperatorPoly {
        op_mul(self, rhs)
    }
}

impl fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(a, b), c)| {
                let mut w = Vec::new();
                match a {
                    0 => {}
                    1 => w.push("X".to_string()),
                    _ => w.push(format!("X^{a}")),
                }
                match b {
                    0 => {}
                    1 => w.push("P".to_string()),
                    _ => w.push(format!("P^{b}")),
                }
                if w.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", w.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `p̂^b x̂^c = Σ_k C(b,k) C(c,k) k! (−iħ)^k x̂^{c−k} p̂^{b−k}`.
fn reorder_coeffs(b: u32, c: u32) -> Vec<(u32, HPoly)> {
    (0..=b.min(c))
        .map(|k| {
            let mut kf = BigInt::from(1);
            for j in 2..=k {
                kf *= BigInt::from(j);
            }
            let n = binomial(b, k) * binomial(c, k) * kf;
            let coeff = real(BigRational::from_integer(n));
            (k, HPoly::i_hbar_pow(k, coeff * cr(if k % 2 == 1 { -1 } else { 1 }, 1)))
        })
        .collect()
}

/// Normal-ordered product.
pub fn op_mul(lhs: &OperatorPoly, rhs: &OperatorPoly) -> OperatorPoly {
    let mut out = OperatorPoly::zero();
    for (&(a, b), c1) in &lhs.terms {
        for (&(c, d), c2) in &rhs.terms {
            let base = c1 * c2;
            for (k, w) in reorder_coeffs(b, c) {
                out.add_term(a + c - k, b - k + d, &(&base * &w));
            }
        }
    }
    out
}

/// `AB − BA`.
pub fn commutator(a: &OperatorPoly, b: &OperatorPoly) -> OperatorPoly {
    &op_mul(a, b) - &op_mul(b, a)
}

/// `Σ_{k<n} iħ m x̂^k p̂^{m−1} x̂^{n−1−k}`, the closed form of `[x̂ⁿ, p̂ᵐ]`.
pub fn xnpm_commutator_closed(n: u32, m: u32) -> Result<OperatorPoly> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(
            "commutator exponents must be positive".into(),
        ));
    }
    let mut out = OperatorPoly::zero();
    let pm1 = OperatorPoly::p().pow(m - 1);
    for k in 0..n {
        let left = OperatorPoly::x().pow(k);
        let right = OperatorPoly::x().pow(n - 1 - k);
        out = &out + &op_mul(&op_mul(&left, &pm1), &right);
    }
    Ok(out.scale(&HPoly::i_hbar_pow(1, cr(m as i64, 1))))
}

/// Both sides of the Groenewold combination.
#[derive(Debug, Clone, PartialEq)]
pub struct GroenewoldResult {
    /// `{x³, p³} + (1/12){{p², x³}, {x², p³}}`.
    pub classical: PhasePoly,
    /// The same combination with brackets promoted to `(1/iħ)[·, ·]`.
    pub quantum: OperatorPoly,
}

impl GroenewoldResult {
    /// Scalar value of the quantum side.
    pub fn quantum_scalar(&self) -> Option<HPoly> {
        self.quantum.as_scalar()
    }
}

pub fn groenewold_check() -> Result<GroenewoldResult> {
    let (x, p) = (PhasePoly::x(), PhasePoly::p());
    let pw = |f: &PhasePoly, k: u32| (0..k).fold(PhasePoly::one(), |acc, _| &acc * f);
    let twelfth = HPoly::constant(cr(1, 12));
    let classical = &poisson_bracket(&pw(&x, 3), &pw(&p, 3))
        + &poisson_bracket(
            &poisson_bracket(&pw(&p, 2), &pw(&x, 3)),
            &poisson_bracket(&pw(&x, 2), &pw(&p, 3)),
        )
        .scale(&twelfth);

    let (xo, po) = (OperatorPoly::x(), OperatorPoly::p());
    let qb = |a: &OperatorPoly, b: &OperatorPoly| commutator(a, b).div_ihbar();
    let quantum = &qb(&xo.pow(3), &po.pow(3))?
        + &qb(&qb(&po.pow(2), &xo.pow(3))?, &qb(&xo.pow(2), &po.pow(3))?)?.scale(&twelfth);
    Ok(GroenewoldResult { classical, quantum })
}

/// Sum over all distinct orderings of `a` copies of `x̂` and `b` of `p̂`.
fn symmetrized_word_sum(a: u32, b: u32) -> OperatorPoly {
    let mut memo: BTreeMap<(u32, u32), OperatorPoly> = BTreeMap::new();
    fn rec(a: u32, b: u32, memo: &mut BTreeMap<(u32, u32), OperatorPoly>) -> OperatorPoly {
        if a == 0 && b == 0 {
            return OperatorPoly::one();
        }
        if let Some(v) = memo.get(&(a, b)) {
            return v.clone();
        }
        let mut out = OperatorPoly::zero();
        if a > 0 {
            out = &out + &op_mul(&OperatorPoly::x(), &rec(a - 1, b, memo));
        }
        if b > 0 {
            out = &out + &op_mul(&OperatorPoly::p(), &rec(a, b - 1, memo));
        }
        memo.insert((a, b), out.clone());
        out
    }
    rec(a, b, &mut memo)
}

/// Weyl map: each `x^a p^b` goes to the average of its `(a+b)!/(a!b!)` orderings.
pub fn weyl_quantize_poly(f: &PhasePoly) -> OperatorPoly {
    let mut out = OperatorPoly::zero();
    for ((a, b), c) in f.terms() {
        let count = binomial(a + b, a);
        let inv = real(BigRational::new(BigInt::from(1), count));
        out = &out + &symmetrized_word_sum(a, b).scale(&c.scale(&inv));
    }
    out
}

/// Inverse Weyl map by elimination from the highest total degree down.
pub fn weyl_symbol(op: &OperatorPoly) -> PhasePoly {
    let mut rest = op.clone();
    let mut out = PhasePoly::zero();
    while let Some((&(a, b), c)) = rest.terms.iter().max_by_key(|(k, _)| (k.0 + k.1, k.0)) {
        let c = c.clone();
        let sym = PhasePoly::monomial(a, b, c);
        rest = &rest - &weyl_quantize_poly(&sym);
        out = &out + &sym;
    }
    out
}
