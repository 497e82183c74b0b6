//! Exact polynomials in the formal parameter ħ with complex-rational coefficients.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Complex number with exact rational parts.
pub type CRational = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn crat(re: BigRational, im: BigRational) -> CRational {
    Complex::new(re, im)
}

/// `n/d + 0i`.
pub fn cr(n: i64, d: i64) -> CRational {
    Complex::new(rat(n, d), BigRational::zero())
}

/// `i n/d`.
pub fn ci(n: i64, d: i64) -> CRational {
    Complex::new(BigRational::zero(), rat(n, d))
}

pub fn cr_is_zero(c: &CRational) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

pub fn cr_to_c64(c: &CRational) -> Complex64 {
    Complex64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Exact `1/k!`-style factor as a rational.
pub fn inv_factorial(k: u32) -> BigRational {
    let mut f = BigInt::one();
    for j in 2..=k {
        f *= BigInt::from(j);
    }
    BigRational::new(BigInt::one(), f)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Formats an exact rational as a decimal when it terminates, otherwise as `n/d`.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut digits = 0usize;
    while (&d % &two).is_zero() {
        d /= &two;
        digits += 1;
    }
    let mut fives = 0usize;
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = digits.max(fives);
    let scaled = r * BigRational::from_integer(BigInt::from(10).pow(places as u32));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let s = n.abs().to_string();
    let s = format!("{:0>width$}", s, width = places + 1);
    let (int, frac) = s.split_at(s.len() - places);
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// Formats a complex rational: `a`, `bi`, or `(a+bi)`.
pub fn fmt_crational(c: &CRational) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => fmt_rational(&c.re),
        (true, false) => format!("{}i", fmt_rational(&c.im)),
        _ => {
            let im = if c.im.is_negative() {
                format!("-{}", fmt_rational(&-c.im.clone()))
            } else {
                format!("+{}", fmt_rational(&c.im))
            };
            format!("({}{}i)", fmt_rational(&c.re), im)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HPoly {
    coeffs: BTreeMap<u32, CRational>,
}

impl HPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(cr(1, 1))
    }

    pub fn constant(c: CRational) -> Self {
        Self::monomial(c, 0)
    }

    /// `c ħ^k`.
    pub fn monomial(c: CRational, k: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !cr_is_zero(&c) {
            coeffs.insert(k, c);
        }
        Self { coeffs }
    }

    pub fn hbar() -> Self {
        Self::monomial(cr(1, 1), 1)
    }

    /// `(iħ)^k` times `c`.
    pub fn i_hbar_pow(k: u32, c: CRational) -> Self {
        let mut ik = cr(1, 1);
        for _ in 0..k {
            ik = ik * ci(1, 1);
        }
        Self::monomial(c * ik, k)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: u32) -> CRational {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| cr(0, 1))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &CRational)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn lowest(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn scale(&self, c: &CRational) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.coeffs {
            out.add_term(*k, v * c);
        }
        out
    }

    /// Multiplies by `ħ^k`.
    pub fn shift(&self, k: u32) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(j, c)| (j + k, c.clone())).collect(),
        }
    }

    /// Divides by `ħ^k`; `None` when a lower power is present.
    pub fn unshift(&self, k: u32) -> Option<Self> {
        if self.lowest().is_some_and(|l| l < k) {
            return None;
        }
        Some(Self {
            coeffs: self.coeffs.iter().map(|(j, c)| (j - k, c.clone())).collect(),
        })
    }

    pub fn add_term(&mut self, k: u32, c: CRational) {
        if cr_is_zero(&c) {
            return;
        }
        let entry = self.coeffs.entry(k).or_insert_with(|| cr(0, 1));
        *entry = &*entry + c;
        if cr_is_zero(entry) {
            self.coeffs.remove(&k);
        }
    }

    pub fn eval(&self, hbar: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| cr_to_c64(c) * hbar.powi(*k as i32))
            .sum()
    }
}

impl Add for &HPoly {
    type Output = HPoly;
    fn add(self, rhs: &HPoly) -> HPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.coeffs {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &HPoly {
    type Output = HPoly;
    fn sub(self, rhs: &HPoly) -> HPoly {
        self + &(-rhs)
    }
}

impl Neg for &HPoly {
    type Output = HPoly;
    fn neg(self) -> HPoly {
        HPoly {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c.clone())).collect(),
        }
    }
}

impl Mul for &HPoly {
    type Output = HPoly;
    fn mul(self, rhs: &HPoly) -> HPoly {
        let mut out = HPoly::zero();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &rhs.coeffs {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for HPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let h = match k {
                    0 => String::new(),
                    1 => "hbar".to_string(),
                    _ => format!("hbar^{k}"),
                };
                let cs = fmt_crational(c);
                match (k, cs.as_str()) {
                    (0, _) => cs,
                    (_, "1") => h,
                    (_, "-1") => format!("-{h}"),
                    _ => format!("{cs}*{h}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

/// Real complex-rational from a rational.
pub fn real(r: BigRational) -> CRational {
    Complex::new(r, BigRational::zero())
}
