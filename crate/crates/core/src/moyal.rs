//! Bosonic phase-space symbols for one degree of freedom: exact polynomials,
//! Gaussian symbols, Poisson bracket, Moyal and standard star products,
//! star powers, star-genvalue residuals and Wigner functions.

use crate::error::{Error, Result};
use crate::hpoly::{ci, cr, fmt_crational, inv_factorial, real, CRational, HPoly};
use crate::quadrature::adaptive_simpson;
use num_complex::Complex64;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact polynomial in `(x, p)` with `HPoly` coefficients; key `(a, b)` is `x^a p^b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhasePoly {
    terms: BTreeMap<(u32, u32), HPoly>,
}

/// Exact rational image of a finite double.
pub fn exact(v: f64) -> CRational {
    let r = BigRational::from_float(v).expect("finite value");
    real(r)
}

impl PhasePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(HPoly::one())
    }

    pub fn constant(c: HPoly) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c x^a p^b`.
    pub fn monomial(a: u32, b: u32, c: HPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    /// `c x^a p^b` with a plain complex-rational coefficient.
    pub fn mono(a: u32, b: u32, c: CRational) -> Self {
        Self::monomial(a, b, HPoly::constant(c))
    }

    pub fn x() -> Self {
        Self::mono(1, 0, cr(1, 1))
    }

    pub fn p() -> Self {
        Self::mono(0, 1, cr(1, 1))
    }

    pub fn hbar() -> Self {
        Self::constant(HPoly::hbar())
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

    pub fn scale_c(&self, c: &CRational) -> Self {
        self.scale(&HPoly::constant(c.clone()))
    }

    pub fn degree_x(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degree_p(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.0 + k.1).max().unwrap_or(0)
    }

    /// `∂_p^m ∂_x^n`.
    pub fn deriv(&self, m: u32, n: u32) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if a < n || b < m {
                continue;
            }
            let fa: u64 = ((a - n + 1)..=a).map(u64::from).product();
            let fb: u64 = ((b - m + 1)..=b).map(u64::from).product();
            let k = (fa * fb) as i64;
            out.add_term(a - n, b - m, &c.scale(&cr(k, 1)));
        }
        out
    }

    pub fn dx(&self) -> Self {
        self.deriv(0, 1)
    }

    pub fn dp(&self) -> Self {
        self.deriv(1, 0)
    }

    /// Coefficient of `ħ^k`, as a polynomial with `ħ`-free coefficients.
    pub fn hbar_part(&self, k: u32) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, &HPoly::constant(c.coeff(k)));
        }
        out
    }

    /// Division by `iħ`; fails when an `ħ⁰` term is present.
    pub fn div_ihbar(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            let shifted = c.unshift(1).ok_or_else(|| {
                Error::InvalidArgument("symbol is not divisible by i*hbar".into())
            })?;
            out.add_term(a, b, &shifted.scale(&ci(-1, 1)));
        }
        Ok(out)
    }

    pub fn eval(&self, x: f64, p: f64, hbar: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c.eval(hbar) * x.powi(a as i32) * p.powi(b as i32))
            .sum()
    }

    pub fn to_numpoly(&self, hbar: f64) -> NumPoly {
        let mut out = NumPoly::zero();
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, c.eval(hbar));
        }
        out
    }

    /// `n`-th Moyal star power.
    pub fn star_pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = moyal_star_poly(&acc, self);
        }
        acc
    }
}

impl Add for &PhasePoly {
    type Output = PhasePoly;
    fn add(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (&(a, b), c) in &rhs.terms {
            out.add_term(a, b, c);
        }
        out
    }
}

impl Sub for &PhasePoly {
    type Output = PhasePoly;
    fn sub(self, rhs: &PhasePoly) -> PhasePoly {
        self + &(-rhs)
    }
}

impl Neg for &PhasePoly {
    type Output = PhasePoly;
    fn neg(self) -> PhasePoly {
        PhasePoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Mul for &PhasePoly {
    type Output = PhasePoly;
    fn mul(self, rhs: &PhasePoly) -> PhasePoly {
        let mut out = PhasePoly::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term(a1 + a2, b1 + b2, &(c1 * c2));
            }
        }
        out
    }
}

fn monomial_name(a: u32, b: u32) -> String {
    let part = |s: &str, k: u32| match k {
        0 => None,
        1 => Some(s.to_string()),
        _ => Some(format!("{s}^{k}")),
    };
    [part("x", a), part("p", b)]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for PhasePoly {
    /// Terms ordered by ascending power of ħ, then descending total degree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<(u32, u32, u32, u32, CRational)> = Vec::new();
        for (&(a, b), c) in &self.terms {
            for (k, v) in c.terms() {
                rows.push((k, a, b, a + b, v.clone()));
            }
        }
        if rows.is_empty() {
            return write!(f, "0");
        }
        rows.sort_by(|r, s| {
            r.0.cmp(&s.0)
                .then(s.3.cmp(&r.3))
                .then(s.1.cmp(&r.1))
                .then(s.2.cmp(&r.2))
        });
        let mut out = String::new();
        for (i, (k, a, b, _, c)) in rows.iter().enumerate() {
            let mut factors = Vec::new();
            let mono = monomial_name(*a, *b);
            if !mono.is_empty() {
                factors.push(mono);
            }
            match k {
                0 => {}
                1 => factors.push("hbar".into()),
                _ => factors.push(format!("hbar^{k}")),
            }
            let cs = fmt_crational(c);
            let (neg, cs) = match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs),
            };
            let body = if factors.is_empty() {
                cs
            } else if cs == "1" {
                factors.join("*")
            } else {
                format!("{cs}*{}", factors.join("*"))
            };
            match (i, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => out.push_str(&format!("-{body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
                (_, true) => out.push_str(&format!(" - {body}")),
            }
        }
        write!(f, "{out}")
    }
}

/// `{f, g} = ∂_x f ∂_p g − ∂_p f ∂_x g`.
pub fn poisson_bracket(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    &(&f.dx() * &g.dp()) - &(&f.dp() * &g.dx())
}

/// `(iħ/2)^{m+n} (−1)^m / (m! n!)` as an `HPoly`.
fn moyal_weight(m: u32, n: u32) -> HPoly {
    let sign = if m % 2 == 1 { -1 } else { 1 };
    let c = cr(sign, 1) * real(inv_factorial(m) * inv_factorial(n));
    let half = cr(1, 1 << (m + n).min(62));
    HPoly::i_hbar_pow(m + n, c * half)
}

/// Exact Moyal product of two polynomials.
pub fn moyal_star_poly(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    moyal_star_poly_truncated(f, g, None)
}

/// Moyal product keeping only orders `m + n ≤ order` when given.
pub fn moyal_star_poly_truncated(f: &PhasePoly, g: &PhasePoly, order: Option<u32>) -> PhasePoly {
    let mut out = PhasePoly::zero();
    let max_m = f.degree_p().min(g.degree_x());
    let max_n = f.degree_x().min(g.degree_p());
    for m in 0..=max_m {
        for n in 0..=max_n {
            if order.is_some_and(|k| m + n > k) {
                continue;
            }
            let fd = f.deriv(m, n);
            let gd = g.deriv(n, m);
            if fd.is_zero() || gd.is_zero() {
                continue;
            }
            out = &out + &(&fd * &gd).scale(&moyal_weight(m, n));
        }
    }
    out
}

/// `(f ⋆ g − g ⋆ f) / iħ`.
pub fn moyal_bracket(f: &PhasePoly, g: &PhasePoly) -> Result<PhasePoly> {
    (&moyal_star_poly(f, g) - &moyal_star_poly(g, f)).div_ihbar()
}

/// Standard (normal-ordered) product `Σ_k (iħ)^k/k! (∂_x^k f)(∂_p^k g)`.
pub fn standard_star(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    let mut out = PhasePoly::zero();
    for k in 0..=f.degree_x().min(g.degree_p()) {
        let w = HPoly::i_hbar_pow(k, real(inv_factorial(k)));
        out = &out + &(&f.deriv(0, k) * &g.deriv(k, 0)).scale(&w);
    }
    out
}

/// Direction of the transition operator between the standard and Moyal products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TDirection {
    /// `T = exp[−(iħ/2) ∂_x ∂_p]`.
    Forward,
    /// `T⁻¹ = exp[+(iħ/2) ∂_x ∂_p]`.
    Inverse,
}

/// Applies `T` or `T⁻¹`; `T(f ⋆_S g) = T f ⋆ T g`.
pub fn t_transition(f: &PhasePoly, dir: TDirection) -> PhasePoly {
    let sign = match dir {
        TDirection::Forward => -1,
        TDirection::Inverse => 1,
    };
    let mut out = PhasePoly::zero();
    for k in 0..=f.degree_x().min(f.degree_p()) {
        let s = if k % 2 == 1 { sign } else { 1 };
        let c = cr(s, 1 << k.min(62)) * real(inv_factorial(k));
        out = &out + &f.deriv(k, k).scale(&HPoly::i_hbar_pow(k, c));
    }
    out
}

/// `H = p²/2m + mω²x²/2` with exact coefficients from the given doubles.
pub fn ho_hamiltonian(m: f64, omega: f64) -> PhasePoly {
    &PhasePoly::mono(0, 2, exact(0.5 / m)) + &PhasePoly::mono(2, 0, exact(0.5 * m * omega * omega))
}

/// Partial sum `Σ_{n≤order} (−it/ħ)^n H^{⋆n}/n!` at `(x, p)`.
pub fn star_power_series_exp(
    h: &PhasePoly,
    t: f64,
    order: u32,
    point: (f64, f64),
    hbar: f64,
) -> Complex64 {
    let mut power = PhasePoly::one();
    let mut sum = Complex64::new(0.0, 0.0);
    let z = Complex64::new(0.0, -t / hbar);
    let mut zn = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    for n in 0..=order {
        if n > 0 {
            power = moyal_star_poly(&power, h);
            zn *= z;
            fact *= n as f64;
        }
        sum += zn / fact * power.eval(point.0, point.1, hbar);
    }
    sum
}

/// Numeric polynomial in `(x, p)`, used as the prefactor of Gaussian symbols.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl NumPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        let mut out = Self::zero();
        out.add_term(0, 0, c);
        out
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry((a, b)).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(a, b));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant term when the polynomial has no other terms.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.len() {
            0 => Some(Complex64::new(0.0, 0.0)),
            1 => self.terms.get(&(0, 0)).copied(),
            _ => None,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for (&(a, b), v) in &self.terms {
            out.add_term(a, b, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(a, b), v) in &other.terms {
            out.add_term(a, b, *v);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &other.terms {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if a > 0 {
                out.add_term(a - 1, b, c * a as f64);
            }
        }
        out
    }

    pub fn dp(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if b > 0 {
                out.add_term(a, b - 1, c * b as f64);
            }
        }
        out
    }

    pub fn degree_x(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degree_p(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, p: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c * x.powi(a as i32) * p.powi(b as i32))
            .sum()
    }
}

/// `P(x, p) · exp(A x² + B xp + C p² + u x + v p + w)` at a fixed numeric ħ.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSymbol {
    pub prefactor: NumPoly,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
    pub hbar: f64,
}

impl GaussianSymbol {
    /// A polynomial viewed as a Gaussian symbol with vanishing exponent.
    pub fn from_poly(f: &PhasePoly, hbar: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            prefactor: f.to_numpoly(hbar),
            a: z,
            b: z,
            c: z,
            u: z,
            v: z,
            w: z,
            hbar,
        }
    }

    pub fn exponent_at(&self, x: f64, p: f64) -> Complex64 {
        self.a * x * x + self.b * x * p + self.c * p * p + self.u * x + self.v * p + self.w
    }

    pub fn eval(&self, x: f64, p: f64) -> Complex64 {
        self.prefactor.eval(x, p) * self.exponent_at(x, p).exp()
    }

    fn with_prefactor(&self, prefactor: NumPoly) -> Self {
        Self {
            prefactor,
            ..self.clone()
        }
    }

    fn exponent_dx(&self) -> NumPoly {
        let mut q = NumPoly::zero();
        q.add_term(1, 0, 2.0 * self.a);
        q.add_term(0, 1, self.b);
        q.add_term(0, 0, self.u);
        q
    }

    fn exponent_dp(&self) -> NumPoly {
        let mut q = NumPoly::zero();
        q.add_term(1, 0, self.b);
        q.add_term(0, 1, 2.0 * self.c);
        q.add_term(0, 0, self.v);
        q
    }

    pub fn dx(&self) -> Self {
        self.with_prefactor(self.prefactor.dx().add(&self.prefactor.mul(&self.exponent_dx())))
    }

    pub fn dp(&self) -> Self {
        self.with_prefactor(self.prefactor.dp().add(&self.prefactor.mul(&self.exponent_dp())))
    }

    pub fn mul_poly(&self, f: &NumPoly) -> Self {
        self.with_prefactor(self.prefactor.mul(f))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_prefactor(self.prefactor.scale(c))
    }

    /// Pointwise product; exponents add.
    pub fn mul(&self, other: &Self) -> Self {
        Self {
            prefactor: self.prefactor.mul(&other.prefactor),
            a: self.a + other.a,
            b: self.b + other.b,
            c: self.c + other.c,
            u: self.u + other.u,
            v: self.v + other.v,
            w: self.w + other.w,
            hbar: self.hbar,
        }
    }

    fn is_polynomial(&self) -> bool {
        let z = Complex64::new(0.0, 0.0);
        [self.a, self.b, self.c, self.u, self.v, self.w]
            .iter()
            .all(|e| *e == z)
    }

    /// `ln ∫∫ P e^Q dx dp` for a constant prefactor.
    pub fn ln_phase_space_integral(&self) -> Result<Complex64> {
        let k = self.prefactor.as_constant().ok_or_else(|| {
            Error::InvalidArgument("phase-space integral needs a constant prefactor".into())
        })?;
        let lg = gaussian_integral_2d_ln(self.a, self.b, self.c, self.u, self.v)?;
        Ok(k.ln() + lg + self.w)
    }

    pub fn phase_space_integral(&self) -> Result<Complex64> {
        Ok(self.ln_phase_space_integral()?.exp())
    }
}

/// `ln ∫∫ exp(A x² + B xp + C p² + u x + v p) dx dp`, for `Re` of the form negative definite.
pub fn gaussian_integral_2d_ln(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    u: Complex64,
    v: Complex64,
) -> Result<Complex64> {
    // M = -2 [[A, B/2], [B/2, C]], integral = 2π/√det M · exp(½ Jᵀ M⁻¹ J).
    let (m11, m12, m22) = (-2.0 * a, -b, -2.0 * c);
    if !(m11.re > 0.0 && m11.re * m22.re - m12.re * m12.re > 0.0) {
        return Err(Error::Quadrature(
            "Gaussian exponent is not decaying in every direction".into(),
        ));
    }
    let det = m11 * m22 - m12 * m12;
    let half_tr = 0.5 * (m11 + m22);
    let disc = (half_tr * half_tr - det).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let quad = (m22 * u * u - 2.0 * m12 * u * v + m11 * v * v) / det;
    Ok(Complex64::new((2.0 * PI).ln(), 0.0) - 0.5 * (l1.ln() + l2.ln()) + 0.5 * quad)
}

/// Truncation policy for star products involving Gaussian factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Exact,
    Order(u32),
}

/// Operand of the general Moyal product.
#[derive(Debug, Clone, PartialEq)]
pub enum StarOperand {
    Poly(PhasePoly),
    Gauss(GaussianSymbol),
}

/// Moyal product over polynomials and Gaussian symbols.
pub fn moyal_star(f: &StarOperand, g: &StarOperand, trunc: Truncation) -> Result<StarOperand> {
    let order = match trunc {
        Truncation::Exact => None,
        Truncation::Order(k) => Some(k),
    };
    let hbar = match (f, g) {
        (StarOperand::Poly(a), StarOperand::Poly(b)) => {
            return Ok(StarOperand::Poly(moyal_star_poly_truncated(a, b, order)))
        }
        (StarOperand::Gauss(a), StarOperand::Gauss(b)) => {
            if order.is_none() {
                return Err(Error::NonPolynomialExact);
            }
            if a.hbar != b.hbar {
                return Err(Error::InvalidArgument("operands use different hbar".into()));
            }
            a.hbar
        }
        (StarOperand::Gauss(a), _) | (_, StarOperand::Gauss(a)) => a.hbar,
    };
    let to_gauss = |s: &StarOperand| match s {
        StarOperand::Poly(p) => GaussianSymbol::from_poly(p, hbar),
        StarOperand::Gauss(g) => g.clone(),
    };
    Ok(StarOperand::Gauss(gaussian_star(&to_gauss(f), &to_gauss(g), order)?))
}

/// Bidifferential Moyal series between Gaussian symbols; terminates when one factor is polynomial.
pub fn gaussian_star(
    f: &GaussianSymbol,
    g: &GaussianSymbol,
    order: Option<u32>,
) -> Result<GaussianSymbol> {
    let (mut max_m, mut max_n) = (u32::MAX, u32::MAX);
    if f.is_polynomial() {
        max_m = max_m.min(f.prefactor.degree_p());
        max_n = max_n.min(f.prefactor.degree_x());
    }
    if g.is_polynomial() {
        max_n = max_n.min(g.prefactor.degree_p());
        max_m = max_m.min(g.prefactor.degree_x());
    }
    if let Some(k) = order {
        max_m = max_m.min(k);
        max_n = max_n.min(k);
    }
    if max_m == u32::MAX || max_n == u32::MAX {
        return Err(Error::NonPolynomialExact);
    }
    let hbar = f.hbar;
    let table = |s: &GaussianSymbol, rows: u32, cols: u32| {
        // table[i][j] = ∂_p^i ∂_x^j s
        let mut t: Vec<Vec<GaussianSymbol>> = Vec::new();
        let mut row_start = s.clone();
        for i in 0..=rows {
            if i > 0 {
                row_start = row_start.dp();
            }
            let mut row = vec![row_start.clone()];
            for _ in 0..cols {
                let next = row.last().unwrap().dx();
                row.push(next);
            }
            t.push(row);
        }
        t
    };
    let tf = table(f, max_m, max_n);
    let tg = table(g, max_n, max_m);
    let mut pre = NumPoly::zero();
    let ih2 = Complex64::new(0.0, hbar / 2.0);
    for m in 0..=max_m {
        for n in 0..=max_n {
            if order.is_some_and(|k| m + n > k) {
                continue;
            }
            let fd = &tf[m as usize][n as usize];
            let gd = &tg[n as usize][m as usize];
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            let w = ih2.powu(m + n) * sign * inv_fact_f64(m) * inv_fact_f64(n);
            pre = pre.add(&fd.prefactor.mul(&gd.prefactor).scale(w));
        }
    }
    let mut out = f.mul(g);
    out.prefactor = pre;
    Ok(out)
}

fn inv_fact_f64(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc / j as f64)
}

/// `max |H ⋆ ρ − E ρ|` over the sample points.
pub fn star_genvalue_residual(
    h: &PhasePoly,
    rho: &GaussianSymbol,
    e: f64,
    samples: &[(f64, f64)],
) -> Result<f64> {
    let prod = gaussian_star(&GaussianSymbol::from_poly(h, rho.hbar), rho, None)?;
    Ok(samples
        .iter()
        .map(|&(x, p)| (prod.eval(x, p) - e * rho.eval(x, p)).norm())
        .fold(0.0, f64::max))
}

/// Laguerre polynomial `L_n(z)` of a polynomial argument, by the three-term recurrence.
pub fn laguerre_of(n: u32, z: &NumPoly) -> NumPoly {
    let one = NumPoly::constant(Complex64::new(1.0, 0.0));
    if n == 0 {
        return one;
    }
    let mut prev = one.clone();
    let mut cur = one.add(&z.scale(Complex64::new(-1.0, 0.0)));
    for k in 1..n {
        let kf = k as f64;
        let lead = NumPoly::constant(Complex64::new(2.0 * kf + 1.0, 0.0))
            .add(&z.scale(Complex64::new(-1.0, 0.0)));
        let next = lead
            .mul(&cur)
            .add(&prev.scale(Complex64::new(-kf, 0.0)))
            .scale(Complex64::new(1.0 / (kf + 1.0), 0.0));
        prev = cur;
        cur = next;
    }
    cur
}

/// Scalar Laguerre polynomial `L_n(z)`.
pub fn laguerre(n: u32, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 1.0 - z);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - z) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Oscillator eigenstate Wigner function `ρ_n` as a Gaussian symbol.
pub fn ho_wigner_symbol(n: u32, m: f64, omega: f64, hbar: f64) -> GaussianSymbol {
    let h = ho_hamiltonian(m, omega).to_numpoly(hbar);
    let z = h.scale(Complex64::new(4.0 / (omega * hbar), 0.0));
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    let pre = laguerre_of(n, &z).scale(Complex64::new(sign / (PI * hbar), 0.0));
    let zero = Complex64::new(0.0, 0.0);
    GaussianSymbol {
        prefactor: pre,
        a: Complex64::new(-m * omega / hbar, 0.0),
        b: zero,
        c: Complex64::new(-1.0 / (m * omega * hbar), 0.0),
        u: zero,
        v: zero,
        w: zero,
        hbar,
    }
}

/// Oscillator eigenfunction `ψ_n(x)` built from Hermite functions.
pub fn ho_eigenfunction(n: u32, m: f64, omega: f64, hbar: f64) -> impl Fn(f64) -> Complex64 {
    let s = (m * omega / hbar).sqrt();
    move |x: f64| {
        let xi = s * x;
        // Normalized Hermite functions by their stable recurrence.
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
        for k in 0..n {
            let kf = k as f64;
            let next = (2.0f64 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        Complex64::new(cur * s.sqrt(), 0.0)
    }
}

/// Controls for the Wigner-function quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureParams {
    pub tol: f64,
    pub initial_window: f64,
    pub max_window: f64,
    pub boundary_eps: f64,
    pub panels: usize,
    pub max_depth: u32,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            initial_window: 4.0,
            max_window: 512.0,
            boundary_eps: 1e-12,
            panels: 64,
            max_depth: 40,
        }
    }
}

/// `(1/2πħ) ∫ ψ(x+y/2) ψ̄(x−y/2) e^{−iyp/ħ} dy` by adaptive Simpson on `[−L, L]`.
pub fn wigner_from_wavefunction(
    psi: &dyn Fn(f64) -> Complex64,
    x: f64,
    p: f64,
    hbar: f64,
    params: &QuadratureParams,
) -> Result<f64> {
    let mut l = params.initial_window;
    while psi(x + l / 2.0).norm() >= params.boundary_eps
        || psi(x - l / 2.0).norm() >= params.boundary_eps
    {
        l *= 2.0;
        if l > params.max_window {
            return Err(Error::Quadrature(format!(
                "wavefunction does not decay below {:e} within window {}",
                params.boundary_eps, params.max_window
            )));
        }
    }
    let integrand = |y: f64| {
        psi(x + y / 2.0) * psi(x - y / 2.0).conj() * Complex64::new(0.0, -y * p / hbar).exp()
    };
    let val = adaptive_simpson(&integrand, -l, l, params.tol, params.panels, params.max_depth)?
        / (2.0 * PI * hbar);
    if val.im.abs() > 1e-9 {
        return Err(Error::Quadrature(format!(
            "imaginary residue {:e} exceeds 1e-9",
            val.im
        )));
    }
    Ok(val.re)
}
