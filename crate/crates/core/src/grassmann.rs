//! Finite Grassmann algebra over a fixed, ordered set of odd generators.
//!
//! Monomials are bitmasks over the registry; the coefficient stored for a mask
//! multiplies the product of its generators in ascending registry order.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

/// Ordered list of odd generator names.
#[derive(Debug, PartialEq, Eq)]
pub struct Registry {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<Registry>> {
        if names.len() > 64 {
            return Err(Error::RegistryTooLarge(names.len()));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.as_ref().to_string(), i).is_some() {
                return Err(Error::DuplicateGenerator(n.as_ref().to_string()));
            }
        }
        Ok(Arc::new(Registry {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            index,
        }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }
}

/// Grassmann parity of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Which side the measure stands on in `∫ dθ f` versus `∫ f dθ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSide {
    Left,
    Right,
}

/// Normalization of the one-variable Berezin integral.
///
/// `Weinberg`: `∫ θ dθ = 1`, `∫ dθ θ = -1`.
/// `Das`: `∫ dθ θ = 1`, `∫ θ dθ = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BerezinConvention {
    #[default]
    Weinberg,
    Das,
}

/// Sign of moving the generators of `b` to the right of those of `a`.
fn product_sign(a: u64, b: u64) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a.checked_shr(j + 1).unwrap_or(0)).count_ones();
        rest &= rest - 1;
    }
    swaps % 2 == 1
}

/// Element of the Grassmann algebra with coefficients in `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct GElem<C: Coeff = Complex64> {
    reg: Arc<Registry>,
    terms: BTreeMap<u64, C>,
}

pub type GrassmannElement = GElem<Complex64>;

impl<C: Coeff> GElem<C> {
    pub fn zero(reg: &Arc<Registry>) -> Self {
        Self {
            reg: reg.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(reg: &Arc<Registry>, c: C) -> Self {
        Self::monomial(reg, 0, c)
    }

    pub fn one(reg: &Arc<Registry>) -> Self {
        Self::scalar(reg, C::one())
    }

    pub fn generator(reg: &Arc<Registry>, name: &str) -> Result<Self> {
        let i = reg.index_of(name)?;
        Ok(Self::monomial(reg, 1 << i, C::one()))
    }

    /// Coefficient `c` times the canonical monomial of `mask`.
    pub fn monomial(reg: &Arc<Registry>, mask: u64, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mask, c);
        }
        Self {
            reg: reg.clone(),
            terms,
        }
    }

    /// Product of the named generators in the order given, times `c`.
    pub fn product_of(reg: &Arc<Registry>, names: &[&str], c: C) -> Result<Self> {
        let mut out = Self::scalar(reg, c);
        for n in names {
            out = out.try_mul(&Self::generator(reg, n)?)?;
        }
        Ok(out)
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.reg
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &C)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the canonical monomial `mask`.
    pub fn coefficient(&self, mask: u64) -> C {
        self.terms.get(&mask).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of the product of `names` taken in the stated order.
    pub fn coefficient_of(&self, names: &[&str]) -> Result<C> {
        let mut mask = 0u64;
        let mut neg = false;
        for n in names {
            let bit = 1u64 << self.reg.index_of(n)?;
            if mask & bit != 0 {
                return Err(Error::DuplicateGenerator(n.to_string()));
            }
            neg ^= product_sign(mask, bit);
            mask |= bit;
        }
        let c = self.coefficient(mask);
        Ok(if neg { -c } else { c })
    }

    /// Scalar (body) part.
    pub fn body(&self) -> C {
        self.coefficient(0)
    }

    fn same_registry(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.reg, &other.reg) || self.reg == other.reg {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    fn add_term(terms: &mut BTreeMap<u64, C>, mask: u64, c: C) {
        if c.is_zero() {
            return;
        }
        match terms.remove(&mask) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    terms.insert(mask, s);
                }
            }
            None => {
                terms.insert(mask, c);
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_registry(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::add_term(&mut terms, *m, c.clone());
        }
        Ok(Self {
            reg: self.reg.clone(),
            terms,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            reg: self.reg.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    /// Graded product; overlapping monomials vanish.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_registry(other)?;
        let mut terms = BTreeMap::new();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let c = ca.clone() * cb.clone();
                let c = if product_sign(a, b) { -c } else { c };
                Self::add_term(&mut terms, a | b, c);
            }
        }
        Ok(Self {
            reg: self.reg.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coeffs(|x| x.scale(c))
    }

    pub fn scale_by(&self, c: &C) -> Self {
        self.map_coeffs(|x| x.clone() * c.clone())
    }

    /// Applies `f` to every coefficient, dropping zeros.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GElem<D> {
        GElem {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Keeps only the monomials accepted by `keep`.
    pub fn filter_monomials(&self, keep: impl Fn(u64) -> bool) -> Self {
        Self {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(**m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Removes coefficients whose magnitude is at most `eps`.
    pub fn pruned(&self, eps: f64) -> Self {
        self.filter_monomials_by_coeff(|c| c.magnitude() > eps)
    }

    fn filter_monomials_by_coeff(&self, keep: impl Fn(&C) -> bool) -> Self {
        Self {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| keep(c))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Left derivative with respect to generator index `i`.
    pub fn left_derivative_at(&self, i: usize) -> Self {
        let bit = 1u64 << i;
        let below = bit - 1;
        let mut terms = BTreeMap::new();
        for (&m, c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let neg = (m & below).count_ones() % 2 == 1;
            let c = if neg { -c.clone() } else { c.clone() };
            Self::add_term(&mut terms, m & !bit, c);
        }
        Self {
            reg: self.reg.clone(),
            terms,
        }
    }

    pub fn left_derivative(&self, name: &str) -> Result<Self> {
        Ok(self.left_derivative_at(self.reg.index_of(name)?))
    }

    /// Right derivative, obtained from the left one with the sign `(-1)^{deg-1}` per monomial.
    pub fn right_derivative_at(&self, i: usize) -> Self {
        let left = self.left_derivative_at(i);
        Self {
            reg: self.reg.clone(),
            terms: left
                .terms
                .into_iter()
                .map(|(m, c)| {
                    // m is the stripped monomial, so deg - 1 = popcount(m).
                    if m.count_ones() % 2 == 1 {
                        (m, -c)
                    } else {
                        (m, c)
                    }
                })
                .collect(),
        }
    }

    pub fn right_derivative(&self, name: &str) -> Result<Self> {
        Ok(self.right_derivative_at(self.reg.index_of(name)?))
    }

    /// Berezin integral over `gens`, innermost first, in the default convention.
    pub fn berezin_integrate(&self, gens: &[&str], side: MeasureSide) -> Result<Self> {
        self.berezin_integrate_with(gens, BerezinConvention::default(), side)
    }

    pub fn berezin_integrate_with(
        &self,
        gens: &[&str],
        convention: BerezinConvention,
        side: MeasureSide,
    ) -> Result<Self> {
        let mut idx = Vec::with_capacity(gens.len());
        for g in gens {
            let i = self.reg.index_of(g)?;
            if idx.contains(&i) {
                return Err(Error::DuplicateGenerator(g.to_string()));
            }
            idx.push(i);
        }
        let flip = matches!(
            (convention, side),
            (BerezinConvention::Weinberg, MeasureSide::Left)
                | (BerezinConvention::Das, MeasureSide::Right)
        );
        let mut out = self.clone();
        for i in idx {
            out = match side {
                MeasureSide::Left => out.left_derivative_at(i),
                MeasureSide::Right => out.right_derivative_at(i),
            };
            if flip {
                out = out.neg();
            }
        }
        Ok(out)
    }

    /// `exp(s + N) = e^s Σ_k N^k / k!`, exact by nilpotency of the soul `N`.
    pub fn exp(&self) -> Result<Self> {
        let body = self.body();
        let eb = body.exp_coeff().ok_or_else(|| {
            Error::InvalidArgument("scalar part cannot be exponentiated in this ring".into())
        })?;
        let soul = self.filter_monomials(|m| m != 0);
        let mut acc = Self::one(&self.reg);
        let mut power = Self::one(&self.reg);
        let mut k = 1.0;
        for n in 1..=self.reg.len() {
            power = power.try_mul(&soul)?.scale(Complex64::new(1.0 / k, 0.0));
            if power.is_zero() {
                break;
            }
            acc = acc.try_add(&power)?;
            k = (n + 1) as f64;
        }
        Ok(acc.scale_by(&eb))
    }

    pub fn parity(&self) -> Parity {
        let mut even = false;
        let mut odd = false;
        for m in self.terms.keys() {
            if m.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Product of odd linear arguments in caller order.
    pub fn delta(reg: &Arc<Registry>, args: &[Self]) -> Result<Self> {
        let mut out = Self::one(reg);
        for a in args {
            if a.is_zero() || a.terms.keys().any(|m| m.count_ones() != 1) {
                return Err(Error::NotOdd);
            }
            out = out.try_mul(a)?;
        }
        Ok(out)
    }

    /// Substitutes generator `i` by `images[i]` (an element of `target`), preserving order.
    pub fn substitute_into(&self, target: &Arc<Registry>, images: &[GElem<C>]) -> Result<GElem<C>> {
        if images.len() != self.reg.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} images, got {}",
                self.reg.len(),
                images.len()
            )));
        }
        let mut out = GElem::zero(target);
        for (&m, c) in &self.terms {
            let mut term = GElem::scalar(target, c.clone());
            let mut rest = m;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                term = term.try_mul(&images[j])?;
                rest &= rest - 1;
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    }

    /// Re-expresses the element in `target` by matching generator names.
    pub fn embed(&self, target: &Arc<Registry>) -> Result<GElem<C>> {
        let images = self
            .reg
            .names()
            .iter()
            .map(|n| GElem::generator(target, n))
            .collect::<Result<Vec<_>>>()?;
        self.substitute_into(target, &images)
    }

    /// Re-expresses an element whose monomials only use generators named in `target`.
    pub fn embed_restricted(&self, target: &Arc<Registry>) -> Result<GElem<C>> {
        let images = self
            .registry()
            .names()
            .iter()
            .map(|name| match target.index_of(name) {
                Ok(_) => GElem::generator(target, name),
                Err(_) => Ok(GElem::zero(target)),
            })
            .collect::<Result<Vec<_>>>()?;
        let out = self.substitute_into(target, &images)?;
        let dropped = self.terms().any(|(m, _)| {
            (0..64).any(|i| {
                m & (1u64 << i) != 0 && target.index_of(self.registry().name(i)).is_err()
            })
        });
        if dropped {
            return Err(Error::InvalidArgument(
                "element still depends on integrated generators".into(),
            ));
        }
        Ok(out)
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self
            .try_sub(other)?
            .terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max))
    }

    /// Mask of the named generators.
    pub fn mask_of(reg: &Registry, names: &[&str]) -> Result<u64> {
        names
            .iter()
            .try_fold(0u64, |m, n| Ok(m | (1u64 << reg.index_of(n)?)))
    }
}

impl<C: Coeff> std::ops::Add for &GElem<C> {
    type Output = GElem<C>;
    fn add(self, rhs: &GElem<C>) -> GElem<C> {
        self.try_add(rhs).expect("registry mismatch in Grassmann addition")
    }
}

impl<C: Coeff> std::ops::Sub for &GElem<C> {
    type Output = GElem<C>;
    fn sub(self, rhs: &GElem<C>) -> GElem<C> {
        self.try_sub(rhs).expect("registry mismatch in Grassmann subtraction")
    }
}

impl<C: Coeff> std::ops::Mul for &GElem<C> {
    type Output = GElem<C>;
    fn mul(self, rhs: &GElem<C>) -> GElem<C> {
        self.try_mul(rhs).expect("registry mismatch in Grassmann product")
    }
}

impl<C: Coeff> std::ops::Neg for &GElem<C> {
    type Output = GElem<C>;
    fn neg(self) -> GElem<C> {
        GElem::neg(self)
    }
}

/// Compact complex formatting shared by the text renderers.
pub fn fmt_complex(c: Complex64) -> String {
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    let (re, im) = (clean(c.re), clean(c.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re}"),
        (true, false) => format!("{im}i"),
        _ => {
            if im < 0.0 {
                format!("({re}-{}i)", -im)
            } else {
                format!("({re}+{im}i)")
            }
        }
    }
}

impl fmt::Display for GElem<Complex64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&m, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<&str> = (0..64)
                .filter(|i| m & (1u64 << i) != 0)
                .map(|i| self.reg.name(i))
                .collect();
            if names.is_empty() {
                write!(f, "{}", fmt_complex(c))?;
            } else if c == Complex64::new(1.0, 0.0) {
                write!(f, "{}", names.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_complex(c), names.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Measure ordering for the brute-force Gaussian integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianMeasure {
    /// `∏_i du_i dv_i`: integrate `v_1, u_1, v_2, u_2, ...` innermost first.
    Paired,
    /// `du_n…du_1 dv_n…dv_1`: integrate `v_1..v_n` then `u_1..u_n`.
    Blocked,
}

/// Closed-form Gaussian Berezin integral `∫ exp(vᵀMu + uᵀa + vᵀb)` over the paired measure,
/// with odd sources `a`, `b` that anticommute with `u`, `v`: `det(M) · exp(aᵀ M⁻¹ b)`.
pub fn gaussian_berezin(
    reg: &Arc<Registry>,
    m: &DMatrix<Complex64>,
    a: &[GrassmannElement],
    b: &[GrassmannElement],
) -> Result<GrassmannElement> {
    let n = m.nrows();
    if m.ncols() != n || a.len() != n || b.len() != n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let inv = m.clone().try_inverse().ok_or(Error::SingularMatrix)?;
    let det = m.determinant();
    if det.norm() == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let mut exponent = GElem::zero(reg);
    for i in 0..n {
        for j in 0..n {
            exponent = exponent.try_add(&a[i].try_mul(&b[j])?.scale(inv[(i, j)]))?;
        }
    }
    Ok(exponent.exp()?.scale(det))
}

/// Oracle for [`gaussian_berezin`]: builds the integrand and integrates generator by generator.
pub fn gaussian_berezin_brute(
    reg: &Arc<Registry>,
    u: &[&str],
    v: &[&str],
    m: &DMatrix<Complex64>,
    a: &[GrassmannElement],
    b: &[GrassmannElement],
    measure: GaussianMeasure,
) -> Result<GrassmannElement> {
    let n = m.nrows();
    if u.len() != n || v.len() != n || a.len() != n || b.len() != n {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let gu = u
        .iter()
        .map(|g| GElem::generator(reg, g))
        .collect::<Result<Vec<_>>>()?;
    let gv = v
        .iter()
        .map(|g| GElem::generator(reg, g))
        .collect::<Result<Vec<_>>>()?;
    let mut x = GElem::zero(reg);
    for i in 0..n {
        for j in 0..n {
            x = x.try_add(&gv[i].try_mul(&gu[j])?.scale(m[(i, j)]))?;
        }
        x = x.try_add(&gu[i].try_mul(&a[i])?)?;
        x = x.try_add(&gv[i].try_mul(&b[i])?)?;
    }
    let order: Vec<&str> = match measure {
        GaussianMeasure::Paired => (0..n).flat_map(|i| [v[i], u[i]]).collect(),
        GaussianMeasure::Blocked => v.iter().chain(u.iter()).copied().collect(),
    };
    x.exp()?
        .berezin_integrate_with(&order, BerezinConvention::Das, MeasureSide::Left)
}
