//! Fermionic phase space over Grassmann pairs `(π_j, ψ_j)`: star product in
//! differential and integral form, Weyl quantization into Fock matrices,
//! traces and Wigner symbols.

use crate::error::{Error, Result};
use crate::grassmann::{BerezinConvention, GElem, GrassmannElement, MeasureSide, Registry};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Registry layout and ħ for symbols on `n` fermionic degrees of freedom.
///
/// Generators are `pi1..pin, psi1..psin` followed by the external odd parameters.
#[derive(Debug, Clone)]
pub struct FermiSpace {
    n: usize,
    hbar: f64,
    reg: Arc<Registry>,
    ext: Arc<Registry>,
    externals: Vec<String>,
    doubled: Arc<Registry>,
    tripled: Arc<Registry>,
    integral_kernel: GrassmannElement,
}

pub fn pi_name(j: usize) -> String {
    format!("pi{j}")
}

pub fn psi_name(j: usize) -> String {
    format!("psi{j}")
}

impl FermiSpace {
    pub fn new(n: usize, externals: &[&str], hbar: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one degree of freedom".into()));
        }
        if hbar <= 0.0 {
            return Err(Error::InvalidArgument("hbar must be positive".into()));
        }
        let base: Vec<String> = (1..=n)
            .map(pi_name)
            .chain((1..=n).map(psi_name))
            .collect();
        let externals: Vec<String> = externals.iter().map(|s| s.to_string()).collect();
        let mut names = base.clone();
        names.extend(externals.iter().cloned());
        let reg = Registry::new(&names)?;
        let ext = Registry::new(&externals)?;
        let primed = |s: &str| base.iter().map(|b| format!("{b}{s}")).collect::<Vec<_>>();
        let mut dnames = names.clone();
        dnames.extend(primed("'"));
        let doubled = Registry::new(&dnames)?;
        let mut tnames = names.clone();
        tnames.extend(primed("'"));
        tnames.extend(primed("''"));
        let tripled = Registry::new(&tnames)?;
        let integral_kernel = Self::build_integral_kernel(&tripled, n, hbar)?;
        Ok(Self {
            n,
            hbar,
            reg,
            ext,
            externals,
            doubled,
            tripled,
            integral_kernel,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.reg
    }

    /// Registry of the external odd parameters alone.
    pub fn external_registry(&self) -> &Arc<Registry> {
        &self.ext
    }

    pub fn pi(&self, j: usize) -> Result<GrassmannElement> {
        GElem::generator(&self.reg, &pi_name(j))
    }

    pub fn psi(&self, j: usize) -> Result<GrassmannElement> {
        GElem::generator(&self.reg, &psi_name(j))
    }

    pub fn external(&self, name: &str) -> Result<GrassmannElement> {
        if !self.externals.iter().any(|e| e == name) {
            return Err(Error::UnknownGenerator(name.to_string()));
        }
        GElem::generator(&self.reg, name)
    }

    /// Mask of the phase-space generators `π, ψ`.
    fn base_mask(&self) -> u64 {
        (1u64 << (2 * self.n)) - 1
    }

    /// Every monomial in `π, ψ` with unit coefficient.
    pub fn symbol_basis(&self) -> Vec<GrassmannElement> {
        (0..(1u64 << (2 * self.n)))
            .map(|m| GElem::monomial(&self.reg, m, c(1.0, 0.0)))
            .collect()
    }

    fn check(&self, f: &GrassmannElement) -> Result<()> {
        if f.registry().as_ref() != self.reg.as_ref() {
            return Err(Error::RegistryMismatch);
        }
        Ok(())
    }

    /// Images of the base generators in `target`, with phase-space names suffixed by `suffix`.
    fn images(&self, target: &Arc<Registry>, suffix: &str) -> Result<Vec<GrassmannElement>> {
        self.reg
            .names()
            .iter()
            .enumerate()
            .map(|(i, name)| {
                if i < 2 * self.n {
                    GElem::generator(target, &format!("{name}{suffix}"))
                } else {
                    GElem::generator(target, name)
                }
            })
            .collect()
    }

    /// `f exp{(iħ/2) P_F} g`, realised on the doubled algebra as
    /// `μ ∘ exp((iħ/2) D) (f(θ) g(θ'))` with `D = −Σ_j (∂_{π_j}∂_{ψ'_j} + ∂_{ψ_j}∂_{π'_j})`.
    pub fn star(&self, f: &GrassmannElement, g: &GrassmannElement) -> Result<GrassmannElement> {
        self.check(f)?;
        self.check(g)?;
        let d = &self.doubled;
        let fl = f.substitute_into(d, &self.images(d, "")?)?;
        let gr = g.substitute_into(d, &self.images(d, "'")?)?;
        let mut term = fl.try_mul(&gr)?;
        let mut acc = term.clone();
        let mut k = 1.0;
        let idx = |s: String| d.index_of(&s);
        let mut pairs = Vec::new();
        for j in 1..=self.n {
            pairs.push((idx(pi_name(j))?, idx(format!("{}'", psi_name(j)))?));
            pairs.push((idx(psi_name(j))?, idx(format!("{}'", pi_name(j)))?));
        }
        let w = c(0.0, self.hbar / 2.0);
        loop {
            let mut next = GElem::zero(d);
            for &(a, b) in &pairs {
                next = next.try_sub(&term.left_derivative_at(b).left_derivative_at(a))?;
            }
            if next.is_zero() {
                break;
            }
            term = next.scale(w / k);
            acc = acc.try_add(&term)?;
            k += 1.0;
        }
        let merge = self
            .reg
            .names()
            .iter()
            .map(|n| GElem::generator(&self.reg, n))
            .chain(
                self.reg.names()[..2 * self.n]
                    .iter()
                    .map(|n| GElem::generator(&self.reg, n)),
            )
            .collect::<Result<Vec<_>>>()?;
        acc.substitute_into(&self.reg, &merge)
    }

    /// `(iħ/2)^{2n} exp{−(2i/ħ)[π'(ψ''−ψ) + π''(ψ−ψ') + π(ψ'−ψ'')]}` on the tripled registry.
    fn build_integral_kernel(t: &Arc<Registry>, n: usize, hbar: f64) -> Result<GrassmannElement> {
        let g = |s: String| GElem::generator(t, &s);
        let mut x = GElem::zero(t);
        for j in 1..=n {
            let (pi, psi) = (pi_name(j), psi_name(j));
            let p0 = g(pi.clone())?;
            let p1 = g(format!("{pi}'"))?;
            let p2 = g(format!("{pi}''"))?;
            let s0 = g(psi.clone())?;
            let s1 = g(format!("{psi}'"))?;
            let s2 = g(format!("{psi}''"))?;
            x = x.try_add(&p1.try_mul(&s2.try_sub(&s0)?)?)?;
            x = x.try_add(&p2.try_mul(&s0.try_sub(&s1)?)?)?;
            x = x.try_add(&p0.try_mul(&s1.try_sub(&s2)?)?)?;
        }
        let pref = c(0.0, hbar / 2.0).powu(2 * n as u32);
        Ok(x.scale(c(0.0, -2.0 / hbar)).exp()?.scale(pref))
    }

    /// Integral representation of the star product, evaluated with the Berezin engine.
    ///
    /// The measure `Dπ' Dψ' Dπ'' Dψ''` stands on the left with `∫ dθ θ = 1`.
    pub fn star_integral(
        &self,
        f: &GrassmannElement,
        g: &GrassmannElement,
    ) -> Result<GrassmannElement> {
        self.check(f)?;
        self.check(g)?;
        let t = &self.tripled;
        let f1 = f.substitute_into(t, &self.images(t, "'")?)?;
        let g2 = g.substitute_into(t, &self.images(t, "''")?)?;
        let integrand = f1.try_mul(&g2)?.try_mul(&self.integral_kernel)?;
        let mut order: Vec<String> = Vec::new();
        for suffix in ["''", "'"] {
            order.extend((1..=self.n).map(|j| format!("{}{suffix}", psi_name(j))));
            order.extend((1..=self.n).map(|j| format!("{}{suffix}", pi_name(j))));
        }
        let order: Vec<&str> = order.iter().map(String::as_str).collect();
        let out =
            integrand.berezin_integrate_with(&order, BerezinConvention::Das, MeasureSide::Left)?;
        out.embed_restricted(&self.reg)
    }

    /// Phase-space integral `∫ Dπ Dψ f`, innermost `ψ_1..ψ_n`, then `π_1..π_n`, measure on the left.
    pub fn integrate(&self, f: &GrassmannElement) -> Result<GrassmannElement> {
        self.check(f)?;
        let order: Vec<String> = (1..=self.n)
            .map(psi_name)
            .chain((1..=self.n).map(pi_name))
            .collect();
        let order: Vec<&str> = order.iter().map(String::as_str).collect();
        let out = f.berezin_integrate_with(&order, BerezinConvention::Das, MeasureSide::Left)?;
        out.embed_restricted(&self.ext)
    }

    fn fock_dim(&self) -> usize {
        1 << self.n
    }

    /// `ψ̂_j = √ħ · (Jordan–Wigner string) · annihilator_j`.
    pub fn psi_hat(&self, j: usize) -> Result<FockOperator> {
        if j == 0 || j > self.n {
            return Err(Error::UnknownGenerator(psi_name(j)));
        }
        let dim = self.fock_dim();
        let mut op = FockOperator::zero(self.n, &self.ext);
        let bit = 1usize << (j - 1);
        for col in 0..dim {
            if col & bit == 0 {
                continue;
            }
            let sign = if (col & (bit - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            op.set(col & !bit, col, GElem::scalar(&self.ext, c(sign * self.hbar.sqrt(), 0.0)));
        }
        Ok(op)
    }

    /// `π̂_j = i ψ̂_j†`, so that `{ψ̂_j, π̂_k} = iħ δ_jk`.
    pub fn pi_hat(&self, j: usize) -> Result<FockOperator> {
        let psi = self.psi_hat(j)?;
        let dim = self.fock_dim();
        let mut op = FockOperator::zero(self.n, &self.ext);
        for r in 0..dim {
            for col in 0..dim {
                let v = psi.get(col, r).body();
                if v != c(0.0, 0.0) {
                    op.set(r, col, GElem::scalar(&self.ext, c(0.0, 1.0) * v.conj()));
                }
            }
        }
        Ok(op)
    }

    fn generator_hat(&self, i: usize) -> Result<FockOperator> {
        if i < self.n {
            self.pi_hat(i + 1)
        } else {
            self.psi_hat(i - self.n + 1)
        }
    }

    /// Weyl map: each monomial goes to the antisymmetrised average of its operator orderings,
    /// with external parameters kept as left coefficients.
    pub fn weyl_quantize(&self, f: &GrassmannElement) -> Result<FockOperator> {
        self.check(f)?;
        if self.n > 3 {
            return Err(Error::InvalidArgument("Fock representation limited to n <= 3".into()));
        }
        let base = self.base_mask();
        let mut out = FockOperator::zero(self.n, &self.ext);
        for (mask, coef) in f.terms() {
            let bmask = mask & base;
            let emask = mask & !base;
            // Canonical order puts externals last; moving them to the front costs this sign.
            let swap = (bmask.count_ones() * emask.count_ones()) % 2 == 1;
            let ext_elem = GElem::monomial(&self.reg, emask, c(1.0, 0.0)).embed_restricted(&self.ext)?;
            let coef = if swap { -*coef } else { *coef };
            let op = self.antisymmetrized(bmask)?;
            out = out.add(&op.left_mul_coeff(&ext_elem.scale(coef)))?;
        }
        Ok(out)
    }

    fn antisymmetrized(&self, mask: u64) -> Result<FockOperator> {
        let gens: Vec<usize> = (0..2 * self.n).filter(|i| mask & (1 << i) != 0).collect();
        let mut sum = FockOperator::zero(self.n, &self.ext);
        let mut count = 0.0;
        for perm in permutations(gens.len()) {
            let sign = if permutation_parity(&perm) { -1.0 } else { 1.0 };
            let mut op = FockOperator::identity(self.n, &self.ext);
            for &k in &perm {
                op = op.mul(&self.generator_hat(gens[k])?)?;
            }
            sum = sum.add(&op.scale(c(sign, 0.0)))?;
            count += 1.0;
        }
        Ok(sum.scale(c(1.0 / count, 0.0)))
    }

    /// Inverse Weyl map by solving the linear system over the monomial basis.
    pub fn weyl_symbol(&self, op: &FockOperator) -> Result<GrassmannElement> {
        let basis = self.symbol_basis();
        let dim = self.fock_dim();
        let mats: Vec<FockOperator> = basis
            .iter()
            .map(|b| self.weyl_quantize(b))
            .collect::<Result<_>>()?;
        let size = dim * dim;
        let m = DMatrix::from_fn(size, basis.len(), |row, col| {
            mats[col].get(row / dim, row % dim).body()
        });
        let lu = m.lu();
        let mut masks: Vec<u64> = Vec::new();
        for e in &op.entries {
            for (mk, _) in e.terms() {
                if !masks.contains(&mk) {
                    masks.push(mk);
                }
            }
        }
        let mut out = GElem::zero(&self.reg);
        for emask in masks {
            let rhs = DVector::from_fn(size, |row, _| op.get(row / dim, row % dim).coefficient(emask));
            let sol = lu.solve(&rhs).ok_or(Error::SingularMatrix)?;
            let ext_elem = GElem::monomial(&self.ext, emask, c(1.0, 0.0)).embed(&self.reg)?;
            let mut sym = GElem::zero(&self.reg);
            for (k, b) in basis.iter().enumerate() {
                sym = sym.try_add(&b.scale(sol[k]))?;
            }
            out = out.try_add(&ext_elem.try_mul(&sym)?)?;
        }
        Ok(out.pruned(1e-13))
    }

    /// `(iħ)^{-n} Σ_i A_ii`.
    pub fn trace(&self, op: &FockOperator) -> GrassmannElement {
        op.trace().scale(c(0.0, self.hbar).powi(-(self.n as i32)))
    }

    /// `(iħ)^{-n} Σ_i (−1)^{N_i} A_ii`, the graded trace.
    pub fn supertrace(&self, op: &FockOperator) -> GrassmannElement {
        op.supertrace().scale(c(0.0, self.hbar).powi(-(self.n as i32)))
    }

    /// Wigner symbol `λ_n Q⁻¹(ρ̂)`, with `λ_n` fixed so the vacuum projector integrates to `ħ^{-n}`.
    pub fn wigner(&self, rho: &FockOperator) -> Result<GrassmannElement> {
        if self.n > 2 {
            return Err(Error::InvalidArgument("Wigner symbols limited to n <= 2".into()));
        }
        let mut vac = FockOperator::zero(self.n, &self.ext);
        vac.set(0, 0, GElem::one(&self.ext));
        let norm = self.integrate(&self.weyl_symbol(&vac)?)?.body();
        let lambda = c(self.hbar.powi(-(self.n as i32)), 0.0) / norm;
        Ok(self.weyl_symbol(rho)?.scale(lambda))
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn permutation_parity(p: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

/// `2ⁿ × 2ⁿ` matrix over the Grassmann algebra of external parameters, basis by occupation bits.
///
/// Entries are left coefficients of the basis operators `|i⟩⟨j|`, whose parity is that of
/// the total occupation change; products carry the matching Koszul sign.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    n: usize,
    ext: Arc<Registry>,
    entries: Vec<GrassmannElement>,
}

impl FockOperator {
    pub fn zero(n: usize, ext: &Arc<Registry>) -> Self {
        let dim = 1 << n;
        Self {
            n,
            ext: ext.clone(),
            entries: vec![GElem::zero(ext); dim * dim],
        }
    }

    pub fn identity(n: usize, ext: &Arc<Registry>) -> Self {
        let mut out = Self::zero(n, ext);
        for i in 0..(1 << n) {
            out.set(i, i, GElem::one(ext));
        }
        out
    }

    /// Numeric matrix with no external dependence.
    pub fn from_complex(n: usize, ext: &Arc<Registry>, m: &DMatrix<Complex64>) -> Self {
        let mut out = Self::zero(n, ext);
        for i in 0..out.dim() {
            for j in 0..out.dim() {
                out.set(i, j, GElem::scalar(ext, m[(i, j)]));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &GrassmannElement {
        &self.entries[i * self.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GrassmannElement) {
        let d = self.dim();
        self.entries[i * d + j] = v;
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.ext.as_ref() != other.ext.as_ref() {
            return Err(Error::RegistryMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (o, e) in out.entries.iter_mut().zip(&other.entries) {
            *o = o.try_add(e)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e = e.scale(s);
        }
        out
    }

    /// Left multiplication by a Grassmann coefficient.
    pub fn left_mul_coeff(&self, k: &GrassmannElement) -> Self {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e = k * &*e;
        }
        out
    }

    /// `(c E_ij)(d E_jl) = c d (−1)^{|d|(p_i + p_j)} E_il`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let dim = self.dim();
        let mut out = Self::zero(self.n, &self.ext);
        for i in 0..dim {
            for l in 0..dim {
                let mut acc = GElem::zero(&self.ext);
                for j in 0..dim {
                    let a = self.get(i, j);
                    let b = other.get(j, l);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    let b = if (i.count_ones() + j.count_ones()) % 2 == 1 {
                        let even = b.filter_monomials(|m| m.count_ones() % 2 == 0);
                        let odd = b.filter_monomials(|m| m.count_ones() % 2 == 1);
                        even.try_sub(&odd)?
                    } else {
                        b.clone()
                    };
                    acc = acc.try_add(&a.try_mul(&b)?)?;
                }
                out.set(i, l, acc);
            }
        }
        Ok(out)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn trace(&self) -> GrassmannElement {
        (0..self.dim()).fold(GElem::zero(&self.ext), |acc, i| &acc + self.get(i, i))
    }

    pub fn supertrace(&self) -> GrassmannElement {
        (0..self.dim()).fold(GElem::zero(&self.ext), |acc, i| {
            if i.count_ones() % 2 == 1 {
                &acc - self.get(i, i)
            } else {
                &acc + self.get(i, i)
            }
        })
    }

    /// Largest coefficient difference from `other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.distance(b))
            .try_fold(0.0, |m, d| Ok(f64::max(m, d?)))
    }

    /// Numeric matrix of the scalar parts.
    pub fn body_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.get(i, j).body())
    }
}
