//! Star exponentials: closed forms, propagator transforms, and the fermionic
//! naive and meticulous schemes.

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::grassmann::{BerezinConvention, GElem, MeasureSide, Parity, Registry};
use crate::moyal::{gaussian_star, ho_hamiltonian, ho_wigner_symbol, GaussianSymbol, NumPoly};
use crate::propagators::{
    BosonicPropagatorSpec, FermiBasis, FermiPropagator, QuadraticSystem, ALPHA, ALPHA_STAR,
    RK4_STEPS,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Which computation produced a bosonic star-exponential value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarExpRoute {
    ClosedForm,
    FromPropagator,
    Series,
}

impl StarExpRoute {
    pub fn tag(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::FromPropagator => "from-propagator",
            Self::Series => "series",
        }
    }
}

/// A bosonic star-exponential value with its provenance and validity window in `ωt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarExpResult {
    pub value: Complex64,
    pub route: StarExpRoute,
    pub window: (f64, f64),
}

fn h_ho(m: f64, omega: f64, q: f64, p: f64) -> f64 {
    p * p / (2.0 * m) + 0.5 * m * omega * omega * q * q
}

/// `sec(ωt/2) exp[(2H/iωħ) tan(ωt/2)]`.
pub fn ho_star_exp_closed(m: f64, omega: f64, q: f64, p: f64, t: f64, hbar: f64) -> Result<Complex64> {
    let half = omega * t / 2.0;
    let cs = half.cos();
    if cs.abs() < 1e-12 {
        return Err(Error::Caustic(format!("cos(omega t / 2) vanishes at omega t = {}", omega * t)));
    }
    let h = h_ho(m, omega, q, p);
    Ok(c(0.0, -2.0 * h * half.tan() / (omega * hbar)).exp() / cs)
}

/// Closed form as a Gaussian symbol in `(q, p)` at fixed `t`.
pub fn ho_star_exp_symbol(m: f64, omega: f64, t: f64, hbar: f64) -> Result<GaussianSymbol> {
    let half = omega * t / 2.0;
    let cs = half.cos();
    if cs.abs() < 1e-12 {
        return Err(Error::Caustic(format!("cos(omega t / 2) vanishes at omega t = {}", omega * t)));
    }
    let k = c(0.0, -2.0 * half.tan() / (omega * hbar));
    let z = c(0.0, 0.0);
    Ok(GaussianSymbol {
        prefactor: NumPoly::constant(c(1.0 / cs, 0.0)),
        a: k * (0.5 * m * omega * omega),
        b: z,
        c: k * (0.5 / m),
        u: z,
        v: z,
        w: z,
        hbar,
    })
}

/// Imaginary-time form `sech(ωτ/2) exp[−(2H/ωħ) tanh(ωτ/2)]`.
pub fn ho_star_exp_wick(m: f64, omega: f64, q: f64, p: f64, tau: f64, hbar: f64) -> f64 {
    let half = omega * tau / 2.0;
    (-2.0 * h_ho(m, omega, q, p) * half.tanh() / (omega * hbar)).exp() / half.cosh()
}

/// `ln sech(x)` without overflow.
pub fn ln_sech(x: f64) -> f64 {
    let x = x.abs();
    -x + std::f64::consts::LN_2 - (-2.0 * x).exp().ln_1p()
}

/// Imaginary-time symbol of the quadratic Hamiltonian `a p² + b x² + 2c xp`, with the
/// prefactor kept as a logarithm: `ln sech(Ωτ) − (H/ħΩ) tanh(Ωτ)`, `Ω = √(ab − c²)`.
pub fn quadratic_star_exp_wick(a: f64, b: f64, cc: f64, tau: f64, hbar: f64) -> Result<(f64, GaussianSymbol)> {
    let disc = a * b - cc * cc;
    if !(disc > 0.0) || !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quadratic form needs a > 0 and ab - c^2 > 0 (got {disc})"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("tau must be positive".into()));
    }
    let om = disc.sqrt();
    let k = -(om * tau).tanh() / (hbar * om);
    let z = c(0.0, 0.0);
    let sym = GaussianSymbol {
        prefactor: NumPoly::constant(c(1.0, 0.0)),
        a: c(k * b, 0.0),
        b: c(2.0 * k * cc, 0.0),
        c: c(k * a, 0.0),
        u: z,
        v: z,
        w: z,
        hbar,
    };
    Ok((ln_sech(om * tau), sym))
}

/// `∫ exp(α x² + β x) dx = √(π/(−α)) exp(−β²/4α)`, principal branch, `Re α ≤ 0`.
pub fn complex_gaussian_integral(alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    if alpha.re > 1e-14 * alpha.norm() || alpha.norm() == 0.0 {
        return Err(Error::InvalidArgument("Gaussian integral needs Re(alpha) <= 0, alpha != 0".into()));
    }
    Ok((c(PI, 0.0) / -alpha).sqrt() * (-beta * beta / (4.0 * alpha)).exp())
}

/// Quadratic fit `e(q') = e₀ + e₁ q' + e₂ q'²` from three samples.
fn fit_quadratic(e: impl Fn(f64) -> Result<Complex64>) -> Result<[Complex64; 3]> {
    let (em, e0, ep) = (e(-1.0)?, e(0.0)?, e(1.0)?);
    Ok([e0, 0.5 * (ep - em), 0.5 * (ep + em) - e0])
}

/// `2∫e^{−2iq'p/ħ} K(q+q', t; q−q', 0) dq'` done as a complex Gaussian integral.
pub fn star_exp_from_propagator_bosonic(
    spec: &BosonicPropagatorSpec,
    q: f64,
    p: f64,
    t: f64,
) -> Result<Complex64> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let hbar = spec.hbar();
    let i = c(0.0, 1.0);
    let (pref, coeffs) = match spec {
        BosonicPropagatorSpec::Ho { m, omega, hbar } => {
            let wt = omega * t;
            if !(wt > 0.0 && wt < PI) {
                return Err(Error::Caustic(format!("omega t = {wt} outside (0, pi)")));
            }
            let s = wt.sin();
            let pref = (c(m * omega, 0.0) / (2.0 * PI * hbar * s * i)).sqrt();
            let k = i * (m * omega / (2.0 * hbar * s));
            let exponent = |qp: f64| -> Result<Complex64> {
                let (xf, x0) = (q + qp, q - qp);
                Ok(k * ((xf * xf + x0 * x0) * wt.cos() - 2.0 * xf * x0))
            };
            (pref, fit_quadratic(exponent)?)
        }
        BosonicPropagatorSpec::Quadratic { .. } => {
            let sys = QuadraticSystem::solve(spec, 0.0, t, RK4_STEPS)?;
            let pref = sys.prefactor()?;
            let exponent = |qp: f64| -> Result<Complex64> { Ok(i * sys.action(q + qp, q - qp)? / hbar) };
            (pref, fit_quadratic(exponent)?)
        }
    };
    let beta = coeffs[1] - i * (2.0 * p / hbar);
    Ok(2.0 * pref * coeffs[0].exp() * complex_gaussian_integral(coeffs[2], beta)?)
}

/// Bosonic star exponential of the oscillator by the selected route.
pub fn ho_star_exp(
    m: f64,
    omega: f64,
    q: f64,
    p: f64,
    t: f64,
    hbar: f64,
    route: StarExpRoute,
) -> Result<StarExpResult> {
    let value = match route {
        StarExpRoute::ClosedForm => ho_star_exp_closed(m, omega, q, p, t, hbar)?,
        StarExpRoute::FromPropagator => {
            star_exp_from_propagator_bosonic(&BosonicPropagatorSpec::Ho { m, omega, hbar }, q, p, t)?
        }
        StarExpRoute::Series => {
            crate::moyal::star_power_series_exp(&ho_hamiltonian(m, omega), t, 12, (q, p), hbar)
        }
    };
    let window = match route {
        StarExpRoute::ClosedForm => (-PI, PI),
        StarExpRoute::FromPropagator => (0.0, PI),
        StarExpRoute::Series => (-1.0, 1.0),
    };
    Ok(StarExpResult { value, route, window })
}

/// `max |H ⋆ E − iħ ∂_t E|` over the samples, `∂_t` by central difference with step `dt`.
pub fn dynamical_residual(
    m: f64,
    omega: f64,
    t: f64,
    hbar: f64,
    dt: f64,
    samples: &[(f64, f64)],
) -> Result<f64> {
    let e = ho_star_exp_symbol(m, omega, t, hbar)?;
    let h = GaussianSymbol::from_poly(&ho_hamiltonian(m, omega), hbar);
    let he = gaussian_star(&h, &e, None)?;
    let mut worst: f64 = 0.0;
    for &(q, p) in samples {
        let d = (ho_star_exp_closed(m, omega, q, p, t + dt, hbar)?
            - ho_star_exp_closed(m, omega, q, p, t - dt, hbar)?)
            / (2.0 * dt);
        worst = worst.max((he.eval(q, p) - c(0.0, hbar) * d).norm());
    }
    Ok(worst)
}

/// `½ csch(x)`.
pub fn half_csch(x: f64) -> f64 {
    0.5 / x.sinh()
}

/// `(1/2πħ) ∫ Exp⋆(−τH/ħ) dx dp` for the oscillator, by Gaussian integration, and the
/// partial spectral sum `Σ_{n<N} e^{−ωτ(n+½)}`.
pub fn fourier_dirichlet_check(omega: f64, tau: f64, n: usize, hbar: f64) -> Result<(f64, f64)> {
    if !(omega * tau > 0.0) {
        return Err(Error::InvalidArgument("omega tau must be positive".into()));
    }
    let lhs = ho_trace_ln(1.0, omega, tau, hbar)?.exp();
    let partial = (0..n).map(|k| (-tau * omega * (k as f64 + 0.5)).exp()).sum();
    Ok((lhs, partial))
}

/// `ln[(1/2πħ) ∫ Exp⋆(−τH_ho/ħ) dx dp]` by Gaussian integration of the imaginary-time symbol.
pub fn ho_trace_ln(m: f64, omega: f64, tau: f64, hbar: f64) -> Result<f64> {
    if !(m > 0.0 && omega > 0.0 && tau > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidArgument("m, omega, tau and hbar must be positive".into()));
    }
    let half = omega * tau / 2.0;
    let k = -2.0 * half.tanh() / (omega * hbar);
    let z = c(0.0, 0.0);
    let sym = GaussianSymbol {
        prefactor: NumPoly::constant(c(1.0, 0.0)),
        a: c(k * 0.5 * m * omega * omega, 0.0),
        b: z,
        c: c(k * 0.5 / m, 0.0),
        u: z,
        v: z,
        w: z,
        hbar,
    };
    let ln_int = sym.ln_phase_space_integral()?;
    Ok(ln_sech(half) + ln_int.re - (2.0 * PI * hbar).ln())
}

/// `ρ_n(q, p) = ((−1)ⁿ/πħ) e^{−2H/ωħ} L_n(4H/ωħ)`.
pub fn wigner_laguerre(n: u32, m: f64, omega: f64, q: f64, p: f64, hbar: f64) -> f64 {
    ho_wigner_symbol(n, m, omega, hbar).eval(q, p).re
}

/// Fermionic star-exponential scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermiScheme {
    Naive,
    Meticulous,
}

/// Order of the two factors in the naive Fourier kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOrder {
    /// `exp{−(2i/ħ) Ψ' π}`.
    SourceFirst,
    /// `exp{−(2i/ħ) π Ψ'}`.
    MomentumFirst,
}

pub const PSI: &str = "Psi";
pub const PI_SYM: &str = "Pi";
const PSI_P: &str = "Psi'";
const PI_P: &str = "Pi'";

/// Fermionic star exponential over `{Π, Ψ, α, α*}` with time-dependent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FermiStarExp {
    pub value: GElem<ExpPoly>,
    pub scheme: FermiScheme,
    pub omega: f64,
    pub hbar: f64,
}

impl FermiStarExp {
    pub fn parity(&self) -> Parity {
        self.value.pruned(1e-14).parity()
    }

    pub fn registry(&self) -> &Arc<Registry> {
        self.value.registry()
    }

    pub fn at(&self, t: f64) -> GElem<Complex64> {
        let omega = self.omega;
        self.value.map_coeffs(|c| c.eval(Complex64::new(t, 0.0), omega))
    }
}

/// Registry `{Π, Ψ, α, α*}` of fermionic star exponentials.
pub fn symbol_registry() -> Arc<Registry> {
    Registry::new(&[PI_SYM, PSI, ALPHA, ALPHA_STAR]).expect("static registry")
}

fn g(reg: &Arc<Registry>, name: &str) -> GElem<ExpPoly> {
    GElem::generator(reg, name).expect("generator present")
}

fn check_basis(k: &FermiPropagator, basis: FermiBasis) -> Result<()> {
    let expected = crate::propagators::fermi_registry(basis);
    if k.basis != basis || k.registry().names() != expected.names() {
        return Err(Error::RegistryMismatch);
    }
    Ok(())
}

/// `∫ exp{−(2i/ħ) Ψ'π} K(Ψ+Ψ', t; Ψ−Ψ', 0) dΨ'` for one degree of freedom.
pub fn fermi_star_exp_naive(k: &FermiPropagator, order: KernelOrder) -> Result<FermiStarExp> {
    check_basis(k, FermiBasis::Naive)?;
    let hbar = k.hbar;
    let work = Registry::new(&[PI_SYM, PSI, PSI_P, ALPHA, ALPHA_STAR])?;
    let (pi, psi, psip) = (g(&work, PI_SYM), g(&work, PSI), g(&work, PSI_P));
    let images = [
        &psi + &psip,
        &psi - &psip,
        g(&work, ALPHA),
        g(&work, ALPHA_STAR),
    ];
    let kk = k.kernel.substitute_into(&work, &images)?;
    let pair = match order {
        KernelOrder::SourceFirst => &psip * &pi,
        KernelOrder::MomentumFirst => &pi * &psip,
    };
    let kernel = pair.scale(c(0.0, -2.0 / hbar)).exp()?;
    let integrand = kernel.try_mul(&kk)?;
    let out = integrand.berezin_integrate_with(&[PSI_P], BerezinConvention::Das, MeasureSide::Left)?;
    Ok(FermiStarExp {
        value: out.embed_restricted(&symbol_registry())?,
        scheme: FermiScheme::Naive,
        omega: k.omega,
        hbar,
    })
}

/// `C(n, ħ) = 2^{n−1} ħ^{n+1} i^{3−3n} / (5·3^{n−1})`.
pub fn meticulous_constant(n: u32, hbar: f64) -> Complex64 {
    let n_i = n as i32;
    c(0.0, 1.0).powi(3 - 3 * n_i) * (2f64.powi(n_i - 1) * hbar.powi(n_i + 1) / (5.0 * 3f64.powi(n_i - 1)))
}

/// `C` recomputed from the normalization chain: `C (−3i/2ħ)^n · I = 1`, where `I` is the
/// top-form coefficient of `∫Dχ'Dη' exp{(i/ħ)(10/3) η'χ'}`, evaluated by the Grassmann engine.
pub fn meticulous_constant_from_chain(hbar: f64) -> Result<Complex64> {
    let reg = Registry::new(&["eta'", "chi'"])?;
    let eta: GElem = GElem::generator(&reg, "eta'")?;
    let chi: GElem = GElem::generator(&reg, "chi'")?;
    let weight = (&eta * &chi).scale(c(0.0, 10.0 / (3.0 * hbar))).exp()?;
    let top = weight
        .berezin_integrate_with(&["eta'", "chi'"], BerezinConvention::Das, MeasureSide::Left)?
        .body();
    Ok(c(1.0, 0.0) / (c(0.0, -3.0 / (2.0 * hbar)) * top))
}

/// `C exp{(i/ħ)ΠΨ} ∫DΨ'DΠ' exp{−(2i/ħ)Π'Ψ'} K(Π+Π', t; Ψ−Ψ')` for one degree of freedom.
pub fn fermi_star_exp_meticulous(k: &FermiPropagator) -> Result<FermiStarExp> {
    check_basis(k, FermiBasis::Meticulous)?;
    let hbar = k.hbar;
    let work = Registry::new(&[PI_SYM, PSI, PI_P, PSI_P, ALPHA, ALPHA_STAR])?;
    let (pi, psi, pip, psip) = (g(&work, PI_SYM), g(&work, PSI), g(&work, PI_P), g(&work, PSI_P));
    let images = [
        &pi + &pip,
        &psi - &psip,
        g(&work, ALPHA),
        g(&work, ALPHA_STAR),
    ];
    let kk = k.kernel.substitute_into(&work, &images)?;
    let kernel = (&pip * &psip).scale(c(0.0, -2.0 / hbar)).exp()?;
    let integrated = kernel
        .try_mul(&kk)?
        .berezin_integrate_with(&[PI_P, PSI_P], BerezinConvention::Das, MeasureSide::Left)?
        .embed_restricted(&symbol_registry())?;
    let reg = symbol_registry();
    let dress = (&g(&reg, PI_SYM) * &g(&reg, PSI)).scale(c(0.0, 1.0 / hbar)).exp()?;
    let value = dress
        .try_mul(&integrated)?
        .scale(meticulous_constant(1, hbar));
    let out = FermiStarExp {
        value,
        scheme: FermiScheme::Meticulous,
        omega: k.omega,
        hbar,
    };
    if out.parity() != Parity::Even {
        return Err(Error::InvalidArgument(
            "meticulous star exponential lost even parity".into(),
        ));
    }
    Ok(out)
}

/// Star exponential of a kernel in the scheme matching its basis.
pub fn fermi_star_exp(k: &FermiPropagator) -> Result<FermiStarExp> {
    match k.basis {
        FermiBasis::Naive => fermi_star_exp_naive(k, KernelOrder::SourceFirst),
        FermiBasis::Meticulous => fermi_star_exp_meticulous(k),
    }
}

/// Printed HO naive result `e^{iωt/2}(−(2i/ħ)π + 2e^{−iωt}Ψ)`.
pub fn ho_naive_reference(hbar: f64) -> GElem<ExpPoly> {
    let reg = symbol_registry();
    let pi = g(&reg, PI_SYM).scale_by(&ExpPoly::term(c(0.0, -2.0 / hbar), -1, 0));
    let psi = g(&reg, PSI).scale_by(&ExpPoly::term(c(2.0, 0.0), 1, 0));
    &pi + &psi
}

/// Printed HO meticulous result
/// `−(ħ²/5)[e^{iΠΨ/ħ}(e^{−iωt/2} + (2i/ħ)e^{iωt/2}) + (2i/ħ)ΠΨ e^{−iωt/2}]`.
pub fn ho_meticulous_reference(hbar: f64) -> Result<GElem<ExpPoly>> {
    let reg = symbol_registry();
    let pp = &g(&reg, PI_SYM) * &g(&reg, PSI);
    let dress = pp.scale(c(0.0, 1.0 / hbar)).exp()?;
    let inner = ExpPoly::phase(1) + ExpPoly::term(c(0.0, 2.0 / hbar), -1, 0);
    let bracket = &dress.scale_by(&inner) + &pp.scale_by(&ExpPoly::term(c(0.0, 2.0 / hbar), 1, 0));
    Ok(bracket.scale(c(-hbar * hbar / 5.0, 0.0)))
}

/// Driven naive result with the `|α|²` term entering as `(1 − f)`:
/// `2e^{−iωt}Ψ − (2i/ħ)(1 − f)π − (2i/ħω)(1 − e^{−iωt})(α + α*)πΨ − (1/ω)(1 − e^{−iωt})(α − α*)`.
pub fn driven_naive_reference(omega: f64, hbar: f64) -> GElem<ExpPoly> {
    let reg = symbol_registry();
    let (pi, psi, a, ac) = (g(&reg, PI_SYM), g(&reg, PSI), g(&reg, ALPHA), g(&reg, ALPHA_STAR));
    let s = crate::propagators::source_factor(omega);
    let f = (&ac * &a).scale_by(&crate::propagators::driven_f_factor(omega));
    let one = GElem::one(&reg);
    let t1 = psi.scale_by(&ExpPoly::term(c(2.0, 0.0), 2, 0));
    let t2 = (&(&one - &f) * &pi).scale(c(0.0, -2.0 / hbar));
    let t3 = (&(&a + &ac) * &(&pi * &psi)).scale_by(&s).scale(c(0.0, -2.0 / hbar));
    let t4 = (&a - &ac).scale_by(&s).neg();
    &(&(&t1 + &t2) + &t3) + &t4
}

/// Printed driven meticulous result:
/// `−(ħ²/5)[e^{iΠΨ/ħ}(e^{−iωt} + (2i/ħ)(1 − f)) + (2i/ħ)(ΠΨ e^{−iωt} + (Πα* + Ψα)s)]`.
pub fn driven_meticulous_reference(omega: f64, hbar: f64) -> Result<GElem<ExpPoly>> {
    let reg = symbol_registry();
    let (pi, psi, a, ac) = (g(&reg, PI_SYM), g(&reg, PSI), g(&reg, ALPHA), g(&reg, ALPHA_STAR));
    let s = crate::propagators::source_factor(omega);
    let f = (&ac * &a).scale_by(&crate::propagators::driven_f_factor(omega));
    let one = GElem::one(&reg);
    let pp = &pi * &psi;
    let dress = pp.scale(c(0.0, 1.0 / hbar)).exp()?;
    let inner = &GElem::scalar(&reg, ExpPoly::phase(2)) + &(&one - &f).scale(c(0.0, 2.0 / hbar));
    let src = (&(&pi * &ac) + &(&psi * &a)).scale_by(&s);
    let tail = (&pp.scale_by(&ExpPoly::phase(2)) + &src).scale(c(0.0, 2.0 / hbar));
    Ok((&(&dress * &inner) + &tail).scale(c(-hbar * hbar / 5.0, 0.0)))
}

/// Largest coefficient difference between two time-dependent elements at the given time.
pub fn distance_at(a: &GElem<ExpPoly>, b: &GElem<ExpPoly>, t: f64, omega: f64) -> Result<f64> {
    let ev = |x: &GElem<ExpPoly>| x.map_coeffs(|cf| cf.eval(c(t, 0.0), omega));
    ev(a).distance(&ev(b))
}
