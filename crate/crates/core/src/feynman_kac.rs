//! Ground-state energies from imaginary-time phase-space traces.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::grassmann::{BerezinConvention, GElem, MeasureSide, Registry};
use crate::propagators::{
    driven_matrix_and_spectrum, fermi_driven_propagator, fermi_ho_propagator, DrivenSpectrum,
    FermiBasis, SourceExpansion, ALPHA, ALPHA_STAR,
};
use crate::star_exp::{
    fermi_star_exp_meticulous, fermi_star_exp_naive, half_csch, ho_trace_ln, quadratic_star_exp_wick,
    FermiScheme, FermiStarExp, KernelOrder, PI_SYM, PSI,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type LnFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

enum TraceKind {
    /// `Z(τ)` is an exponential polynomial in `t` continued to `t = −iτ`.
    ExpPoly { z: ExpPoly, omega: f64 },
    /// `ln|Z(τ)|` supplied directly.
    Ln(LnFn),
    Constant(Complex64),
}

/// Phase-space trace `τ ↦ Z(τ)` with a tag and the parameters that produced it.
pub struct TraceFunction {
    pub tag: String,
    pub params: Vec<(String, f64)>,
    kind: TraceKind,
}

impl fmt::Debug for TraceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TraceFunction")
            .field("tag", &self.tag)
            .field("params", &self.params)
            .finish()
    }
}

impl TraceFunction {
    pub fn from_exppoly(tag: &str, z: ExpPoly, omega: f64) -> Self {
        Self {
            tag: tag.into(),
            params: vec![("omega".into(), omega)],
            kind: TraceKind::ExpPoly { z, omega },
        }
    }

    pub fn from_ln(tag: &str, f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { tag: tag.into(), params: Vec::new(), kind: TraceKind::Ln(Arc::new(f)) }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { tag: "constant".into(), params: Vec::new(), kind: TraceKind::Constant(c) }
    }

    pub fn with_param(mut self, name: &str, v: f64) -> Self {
        self.params.push((name.into(), v));
        self
    }

    /// The exponential polynomial behind the trace, when there is one.
    pub fn exppoly(&self) -> Option<&ExpPoly> {
        match &self.kind {
            TraceKind::ExpPoly { z, .. } => Some(z),
            _ => None,
        }
    }

    /// `Z(τ)`; may overflow for large τ, use [`TraceFunction::ln_abs`] there.
    pub fn value(&self, tau: f64) -> Result<Complex64> {
        Ok(match &self.kind {
            TraceKind::ExpPoly { z, omega } => z.eval_imag_time(tau, *omega),
            TraceKind::Ln(f) => Complex64::new(f(tau)?.exp(), 0.0),
            TraceKind::Constant(c) => *c,
        })
    }

    /// `ln|Z(τ)|`.
    pub fn ln_abs(&self, tau: f64) -> Result<f64> {
        match &self.kind {
            TraceKind::ExpPoly { z, omega } => Ok(z.ln_abs_imag_time(tau, *omega)),
            TraceKind::Ln(f) => f(tau),
            TraceKind::Constant(c) => Ok(c.norm().ln()),
        }
    }
}

/// Geometric schedule `τ_k = τ₀ growthᵏ` for the limit estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub tau0: f64,
    pub growth: f64,
    pub max_steps: usize,
    pub tol: f64,
    /// Convergence is only declared once `τ ≥ min_tau`.
    pub min_tau: f64,
}

impl Schedule {
    pub fn bosonic() -> Self {
        Self { tau0: 1.0, growth: 2.0, max_steps: 30, tol: 1e-6, min_tau: 0.0 }
    }

    /// Runs to `τ = 1024`: the driven traces approach their slope only like `1/τ`.
    pub fn fermionic() -> Self {
        Self { tau0: 1.0, growth: 2.0, max_steps: 10, tol: 2e-3, min_tau: 1024.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.growth > 1.0 && self.max_steps >= 2 && self.tol > 0.0)
            || !(self.min_tau <= self.taus().last().copied().unwrap_or(0.0))
        {
            return Err(Error::InvalidArgument(
                "schedule needs tau0 > 0, growth > 1, max_steps >= 2, tol > 0, min_tau within reach"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..=self.max_steps)
            .map(|k| self.tau0 * self.growth.powi(k as i32))
            .collect()
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::bosonic()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundEnergyEstimate {
    pub value: f64,
    pub taus: Vec<f64>,
    pub secants: Vec<f64>,
    pub differences: Vec<f64>,
    pub converged: bool,
}

/// `E₀ = −ħ lim d ln|Z|/dτ`, by secants of `ln|Z|` on a geometric schedule.
pub fn ground_energy_limit(z: &TraceFunction, hbar: f64, schedule: &Schedule) -> Result<GroundEnergyEstimate> {
    schedule.validate()?;
    if !(hbar > 0.0) {
        return Err(Error::InvalidArgument("hbar must be positive".into()));
    }
    let mut taus = Vec::new();
    let mut secants: Vec<f64> = Vec::new();
    let mut differences = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for tau in schedule.taus() {
        let l = z.ln_abs(tau)?;
        if !l.is_finite() {
            return Err(Error::ZeroTrace(tau));
        }
        taus.push(tau);
        if let Some((t0, l0)) = prev {
            let s = (l - l0) / (tau - t0);
            if let Some(&last) = secants.last() {
                let d: f64 = s - last;
                differences.push(d.abs());
                if d.abs() < schedule.tol && tau >= schedule.min_tau {
                    secants.push(s);
                    return Ok(GroundEnergyEstimate {
                        value: -hbar * s,
                        taus,
                        secants,
                        differences,
                        converged: true,
                    });
                }
            }
            secants.push(s);
        }
        prev = Some((tau, l));
    }
    Err(Error::NotConverged {
        steps: secants.len(),
        last: -hbar * secants.last().copied().unwrap_or(f64::NAN),
    })
}

/// `(1/2πħ)∫ Exp⋆(−τH_ho/ħ) dx dp` by Gaussian integration.
pub fn fk_trace_ho(omega: f64, tau: f64, hbar: f64) -> Result<f64> {
    Ok(ho_trace_ln(1.0, omega, tau, hbar)?.exp())
}

/// Trace of the oscillator as a function of τ, in logarithmic form.
pub fn fk_trace_ho_function(omega: f64, hbar: f64) -> Result<TraceFunction> {
    if !(omega > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidArgument("omega and hbar must be positive".into()));
    }
    Ok(TraceFunction::from_ln("ho", move |tau| ho_trace_ln(1.0, omega, tau, hbar))
        .with_param("omega", omega)
        .with_param("hbar", hbar))
}

fn quadratic_trace_ln(a: f64, b: f64, c: f64, tau: f64, hbar: f64) -> Result<f64> {
    let (ln_pref, sym) = quadratic_star_exp_wick(a, b, c, tau, hbar)?;
    Ok(ln_pref + sym.ln_phase_space_integral()?.re - (2.0 * PI * hbar).ln())
}

/// `(1/2πħ)∫ Exp⋆(−τH/ħ) dx dp` for `H = a p² + b x² + 2c xp`.
pub fn fk_trace_quadratic(a: f64, b: f64, c: f64, tau: f64, hbar: f64) -> Result<f64> {
    Ok(quadratic_trace_ln(a, b, c, tau, hbar)?.exp())
}

pub fn fk_trace_quadratic_function(a: f64, b: f64, c: f64, hbar: f64) -> Result<TraceFunction> {
    quadratic_trace_ln(a, b, c, 1.0, hbar)?;
    Ok(TraceFunction::from_ln("quadratic", move |tau| quadratic_trace_ln(a, b, c, tau, hbar))
        .with_param("a", a)
        .with_param("b", b)
        .with_param("c", c)
        .with_param("hbar", hbar))
}

/// `½csch(ωτ/2)` rewritten as `e^{−ωτ/2}/(1 − e^{−ωτ})`.
pub fn ho_trace_geometric(omega: f64, tau: f64) -> f64 {
    (-omega * tau / 2.0).exp() / (-(-omega * tau).exp_m1())
}

pub fn ho_trace_csch(omega: f64, tau: f64) -> f64 {
    half_csch(omega * tau / 2.0)
}

/// How a fermionic star exponential is integrated over `(Π, Ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceScheme {
    /// Naive symbol multiplied on the right by `(Π − Ψ)`.
    NaiveRmd,
    /// Naive symbol integrated as it stands.
    NaiveBare,
    Meticulous,
}

impl TraceScheme {
    pub fn tag(&self) -> &'static str {
        match self {
            TraceScheme::NaiveRmd => "naive+rmd",
            TraceScheme::NaiveBare => "naive",
            TraceScheme::Meticulous => "meticulous",
        }
    }
}

/// Scalar trace of a fermionic star exponential plus whatever odd residue survived.
#[derive(Debug)]
pub struct FermiTrace {
    pub trace: TraceFunction,
    /// Terms linear in `α`, `α*` left after integration, before the `1/2πħ` factor.
    pub odd_residue: GElem<ExpPoly>,
    /// Largest coefficient in `odd_residue`.
    pub anomaly: f64,
    /// Coefficient of `α*α` that was replaced by `g²`.
    pub pair_coefficient: ExpPoly,
}

impl FermiTrace {
    /// Fails when the odd residue exceeds `tol`.
    pub fn require_clean(&self, tol: f64) -> Result<&TraceFunction> {
        if self.anomaly > tol {
            return Err(Error::ParityAnomaly(self.anomaly));
        }
        Ok(&self.trace)
    }
}

/// `(1/2πħ)∫ DΠ DΨ Exp⋆` with `α*α ↦ g²`, continued to imaginary time.
pub fn fk_fermi_trace(se: &FermiStarExp, scheme: TraceScheme, g: f64) -> Result<FermiTrace> {
    let expected = match scheme {
        TraceScheme::NaiveRmd | TraceScheme::NaiveBare => FermiScheme::Naive,
        TraceScheme::Meticulous => FermiScheme::Meticulous,
    };
    if se.scheme != expected {
        return Err(Error::InvalidArgument(format!(
            "trace scheme {} needs a {:?} star exponential",
            scheme.tag(),
            expected
        )));
    }
    let reg = se.registry();
    let integrand = if scheme == TraceScheme::NaiveRmd {
        let rmd = GElem::generator(reg, PI_SYM)?.try_sub(&GElem::generator(reg, PSI)?)?;
        se.value.try_mul(&rmd)?
    } else {
        se.value.clone()
    };
    let integrated = integrand
        .berezin_integrate_with(&[PI_SYM, PSI], BerezinConvention::Das, MeasureSide::Left)?;
    let target = Registry::new(&[ALPHA, ALPHA_STAR])?;
    let reduced = integrated.embed_restricted(&target)?;
    let odd_residue = reduced.filter_monomials(|m| m.count_ones() == 1);
    let anomaly = odd_residue
        .terms()
        .map(|(_, c)| c.magnitude())
        .fold(0.0, f64::max);
    // Stored monomial is α·α* = −α*α.
    let pair = -reduced.coefficient_of(&[ALPHA, ALPHA_STAR])?;
    let scalar = reduced.body() + pair.scale(Complex64::new(g * g, 0.0));
    let z = scalar.scale(Complex64::new(1.0 / (2.0 * PI * se.hbar), 0.0));
    let trace = TraceFunction::from_exppoly(scheme.tag(), z, se.omega)
        .with_param("g", g)
        .with_param("hbar", se.hbar);
    Ok(FermiTrace { trace, odd_residue, anomaly, pair_coefficient: pair })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermiSystem {
    Ho,
    Driven,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiFkOptions {
    pub schedule: Schedule,
    pub expansion: SourceExpansion,
    pub anomaly_tol: f64,
}

impl Default for FermiFkOptions {
    fn default() -> Self {
        Self { schedule: Schedule::fermionic(), expansion: SourceExpansion::Linear, anomaly_tol: 1e-12 }
    }
}

/// Builds the Wick-rotated trace for a fermionic system.
///
/// The driven system at `ω = 0` has no oscillating factor; its trace is taken as constant.
pub fn fermi_trace_for(
    system: FermiSystem,
    scheme: FermiScheme,
    omega: f64,
    g: f64,
    hbar: f64,
    expansion: SourceExpansion,
) -> Result<FermiTrace> {
    if !(hbar > 0.0) || !omega.is_finite() || !(g >= 0.0) {
        return Err(Error::InvalidArgument("need hbar > 0, finite omega and g >= 0".into()));
    }
    let basis = match scheme {
        FermiScheme::Naive => FermiBasis::Naive,
        FermiScheme::Meticulous => FermiBasis::Meticulous,
    };
    let trace_scheme = match scheme {
        FermiScheme::Naive => TraceScheme::NaiveRmd,
        FermiScheme::Meticulous => TraceScheme::Meticulous,
    };
    let kernel = match system {
        FermiSystem::Ho => fermi_ho_propagator(omega, basis, hbar),
        FermiSystem::Driven if omega == 0.0 => {
            let reg = Registry::new(&[ALPHA, ALPHA_STAR])?;
            return Ok(FermiTrace {
                trace: TraceFunction::constant(Complex64::new(1.0 / (2.0 * PI * hbar), 0.0))
                    .with_param("omega", 0.0)
                    .with_param("g", g),
                odd_residue: GElem::zero(&reg),
                anomaly: 0.0,
                pair_coefficient: ExpPoly::default(),
            });
        }
        FermiSystem::Driven => fermi_driven_propagator(omega, basis, hbar, expansion)?,
    };
    let se = match scheme {
        FermiScheme::Naive => fermi_star_exp_naive(&kernel, KernelOrder::SourceFirst)?,
        FermiScheme::Meticulous => fermi_star_exp_meticulous(&kernel)?,
    };
    fk_fermi_trace(&se, trace_scheme, g)
}

/// Fermionic ground energy `E₀ = −ħL`.
pub fn fermi_ground_energy(
    system: FermiSystem,
    scheme: FermiScheme,
    omega: f64,
    g: f64,
    hbar: f64,
    opts: &FermiFkOptions,
) -> Result<GroundEnergyEstimate> {
    let ft = fermi_trace_for(system, scheme, omega, g, hbar, opts.expansion)?;
    ground_energy_limit(ft.require_clean(opts.anomaly_tol)?, hbar, &opts.schedule)
}

/// Expected limit `L = lim (1/τ) ln|Z|` for the driven oscillator.
pub fn driven_limit_expected(omega: f64) -> f64 {
    if omega < 0.0 {
        -omega
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Weak,
    Resonant,
    DispersivePositive,
    DispersiveNegative,
    Intermediate,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Resonant => "resonant",
            Regime::DispersivePositive => "dispersive(omega>0)",
            Regime::DispersiveNegative => "dispersive(omega<0)",
            Regime::Intermediate => "intermediate: no approximation valid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Largest `|ω/g|` or `|g/ω|` counted as small.
    pub ratio: f64,
    /// Largest `g` counted as weak coupling.
    pub weak: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { ratio: 0.2, weak: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub thresholds: RegimeThresholds,
    pub exact: DrivenSpectrum,
    /// Approximate `(λ₊, λ₋)`.
    pub approx: Option<(f64, f64)>,
    /// `max |approx − exact|` over both eigenvalues.
    pub error: Option<f64>,
    /// Twice the magnitude of the first neglected term.
    pub bound: Option<f64>,
}

impl RegimeReport {
    pub fn within_bound(&self) -> bool {
        match (self.error, self.bound) {
            (Some(e), Some(b)) => e <= b,
            _ => false,
        }
    }
}

/// Classifies `(ω, g)` and compares the regime's approximate eigenvalues with the exact ones.
pub fn regime_classify(omega: f64, g: f64, th: &RegimeThresholds) -> Result<RegimeReport> {
    let exact = driven_matrix_and_spectrum(omega, g)?;
    let (regime, approx, bound) = if g < th.weak {
        let bound = if omega != 0.0 { 2.0 * g * g / omega.abs() } else { 2.0 * g };
        (Regime::Weak, Some((omega.max(0.0), omega.min(0.0))), Some(bound))
    } else if (omega / g).abs() <= th.ratio {
        let shift = omega * omega / (8.0 * g);
        let approx = (g + omega / 2.0 + shift, -g + omega / 2.0 - shift);
        (Regime::Resonant, Some(approx), Some(2.0 * omega.powi(4) / (128.0 * g.powi(3))))
    } else if omega != 0.0 && (g / omega).abs() <= th.ratio {
        let shift = g * g / omega;
        let bound = 2.0 * g.powi(4) / omega.abs().powi(3);
        if omega > 0.0 {
            (Regime::DispersivePositive, Some((omega + shift, -shift)), Some(bound))
        } else {
            (Regime::DispersiveNegative, Some((-shift, omega + shift)), Some(bound))
        }
    } else {
        (Regime::Intermediate, None, None)
    };
    let error = approx.map(|(p, m)| {
        (p - exact.lambda_plus).abs().max((m - exact.lambda_minus).abs())
    });
    Ok(RegimeReport { regime, thresholds: *th, exact, approx, error, bound })
}
