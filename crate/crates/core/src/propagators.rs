//! Quantum propagators: bosonic oscillator and quadratic Lagrangians, fermionic
//! oscillator kernels and the driven 2×2 spectrum.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::grassmann::{GElem, Registry};
use crate::quadrature::{rk4_2, simpson_samples};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// A real function of time: constant, closure, or tabulated samples.
#[derive(Clone)]
pub enum TimeFunction {
    Constant(f64),
    Closure(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// `(t, value)` samples sorted by time, linearly interpolated and clamped at the ends.
    Table(Vec<(f64, f64)>),
}

impl TimeFunction {
    pub fn closure(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Closure(Arc::new(f))
    }

    pub fn table(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empty time table".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::Table(samples))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Closure(f) => f(t),
            Self::Table(s) => {
                let first = s[0];
                let last = s[s.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let j = s.partition_point(|p| p.0 <= t);
                let (a, b) = (s[j - 1], s[j]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }
}

impl fmt::Debug for TimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Closure(_) => write!(f, "Closure(..)"),
            Self::Table(s) => write!(f, "Table({} samples)", s.len()),
        }
    }
}

/// Bosonic system whose propagator is Gaussian in the endpoints.
#[derive(Clone, Debug)]
pub enum BosonicPropagatorSpec {
    Ho {
        m: f64,
        omega: f64,
        hbar: f64,
    },
    /// `L = m q̇²/2 − c(t) q²/2 + f(t) q`.
    Quadratic {
        m: f64,
        c: TimeFunction,
        f: TimeFunction,
        hbar: f64,
    },
}

impl BosonicPropagatorSpec {
    pub fn validate(&self) -> Result<()> {
        let (m, hbar) = match self {
            Self::Ho { m, omega, hbar } => {
                if !(*omega > 0.0) {
                    return Err(Error::InvalidArgument("omega must be positive".into()));
                }
                (*m, *hbar)
            }
            Self::Quadratic { m, hbar, .. } => (*m, *hbar),
        };
        if !(m > 0.0) {
            return Err(Error::InvalidArgument("mass must be positive".into()));
        }
        if !(hbar > 0.0) {
            return Err(Error::InvalidArgument("hbar must be positive".into()));
        }
        Ok(())
    }

    pub fn hbar(&self) -> f64 {
        match self {
            Self::Ho { hbar, .. } | Self::Quadratic { hbar, .. } => *hbar,
        }
    }

    /// Propagator `K(x_f, t; x_0, 0)`.
    pub fn propagator(&self, x_f: f64, x_0: f64, t: f64) -> Result<Complex64> {
        self.validate()?;
        match self {
            Self::Ho { m, omega, hbar } => ho_propagator(*m, *omega, x_f, x_0, t, *hbar),
            Self::Quadratic { .. } => Ok(quadratic_propagator(self, x_f, t, x_0, 0.0)?.amplitude),
        }
    }
}

fn caustic_guard(s: f64) -> bool {
    s.abs() < 1e-12
}

/// Harmonic oscillator propagator on the principal branch `0 < ωT < π`.
pub fn ho_propagator(m: f64, omega: f64, x_f: f64, x_0: f64, t: f64, hbar: f64) -> Result<Complex64> {
    if !(m > 0.0 && omega > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidArgument("m, omega and hbar must be positive".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("propagation time must be positive".into()));
    }
    let wt = omega * t;
    let s = wt.sin();
    let nu = (wt / PI).floor() as i64;
    if caustic_guard(s) || (wt / PI - (wt / PI).round()).abs() < 1e-12 {
        return Err(Error::Caustic(format!("sin(omega T) vanishes at omega T = {wt}")));
    }
    if nu > 0 {
        return Err(Error::Caustic(format!(
            "omega T = {wt} lies past {nu} caustic(s); only the principal branch is supported"
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let pref = (Complex64::new(m * omega, 0.0) / (2.0 * PI * hbar * s * i)).sqrt();
    let phase = i * m * omega / (2.0 * hbar * s) * ((x_f * x_f + x_0 * x_0) * wt.cos() - 2.0 * x_f * x_0);
    Ok(pref * phase.exp())
}

/// Free-particle propagator.
pub fn free_propagator(m: f64, x_f: f64, x_0: f64, t: f64, hbar: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let d = x_f - x_0;
    (Complex64::new(m, 0.0) / (2.0 * PI * i * hbar * t)).sqrt() * (i * m * d * d / (2.0 * hbar * t)).exp()
}

/// Default number of RK4 steps across the propagation interval.
pub const RK4_STEPS: usize = 4096;

/// Fundamental solutions of a quadratic Lagrangian on `[t_0, t_f]`.
#[derive(Clone, Debug)]
pub struct QuadraticSystem {
    m: f64,
    hbar: f64,
    t0: f64,
    h: f64,
    c: Vec<f64>,
    f: Vec<f64>,
    /// `φ`: `φ(t_0) = 0`, `φ̇(t_0) = 1`.
    phi: Vec<[f64; 2]>,
    /// `χ`: `χ(t_0) = 1`, `χ̇(t_0) = 0`.
    chi: Vec<[f64; 2]>,
    /// Particular solution with zero initial data.
    part: Vec<[f64; 2]>,
    maslov: u32,
}

/// Amplitude and classical data of a quadratic propagator.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPropagatorResult {
    pub amplitude: Complex64,
    pub action: f64,
    pub phi_tf: f64,
    pub maslov: u32,
}

impl QuadraticSystem {
    pub fn solve(spec: &BosonicPropagatorSpec, t0: f64, tf: f64, steps: usize) -> Result<Self> {
        spec.validate()?;
        if !(tf > t0) {
            return Err(Error::InvalidArgument("t_f must exceed t_0".into()));
        }
        let steps = steps.max(2) + steps % 2;
        let (m, hbar, cfun, ffun) = match spec {
            BosonicPropagatorSpec::Ho { m, omega, hbar } => (
                *m,
                *hbar,
                TimeFunction::Constant(m * omega * omega),
                TimeFunction::Constant(0.0),
            ),
            BosonicPropagatorSpec::Quadratic { m, c, f, hbar } => (*m, *hbar, c.clone(), f.clone()),
        };
        let h = (tf - t0) / steps as f64;
        let c: Vec<f64> = (0..=steps).map(|k| cfun.eval(t0 + k as f64 * h)).collect();
        let f: Vec<f64> = (0..=steps).map(|k| ffun.eval(t0 + k as f64 * h)).collect();
        let stiff = c.iter().map(|v| (v.abs() / m).sqrt()).fold(0.0, f64::max) * h;
        if stiff > 0.1 {
            return Err(Error::InvalidArgument(format!(
                "c(t) too stiff for {steps} RK4 steps (h·√|c/m| = {stiff:.3})"
            )));
        }
        let homog = |t: f64, y: [f64; 2]| [y[1], -cfun.eval(t) * y[0] / m];
        let forced = |t: f64, y: [f64; 2]| [y[1], (ffun.eval(t) - cfun.eval(t) * y[0]) / m];
        let phi = rk4_2(&homog, t0, [0.0, 1.0], tf, steps);
        let chi = rk4_2(&homog, t0, [1.0, 0.0], tf, steps);
        let part = rk4_2(&forced, t0, [0.0, 0.0], tf, steps);
        let maslov = phi[1..]
            .windows(2)
            .filter(|w| w[0][0] * w[1][0] < 0.0)
            .count() as u32;
        Ok(Self {
            m,
            hbar,
            t0,
            h,
            c,
            f,
            phi,
            chi,
            part,
            maslov,
        })
    }

    pub fn steps(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi_tf(&self) -> f64 {
        self.phi[self.steps()][0]
    }

    /// `φ` at every RK4 node as `(t, φ)`.
    pub fn phi_samples(&self) -> Vec<(f64, f64)> {
        self.phi
            .iter()
            .enumerate()
            .map(|(k, y)| (self.t0 + k as f64 * self.h, y[0]))
            .collect()
    }

    /// Number of sign changes of `φ` in the open interval.
    pub fn maslov_index(&self) -> u32 {
        self.maslov
    }

    fn check_caustic(&self) -> Result<()> {
        let phi = self.phi_tf();
        let scale = self.phi.iter().map(|y| y[0].abs()).fold(0.0, f64::max);
        if phi.abs() <= 1e-10 * scale.max(self.h) {
            return Err(Error::Caustic(format!("phi(t_f) = {phi:e}")));
        }
        Ok(())
    }

    /// Classical path through `(t_0, q_0)` and `(t_f, q_f)` as `(t, q, q̇)` at every node.
    pub fn classical_path(&self, q_f: f64, q_0: f64) -> Result<Vec<(f64, f64, f64)>> {
        self.check_caustic()?;
        let n = self.steps();
        let v0 = (q_f - q_0 * self.chi[n][0] - self.part[n][0]) / self.phi[n][0];
        Ok((0..=n)
            .map(|k| {
                let q = q_0 * self.chi[k][0] + v0 * self.phi[k][0] + self.part[k][0];
                let qd = q_0 * self.chi[k][1] + v0 * self.phi[k][1] + self.part[k][1];
                (self.t0 + k as f64 * self.h, q, qd)
            })
            .collect())
    }

    /// Classical action by Simpson quadrature of the Lagrangian.
    pub fn action(&self, q_f: f64, q_0: f64) -> Result<f64> {
        let path = self.classical_path(q_f, q_0)?;
        let lag: Vec<f64> = path
            .iter()
            .enumerate()
            .map(|(k, &(_, q, qd))| 0.5 * self.m * qd * qd - 0.5 * self.c[k] * q * q + self.f[k] * q)
            .collect();
        Ok(simpson_samples(&lag, self.h))
    }

    /// `√(m / 2πiħ|φ|) e^{−iπν/2}`; caustic crossings are rejected.
    pub fn prefactor(&self) -> Result<Complex64> {
        self.check_caustic()?;
        if self.maslov > 0 {
            return Err(Error::Caustic(format!(
                "phi crosses zero {} time(s) before t_f; Maslov index {} is outside the principal branch",
                self.maslov, self.maslov
            )));
        }
        let i = Complex64::new(0.0, 1.0);
        let root = (Complex64::new(self.m, 0.0) / (2.0 * PI * i * self.hbar * self.phi_tf().abs())).sqrt();
        Ok(root * (-i * PI * self.maslov as f64 / 2.0).exp())
    }

    pub fn propagator(&self, q_f: f64, q_0: f64) -> Result<QuadraticPropagatorResult> {
        let pref = self.prefactor()?;
        let action = self.action(q_f, q_0)?;
        Ok(QuadraticPropagatorResult {
            amplitude: pref * Complex64::new(0.0, action / self.hbar).exp(),
            action,
            phi_tf: self.phi_tf(),
            maslov: self.maslov,
        })
    }
}

/// Propagator of a quadratic Lagrangian by shooting and quadrature.
pub fn quadratic_propagator(
    spec: &BosonicPropagatorSpec,
    q_f: f64,
    t_f: f64,
    q_0: f64,
    t_0: f64,
) -> Result<QuadraticPropagatorResult> {
    QuadraticSystem::solve(spec, t_0, t_f, RK4_STEPS)?.propagator(q_f, q_0)
}

/// Variable naming of the fermionic kernel's final-time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermiBasis {
    /// `K(ψ_f, t; ψ_0, 0)`.
    Naive,
    /// `K(π_f, t; ψ_0, 0)`.
    Meticulous,
}

/// How the exponential of the driven kernel is expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceExpansion {
    /// Full nilpotent exponential.
    Exact,
    /// `1 + E`, the first-order expansion.
    Linear,
}

pub const PI_F: &str = "pi_f";
pub const PSI_F: &str = "psi_f";
pub const PSI_0: &str = "psi_0";
pub const ALPHA: &str = "alpha";
pub const ALPHA_STAR: &str = "alpha*";

/// Fermionic kernel `phase · expand(exponent)` with time-dependent coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FermiPropagator {
    pub basis: FermiBasis,
    pub omega: f64,
    pub hbar: f64,
    pub phase: ExpPoly,
    pub exponent: GElem<ExpPoly>,
    pub kernel: GElem<ExpPoly>,
}

impl FermiPropagator {
    pub fn registry(&self) -> &Arc<Registry> {
        self.kernel.registry()
    }

    /// Name of the final-time generator.
    pub fn final_name(&self) -> &'static str {
        match self.basis {
            FermiBasis::Naive => PSI_F,
            FermiBasis::Meticulous => PI_F,
        }
    }

    /// Kernel with coefficients evaluated at time `t`.
    pub fn at(&self, t: f64) -> GElem<Complex64> {
        let omega = self.omega;
        self.kernel.map_coeffs(|c| c.eval(Complex64::new(t, 0.0), omega))
    }
}

/// Registry `{final, ψ_0, α, α*}` of the fermionic kernels.
pub fn fermi_registry(basis: FermiBasis) -> Arc<Registry> {
    let fin = match basis {
        FermiBasis::Naive => PSI_F,
        FermiBasis::Meticulous => PI_F,
    };
    Registry::new(&[fin, PSI_0, ALPHA, ALPHA_STAR]).expect("static registry")
}

fn gen(reg: &Arc<Registry>, name: &str) -> GElem<ExpPoly> {
    GElem::generator(reg, name).expect("generator present")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iωt/2} exp{a_f e^{−iωt} ψ_0}`.
pub fn fermi_ho_propagator(omega: f64, basis: FermiBasis, hbar: f64) -> FermiPropagator {
    let reg = fermi_registry(basis);
    let fin = gen(&reg, if basis == FermiBasis::Naive { PSI_F } else { PI_F });
    let exponent = (&fin * &gen(&reg, PSI_0)).scale_by(&ExpPoly::phase(2));
    let phase = ExpPoly::phase(-1);
    let kernel = exponent.exp().expect("nilpotent exponent").scale_by(&phase);
    FermiPropagator {
        basis,
        omega,
        hbar,
        phase,
        exponent,
        kernel,
    }
}

/// `s(t) = (1 − e^{−iωt})/ω`.
pub fn source_factor(omega: f64) -> ExpPoly {
    (ExpPoly::one() - ExpPoly::phase(2)).scale(c(1.0 / omega, 0.0))
}

/// `(1/2ω)(−iωt + e^{−iωt} − 1)`, the coefficient of `α*α` in `f`.
pub fn driven_f_factor(omega: f64) -> ExpPoly {
    ExpPoly::term(c(0.0, -0.5), 0, 1)
        + (ExpPoly::phase(2) - ExpPoly::one()).scale(c(1.0 / (2.0 * omega), 0.0))
}

/// Driven kernel `exp{a_f e^{−iωt} ψ_0 − s(t)(α* a_f + α ψ_0) − f}` with `|α|² = α*α`.
pub fn fermi_driven_propagator(
    omega: f64,
    basis: FermiBasis,
    hbar: f64,
    expansion: SourceExpansion,
) -> Result<FermiPropagator> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::InvalidArgument(
            "driven kernel needs omega != 0 (source terms carry 1/omega)".into(),
        ));
    }
    let reg = fermi_registry(basis);
    let fin = gen(&reg, if basis == FermiBasis::Naive { PSI_F } else { PI_F });
    let psi0 = gen(&reg, PSI_0);
    let (a, ac) = (gen(&reg, ALPHA), gen(&reg, ALPHA_STAR));
    let s = source_factor(omega);
    let hom = (&fin * &psi0).scale_by(&ExpPoly::phase(2));
    let src = (&(&ac * &fin) + &(&a * &psi0)).scale_by(&s);
    let f = (&ac * &a).scale_by(&driven_f_factor(omega));
    let exponent = &(&hom - &src) - &f;
    let kernel = match expansion {
        SourceExpansion::Exact => exponent.exp()?,
        SourceExpansion::Linear => &GElem::one(&reg) + &exponent,
    };
    Ok(FermiPropagator {
        basis,
        omega,
        hbar,
        phase: ExpPoly::one(),
        exponent,
        kernel,
    })
}

/// Inhomogeneous parts of the Heisenberg solutions over the kernel registry:
/// `ψ̂(t) ⊃ (α*/ω)(1 − e^{−iωt})` and `π̂(−t) ⊃ (α/ω)(e^{−iωt} − 1)`.
pub fn heisenberg_inhomogeneous(omega: f64, reg: &Arc<Registry>) -> Result<(GElem<ExpPoly>, GElem<ExpPoly>)> {
    let s = source_factor(omega);
    let psi_inh = GElem::generator(reg, ALPHA_STAR)?.scale_by(&s);
    let pi_inh = GElem::generator(reg, ALPHA)?.scale_by(&s).neg();
    Ok((psi_inh, pi_inh))
}

/// Matrix form of the driven Hamiltonian with `|α| = g` and its exact eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivenSpectrum {
    pub matrix: [[f64; 2]; 2],
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

/// `[[0, g], [g, ω]]` with `λ± = ω/2 ± ½√(ω² + 4g²)`.
pub fn driven_matrix_and_spectrum(omega: f64, g: f64) -> Result<DrivenSpectrum> {
    if !(g >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument("need finite omega and g >= 0".into()));
    }
    let root = (omega * omega + 4.0 * g * g).sqrt();
    // Stable pair: the smaller root from the product λ+λ− = −g².
    let big = 0.5 * (omega + omega.signum() * root);
    let (lp, lm) = if omega == 0.0 {
        (g, -g)
    } else if omega > 0.0 {
        (big, -g * g / big)
    } else {
        (-g * g / big, big)
    };
    Ok(DrivenSpectrum {
        matrix: [[0.0, g], [g, omega]],
        lambda_plus: lp,
        lambda_minus: lm,
    })
}
