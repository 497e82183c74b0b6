//! Self-check suites run by `starq verify`.

use crate::config::Config;
use crate::report::{CaseOutcome, SuiteResult};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starq_core::feynman_kac::{
    driven_limit_expected, fermi_ground_energy, fermi_trace_for, fk_fermi_trace, fk_trace_ho_function,
    fk_trace_quadratic_function, ground_energy_limit, regime_classify, FermiFkOptions, FermiSystem,
    TraceScheme,
};
use starq_core::fermi_phase::FermiSpace;
use starq_core::grassmann::{gaussian_berezin, gaussian_berezin_brute};
use starq_core::hpoly::{ci, cr};
use starq_core::moyal::{
    ho_eigenfunction, ho_hamiltonian, ho_wigner_symbol, moyal_star_poly, star_genvalue_residual,
    star_power_series_exp, wigner_from_wavefunction,
};
use starq_core::propagators::{
    driven_matrix_and_spectrum, fermi_driven_propagator, fermi_ho_propagator, quadratic_propagator,
    ho_propagator, QuadraticSystem, RK4_STEPS,
};
use starq_core::star_exp::{
    distance_at, driven_meticulous_reference, driven_naive_reference, dynamical_residual,
    fermi_star_exp_meticulous, fermi_star_exp_naive, ho_meticulous_reference, ho_naive_reference,
    ho_star_exp_closed, star_exp_from_propagator_bosonic, KernelOrder,
};
use starq_core::weyl_algebra::{
    commutator, groenewold_check, op_mul, weyl_quantize_poly, xnpm_commutator_closed,
};
use starq_core::{
    BerezinConvention, BosonicPropagatorSpec, FermiBasis, FermiScheme, GaussianMeasure,
    GrassmannElement as G, HPoly, MeasureSide, OperatorPoly, Parity, PhasePoly, Registry,
    SourceExpansion, TimeFunction,
};
use std::f64::consts::PI;

pub const SUITES: [&str; 6] = ["grassmann", "weyl", "moyal", "fermi", "starexp", "fk"];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn case(name: &str, detail: impl Into<String>, passed: bool) -> CaseOutcome {
    CaseOutcome { name: name.into(), detail: detail.into(), passed }
}

/// Turns an engine error into a failed case.
fn guarded(name: &str, f: impl FnOnce() -> starq_core::Result<CaseOutcome>) -> CaseOutcome {
    f().unwrap_or_else(|e| case(name, format!("error: {e}"), false))
}

fn max_err_case(name: &str, err: f64, tol: f64) -> CaseOutcome {
    case(name, format!("max err {err:.2e} (tol {tol:.0e})"), err <= tol)
}

pub fn run_suite(name: &str, cfg: &Config) -> Option<SuiteResult> {
    let checks = match name {
        "grassmann" => grassmann(),
        "weyl" => weyl(),
        "moyal" => moyal(cfg),
        "fermi" => fermi(),
        "starexp" => starexp(),
        "fk" => fk(cfg),
        _ => return None,
    };
    Some(SuiteResult::from_checks(name, checks))
}

/// Runs the named suites in parallel; results keep the requested order.
pub fn run_suites(names: &[&str], cfg: &Config) -> Vec<SuiteResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| s.spawn(move || run_suite(n, cfg)))
            .collect();
        handles
            .into_iter()
            .filter_map(|h| h.join().expect("suite thread"))
            .collect()
    })
}

fn gaussian_setup(n: usize) -> starq_core::Result<(std::sync::Arc<Registry>, Vec<String>, Vec<String>, Vec<G>, Vec<G>)> {
    let u: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    let v: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut names: Vec<String> = u.iter().chain(v.iter()).cloned().collect();
    for i in 1..=n {
        names.push(format!("a{i}"));
        names.push(format!("b{i}"));
    }
    let r = Registry::new(&names)?;
    let a = (1..=n).map(|i| G::generator(&r, &format!("a{i}"))).collect::<starq_core::Result<_>>()?;
    let b = (1..=n).map(|i| G::generator(&r, &format!("b{i}"))).collect::<starq_core::Result<_>>()?;
    Ok((r, u, v, a, b))
}

pub fn grassmann() -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    out.push(guarded("gaussian-closed-vs-brute", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        for trial in 0..50 {
            let n = 1 + trial % 3;
            let (r, u, v, a, b) = gaussian_setup(n)?;
            let uu: Vec<&str> = u.iter().map(String::as_str).collect();
            let vv: Vec<&str> = v.iter().map(String::as_str).collect();
            let m = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
            let closed = gaussian_berezin(&r, &m, &a, &b)?;
            let brute = gaussian_berezin_brute(&r, &uu, &vv, &m, &a, &b, GaussianMeasure::Paired)?;
            let scale = closed.terms().map(|(_, c)| c.norm()).fold(1.0, f64::max);
            worst = worst.max(closed.distance(&brute)? / scale);
        }
        Ok(max_err_case("gaussian-closed-vs-brute", worst, 1e-12))
    }));
    out.push(guarded("derivative-algebra", || {
        let r = Registry::new(&["t1", "t2", "t3", "t4"])?;
        let mut ok = true;
        for mask in 0..16u64 {
            let f = G::monomial(&r, mask, c(1.0, 0.0));
            for i in 0..4 {
                ok &= f.left_derivative_at(i).left_derivative_at(i).is_zero();
                for j in 0..4 {
                    let a = f.left_derivative_at(j).left_derivative_at(i);
                    let b = f.left_derivative_at(i).left_derivative_at(j);
                    ok &= (&a + &b).is_zero();
                    let tj = G::monomial(&r, 1 << j, c(1.0, 0.0));
                    let anti = &(&tj * &f).left_derivative_at(i) + &(&tj * &f.left_derivative_at(i));
                    ok &= anti == if i == j { f.clone() } else { G::zero(&r) };
                }
            }
        }
        Ok(case("derivative-algebra", "16-element basis, exact", ok))
    }));
    out.push(guarded("integration-is-differentiation", || {
        let r = Registry::new(&["t1", "t2", "t3", "t4"])?;
        let names = ["t1", "t2", "t3", "t4"];
        let mut ok = true;
        for mask in 0..16u64 {
            let f = G::monomial(&r, mask, c(1.0, 0.0));
            for (i, n) in names.iter().enumerate() {
                let d = f.left_derivative_at(i);
                ok &= f.berezin_integrate_with(&[n], BerezinConvention::Das, MeasureSide::Left)? == d;
                ok &= f.berezin_integrate(&[n], MeasureSide::Left)? == d.neg();
                ok &= f.berezin_integrate(&[n], MeasureSide::Right)? == f.right_derivative_at(i);
            }
        }
        Ok(case("integration-is-differentiation", "16-element basis, exact", ok))
    }));
    out.push(guarded("associativity", || {
        let r = Registry::new(&["t1", "t2", "t3"])?;
        let mut ok = true;
        for a in 0..8u64 {
            for b in 0..8u64 {
                for d in 0..8u64 {
                    let (x, y, z) = (
                        G::monomial(&r, a, c(1.0, 0.0)),
                        G::monomial(&r, b, c(1.0, 0.0)),
                        G::monomial(&r, d, c(1.0, 0.0)),
                    );
                    ok &= &(&x * &y) * &z == &x * &(&y * &z);
                }
            }
        }
        Ok(case("associativity", "512 basis triples, exact", ok))
    }));
    out
}

fn random_poly(rng: &mut ChaCha8Rng, deg: u32) -> PhasePoly {
    let mut out = PhasePoly::zero();
    for a in 0..=deg {
        for b in 0..=deg - a {
            if rng.random_bool(0.5) {
                let cc = cr(rng.random_range(-3..=3), rng.random_range(1..=3)) + ci(rng.random_range(-2..=2), 1);
                out = &out + &PhasePoly::monomial(a, b, HPoly::monomial(cc, rng.random_range(0..=1)));
            }
        }
    }
    out
}

pub fn weyl() -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    match groenewold_check() {
        Ok(g) => {
            out.push(case("groenewold-classical", g.classical.to_string(), g.classical.is_zero()));
            let q = g.quantum_scalar();
            let expected = HPoly::monomial(cr(-3, 1), 2);
            let detail = q.as_ref().map(|h| h.to_string()).unwrap_or_else(|| g.quantum.to_string());
            out.push(case("groenewold", detail, q == Some(expected)));
        }
        Err(e) => out.push(case("groenewold", format!("error: {e}"), false)),
    }
    out.push(guarded("commutator-closed-form", || {
        let mut ok = 0;
        for n in 1..=5 {
            for m in 1..=5 {
                let lhs = commutator(
                    &OperatorPoly::word(n, 0, HPoly::one()),
                    &OperatorPoly::word(0, m, HPoly::one()),
                );
                if lhs == xnpm_commutator_closed(n, m)? {
                    ok += 1;
                }
            }
        }
        Ok(case("commutator-closed-form", format!("{ok}/25 exact"), ok == 25))
    }));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = 0;
    for _ in 0..100 {
        let (f, g) = (random_poly(&mut rng, 4), random_poly(&mut rng, 4));
        if weyl_quantize_poly(&moyal_star_poly(&f, &g)) == op_mul(&weyl_quantize_poly(&f), &weyl_quantize_poly(&g)) {
            ok += 1;
        }
    }
    out.push(case("weyl-homomorphism", format!("{ok}/100 exact"), ok == 100));
    out
}

fn grid(k: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let h = (hi - lo) / (k - 1) as f64;
    (0..k)
        .flat_map(|i| (0..k).map(move |j| (lo + i as f64 * h, lo + j as f64 * h)))
        .collect()
}

pub fn moyal(cfg: &Config) -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    let h = &(&PhasePoly::x() * &PhasePoly::x()) + &(&PhasePoly::p() * &PhasePoly::p());
    let h = h.scale(&HPoly::constant(cr(1, 2)));
    let hh = moyal_star_poly(&h, &h);
    let expected = &(&h * &h) - &PhasePoly::constant(HPoly::monomial(cr(1, 4), 2));
    out.push(case("h-star-h", hh.to_string(), hh == expected));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ok = true;
    for _ in 0..20 {
        let (f, g, k) = (random_poly(&mut rng, 3), random_poly(&mut rng, 3), random_poly(&mut rng, 3));
        ok &= moyal_star_poly(&moyal_star_poly(&f, &g), &k) == moyal_star_poly(&f, &moyal_star_poly(&g, &k));
    }
    out.push(case("associativity", "20 random triples, exact", ok));
    out.push(guarded("star-genvalue", || {
        let (m, omega, hbar) = (1.0, 1.3, 0.9);
        let hp = ho_hamiltonian(m, omega);
        let pts = grid(5, -2.0, 2.0);
        let mut worst: f64 = 0.0;
        for n in 0..=5u32 {
            let e = hbar * omega * (n as f64 + 0.5);
            worst = worst.max(star_genvalue_residual(&hp, &ho_wigner_symbol(n, m, omega, hbar), e, &pts)?);
        }
        Ok(max_err_case("star-genvalue", worst, 1e-9))
    }));
    out.push(guarded("series-order-12", || {
        let v = star_power_series_exp(&ho_hamiltonian(1.0, 1.0), 0.1, 12, (0.3, 0.4), 1.0);
        let e = ho_star_exp_closed(1.0, 1.0, 0.3, 0.4, 0.1, 1.0)?;
        Ok(max_err_case("series-order-12", (v - e).norm(), 1e-8))
    }));
    out.push(guarded("wigner-quadrature", || {
        let mut worst: f64 = 0.0;
        for n in 0..=2u32 {
            let psi = ho_eigenfunction(n, 1.0, 1.0, 1.0);
            let rho = ho_wigner_symbol(n, 1.0, 1.0, 1.0);
            for (x, p) in grid(3, -1.0, 1.0) {
                let q = wigner_from_wavefunction(&psi, x, p, 1.0, &cfg.quadrature)?;
                worst = worst.max((q - rho.eval(x, p).re).abs());
            }
        }
        Ok(max_err_case("wigner-quadrature", worst, 1e-7))
    }));
    out
}

pub fn fermi() -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    out.push(guarded("differential-vs-integral", || {
        let mut worst: f64 = 0.0;
        for n in 1..=2 {
            let s = FermiSpace::new(n, &[], 1.0)?;
            let basis = s.symbol_basis();
            for f in &basis {
                for g in &basis {
                    worst = worst.max(s.star(f, g)?.distance(&s.star_integral(f, g)?)?);
                }
            }
        }
        Ok(max_err_case("differential-vs-integral", worst, 1e-12))
    }));
    out.push(guarded("associativity", || {
        let mut worst: f64 = 0.0;
        for n in 1..=2 {
            let s = FermiSpace::new(n, &[], 0.7)?;
            let basis = s.symbol_basis();
            for f in &basis {
                for g in &basis {
                    let fg = s.star(f, g)?;
                    for h in &basis {
                        let lhs = s.star(&fg, h)?;
                        let rhs = s.star(f, &s.star(g, h)?)?;
                        worst = worst.max(lhs.distance(&rhs)?);
                    }
                }
            }
        }
        Ok(max_err_case("associativity", worst, 1e-12))
    }));
    out.push(guarded("weyl-vs-fock", || {
        let mut worst: f64 = 0.0;
        for n in 1..=2 {
            let s = FermiSpace::new(n, &[], 0.6)?;
            let basis = s.symbol_basis();
            for f in &basis {
                for g in &basis {
                    let lhs = s.weyl_quantize(&s.star(f, g)?)?;
                    let rhs = s.weyl_quantize(f)?.mul(&s.weyl_quantize(g)?)?;
                    worst = worst.max(lhs.distance(&rhs)?);
                }
            }
        }
        Ok(max_err_case("weyl-vs-fock", worst, 1e-12))
    }));
    out
}

pub fn starexp() -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    out.push(guarded("route-equality", || {
        let spec = BosonicPropagatorSpec::Ho { m: 1.0, omega: 1.0, hbar: 1.0 };
        let mut worst: f64 = 0.0;
        for wt in [0.4, 1.5, 2.7] {
            for q in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                for p in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                    let a = star_exp_from_propagator_bosonic(&spec, q, p, wt)?;
                    let b = ho_star_exp_closed(1.0, 1.0, q, p, wt, 1.0)?;
                    worst = worst.max((a - b).norm() / b.norm());
                }
            }
        }
        Ok(max_err_case("route-equality", worst, 1e-9))
    }));
    out.push(guarded("dynamical-equation", || {
        let pts = grid(3, -1.0, 1.0);
        let mut worst: f64 = 0.0;
        for t in [0.3, 1.0, 1.8] {
            worst = worst.max(dynamical_residual(1.0, 1.0, t, 1.0, 1e-5, &pts)?);
        }
        Ok(max_err_case("dynamical-equation", worst, 1e-6))
    }));
    out.push(guarded("quadratic-propagator", || {
        let (m, omega, hbar) = (1.0, 1.0, 1.0);
        let spec = BosonicPropagatorSpec::Quadratic {
            m,
            c: TimeFunction::Constant(m * omega * omega),
            f: TimeFunction::Constant(0.0),
            hbar,
        };
        let mut worst: f64 = 0.0;
        for t in [0.5, 1.0, 2.0] {
            let q = quadratic_propagator(&spec, 0.3, t, -0.4, 0.0)?;
            let h = ho_propagator(m, omega, 0.3, -0.4, t, hbar)?;
            worst = worst.max((q.amplitude - h).norm() / h.norm());
            let sys = QuadraticSystem::solve(&spec, 0.0, t, RK4_STEPS)?;
            worst = worst.max((sys.phi_tf() - (omega * t).sin() / omega).abs());
        }
        Ok(max_err_case("quadratic-propagator", worst, 1e-8))
    }));
    let ts = [0.0, 0.3, 1.0];
    let (omega, hbar) = (1.0, 1.0);
    out.push(guarded("fermi-naive-ho", || {
        let se = fermi_star_exp_naive(&fermi_ho_propagator(omega, FermiBasis::Naive, hbar), KernelOrder::SourceFirst)?;
        let r = ho_naive_reference(hbar);
        let worst = ts.iter().map(|&t| distance_at(&se.value, &r, t, omega)).collect::<starq_core::Result<Vec<_>>>()?;
        Ok(max_err_case("fermi-naive-ho", worst.into_iter().fold(0.0, f64::max), 1e-10))
    }));
    out.push(guarded("fermi-meticulous-ho", || {
        let se = fermi_star_exp_meticulous(&fermi_ho_propagator(omega, FermiBasis::Meticulous, hbar))?;
        let r = ho_meticulous_reference(hbar)?;
        let worst = ts.iter().map(|&t| distance_at(&se.value, &r, t, omega)).collect::<starq_core::Result<Vec<_>>>()?;
        Ok(max_err_case("fermi-meticulous-ho", worst.into_iter().fold(0.0, f64::max), 1e-10))
    }));
    out.push(guarded("fermi-driven-naive", || {
        let k = fermi_driven_propagator(0.7, FermiBasis::Naive, hbar, SourceExpansion::Linear)?;
        let se = fermi_star_exp_naive(&k, KernelOrder::SourceFirst)?;
        let r = driven_naive_reference(0.7, hbar);
        let worst = ts.iter().map(|&t| distance_at(&se.value, &r, t, 0.7)).collect::<starq_core::Result<Vec<_>>>()?;
        Ok(max_err_case("fermi-driven-naive", worst.into_iter().fold(0.0, f64::max), 1e-10))
    }));
    out.push(guarded("fermi-driven-meticulous", || {
        let k = fermi_driven_propagator(0.7, FermiBasis::Meticulous, hbar, SourceExpansion::Linear)?;
        let se = fermi_star_exp_meticulous(&k)?;
        let r = driven_meticulous_reference(0.7, hbar)?;
        let worst = ts.iter().map(|&t| distance_at(&se.value, &r, t, 0.7)).collect::<starq_core::Result<Vec<_>>>()?;
        Ok(max_err_case("fermi-driven-meticulous", worst.into_iter().fold(0.0, f64::max), 1e-10))
    }));
    out.push(guarded("fermi-parity", || {
        let n = fermi_star_exp_naive(
            &fermi_driven_propagator(0.7, FermiBasis::Naive, hbar, SourceExpansion::Linear)?,
            KernelOrder::SourceFirst,
        )?
        .parity();
        let m = fermi_star_exp_meticulous(&fermi_driven_propagator(
            0.7,
            FermiBasis::Meticulous,
            hbar,
            SourceExpansion::Linear,
        )?)?
        .parity();
        Ok(case(
            "fermi-parity",
            format!("naive {n:?}, meticulous {m:?}"),
            n != Parity::Even && m == Parity::Even,
        ))
    }));
    out
}

pub fn fk(cfg: &Config) -> Vec<CaseOutcome> {
    let mut out = Vec::new();
    let hbar = 1.0;
    out.push(guarded("bosonic-ho", || {
        let mut worst: f64 = 0.0;
        for omega in [0.5, 1.0, 2.0] {
            let e = ground_energy_limit(&fk_trace_ho_function(omega, hbar)?, hbar, &cfg.fk)?;
            worst = worst.max((e.value - hbar * omega / 2.0).abs());
        }
        Ok(max_err_case("bosonic-ho", worst, 1e-4))
    }));
    out.push(guarded("bosonic-quadratic", || {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut worst: f64 = 0.0;
        let mut done = 0;
        while done < 5 {
            let (a, b, cc): (f64, f64, f64) =
                (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0), rng.random_range(-1.5..1.5));
            if a * b - cc * cc < 0.05 {
                continue;
            }
            let e = ground_energy_limit(&fk_trace_quadratic_function(a, b, cc, hbar)?, hbar, &cfg.fk)?;
            worst = worst.max((e.value - hbar * (a * b - cc * cc).sqrt()).abs());
            done += 1;
        }
        Ok(max_err_case("bosonic-quadratic", worst, 1e-4))
    }));
    let opts = FermiFkOptions { schedule: cfg.fk_fermi, ..FermiFkOptions::default() };
    out.push(guarded("fermi-ho", || {
        let mut worst: f64 = 0.0;
        for scheme in [FermiScheme::Naive, FermiScheme::Meticulous] {
            let e = fermi_ground_energy(FermiSystem::Ho, scheme, 1.0, 0.0, hbar, &opts)?;
            worst = worst.max((e.value + 0.5).abs());
        }
        Ok(max_err_case("fermi-ho", worst, 2e-3))
    }));
    out.push(guarded("driven-limit", || {
        let mut worst: f64 = 0.0;
        for scheme in [FermiScheme::Naive, FermiScheme::Meticulous] {
            for omega in [0.5, -0.5, 2.0, -2.0, 0.0] {
                for g in [0.1, 1.0] {
                    let e = fermi_ground_energy(FermiSystem::Driven, scheme, omega, g, hbar, &opts)?;
                    worst = worst.max((-e.value / hbar - driven_limit_expected(omega)).abs());
                }
            }
        }
        Ok(max_err_case("driven-limit", worst, 2e-3))
    }));
    out.push(guarded("weak-coupling", || {
        let mut ok = true;
        let mut worst_ratio: f64 = 0.0;
        for omega in [2.0, 0.5, -2.0, -0.5] {
            let g = 1e-3 * f64::abs(omega);
            for scheme in [FermiScheme::Naive, FermiScheme::Meticulous] {
                let e = fermi_ground_energy(FermiSystem::Driven, scheme, omega, g, hbar, &opts)?;
                let s = driven_matrix_and_spectrum(omega, g)?;
                let gap = (e.value - s.lambda_plus).abs().min((e.value - s.lambda_minus).abs());
                let bound = 10.0 * g * g / omega.abs();
                ok &= gap < bound;
                worst_ratio = worst_ratio.max(gap / bound);
            }
        }
        Ok(case("weak-coupling", format!("worst gap/bound {worst_ratio:.2}"), ok))
    }));
    out.push(guarded("rmd-contrast", || {
        let k = fermi_driven_propagator(0.7, FermiBasis::Naive, hbar, SourceExpansion::Linear)?;
        let se = fermi_star_exp_naive(&k, KernelOrder::SourceFirst)?;
        let bare = fk_fermi_trace(&se, TraceScheme::NaiveBare, 0.5)?;
        let rmd = fk_fermi_trace(&se, TraceScheme::NaiveRmd, 0.5)?;
        Ok(case(
            "rmd-contrast",
            format!("odd residue bare {:.2e}, remediated {:.2e}", bare.anomaly, rmd.anomaly),
            bare.anomaly > 1e-6 && rmd.anomaly < 1e-12,
        ))
    }));
    out.push(guarded("fermi-trace-prefactor", || {
        let ft = fermi_trace_for(FermiSystem::Ho, FermiScheme::Naive, 1.0, 0.0, hbar, SourceExpansion::Linear)?;
        let z = ft.trace.value(2.0)?;
        let expected = (1.0f64).exp() * (c(0.0, 2.0) - 2.0 * (-2.0f64).exp()) / (2.0 * PI);
        Ok(max_err_case("fermi-trace-prefactor", (z - expected).norm(), 1e-12))
    }));
    for (name, omega, g) in [
        ("regime-resonant", 0.1, 1.0),
        ("regime-dispersive+", 10.0, 0.5),
        ("regime-dispersive-", -10.0, 0.5),
        ("regime-weak", 1.5, 1e-4),
    ] {
        out.push(guarded(name, || {
            let r = regime_classify(omega, g, &cfg.regime)?;
            let detail = format!(
                "{} err {:.2e} <= bound {:.2e}",
                r.regime.tag(),
                r.error.unwrap_or(f64::NAN),
                r.bound.unwrap_or(f64::NAN)
            );
            Ok(case(name, detail, r.within_bound()))
        }));
    }
    out
}
