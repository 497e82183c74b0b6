use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starq_core::feynman_kac::{
    driven_limit_expected, fermi_ground_energy, fermi_trace_for, fk_fermi_trace, fk_trace_ho,
    fk_trace_ho_function, fk_trace_quadratic, fk_trace_quadratic_function, ground_energy_limit,
    ho_trace_csch, ho_trace_geometric, regime_classify,
};
use starq_core::propagators::{driven_matrix_and_spectrum, fermi_driven_propagator, fermi_ho_propagator};
use starq_core::quadrature::adaptive_simpson;
use starq_core::star_exp::{fermi_star_exp_meticulous, fermi_star_exp_naive, ho_star_exp_wick, KernelOrder};
use starq_core::{
    Error, ExpPoly, FermiBasis, FermiFkOptions, FermiScheme, FermiSystem, Regime, RegimeThresholds,
    Schedule, SourceExpansion, TraceFunction, TraceScheme,
};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn ho_trace_closed_form() {
    let v = fk_trace_ho(1.0, 2.0, 1.0).unwrap();
    assert!((v - 0.5 / 1f64.sinh()).abs() < 1e-13);
    for (omega, tau, hbar) in [(0.5, 3.0, 1.0), (2.0, 0.4, 0.7), (1.3, 9.0, 2.0)] {
        let v = fk_trace_ho(omega, tau, hbar).unwrap();
        assert!((v - ho_trace_csch(omega, tau)).abs() < 1e-12 * v);
        assert!((ho_trace_geometric(omega, tau) - ho_trace_csch(omega, tau)).abs() < 1e-13);
    }
    let ratio = fk_trace_ho(1.0, 40.0, 1.0).unwrap() / (-20f64).exp();
    assert!((ratio - 1.0).abs() < 1e-12);
    assert!(fk_trace_ho(0.0, 1.0, 1.0).is_err());
    assert!(fk_trace_ho(1.0, -1.0, 1.0).is_err());
}

#[test]
fn ho_trace_numeric_integral() {
    // Direct quadrature of the imaginary-time symbol over phase space.
    let (omega, tau, hbar) = (1.0, 2.0, 1.0);
    let inner = |q: f64| {
        adaptive_simpson(&|p| c(ho_star_exp_wick(1.0, omega, q, p, tau, hbar), 0.0), -12.0, 12.0, 1e-12, 16, 30)
            .unwrap()
    };
    let total = adaptive_simpson(&inner, -12.0, 12.0, 1e-11, 16, 30).unwrap();
    let z = total.re / (2.0 * PI * hbar);
    assert!((z - 0.5 / 1f64.sinh()).abs() < 1e-8, "{z}");
}

#[test]
fn quadratic_trace_examples() {
    let v = fk_trace_quadratic(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
    assert!((v - 0.5 / 1f64.sinh()).abs() < 1e-13);
    for tau in [0.3, 1.0, 2.0] {
        let v = fk_trace_quadratic(2.0, 3.0, 1.0, tau, 0.8).unwrap();
        assert!((v - 0.5 / (5f64.sqrt() * tau).sinh()).abs() < 1e-12 * v);
    }
    assert!(fk_trace_quadratic(1.0, 4.0, 2.0, 1.0, 1.0).is_err());
    assert!(fk_trace_quadratic(1.0, 1.0, 2.0, 1.0, 1.0).is_err());
}

#[test]
fn bosonic_ground_energies() {
    for omega in [0.5, 1.0, 2.0] {
        for hbar in [1.0, 0.5] {
            let z = fk_trace_ho_function(omega, hbar).unwrap();
            let e = ground_energy_limit(&z, hbar, &Schedule::bosonic()).unwrap();
            assert!(e.converged);
            assert!((e.value - hbar * omega / 2.0).abs() < 1e-4, "omega={omega}: {}", e.value);
        }
    }
    let z = fk_trace_quadratic_function(1.0, 1.0, 0.0, 1.0).unwrap();
    let e = ground_energy_limit(&z, 1.0, &Schedule::bosonic()).unwrap();
    assert!((e.value - 1.0).abs() < 1e-4);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut done = 0;
    while done < 5 {
        let (a, b, cc) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0), rng.random_range(-1.5..1.5));
        if a * b - cc * cc < 0.05 {
            continue;
        }
        let z = fk_trace_quadratic_function(a, b, cc, 1.0).unwrap();
        let e = ground_energy_limit(&z, 1.0, &Schedule::bosonic()).unwrap();
        assert!((e.value - (a * b - cc * cc).sqrt()).abs() < 1e-4);
        done += 1;
    }
}

#[test]
fn constant_trace_has_zero_energy() {
    let e = ground_energy_limit(&TraceFunction::constant(c(0.3, -2.0)), 1.0, &Schedule::bosonic()).unwrap();
    assert_eq!(e.value, 0.0);
    assert!(e.converged);
}

#[test]
fn estimator_errors() {
    let zero = TraceFunction::constant(c(0.0, 0.0));
    assert_eq!(ground_energy_limit(&zero, 1.0, &Schedule::bosonic()), Err(Error::ZeroTrace(1.0)));
    let wobble = TraceFunction::from_ln("wobble", |tau| Ok((tau * 0.37).sin() * tau));
    assert!(matches!(
        ground_energy_limit(&wobble, 1.0, &Schedule::bosonic()),
        Err(Error::NotConverged { .. })
    ));
    let bad = Schedule { growth: 1.0, ..Schedule::bosonic() };
    assert!(ground_energy_limit(&TraceFunction::constant(c(1.0, 0.0)), 1.0, &bad).is_err());
}

#[test]
fn secant_cancels_logarithmic_prefactor() {
    // Z = τ e^{−τ}: direct −ln|Z|/τ converges like ln τ/τ, secants like 1/τ.
    let z = TraceFunction::from_ln("t_exp", |tau| Ok(tau.ln() - tau));
    let e = ground_energy_limit(&z, 1.0, &Schedule { tol: 1e-3, ..Schedule::bosonic() }).unwrap();
    assert!((e.value - 1.0).abs() < 1e-3);
    let tau = *e.taus.last().unwrap();
    let direct = -(tau.ln() - tau) / tau;
    assert!((direct - 1.0).abs() > (e.value - 1.0).abs());
}

#[test]
fn ho_naive_remediated_trace() {
    let hbar = 0.8;
    let omega = 1.2;
    let se = fermi_star_exp_naive(&fermi_ho_propagator(omega, FermiBasis::Naive, hbar), KernelOrder::SourceFirst)
        .unwrap();
    let ft = fk_fermi_trace(&se, TraceScheme::NaiveRmd, 0.0).unwrap();
    assert_eq!(ft.anomaly, 0.0);
    let pref = 1.0 / (2.0 * PI * hbar);
    for tau in [0.5, 2.0, 7.0] {
        let z = ft.trace.value(tau).unwrap();
        let expected = pref * (omega * tau / 2.0).exp() * (c(0.0, 2.0 / hbar) - 2.0 * (-omega * tau).exp());
        assert!((z - expected).norm() < 1e-12 * expected.norm());
    }
    let bare = fk_fermi_trace(&se, TraceScheme::NaiveBare, 0.0).unwrap();
    assert!(bare.trace.exppoly().unwrap().terms().next().is_none());
}

#[test]
fn ho_meticulous_trace_structure() {
    let hbar = 1.0;
    let omega = 1.0;
    let se = fermi_star_exp_meticulous(&fermi_ho_propagator(omega, FermiBasis::Meticulous, hbar)).unwrap();
    let ft = fk_fermi_trace(&se, TraceScheme::Meticulous, 0.0).unwrap();
    let z = ft.trace.exppoly().unwrap();
    let keys: Vec<(i32, u32)> = z.terms().map(|(k, m, _)| (k, m)).collect();
    assert_eq!(keys, vec![(-1, 0), (1, 0)]);
    // −(ħ²/5)[(i/ħ)(e^{−iωt/2} + (2i/ħ)e^{iωt/2}) + (2i/ħ)e^{−iωt/2}] / 2πħ
    let pref = -hbar * hbar / 5.0 / (2.0 * PI * hbar);
    assert!((z.coefficient(-1, 0) - pref * c(-2.0 / (hbar * hbar), 0.0)).norm() < 1e-14);
    assert!((z.coefficient(1, 0) - pref * c(0.0, 3.0 / hbar)).norm() < 1e-14);
}

#[test]
fn scheme_mismatch_rejected() {
    let se = fermi_star_exp_meticulous(&fermi_ho_propagator(1.0, FermiBasis::Meticulous, 1.0)).unwrap();
    assert!(fk_fermi_trace(&se, TraceScheme::NaiveRmd, 0.0).is_err());
}

#[test]
fn fermionic_ho_ground_energy() {
    for scheme in [FermiScheme::Naive, FermiScheme::Meticulous] {
        for (omega, hbar) in [(1.0, 1.0), (0.5, 1.0), (2.0, 0.5)] {
            let e = fermi_ground_energy(FermiSystem::Ho, scheme, omega, 0.0, hbar, &FermiFkOptions::default())
                .unwrap();
            assert!((e.value + hbar * omega / 2.0).abs() < 2e-3, "{scheme:?} omega={omega}: {}", e.value);
        }
    }
}

#[test]
fn driven_naive_trace_constants() {
    // Z = (1/2πħ)[(−2 − ig²/ħω)e^{−ωτ} + (ig²/ħ)τ + 2i/ħ + ig²/ħω].
    let (omega, g, hbar) = (0.7, 0.4, 0.9);
    let ft = fermi_trace_for(FermiSystem::Driven, FermiScheme::Naive, omega, g, hbar, SourceExpansion::Linear)
        .unwrap();
    assert!(ft.anomaly < 1e-14);
    let pref = 1.0 / (2.0 * PI * hbar);
    let g2 = g * g;
    let a = pref * c(-2.0, -g2 / (hbar * omega));
    let b = pref * c(0.0, g2 / hbar);
    let cc = pref * c(0.0, 2.0 / hbar + g2 / (hbar * omega));
    for tau in [0.5, 3.0, 11.0] {
        let expected = a * (-omega * tau).exp() + b * tau + cc;
        let z = ft.trace.value(tau).unwrap();
        assert!((z - expected).norm() < 1e-12, "tau={tau}");
    }
}

#[test]
fn driven_naive_without_remediation_is_anomalous() {
    let (omega, hbar) = (0.7, 1.0);
    let k = fermi_driven_propagator(omega, FermiBasis::Naive, hbar, SourceExpansion::Linear).unwrap();
    let se = fermi_star_exp_naive(&k, KernelOrder::SourceFirst).unwrap();
    let bare = fk_fermi_trace(&se, TraceScheme::NaiveBare, 0.5).unwrap();
    assert!(bare.anomaly > 1e-3);
    assert!(matches!(bare.require_clean(1e-12), Err(Error::ParityAnomaly(_))));
    let rmd = fk_fermi_trace(&se, TraceScheme::NaiveRmd, 0.5).unwrap();
    assert!(rmd.anomaly < 1e-14);
    assert!(rmd.require_clean(1e-12).is_ok());
}

#[test]
fn driven_limits() {
    let opts = FermiFkOptions::default();
    for scheme in [FermiScheme::Naive, FermiScheme::Meticulous] {
        for omega in [0.5, -0.5, 2.0, -2.0, 0.0] {
            for g in [0.1, 1.0] {
                let e = fermi_ground_energy(FermiSystem::Driven, scheme, omega, g, 1.0, &opts).unwrap();
                let l = -e.value;
                assert!(
                    (l - driven_limit_expected(omega)).abs() < 2e-3,
                    "{scheme:?} omega={omega} g={g}: L={l}"
                );
            }
        }
    }
}

#[test]
fn driven_exact_expansion_agrees() {
    let opts = FermiFkOptions { expansion: SourceExpansion::Exact, ..FermiFkOptions::default() };
    for omega in [2.0, -2.0] {
        let e = fermi_ground_energy(FermiSystem::Driven, FermiScheme::Meticulous, omega, 1.0, 1.0, &opts).unwrap();
        assert!((-e.value - driven_limit_expected(omega)).abs() < 2e-3);
    }
}

#[test]
fn weak_coupling_matches_an_eigenvalue() {
    let opts = FermiFkOptions::default();
    for omega in [2.0, 0.5, -2.0, -0.5] {
        let g: f64 = 1e-3 * f64::abs(omega);
        for scheme in [FermiScheme::Naive, FermiScheme::Meticulous] {
            let e = fermi_ground_energy(FermiSystem::Driven, scheme, omega, g, 1.0, &opts).unwrap();
            let s = driven_matrix_and_spectrum(omega, g).unwrap();
            let gap = (e.value - s.lambda_plus).abs().min((e.value - s.lambda_minus).abs());
            assert!(gap < 10.0 * g * g / omega.abs(), "{scheme:?} omega={omega}: {} vs {s:?}", e.value);
        }
    }
}

#[test]
fn regime_examples() {
    let th = RegimeThresholds::default();
    let r = regime_classify(0.1, 1.0, &th).unwrap();
    assert_eq!(r.regime, Regime::Resonant);
    let (p, m) = r.approx.unwrap();
    assert!((p - 1.05125).abs() < 1e-12 && (m + 0.95125).abs() < 1e-12);
    assert!(r.error.unwrap() <= 1e-5 && r.within_bound());

    let r = regime_classify(10.0, 0.5, &th).unwrap();
    assert_eq!(r.regime, Regime::DispersivePositive);
    let (p, m) = r.approx.unwrap();
    assert!((p - 10.025).abs() < 1e-12 && (m + 0.025).abs() < 1e-12);
    assert!(r.error.unwrap() <= 1e-4 && r.within_bound());

    let r = regime_classify(-10.0, 0.5, &th).unwrap();
    assert_eq!(r.regime, Regime::DispersiveNegative);
    assert!(r.within_bound());

    let r = regime_classify(1.5, 1e-4, &th).unwrap();
    assert_eq!(r.regime, Regime::Weak);
    assert_eq!(r.approx, Some((1.5, 0.0)));
    assert!(r.within_bound());

    let r = regime_classify(1.0, 1.0, &th).unwrap();
    assert_eq!(r.regime, Regime::Intermediate);
    assert!(r.approx.is_none() && !r.within_bound());

    assert!(regime_classify(1.0, -0.1, &th).is_err());
}

#[test]
fn regime_bounds_hold_across_rows() {
    let th = RegimeThresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let g: f64 = rng.random_range(1e-2..5.0);
        let ratio: f64 = rng.random_range(0.01..0.2);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let res = regime_classify(sign * ratio * g, g, &th).unwrap();
        assert_eq!(res.regime, Regime::Resonant);
        assert!(res.within_bound(), "{res:?}");
        let disp = regime_classify(sign * g / ratio, g, &th).unwrap();
        assert!(matches!(disp.regime, Regime::DispersivePositive | Regime::DispersiveNegative));
        assert!(disp.within_bound(), "{disp:?}");
        let weak = regime_classify(sign * g, g * 1e-3 / 5.0, &th).unwrap();
        assert_eq!(weak.regime, Regime::Weak);
        assert!(weak.within_bound(), "{weak:?}");
    }
}

#[test]
fn trace_metadata() {
    let z = fk_trace_ho_function(1.0, 1.0).unwrap();
    assert_eq!(z.tag, "ho");
    assert_eq!(z.params[0], ("omega".to_string(), 1.0));
    let t = TraceFunction::from_exppoly("x", ExpPoly::phase(2), 1.0);
    assert!((t.value(1.0).unwrap() - c((-1f64).exp(), 0.0)).norm() < 1e-15);
}

#[test]
fn early_stop_misses_slow_driven_limit() {
    let ft = fermi_trace_for(FermiSystem::Driven, FermiScheme::Naive, 0.5, 0.1, 1.0, SourceExpansion::Linear).unwrap();
    let eager = Schedule { min_tau: 0.0, ..Schedule::fermionic() };
    let early = ground_energy_limit(&ft.trace, 1.0, &eager).unwrap();
    assert!(early.value.abs() > 2e-3);
    let full = ground_energy_limit(&ft.trace, 1.0, &Schedule::fermionic()).unwrap();
    assert!(full.value.abs() < 2e-3);
    assert_eq!(*full.taus.last().unwrap(), 1024.0);
}
