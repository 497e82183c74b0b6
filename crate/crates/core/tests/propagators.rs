use nalgebra::Matrix2;
use num_complex::Complex64;
use starq_core::propagators::{
    driven_matrix_and_spectrum, fermi_driven_propagator, fermi_ho_propagator, free_propagator,
    heisenberg_inhomogeneous, ho_propagator, quadratic_propagator, BosonicPropagatorSpec,
    FermiBasis, QuadraticSystem, SourceExpansion, TimeFunction, ALPHA, ALPHA_STAR, PI_F, PSI_0,
    PSI_F, RK4_STEPS,
};
use starq_core::{Error, ExpPoly, GElem, Parity};
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn ho_propagator_examples() {
    let k = ho_propagator(1.0, 1.0, 0.0, 0.0, PI / 2.0, 1.0).unwrap();
    let expected = (c(1.0, 0.0) / c(0.0, 2.0 * PI)).sqrt();
    assert!((k - expected).norm() < 1e-14);
    let a = ho_propagator(1.3, 0.7, 0.4, -1.1, 2.0, 0.8).unwrap();
    let b = ho_propagator(1.3, 0.7, -1.1, 0.4, 2.0, 0.8).unwrap();
    assert!((a - b).norm() < 1e-15);
    // Small-ω limit against the free particle.
    let k = ho_propagator(1.0, 1e-6, 1.0, 0.0, 1.0, 1.0).unwrap();
    let free = (c(1.0, 0.0) / c(0.0, 2.0 * PI)).sqrt() * c(0.0, 0.5).exp();
    assert!(rel(k, free) < 1e-9);
    assert!(rel(free_propagator(1.0, 1.0, 0.0, 1.0, 1.0), free) < 1e-15);
}

#[test]
fn ho_propagator_rejects_caustics() {
    assert!(matches!(ho_propagator(1.0, 1.0, 0.0, 0.0, PI, 1.0), Err(Error::Caustic(_))));
    assert!(matches!(ho_propagator(1.0, 1.0, 0.0, 0.0, 4.0, 1.0), Err(Error::Caustic(_))));
    assert!(ho_propagator(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
}

fn ho_as_quadratic(m: f64, omega: f64, hbar: f64) -> BosonicPropagatorSpec {
    BosonicPropagatorSpec::Quadratic {
        m,
        c: TimeFunction::Constant(m * omega * omega),
        f: TimeFunction::Constant(0.0),
        hbar,
    }
}

#[test]
fn quadratic_matches_oscillator() {
    let (m, omega, hbar) = (1.2, 0.9, 0.7);
    let spec = ho_as_quadratic(m, omega, hbar);
    for wt in [0.5, 1.0, 2.0] {
        let t = wt / omega;
        for (qf, q0) in [(0.3, -0.2), (1.0, 0.5), (-0.7, 0.0)] {
            let r = quadratic_propagator(&spec, qf, t, q0, 0.0).unwrap();
            let k = ho_propagator(m, omega, qf, q0, t, hbar).unwrap();
            assert!(rel(r.amplitude, k) < 1e-8, "wt={wt}");
            assert_eq!(r.maslov, 0);
            assert!((r.phi_tf - (omega * t).sin() / omega).abs() < 1e-8);
        }
    }
}

#[test]
fn phi_matches_sine() {
    let omega = 1.7;
    let sys = QuadraticSystem::solve(&ho_as_quadratic(1.0, omega, 1.0), 0.0, 1.5, RK4_STEPS).unwrap();
    for (t, phi) in sys.phi_samples() {
        assert!((phi - (omega * t).sin() / omega).abs() < 1e-8);
    }
}

#[test]
fn free_particle_reduction() {
    let spec = BosonicPropagatorSpec::Quadratic {
        m: 2.0,
        c: TimeFunction::Constant(0.0),
        f: TimeFunction::Constant(0.0),
        hbar: 0.5,
    };
    let r = quadratic_propagator(&spec, 1.3, 0.8, -0.4, 0.0).unwrap();
    assert!(rel(r.amplitude, free_propagator(2.0, 1.3, -0.4, 0.8, 0.5)) < 1e-10);
}

#[test]
fn driven_path_boundary_and_euler_lagrange() {
    let m = 1.5;
    let c_fn = TimeFunction::closure(|t| 1.0 + 0.3 * t.sin());
    let f_fn = TimeFunction::closure(|t| 0.5 * (2.0 * t).cos());
    let (cc, ff) = (c_fn.clone(), f_fn.clone());
    let spec = BosonicPropagatorSpec::Quadratic { m, c: c_fn, f: f_fn, hbar: 1.0 };
    let sys = QuadraticSystem::solve(&spec, 0.0, 1.2, RK4_STEPS).unwrap();
    let path = sys.classical_path(0.8, -0.3).unwrap();
    assert!((path[0].1 + 0.3).abs() < 1e-10);
    assert!((path.last().unwrap().1 - 0.8).abs() < 1e-10);
    let h = path[1].0 - path[0].0;
    for k in [500, 1500, 2048, 3000, 3600] {
        let (t, q, _) = path[k];
        let qdd = (path[k + 1].1 - 2.0 * q + path[k - 1].1) / (h * h);
        assert!((m * qdd + cc.eval(t) * q - ff.eval(t)).abs() < 1e-6, "t={t}");
    }
    // Action is quadratic in the endpoints: second differences are constant.
    let s = |a: f64, b: f64| sys.action(a, b).unwrap();
    let d1 = s(1.0, 0.0) - 2.0 * s(0.0, 0.0) + s(-1.0, 0.0);
    let d2 = s(3.0, 0.0) - 2.0 * s(2.0, 0.0) + s(1.0, 0.0);
    assert!((d1 - d2).abs() < 1e-9);
}

#[test]
fn tabulated_coefficients_interpolate() {
    let table = TimeFunction::table(vec![(1.0, 3.0), (0.0, 1.0)]).unwrap();
    assert_eq!(table.eval(0.25), 1.5);
    assert_eq!(table.eval(-1.0), 1.0);
    assert_eq!(table.eval(2.0), 3.0);
    let omega: f64 = 1.1;
    let samples = (0..=10).map(|k| (k as f64 * 0.2, omega * omega)).collect();
    let spec = BosonicPropagatorSpec::Quadratic {
        m: 1.0,
        c: TimeFunction::table(samples).unwrap(),
        f: TimeFunction::Constant(0.0),
        hbar: 1.0,
    };
    let r = quadratic_propagator(&spec, 0.2, 1.0, 0.1, 0.0).unwrap();
    assert!(rel(r.amplitude, ho_propagator(1.0, omega, 0.2, 0.1, 1.0, 1.0).unwrap()) < 1e-8);
}

#[test]
fn quadratic_caustics_are_rejected() {
    let spec = ho_as_quadratic(1.0, 1.0, 1.0);
    let past = quadratic_propagator(&spec, 0.1, 4.0, 0.0, 0.0);
    match past {
        Err(Error::Caustic(msg)) => assert!(msg.contains("Maslov index 1")),
        other => panic!("expected a caustic, got {other:?}"),
    }
    let sys = QuadraticSystem::solve(&spec, 0.0, 4.0, RK4_STEPS).unwrap();
    assert_eq!(sys.maslov_index(), 1);
    assert!(matches!(quadratic_propagator(&spec, 0.1, PI, 0.0, 0.0), Err(Error::Caustic(_))));
    let stiff = ho_as_quadratic(1.0, 1e4, 1.0);
    assert!(quadratic_propagator(&stiff, 0.1, 1.0, 0.0, 0.0).is_err());
}

fn at(e: &GElem<ExpPoly>, t: f64, omega: f64) -> GElem<Complex64> {
    e.map_coeffs(|cf| cf.eval(c(t, 0.0), omega))
}

#[test]
fn fermi_ho_kernels() {
    let omega = 1.3;
    let k = fermi_ho_propagator(omega, FermiBasis::Meticulous, 1.0);
    let k0 = k.at(0.0);
    assert_eq!(k0.body(), c(1.0, 0.0));
    assert!((k0.coefficient_of(&[PI_F, PSI_0]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    let kp = k.at(PI / omega);
    assert!((kp.body() - c(0.0, 1.0)).norm() < 1e-14);
    assert!((kp.coefficient_of(&[PI_F, PSI_0]).unwrap() - c(0.0, -1.0)).norm() < 1e-14);
    let naive = fermi_ho_propagator(omega, FermiBasis::Naive, 1.0);
    for t in [0.0, 0.4, 2.1] {
        let (a, b) = (k.at(t), naive.at(t));
        assert_eq!(a.body(), b.body());
        assert_eq!(
            a.coefficient_of(&[PI_F, PSI_0]).unwrap(),
            b.coefficient_of(&[PSI_F, PSI_0]).unwrap()
        );
        assert_eq!(a.parity(), Parity::Even);
    }
}

#[test]
fn fermi_driven_kernels() {
    let omega = 0.8;
    for expansion in [SourceExpansion::Exact, SourceExpansion::Linear] {
        let k = fermi_driven_propagator(omega, FermiBasis::Meticulous, 1.0, expansion).unwrap();
        let k0 = k.at(0.0);
        let one_plus = &GElem::one(k0.registry())
            + &GElem::product_of(k0.registry(), &[PI_F, PSI_0], c(1.0, 0.0)).unwrap();
        assert!(k0.distance(&one_plus).unwrap() < 1e-15);
        for t in [0.3, 1.0, 2.5] {
            assert_eq!(k.at(t).pruned(1e-15).parity(), Parity::Even);
        }
        // Coefficient of α* π_f at ωt = π.
        let kp = k.at(PI / omega);
        let coeff = kp.coefficient_of(&[ALPHA_STAR, PI_F]).unwrap();
        assert!((coeff - c(-2.0 / omega, 0.0)).norm() < 1e-14);
    }
    assert!(fermi_driven_propagator(0.0, FermiBasis::Naive, 1.0, SourceExpansion::Exact).is_err());
}

#[test]
fn drivers_off_reduction() {
    let omega = 1.7;
    for basis in [FermiBasis::Naive, FermiBasis::Meticulous] {
        let driven = fermi_driven_propagator(omega, basis, 1.0, SourceExpansion::Exact).unwrap();
        let ho = fermi_ho_propagator(omega, basis, 1.0);
        // Drop every monomial containing a driver.
        let reg = driven.registry().clone();
        let drivers = GElem::<ExpPoly>::mask_of(&reg, &[ALPHA, ALPHA_STAR]).unwrap();
        let off = driven.kernel.filter_monomials(|m| m & drivers == 0);
        let unphased = ho.kernel.scale_by(&ExpPoly::phase(1));
        // ExpPoly products are exact on integer phase labels.
        assert_eq!(off, unphased);
    }
}

#[test]
fn heisenberg_source_terms() {
    let omega = 0.6;
    let k = fermi_driven_propagator(omega, FermiBasis::Meticulous, 1.0, SourceExpansion::Exact).unwrap();
    let reg = k.registry().clone();
    let (psi_inh, pi_inh) = heisenberg_inhomogeneous(omega, &reg).unwrap();
    let pi_f = GElem::generator(&reg, PI_F).unwrap();
    let psi0 = GElem::generator(&reg, PSI_0).unwrap();
    let expected = &(&pi_f * &psi_inh) + &(&pi_inh * &psi0);
    let mask = |names: &[&str]| GElem::<ExpPoly>::mask_of(&reg, names).unwrap();
    let (a, b) = (mask(&[ALPHA_STAR, PI_F]), mask(&[ALPHA, PSI_0]));
    let linear = k.exponent.filter_monomials(|m| m == a || m == b);
    for t in [0.0, 0.5, 1.9] {
        assert!(at(&linear, t, omega).distance(&at(&expected, t, omega)).unwrap() < 1e-14);
    }
}

#[test]
fn driven_spectrum() {
    let s = driven_matrix_and_spectrum(3.0, 2.0).unwrap();
    assert!((s.lambda_plus - 4.0).abs() < 1e-14);
    assert!((s.lambda_minus + 1.0).abs() < 1e-14);
    let s = driven_matrix_and_spectrum(2.5, 0.0).unwrap();
    assert_eq!((s.lambda_plus, s.lambda_minus), (2.5, 0.0));
    let s = driven_matrix_and_spectrum(0.0, 1.0).unwrap();
    assert_eq!((s.lambda_plus, s.lambda_minus), (1.0, -1.0));
    for (omega, g) in [(3.0, 2.0), (-0.7, 0.4), (10.0, 0.5), (0.01, 2.0)] {
        let s = driven_matrix_and_spectrum(omega, g).unwrap();
        let m = Matrix2::new(s.matrix[0][0], s.matrix[0][1], s.matrix[1][0], s.matrix[1][1]);
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[1] - s.lambda_plus).abs() < 1e-12);
        assert!((ev[0] - s.lambda_minus).abs() < 1e-12);
    }
    assert!(driven_matrix_and_spectrum(1.0, -1.0).is_err());
}
