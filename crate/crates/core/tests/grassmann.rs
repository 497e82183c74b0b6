use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starq_core::grassmann::{gaussian_berezin, gaussian_berezin_brute};
use starq_core::{
    BerezinConvention, Error, GaussianMeasure, GrassmannElement as G, MeasureSide, Parity,
    Registry,
};
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn reg4() -> Arc<Registry> {
    Registry::new(&["t1", "t2", "t3", "t4"]).unwrap()
}

fn gen(r: &Arc<Registry>, n: &str) -> G {
    G::generator(r, n).unwrap()
}

fn basis(r: &Arc<Registry>) -> Vec<G> {
    (0..(1u64 << r.len()))
        .map(|m| G::monomial(r, m, c(1.0, 0.0)))
        .collect()
}

#[test]
fn product_signs_and_nilpotency() {
    let r = reg4();
    let (t1, t2) = (gen(&r, "t1"), gen(&r, "t2"));
    let t12 = G::product_of(&r, &["t1", "t2"], c(1.0, 0.0)).unwrap();
    assert_eq!(&t1 * &t2, t12);
    assert_eq!(&t2 * &t1, t12.neg());
    assert!((&t1 * &t1).is_zero());
    let one = G::one(&r);
    let lhs = &(&one + &t1) * &(&one + &t2);
    let rhs = &(&(&one + &t1) + &t2) + &t12;
    assert_eq!(lhs, rhs);
}

#[test]
fn registry_mismatch_is_an_error() {
    let a = Registry::new(&["a"]).unwrap();
    let b = Registry::new(&["b"]).unwrap();
    assert_eq!(
        gen(&a, "a").try_mul(&gen(&b, "b")),
        Err(Error::RegistryMismatch)
    );
    assert!(matches!(
        Registry::new(&["a", "a"]),
        Err(Error::DuplicateGenerator(_))
    ));
}

#[test]
fn left_derivative_examples() {
    let r = reg4();
    let t12 = G::product_of(&r, &["t1", "t2"], c(1.0, 0.0)).unwrap();
    assert_eq!(t12.left_derivative("t1").unwrap(), gen(&r, "t2"));
    assert_eq!(t12.left_derivative("t2").unwrap(), gen(&r, "t1").neg());
    assert!(G::scalar(&r, c(5.0, 0.0))
        .left_derivative("t1")
        .unwrap()
        .is_zero());
    assert!(matches!(
        t12.left_derivative("zz"),
        Err(Error::UnknownGenerator(_))
    ));
}

#[test]
fn berezin_single_variable_rules() {
    let r = Registry::new(&["psi"]).unwrap();
    let psi = gen(&r, "psi");
    let one = G::one(&r);
    let das = BerezinConvention::Das;
    let w = BerezinConvention::Weinberg;
    assert!(one
        .berezin_integrate_with(&["psi"], das, MeasureSide::Left)
        .unwrap()
        .is_zero());
    assert_eq!(
        psi.berezin_integrate_with(&["psi"], das, MeasureSide::Left)
            .unwrap(),
        one
    );
    assert_eq!(
        psi.berezin_integrate_with(&["psi"], w, MeasureSide::Right)
            .unwrap(),
        one
    );
    assert_eq!(
        psi.berezin_integrate_with(&["psi"], w, MeasureSide::Left)
            .unwrap(),
        one.neg()
    );
    assert_eq!(
        psi.berezin_integrate(&["psi"], MeasureSide::Right).unwrap(),
        one
    );
}

#[test]
fn berezin_two_generators_right_measure() {
    // Hand iteration: ψ1ψ2 dψ1 = -ψ2, then -ψ2 dψ2 = -1.
    let r = Registry::new(&["psi1", "psi2"]).unwrap();
    let f = G::product_of(&r, &["psi1", "psi2"], c(1.0, 0.0)).unwrap();
    let v = f
        .berezin_integrate(&["psi1", "psi2"], MeasureSide::Right)
        .unwrap();
    assert_eq!(v, G::scalar(&r, c(-1.0, 0.0)));
}

#[test]
fn berezin_duplicate_and_unknown() {
    let r = reg4();
    let f = gen(&r, "t1");
    assert!(matches!(
        f.berezin_integrate(&["t1", "t1"], MeasureSide::Left),
        Err(Error::DuplicateGenerator(_))
    ));
    assert!(matches!(
        f.berezin_integrate(&["q"], MeasureSide::Left),
        Err(Error::UnknownGenerator(_))
    ));
}

#[test]
fn exp_examples() {
    let r = reg4();
    let t12 = G::product_of(&r, &["t1", "t2"], c(1.0, 0.0)).unwrap();
    let one = G::one(&r);
    assert_eq!(t12.exp().unwrap(), &one + &t12);
    assert_eq!(G::zero(&r).exp().unwrap(), one);
    let a = c(0.3, -0.7);
    let e = (&G::scalar(&r, a) + &t12).exp().unwrap();
    let expected = (&one + &t12).scale(a.exp());
    assert!(e.distance(&expected).unwrap() < 1e-15);
    // Soul with two commuting even parts: exp(t1t2 + t3t4) = 1 + t1t2 + t3t4 + t1t2t3t4.
    let t34 = G::product_of(&r, &["t3", "t4"], c(1.0, 0.0)).unwrap();
    let e2 = (&t12 + &t34).exp().unwrap();
    let expected2 = &(&(&one + &t12) + &t34) + &(&t12 * &t34);
    assert!(e2.distance(&expected2).unwrap() < 1e-15);
}

#[test]
fn parity_examples() {
    let r = reg4();
    let t1 = gen(&r, "t1");
    let t12 = G::product_of(&r, &["t1", "t2"], c(1.0, 0.0)).unwrap();
    assert_eq!(t1.parity(), Parity::Odd);
    assert_eq!(t12.parity(), Parity::Even);
    assert_eq!((&G::one(&r) + &t1).parity(), Parity::Mixed);
    assert_eq!(G::zero(&r).parity(), Parity::Even);
}

#[test]
fn delta_sifts_and_scales() {
    let r = Registry::new(&["th"]).unwrap();
    let th = gen(&r, "th");
    let d = G::delta(&r, &[th.clone()]).unwrap();
    assert_eq!(d, th);
    let f = &G::scalar(&r, c(2.0, 1.0)) + &th.scale(c(-3.0, 0.0));
    let sifted = (&d * &f)
        .berezin_integrate_with(&["th"], BerezinConvention::Das, MeasureSide::Left)
        .unwrap();
    assert_eq!(sifted, G::scalar(&r, c(2.0, 1.0)));
    assert_eq!(G::delta(&r, &[G::one(&r)]), Err(Error::NotOdd));
}

#[test]
fn delta_jacobian_in_numerator() {
    // δ(ψ0 − ψ − (ħ/2)λ) = (−ħ/2)^n δ(λ − (2/ħ)(ψ0 − ψ)) per pair of generators.
    let hbar = 0.7;
    for n in 1..=2usize {
        let mut names = Vec::new();
        for j in 0..n {
            names.push(format!("psi0_{j}"));
            names.push(format!("psi_{j}"));
            names.push(format!("lam_{j}"));
        }
        let r = Registry::new(&names).unwrap();
        let mut lhs_args = Vec::new();
        let mut rhs_args = Vec::new();
        for j in 0..n {
            let p0 = gen(&r, &format!("psi0_{j}"));
            let p = gen(&r, &format!("psi_{j}"));
            let l = gen(&r, &format!("lam_{j}"));
            let diff = &p0 - &p;
            lhs_args.push(&diff - &l.scale(c(hbar / 2.0, 0.0)));
            rhs_args.push(&l - &diff.scale(c(2.0 / hbar, 0.0)));
        }
        let lhs = G::delta(&r, &lhs_args).unwrap();
        let rhs = G::delta(&r, &rhs_args)
            .unwrap()
            .scale(c((-hbar / 2.0).powi(n as i32), 0.0));
        assert!(lhs.distance(&rhs).unwrap() < 1e-14, "n = {n}");
    }
}

#[test]
fn derivative_algebra_on_full_basis() {
    let r = reg4();
    for f in basis(&r) {
        for i in 0..4 {
            assert!(f.left_derivative_at(i).left_derivative_at(i).is_zero());
            for j in 0..4 {
                let a = f.left_derivative_at(j).left_derivative_at(i);
                let b = f.left_derivative_at(i).left_derivative_at(j);
                assert!((&a + &b).is_zero());
                // {∂_i, θ_j} f = δ_ij f
                let tj = G::monomial(&r, 1 << j, c(1.0, 0.0));
                let anti = &(&tj * &f).left_derivative_at(i) + &(&tj * &f.left_derivative_at(i));
                let expected = if i == j { f.clone() } else { G::zero(&r) };
                assert_eq!(anti, expected);
            }
        }
    }
}

#[test]
fn integration_equals_differentiation() {
    let r = reg4();
    let names = ["t1", "t2", "t3", "t4"];
    for f in basis(&r) {
        for (i, n) in names.iter().enumerate() {
            let d = f.left_derivative_at(i);
            let das_left = f
                .berezin_integrate_with(&[n], BerezinConvention::Das, MeasureSide::Left)
                .unwrap();
            let w_left = f.berezin_integrate(&[n], MeasureSide::Left).unwrap();
            let w_right = f.berezin_integrate(&[n], MeasureSide::Right).unwrap();
            assert_eq!(das_left, d);
            assert_eq!(w_left, d.neg());
            assert_eq!(w_right, f.right_derivative_at(i));
        }
    }
}

#[test]
fn associativity_on_exhaustive_basis() {
    let r = reg4();
    let b = basis(&r);
    for x in &b {
        for y in &b {
            for z in &b {
                assert_eq!(&(x * y) * z, x * &(y * z));
            }
        }
    }
}

fn random_elem(r: &Arc<Registry>, rng: &mut ChaCha8Rng) -> G {
    let mut out = G::zero(r);
    for m in 0..(1u64 << r.len()) {
        if rng.random_bool(0.6) {
            // Dyadic coefficients keep products exact.
            let re = rng.random_range(-8..=8) as f64 / 4.0;
            let im = rng.random_range(-8..=8) as f64 / 4.0;
            out = &out + &G::monomial(r, m, c(re, im));
        }
    }
    out
}

#[test]
fn associativity_on_random_triples() {
    let r = reg4();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (x, y, z) = (
            random_elem(&r, &mut rng),
            random_elem(&r, &mut rng),
            random_elem(&r, &mut rng),
        );
        assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
    }
}

proptest! {
    #[test]
    fn graded_commutativity(ma in 0u64..16, mb in 0u64..16, ca in -4i32..4, cb in -4i32..4) {
        let r = reg4();
        let a = G::monomial(&r, ma, c(ca as f64, 1.0));
        let b = G::monomial(&r, mb, c(cb as f64, -1.0));
        let sign = if (ma.count_ones() * mb.count_ones()) % 2 == 1 { -1.0 } else { 1.0 };
        prop_assert_eq!(&a * &b, (&b * &a).scale(c(sign, 0.0)));
    }

    #[test]
    fn parity_is_multiplicative(ma in 0u64..16, mb in 0u64..16) {
        let r = reg4();
        let a = G::monomial(&r, ma, c(1.0, 0.0));
        let b = G::monomial(&r, mb, c(1.0, 0.0));
        let ab = &a * &b;
        prop_assume!(!ab.is_zero());
        let odd = |p: Parity| p == Parity::Odd;
        prop_assert_eq!(odd(ab.parity()), odd(a.parity()) ^ odd(b.parity()));
    }
}

fn gaussian_setup(n: usize) -> (Arc<Registry>, Vec<String>, Vec<String>, Vec<G>, Vec<G>) {
    let mut names = Vec::new();
    let u: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    let v: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    names.extend(u.iter().cloned());
    names.extend(v.iter().cloned());
    for i in 1..=n {
        names.push(format!("a{i}"));
        names.push(format!("b{i}"));
    }
    let r = Registry::new(&names).unwrap();
    let a = (1..=n).map(|i| gen(&r, &format!("a{i}"))).collect();
    let b = (1..=n).map(|i| gen(&r, &format!("b{i}"))).collect();
    (r, u, v, a, b)
}

#[test]
fn gaussian_n1_examples() {
    let (r, u, v, a, b) = gaussian_setup(1);
    let uu: Vec<&str> = u.iter().map(String::as_str).collect();
    let vv: Vec<&str> = v.iter().map(String::as_str).collect();
    let m = DMatrix::from_element(1, 1, c(2.0, 0.0));
    let zero = vec![G::zero(&r)];
    let det_only = gaussian_berezin(&r, &m, &zero, &zero).unwrap();
    assert_eq!(det_only, G::scalar(&r, c(2.0, 0.0)));
    let brute = gaussian_berezin_brute(&r, &uu, &vv, &m, &a, &b, GaussianMeasure::Paired).unwrap();
    let closed = gaussian_berezin(&r, &m, &a, &b).unwrap();
    // Sources anticommute with u, v, so the exponent comes out as +a M⁻¹ b.
    let a1b1 = &a[0] * &b[0];
    let expected = &G::scalar(&r, c(2.0, 0.0)) + &a1b1;
    assert!(brute.distance(&expected).unwrap() < 1e-15);
    assert!(closed.distance(&expected).unwrap() < 1e-15);
}

#[test]
fn gaussian_identity_n2() {
    let (r, u, v, a, b) = gaussian_setup(2);
    let uu: Vec<&str> = u.iter().map(String::as_str).collect();
    let vv: Vec<&str> = v.iter().map(String::as_str).collect();
    let m = DMatrix::<Complex64>::identity(2, 2);
    let brute = gaussian_berezin_brute(&r, &uu, &vv, &m, &a, &b, GaussianMeasure::Paired).unwrap();
    let ab = &(&a[0] * &b[0]) + &(&a[1] * &b[1]);
    let expected = ab.exp().unwrap();
    assert!(brute.distance(&expected).unwrap() < 1e-15);
}

#[test]
fn gaussian_singular_matrix() {
    let (r, _, _, a, b) = gaussian_setup(2);
    let m = DMatrix::<Complex64>::zeros(2, 2);
    assert_eq!(gaussian_berezin(&r, &m, &a, &b), Err(Error::SingularMatrix));
}

#[test]
fn gaussian_closed_form_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..50 {
        let n = 1 + trial % 3;
        let (r, u, v, a, b) = gaussian_setup(n);
        let uu: Vec<&str> = u.iter().map(String::as_str).collect();
        let vv: Vec<&str> = v.iter().map(String::as_str).collect();
        let m = DMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
        });
        let closed = gaussian_berezin(&r, &m, &a, &b).unwrap();
        let brute =
            gaussian_berezin_brute(&r, &uu, &vv, &m, &a, &b, GaussianMeasure::Paired).unwrap();
        let scale = closed.terms().map(|(_, c)| c.norm()).fold(1.0, f64::max);
        assert!(closed.distance(&brute).unwrap() <= 1e-12 * scale, "trial {trial}");
        let blocked =
            gaussian_berezin_brute(&r, &uu, &vv, &m, &a, &b, GaussianMeasure::Blocked).unwrap();
        let sign = if (n * (n - 1) / 2) % 2 == 1 { -1.0 } else { 1.0 };
        assert!(blocked.distance(&brute.scale(c(sign, 0.0))).unwrap() <= 1e-12 * scale);
    }
}

#[test]
fn substitution_and_embedding() {
    let small = Registry::new(&["a", "b"]).unwrap();
    let big = Registry::new(&["b", "z", "a"]).unwrap();
    let ab = G::product_of(&small, &["a", "b"], c(3.0, 0.0)).unwrap();
    let e = ab.embed(&big).unwrap();
    assert_eq!(e.coefficient_of(&["a", "b"]).unwrap(), c(3.0, 0.0));
    assert_eq!(e.coefficient_of(&["b", "a"]).unwrap(), c(-3.0, 0.0));
}

#[test]
fn display_names_generators() {
    let r = reg4();
    let f = &G::scalar(&r, c(2.0, 0.0)) + &G::product_of(&r, &["t1", "t3"], c(0.0, -1.0)).unwrap();
    assert_eq!(f.to_string(), "2 + -1i*t1*t3");
}
