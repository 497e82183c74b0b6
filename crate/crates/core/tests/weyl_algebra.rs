use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starq_core::hpoly::{ci, cr};
use starq_core::moyal::{moyal_star_poly, PhasePoly};
use starq_core::weyl_algebra::{
    commutator, groenewold_check, op_mul, weyl_quantize_poly, weyl_symbol,
    xnpm_commutator_closed, HPoly, OperatorPoly,
};

fn w(a: u32, b: u32) -> OperatorPoly {
    OperatorPoly::word(a, b, HPoly::one())
}

fn ih(k: i64) -> HPoly {
    HPoly::i_hbar_pow(1, cr(k, 1))
}

/// Literal rewriting oracle: words over {x, p}, normal-ordered by repeatedly replacing `px` with `xp − iħ`.
fn rewrite(word: &[char]) -> OperatorPoly {
    match word.windows(2).position(|w| w == ['p', 'x']) {
        None => {
            let a = word.iter().filter(|c| **c == 'x').count() as u32;
            w(a, word.len() as u32 - a)
        }
        Some(i) => {
            let mut swapped = word.to_vec();
            swapped.swap(i, i + 1);
            let mut removed = word.to_vec();
            removed.drain(i..i + 2);
            &rewrite(&swapped) + &rewrite(&removed).scale(&ih(-1))
        }
    }
}

fn word_chars(a: u32, b: u32) -> Vec<char> {
    std::iter::repeat_n('x', a as usize)
        .chain(std::iter::repeat_n('p', b as usize))
        .collect()
}

#[test]
fn op_mul_examples() {
    assert_eq!(op_mul(&w(0, 1), &w(1, 0)), &w(1, 1) + &OperatorPoly::scalar(ih(-1)));
    assert_eq!(op_mul(&w(1, 0), &w(0, 1)), w(1, 1));
    assert_eq!(op_mul(&w(1, 0), &w(1, 1)), w(2, 1));
}

#[test]
fn op_mul_matches_rewriting_oracle() {
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut word = word_chars(a, b);
                    word.extend(word_chars(c, d));
                    assert_eq!(op_mul(&w(a, b), &w(c, d)), rewrite(&word), "{a}{b}{c}{d}");
                }
            }
        }
    }
}

#[test]
fn commutator_examples() {
    assert_eq!(commutator(&w(1, 0), &w(0, 1)), OperatorPoly::scalar(ih(1)));
    let x3p3 = commutator(&w(3, 0), &w(0, 3));
    // 3iħ(x²p² + xp²x + p²x²) written through the oracle.
    let mut expected = OperatorPoly::zero();
    for word in ["xxpp", "xppx", "ppxx"] {
        let chars: Vec<char> = word.chars().collect();
        expected = &expected + &rewrite(&chars);
    }
    assert_eq!(x3p3, expected.scale(&ih(3)));
    let a = &w(2, 1) + &w(0, 3);
    assert!(commutator(&a, &a).is_zero());
}

#[test]
fn closed_commutator_examples() {
    assert_eq!(xnpm_commutator_closed(1, 1).unwrap(), OperatorPoly::scalar(ih(1)));
    assert_eq!(xnpm_commutator_closed(3, 1).unwrap(), w(2, 0).scale(&ih(3)));
    let mut expected = rewrite(&['x', 'p', 'p']);
    expected = &expected + &rewrite(&['p', 'p', 'x']);
    assert_eq!(xnpm_commutator_closed(2, 3).unwrap(), expected.scale(&ih(3)));
    assert!(xnpm_commutator_closed(0, 2).is_err());
}

#[test]
fn closed_commutator_theorem_all_small_powers() {
    for n in 1..=5 {
        for m in 1..=5 {
            assert_eq!(
                commutator(&w(n, 0), &w(0, m)),
                xnpm_commutator_closed(n, m).unwrap()
            );
        }
    }
}

#[test]
fn groenewold_anomaly() {
    let g = groenewold_check().unwrap();
    assert!(g.classical.is_zero());
    let q = g.quantum_scalar().expect("quantum side is a multiple of the identity");
    assert_eq!(q, HPoly::monomial(cr(-3, 1), 2));
    assert_eq!(q.eval(1.0).re, -3.0);
}

fn random_op(rng: &mut ChaCha8Rng, deg: u32) -> OperatorPoly {
    let mut out = OperatorPoly::zero();
    for a in 0..=deg {
        for b in 0..=deg - a {
            if rng.random_bool(0.5) {
                let c = cr(rng.random_range(-3..=3), 1) + ci(rng.random_range(-3..=3), 2);
                out = &out + &OperatorPoly::word(a, b, HPoly::constant(c));
            }
        }
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, deg: u32) -> PhasePoly {
    let mut out = PhasePoly::zero();
    for a in 0..=deg {
        for b in 0..=deg - a {
            if rng.random_bool(0.5) {
                let c = cr(rng.random_range(-3..=3), rng.random_range(1..=3))
                    + ci(rng.random_range(-2..=2), 1);
                let h = HPoly::monomial(c, rng.random_range(0..=1));
                out = &out + &PhasePoly::monomial(a, b, h);
            }
        }
    }
    out
}

#[test]
fn jacobi_and_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (a, b, c) = (
            random_op(&mut rng, 3),
            random_op(&mut rng, 3),
            random_op(&mut rng, 3),
        );
        let jac = &(&commutator(&a, &commutator(&b, &c)) + &commutator(&b, &commutator(&c, &a)))
            + &commutator(&c, &commutator(&a, &b));
        assert!(jac.is_zero());
        let lhs = commutator(&op_mul(&a, &b), &c);
        let rhs = &op_mul(&a, &commutator(&b, &c)) + &op_mul(&commutator(&a, &c), &b);
        assert_eq!(lhs, rhs);
        assert_eq!(commutator(&a, &b), -&commutator(&b, &a));
    }
}

#[test]
fn weyl_map_examples() {
    assert_eq!(weyl_quantize_poly(&PhasePoly::mono(2, 0, cr(1, 1))), w(2, 0));
    let xp = weyl_quantize_poly(&PhasePoly::mono(1, 1, cr(1, 1)));
    assert_eq!(xp, &w(1, 1) + &OperatorPoly::scalar(HPoly::i_hbar_pow(1, cr(-1, 2))));
    let sym = weyl_symbol(&w(1, 1));
    let expected = &PhasePoly::mono(1, 1, cr(1, 1))
        + &PhasePoly::constant(HPoly::i_hbar_pow(1, cr(1, 2)));
    assert_eq!(sym, expected);
    assert_eq!(weyl_symbol(&w(2, 0)), PhasePoly::mono(2, 0, cr(1, 1)));
}

#[test]
fn weyl_map_matches_binomial_formula() {
    // Independent formula: Q(x^a p^b) = 2^{-a} Σ_k C(a,k) x̂^k p̂^b x̂^{a-k}.
    for a in 0..5u32 {
        for b in 0..5u32 {
            let mut expected = OperatorPoly::zero();
            for k in 0..=a {
                let binom = (0..k).fold(1i64, |acc, j| acc * (a - j) as i64 / (j + 1) as i64);
                let term = op_mul(&op_mul(&w(k, 0), &w(0, b)), &w(a - k, 0));
                expected = &expected + &term.scale(&HPoly::constant(cr(binom, 1 << a)));
            }
            assert_eq!(weyl_quantize_poly(&PhasePoly::mono(a, b, cr(1, 1))), expected);
        }
    }
}

#[test]
fn weyl_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..30 {
        let f = random_poly(&mut rng, 5);
        assert_eq!(weyl_symbol(&weyl_quantize_poly(&f)), f);
    }
}

#[test]
fn weyl_homomorphism_bridge() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let f = random_poly(&mut rng, 4);
        let g = random_poly(&mut rng, 4);
        assert_eq!(
            weyl_quantize_poly(&moyal_star_poly(&f, &g)),
            op_mul(&weyl_quantize_poly(&f), &weyl_quantize_poly(&g))
        );
    }
}
