use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rough_taylor::multiindex::{increasing_sequences, MultiIndex};
use rough_taylor::vectorfield::*;

// Symbolic polynomials kept as exponent -> coefficient maps; independent of
// the jet engine.
type Sym = BTreeMap<Vec<u32>, f64>;

fn sym_mul(a: &Sym, b: &Sym) -> Sym {
    let mut out = Sym::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

fn sym_partial(a: &Sym, i: usize) -> Sym {
    let mut out = Sym::new();
    for (e, c) in a {
        if e[i] > 0 {
            let mut e2 = e.clone();
            e2[i] -= 1;
            *out.entry(e2).or_insert(0.0) += c * e[i] as f64;
        }
    }
    out
}

fn sym_add(a: &mut Sym, b: &Sym) {
    for (e, c) in b {
        *a.entry(e.clone()).or_insert(0.0) += c;
    }
}

fn sym_eval(a: &Sym, y: &[f64]) -> f64 {
    a.iter()
        .map(|(e, c)| c * e.iter().zip(y).map(|(&k, x)| x.powi(k as i32)).product::<f64>())
        .sum()
}

fn to_sym(p: &Polynomial) -> Sym {
    let mut s = Sym::new();
    for (e, c) in p.terms() {
        *s.entry(e.clone()).or_insert(0.0) += c;
    }
    s
}

fn sym_field(v: &[Vec<Sym>], j: usize, f: &Sym) -> Sym {
    let mut out = Sym::new();
    for (i, vji) in v[j - 1].iter().enumerate() {
        sym_add(&mut out, &sym_mul(vji, &sym_partial(f, i)));
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize, deg: u32) -> Polynomial {
    let mut p = Polynomial::zero(d);
    for _ in 0..rng.gen_range(1..=4) {
        let mut e = vec![0; d];
        let mut left = rng.gen_range(0..=deg);
        while left > 0 {
            e[rng.gen_range(0..d)] += 1;
            left -= 1;
        }
        p.add_term(e, rng.gen_range(-1.0..1.0)).unwrap();
    }
    p
}

fn random_field(rng: &mut ChaCha8Rng, d: usize, m: usize, deg: u32) -> PolynomialField {
    let comps = (0..m)
        .map(|_| (0..d).map(|_| random_poly(rng, d, deg)).collect())
        .collect();
    PolynomialField::from_components(comps).unwrap()
}

fn random_word(rng: &mut ChaCha8Rng, r: usize, m: usize) -> MultiIndex {
    MultiIndex::new((0..r).map(|_| rng.gen_range(1..=m)).collect()).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn iterated_field_matches_symbolic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let f = random_field(&mut rng, d, m, 3);
        let v: Vec<Vec<Sym>> = (1..=m)
            .map(|j| (1..=d).map(|i| to_sym(f.component(j, i))).collect())
            .collect();
        let r = rng.gen_range(1..=5);
        let gamma = random_word(&mut rng, r, m);
        let y = random_point(&mut rng, d);

        let got = iterated_field(&f, &gamma, &y).unwrap();
        let letters = gamma.letters();
        for i in 0..d {
            // 𝒱_{γ(r)} I^i = V^i_{γ(r)}, then apply the rest right to left
            let mut s = v[letters[letters.len() - 1] - 1][i].clone();
            for &j in letters[..letters.len() - 1].iter().rev() {
                s = sym_field(&v, j, &s);
            }
            let want = sym_eval(&s, &y);
            assert!(rel(got.components()[i], want) < 1e-9, "{gamma} comp {i}: {} vs {want}", got.components()[i]);
        }
    }
}

#[test]
fn iterated_field_matches_finite_differences() {
    let model = sine_field();
    let fd = FiniteDifferenceField::wrap(model.field.clone(), 2, 1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let r = rng.gen_range(1..=3);
        let gamma = random_word(&mut rng, r, 3);
        let y = random_point(&mut rng, 2);
        let exact = iterated_field(&*model.field, &gamma, &y).unwrap();
        let approx = iterated_field(&fd, &gamma, &y).unwrap();
        for (a, b) in exact.components().iter().zip(approx.components()) {
            assert!((a - b).abs() <= 1e-4 * (1.0 + a.abs()), "{gamma}: {a} vs {b}");
        }
    }
}

#[test]
fn closed_form_oracle_agrees_with_sine_field() {
    let sine = SineField::scalar();
    let closed = ClosedFormField::new(1, 1, 6, |_, _, zeta, y| match zeta.len() % 4 {
        0 => y[0].sin(),
        1 => y[0].cos(),
        2 => -y[0].sin(),
        _ => -y[0].cos(),
    });
    for r in 1..=5 {
        let g = MultiIndex::new(vec![1; r]).unwrap();
        let a = iterated_field(&sine, &g, &[0.4]).unwrap();
        let b = iterated_field(&closed, &g, &[0.4]).unwrap();
        assert!((a.component(1) - b.component(1)).abs() < 1e-14);
    }
}

#[test]
fn h_function_single_block_is_iterated_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let (d, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let f = random_field(&mut rng, d, m, 3);
        let r = rng.gen_range(1..=4);
        let alpha = random_word(&mut rng, r, m);
        let y = random_point(&mut rng, d);
        let z = rng.gen_range(1..=d);
        let h = h_function(&f, &alpha, &[z], &[r], &y).unwrap();
        let it = iterated_field(&f, &alpha, &y).unwrap();
        assert!(rel(h, it.component(z)) < 1e-12);
    }
}

#[test]
fn euler_and_milstein_fields_round_trip() {
    // 𝒱_j I = V_j and 𝒱_{j,k} I = (∂V_k) V_j, the classical Milstein coefficient
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = random_field(&mut rng, 2, 2, 2);
    let y = [0.3, -0.6];
    for j in 1..=2 {
        let v = iterated_field(&f, &MultiIndex::single(j), &y).unwrap();
        for i in 1..=2 {
            assert!((v.component(i) - f.component(j, i).eval(&y)).abs() < 1e-14);
        }
        for k in 1..=2 {
            let v = iterated_field(&f, &MultiIndex::new(vec![j, k]).unwrap(), &y).unwrap();
            for i in 1..=2 {
                let want: f64 = (1..=2)
                    .map(|l| f.component(j, l).eval(&y) * f.component(k, i).eval_derivative(&[l], &y))
                    .sum();
                assert!((v.component(i) - want).abs() < 1e-12);
            }
        }
    }
}

fn leibniz_case(rng: &mut ChaCha8Rng, r: usize, d: usize, m: usize) -> f64 {
    let f = random_field(rng, d, m, 2);
    let alpha = random_word(rng, r, m);
    let all = increasing_sequences(r);
    let ls = all[rng.gen_range(0..all.len())].clone();
    let tests: Vec<Vec<Polynomial>> = (0..ls.len())
        .map(|_| (0..m).map(|_| random_poly(rng, d, 2)).collect())
        .collect();
    let points: Vec<Vec<f64>> = (0..3).map(|_| random_point(rng, d)).collect();
    leibniz_check(&f, &alpha, &ls, &tests, &points).unwrap()
}

#[test]
fn leibniz_rule_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let r = rng.gen_range(1..=5);
        let (d, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let disc = leibniz_case(&mut rng, r, d, m);
        assert!(disc <= 1e-9, "r={r} d={d} m={m}: {disc}");
    }
}

#[test]
fn leibniz_two_letters_one_block() {
    // 𝒱_{α1}(f_{α2}) has exactly the product-rule terms
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_field(&mut rng, 2, 2, 2);
    let alpha = MultiIndex::new(vec![1, 2]).unwrap();
    let tests = vec![(0..2).map(|_| random_poly(&mut rng, 2, 3)).collect::<Vec<_>>()];
    let disc = leibniz_check(&f, &alpha, &[2], &tests, &[vec![0.2, 0.9]]).unwrap();
    assert!(disc <= 1e-12);
    // p = r: products of f's with no operators
    let tests: Vec<Vec<Polynomial>> = (0..2).map(|_| (0..2).map(|_| random_poly(&mut rng, 2, 3)).collect()).collect();
    let disc = leibniz_check(&f, &alpha, &[1, 2], &tests, &[vec![0.2, 0.9]]).unwrap();
    assert_eq!(disc, 0.0);
}

#[test]
fn lemma_expansion_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let r = rng.gen_range(1..=4);
        let (d, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let f = random_field(&mut rng, d, m, 2);
        let alpha = random_word(&mut rng, r, m);
        let g = random_poly(&mut rng, d, 3);
        let points: Vec<Vec<f64>> = (0..3).map(|_| random_point(&mut rng, d)).collect();
        let disc = lemma_expansion_check(&f, &alpha, &g, &points).unwrap();
        assert!(disc <= 1e-9, "{alpha} d={d}: {disc}");
    }
}

#[test]
fn lemma_expansion_r3_d2_m2() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let f = random_field(&mut rng, 2, 2, 2);
    let g = random_poly(&mut rng, 2, 3);
    for alpha in rough_taylor::multiindex::enumerate_gamma(3, 2).unwrap() {
        let disc = lemma_expansion_check(&f, &alpha, &g, &[vec![0.4, -0.7], vec![1.1, 0.2]]).unwrap();
        assert!(disc <= 1e-9, "{alpha}: {disc}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn leibniz_property(seed in any::<u64>(), r in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let disc = leibniz_case(&mut rng, r, 2, 2);
        prop_assert!(disc <= 1e-9);
    }

    #[test]
    fn evaluate_is_symmetric_in_zeta(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = Arc::new(random_field(&mut rng, 3, 1, 3));
        let y = random_point(&mut rng, 3);
        let a = eval_derivative(&*f, 1, 1, &[3, 1, 2], &y).unwrap();
        let b = eval_derivative(&*f, 1, 1, &[1, 2, 3], &y).unwrap();
        prop_assert_eq!(a, b);
    }
}
