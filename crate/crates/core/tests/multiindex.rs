use std::collections::BTreeSet;

use proptest::prelude::*;
use rough_taylor::multiindex::*;

fn word(v: Vec<usize>) -> MultiIndex {
    MultiIndex::new(v).unwrap()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

// every interleaving of a and b, by choosing which slots hold a's letters
fn interleavings(a: &[usize], b: &[usize]) -> Vec<Vec<usize>> {
    let n = a.len() + b.len();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == a.len())
        .map(|mask| {
            let (mut i, mut j) = (0, 0);
            (0..n)
                .map(|s| {
                    if mask >> s & 1 == 1 {
                        i += 1;
                        a[i - 1]
                    } else {
                        j += 1;
                        b[j - 1]
                    }
                })
                .collect()
        })
        .collect()
}

fn letters(max_len: usize, m: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=m, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shuffles_are_the_interleavings(a in letters(5, 3), b in letters(5, 3)) {
        let (g1, g2) = (word(a.clone()), word(b.clone()));
        let sh = shuffles(&g1, &g2).unwrap();
        prop_assert_eq!(sh.len(), binomial(a.len() + b.len(), a.len()));
        let joined = g1.concat(&g2);
        let mut got: Vec<Vec<usize>> = sh
            .iter()
            .map(|rho| rho.inverse().permute_word(&joined).letters().to_vec())
            .collect();
        let mut want = interleavings(&a, &b);
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn dotted_form_round_trips(a in letters(8, 9)) {
        let w = word(a);
        prop_assert_eq!(MultiIndex::parse_dotted(&w.dotted()).unwrap(), w);
    }

    #[test]
    fn gamma_theta_round_trip(
        b in prop::collection::vec(0.55f64..0.99, 1..=3),
        counts in prop::collection::vec(0usize..=3, 3),
    ) {
        let m = b.len();
        let beta = ExponentVector::holder(b.clone()).unwrap();
        let k: Vec<usize> = counts[..m].to_vec();
        prop_assume!(k.iter().sum::<usize>() >= 2);
        let theta = k.iter().zip(&b).map(|(k, b)| *k as f64 * b).sum::<f64>() - 1.0;
        let set = gamma_theta(theta, &beta, m).unwrap();
        prop_assert!(set.hierarchical());
        prop_assert!((theta_of(&set, &beta).unwrap() - theta).abs() <= 1e-12);
    }

    #[test]
    fn gamma_rho_round_trip(h in prop::collection::vec(0.55f64..0.99, 1..=2), a in letters(4, 2)) {
        let m = h.len();
        prop_assume!(a.iter().all(|&l| l <= m));
        let hv = ExponentVector::hurst(h).unwrap();
        let rho = rho_value(&word(a), &hv);
        let set = gamma_rho(rho, &hv, m).unwrap();
        prop_assume!(!set.is_empty());
        prop_assert!((rho_of(&set, &hv).unwrap() - rho).abs() <= 1e-12);
    }

    #[test]
    fn rates_grow_with_the_set(
        b in prop::collection::vec(0.55f64..0.99, 2),
        small in prop::collection::vec(any::<bool>(), 14),
        extra in prop::collection::vec(any::<bool>(), 14),
    ) {
        // words of length ≤ 3 over two letters
        let all: Vec<MultiIndex> = (1..=3).flat_map(|r| enumerate_gamma(r, 2).unwrap()).collect();
        let s1 = IndexSet::new(2, all.iter().zip(&small).filter(|(_, &k)| k).map(|(w, _)| w.clone())).unwrap();
        let s2 = s1.union(&IndexSet::new(2, all.iter().zip(&extra).filter(|(_, &k)| k).map(|(w, _)| w.clone())).unwrap());
        let beta = ExponentVector::holder(b.clone()).unwrap();
        let h = ExponentVector::hurst(b).unwrap();
        prop_assert!(theta_of(&s1, &beta).unwrap() <= theta_of(&s2, &beta).unwrap());
        prop_assert!(rho_of(&s1, &h).unwrap() <= rho_of(&s2, &h).unwrap());
    }
}

#[test]
fn shuffle_counts_up_to_total_length_ten() {
    for r1 in 1..10 {
        for r2 in 1..=10 - r1 {
            assert_eq!(shuffles_by_len(r1, r2).len(), binomial(r1 + r2, r1), "({r1}, {r2})");
        }
    }
}

#[test]
fn duality_exhaustive_to_six() {
    for r in 1..=6 {
        let seqs = increasing_sequences(r);
        for ls in &seqs {
            for taus in seqs.iter().filter(|t| t.len() == ls.len()) {
                let xi: BTreeSet<Permutation> = xi_with_constraints(ls, taus).unwrap().into_iter().collect();
                let theta: BTreeSet<Permutation> = theta_with_constraints(ls, taus)
                    .unwrap()
                    .iter()
                    .map(Permutation::inverse)
                    .collect();
                assert_eq!(xi.is_empty(), theta.is_empty(), "ls={ls:?} taus={taus:?}");
                assert_eq!(xi, theta, "ls={ls:?} taus={taus:?}");
            }
        }
    }
}

#[test]
fn theta_members_satisfy_rule_three() {
    for r in 1..=6 {
        for ls in increasing_sequences(r) {
            for mu in theta_set(&ls).unwrap() {
                assert!(satisfies_rule3(&mu, &ls), "ls={ls:?} mu={mu:?}");
            }
        }
    }
}

#[test]
fn xi_partitions_by_block_ends() {
    for r in 1..=6 {
        let seqs = increasing_sequences(r);
        for taus in &seqs {
            let whole: Vec<Permutation> = xi_set(taus).unwrap();
            let mut parts: Vec<Permutation> = seqs
                .iter()
                .filter(|ls| ls.len() == taus.len())
                .flat_map(|ls| xi_with_constraints(ls, taus).unwrap())
                .collect();
            let n = parts.len();
            parts.sort();
            parts.dedup();
            assert_eq!(parts.len(), n, "overlapping parts for taus={taus:?}");
            let mut whole_sorted = whole.clone();
            whole_sorted.sort();
            assert_eq!(parts, whole_sorted, "taus={taus:?}");
        }
    }
}

#[test]
fn gamma_enumeration_is_graded_and_complete() {
    for m in 1..=3 {
        for r in 1..=4 {
            let g = enumerate_gamma(r, m).unwrap();
            assert_eq!(g.len(), m.pow(r as u32));
            assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }
    assert!(word(vec![2]) < word(vec![1, 1]));
}

#[test]
fn best_set_constructors() {
    // gamma_rho(2H − 1) is the Euler set, with and without a time letter
    for (h, m) in [(vec![0.7], 1), (vec![0.6, 0.8], 2), (vec![1.0, 0.7, 0.7], 3)] {
        let hv = ExponentVector::hurst(h.clone()).unwrap();
        let hmin = h.iter().copied().filter(|&x| x < 1.0).fold(f64::INFINITY, f64::min);
        assert_eq!(gamma_rho(2.0 * hmin - 1.0, &hv, m).unwrap(), IndexSet::singletons(m), "{h:?}");
    }
    // gamma_theta((N+1)β − 1) is the complete set of order N
    for n in 1..=4 {
        let beta = ExponentVector::holder(vec![0.68, 0.68]).unwrap();
        let set = gamma_theta((n as f64 + 1.0) * 0.68 - 1.0, &beta, 2).unwrap();
        assert_eq!(set, IndexSet::complete(2, n).unwrap(), "N = {n}");
        assert!((theta_of(&set, &beta).unwrap() - ((n as f64 + 1.0) * 0.68 - 1.0)).abs() <= 1e-12);
    }
}
