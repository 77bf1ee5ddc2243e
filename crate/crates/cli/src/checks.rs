//! Property suites run by `rough-taylor check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rough_taylor::integrals::{nested_integral_check, shuffle_identity_check, StepGrid};
use rough_taylor::multiindex::{check_duality, increasing_sequences, shuffles, shuffles_by_len, MultiIndex};
use rough_taylor::signal::SignalGenerator;
use rough_taylor::vectorfield::{lemma_expansion_check, leibniz_check};
use rough_taylor::{DrivingSignal, ExponentVector, Polynomial, PolynomialField, SignalSpec};

pub const SUITES: &[&str] = &["combinatorics", "jets", "integrals"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub cases: usize,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

struct Tally {
    suite: &'static str,
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
    counterexample: Option<String>,
}

impl Tally {
    fn new(suite: &'static str, name: &'static str, tolerance: f64) -> Self {
        Tally {
            suite,
            name,
            tolerance,
            cases: 0,
            worst: 0.0,
            counterexample: None,
        }
    }

    fn add(&mut self, discrepancy: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN counts as a failure
        let bad = !(discrepancy <= self.tolerance);
        if bad || discrepancy > self.worst {
            self.worst = if discrepancy.is_nan() { f64::INFINITY } else { discrepancy.max(self.worst) };
        }
        if bad && self.counterexample.is_none() {
            self.counterexample = Some(format!("{} (discrepancy {discrepancy:e})", case()));
        }
    }

    fn fail(&mut self, case: String) {
        self.add(f64::INFINITY, || case);
    }

    fn done(self) -> CheckResult {
        CheckResult {
            suite: self.suite.into(),
            name: self.name.into(),
            cases: self.cases,
            max_discrepancy: self.worst,
            tolerance: self.tolerance,
            passed: self.counterexample.is_none(),
            counterexample: self.counterexample,
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Ξ/Θ duality for every `r ≤ 6` and every admissible `(l⃗, τ⃗)`, and
/// shuffle counts for every pair of lengths with total at most 10.
pub fn combinatorics() -> Vec<CheckResult> {
    let mut dual = Tally::new("combinatorics", "xi_theta_duality", 0.0);
    for r in 1..=6 {
        let seqs = increasing_sequences(r);
        for ls in &seqs {
            for taus in seqs.iter().filter(|t| t.len() == ls.len()) {
                match check_duality(ls, taus) {
                    Ok(true) => dual.add(0.0, String::new),
                    Ok(false) => dual.fail(format!("r={r} ls={ls:?} taus={taus:?}")),
                    Err(e) => dual.fail(format!("r={r} ls={ls:?} taus={taus:?}: {e}")),
                }
            }
        }
    }

    let mut count = Tally::new("combinatorics", "shuffle_counts", 0.0);
    for r1 in 1..10 {
        for r2 in 1..=10 - r1 {
            let sh = shuffles_by_len(r1, r2);
            let want = binomial(r1 + r2, r1);
            let mut distinct = sh.clone();
            distinct.sort();
            distinct.dedup();
            // each member keeps both blocks in order
            let ordered = sh.iter().all(|rho| {
                (1..r1).all(|i| rho.at(i) < rho.at(i + 1)) && (r1 + 1..r1 + r2).all(|i| rho.at(i) < rho.at(i + 1))
            });
            let off = (sh.len() as f64 - want as f64).abs() + (sh.len() - distinct.len()) as f64;
            count.add(if ordered { off } else { f64::INFINITY }, || {
                format!("lengths ({r1}, {r2}): {} shuffles, expected {want}", sh.len())
            });
        }
    }
    // letters do not matter
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let r1 = rng.gen_range(1..=5);
        let r2 = rng.gen_range(1..=10 - r1);
        let g1 = random_word(&mut rng, r1, 3);
        let g2 = random_word(&mut rng, r2, 3);
        match shuffles(&g1, &g2) {
            Ok(sh) => count.add((sh.len() as f64 - binomial(r1 + r2, r1) as f64).abs(), || format!("{g1} and {g2}")),
            Err(e) => count.fail(format!("{g1} and {g2}: {e}")),
        }
    }
    vec![dual.done(), count.done()]
}

pub fn random_word(rng: &mut ChaCha8Rng, r: usize, m: usize) -> MultiIndex {
    MultiIndex::new((0..r).map(|_| rng.gen_range(1..=m)).collect()).expect("nonempty word")
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize, deg: u32) -> Polynomial {
    let mut p = Polynomial::zero(d);
    for _ in 0..rng.gen_range(1..=4) {
        let mut e = vec![0; d];
        for _ in 0..rng.gen_range(0..=deg) {
            e[rng.gen_range(0..d)] += 1;
        }
        p.add_term(e, rng.gen_range(-1.0..1.0)).expect("dimension matches");
    }
    p
}

fn random_field(rng: &mut ChaCha8Rng, d: usize, m: usize) -> PolynomialField {
    let comps = (0..m).map(|_| (0..d).map(|_| random_poly(rng, d, 2)).collect()).collect();
    PolynomialField::from_components(comps).expect("consistent shapes")
}

fn random_points(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    (0..3).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// Leibniz rule and the Taylor-type expansion of `𝒱_α f` on random
/// polynomial fields, `r ≤ 5`, `d, m ≤ 3`.
pub fn jets(cases: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut leib = Tally::new("jets", "leibniz_rule", 1e-9);
    let mut lemma = Tally::new("jets", "expansion", 1e-9);
    for _ in 0..cases {
        let r = rng.gen_range(1..=5);
        let (d, m) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let field = random_field(&mut rng, d, m);
        let alpha = random_word(&mut rng, r, m);
        let all = increasing_sequences(r);
        let ls = all[rng.gen_range(0..all.len())].clone();
        let tests: Vec<Vec<Polynomial>> = (0..ls.len())
            .map(|_| (0..m).map(|_| random_poly(&mut rng, d, 2)).collect())
            .collect();
        let points = random_points(&mut rng, d);
        match leibniz_check(&field, &alpha, &ls, &tests, &points) {
            Ok(v) => leib.add(v, || format!("alpha={alpha} ls={ls:?} d={d} m={m}")),
            Err(e) => leib.fail(format!("alpha={alpha} ls={ls:?}: {e}")),
        }
        let f = random_poly(&mut rng, d, 3);
        match lemma_expansion_check(&field, &alpha, &f, &points) {
            Ok(v) => lemma.add(v, || format!("alpha={alpha} d={d} m={m}")),
            Err(e) => lemma.fail(format!("alpha={alpha}: {e}")),
        }
    }
    vec![leib.done(), lemma.done()]
}

// (t, t², t³ − t) on [0, 1]
fn poly_path(n_fine: usize) -> DrivingSignal {
    DrivingSignal::from_fn(3, n_fine, 1.0, |j, t| match j {
        1 => t,
        2 => t * t,
        _ => t * t * t - t,
    })
    .expect("valid grid")
}

/// Shuffle and nested-integral identities on a polynomial path (exact up to
/// rounding) and on fBm paths, total word length ≤ 5, refine 256.
pub fn integrals(cases: usize) -> Vec<CheckResult> {
    const N_FINE: usize = 1024;
    let poly = poly_path(N_FINE);
    let grid = StepGrid::new(N_FINE, 4, 256).expect("256 divides the stride");
    let hurst = ExponentVector::hurst(vec![0.7, 0.75, 0.6]).expect("valid exponents");
    let spec = SignalSpec::new(hurst, 1.0, N_FINE, 5, false).expect("valid spec");
    let gen = SignalGenerator::new(&spec).expect("valid spec");
    let mut rng = ChaCha8Rng::seed_from_u64(21);

    let mut sh_poly = Tally::new("integrals", "shuffle_identity_polynomial", 1e-9);
    let mut sh_fbm = Tally::new("integrals", "shuffle_identity_fbm", 5e-3);
    let mut ne_poly = Tally::new("integrals", "nested_identity_polynomial", 1e-9);
    let mut ne_fbm = Tally::new("integrals", "nested_identity_fbm", 5e-3);
    for case in 0..cases {
        let sig = gen.generate(case as u64);
        let k = rng.gen_range(0..4);

        let l1 = rng.gen_range(1..=3);
        let l2 = rng.gen_range(1..=(5 - l1).min(3));
        let g1 = random_word(&mut rng, l1, 3);
        let g2 = random_word(&mut rng, l2, 3);
        for (tally, s) in [(&mut sh_poly, &poly), (&mut sh_fbm, &sig)] {
            match shuffle_identity_check(s, &g1, &g2, &grid, k) {
                Ok(v) => tally.add(v, || format!("case {case}: {g1} ⧢ {g2} on step {k}")),
                Err(e) => tally.fail(format!("case {case}: {e}")),
            }
        }

        let p = rng.gen_range(1..=3);
        let mut budget = 5 - p;
        let gammas: Vec<MultiIndex> = (0..p)
            .map(|_| {
                let extra = rng.gen_range(0..=budget.min(2));
                budget -= extra;
                random_word(&mut rng, 1 + extra, 3)
            })
            .collect();
        let shown = || gammas.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" | ");
        for (tally, s) in [(&mut ne_poly, &poly), (&mut ne_fbm, &sig)] {
            match nested_integral_check(s, &gammas, &grid, k) {
                Ok(v) => tally.add(v, || format!("case {case}: {} on step {k}", shown())),
                Err(e) => tally.fail(format!("case {case}: {e}")),
            }
        }
    }
    vec![sh_poly.done(), sh_fbm.done(), ne_poly.done(), ne_fbm.done()]
}

pub fn run_suite(name: &str) -> Option<Vec<CheckResult>> {
    match name {
        "combinatorics" => Some(combinatorics()),
        "jets" => Some(jets(200)),
        "integrals" => Some(integrals(200)),
        "all" => Some(SUITES.iter().flat_map(|s| run_suite(s).unwrap_or_default()).collect()),
        _ => None,
    }
}
