use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rough_taylor::multiindex::ExponentVector;
use rough_taylor::signal::*;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

// sample mean of x·y with its standard error
fn product_moment(x: &[f64], y: &[f64]) -> (f64, f64) {
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let (m, v) = mean_var(&prods);
    (m, (v / prods.len() as f64).sqrt())
}

fn paths(h: f64, n: usize, horizon: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let s = FbmSampler::new(h, n, horizon).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| s.sample_path(&mut rng)).collect()
}

#[test]
fn brownian_increments_uncorrelated() {
    let n = 1024;
    let p = sample_fbm(0.5, n, 1.0, 9).unwrap();
    let inc: Vec<f64> = p.windows(2).map(|w| w[1] - w[0]).collect();
    let (_, var) = mean_var(&inc);
    assert!((var - 1.0 / n as f64).abs() < 0.15 / n as f64);
    let lag1: f64 = inc.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n as f64 - 1.0);
    let rho = lag1 / var;
    assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "lag-1 correlation {rho}");
}

#[test]
fn terminal_variance_and_covariance() {
    let ps = paths(0.7, 64, 1.0, 10_000, 1);
    let b1: Vec<f64> = ps.iter().map(|p| p[64]).collect();
    let bh: Vec<f64> = ps.iter().map(|p| p[32]).collect();
    let (v, se) = product_moment(&b1, &b1);
    assert!((v - 1.0).abs() < 3.0 * se, "Var B_1 = {v} ± {se}");
    let (c, se) = product_moment(&bh, &b1);
    let want = fbm_cov(0.7, 0.5, 1.0);
    assert!((want - 0.5).abs() < 1e-12);
    assert!((c - want).abs() < 3.0 * se, "E[B_.5 B_1] = {c} ± {se}");
}

#[test]
fn covariance_matrix_on_eight_points() {
    let h = 0.7;
    let ps = paths(h, 8, 1.0, 100_000, 2);
    for a in 1..=8 {
        for b in a..=8 {
            let x: Vec<f64> = ps.iter().map(|p| p[a]).collect();
            let y: Vec<f64> = ps.iter().map(|p| p[b]).collect();
            let (c, se) = product_moment(&x, &y);
            let want = fbm_cov(h, a as f64 / 8.0, b as f64 / 8.0);
            assert!((c - want).abs() < 4.0 * se, "({a},{b}): {c} vs {want} ± {se}");
        }
    }
}

fn ks_pvalue(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lam = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let q: f64 = (1..100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lam * lam).exp()
        })
        .sum();
    q.clamp(0.0, 1.0)
}

#[test]
fn circulant_and_cholesky_agree_in_law() {
    let (h, n) = (0.7, 256);
    let circ = FbmSampler::new(h, n, 1.0).unwrap();
    let chol = FbmSampler::cholesky_only(h, n, 1.0).unwrap();
    assert!(circ.is_circulant() && !chol.is_circulant());
    let mut r1 = ChaCha8Rng::seed_from_u64(10);
    let mut r2 = ChaCha8Rng::seed_from_u64(20);
    let a: Vec<f64> = (0..10_000).map(|_| circ.sample_path(&mut r1)[n]).collect();
    let b: Vec<f64> = (0..10_000).map(|_| chol.sample_path(&mut r2)[n]).collect();
    let p = ks_pvalue(a, b);
    assert!(p > 0.001, "KS p-value {p}");
}

#[test]
fn self_similarity_variance_ratio() {
    let h = 0.7;
    let ps = paths(h, 64, 1.0, 10_000, 3);
    let at = |k: usize| -> Vec<f64> { ps.iter().map(|p| p[k]).collect() };
    let (v1, se1) = product_moment(&at(16), &at(16));
    let (v2, se2) = product_moment(&at(32), &at(32));
    let ratio = v2 / v1;
    let se = ratio * ((se1 / v1).powi(2) + (se2 / v2).powi(2)).sqrt();
    assert!((ratio - 2f64.powf(2.0 * h)).abs() < 3.0 * se, "ratio {ratio} ± {se}");
}

#[test]
fn components_are_independent() {
    let spec = SignalSpec::new(ExponentVector::hurst(vec![0.7, 0.7, 0.7]).unwrap(), 1.0, 64, 5, false).unwrap();
    let gen = SignalGenerator::new(&spec).unwrap();
    let sigs: Vec<DrivingSignal> = (0..5000).map(|p| gen.generate(p)).collect();
    for (a, b) in [(1, 2), (1, 3), (2, 3)] {
        let x: Vec<f64> = sigs.iter().map(|s| s.component(a)[64]).collect();
        let y: Vec<f64> = sigs.iter().map(|s| s.component(b)[64]).collect();
        let (c, se) = product_moment(&x, &y);
        assert!(c.abs() < 4.0 * se, "components {a},{b}: {c} ± {se}");
    }
}

#[test]
fn build_signal_matches_generator_and_is_reproducible() {
    let spec = SignalSpec::new(ExponentVector::hurst(vec![1.0, 0.65]).unwrap(), 2.0, 512, 77, true).unwrap();
    let a = build_signal(&spec.with_path(3)).unwrap();
    let b = SignalGenerator::new(&spec).unwrap().generate(3);
    assert_eq!(a, b);
    assert_eq!(a.component(1)[512], 2.0);
    assert_eq!(a.component(2)[0], 0.0);
}

#[test]
fn holder_seminorm_stabilizes() {
    let spec = SignalSpec::new(ExponentVector::hurst(vec![0.7]).unwrap(), 1.0, 4096, 12, false).unwrap();
    let s = build_signal(&spec).unwrap();
    let vals: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&c| holder_seminorm(&s, 1, 0.65, 0.0, 1.0, c).unwrap())
        .collect();
    assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
    // a sup over nested grids can only grow, and only mildly
    assert!(vals.windows(2).all(|w| w[1] >= w[0] && w[1] < 1.5 * w[0]), "{vals:?}");
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SignalSpec::new(ExponentVector::hurst(vec![0.7]).unwrap(), 1.0, 128, 1, false).unwrap();
    let s = build_signal(&spec).unwrap();
    let path = dir.path().join("p.bin");
    s.save(&path).unwrap();
    let back = DrivingSignal::load(&path).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.spec().unwrap().seed, 1);
}
