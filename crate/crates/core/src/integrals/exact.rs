//! Exact nested integrals of running iterated integrals along a
//! piecewise-linear path, by polynomial arithmetic in the local parameter of
//! each segment. Independent of the tensor algebra in `signature`.

use super::step::StepGrid;
use crate::multiindex::MultiIndex;
use crate::signal::DrivingSignal;

type Poly = Vec<f64>;

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

// c + s ∫_0^u p(v) dv
fn integrate(c: f64, s: f64, p: &Poly) -> Poly {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(c);
    for (i, x) in p.iter().enumerate() {
        out.push(s * x / (i + 1) as f64);
    }
    out
}

fn at_one(p: &Poly) -> f64 {
    p.iter().sum()
}

/// `∫⋯∫ dg^{γ¹} ⋯ dg^{γ^p}` over coarse step `k`, with `g^{γ}_{t_k, ·}` the
/// running iterated integrals of the piecewise-linear interpolant.
pub fn nested_integral(signal: &DrivingSignal, gammas: &[MultiIndex], grid: &StepGrid, k: usize) -> f64 {
    let p = gammas.len();
    // prefix[i][l]: running integral of the first l letters of γ^i
    let mut prefix: Vec<Vec<f64>> = gammas
        .iter()
        .map(|g| {
            let mut v = vec![0.0; g.len() + 1];
            v[0] = 1.0;
            v
        })
        .collect();
    // nested running values Y_1..Y_p
    let mut y = vec![0.0; p];
    let start = grid.fine_index(k);
    for s in 0..grid.refine_factor {
        let a = start + s * grid.sub();
        let b = a + grid.sub();
        let delta = |j: usize| signal.increment(j, a, b);

        let mut polys: Vec<Vec<Poly>> = Vec::with_capacity(p);
        for (g, pre) in gammas.iter().zip(&prefix) {
            let mut ps: Vec<Poly> = vec![vec![1.0]];
            for (l, &letter) in g.letters().iter().enumerate() {
                let next = integrate(pre[l + 1], delta(letter), &ps[l]);
                ps.push(next);
            }
            polys.push(ps);
        }
        let mut ys: Vec<Poly> = Vec::with_capacity(p);
        ys.push(polys[0][gammas[0].len()].clone());
        for q in 1..p {
            let g = &gammas[q];
            let last = g.at(g.len());
            let integrand = mul(&ys[q - 1], &polys[q][g.len() - 1]);
            ys.push(integrate(y[q], delta(last), &integrand));
        }

        for (pre, ps) in prefix.iter_mut().zip(&polys) {
            for (v, poly) in pre.iter_mut().zip(ps) {
                *v = at_one(poly);
            }
        }
        for (v, poly) in y.iter_mut().zip(&ys) {
            *v = at_one(poly);
        }
    }
    y[p - 1]
}
