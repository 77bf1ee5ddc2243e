//! Dense truncated multivariate Taylor jets.
//!
//! A jet of order `k` at a point `y` stores the coefficients `∂^e f(y) / e!`
//! for every exponent vector `e` with `|e| ≤ k`. Monomials are laid out by
//! increasing total degree, so a jet of lower order is a prefix of the
//! coefficient vector of a higher order one.

use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct JetBasis {
    d: usize,
    order: usize,
    exps: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    // cumulative monomial counts by degree
    upto: Vec<usize>,
    // (a, b, a+b) sorted by degree of the product
    mul: Vec<(usize, usize, usize)>,
    mul_upto: Vec<usize>,
    // deriv[i][t] = (index of t + e_i, t_i + 1)
    deriv: Vec<Vec<Option<(usize, f64)>>>,
}

fn compositions(total: u32, parts: usize, out: &mut Vec<Vec<u32>>) {
    fn go(rest: u32, slot: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = rest;
            out.push(cur.clone());
            return;
        }
        for k in (0..=rest).rev() {
            cur[slot] = k;
            go(rest - k, slot + 1, cur, out);
        }
    }
    let mut cur = vec![0; parts];
    go(total, 0, &mut cur, out);
}

impl JetBasis {
    pub fn new(d: usize, order: usize) -> Self {
        assert!(d >= 1, "jet dimension must be positive");
        let mut exps = Vec::new();
        let mut upto = Vec::with_capacity(order + 1);
        for deg in 0..=order as u32 {
            compositions(deg, d, &mut exps);
            upto.push(exps.len());
        }
        let lookup: HashMap<_, _> = exps.iter().cloned().enumerate().map(|(k, e)| (e, k)).collect();
        let deg = |e: &[u32]| e.iter().sum::<u32>() as usize;

        let mut mul = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if deg(ea) + deg(eb) <= order {
                    let sum: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    mul.push((a, b, lookup[&sum]));
                }
            }
        }
        mul.sort_by_key(|&(_, _, c)| deg(&exps[c]));
        let mut mul_upto = vec![0; order + 1];
        for &(_, _, c) in &mul {
            mul_upto[deg(&exps[c])] += 1;
        }
        for k in 1..=order {
            mul_upto[k] += mul_upto[k - 1];
        }

        let deriv = (0..d)
            .map(|i| {
                exps.iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[i] += 1;
                        lookup.get(&up).map(|&s| (s, (e[i] + 1) as f64))
                    })
                    .collect()
            })
            .collect();

        JetBasis {
            d,
            order,
            exps,
            lookup,
            upto,
            mul,
            mul_upto,
            deriv,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials of total degree at most `order`.
    pub fn len(&self, order: usize) -> usize {
        self.upto[order]
    }

    pub fn exponents(&self, order: usize) -> &[Vec<u32>] {
        &self.exps[..self.upto[order]]
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.lookup.get(e).copied()
    }

    /// Build a jet from a derivative evaluator. `deriv` receives the sorted
    /// derivative word (letters in 1..=d) of each monomial.
    pub fn jet_from<F: FnMut(&[usize]) -> f64>(&self, order: usize, mut deriv: F) -> Jet {
        let mut c = Vec::with_capacity(self.upto[order]);
        let mut zeta = Vec::new();
        for e in self.exponents(order) {
            zeta.clear();
            let mut fact = 1.0;
            for (i, &k) in e.iter().enumerate() {
                for q in 0..k {
                    zeta.push(i + 1);
                    fact *= (q + 1) as f64;
                }
            }
            c.push(deriv(&zeta) / fact);
        }
        Jet { order, c }
    }

    pub fn constant(&self, order: usize, value: f64) -> Jet {
        let mut c = vec![0.0; self.upto[order]];
        c[0] = value;
        Jet { order, c }
    }

    /// The coordinate function `y ↦ y_i` (0-based `i`) around `y`.
    pub fn coordinate(&self, order: usize, i: usize, at: f64) -> Jet {
        let mut j = self.constant(order, at);
        if order >= 1 {
            let mut e = vec![0; self.d];
            e[i] = 1;
            j.c[self.lookup[&e]] = 1.0;
        }
        j
    }

    pub fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        let order = a.order.min(b.order);
        let mut c = vec![0.0; self.upto[order]];
        for &(x, y, z) in &self.mul[..self.mul_upto[order]] {
            c[z] += a.c[x] * b.c[y];
        }
        Jet { order, c }
    }

    /// `acc += a * b`, truncated to the order of `acc`.
    pub fn mul_add(&self, acc: &mut Jet, a: &Jet, b: &Jet) {
        debug_assert!(a.order >= acc.order && b.order >= acc.order);
        for &(x, y, z) in &self.mul[..self.mul_upto[acc.order]] {
            acc.c[z] += a.c[x] * b.c[y];
        }
    }

    /// `∂_i f` for 0-based `i`; the result has one order less.
    pub fn partial(&self, f: &Jet, i: usize) -> Jet {
        assert!(f.order >= 1, "cannot differentiate an order-0 jet");
        let order = f.order - 1;
        let c = self.deriv[i][..self.upto[order]]
            .iter()
            .map(|s| {
                let (src, k) = s.expect("source monomial inside basis");
                k * f.c[src]
            })
            .collect();
        Jet { order, c }
    }

    pub fn truncate(&self, f: &Jet, order: usize) -> Jet {
        assert!(order <= f.order);
        Jet {
            order,
            c: f.c[..self.upto[order]].to_vec(),
        }
    }

    /// Value of `∂_ζ f` at the expansion point, ζ a derivative word.
    pub fn derivative(&self, f: &Jet, zeta: &[usize]) -> Option<f64> {
        if zeta.len() > f.order {
            return None;
        }
        let mut e = vec![0u32; self.d];
        for &l in zeta {
            e[l - 1] += 1;
        }
        let fact: f64 = e
            .iter()
            .map(|&k| (1..=k).map(f64::from).product::<f64>())
            .product();
        self.lookup.get(&e).map(|&k| f.c[k] * fact)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    c: Vec<f64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn add_assign(&mut self, other: &Jet) {
        debug_assert!(other.order >= self.order);
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.c.iter_mut().for_each(|a| *a *= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        let b = JetBasis::new(3, 4);
        for k in 0..=4 {
            // C(d+k, k)
            let expect = (1..=k).fold(1usize, |acc, q| acc * (3 + q) / q);
            assert_eq!(b.len(k), expect);
        }
    }

    #[test]
    fn product_and_derivative_of_polynomials() {
        // f = 1 + 2x + 3xy, g = y^2 around (0.5, -1)
        let b = JetBasis::new(2, 3);
        let (x0, y0) = (0.5, -1.0);
        let f = b.jet_from(3, |z| match z {
            [] => 1.0 + 2.0 * x0 + 3.0 * x0 * y0,
            [1] => 2.0 + 3.0 * y0,
            [2] => 3.0 * x0,
            [1, 2] => 3.0,
            _ => 0.0,
        });
        let g = b.jet_from(3, |z| match z {
            [] => y0 * y0,
            [2] => 2.0 * y0,
            [2, 2] => 2.0,
            _ => 0.0,
        });
        let fg = b.mul(&f, &g);
        // ∂_x∂_y (fg) = ∂_y((2 + 3y) y^2) = 4y + 9y^2
        let v = b.derivative(&fg, &[1, 2]).unwrap();
        assert!((v - (4.0 * y0 + 9.0 * y0 * y0)).abs() < 1e-12);
        let dfg = b.partial(&fg, 1);
        assert_eq!(dfg.order(), 2);
        let expect = 3.0 * x0 * y0 * y0 + (1.0 + 2.0 * x0 + 3.0 * x0 * y0) * 2.0 * y0;
        assert!((dfg.value() - expect).abs() < 1e-12);
    }

    #[test]
    fn coordinate_jet() {
        let b = JetBasis::new(2, 2);
        let y = b.coordinate(2, 1, 3.0);
        assert_eq!(b.derivative(&y, &[]), Some(3.0));
        assert_eq!(b.derivative(&y, &[2]), Some(1.0));
        assert_eq!(b.derivative(&y, &[1]), Some(0.0));
    }
}
