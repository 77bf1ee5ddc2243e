//! The [`JetOracle`] interface and its closed-form and finite-difference
//! implementations. The exact polynomial implementation lives with
//! [`PolynomialField`](super::PolynomialField).

use std::fmt;
use std::sync::Arc;

use super::jet::{Jet, JetBasis};
use crate::error::{Error, Result};

/// Evaluator of a vector field `V = (V_j^i)` on `R^d` and its partial
/// derivatives.
///
/// `evaluate` receives 1-based `j` (letter), `i` (component) and a derivative
/// word ζ already sorted in nondecreasing order. Implementations must be
/// deterministic and safe to call from several threads.
pub trait JetOracle: Send + Sync {
    fn dimension(&self) -> usize;
    fn alphabet(&self) -> usize;
    fn max_order(&self) -> usize;
    fn evaluate(&self, j: usize, i: usize, zeta: &[usize], y: &[f64]) -> f64;

    /// Taylor jet of `V_j^i` around `y`.
    fn jet(&self, j: usize, i: usize, y: &[f64], basis: &JetBasis, order: usize) -> Jet {
        basis.jet_from(order, |zeta| self.evaluate(j, i, zeta, y))
    }
}

impl<T: JetOracle + ?Sized> JetOracle for Arc<T> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn alphabet(&self) -> usize {
        (**self).alphabet()
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn evaluate(&self, j: usize, i: usize, zeta: &[usize], y: &[f64]) -> f64 {
        (**self).evaluate(j, i, zeta, y)
    }
    fn jet(&self, j: usize, i: usize, y: &[f64], basis: &JetBasis, order: usize) -> Jet {
        (**self).jet(j, i, y, basis, order)
    }
}

/// Checked evaluation of `∂_ζ V_j^i(y)`: validates ranges and canonicalizes ζ.
pub fn eval_derivative(
    oracle: &dyn JetOracle,
    j: usize,
    i: usize,
    zeta: &[usize],
    y: &[f64],
) -> Result<f64> {
    let (d, m) = (oracle.dimension(), oracle.alphabet());
    if !(1..=m).contains(&j) || !(1..=d).contains(&i) {
        return Err(Error::InvalidArgument(format!(
            "component (j={j}, i={i}) outside m={m}, d={d}"
        )));
    }
    if y.len() != d {
        return Err(Error::InvalidArgument(format!("point has {} coordinates, expected {d}", y.len())));
    }
    if let Some(&bad) = zeta.iter().find(|&&l| l == 0 || l > d) {
        return Err(Error::InvalidArgument(format!("derivative letter {bad} outside 1..={d}")));
    }
    if zeta.len() > oracle.max_order() {
        return Err(Error::DerivativeOrderUnavailable {
            requested: zeta.len(),
            available: oracle.max_order(),
        });
    }
    let mut z = zeta.to_vec();
    z.sort_unstable();
    Ok(oracle.evaluate(j, i, &z, y))
}

type DerivFn = dyn Fn(usize, usize, &[usize], &[f64]) -> f64 + Send + Sync;

/// A field given by user-supplied closed-form derivatives.
#[derive(Clone)]
pub struct ClosedFormField {
    d: usize,
    m: usize,
    max_order: usize,
    f: Arc<DerivFn>,
}

impl ClosedFormField {
    pub fn new<F>(d: usize, m: usize, max_order: usize, f: F) -> Self
    where
        F: Fn(usize, usize, &[usize], &[f64]) -> f64 + Send + Sync + 'static,
    {
        ClosedFormField {
            d,
            m,
            max_order,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for ClosedFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormField")
            .field("d", &self.d)
            .field("m", &self.m)
            .field("max_order", &self.max_order)
            .finish_non_exhaustive()
    }
}

impl JetOracle for ClosedFormField {
    fn dimension(&self) -> usize {
        self.d
    }
    fn alphabet(&self) -> usize {
        self.m
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn evaluate(&self, j: usize, i: usize, zeta: &[usize], y: &[f64]) -> f64 {
        (self.f)(j, i, zeta, y)
    }
}

/// `V_j^i(y) = amp_{ji} sin(a_{ji}·y + b_{ji})`, all derivatives in closed form.
#[derive(Debug, Clone)]
pub struct SineField {
    d: usize,
    m: usize,
    // indexed [j-1][i-1]
    amp: Vec<Vec<f64>>,
    freq: Vec<Vec<Vec<f64>>>,
    phase: Vec<Vec<f64>>,
}

impl SineField {
    pub fn new(amp: Vec<Vec<f64>>, freq: Vec<Vec<Vec<f64>>>, phase: Vec<Vec<f64>>) -> Result<Self> {
        let m = amp.len();
        let d = amp.first().map_or(0, Vec::len);
        let ok = m > 0
            && d > 0
            && freq.len() == m
            && phase.len() == m
            && amp.iter().all(|r| r.len() == d)
            && phase.iter().all(|r| r.len() == d)
            && freq.iter().all(|r| r.len() == d && r.iter().all(|a| a.len() == d));
        if !ok {
            return Err(Error::InvalidArgument("sine field shapes disagree".into()));
        }
        Ok(SineField {
            d,
            m,
            amp,
            freq,
            phase,
        })
    }

    /// The scalar field `V(y) = sin(y)`.
    pub fn scalar() -> Self {
        SineField::new(vec![vec![1.0]], vec![vec![vec![1.0]]], vec![vec![0.0]]).unwrap()
    }
}

impl JetOracle for SineField {
    fn dimension(&self) -> usize {
        self.d
    }
    fn alphabet(&self) -> usize {
        self.m
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn evaluate(&self, j: usize, i: usize, zeta: &[usize], y: &[f64]) -> f64 {
        let a = &self.freq[j - 1][i - 1];
        let arg: f64 = a.iter().zip(y).map(|(x, z)| x * z).sum::<f64>() + self.phase[j - 1][i - 1];
        let chain: f64 = zeta.iter().map(|&l| a[l - 1]).product();
        // d^k/dx^k sin x = sin(x + kπ/2)
        let s = match zeta.len() % 4 {
            0 => arg.sin(),
            1 => arg.cos(),
            2 => -arg.sin(),
            _ => -arg.cos(),
        };
        self.amp[j - 1][i - 1] * chain * s
    }
}

type ValueFn = dyn Fn(usize, usize, &[f64]) -> f64 + Send + Sync;

/// Derivatives by nested central differences of a value-only field.
///
/// `step` is used for first derivatives. Higher orders widen the step to
/// `ε^{1/(k+2)}` when that is larger, which balances truncation against
/// round-off.
#[derive(Clone)]
pub struct FiniteDifferenceField {
    d: usize,
    m: usize,
    max_order: usize,
    step: f64,
    f: Arc<ValueFn>,
}

impl FiniteDifferenceField {
    pub fn new<F>(d: usize, m: usize, max_order: usize, step: f64, f: F) -> Self
    where
        F: Fn(usize, usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        FiniteDifferenceField {
            d,
            m,
            max_order,
            step,
            f: Arc::new(f),
        }
    }

    /// Wrap an existing oracle, keeping only its values.
    pub fn wrap(inner: Arc<dyn JetOracle>, max_order: usize, step: f64) -> Self {
        let (d, m) = (inner.dimension(), inner.alphabet());
        FiniteDifferenceField::new(d, m, max_order, step, move |j, i, y| {
            inner.evaluate(j, i, &[], y)
        })
    }

    fn diff(&self, j: usize, i: usize, zeta: &[usize], y: &mut Vec<f64>, h: f64) -> f64 {
        match zeta.split_first() {
            None => (self.f)(j, i, y),
            Some((&l, rest)) => {
                let k = l - 1;
                let y0 = y[k];
                y[k] = y0 + h;
                let up = self.diff(j, i, rest, y, h);
                y[k] = y0 - h;
                let down = self.diff(j, i, rest, y, h);
                y[k] = y0;
                (up - down) / (2.0 * h)
            }
        }
    }
}

impl fmt::Debug for FiniteDifferenceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteDifferenceField")
            .field("d", &self.d)
            .field("m", &self.m)
            .field("max_order", &self.max_order)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

impl JetOracle for FiniteDifferenceField {
    fn dimension(&self) -> usize {
        self.d
    }
    fn alphabet(&self) -> usize {
        self.m
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn evaluate(&self, j: usize, i: usize, zeta: &[usize], y: &[f64]) -> f64 {
        let k = zeta.len() as f64;
        let h = self.step.max(f64::EPSILON.powf(1.0 / (k + 2.0)));
        self.diff(j, i, zeta, &mut y.to_vec(), h)
    }
}
