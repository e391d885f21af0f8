//! Legendre–Fenchel conjugate of `φ(y) = ω(e^y)` and the associated weight matrix.

use super::WeightFunction;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sequence::WeightSequence;

const Y_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 80;

/// Maximizes a concave function on `[0, cap]` by doubling then golden section.
///
/// Returns `Err` if the objective is still increasing at `cap`.
fn concave_sup<T: Real>(mut g: impl FnMut(T) -> Result<T>, cap: T) -> Result<(T, T)> {
    let mut hi = T::one().min(cap);
    let mut g_hi = g(hi)?;
    let g0 = g(T::zero())?;
    if g_hi >= g0 {
        for _ in 0..MAX_DOUBLINGS {
            let next = (hi + hi).min(cap);
            if next == hi {
                let probe = hi - T::of(1e-7) * hi.max(T::one());
                if g(probe)? < g_hi {
                    return Err(Error::OutOfHorizon { t: hi.exp().f64(), limit: cap.exp().f64() });
                }
                break;
            }
            let g_next = g(next)?;
            if g_next < g_hi {
                hi = next;
                break;
            }
            hi = next;
            g_hi = g_next;
        }
    }
    let (mut a, mut b) = (T::zero(), hi);
    let phi = T::of(0.618_033_988_749_894_9);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    let tol = T::of(Y_TOL);
    while b - a > tol * (T::one() + a.abs()) {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d)?;
        }
    }
    let mut best = if gc >= gd { (c, gc) } else { (d, gd) };
    for (y, gy) in [(T::zero(), g0), (hi, g(hi)?)] {
        if gy > best.1 {
            best = (y, gy);
        }
    }
    Ok((best.0, best.1))
}

/// `φ*(x) = sup_{y ≥ 0} (x y − ω(e^y))`.
pub fn legendre_conjugate<T: Real>(w: &WeightFunction<T>, x: T) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::InvalidInput("conjugate argument must be ≥ 0".into()));
    }
    let cap = w.t_max().ln().min(T::of(700.0));
    concave_sup(|y| Ok(x * y - w.eval(y.exp())?), cap).map(|(_, v)| v)
}

/// `φ**(y) = sup_{x ≥ 0} (x y − φ*(x))` by nested search; `x_cap` bounds the
/// outer search (for sequence weights the conjugate is exact up to `x = P`).
pub fn biconjugate<T: Real>(w: &WeightFunction<T>, y: T, x_cap: T) -> Result<T> {
    concave_sup(|x| Ok(x * y - legendre_conjugate(w, x)?), x_cap).map(|(_, v)| v)
}

/// `W^l_j = exp((1/l) φ*(l j))`.
#[derive(Clone, Debug)]
pub struct WeightMatrix<T> {
    source: WeightFunction<T>,
    pub l_grid: Vec<T>,
}

pub fn associated_matrix<T: Real>(w: &WeightFunction<T>, l_grid: Vec<T>) -> Result<WeightMatrix<T>> {
    if l_grid.is_empty() || l_grid.iter().any(|l| !(*l > T::zero())) {
        return Err(Error::InvalidInput("l-grid must be nonempty and positive".into()));
    }
    if !w.is_normalized() {
        return Err(Error::Precondition("weight matrix needs a normalized weight".into()));
    }
    Ok(WeightMatrix { source: w.clone(), l_grid })
}

impl<T: Real> WeightMatrix<T> {
    pub fn source(&self) -> &WeightFunction<T> {
        &self.source
    }

    pub fn log_entry(&self, l: T, j: usize) -> Result<T> {
        if j == 0 {
            return Ok(T::zero());
        }
        Ok(legendre_conjugate(&self.source, l * T::of_usize(j))? / l)
    }

    /// Row `W^l` as a sequence up to `horizon`.
    pub fn row(&self, l: T, horizon: usize) -> Result<WeightSequence<T>> {
        let vals = (0..=horizon).map(|j| self.log_entry(l, j)).collect::<Result<Vec<T>>>()?;
        WeightSequence::from_log_values(vals, format!("W^{l}[{}]", self.source.label()))
    }
}
