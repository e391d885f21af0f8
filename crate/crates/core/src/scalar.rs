//! Scalar abstraction shared by every numerical routine in the crate.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float")
    }

    /// Converts an index or count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in target float")
    }

    /// Lossy conversion used by reports.
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(p!)` for `p = 0..=n`, accumulated exactly as a prefix sum of `ln k`.
pub fn ln_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    out.push(acc);
    for k in 1..=n {
        acc = acc + T::of_usize(k).ln();
        out.push(acc);
    }
    out
}

/// Numerically stable `ln(exp(a) + exp(b))`.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Geometric grid of `n` points from `lo` to `hi` inclusive.
pub fn geometric_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * T::of_usize(i) / T::of_usize(n - 1)).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_logs() {
        let lf = ln_factorials::<f64>(5);
        assert!((lf[5] - 120f64.ln()).abs() < 1e-13);
        assert_eq!(lf[0], 0.0);
    }

    #[test]
    fn log_add_exp_matches_direct() {
        let v: f64 = log_add_exp(1.0f64.ln(), 3.0f64.ln());
        assert!((v - 4.0f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1.0f64, 100.0, 3);
        assert!((g[1] - 10.0).abs() < 1e-12 && (g[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn single_precision_path() {
        let lf = ln_factorials::<f32>(3);
        assert!((lf[3] - 6f32.ln()).abs() < 1e-6);
    }
}
