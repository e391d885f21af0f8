//! Asymptotic-expansion remainders of `f_λ`, coefficient recovery along a
//! ray and a discrete Cauchy–Riemann check.

use super::fit::FIT_MARGIN;
use super::operator::{Evaluation, ExtensionResult};
use crate::error::{Error, Result};
use crate::report::log_log_slope;
use crate::scalar::ln_factorials;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Points whose remainder is below this multiple of its tolerance carry no
/// slope information.
const SLOPE_SIGNAL: f64 = 100.0;
const SLOPE_TOL: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderSample {
    pub z: Complex64,
    /// `|f_λ(z) − Σ_{p<N} λ_p z^p/p!|`.
    pub measured: f64,
    pub envelope: f64,
    /// Quadrature plus rounding error of `measured`.
    pub tolerance: f64,
}

impl RemainderSample {
    pub fn dominated(&self) -> bool {
        self.measured <= self.envelope + self.tolerance
    }
}

/// Envelope `κ (2C_2|λ|/C_1)(4hK_3/K_2)^N W^{8x}_N |z|^N` for one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub n: usize,
    /// Fitted front factor (at least 1) from the calibration grid.
    pub kappa: f64,
    pub calibration_points: usize,
    pub holdout: Vec<RemainderSample>,
    pub violations: usize,
    pub pass: bool,
}

/// Log-log slope of the remainder along the positive real ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub n: usize,
    pub slope: f64,
    pub points_used: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub rows: Vec<RemainderRow>,
    pub slopes: Vec<SlopeFit>,
    pub pass: bool,
}

fn evaluate_all(result: &ExtensionResult, zs: &[Complex64]) -> Result<Vec<Evaluation>> {
    zs.iter().map(|&z| result.eval(z)).collect()
}

/// `(measured, tolerance)` for the order-`n` remainder at one evaluation.
fn remainder(lambda: &[f64], lf: &[f64], ev: &Evaluation, n: usize) -> (f64, f64) {
    let mut partial = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for p in 0..n.min(lambda.len()) {
        let term = ev.z.powu(p as u32) * (lambda[p].signum() * (lambda[p].abs().ln() - lf[p]).exp());
        if lambda[p] != 0.0 {
            partial += term;
            scale += term.norm();
        }
    }
    let measured = (ev.value - partial).norm();
    (measured, ev.error + 4.0 * f64::EPSILON * (scale + ev.value.norm()))
}

/// `ln((2C_2|λ|/C_1)(4hK_3/K_2)^N W^{8x}_N)`: the order-`n` envelope without
/// `κ` and `|z|^N`.
pub fn envelope_log_base(result: &ExtensionResult, n: usize) -> f64 {
    let b = &result.bounds;
    (2.0 * b.c2 * result.series.norm / b.c1).ln() + n as f64 * result.geometric_ratio().ln() + result.output_row.log_value(n)
}

/// Envelope rows from stored evaluations: `bases` pairs each order `N` with
/// [`envelope_log_base`]; `κ` is fitted on `calibration` and asserted on
/// `holdout`.
pub fn envelope_rows(
    lambda: &[f64],
    bases: &[(usize, f64)],
    calibration: &[Evaluation],
    holdout: &[Evaluation],
) -> Vec<RemainderRow> {
    let n_max = bases.iter().map(|b| b.0).max().unwrap_or(0);
    let lf: Vec<f64> = ln_factorials(n_max.max(lambda.len()) + 1);
    let log_envelope = |base: f64, n: usize, z: Complex64| base + n as f64 * z.norm().ln();
    bases
        .iter()
        .map(|&(n, base)| {
            let need = calibration
                .iter()
                .map(|ev| {
                    let (m, tol) = remainder(lambda, &lf, ev, n);
                    (m - tol).max(0.0).ln() - log_envelope(base, n, ev.z)
                })
                .fold(0.0, f64::max);
            let kappa = need.exp() * FIT_MARGIN;
            let samples: Vec<RemainderSample> = holdout
                .iter()
                .map(|ev| {
                    let (measured, tolerance) = remainder(lambda, &lf, ev, n);
                    let envelope = kappa * log_envelope(base, n, ev.z).exp();
                    RemainderSample { z: ev.z, measured, envelope, tolerance }
                })
                .collect();
            let violations = samples.iter().filter(|s| !s.dominated()).count();
            RemainderRow {
                n,
                kappa,
                calibration_points: calibration.len(),
                pass: violations == 0 && !samples.is_empty(),
                holdout: samples,
                violations,
            }
        })
        .collect()
}

/// Envelope check for every `N` in `orders` (fit `κ` on `calibration`,
/// assert on `holdout`) and slope fits along the real radii `ray`.
pub fn remainder_report(
    result: &ExtensionResult,
    orders: &[usize],
    calibration: &[Complex64],
    holdout: &[Complex64],
    ray: &[f64],
) -> Result<RemainderReport> {
    let n_max = orders.iter().copied().max().unwrap_or(0);
    if n_max > result.output_row.horizon() || n_max > result.moments.depth() {
        return Err(Error::InvalidInput(format!("order {n_max} exceeds the moment table depth")));
    }
    let lambda = &result.series.lambda;
    let cal = evaluate_all(result, calibration)?;
    let held = evaluate_all(result, holdout)?;
    let ray_points: Vec<Complex64> = ray.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    let on_ray = evaluate_all(result, &ray_points)?;

    let bases: Vec<(usize, f64)> = orders.iter().map(|&n| (n, envelope_log_base(result, n))).collect();
    let rows = envelope_rows(lambda, &bases, &cal, &held);
    let slopes = slope_fits(lambda, orders, &on_ray);
    let pass = rows.iter().all(|r| r.pass) && slopes.iter().all(|s| s.pass);
    Ok(RemainderReport { rows, slopes, pass })
}

/// Log-log slopes of the order-`N` remainders (`N > 0`) over evaluations on
/// the positive real ray, keeping only points well above their tolerance.
pub fn slope_fits(lambda: &[f64], orders: &[usize], on_ray: &[Evaluation]) -> Vec<SlopeFit> {
    let n_max = orders.iter().copied().max().unwrap_or(0);
    let lf: Vec<f64> = ln_factorials(n_max.max(lambda.len()) + 1);
    orders
        .iter()
        .filter(|n| **n > 0)
        .map(|&n| {
            let pts: Vec<(f64, f64)> = on_ray
                .iter()
                .filter_map(|ev| {
                    let (m, tol) = remainder(lambda, &lf, ev, n);
                    (m > SLOPE_SIGNAL * tol).then_some((ev.z.re, m))
                })
                .collect();
            let slope = log_log_slope(&pts);
            SlopeFit { n, slope, points_used: pts.len(), pass: pts.len() >= 3 && (slope - n as f64).abs() <= SLOPE_TOL }
        })
        .collect()
}

/// Measured remainder slope of order `n` along the positive real ray, using
/// only points with a remainder well above its tolerance.
pub fn remainder_slope(result: &ExtensionResult, n: usize, ray: &[f64]) -> Result<SlopeFit> {
    let lf: Vec<f64> = ln_factorials(n.max(result.series.lambda.len()) + 1);
    let mut pts = Vec::new();
    for &r in ray {
        let ev = result.eval(Complex64::new(r, 0.0))?;
        let (m, tol) = remainder(&result.series.lambda, &lf, &ev, n);
        if m > SLOPE_SIGNAL * tol {
            pts.push((r, m));
        }
    }
    let slope = log_log_slope(&pts);
    Ok(SlopeFit { n, slope, points_used: pts.len(), pass: pts.len() >= 3 && (slope - n as f64).abs() <= SLOPE_TOL })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredCoefficient {
    pub p: usize,
    pub expected: f64,
    pub recovered: f64,
    pub rel_error: f64,
}

/// `λ_p` for `p < count` from the polynomial interpolating `f_λ` at the
/// real radii, via Newton divided differences expanded at 0.
pub fn recover_coefficients(result: &ExtensionResult, radii: &[f64], count: usize) -> Result<Vec<RecoveredCoefficient>> {
    if radii.len() < count || count == 0 {
        return Err(Error::InvalidInput("need at least as many radii as coefficients".into()));
    }
    let mut ys = Vec::with_capacity(radii.len());
    for &r in radii {
        ys.push(result.eval(Complex64::new(r, 0.0))?.value.re);
    }
    let poly = interpolating_polynomial(radii, &ys);
    let lf: Vec<f64> = ln_factorials(count);
    Ok((0..count)
        .map(|p| {
            let recovered = poly[p] * lf[p].exp();
            let expected = result.series.lambda.get(p).copied().unwrap_or(0.0);
            let rel_error = (recovered - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
            RecoveredCoefficient { p, expected, recovered, rel_error }
        })
        .collect())
}

/// Monomial coefficients of the polynomial through `(xs[i], ys[i])`, from
/// Newton divided differences.
pub(crate) fn interpolating_polynomial(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let k = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..k {
        for i in (level..k).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    // Horner on the Newton form, tracking monomial coefficients.
    let mut poly = vec![0.0; k];
    for i in (0..k).rev() {
        let mut next = vec![0.0; k];
        for j in 0..k {
            if j + 1 < k {
                next[j + 1] += poly[j];
            }
            next[j] -= xs[i] * poly[j];
        }
        next[0] += dd[i];
        poly = next;
    }
    poly
}

/// `|∂_y f − i ∂_x f| / (1 + |∂_x f|)` by central differences with step
/// `step·|z|`.
pub fn cauchy_riemann_residual(result: &ExtensionResult, z: Complex64, step: f64) -> Result<f64> {
    let h = step * z.norm();
    let f = |w: Complex64| result.eval(w).map(|e| e.value);
    let dx = (f(z + h)? - f(z - h)?) / (2.0 * h);
    let dy = (f(z + Complex64::new(0.0, h))? - f(z - Complex64::new(0.0, h))?) / (2.0 * h);
    Ok((dy - Complex64::i() * dx).norm() / (1.0 + dx.norm()))
}
