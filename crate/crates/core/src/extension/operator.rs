//! The right inverse `λ ↦ f_λ(z) = ∫_0^{R_0} e_a(u/z) g_λ(u) du/u` of the
//! asymptotic Borel map.

use super::flat::FlatFunction;
use super::moments::{fit_moment_bounds, kernel_bound_check, KernelBoundCheck, MomentBounds, MomentTable};
use super::{choose_ramification, RamificationParams};
use crate::error::{Error, Result};
use crate::indices::{gamma_mixed_sequences, gamma_mixed_weights, IndexEstimate};
use crate::properties::{check_property, Property};
use crate::quadrature::{integrate_panels, QuadratureConfig};
use crate::scalar::ln_factorials;
use crate::sequence::WeightSequence;
use crate::weight::{associated_matrix, WeightFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Lower cut of the `f_λ` integral: `u ≥ |z| e^{−LOWER_CUT}`. The dropped
/// piece is at most `e^{−LOWER_CUT} sup|g|` since `|G_a| ≤ 1`.
const LOWER_CUT: f64 = 37.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionConfig {
    /// Target opening: `f_λ` lives on `S_γ`.
    pub gamma: f64,
    pub h: f64,
    /// Matrix row of the coefficient class; `a = 1/(2x)`.
    pub x: f64,
    pub moment_depth: usize,
    /// Largest `p` used to fit the moment envelopes.
    pub moment_fit_max: usize,
    pub moment_rel_tol: f64,
    pub quadrature: QuadratureConfig<f64>,
    pub s_override: Option<f64>,
    pub delta_override: Option<f64>,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            h: 1.0,
            x: 0.125,
            moment_depth: 40,
            moment_fit_max: 20,
            moment_rel_tol: 1e-10,
            quadrature: QuadratureConfig::default().with_rel_tol(1e-12),
            s_override: None,
            delta_override: None,
        }
    }
}

impl ExtensionConfig {
    pub fn a(&self) -> f64 {
        0.5 / self.x
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.h > 0.0 && self.x > 0.0) {
            return Err(Error::InvalidInput("γ, h and x must be positive".into()));
        }
        if self.moment_fit_max < 3 || self.moment_depth < self.moment_fit_max {
            return Err(Error::InvalidInput("need 3 ≤ moment_fit_max ≤ moment_depth".into()));
        }
        self.quadrature.validate()
    }
}

/// Coefficients `λ_p/(p! m_a(p))` of `g_λ` with the certified radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorelSeries {
    pub lambda: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// `|λ|_{Ŝ^x,h} = sup_p |λ_p| / (h^p p! S^x_p)` over the given entries.
    pub norm: f64,
    pub h: f64,
    /// `K_2/(2h)`.
    pub radius: f64,
    /// `K_2/(4h)`.
    pub r0: f64,
    /// Whether `|λ_p/(p! m_a(p))| ≤ (|λ|/C_1)(2h/K_2)^p` for every given `p`.
    pub coefficient_bound_ok: bool,
}

impl BorelSeries {
    pub fn new(
        lambda: &[f64],
        moments: &MomentTable,
        row: &WeightSequence<f64>,
        bounds: &MomentBounds,
        h: f64,
    ) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidInput("λ is empty".into()));
        }
        if lambda.len() > moments.log_moments.len() {
            return Err(Error::InvalidInput(format!(
                "λ has {} entries but the moment table stops at p = {}",
                lambda.len(),
                moments.depth()
            )));
        }
        if lambda.len() > row.horizon() + 1 {
            return Err(Error::InvalidInput("λ is longer than the coefficient row".into()));
        }
        if lambda.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("λ has non-finite entries".into()));
        }
        let lf: Vec<f64> = ln_factorials(lambda.len());
        let log_abs: Vec<f64> = lambda.iter().map(|v| v.abs().ln()).collect();
        let log_norm = (0..lambda.len())
            .map(|p| log_abs[p] - p as f64 * h.ln() - lf[p] - row.log_value(p))
            .fold(f64::NEG_INFINITY, f64::max);
        let coefficients: Vec<f64> = (0..lambda.len())
            .map(|p| lambda[p].signum() * (log_abs[p] - lf[p] - moments.log_moments[p]).exp())
            .map(|c| if c.is_nan() { 0.0 } else { c })
            .collect();
        let slope = (2.0 * h / bounds.k2).ln();
        let coefficient_bound_ok = (0..lambda.len()).all(|p| {
            log_abs[p] - lf[p] - moments.log_moments[p] <= log_norm - bounds.c1.ln() + p as f64 * slope + 1e-9
        });
        Ok(Self {
            lambda: lambda.to_vec(),
            coefficients,
            norm: log_norm.exp(),
            h,
            radius: bounds.k2 / (2.0 * h),
            r0: bounds.k2 / (4.0 * h),
            coefficient_bound_ok,
        })
    }

    /// `g_λ(u)` by Horner's rule.
    pub fn eval(&self, u: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }
}

/// `f_λ(z)` with its quadrature error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub z: Complex64,
    pub value: Complex64,
    pub error: f64,
}

/// A built extension: the flat function, its moments and fitted constants,
/// and the Borel series of one coefficient sequence.
#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub config: ExtensionConfig,
    pub bracket: IndexEstimate,
    pub params: RamificationParams,
    pub flat: Arc<FlatFunction>,
    pub moments: Arc<MomentTable>,
    pub bounds: MomentBounds,
    /// `S^x`, the row measuring `λ`.
    pub coefficient_row: Arc<WeightSequence<f64>>,
    /// `W^{8x} = W^{4/a}`, the row of the output class.
    pub output_row: Arc<WeightSequence<f64>>,
    pub series: BorelSeries,
}

impl ExtensionResult {
    pub fn r0(&self) -> f64 {
        self.series.r0
    }

    /// `4hK_3/K_2`, the geometric ratio of the remainder envelope.
    pub fn geometric_ratio(&self) -> f64 {
        4.0 * self.config.h * self.bounds.k3 / self.bounds.k2
    }

    /// Same flat function and moments, another coefficient sequence.
    pub fn with_coefficients(&self, lambda: &[f64]) -> Result<Self> {
        let series = BorelSeries::new(lambda, &self.moments, &self.coefficient_row, &self.bounds, self.config.h)?;
        Ok(Self { series, ..self.clone() })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() > 0.0 && z.arg().abs() < self.config.gamma * std::f64::consts::FRAC_PI_2
    }

    pub fn eval(&self, z: Complex64) -> Result<Evaluation> {
        if !self.contains(z) {
            return Err(Error::InvalidInput(format!("z = {z} lies outside S_{}", self.config.gamma)));
        }
        let lz = z.norm().ln();
        let top = self.r0().ln();
        let bottom = lz - LOWER_CUT;
        if bottom >= top {
            return Err(Error::InvalidInput(format!("|z| = {} is too large for R_0 = {}", z.norm(), self.r0())));
        }
        let mut breaks: Vec<f64> = [-12.0, -4.0, 0.0, 1.0, 2.0, 3.0, 5.0]
            .iter()
            .map(|d| lz + d)
            .filter(|y| *y > bottom && *y < top)
            .collect();
        breaks.insert(0, bottom);
        breaks.push(top);
        let mut failure = None;
        let integrand = |y: f64| -> Complex64 {
            let u = y.exp();
            match self.flat.log_kernel(Complex64::new(u, 0.0) / z) {
                Ok(le) => le.exp() * self.series.eval(u),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            }
        };
        let r = integrate_panels(integrand, &breaks, &self.config.quadrature);
        if let Some(e) = failure {
            return Err(e);
        }
        if !r.converged {
            return Err(Error::Quadrature(format!("f_λ({z}) did not converge (error {:.3e})", r.error)));
        }
        let head = (-LOWER_CUT).exp() * self.series.eval(bottom.exp()).abs();
        Ok(Evaluation { z, value: r.value, error: r.error + head + 4.0 * f64::EPSILON * r.value.norm() })
    }

    /// `|e_a(z)| ≤ C h_{W^{4/a}}(K_3/|z|)` with `K_3` from the moment fit.
    pub fn kernel_bound(&self, calibration: &[Complex64], holdout: &[Complex64], powers: &[usize]) -> Result<KernelBoundCheck> {
        kernel_bound_check(&self.flat, &self.output_row, self.bounds.k3, calibration, holdout, powers)
    }
}

fn assemble(
    cfg: &ExtensionConfig,
    bracket: IndexEstimate,
    params: RamificationParams,
    flat: FlatFunction,
    lambda: &[f64],
) -> Result<ExtensionResult> {
    let depth = cfg.moment_depth.max(lambda.len().saturating_sub(1));
    let moments = MomentTable::compute(&flat, depth, cfg.moment_rel_tol)?;
    if let Some(p) = moments.truncated_at {
        if p <= cfg.moment_fit_max || p < lambda.len() {
            return Err(Error::Quadrature(format!("moment table stops converging at p = {p}")));
        }
    }
    let x = cfg.x;
    let coefficient_row = associated_matrix(flat.sigma(), vec![x])?.row(x, depth)?;
    let output_row = associated_matrix(flat.omega(), vec![8.0 * x])?.row(8.0 * x, depth)?;
    let bounds = fit_moment_bounds(&moments, &coefficient_row, &output_row, cfg.moment_fit_max)?;
    let series = BorelSeries::new(lambda, &moments, &coefficient_row, &bounds, cfg.h)?;
    Ok(ExtensionResult {
        config: cfg.clone(),
        bracket,
        params,
        flat: Arc::new(flat),
        moments: Arc::new(moments),
        bounds,
        coefficient_row: Arc::new(coefficient_row),
        output_row: Arc::new(output_row),
        series,
    })
}

/// `index` names the bracket in precondition messages (`γ(M,N)` or `γ(σ,ω)`).
fn ramification(cfg: &ExtensionConfig, bracket: &IndexEstimate, index: &str) -> Result<RamificationParams> {
    let cite = |e: Error| match e {
        Error::Precondition(m) => Error::Precondition(format!("{index}: {m}")),
        other => other,
    };
    choose_ramification(cfg.gamma, bracket, cfg.a())
        .and_then(|p| p.with_overrides(cfg.s_override, cfg.delta_override))
        .map_err(cite)
}

/// Sequence entry: `σ = ω_M`, `ω = ω_N`; `M` must have moderate growth and
/// `μ_p ≤ C ν_p`.
pub fn extend_sequences(
    m: &WeightSequence<f64>,
    n: &WeightSequence<f64>,
    lambda: &[f64],
    cfg: &ExtensionConfig,
) -> Result<ExtensionResult> {
    cfg.validate()?;
    if check_property(m, Property::ModerateGrowth)?.verdict.fails() {
        return Err(Error::Precondition(format!("{} must have moderate growth", m.label())));
    }
    let bracket = gamma_mixed_sequences(m, n)?;
    let params = ramification(cfg, &bracket, "γ(M,N)")?;
    let flat = FlatFunction::from_sequences(m, n, params, cfg.quadrature)?;
    assemble(cfg, bracket, params, flat, lambda)
}

/// Weight entry for normalized `σ`, `ω`.
pub fn extend_weights(
    sigma: &WeightFunction<f64>,
    omega: &WeightFunction<f64>,
    lambda: &[f64],
    cfg: &ExtensionConfig,
) -> Result<ExtensionResult> {
    cfg.validate()?;
    let bracket = gamma_mixed_weights(sigma, omega)?;
    let params = ramification(cfg, &bracket, "γ(σ,ω)")?;
    let flat = FlatFunction::from_weights(sigma, omega, params, cfg.quadrature)?;
    assemble(cfg, bracket, params, flat, lambda)
}

#[cfg(test)]
pub(crate) mod fixture {
    use super::*;
    use std::sync::OnceLock;

    /// `M = G^1`, `N = G^2` at horizon 1024, `λ_p = p!` for `p ≤ 30`.
    pub(crate) fn smoke() -> &'static ExtensionResult {
        static CELL: OnceLock<ExtensionResult> = OnceLock::new();
        CELL.get_or_init(|| {
            let m = WeightSequence::gevrey(1.0, 1024).unwrap();
            let n = WeightSequence::gevrey(2.0, 1024).unwrap();
            let lambda: Vec<f64> = ln_factorials::<f64>(30).iter().map(|l| l.exp()).collect();
            let cfg = ExtensionConfig { moment_depth: 30, ..ExtensionConfig::default() };
            extend_sequences(&m, &n, &lambda, &cfg).unwrap()
        })
    }
}
