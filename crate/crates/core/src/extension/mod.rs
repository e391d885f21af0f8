//! Outer functions, optimal flat functions on sectors, kernels, moments and
//! the right inverse of the asymptotic Borel map.
//!
//! Everything here works in `f64`: the fitted-constant checks compare log
//! magnitudes against tolerances that only make sense in double precision.

mod fit;
mod flat;
mod moments;
mod operator;
mod outer;
mod remainder;

pub use fit::{SandwichCheck, FIT_MARGIN};
pub use flat::{flatness_report, flat_sandwich, FlatFunction, FlatSandwich, FlatSource, FlatnessReport};
pub use moments::{
    fit_moment_bounds, kernel_bound_check, kernel_integrability, moment_adaptive, KernelBoundCheck,
    KernelIntegrability, MomentBounds, MomentTable,
};
pub use operator::{extend_sequences, extend_weights, BorelSeries, Evaluation, ExtensionConfig, ExtensionResult};
pub use outer::{outer_sandwich, OuterFunction, OuterSandwich};
pub use remainder::{
    cauchy_riemann_residual, envelope_log_base, envelope_rows, recover_coefficients, remainder_report, remainder_slope, slope_fits,
    RecoveredCoefficient,
    RemainderReport, RemainderRow, RemainderSample, SlopeFit,
};

use crate::error::{Error, Result};
use crate::indices::IndexEstimate;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Sample points `r e^{iθ}` inside `S_γ = {|arg z| < γπ/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub gamma: f64,
    pub radii: Vec<f64>,
    pub args: Vec<f64>,
}

impl SectorSpec {
    /// `n_radii` log-spaced radii in `[r_lo, r_hi]` and `n_args` arguments
    /// spread over 90% of the half-opening.
    pub fn new(gamma: f64, r_lo: f64, r_hi: f64, n_radii: usize, n_args: usize) -> Result<Self> {
        if !(gamma > 0.0) || !(r_lo > 0.0) || !(r_hi >= r_lo) || n_radii == 0 || n_args == 0 {
            return Err(Error::InvalidInput("sector spec needs γ > 0, 0 < r_lo ≤ r_hi and nonempty grids".into()));
        }
        let radii = crate::scalar::geometric_grid(r_lo, r_hi, n_radii);
        let half = 0.9 * gamma * FRAC_PI_2;
        let args = if n_args == 1 {
            vec![0.0]
        } else {
            (0..n_args).map(|j| -half + 2.0 * half * j as f64 / (n_args - 1) as f64).collect()
        };
        let spec = Self { gamma, radii, args };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let half = self.gamma * FRAC_PI_2;
        if self.radii.is_empty() || self.args.is_empty() {
            return Err(Error::InvalidInput("sector spec has an empty grid".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) || self.args.iter().any(|a| !(a.abs() < half)) {
            return Err(Error::InvalidInput(format!("sample points must lie strictly inside S_{}", self.gamma)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.radii
            .iter()
            .flat_map(|&r| self.args.iter().map(move |&a| Complex64::from_polar(r, a)))
            .collect()
    }

    /// Disjoint calibration and held-out grids from alternating radii.
    pub fn split(&self) -> (SectorSpec, SectorSpec) {
        let pick = |parity: usize| SectorSpec {
            gamma: self.gamma,
            radii: self.radii.iter().enumerate().filter(|(i, _)| i % 2 == parity).map(|(_, r)| *r).collect(),
            args: self.args.clone(),
        };
        (pick(0), pick(1))
    }
}

/// `a`, the ramification exponent `s` and the intermediate opening `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamificationParams {
    pub a: f64,
    pub s: f64,
    pub delta: f64,
    pub gamma: f64,
    pub index_lower: f64,
}

impl RamificationParams {
    /// Checks `γ < δ < Γ` and `sδ < 1 < sΓ`.
    pub fn validate(&self) -> Result<()> {
        let Self { a, s, delta, gamma, index_lower } = *self;
        if !(a > 0.0) || !(s > 0.0) || !(gamma > 0.0) {
            return Err(Error::InvalidInput("a, s and γ must be positive".into()));
        }
        if !(gamma < delta && delta < index_lower) {
            return Err(Error::Precondition(format!("need γ < δ < Γ, got {gamma}, {delta}, {index_lower}")));
        }
        if !(s * delta < 1.0 && 1.0 < s * index_lower) {
            return Err(Error::Precondition(format!(
                "need sδ < 1 < sΓ, got sδ = {}, sΓ = {}",
                s * delta,
                s * index_lower
            )));
        }
        Ok(())
    }

    /// Replaces `s` and/or `δ` and revalidates.
    pub fn with_overrides(mut self, s: Option<f64>, delta: Option<f64>) -> Result<Self> {
        if let Some(d) = delta {
            self.delta = d;
        }
        if let Some(v) = s {
            self.s = v;
        }
        self.validate()?;
        Ok(self)
    }
}

/// Midpoint choice `δ = (γ + Γ)/2`, `s = 2/(δ + Γ)` with `Γ` the lower end
/// of the index bracket.
pub fn choose_ramification(gamma: f64, bracket: &IndexEstimate, a: f64) -> Result<RamificationParams> {
    let big = bracket.lo;
    if !(gamma < big) {
        return Err(Error::Precondition(format!(
            "no extension for opening γ = {gamma}: the mixed index bracket is [{:.4}, {:.4}] and γ must lie below its lower end",
            bracket.lo, bracket.hi
        )));
    }
    let delta = 0.5 * (gamma + big);
    let s = 2.0 / (delta + big);
    let params = RamificationParams { a, s, delta, gamma, index_lower: big };
    params.validate()?;
    Ok(params)
}
