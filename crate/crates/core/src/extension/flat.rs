//! Flat functions `G_a(ξ) = F_a(ξ^s)` on `S_δ`.

use super::fit::{maximal_feasible, minimal_feasible, SandwichCheck, FIT_MARGIN};
use super::outer::OuterFunction;
use super::RamificationParams;
use crate::error::{Error, Result};
use crate::properties::quotient_domination;
use crate::quadrature::QuadratureConfig;
use crate::sequence::{SequenceTransform, WeightSequence};
use crate::weight::{WeightFunction, WeightOp};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Which pair the flat function was built from.
#[derive(Clone, Debug)]
pub enum FlatSource {
    /// `F` built on `ω_{N^s}`; bounds expressed through `h_M`, `h_N`.
    Sequences { m: WeightSequence<f64>, n: WeightSequence<f64> },
    /// `F` built on `ω(t^{1/s})`; bounds expressed through `σ`, `ω`.
    Weights,
}

#[derive(Clone, Debug)]
pub struct FlatFunction {
    outer: OuterFunction,
    params: RamificationParams,
    source: FlatSource,
    sigma: WeightFunction<f64>,
    omega: WeightFunction<f64>,
}

impl FlatFunction {
    /// Sequence entry: `σ = ω_M`, `ω = ω_N`, outer function on `ω_{N^s}`.
    pub fn from_sequences(
        m: &WeightSequence<f64>,
        n: &WeightSequence<f64>,
        params: RamificationParams,
        cfg: QuadratureConfig<f64>,
    ) -> Result<Self> {
        params.validate()?;
        if m.horizon() != n.horizon() {
            return Err(Error::InvalidInput("sequences must share the horizon".into()));
        }
        let (c, first) = quotient_domination(m, n);
        if let Some(p) = first {
            return Err(Error::Precondition(format!("μ_p ≤ C ν_p fails first at p = {p} (ratio {c:.4e})")));
        }
        let sigma = WeightFunction::from_sequence(m.clone())?;
        let omega = WeightFunction::from_sequence(n.clone())?;
        let ramified = WeightFunction::from_sequence(n.transform(SequenceTransform::Power(params.s))?)?;
        let outer = OuterFunction::new(ramified, cfg)?;
        Ok(Self { outer, params, source: FlatSource::Sequences { m: m.clone(), n: n.clone() }, sigma, omega })
    }

    /// Weight entry: outer function on `ω^{1/s}(t) = ω(t^{1/s})`.
    pub fn from_weights(
        sigma: &WeightFunction<f64>,
        omega: &WeightFunction<f64>,
        params: RamificationParams,
        cfg: QuadratureConfig<f64>,
    ) -> Result<Self> {
        params.validate()?;
        if !sigma.is_normalized() || !omega.is_normalized() {
            return Err(Error::Precondition("both weights must be normalized".into()));
        }
        let ramified = omega.transform(WeightOp::Power(1.0 / params.s))?;
        let outer = OuterFunction::new(ramified, cfg)?;
        Ok(Self { outer, params, source: FlatSource::Weights, sigma: sigma.clone(), omega: omega.clone() })
    }

    pub fn params(&self) -> &RamificationParams {
        &self.params
    }
    pub fn outer(&self) -> &OuterFunction {
        &self.outer
    }
    pub fn source(&self) -> &FlatSource {
        &self.source
    }
    /// Smaller weight (`ω_M` for the sequence entry).
    pub fn sigma(&self) -> &WeightFunction<f64> {
        &self.sigma
    }
    /// Larger weight (`ω_N` for the sequence entry).
    pub fn omega(&self) -> &WeightFunction<f64> {
        &self.omega
    }

    /// `ξ ∈ S_δ`.
    pub fn contains(&self, xi: Complex64) -> bool {
        xi.norm() > 0.0 && xi.arg().abs() < self.params.delta * FRAC_PI_2
    }

    /// `log G_a(ξ)` on the principal branch.
    pub fn log_value(&self, xi: Complex64) -> Result<Complex64> {
        if !self.contains(xi) {
            return Err(Error::InvalidInput(format!("ξ = {xi} lies outside S_{}", self.params.delta)));
        }
        let w = (self.params.s * xi.ln()).exp();
        self.outer.log_value(self.params.a, w)
    }

    pub fn value(&self, xi: Complex64) -> Result<Complex64> {
        Ok(self.log_value(xi)?.exp())
    }

    /// `log e_a(z) = log z + log G_a(1/z)`.
    pub fn log_kernel(&self, z: Complex64) -> Result<Complex64> {
        Ok(z.ln() + self.log_value(z.inv())?)
    }

    pub fn kernel(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_kernel(z)?.exp())
    }
}

/// Fitted sector sandwich for `|G_a|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatSandwich {
    pub lower: SandwichCheck,
    pub upper: SandwichCheck,
}

impl FlatSandwich {
    pub fn pass(&self) -> bool {
        self.lower.pass && self.upper.pass
    }
}

/// Sequence entry:
/// `K_1^{−a} h_M(K_0|ξ|)^{2aK_2} ≤ |G_a(ξ)| ≤ h_N(K_3|ξ|)^{aK_4/2}` with `K_4 = s`,
/// `K_1 = B`, `K_2 = Bs` and `K_0 = (cos(sδπ/2)/B)^{1/s}`.
/// Weight entry:
/// `K_1^{−a} exp(−2aσ(1/(K_2|ξ|))) ≤ |G_a(ξ)| ≤ exp(−(a/2)ω(1/(K_3|ξ|)))`.
pub fn flat_sandwich(flat: &FlatFunction, calibration: &[Complex64], holdout: &[Complex64]) -> Result<FlatSandwich> {
    let a = flat.params.a;
    let s = flat.params.s;
    let is_seq = matches!(flat.source, FlatSource::Sequences { .. });
    let logs = |pts: &[Complex64]| -> Result<Vec<(f64, f64)>> {
        pts.iter().map(|&xi| Ok((xi.norm(), flat.log_value(xi)?.re))).collect()
    };
    let cal = logs(calibration)?;
    let held = logs(holdout)?;
    // ln h_M(t) = −ω_M(1/t).
    let sig = |t: f64| flat.sigma.eval_extended(t).unwrap_or(f64::NAN);
    let om = |t: f64| flat.omega.eval_extended(t).unwrap_or(f64::NAN);

    let upper_factor = if is_seq { 0.5 * a * s } else { 0.5 * a };
    let upper_slack = |k3: f64, r: f64, lg: f64| -upper_factor * om(1.0 / (k3 * r)) - lg;
    let upper = match minimal_feasible(1e-8, 1e8, |k| cal.iter().all(|&(r, lg)| upper_slack(k, r, lg) >= 0.0)) {
        Some(k) => {
            let k = k * FIT_MARGIN;
            let slacks: Vec<f64> = held.iter().map(|&(r, lg)| upper_slack(k, r, lg)).collect();
            let mut consts = vec![("K3".to_string(), k)];
            if is_seq {
                consts.push(("K4".into(), s));
            }
            SandwichCheck::from_slacks("flat upper", consts, cal.len(), &slacks)
        }
        None => SandwichCheck::infeasible("flat upper", cal.len()),
    };

    // The sequence lower bound is fitted in the one-parameter form the
    // construction yields: prefactor B^{-a}, exponent 2aBs and dilation
    // B_1 = (cos(sδπ/2)/B)^{1/s} inside h_M.
    let lower = if is_seq {
        let cos = (s * flat.params.delta * FRAC_PI_2).cos();
        let dilation = |b: f64| (cos / b).powf(1.0 / s);
        let slack = |b: f64, r: f64, lg: f64| lg - (-a * b.ln() - 2.0 * a * b * s * sig(1.0 / (dilation(b) * r)));
        match minimal_feasible(1.0, 1e8, |b| cal.iter().all(|&(r, lg)| slack(b, r, lg) >= 0.0)) {
            Some(b) => {
                let b = b * FIT_MARGIN;
                let slacks: Vec<f64> = held.iter().map(|&(r, lg)| slack(b, r, lg)).collect();
                SandwichCheck::from_slacks(
                    "flat lower",
                    vec![("K1".into(), b), ("K2".into(), b * s), ("dilation".into(), dilation(b))],
                    cal.len(),
                    &slacks,
                )
            }
            None => SandwichCheck::infeasible("flat lower", cal.len()),
        }
    } else {
        let slack = |k1: f64, k2: f64, r: f64, lg: f64| lg - (-a * k1.ln() - 2.0 * a * sig(1.0 / (k2 * r)));
        let mut found = None;
        for k1 in crate::scalar::geometric_grid(1.0, 1e4, 41) {
            if let Some(k2) = maximal_feasible(1e-6, 1e6, |k2| cal.iter().all(|&(r, lg)| slack(k1, k2, r, lg) >= 0.0)) {
                found = Some((k1, k2 / FIT_MARGIN));
                break;
            }
        }
        match found {
            Some((k1, k2)) => {
                let slacks: Vec<f64> = held.iter().map(|&(r, lg)| slack(k1, k2, r, lg)).collect();
                SandwichCheck::from_slacks(
                    "flat lower",
                    vec![("K1".into(), k1), ("K2".into(), k2)],
                    cal.len(),
                    &slacks,
                )
            }
            None => SandwichCheck::infeasible("flat lower", cal.len()),
        }
    };
    Ok(FlatSandwich { lower, upper })
}

/// `ln(|G_a(ξ)|/|ξ|^p)` along the bisecting ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub p: usize,
    pub trace: Vec<(f64, f64)>,
    /// Drop of the log-ratio from its maximum to the smallest radius.
    pub decay: f64,
    pub monotone_tail: bool,
    pub pass: bool,
}

/// Flatness over `decades` decades below `r_top`: the log-ratio must be
/// nonincreasing over the smaller half of the radii and end at least
/// `min_decay` below its maximum.
pub fn flatness_report(
    flat: &FlatFunction,
    p: usize,
    r_top: f64,
    decades: f64,
    points: usize,
    min_decay: f64,
) -> Result<FlatnessReport> {
    let radii = crate::scalar::geometric_grid(r_top * 10f64.powf(-decades), r_top, points.max(4));
    let mut trace = Vec::with_capacity(radii.len());
    for &r in radii.iter().rev() {
        let lg = flat.log_value(Complex64::new(r, 0.0))?.re;
        trace.push((r, lg - p as f64 * r.ln()));
    }
    let half = trace.len() / 2;
    let monotone_tail = trace[half..].windows(2).all(|w| w[1].1 <= w[0].1);
    let max = trace.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let decay = max - trace.last().map(|t| t.1).unwrap_or(max);
    Ok(FlatnessReport { p, trace, decay, monotone_tail, pass: monotone_tail && decay >= min_decay })
}
