//! Outer functions `F_a` on the right half-plane `Re w > 0`.
//!
//! `log F_a(w) = (1/π) ∫_ℝ −a ω(1/|t|)/(1+t²) · (itw − 1)/(it − w) dt`.
//! Pairing `t` with `−t` gives the symmetric form
//! `log F_a(w) = −(2aw/π) ∫_1^∞ ω(u)/(1 + w²u²) du`, which is the production
//! route. For sequence weights `ω(e^y) = c Σ_k (y − κ_k)_+` and each kink
//! integrates in closed form through the inverse tangent integral. The
//! literal two-sided integral is kept as an independent check.

use super::fit::{minimal_feasible, SandwichCheck, FIT_MARGIN};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_panels, QuadratureConfig};
use crate::special::inverse_tangent_integral;
use crate::weight::WeightFunction;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// e-folds of decay covered numerically before the literal-route tail is
/// closed by its leading asymptotic term.
const LITERAL_TAIL_EFOLDS: f64 = 40.0;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug)]
struct KinkSum {
    scale: f64,
    kinks: Vec<f64>,
    /// `Σ_k (Z − κ_k)`.
    spread: f64,
}

/// `F_1` for a normalized weight with (ω_nq); `F_a = F_1^a`.
#[derive(Clone, Debug)]
pub struct OuterFunction {
    weight: WeightFunction<f64>,
    kinks: Option<KinkSum>,
    log_horizon: f64,
    omega_at_horizon: f64,
    tail_exponent: f64,
    cfg: QuadratureConfig<f64>,
}

impl OuterFunction {
    pub fn new(weight: WeightFunction<f64>, cfg: QuadratureConfig<f64>) -> Result<Self> {
        cfg.validate()?;
        if !weight.is_normalized() {
            return Err(Error::Precondition(format!("outer function needs a normalized weight ({})", weight.label())));
        }
        let e = weight.tail_exponent();
        if !(e < 1.0) {
            return Err(Error::Precondition(format!(
                "(omega_nq) fails for {}: tail growth exponent {e} ≥ 1",
                weight.label()
            )));
        }
        let log_horizon = weight.t_grid_max().ln();
        let omega_at_horizon = weight.eval(log_horizon.exp().min(weight.t_max()))?;
        let kinks = weight.kink_form().map(|(scale, ks)| {
            let kinks: Vec<f64> = ks.into_iter().filter(|k| *k < log_horizon).collect();
            let spread = kinks.iter().map(|k| log_horizon - k).sum();
            KinkSum { scale, kinks, spread }
        });
        Ok(Self { weight, kinks, log_horizon, omega_at_horizon, tail_exponent: e, cfg })
    }

    pub fn weight(&self) -> &WeightFunction<f64> {
        &self.weight
    }

    /// `ln T`: exact weight data below, power-law tail model above.
    pub fn log_horizon(&self) -> f64 {
        self.log_horizon
    }

    /// `log F_1(w)` by the symmetric route.
    pub fn log_unit(&self, w: Complex64) -> Result<Complex64> {
        check_half_plane(w)?;
        let body = match &self.kinks {
            Some(k) => self.body_kinks(k, w),
            None => self.body_numeric(w)?,
        };
        let j = body + self.tail(w)?;
        Ok(-2.0 * w / PI * j)
    }

    /// `log F_a(w) = a log F_1(w)`.
    pub fn log_value(&self, a: f64, w: Complex64) -> Result<Complex64> {
        Ok(a * self.log_unit(w)?)
    }

    /// `∫_1^T ω(u)/(1+w²u²) du` as a sum over kinks:
    /// `c Σ_k [Φ(κ_k) − Φ(Z) − (Z − κ_k) Ψ(Z)]` with
    /// `Ψ(z) = atan(e^{−z}/w)/w` and `Φ(z) = Ti_2(e^{−z}/w)/w`.
    fn body_kinks(&self, k: &KinkSum, w: Complex64) -> Complex64 {
        let inv_w = w.inv();
        let z = self.log_horizon;
        let head: Complex64 = k.kinks.iter().map(|&kap| inverse_tangent_integral((-kap).exp() * inv_w)).sum();
        let phi_z = inverse_tangent_integral((-z).exp() * inv_w) * inv_w;
        let psi_z = ((-z).exp() * inv_w).atan() * inv_w;
        k.scale * (head * inv_w - k.kinks.len() as f64 * phi_z - k.spread * psi_z)
    }

    fn body_numeric(&self, w: Complex64) -> Result<Complex64> {
        let z_max = self.log_horizon;
        let mut breaks = vec![0.0];
        breaks.extend(self.weight.log_breakpoints(0.0, z_max));
        let peak = -w.norm().ln();
        if peak > 0.0 && peak < z_max {
            breaks.push(peak);
        }
        breaks.push(z_max);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let w2 = w * w;
        let t_max = self.weight.t_max();
        let mut failure = None;
        let res = integrate_panels(
            |z: f64| match self.weight.eval(z.exp().min(t_max)) {
                Ok(om) => om * (-z).exp() / ((-2.0 * z).exp() + w2),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            },
            &breaks,
            &self.cfg,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        converged(res.converged, res.error, "outer-function body")?;
        Ok(res.value)
    }

    /// `∫_T^∞ ω(T)(u/T)^e/(1+w²u²) du`.
    fn tail(&self, w: Complex64) -> Result<Complex64> {
        let e = self.tail_exponent;
        let big_t = self.log_horizon.exp();
        let wt = w * big_t;
        let scale = self.omega_at_horizon * big_t;
        if scale == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if wt.norm() >= 2.0 {
            return Ok(scale * alternating_tail(wt * wt, e));
        }
        let v = 2.0 / wt.norm();
        let q = wt * wt;
        let res = integrate(|y: f64| ((e + 1.0) * y).exp() / (1.0 + q * (2.0 * y).exp()), 0.0, v.ln(), &self.cfg);
        converged(res.converged, res.error, "outer-function tail")?;
        Ok(scale * (res.value + v.powf(e + 1.0) * alternating_tail(q * v * v, e)))
    }

    /// `log F_a(w)` from the two-sided integral, each half `t ≷ 0` integrated
    /// on its own and with `a` inside the integrand.
    pub fn log_literal(&self, a: f64, w: Complex64) -> Result<Complex64> {
        check_half_plane(w)?;
        let mut total = Complex64::new(0.0, 0.0);
        for sign in [1.0, -1.0] {
            total += self.literal_half(w, sign)?;
        }
        Ok(-a / PI * total)
    }

    /// `∫_1^∞ ω(u)/(1+u²) K(±1/u) du`, `K(t) = (itw − 1)/(it − w)`.
    fn literal_half(&self, w: Complex64, sign: f64) -> Result<Complex64> {
        let kernel = |z: f64| {
            let t = sign * (-z).exp();
            (I * t * w - 1.0) / (I * t - w)
        };
        let z_max = self.log_horizon;
        let mut breaks = vec![0.0];
        breaks.extend(self.weight.log_breakpoints(0.0, z_max));
        let peak = -w.norm().ln();
        if peak > 0.0 && peak < z_max {
            breaks.push(peak);
        }
        breaks.push(z_max);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let t_max = self.weight.t_max();
        let mut failure = None;
        let body = integrate_panels(
            |z: f64| match self.weight.eval(z.exp().min(t_max)) {
                Ok(om) => om / ((-z).exp() + z.exp()) * kernel(z),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, 0.0)
                }
            },
            &breaks,
            &self.cfg,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        converged(body.converged, body.error, "literal outer-function body")?;
        let e = self.tail_exponent;
        let om_t = self.omega_at_horizon;
        let span = LITERAL_TAIL_EFOLDS / (1.0 - e);
        let near = integrate(
            |z: f64| om_t * (e * (z - z_max)).exp() / ((-z).exp() + z.exp()) * kernel(z),
            z_max,
            z_max + span,
            &self.cfg,
        );
        converged(near.converged, near.error, "literal outer-function tail")?;
        // Beyond U = T e^span: ω(u)/(1+u²) K → ω(T)(u/T)^e u^{-2} / w.
        let far = om_t * ((e - 1.0) * span - z_max).exp() / ((1.0 - e) * w);
        Ok(body.value + near.value + far)
    }
}

/// `Σ_k (−1)^k q^{−k−1}/(2k+1−e) = ∫_1^∞ v^e/(1+qv²) dv` for `|q| ≥ 4`.
fn alternating_tail(q: Complex64, e: f64) -> Complex64 {
    let inv_q = q.inv();
    let mut pow = inv_q;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..200 {
        let term = pow / (2.0 * k as f64 + 1.0 - e);
        acc += term;
        if term.norm() <= 1e-17 * acc.norm() {
            break;
        }
        pow = -pow * inv_q;
    }
    acc
}

fn check_half_plane(w: Complex64) -> Result<()> {
    if !(w.re > 0.0) || !w.im.is_finite() {
        return Err(Error::InvalidInput(format!("outer function needs Re w > 0, got {w}")));
    }
    Ok(())
}

fn converged(ok: bool, err: f64, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Quadrature(format!("{what} did not converge (error estimate {err:.3e})")))
    }
}

/// Fitted half-plane sandwich
/// `B^{−a} exp(−2aB σ(B/Re w)) ≤ |F_a(w)| ≤ exp(−(a/2) ω(1/(A|w|)))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterSandwich {
    pub a: f64,
    pub lower: SandwichCheck,
    pub upper: SandwichCheck,
}

impl OuterSandwich {
    pub fn pass(&self) -> bool {
        self.lower.pass && self.upper.pass
    }
}

pub fn outer_sandwich(
    outer: &OuterFunction,
    sigma: &WeightFunction<f64>,
    a: f64,
    calibration: &[Complex64],
    holdout: &[Complex64],
) -> Result<OuterSandwich> {
    let omega = outer.weight();
    let logs = |pts: &[Complex64]| -> Result<Vec<(Complex64, f64)>> {
        pts.iter().map(|&w| Ok((w, outer.log_value(a, w)?.re))).collect()
    };
    let cal = logs(calibration)?;
    let held = logs(holdout)?;

    let upper_slack = |c: f64, w: Complex64, lf: f64| -> f64 {
        let om = omega.eval_extended(1.0 / (c * w.norm())).unwrap_or(f64::NAN);
        -0.5 * a * om - lf
    };
    let lower_slack = |c: f64, w: Complex64, lf: f64| -> f64 {
        let sg = sigma.eval_extended(c / w.re).unwrap_or(f64::NAN);
        lf - (-a * c.ln() - 2.0 * a * c * sg)
    };

    let upper = match minimal_feasible(1.0, 1e8, |c| cal.iter().all(|&(w, lf)| upper_slack(c, w, lf) >= 0.0)) {
        Some(c) => {
            let c = c * FIT_MARGIN;
            let slacks: Vec<f64> = held.iter().map(|&(w, lf)| upper_slack(c, w, lf)).collect();
            SandwichCheck::from_slacks("outer upper", vec![("A".into(), c)], cal.len(), &slacks)
        }
        None => SandwichCheck::infeasible("outer upper", cal.len()),
    };
    let lower = match minimal_feasible(1.0, 1e8, |c| cal.iter().all(|&(w, lf)| lower_slack(c, w, lf) >= 0.0)) {
        Some(c) => {
            let c = c * FIT_MARGIN;
            let slacks: Vec<f64> = held.iter().map(|&(w, lf)| lower_slack(c, w, lf)).collect();
            SandwichCheck::from_slacks("outer lower", vec![("B".into(), c)], cal.len(), &slacks)
        }
        None => SandwichCheck::infeasible("outer lower", cal.len()),
    };
    Ok(OuterSandwich { a, lower, upper })
}
