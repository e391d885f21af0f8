//! Weight functions `ω`, the associated functions `ω_M` and `h_M`, and the
//! upper integrals shared by the heir, the (ω_nq_r) test and the mixed index.

mod conditions;
mod conjugate;

pub use conditions::{weight_condition_report, WeightCondition};
pub use conjugate::{associated_matrix, biconjugate, legendre_conjugate, WeightMatrix};

use crate::error::{Error, Result};
use crate::properties::tail_growth_exponent;
use crate::quadrature::{integrate_panels, QuadratureConfig};
use crate::scalar::Real;
use crate::sequence::{SequenceDescriptor, WeightSequence};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest finite argument used when a weight has no horizon of its own.
pub const OPEN_HORIZON: f64 = 1e12;
const MAX_BREAKS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightOp<T> {
    /// `ω(t^r)`.
    Power(T),
    /// `ω(1/t)`.
    Iota,
    /// `c·ω(t)`.
    Scale(T),
    /// `(1/r) t^{1/r} ∫_t^∞ ω(v) v^{-1-1/r} dv`, optionally shifted to vanish on `[0, 1]`.
    Heir { r: T, offset: Option<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind<T> {
    /// `t^{1/s}`.
    Power { s: T },
    /// `max(0, ln t)^s`.
    LogPower { s: T },
    /// `ω_M(t) = sup_p (p ln t − ln M_p)`.
    Sequence(Arc<WeightSequence<T>>),
    Transform { base: Arc<WeightFunction<T>>, op: WeightOp<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction<T> {
    kind: WeightKind<T>,
    label: String,
}

/// JSON form: `{"kind": "power" | "logpower" | "sequence" | "transform", ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDescriptor {
    Power { s: f64 },
    Logpower { s: f64 },
    Sequence { sequence: SequenceDescriptor },
    Transform { base: Box<WeightDescriptor>, op: TransformDescriptor },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TransformDescriptor {
    Power { r: f64 },
    Iota,
    Scale { c: f64 },
    Heir { r: f64, normalized: bool },
}

/// Value of `∫_1^∞ ω(tu) u^{-1-1/r} du` split into quadrature and modelled tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperIntegral {
    pub body: f64,
    pub tail: f64,
    pub error: f64,
    pub converged: bool,
}

impl UpperIntegral {
    pub fn value(&self) -> f64 {
        self.body + self.tail
    }
}

impl<T: Real> WeightFunction<T> {
    pub fn power(s: T) -> Result<Self> {
        if !(s > T::zero()) {
            return Err(Error::InvalidInput("power weight needs s > 0".into()));
        }
        Ok(Self { kind: WeightKind::Power { s }, label: format!("t^(1/{s})") })
    }

    pub fn log_power(s: T) -> Result<Self> {
        if !(s > T::one()) {
            return Err(Error::InvalidInput("log-power weight needs s > 1".into()));
        }
        Ok(Self { kind: WeightKind::LogPower { s }, label: format!("log^{s}") })
    }

    /// Associated function of a log-convex sequence.
    pub fn from_sequence(m: WeightSequence<T>) -> Result<Self> {
        if !m.is_log_convex() || !m.is_normalized() {
            return Err(Error::Precondition(format!(
                "associated function needs a normalized log-convex sequence ({})",
                m.label()
            )));
        }
        let label = format!("omega[{}]", m.label());
        Ok(Self { kind: WeightKind::Sequence(Arc::new(m)), label })
    }

    pub fn transform(&self, op: WeightOp<T>) -> Result<Self> {
        let label = match &op {
            WeightOp::Power(r) => {
                if !(*r > T::zero()) {
                    return Err(Error::InvalidInput("power transform needs r > 0".into()));
                }
                format!("({})^{r}", self.label)
            }
            WeightOp::Iota => format!("({})^iota", self.label),
            WeightOp::Scale(c) => format!("{c}*{}", self.label),
            WeightOp::Heir { r, offset } => {
                format!("heir{}({}, r={r})", if offset.is_some() { "0" } else { "" }, self.label)
            }
        };
        Ok(Self { kind: WeightKind::Transform { base: Arc::new(self.clone()), op }, label })
    }

    /// Heir `t ↦ (1/r) t^{1/r} ∫_t^∞ ω(v) v^{-1-1/r} dv`; with `normalized`
    /// the value at 1 is subtracted and the result clamped to 0 on `[0, 1]`.
    pub fn heir(&self, r: T, normalized: bool) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::InvalidInput("heir needs r > 0".into()));
        }
        let raw = self.transform(WeightOp::Heir { r, offset: None })?;
        if !normalized {
            return Ok(raw);
        }
        let at_one = raw.eval(T::one())?;
        self.transform(WeightOp::Heir { r, offset: Some(at_one) })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn kind(&self) -> &WeightKind<T> {
        &self.kind
    }

    pub fn sequence(&self) -> Option<&WeightSequence<T>> {
        match &self.kind {
            WeightKind::Sequence(m) => Some(m),
            _ => None,
        }
    }

    /// `ω ≡ 0` on `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        match &self.kind {
            WeightKind::Power { .. } => false,
            WeightKind::LogPower { .. } | WeightKind::Sequence(_) => true,
            WeightKind::Transform { base, op } => match op {
                WeightOp::Power(_) | WeightOp::Scale(_) => base.is_normalized(),
                WeightOp::Iota => false,
                WeightOp::Heir { offset, .. } => offset.is_some(),
            },
        }
    }

    /// Largest argument where the evaluator is exact (`+inf` for closed forms).
    pub fn t_max(&self) -> T {
        match &self.kind {
            WeightKind::Power { .. } | WeightKind::LogPower { .. } => T::infinity(),
            WeightKind::Sequence(m) => m.log_validity_radius().exp(),
            WeightKind::Transform { base, op } => match op {
                WeightOp::Power(r) => base.t_max().powf(T::one() / *r),
                WeightOp::Iota => T::infinity(),
                WeightOp::Scale(_) | WeightOp::Heir { .. } => base.t_max(),
            },
        }
    }

    /// Finite upper end for grids and quadrature.
    pub fn t_grid_max(&self) -> T {
        self.t_max().min(T::of(OPEN_HORIZON))
    }

    /// Exponent `e` of the power-law growth `ω(t) ≈ ω(T)(t/T)^e` beyond `t_max`.
    pub fn tail_exponent(&self) -> T {
        match &self.kind {
            WeightKind::Power { s } => T::one() / *s,
            WeightKind::LogPower { .. } => T::zero(),
            WeightKind::Sequence(m) => T::of(1.0 / tail_growth_exponent(m.log_quotients())),
            WeightKind::Transform { base, op } => match op {
                WeightOp::Power(r) => base.tail_exponent() * *r,
                WeightOp::Iota => T::zero(),
                WeightOp::Scale(_) | WeightOp::Heir { .. } => base.tail_exponent(),
            },
        }
    }

    /// `ω(t)` on `[0, t_max]`; beyond the horizon an error is returned.
    pub fn eval(&self, t: T) -> Result<T> {
        if !(t >= T::zero()) {
            return Err(Error::InvalidInput(format!("weight argument must be ≥ 0, got {t}")));
        }
        match &self.kind {
            WeightKind::Power { s } => Ok(t.powf(T::one() / *s)),
            WeightKind::LogPower { s } => Ok(if t > T::one() { t.ln().powf(*s) } else { T::zero() }),
            WeightKind::Sequence(m) => omega_from_sequence(m, t),
            WeightKind::Transform { base, op } => match op {
                WeightOp::Power(r) => base.eval(t.powf(*r)),
                WeightOp::Iota => {
                    if t == T::zero() {
                        Err(Error::InvalidInput("iota transform undefined at 0".into()))
                    } else {
                        base.eval(t.recip())
                    }
                }
                WeightOp::Scale(c) => Ok(*c * base.eval(t)?),
                WeightOp::Heir { r, offset } => {
                    if let Some(off) = offset {
                        if t <= T::one() {
                            return Ok(T::zero());
                        }
                        let raw = heir_value(base, *r, t)?;
                        Ok((raw - *off).max(T::zero()))
                    } else {
                        heir_value(base, *r, t)
                    }
                }
            },
        }
    }

    /// `ω(t)` continued past `t_max` by the power-law tail model.
    pub fn eval_extended(&self, t: T) -> Result<T> {
        let tm = self.t_max();
        if t <= tm {
            return self.eval(t);
        }
        let e = self.tail_exponent();
        Ok(self.eval(tm)? * (t / tm).powf(e))
    }

    /// Kinks of `y ↦ ω(e^y)` inside `(lo, hi)`.
    pub fn log_breakpoints(&self, lo: T, hi: T) -> Vec<T> {
        let mut out: Vec<T> = match &self.kind {
            WeightKind::Sequence(m) => {
                let mut v: Vec<T> = m.log_quotients()[1..].iter().copied().filter(|&y| y > lo && y < hi).collect();
                v.dedup();
                v
            }
            WeightKind::LogPower { .. } => {
                if lo < T::zero() && hi > T::zero() {
                    vec![T::zero()]
                } else {
                    vec![]
                }
            }
            WeightKind::Transform { base, op } => match op {
                WeightOp::Power(r) => base.log_breakpoints(lo * *r, hi * *r).into_iter().map(|y| y / *r).collect(),
                WeightOp::Scale(_) => base.log_breakpoints(lo, hi),
                WeightOp::Iota => base.log_breakpoints(-hi, -lo).into_iter().rev().map(|y| -y).collect(),
                WeightOp::Heir { offset, .. } => {
                    if offset.is_some() && lo < T::zero() && hi > T::zero() {
                        vec![T::zero()]
                    } else {
                        vec![]
                    }
                }
            },
            WeightKind::Power { .. } => vec![],
        };
        if out.len() > MAX_BREAKS {
            let step = out.len() / MAX_BREAKS + 1;
            out = out.into_iter().step_by(step).collect();
        }
        out
    }

    /// `(c, κ)` with `ω(e^y) = c Σ_k (y − κ_k)_+` for `y ≤ ln t_max`, when the
    /// weight is piecewise linear in `ln t` (sequence weights and their
    /// power and scale transforms).
    pub fn kink_form(&self) -> Option<(T, Vec<T>)> {
        match &self.kind {
            WeightKind::Sequence(m) => Some((T::one(), m.log_quotients()[1..].to_vec())),
            WeightKind::Transform { base, op } => {
                let (c, kinks) = base.kink_form()?;
                match op {
                    WeightOp::Power(r) => Some((c * *r, kinks.into_iter().map(|k| k / *r).collect())),
                    WeightOp::Scale(k) => Some((c * *k, kinks)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// `I_r(t) = ∫_1^∞ ω(tu) u^{-1-1/r} du = t^{1/r} ∫_t^∞ ω(v) v^{-1-1/r} dv`.
    ///
    /// Quadrature runs in `z = ln u` up to the horizon; beyond it the
    /// power-law tail model is integrated in closed form.
    pub fn dilated_integral(&self, r: T, t: T, cfg: &QuadratureConfig<T>) -> Result<UpperIntegral> {
        let inv_r = T::one() / r;
        let e = self.tail_exponent();
        if !(inv_r > e) {
            return Err(Error::Divergent(format!(
                "∫ ω(tu) u^(-1-1/r) du diverges for r = {r}: growth exponent {e} ≥ 1/r"
            )));
        }
        if !(t > T::zero()) {
            return Err(Error::InvalidInput("dilation must be positive".into()));
        }
        let big_t = self.integration_horizon(inv_r, t)?;
        if t >= big_t {
            let tail = self.eval_extended(t)? / (inv_r - e);
            return Ok(UpperIntegral { body: 0.0, tail: tail.f64(), error: 0.0, converged: true });
        }
        let lt = t.ln();
        let z_max = big_t.ln() - lt;
        let mut breaks = vec![T::zero()];
        breaks.extend(self.log_breakpoints(lt, big_t.ln()).into_iter().map(|y| y - lt));
        breaks.push(z_max);
        let mut failure = None;
        let res = integrate_panels(
            |z: T| match self.eval((lt + z).exp().min(big_t)) {
                Ok(w) => w * (-z * inv_r).exp(),
                Err(err) => {
                    failure.get_or_insert(err);
                    T::nan()
                }
            },
            &breaks,
            cfg,
        );
        if let Some(err) = failure {
            return Err(err);
        }
        let tail = self.eval(big_t)? * (-z_max * inv_r).exp() / (inv_r - e);
        Ok(UpperIntegral { body: res.value.f64(), tail: tail.f64(), error: res.error.f64(), converged: res.converged })
    }

    /// Truncation point: the horizon if finite, otherwise the first decade
    /// where the integrand is negligible against its running peak.
    fn integration_horizon(&self, inv_r: T, t: T) -> Result<T> {
        let tm = self.t_max();
        if tm.is_finite() {
            return Ok(tm);
        }
        let mut peak = T::zero();
        let mut x = t.max(T::one());
        for _ in 0..300 {
            let v = self.eval(x)? * (x / t).powf(-inv_r);
            peak = peak.max(v);
            if x > T::of(1e3) * t && v <= T::of(1e-12) * peak {
                return Ok(x);
            }
            if x > T::of(1e290) {
                break;
            }
            x = x * T::of(10.0);
        }
        Ok(x)
    }

    pub fn descriptor(&self) -> WeightDescriptor {
        match &self.kind {
            WeightKind::Power { s } => WeightDescriptor::Power { s: s.f64() },
            WeightKind::LogPower { s } => WeightDescriptor::Logpower { s: s.f64() },
            WeightKind::Sequence(m) => WeightDescriptor::Sequence { sequence: m.descriptor() },
            WeightKind::Transform { base, op } => WeightDescriptor::Transform {
                base: Box::new(base.descriptor()),
                op: match op {
                    WeightOp::Power(r) => TransformDescriptor::Power { r: r.f64() },
                    WeightOp::Iota => TransformDescriptor::Iota,
                    WeightOp::Scale(c) => TransformDescriptor::Scale { c: c.f64() },
                    WeightOp::Heir { r, offset } => TransformDescriptor::Heir { r: r.f64(), normalized: offset.is_some() },
                },
            },
        }
    }

    pub fn from_descriptor(d: &WeightDescriptor) -> Result<Self> {
        match d {
            WeightDescriptor::Power { s } => Self::power(T::of(*s)),
            WeightDescriptor::Logpower { s } => Self::log_power(T::of(*s)),
            WeightDescriptor::Sequence { sequence } => Self::from_sequence(WeightSequence::from_descriptor(sequence)?),
            WeightDescriptor::Transform { base, op } => {
                let base = Self::from_descriptor(base)?;
                match op {
                    TransformDescriptor::Power { r } => base.transform(WeightOp::Power(T::of(*r))),
                    TransformDescriptor::Iota => base.transform(WeightOp::Iota),
                    TransformDescriptor::Scale { c } => base.transform(WeightOp::Scale(T::of(*c))),
                    TransformDescriptor::Heir { r, normalized } => base.heir(T::of(*r), *normalized),
                }
            }
        }
    }
}

fn heir_value<T: Real>(base: &WeightFunction<T>, r: T, t: T) -> Result<T> {
    let cfg = QuadratureConfig::default().with_rel_tol(T::of(1e-10));
    Ok(T::of(base.dilated_integral(r, t, &cfg)?.value()) / r)
}

/// `ω_M(t)`, exact up to the validity radius `μ_P`; out-of-horizon beyond.
pub fn omega_from_sequence<T: Real>(m: &WeightSequence<T>, t: T) -> Result<T> {
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let lt = t.ln();
    let q = m.log_quotients();
    let n = m.horizon();
    // A few ulps of slack absorb grid rounding at the radius itself; the
    // formula stays exact up to the unknown μ_{P+1} ≥ μ_P.
    let slack = T::of(64.0) * T::epsilon() * q[n].abs().max(T::one());
    if lt > q[n] + slack {
        return Err(Error::OutOfHorizon { t: t.f64(), limit: q[n].exp().f64() });
    }
    // Largest p with ln μ_p ≤ ln t; quotients are nondecreasing from p = 1.
    let p = q[1..].partition_point(|&x| x <= lt);
    if p == 0 {
        return Ok(T::zero());
    }
    Ok((T::of_usize(p) * lt - m.log_value(p)).max(T::zero()))
}

/// `ln h_M(t) = min_k (ln M_k + k ln t)` by a full scan over `k ≤ P`.
pub fn log_h_from_sequence<T: Real>(m: &WeightSequence<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidInput("h_M needs t > 0".into()));
    }
    let lt = t.ln();
    Ok(m
        .log_values()
        .iter()
        .enumerate()
        .map(|(k, &lm)| lm + T::of_usize(k) * lt)
        .fold(T::infinity(), T::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(r: f64, p: usize) -> WeightSequence<f64> {
        WeightSequence::gevrey(r, p).unwrap()
    }

    #[test]
    fn omega_gevrey_at_e() {
        let w = WeightFunction::from_sequence(g(1.0, 64)).unwrap();
        let brute = (0..=64)
            .map(|p| p as f64 - g(1.0, 64).log_value(p))
            .fold(f64::NEG_INFINITY, f64::max);
        let v = w.eval(std::f64::consts::E).unwrap();
        assert!((v - brute).abs() < 1e-14);
        assert!((v - (2.0 - 2f64.ln())).abs() < 1e-14);
        assert_eq!(w.eval(0.7).unwrap(), 0.0);
    }

    #[test]
    fn out_of_horizon_is_an_error() {
        let w = WeightFunction::from_sequence(g(1.0, 32)).unwrap();
        assert!(matches!(w.eval(33.0), Err(Error::OutOfHorizon { .. })));
        assert!(w.eval(32.0).is_ok());
    }

    #[test]
    fn power_identity_for_sequences() {
        let m = g(2.0, 400);
        let root = m.transform(crate::SequenceTransform::Power(0.5)).unwrap();
        let wm = WeightFunction::from_sequence(m).unwrap();
        let wr = WeightFunction::from_sequence(root).unwrap();
        let lhs = wm.transform(WeightOp::Power(2.0)).unwrap().eval(3.0).unwrap();
        assert!((lhs - 2.0 * wr.eval(3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn h_duality() {
        let m = g(1.0, 200);
        let w = WeightFunction::from_sequence(m.clone()).unwrap();
        for t in [0.01, 0.1, 1.0 / std::f64::consts::E, 0.9, 1.0, 3.0] {
            let lh = log_h_from_sequence(&m, t).unwrap();
            let om = if t >= 1.0 { 0.0 } else { w.eval(1.0 / t).unwrap() };
            assert!((lh + om).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn builtin_values() {
        let sig = WeightFunction::log_power(2.0).unwrap();
        assert_eq!(sig.eval(1.0).unwrap(), 0.0);
        assert!((sig.eval(std::f64::consts::E.powi(2)).unwrap() - 4.0).abs() < 1e-12);
        assert!((WeightFunction::power(2.0f64).unwrap().eval(4.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn iota_is_involutive() {
        let w = WeightFunction::log_power(2.5f64).unwrap();
        let ii = w.transform(WeightOp::Iota).unwrap().transform(WeightOp::Iota).unwrap();
        for t in [0.3, 1.0, 2.0, 50.0] {
            assert!((ii.eval(t).unwrap() - w.eval(t).unwrap()).abs() < 1e-12);
        }
        let i = w.transform(WeightOp::Iota).unwrap();
        assert_eq!(i.eval(3.0).unwrap(), 0.0);
    }

    #[test]
    fn dilated_integral_closed_form() {
        let w = WeightFunction::power(2.0).unwrap();
        let j = w.dilated_integral(1.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((j.value() - 2.0).abs() < 1e-6, "{}", j.value());
        // I_r(t) = t^{1/2} / (1/r − 1/2) at r = 1.5, t = 9.
        let j = w.dilated_integral(1.5, 9.0, &QuadratureConfig::default()).unwrap();
        assert!((j.value() - 18.0).abs() < 1e-6);
        assert!(w.dilated_integral(2.0, 1.0, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn heir_of_root() {
        let w = WeightFunction::power(2.0f64).unwrap();
        let k = w.heir(1.0, false).unwrap();
        for t in [1.0, 4.0, 100.0] {
            assert!((k.eval(t).unwrap() - 2.0 * t.sqrt()).abs() < 1e-6 * t.sqrt());
        }
        // ω = t^{1/3}, r = 2: (1/2) t^{1/2} ∫_t^∞ v^{1/3 - 3/2} dv = 3 t^{1/3}.
        let k = WeightFunction::power(3.0f64).unwrap().heir(2.0, false).unwrap();
        assert!((k.eval(8.0).unwrap() - 6.0).abs() < 1e-6);
    }

    #[test]
    fn descriptor_round_trip() {
        let w = WeightFunction::from_sequence(g(2.0, 32))
            .unwrap()
            .transform(WeightOp::Power(0.5))
            .unwrap();
        let json = serde_json::to_string(&w.descriptor()).unwrap();
        let d: WeightDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(WeightFunction::<f64>::from_descriptor(&d).unwrap(), w);
    }

    #[test]
    fn kink_form_reproduces_values() {
        let base = WeightFunction::from_sequence(g(2.0, 200)).unwrap();
        let w = base.transform(WeightOp::Power(1.75)).unwrap().transform(WeightOp::Scale(0.5)).unwrap();
        let (c, kinks) = w.kink_form().unwrap();
        for y in [0.0, 0.3, 1.7, 4.2, 5.9] {
            let direct = w.eval(f64::exp(y)).unwrap();
            let summed = c * kinks.iter().map(|k| (y - k).max(0.0)).sum::<f64>();
            assert!((direct - summed).abs() < 1e-11 * (1.0 + direct), "y = {y}");
        }
        assert!(WeightFunction::power(2.0f64).unwrap().kink_form().is_none());
    }
}
