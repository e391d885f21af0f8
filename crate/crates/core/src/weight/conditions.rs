//! Diagnostics for the standard weight-function conditions.

use super::WeightFunction;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::report::{bounded_verdict, vanishing_verdict, PropertyReport, TailEstimate, Verdict};
use crate::scalar::{geometric_grid, Real};
use serde::{Deserialize, Serialize};

const GRID_POINTS: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "condition", content = "param")]
pub enum WeightCondition {
    /// `ω(2t) = O(ω(t))`.
    Omega1,
    /// `ω(t) = O(t)`.
    Omega2,
    /// `ln t = o(ω(t))`.
    Omega3,
    /// `y ↦ ω(e^y)` convex.
    Omega4,
    /// `ω(t) = o(t)`.
    Omega5,
    /// `2ω(t) ≤ ω(Ht) + H`.
    Omega6,
    /// `∫_1^∞ ω(u) u^{-1-1/r} du < ∞`.
    NonQuasianalytic(f64),
    /// `∫_1^∞ ω(yt)/t² dt ≤ Cω(y) + C`.
    StrongNonQuasianalytic,
}

impl WeightCondition {
    pub fn tag(&self) -> String {
        match self {
            WeightCondition::Omega1 => "omega_1".into(),
            WeightCondition::Omega2 => "omega_2".into(),
            WeightCondition::Omega3 => "omega_3".into(),
            WeightCondition::Omega4 => "omega_4".into(),
            WeightCondition::Omega5 => "omega_5".into(),
            WeightCondition::Omega6 => "omega_6".into(),
            WeightCondition::NonQuasianalytic(r) => format!("omega_nq_{r}"),
            WeightCondition::StrongNonQuasianalytic => "omega_snq".into(),
        }
    }
}

fn t_grid<T: Real>(hi: T) -> Vec<T> {
    geometric_grid(T::of(2.0), hi.max(T::of(4.0)), GRID_POINTS)
}

fn with_trend(tag: String, trace: Vec<(f64, f64)>, vanishing: bool) -> PropertyReport {
    let (v, s) = if vanishing { vanishing_verdict(&trace) } else { bounded_verdict(&trace) };
    let witness = if vanishing {
        trace.last().map(|p| p.1).unwrap_or(f64::NAN)
    } else {
        trace.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut rep = PropertyReport::new(tag, v, witness);
    rep.slope = s.map(|s| s.slope);
    rep.trace = trace;
    rep
}

fn positive_ratio<T: Real>(
    w: &WeightFunction<T>,
    grid: &[T],
    f: impl Fn(T, T) -> Result<f64>,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for &t in grid {
        let wt = w.eval(t)?;
        if wt > T::zero() {
            out.push((t.f64(), f(t, wt)?));
        }
    }
    Ok(out)
}

/// Smallest `H ≥ 1` with `2ω(t) ≤ ω(Ht) + H`, searched in `ln H`; `+inf` if
/// no admissible `H` keeps `Ht` inside the horizon.
fn minimal_h<T: Real>(w: &WeightFunction<T>, t: T, h_cap: T) -> Result<f64> {
    let need = T::of(2.0) * w.eval(t)?;
    let ok = |h: T| -> Result<bool> { Ok(w.eval((h * t).min(w.t_max()))? + h >= need) };
    if ok(T::one())? {
        return Ok(1.0);
    }
    if !ok(h_cap)? {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (T::zero(), h_cap.ln());
    for _ in 0..60 {
        let mid = (lo + hi) * T::of(0.5);
        if ok(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp().f64())
}

pub fn weight_condition_report<T: Real>(w: &WeightFunction<T>, cond: WeightCondition) -> Result<PropertyReport> {
    let tag = cond.tag();
    let top = w.t_grid_max();
    let cfg = QuadratureConfig::<T>::default().with_rel_tol(T::of(1e-9));
    let rep = match cond {
        WeightCondition::Omega1 => {
            let grid = t_grid(top / T::of(2.0));
            let tr = positive_ratio(w, &grid, |t, wt| Ok((w.eval(T::of(2.0) * t)? / wt).f64()))?;
            with_trend(tag, tr, false).note("statistic ω(2t)/ω(t)")
        }
        WeightCondition::Omega2 | WeightCondition::Omega5 => {
            let grid = t_grid(top);
            let tr = positive_ratio(w, &grid, |t, wt| Ok((wt / t).f64()))?;
            let vanish = matches!(cond, WeightCondition::Omega5);
            with_trend(tag, tr, vanish).note("statistic ω(t)/t")
        }
        WeightCondition::Omega3 => {
            let grid = t_grid(top);
            let tr = positive_ratio(w, &grid, |t, wt| Ok((t.ln() / wt).f64()))?;
            with_trend(tag, tr, true).note("statistic ln t / ω(t)")
        }
        WeightCondition::Omega4 => {
            let ys: Vec<T> = (0..=400).map(|i| top.ln() * T::of_usize(i) / T::of(400.0)).collect();
            let phi = ys.iter().map(|y| w.eval(y.exp())).collect::<Result<Vec<T>>>()?;
            let mut worst = f64::INFINITY;
            let mut trace = Vec::new();
            for i in 1..phi.len() - 1 {
                let d2 = (phi[i + 1] - T::of(2.0) * phi[i] + phi[i - 1]).f64();
                let scale = 1e-9 * (1.0 + phi[i].abs().f64());
                worst = worst.min(d2 / scale);
                trace.push((ys[i].f64(), d2));
            }
            let v = if worst >= -1.0 { Verdict::Holds } else { Verdict::Fails };
            let mut rep = PropertyReport::new(tag, v, trace.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
            rep.trace = trace;
            rep.note("second differences of y ↦ ω(e^y) on a uniform grid")
        }
        WeightCondition::Omega6 => {
            let hi = if w.t_max().is_finite() { top / T::of(64.0) } else { T::of(1e6) };
            let grid = t_grid(hi);
            let h_cap = top / hi;
            let tr = positive_ratio(w, &grid, |t, _| minimal_h(w, t, h_cap))?;
            let mut rep = with_trend(tag, tr, false).note("statistic: minimal admissible H at each t");
            if rep.witness.is_infinite() {
                rep.verdict = Verdict::Fails;
            }
            rep
        }
        WeightCondition::NonQuasianalytic(r) => {
            if !(r > 0.0) {
                return Err(Error::InvalidInput("r must be positive".into()));
            }
            let e = w.tail_exponent().f64();
            match w.dilated_integral(T::of(r), T::one(), &cfg) {
                Ok(j) => {
                    let mut rep = PropertyReport::new(tag, Verdict::Holds, j.value());
                    rep.tail = Some(TailEstimate { exponent: e, value: j.tail, divergent: false });
                    if !j.converged {
                        rep.verdict = Verdict::Inconclusive;
                        rep.notes.push(format!("quadrature error {:.3e} above tolerance", j.error));
                    }
                    rep.note(format!("body {:.6e}, modelled tail {:.6e}", j.body, j.tail))
                }
                Err(Error::Divergent(msg)) => {
                    let mut rep = PropertyReport::new(tag, Verdict::Fails, f64::INFINITY);
                    rep.tail = Some(TailEstimate::divergent(e));
                    rep.note(msg)
                }
                Err(e) => return Err(e),
            }
        }
        WeightCondition::StrongNonQuasianalytic => {
            let grid = t_grid(top / T::of(10.0));
            let mut tr = Vec::new();
            for &y in &grid {
                let j = match w.dilated_integral(T::one(), y, &cfg) {
                    Ok(j) => j.value(),
                    Err(Error::Divergent(msg)) => {
                        return Ok(PropertyReport::new(tag, Verdict::Fails, f64::INFINITY).note(msg))
                    }
                    Err(e) => return Err(e),
                };
                tr.push((y.f64(), j / (w.eval(y)?.f64() + 1.0)));
            }
            with_trend(tag, tr, false).note("statistic y∫_y^∞ ω(v)/v² dv / (ω(y)+1)")
        }
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::WeightSequence;

    #[test]
    fn root_is_nonquasianalytic() {
        let w = WeightFunction::power(2.0f64).unwrap();
        let rep = weight_condition_report(&w, WeightCondition::NonQuasianalytic(1.0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!((rep.witness - 2.0).abs() < 1e-6);
        let rep = weight_condition_report(&w, WeightCondition::StrongNonQuasianalytic).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
    }

    #[test]
    fn log_power_fails_omega6() {
        let w = WeightFunction::log_power(2.0f64).unwrap();
        assert_eq!(weight_condition_report(&w, WeightCondition::Omega6).unwrap().verdict, Verdict::Fails);
        assert_eq!(weight_condition_report(&w, WeightCondition::Omega1).unwrap().verdict, Verdict::Holds);
        assert_eq!(weight_condition_report(&w, WeightCondition::Omega4).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn identity_weight() {
        let w = WeightFunction::power(1.0f64).unwrap();
        assert_eq!(weight_condition_report(&w, WeightCondition::Omega5).unwrap().verdict, Verdict::Fails);
        assert_eq!(weight_condition_report(&w, WeightCondition::Omega2).unwrap().verdict, Verdict::Holds);
        assert_eq!(weight_condition_report(&w, WeightCondition::Omega3).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn gevrey_weight_has_omega6() {
        let m = WeightSequence::gevrey(2.0f64, 2048).unwrap();
        let w = WeightFunction::from_sequence(m).unwrap();
        let rep = weight_condition_report(&w, WeightCondition::Omega6).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{:?}", rep.trace);
    }
}
