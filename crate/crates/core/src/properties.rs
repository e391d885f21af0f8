//! Sequence-level growth predicates and the mixed strong-nonquasianalyticity statistic.

use crate::error::{Error, Result};
use crate::report::{bounded_verdict, liminf_above_verdict, PropertyReport, TailEstimate, Verdict, MIN_HORIZON};
use crate::scalar::{log_add_exp, Real};
use crate::sequence::WeightSequence;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "property", content = "param")]
pub enum Property {
    Normalized,
    LogConvex,
    StronglyLogConvex,
    ModerateGrowth,
    /// `Σ μ_p^{-1/r} < ∞`.
    NonQuasianalytic(f64),
    /// Single-sequence version of the mixed statistic.
    Gamma(f64),
    /// `liminf μ_{Qp}/μ_p > Q`.
    Beta1(usize),
    /// `liminf μ_{Qp}/μ_p > 1`.
    Beta3(usize),
}

impl Property {
    pub fn tag(&self) -> String {
        match self {
            Property::Normalized => "normalized".into(),
            Property::LogConvex => "lc".into(),
            Property::StronglyLogConvex => "slc".into(),
            Property::ModerateGrowth => "mg".into(),
            Property::NonQuasianalytic(r) => format!("nq_{r}"),
            Property::Gamma(r) => format!("gamma_{r}"),
            Property::Beta1(q) => format!("beta1_Q{q}"),
            Property::Beta3(q) => format!("beta3_Q{q}"),
        }
    }
}

/// Lower growth order of the quotients over the last half of the horizon:
/// `min_{P/2 ≤ k ≤ P} ln ν_k / ln k`.
pub fn tail_growth_exponent<T: Real>(log_nu: &[T]) -> f64 {
    let p = log_nu.len() - 1;
    let lo = (p / 2).max(2);
    (lo..=p)
        .map(|k| log_nu[k].f64() / (k as f64).ln())
        .fold(f64::INFINITY, f64::min)
}

/// Bound on `Σ_{k>P} ν_k^{-1/r}` assuming `ν_k ≥ k^e` beyond the horizon.
pub fn series_tail<T: Real>(log_nu: &[T], r: f64) -> TailEstimate {
    let p = (log_nu.len() - 1) as f64;
    let e = tail_growth_exponent(log_nu);
    let ratio = e / r;
    if !(ratio > 1.0) {
        return TailEstimate::divergent(e);
    }
    TailEstimate { exponent: e, value: ((1.0 - ratio) * p.ln()).exp() / (ratio - 1.0), divergent: false }
}

fn too_short(tag: String, horizon: usize) -> PropertyReport {
    PropertyReport::new(tag, Verdict::Inconclusive, f64::NAN)
        .note(format!("horizon {horizon} below {MIN_HORIZON}; asymptotic verdict not attempted"))
}

pub fn check_property<T: Real>(m: &WeightSequence<T>, prop: Property) -> Result<PropertyReport> {
    let n = m.horizon();
    let q = m.log_quotients();
    let tag = prop.tag();
    let horizon_note = format!("decided on p ≤ {n}");
    match prop {
        Property::Normalized => {
            let w = q[1].f64();
            let v = if w >= 0.0 { Verdict::Holds } else { Verdict::Fails };
            Ok(PropertyReport::new(tag, v, w.exp()).note("witness is M_1"))
        }
        Property::LogConvex | Property::StronglyLogConvex => {
            let slc = matches!(prop, Property::StronglyLogConvex);
            let adj = |p: usize| q[p].f64() - if slc { (p as f64).ln() } else { 0.0 };
            let mut rep = PropertyReport::new(tag, Verdict::Holds, f64::INFINITY);
            rep.trace = (1..=n).map(|p| (p as f64, adj(p).exp())).collect();
            let worst = (1..n).map(|p| adj(p + 1) - adj(p)).fold(f64::INFINITY, f64::min);
            rep.witness = worst;
            let ok = if slc { m.is_strongly_log_convex() } else { m.is_log_convex() };
            rep.verdict = if ok { Verdict::Holds } else { Verdict::Fails };
            Ok(rep.note(horizon_note).note("witness is the smallest log-increment of the quotients"))
        }
        Property::ModerateGrowth => {
            if n < MIN_HORIZON {
                return Ok(too_short(tag, n));
            }
            let trace: Vec<(f64, f64)> = (1..=n / 2).map(|p| (p as f64, (q[2 * p] - q[p]).f64().exp())).collect();
            Ok(sup_report(tag, trace).note("statistic μ_{2p}/μ_p"))
        }
        Property::NonQuasianalytic(r) => {
            check_positive(r)?;
            if n < MIN_HORIZON {
                return Ok(too_short(tag, n));
            }
            let mut acc = 0.0;
            let trace: Vec<(f64, f64)> = (1..=n)
                .map(|p| {
                    acc += (-q[p].f64() / r).exp();
                    (p as f64, acc)
                })
                .collect();
            let tail = series_tail(q, r);
            let ratio = tail.exponent / r;
            let verdict = if !tail.divergent {
                Verdict::Holds
            } else if ratio < 0.95 {
                Verdict::Fails
            } else {
                Verdict::Inconclusive
            };
            let mut rep = PropertyReport::new(tag, verdict, acc + tail.value);
            rep.trace = trace;
            rep.tail = Some(tail);
            Ok(rep.note(format!("tail exponent ratio e/r = {ratio:.4}")))
        }
        Property::Gamma(r) => {
            let s = mixed_gamma_statistic(m, m, r)?;
            Ok(PropertyReport { property: tag, ..s.report })
        }
        Property::Beta1(qq) | Property::Beta3(qq) => {
            if qq < 2 {
                return Err(Error::InvalidInput("Q must be an integer ≥ 2".into()));
            }
            if n < MIN_HORIZON.max(4 * qq) {
                return Ok(too_short(tag, n));
            }
            let threshold = if matches!(prop, Property::Beta1(_)) { qq as f64 } else { 1.0 };
            let trace: Vec<(f64, f64)> =
                (1..=n / qq).map(|p| (p as f64, (q[qq * p] - q[p]).f64().exp())).collect();
            let (v, s) = liminf_above_verdict(&trace, threshold);
            let witness = s.map(|s| s.window_min).unwrap_or(f64::NAN);
            let mut rep = PropertyReport::new(tag, v, witness);
            rep.slope = s.map(|s| s.slope);
            rep.trace = trace;
            Ok(rep.note(format!("liminf of μ_(Qp)/μ_p estimated on the far window; threshold {threshold}")))
        }
    }
}

fn check_positive(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("parameter must be positive, got {r}")))
    }
}

fn sup_report(tag: String, trace: Vec<(f64, f64)>) -> PropertyReport {
    let (v, s) = bounded_verdict(&trace);
    let sup = trace.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut rep = PropertyReport::new(tag, v, sup);
    rep.slope = s.map(|s| s.slope);
    rep.trace = trace;
    rep
}

/// Result of the mixed statistic `s_p = μ_p^{1/r}/p · Σ_{k≥p} ν_k^{-1/r}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedGammaStatistic {
    pub r: f64,
    /// `C = max_p μ_p/ν_p` over the common horizon.
    pub constant: f64,
    pub sup: f64,
    pub report: PropertyReport,
}

/// Traces `s_p` for `1 ≤ p ≤ P/2`, tail of the inner series folded in.
pub fn mixed_gamma_statistic<T: Real>(
    m: &WeightSequence<T>,
    n: &WeightSequence<T>,
    r: f64,
) -> Result<MixedGammaStatistic> {
    check_positive(r)?;
    if m.horizon() != n.horizon() {
        return Err(Error::InvalidInput("sequences must share the horizon".into()));
    }
    let big_p = n.horizon();
    let (mu, nu) = (m.log_quotients(), n.log_quotients());
    let constant = (1..=big_p).map(|p| (mu[p] - nu[p]).f64()).fold(f64::NEG_INFINITY, f64::max).exp();
    let tail = series_tail(nu, r);
    let rt = T::of(r);
    let mut suffix = vec![T::neg_infinity(); big_p + 2];
    suffix[big_p + 1] = if tail.divergent { T::neg_infinity() } else { T::of(tail.value.ln()) };
    for k in (1..=big_p).rev() {
        suffix[k] = log_add_exp(suffix[k + 1], -nu[k] / rt);
    }
    let trace: Vec<(f64, f64)> = (1..=big_p / 2)
        .map(|p| {
            let ls = mu[p] / rt - T::of_usize(p).ln() + suffix[p];
            (p as f64, ls.f64().exp())
        })
        .collect();
    let mut report = if big_p < MIN_HORIZON {
        let mut rep = too_short(format!("mixed_gamma_{r}"), big_p);
        rep.trace = trace;
        rep
    } else {
        sup_report(format!("mixed_gamma_{r}"), trace)
    };
    report.tail = Some(tail);
    if tail.divergent {
        report.verdict = Verdict::Inconclusive;
        report.notes.push(format!(
            "tail undefined: quotient growth exponent {:.4} does not exceed r = {r}",
            tail.exponent
        ));
    }
    let sup = report.witness;
    Ok(MixedGammaStatistic { r, constant, sup, report })
}

/// First index where `μ_p/ν_p` leaves the bound the head of the horizon
/// established, if the ratio looks unbounded.
pub fn quotient_domination<T: Real>(m: &WeightSequence<T>, n: &WeightSequence<T>) -> (f64, Option<usize>) {
    let ratio: Vec<(f64, f64)> = (1..=n.horizon().min(m.horizon()))
        .map(|p| (p as f64, (m.log_quotient(p) - n.log_quotient(p)).f64().exp()))
        .collect();
    let c = ratio.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    match bounded_verdict(&ratio) {
        (Verdict::Fails, Some(s)) => {
            let first = ratio.iter().find(|x| x.1 > s.head_max * 1.05).map(|x| x.0 as usize);
            (c, first)
        }
        _ => (c, None),
    }
}

/// Relations between two sequences on a common horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `M_p ≤ N_p`.
    pub le: PropertyReport,
    /// `μ_p ≤ ν_p`.
    pub quotient_le: PropertyReport,
    /// `sup (M_p/N_p)^{1/p} < ∞`.
    pub preceq: PropertyReport,
    /// `M ≼ N` and `N ≼ M`.
    pub equivalent: PropertyReport,
}

pub fn compare_sequences<T: Real>(m: &WeightSequence<T>, n: &WeightSequence<T>) -> Result<ComparisonReport> {
    if m.horizon() != n.horizon() {
        return Err(Error::InvalidInput("sequences must share the horizon".into()));
    }
    let big_p = m.horizon();
    let exact = |tag: &str, diff: &dyn Fn(usize) -> f64| {
        let worst = (1..=big_p).map(diff).fold(f64::NEG_INFINITY, f64::max);
        let v = if worst <= 1e-12 { Verdict::Holds } else { Verdict::Fails };
        let mut rep = PropertyReport::new(tag, v, worst.exp());
        rep.trace = (1..=big_p).map(|p| (p as f64, diff(p).exp())).collect();
        rep.note(format!("decided on p ≤ {big_p}; witness is the largest ratio"))
    };
    let le = exact("le", &|p| (m.log_value(p) - n.log_value(p)).f64());
    let quotient_le = exact("quotient_le", &|p| (m.log_quotient(p) - n.log_quotient(p)).f64());
    let root_trace = |a: &WeightSequence<T>, b: &WeightSequence<T>| -> Vec<(f64, f64)> {
        (1..=big_p)
            .map(|p| (p as f64, ((a.log_value(p) - b.log_value(p)).f64() / p as f64).exp()))
            .collect()
    };
    let preceq = sup_report("preceq".into(), root_trace(m, n));
    let reverse = sup_report("succeq".into(), root_trace(n, m));
    let v = match (preceq.verdict, reverse.verdict) {
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    let mut equivalent = PropertyReport::new("equivalent", v, preceq.witness.max(reverse.witness));
    equivalent.trace = reverse.trace.clone();
    equivalent.notes.push(format!("M ≼ N: {}, N ≼ M: {}", preceq.verdict, reverse.verdict));
    Ok(ComparisonReport { le, quotient_le, preceq, equivalent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(r: f64, p: usize) -> WeightSequence<f64> {
        WeightSequence::gevrey(r, p).unwrap()
    }

    #[test]
    fn gevrey_moderate_growth() {
        let rep = check_property(&g(2.0, 1024), Property::ModerateGrowth).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!((rep.witness - 4.0).abs() < 1e-9);
    }

    #[test]
    fn basel_sum() {
        let rep = check_property(&g(2.0, 1024), Property::NonQuasianalytic(1.0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        // Σ_{p ≤ 1024} p^{-2} plus the integral tail 1/1024 overshoots π²/6 by < 1e-6.
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(rep.witness >= pi2_6 - 1e-12 && rep.witness - pi2_6 < 1e-6, "{}", rep.witness);
    }

    #[test]
    fn nq_power_consistency() {
        for r in [0.5, 1.0, 1.5, 2.5, 4.0] {
            let m = g(2.0, 512);
            let a = check_property(&m, Property::NonQuasianalytic(r)).unwrap();
            let b = check_property(&m.transform(crate::SequenceTransform::Power(1.0 / r)).unwrap(), Property::NonQuasianalytic(1.0))
                .unwrap();
            assert_eq!(a.verdict, b.verdict, "r = {r}");
        }
    }

    #[test]
    fn mixed_statistic_value() {
        let m = g(2.0, 1024);
        let s = mixed_gamma_statistic(&m, &m, 1.0).unwrap();
        // p = 2: (4/2)·Σ_{k≥2} k^{-2} = 2(π²/6 − 1).
        let oracle = 2.0 * (std::f64::consts::PI.powi(2) / 6.0 - 1.0);
        assert!((s.report.trace[1].1 - oracle).abs() < 1e-5);
        assert_eq!(s.report.verdict, Verdict::Holds);
        assert!((s.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_statistic_beyond_order() {
        // At r = 2 the inner series is harmonic: s_1 = H_P, which keeps growing with P.
        let small = mixed_gamma_statistic(&g(2.0, 1024), &g(2.0, 1024), 2.0).unwrap();
        let large = mixed_gamma_statistic(&g(2.0, 2048), &g(2.0, 2048), 2.0).unwrap();
        assert_ne!(large.report.verdict, Verdict::Holds);
        assert!(large.report.tail.unwrap().divergent);
        let harmonic = |n: usize| (1..=n).map(|k| 1.0 / k as f64).sum::<f64>();
        assert!((large.sup - harmonic(2048)).abs() < 1e-9);
        assert!(large.sup - small.sup > 0.69);
    }

    #[test]
    fn comparisons() {
        let (g1, g2) = (g(1.0, 256), g(2.0, 256));
        let c = compare_sequences(&g1, &g1).unwrap();
        assert!(c.le.verdict.holds() && c.quotient_le.verdict.holds() && c.equivalent.verdict.holds());
        let c = compare_sequences(&g1, &g2).unwrap();
        assert!(c.le.verdict.holds() && c.preceq.verdict.holds() && c.equivalent.verdict.fails());
        let q: Vec<f64> = g1.log_quotients().iter().enumerate().map(|(p, x)| if p == 0 { 0.0 } else { x + 2f64.ln() }).collect();
        let scaled = WeightSequence::from_log_quotients(q, "2^p M").unwrap();
        let c = compare_sequences(&g1, &scaled).unwrap();
        assert!(c.equivalent.verdict.holds());
        assert!((c.equivalent.witness - 2.0).abs() < 1e-9);
    }
}
