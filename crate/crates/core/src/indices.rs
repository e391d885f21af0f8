//! Estimators for the growth indices `γ(M,N)`, `γ(σ,ω)`, `μ(N)` and `μ(ω)`.
//!
//! Indices are suprema over `r`, so each estimator returns a bracket whose
//! lower end is the last `r` where the defining condition was judged to hold.

use crate::error::{Error, Result};
use crate::properties::{mixed_gamma_statistic, quotient_domination, series_tail};
use crate::quadrature::QuadratureConfig;
use crate::report::{bounded_verdict, Verdict};
use crate::scalar::{geometric_grid, log_add_exp, Real};
use crate::sequence::WeightSequence;
use crate::weight::{weight_condition_report, WeightCondition, WeightFunction};
use serde::{Deserialize, Serialize};

pub const R_MIN: f64 = 0.02;
pub const R_MAX: f64 = 20.0;
pub const RESOLUTION: f64 = 0.02;
pub const MAX_BISECTIONS: usize = 12;
const T_POINTS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexProbe {
    pub r: f64,
    pub verdict: Verdict,
    pub witness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub method: String,
    pub trace: Vec<IndexProbe>,
    /// The condition still held at the top of the search range.
    pub unbounded: bool,
    pub notes: Vec<String>,
}

impl IndexEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn overlaps(&self, other: &IndexEstimate) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Bisection on "condition holds at r" over `[R_MIN, R_MAX]`.
pub fn bisect_index(method: &str, mut probe: impl FnMut(f64) -> Result<(Verdict, f64)>) -> Result<IndexEstimate> {
    let mut trace = Vec::new();
    let mut run = |r: f64, trace: &mut Vec<IndexProbe>| -> Result<Verdict> {
        let (verdict, witness) = probe(r)?;
        trace.push(IndexProbe { r, verdict, witness });
        Ok(verdict)
    };
    let v_lo = run(R_MIN, &mut trace)?;
    if !v_lo.holds() {
        return Ok(IndexEstimate {
            estimate: 0.0,
            lo: 0.0,
            hi: R_MIN,
            method: method.into(),
            unbounded: false,
            notes: vec![format!("condition not satisfied at the grid minimum r = {R_MIN}; index ≈ 0")],
            trace,
        });
    }
    if run(R_MAX, &mut trace)?.holds() {
        return Ok(IndexEstimate {
            estimate: R_MAX,
            lo: R_MAX,
            hi: f64::INFINITY,
            method: method.into(),
            unbounded: true,
            notes: vec![format!("condition holds at the grid maximum r = {R_MAX}; reported as unbounded")],
            trace,
        });
    }
    let (mut lo, mut hi) = (R_MIN, R_MAX);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= RESOLUTION {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if run(mid, &mut trace)?.holds() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(IndexEstimate {
        estimate: 0.5 * (lo + hi),
        lo,
        hi,
        method: method.into(),
        trace,
        unbounded: false,
        notes: vec![],
    })
}

/// `μ(N) = liminf ln ν_p / ln p`, estimated on the last half of the horizon.
pub fn mu_of_sequence<T: Real>(n: &WeightSequence<T>) -> Result<IndexEstimate> {
    if !n.is_log_convex() {
        return Err(Error::Precondition(format!("{} is not log-convex", n.label())));
    }
    let big_p = n.horizon();
    if big_p < 4 {
        return Err(Error::InvalidInput("horizon too small".into()));
    }
    let ratio = |k: usize| n.log_quotient(k).f64() / (k as f64).ln();
    let min_over = |a: usize| (a.max(2)..=big_p).map(ratio).fold(f64::INFINITY, f64::min);
    let mut notes = vec![];
    let (lo, hi) = if big_p < 64 {
        notes.push(format!("horizon {big_p} < 64: bracket spans the whole range"));
        let max = (2..=big_p).map(ratio).fold(f64::NEG_INFINITY, f64::max);
        (min_over(2), max)
    } else {
        (min_over(big_p / 2), min_over(3 * big_p / 4))
    };
    let trace = (2..=big_p)
        .map(|k| IndexProbe { r: k as f64, verdict: Verdict::Inconclusive, witness: ratio(k) })
        .collect();
    Ok(IndexEstimate { estimate: lo, lo, hi, method: "liminf ln ν_p/ln p".into(), trace, unbounded: false, notes })
}

/// `μ(ω) = sup{r : ∫_1^∞ ω(u) u^{-1-1/r} du < ∞}` by bisection.
pub fn mu_of_weight<T: Real>(w: &WeightFunction<T>) -> Result<IndexEstimate> {
    let est = bisect_index("bisection on (omega_nq_r)", |r| {
        let rep = weight_condition_report(w, WeightCondition::NonQuasianalytic(r))?;
        Ok((rep.verdict, rep.witness))
    })?;
    if est.trace.iter().all(|p| p.verdict == Verdict::Inconclusive) {
        return Err(Error::Precondition("all (omega_nq_r) verdicts inconclusive".into()));
    }
    Ok(est)
}

/// `γ(M,N)` by bisection on the mixed statistic.
pub fn gamma_mixed_sequences<T: Real>(m: &WeightSequence<T>, n: &WeightSequence<T>) -> Result<IndexEstimate> {
    if m.horizon() != n.horizon() {
        return Err(Error::InvalidInput("sequences must share the horizon".into()));
    }
    let (c, first) = quotient_domination(m, n);
    if let Some(p) = first {
        return Err(Error::Precondition(format!(
            "μ_p ≤ C ν_p looks violated: ratio leaves its bound first at p = {p} (max ratio {c:.4e})"
        )));
    }
    let mut est = bisect_index("bisection on the mixed gamma statistic", |r| {
        let s = mixed_gamma_statistic(m, n, r)?;
        Ok((s.report.verdict, s.sup))
    })?;
    est.notes.push(format!("C = max μ_p/ν_p = {c:.6}"));
    Ok(est)
}

/// Per-`r` outcome of the weight-level statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightGammaProbe {
    pub r: f64,
    pub verdict: Verdict,
    pub fitted_c: f64,
    /// `(t, I_r(t) / (C (σ(t) + 1)))`.
    pub trace: Vec<(f64, f64)>,
}

/// `I_r(t) = ∫_1^∞ ω(tu) u^{-1-1/r} du` against `C σ(t) + C` on a geometric grid.
pub fn weight_gamma_probe<T: Real>(sigma: &WeightFunction<T>, omega: &WeightFunction<T>, r: f64) -> Result<WeightGammaProbe> {
    let top = sigma.t_grid_max().min(omega.t_grid_max()) / T::of(10.0);
    let grid = geometric_grid(T::one(), top, T_POINTS);
    let cfg = QuadratureConfig::default().with_rel_tol(T::of(1e-9));
    let rt = T::of(r);
    let mut pts = Vec::with_capacity(T_POINTS);
    for &t in &grid {
        let i_r = match omega.dilated_integral(rt, t, &cfg) {
            Ok(j) => j,
            Err(Error::Divergent(_)) => {
                return Ok(WeightGammaProbe { r, verdict: Verdict::Fails, fitted_c: f64::INFINITY, trace: vec![] })
            }
            Err(e) => return Err(e),
        };
        let i_r = i_r.value();
        pts.push((t.f64(), i_r, sigma.eval(t)?.f64() + 1.0));
    }
    let c = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / pts.iter().map(|p| p.2 * p.2).sum::<f64>();
    let trace: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1 / (c * p.2))).collect();
    let (verdict, _) = bounded_verdict(&trace);
    Ok(WeightGammaProbe { r, verdict, fitted_c: c, trace })
}

/// `γ(σ,ω)` by bisection on [`weight_gamma_probe`].
pub fn gamma_mixed_weights<T: Real>(sigma: &WeightFunction<T>, omega: &WeightFunction<T>) -> Result<IndexEstimate> {
    let top = sigma.t_grid_max().min(omega.t_grid_max());
    let grid = geometric_grid(T::one(), top, T_POINTS);
    let mut dom = Vec::new();
    for &t in &grid {
        dom.push((t.f64(), omega.eval(t)?.f64() / (sigma.eval(t)?.f64() + 1.0)));
    }
    if bounded_verdict(&dom).0.fails() {
        return Err(Error::Precondition("ω = O(σ) looks violated on the t-grid".into()));
    }
    bisect_index("bisection on I_r(t) versus C σ(t) + C", |r| {
        let p = weight_gamma_probe(sigma, omega, r)?;
        let sup = p.trace.iter().map(|x| x.1).fold(f64::NAN, f64::max);
        Ok((p.verdict, sup))
    })
}

/// The alternative index built from `λ_{p,s} = sup_{j<p} (M_p / (s^p N_j))^{1/(p−j)}`,
/// estimated with the same bisection harness (condition holds if some
/// `s ∈ {1, 2, 4, 8}` gives a bounded statistic).
pub fn gamma_sv<T: Real>(m: &WeightSequence<T>, n: &WeightSequence<T>) -> Result<IndexEstimate> {
    if m.horizon() != n.horizon() {
        return Err(Error::InvalidInput("sequences must share the horizon".into()));
    }
    let big_p = n.horizon();
    let half = big_p / 2;
    let lam: Vec<Vec<f64>> = [1.0f64, 2.0, 4.0, 8.0]
        .iter()
        .map(|&s| {
            (1..=half)
                .map(|p| {
                    (0..p)
                        .map(|j| (m.log_value(p).f64() - p as f64 * s.ln() - n.log_value(j).f64()) / (p - j) as f64)
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    bisect_index("bisection on the lambda_{p,s} statistic", |r| {
        let tail = series_tail(n.log_quotients(), r);
        if tail.divergent {
            return Ok((Verdict::Inconclusive, f64::INFINITY));
        }
        let mut suffix = vec![f64::NEG_INFINITY; big_p + 2];
        suffix[big_p + 1] = tail.value.ln();
        for k in (1..=big_p).rev() {
            suffix[k] = log_add_exp(suffix[k + 1], -n.log_quotient(k).f64() / r);
        }
        let mut best = (Verdict::Fails, f64::INFINITY);
        for row in &lam {
            let trace: Vec<(f64, f64)> = (1..=half)
                .map(|p| (p as f64, (row[p - 1] / r - (p as f64).ln() + suffix[p]).exp()))
                .collect();
            let (v, _) = bounded_verdict(&trace);
            let sup = trace.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            if v.holds() {
                return Ok((v, sup));
            }
            if sup < best.1 {
                best = (v, sup);
            }
        }
        Ok(best)
    })
}
