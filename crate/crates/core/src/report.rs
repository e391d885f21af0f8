//! Three-valued verdicts and the finite-horizon trend rules behind them.
//!
//! A boundedness or liminf statement cannot be decided from finitely many
//! terms. Every rule below compares the far end of a trace (the last quarter
//! of its range on a log scale) with the part before it, and reports the
//! outcome together with the numbers it used.

use serde::{Deserialize, Serialize};

/// Fraction of the log-range treated as the "far" window.
pub const WINDOW_FRACTION: f64 = 0.25;
/// Relative growth of the running sup tolerated inside the window.
pub const SUP_SLACK: f64 = 0.05;
/// Minimum horizon below which asymptotic verdicts are not attempted.
pub const MIN_HORIZON: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
    pub fn fails(self) -> bool {
        self == Verdict::Fails
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Power-law estimate of a dropped series or integral tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// Growth exponent used for the extrapolation.
    pub exponent: f64,
    /// Bound on the dropped part; `+inf` when divergent.
    pub value: f64,
    pub divergent: bool,
}

impl TailEstimate {
    pub fn divergent(exponent: f64) -> Self {
        Self { exponent, value: f64::INFINITY, divergent: true }
    }
}

/// Outcome of a sequence or weight diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: Verdict,
    /// Defining statistic (sup, liminf estimate, partial sum, ...).
    pub witness: f64,
    /// Per-index (or per-t) trace as `(x, value)`.
    pub trace: Vec<(f64, f64)>,
    pub tail: Option<TailEstimate>,
    /// Least-squares slope of log value against log x over the far window.
    pub slope: Option<f64>,
    pub notes: Vec<String>,
}

impl PropertyReport {
    pub fn new(property: impl Into<String>, verdict: Verdict, witness: f64) -> Self {
        Self {
            property: property.into(),
            verdict,
            witness,
            trace: Vec::new(),
            tail: None,
            slope: None,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, msg: impl Into<String>) -> Self {
        self.notes.push(msg.into());
        self
    }

    /// Trace as CSV with columns `x,value`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in &self.trace {
            out.push_str(&format!("{x},{v}\n"));
        }
        out
    }
}

/// Split of a trace into head and far window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub window_start: f64,
    pub head_max: f64,
    pub head_min: f64,
    pub window_max: f64,
    pub window_min: f64,
    pub slope: f64,
}

/// Index of the first point in the far window.
fn window_start(xs: &[f64]) -> usize {
    let lo = xs.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let hi = xs.last().copied().unwrap_or(1.0).max(lo);
    let cut = lo * (hi / lo).powf(1.0 - WINDOW_FRACTION);
    let idx = xs.iter().position(|&x| x >= cut).unwrap_or(xs.len());
    idx.clamp(1, xs.len().saturating_sub(1).max(1))
}

/// Least-squares slope of `ln y` against `ln x` (non-positive `y` are skipped).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

pub fn summarize(trace: &[(f64, f64)]) -> Option<TrendSummary> {
    if trace.len() < 4 {
        return None;
    }
    let xs: Vec<f64> = trace.iter().map(|p| p.0).collect();
    let w = window_start(&xs);
    let (head, win) = trace.split_at(w);
    let fold = |s: &[(f64, f64)], init: f64, f: fn(f64, f64) -> f64| s.iter().fold(init, |a, p| f(a, p.1));
    Some(TrendSummary {
        window_start: xs[w],
        head_max: fold(head, f64::NEG_INFINITY, f64::max),
        head_min: fold(head, f64::INFINITY, f64::min),
        window_max: fold(win, f64::NEG_INFINITY, f64::max),
        window_min: fold(win, f64::INFINITY, f64::min),
        slope: log_log_slope(win),
    })
}

/// Boundedness of a nonnegative trace: the far window may not push the
/// running sup more than [`SUP_SLACK`] above what the head already reached.
pub fn bounded_verdict(trace: &[(f64, f64)]) -> (Verdict, Option<TrendSummary>) {
    let Some(s) = summarize(trace) else {
        return (Verdict::Inconclusive, None);
    };
    if trace.iter().any(|p| !p.1.is_finite()) {
        return (Verdict::Fails, Some(s));
    }
    let v = if s.window_max <= (1.0 + SUP_SLACK) * s.head_max {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    (v, Some(s))
}

/// `liminf > threshold` judged on the far window.
pub fn liminf_above_verdict(trace: &[(f64, f64)], threshold: f64) -> (Verdict, Option<TrendSummary>) {
    let Some(s) = summarize(trace) else {
        return (Verdict::Inconclusive, None);
    };
    let eps = 1e-9 * threshold.abs().max(1.0);
    let v = if s.window_min <= threshold + eps {
        Verdict::Fails
    } else if s.window_min > threshold * (1.0 + SUP_SLACK) || s.window_min >= s.head_min / (1.0 + SUP_SLACK) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    (v, Some(s))
}

/// `value → 0` judged by the far window decaying well below the head.
pub fn vanishing_verdict(trace: &[(f64, f64)]) -> (Verdict, Option<TrendSummary>) {
    let Some(s) = summarize(trace) else {
        return (Verdict::Inconclusive, None);
    };
    let last = trace.last().map(|p| p.1).unwrap_or(f64::NAN);
    let v = if !last.is_finite() {
        Verdict::Fails
    } else if s.slope < -0.05 && last < 0.5 * s.head_max {
        Verdict::Holds
    } else if s.window_max > (1.0 + SUP_SLACK) * s.head_max || s.slope >= 0.0 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    (v, Some(s))
}
