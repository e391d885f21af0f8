//! Constant fitting: calibrate on one grid, assert on a disjoint one.

use serde::{Deserialize, Serialize};

/// Safety factor applied to every minimal feasible constant.
pub const FIT_MARGIN: f64 = 1.25;

/// Outcome of one fitted inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub name: String,
    pub constants: Vec<(String, f64)>,
    pub calibration_points: usize,
    pub holdout_points: usize,
    pub holdout_violations: usize,
    /// Smallest `rhs − lhs` (log scale) over the held-out grid.
    pub worst_slack: f64,
    pub pass: bool,
}

impl SandwichCheck {
    pub(crate) fn from_slacks(
        name: &str,
        constants: Vec<(String, f64)>,
        calibration_points: usize,
        holdout: &[f64],
    ) -> Self {
        let violations = holdout.iter().filter(|s| !(**s >= 0.0)).count();
        let worst = holdout.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            name: name.into(),
            constants,
            calibration_points,
            holdout_points: holdout.len(),
            holdout_violations: violations,
            worst_slack: worst,
            pass: violations == 0 && !holdout.is_empty(),
        }
    }

    /// A check that could not be calibrated at all.
    pub(crate) fn infeasible(name: &str, calibration_points: usize) -> Self {
        Self {
            name: name.into(),
            constants: vec![],
            calibration_points,
            holdout_points: 0,
            holdout_violations: 0,
            worst_slack: f64::NEG_INFINITY,
            pass: false,
        }
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Smallest `c ∈ [lo, hi]` with `feasible(c)`, for a predicate that is
/// monotone (false below a threshold, true above). Bisection in `ln c`.
pub(crate) fn minimal_feasible(lo: f64, hi: f64, mut feasible: impl FnMut(f64) -> bool) -> Option<f64> {
    if feasible(lo) {
        return Some(lo);
    }
    if !feasible(hi) {
        return None;
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if feasible(m.exp()) {
            b = m;
        } else {
            a = m;
        }
        if b - a < 1e-6 {
            break;
        }
    }
    Some(b.exp())
}

/// Largest `c ∈ [lo, hi]` with `feasible(c)` for a predicate that is true
/// below a threshold.
pub(crate) fn maximal_feasible(lo: f64, hi: f64, mut feasible: impl FnMut(f64) -> bool) -> Option<f64> {
    minimal_feasible(1.0 / hi, 1.0 / lo, |c| feasible(1.0 / c)).map(|c| 1.0 / c)
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Line `α + βx` with the LS slope, shifted so it lies below (`lower`) or
/// above all points, then pushed out by `ln FIT_MARGIN`.
pub(crate) fn log_linear_envelope(xs: &[f64], ys: &[f64], lower: bool) -> (f64, f64) {
    let beta = ls_slope(xs, ys);
    let resid = xs.iter().zip(ys).map(|(x, y)| y - beta * x);
    let alpha = if lower {
        resid.fold(f64::INFINITY, f64::min) - FIT_MARGIN.ln()
    } else {
        resid.fold(f64::NEG_INFINITY, f64::max) + FIT_MARGIN.ln()
    };
    (alpha, beta)
}
