//! Kernel `e_a(z) = z G_a(1/z)`, its moments `m_a(p) = ∫ t^p G_a(1/t) dt`
//! and the fitted bounds on both.

use super::fit::{log_linear_envelope, SandwichCheck, FIT_MARGIN};
use super::flat::FlatFunction;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, CompositeRule, QuadratureConfig};
use crate::sequence::WeightSequence;
use crate::weight::log_h_from_sequence;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const INITIAL_PANELS: usize = 48;
const MAX_PANELS: usize = 1536;
/// Integrand values this far (in log) below the peak of the highest moment
/// end the scan for the upper integration limit.
const UPPER_DROP: f64 = 60.0;

/// `ln m_a(p)` for `p = 0..=depth` with relative error estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub log_moments: Vec<f64>,
    pub rel_errors: Vec<f64>,
    /// Integration range in `y = ln t`.
    pub y_range: (f64, f64),
    pub panels: usize,
    /// First `p` whose integral did not converge, if the table was cut short.
    pub truncated_at: Option<usize>,
}

impl MomentTable {
    /// All moments from one composite rule in `y = ln t`, sharing the
    /// samples of `ln G_a(e^{−y})`; panels double until every entry meets
    /// `rel_tol`.
    pub fn compute(flat: &FlatFunction, depth: usize, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidInput("moment tolerance must be positive".into()));
        }
        let lg = |y: f64| -> Result<f64> { Ok(flat.log_value(Complex64::new((-y).exp(), 0.0))?.re) };
        let top = (depth + 1) as f64;

        let mut y_hi = 0.0;
        let mut best = f64::NEG_INFINITY;
        loop {
            let v = top * y_hi + lg(y_hi)?;
            best = best.max(v);
            if v < best - UPPER_DROP {
                break;
            }
            y_hi += 1.0;
            if y_hi > 700.0 {
                return Err(Error::Quadrature("moment integrand does not decay".into()));
            }
        }
        // G ≤ 1 bounds the dropped head by e^{(p+1) y_lo}/(p+1).
        let mut y_lo = -45.0;
        let mut panels = INITIAL_PANELS;
        loop {
            let rule = CompositeRule::new(y_lo, y_hi, panels);
            let logs = rule.nodes.iter().map(|&y| lg(y)).collect::<Result<Vec<f64>>>()?;
            let mut log_moments = Vec::with_capacity(depth + 1);
            let mut rel_errors = Vec::with_capacity(depth + 1);
            let mut head_ok = true;
            for p in 0..=depth {
                let k = (p + 1) as f64;
                let peak = rule.nodes.iter().zip(&logs).map(|(y, l)| k * y + l).fold(f64::NEG_INFINITY, f64::max);
                let scaled: Vec<f64> = rule.nodes.iter().zip(&logs).map(|(y, l)| (k * y + l - peak).exp()).collect();
                let (value, err) = rule.apply(&scaled);
                let lm = peak + value.ln();
                let head = k * y_lo - k.ln() - lm;
                head_ok &= head < rel_tol.ln();
                log_moments.push(lm);
                rel_errors.push(err / value + head.exp());
            }
            if !head_ok {
                y_lo -= 20.0;
                continue;
            }
            let first_bad = rel_errors.iter().position(|e| !(*e <= rel_tol));
            if first_bad.is_none() || panels >= MAX_PANELS {
                if let Some(p) = first_bad {
                    log_moments.truncate(p);
                    rel_errors.truncate(p);
                }
                return Ok(Self { log_moments, rel_errors, y_range: (y_lo, y_hi), panels, truncated_at: first_bad });
            }
            panels *= 2;
        }
    }

    pub fn depth(&self) -> usize {
        self.log_moments.len().saturating_sub(1)
    }

    pub fn log_moment(&self, p: usize) -> Option<f64> {
        self.log_moments.get(p).copied()
    }

    /// Smallest second difference of `ln m_a(p)`.
    pub fn min_second_difference(&self) -> f64 {
        self.log_moments.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min)
    }

    pub fn is_log_convex(&self, tol: f64) -> bool {
        self.log_moments.len() < 3 || self.min_second_difference() >= -tol
    }
}

/// Single moment by adaptive quadrature on `t ≤ 1` and `t ≥ 1` separately;
/// an independent route for [`MomentTable::compute`].
pub fn moment_adaptive(flat: &FlatFunction, p: usize, cfg: &QuadratureConfig<f64>) -> Result<(f64, f64)> {
    let k = (p + 1) as f64;
    let lg = |y: f64| flat.log_value(Complex64::new((-y).exp(), 0.0)).map(|v| v.re).unwrap_or(f64::NEG_INFINITY);
    // Scale by the value at the peak of the integrand, located on a coarse grid.
    let peak_y = (-60..=200).map(|j| j as f64 * 0.25).fold((0.0, f64::NEG_INFINITY), |acc, y| {
        let v = k * y + lg(y);
        if v > acc.1 {
            (y, v)
        } else {
            acc
        }
    });
    let (y0, shift) = peak_y;
    let f = |y: f64| (k * y + lg(y) - shift).exp();
    // The break at 0 splits the integral at t = 1.
    let mut breaks = vec![y0 - 60.0, y0 - 10.0, y0, y0 + 5.0, y0 + 20.0, y0 + 60.0, 0.0];
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_panels(f, &breaks, cfg);
    if !r.converged {
        return Err(Error::Quadrature(format!("moment {p} did not converge")));
    }
    Ok((shift + r.value.ln(), r.error / r.value))
}

/// `C_1 (K_2/2)^p S_p ≤ m_a(p) ≤ C_2 K_3^p W_p`, calibrated on even `p` and
/// asserted on odd `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBounds {
    pub c1: f64,
    pub k2: f64,
    pub c2: f64,
    pub k3: f64,
    pub lower: SandwichCheck,
    pub upper: SandwichCheck,
}

impl MomentBounds {
    pub fn pass(&self) -> bool {
        self.lower.pass && self.upper.pass
    }
}

/// Fits both moment envelopes over `p ≤ p_max` (at most the table depth).
/// `lower_row` is `S^{1/(2a)}`, `upper_row` is `W^{4/a}`.
pub fn fit_moment_bounds(
    table: &MomentTable,
    lower_row: &WeightSequence<f64>,
    upper_row: &WeightSequence<f64>,
    p_max: usize,
) -> Result<MomentBounds> {
    let top = p_max.min(table.depth()).min(lower_row.horizon()).min(upper_row.horizon());
    if top < 3 {
        return Err(Error::InvalidInput("need at least four moments to fit envelopes".into()));
    }
    let ps: Vec<usize> = (0..=top).collect();
    let ratio = |row: &WeightSequence<f64>, p: usize| table.log_moments[p] - row.log_value(p);
    let split = |row: &WeightSequence<f64>| {
        let (even, odd): (Vec<usize>, Vec<usize>) = ps.iter().partition(|p| *p % 2 == 0);
        let xs: Vec<f64> = even.iter().map(|&p| p as f64).collect();
        let ys: Vec<f64> = even.iter().map(|&p| ratio(row, p)).collect();
        (xs, ys, odd)
    };

    let (xs, ys, odd) = split(lower_row);
    let (alpha, beta) = log_linear_envelope(&xs, &ys, true);
    let slacks: Vec<f64> = odd.iter().map(|&p| ratio(lower_row, p) - (alpha + beta * p as f64)).collect();
    let (c1, k2) = (alpha.exp(), 2.0 * beta.exp());
    let lower = SandwichCheck::from_slacks(
        "moment lower",
        vec![("C1".into(), c1), ("K2".into(), k2)],
        xs.len(),
        &slacks,
    );

    let (xs, ys, odd) = split(upper_row);
    let (alpha, beta) = log_linear_envelope(&xs, &ys, false);
    let slacks: Vec<f64> = odd.iter().map(|&p| alpha + beta * p as f64 - ratio(upper_row, p)).collect();
    let (c2, k3) = (alpha.exp(), beta.exp());
    let upper = SandwichCheck::from_slacks(
        "moment upper",
        vec![("C2".into(), c2), ("K3".into(), k3)],
        xs.len(),
        &slacks,
    );
    Ok(MomentBounds { c1, k2, c2, k3, lower, upper })
}

/// `|e_a(z)| ≤ C h_W(K/|z|)` with `K` given and `C` fitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundCheck {
    pub k: f64,
    pub check: SandwichCheck,
    /// `|e_a(z)| ≤ C K^p W_p / |z|^p` at the listed `p`, on the held-out grid.
    pub power_bounds: Vec<(usize, bool)>,
    /// Largest `|Im e_a(ξ)|/|e_a(ξ)|` over the real sample radii.
    pub real_axis_imag: f64,
}

impl KernelBoundCheck {
    pub fn pass(&self) -> bool {
        self.check.pass && self.power_bounds.iter().all(|b| b.1)
    }
}

pub fn kernel_bound_check(
    flat: &FlatFunction,
    row: &WeightSequence<f64>,
    k: f64,
    calibration: &[Complex64],
    holdout: &[Complex64],
    powers: &[usize],
) -> Result<KernelBoundCheck> {
    let logs = |pts: &[Complex64]| -> Result<Vec<(f64, f64)>> {
        pts.iter().map(|&z| Ok((z.norm(), flat.log_kernel(z)?.re))).collect()
    };
    let cal = logs(calibration)?;
    let held = logs(holdout)?;
    let slack = |log_c: f64, r: f64, le: f64| -> Result<f64> { Ok(log_c + log_h_from_sequence(row, k / r)? - le) };
    let need = cal.iter().map(|&(r, le)| slack(0.0, r, le).map(|s| -s)).collect::<Result<Vec<f64>>>()?;
    let log_c = need.iter().copied().fold(f64::NEG_INFINITY, f64::max) + FIT_MARGIN.ln();
    let c = log_c.exp();
    let slacks = held.iter().map(|&(r, le)| slack(log_c, r, le)).collect::<Result<Vec<f64>>>()?;
    let check = SandwichCheck::from_slacks("kernel", vec![("C".into(), c), ("K".into(), k)], cal.len(), &slacks);
    let mut power_bounds = Vec::new();
    for &p in powers {
        if p > row.horizon() {
            return Err(Error::InvalidInput(format!("row is shorter than p = {p}")));
        }
        let ok = held
            .iter()
            .all(|&(r, le)| le <= log_c + p as f64 * k.ln() + row.log_value(p) - p as f64 * r.ln());
        power_bounds.push((p, ok));
    }
    let mut real_axis_imag: f64 = 0.0;
    for &(r, _) in cal.iter().chain(&held) {
        let e = flat.kernel(Complex64::new(r, 0.0))?;
        if e.norm() > 0.0 {
            real_axis_imag = real_axis_imag.max(e.im.abs() / e.norm());
        }
    }
    Ok(KernelBoundCheck { k, check, power_bounds, real_axis_imag })
}

/// `∫_0^{t_0} t^{−1} sup_τ |e_a(t e^{iτ})| dt` truncated at `t_0 e^{−L}` for
/// two depths `L`; convergence shows as agreement between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelIntegrability {
    pub t0: f64,
    pub shallow: f64,
    pub deep: f64,
    pub rel_change: f64,
    pub pass: bool,
}

pub fn kernel_integrability(flat: &FlatFunction, t0: f64, args: &[f64], cfg: &QuadratureConfig<f64>) -> Result<KernelIntegrability> {
    if args.is_empty() {
        return Err(Error::InvalidInput("need at least one argument".into()));
    }
    let sup = |y: f64| -> f64 {
        args.iter()
            .map(|&tau| flat.log_kernel(Complex64::from_polar(t0 * y.exp(), tau)).map(|v| v.re.exp()).unwrap_or(f64::NAN))
            .fold(0.0, f64::max)
    };
    let run = |depth: f64| {
        let breaks: Vec<f64> = (0..=(depth as usize / 5)).rev().map(|j| -(j as f64) * 5.0).collect();
        integrate_panels(sup, &breaks, cfg)
    };
    let shallow = run(20.0);
    let deep = run(40.0);
    let rel_change = (deep.value - shallow.value).abs() / deep.value.abs();
    let pass = shallow.converged && deep.converged && deep.value.is_finite() && rel_change < 1e-6;
    Ok(KernelIntegrability { t0, shallow: shallow.value, deep: deep.value, rel_change, pass })
}

#[cfg(test)]
mod tests {
    use super::super::operator::fixture::smoke;
    use super::*;
    use crate::scalar::ln_factorials;

    #[test]
    fn table_matches_adaptive_route() {
        let res = smoke();
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        for p in [0, 3, 10, 25] {
            let (lm, _) = moment_adaptive(&res.flat, p, &cfg).unwrap();
            assert!((lm - res.moments.log_moments[p]).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn moments_are_positive_and_log_convex() {
        let t = &smoke().moments;
        assert!(t.truncated_at.is_none());
        assert!(t.log_moments.iter().all(|v| v.is_finite()));
        assert!(t.is_log_convex(1e-6));
        assert!(t.rel_errors.iter().all(|e| *e < 1e-10));
    }

    #[test]
    fn envelopes_of_a_synthetic_table() {
        // ln m(p) = ln(2 (2p+1)!) − (2p+2) ln 23, the moments of e^{−23√t}.
        let lf: Vec<f64> = ln_factorials(61);
        let log_moments: Vec<f64> =
            (0..=30).map(|p| 2f64.ln() + lf[2 * p + 1] - (2 * p + 2) as f64 * 23f64.ln()).collect();
        let table = MomentTable {
            rel_errors: vec![0.0; log_moments.len()],
            log_moments,
            y_range: (0.0, 0.0),
            panels: 0,
            truncated_at: None,
        };
        let g1 = WeightSequence::gevrey(1.0, 30).unwrap();
        let g2 = WeightSequence::gevrey(2.0, 30).unwrap();
        let b = fit_moment_bounds(&table, &g1, &g2, 20).unwrap();
        assert!(b.pass());
        // (2p+1)!/p!² grows like 4^p: the upper ratio sits just above 4/529.
        assert!(b.k3 > 4.0 / 529.0 && b.k3 < 2.0 * 4.0 / 529.0, "K3 = {}", b.k3);
    }

    #[test]
    fn kernel_is_positive_on_the_ray_and_bounded() {
        let res = smoke();
        let spec = super::super::SectorSpec::new(1.0, 1e-2, 1e3, 13, 3).unwrap();
        let (a, b) = spec.split();
        let check = res.kernel_bound(&a.points(), &b.points(), &[1, 5, 10]).unwrap();
        assert!(check.pass(), "{check:?}");
        assert!(check.real_axis_imag < 1e-12);
        for r in [1e-3, 0.5, 20.0] {
            assert!(res.flat.kernel(Complex64::new(r, 0.0)).unwrap().re > 0.0);
        }
    }

    #[test]
    fn kernel_is_integrable_at_the_origin() {
        let args = [-1.3, 0.0, 1.3];
        let k = kernel_integrability(&smoke().flat, 1.0, &args, &QuadratureConfig::default()).unwrap();
        assert!(k.pass, "{k:?}");
    }
}
