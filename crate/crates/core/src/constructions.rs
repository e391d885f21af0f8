//! Descendant and heir constructions, and generators for the block-structured
//! example sequences.

use crate::error::{Error, Result};
use crate::indices::{gamma_mixed_weights, mu_of_weight, weight_gamma_probe, IndexEstimate, WeightGammaProbe};
use crate::properties::{check_property, mixed_gamma_statistic, series_tail, Property};
use crate::report::{bounded_verdict, summarize, PropertyReport, TailEstimate, Verdict};
use crate::scalar::{log_add_exp, Real};
use crate::sequence::{SequenceTransform, WeightSequence};
use crate::weight::WeightFunction;
use serde::{Deserialize, Serialize};

/// The descendant `S^{N,r}` (quotients `σ_k = τ_1 k / τ_k`) and `L^{N,r} = (S^{N,r})^r`.
#[derive(Clone, Debug)]
pub struct DescendantResult<T> {
    pub r: f64,
    /// `ln τ_k` for `k = 1..=P` (index 0 unused, set to `ln τ_1`).
    pub log_tau: Vec<T>,
    pub sigma: WeightSequence<T>,
    pub l: WeightSequence<T>,
    /// `max_k σ_k / ν_k^{1/r}`.
    pub constant: f64,
    pub tail: TailEstimate,
    /// Largest share of the modelled tail in any `τ_k`; bounds the relative
    /// error of `σ_k` caused by the tail model.
    pub tail_share: f64,
    pub checks: Vec<PropertyReport>,
}

pub fn descendant<T: Real>(n: &WeightSequence<T>, r: f64) -> Result<DescendantResult<T>> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput("r must be positive".into()));
    }
    if !n.is_log_convex() {
        return Err(Error::Precondition(format!("{} is not log-convex", n.label())));
    }
    let big_p = n.horizon();
    let nu = n.log_quotients();
    let tail = series_tail(nu, r);
    if tail.divergent {
        return Err(Error::Divergent(format!(
            "(nq_{r}) fails for {}: tail growth exponent {:.4} does not exceed r",
            n.label(),
            tail.exponent
        )));
    }
    let rt = T::of(r);
    let log_tail = T::of(tail.value.ln());
    // suffix[k] = ln(Σ_{j ≥ k} ν_j^{-1/r}) including the tail.
    let mut suffix = vec![log_tail; big_p + 2];
    for k in (1..=big_p).rev() {
        suffix[k] = log_add_exp(suffix[k + 1], -nu[k] / rt);
    }
    let mut log_tau = vec![T::zero(); big_p + 1];
    let mut tail_share = 0.0f64;
    for k in 1..=big_p {
        log_tau[k] = log_add_exp(T::of_usize(k).ln() - nu[k] / rt, suffix[k]);
        tail_share = tail_share.max((log_tail - log_tau[k]).f64().exp());
    }
    log_tau[0] = log_tau[1];
    let mut q = vec![T::zero(); big_p + 1];
    for k in 1..=big_p {
        q[k] = log_tau[1] + T::of_usize(k).ln() - log_tau[k];
    }
    q[1] = T::zero();
    let sigma = WeightSequence::from_log_quotients(q, format!("descendant({}, r={r})", n.label()))?;
    if !sigma.is_strongly_log_convex() || !sigma.is_log_convex() {
        return Err(Error::Invariant(format!("descendant of {} is not strongly log-convex", n.label())));
    }
    let l = sigma.transform(SequenceTransform::Power(rt))?.with_label(format!("L({}, r={r})", n.label()));
    let constant = (1..=big_p)
        .map(|k| (sigma.log_quotient(k) - nu[k] / rt).f64())
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();

    let mut checks = Vec::new();
    let min_sigma = (1..=big_p).map(|k| sigma.log_quotient(k).f64()).fold(f64::INFINITY, f64::min).exp();
    checks.push(
        PropertyReport::new("sigma_at_least_one", if min_sigma >= 1.0 { Verdict::Holds } else { Verdict::Fails }, min_sigma)
            .note("σ_k ≥ 1 and strong log-convexity (asserted)"),
    );
    checks.push(
        PropertyReport::new("sigma_le_C_nu_root", if constant.is_finite() { Verdict::Holds } else { Verdict::Fails }, constant)
            .note("C = max σ_k / ν_k^(1/r)"),
    );
    let root = n.transform(SequenceTransform::Power(T::one() / rt))?;
    let mixed = mixed_gamma_statistic(&sigma, &root, 1.0)?;
    checks.push(PropertyReport { property: "mixed_gamma_1(S, N^(1/r))".into(), ..mixed.report });
    checks.push(check_property(&sigma, Property::ModerateGrowth)?);
    Ok(DescendantResult { r, log_tau, sigma, l, constant, tail, tail_share, checks })
}

/// The two statistics characterizing (mg) of the descendant of `N` (at `r = 1`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescendantMgCheck {
    /// `(ν_{2k}/ν_k) / (1 + (ν_{2k}/2k) Σ_{j≥2k} 1/ν_j)`, bounded iff the criterion holds; witness is the fitted `C`.
    pub criterion: PropertyReport,
    /// `(ν_k/k) Σ_{j≥2k} 1/ν_j`, liminf positive.
    pub alternative: PropertyReport,
    pub descendant_mg: PropertyReport,
    /// The criterion verdict agrees with (mg) of the computed descendant.
    pub consistent: bool,
}

pub fn descendant_mg_check<T: Real>(n: &WeightSequence<T>) -> Result<DescendantMgCheck> {
    let big_p = n.horizon();
    if big_p < 32 {
        return Err(Error::InvalidInput("horizon too small for 2k indexing".into()));
    }
    let nu = n.log_quotients();
    let tail = series_tail(nu, 1.0);
    if tail.divergent {
        return Err(Error::Divergent(format!("(nq) fails for {}", n.label())));
    }
    let mut suffix = vec![tail.value.ln(); big_p + 2];
    for k in (1..=big_p).rev() {
        suffix[k] = log_add_exp(suffix[k + 1], -nu[k].f64());
    }
    let half = big_p / 2;
    let mut a = Vec::with_capacity(half);
    let mut b = Vec::with_capacity(half);
    for k in 1..=half {
        let (lk, l2k) = (nu[k].f64(), nu[2 * k].f64());
        let x = (l2k - ((2 * k) as f64).ln() + suffix[2 * k]).exp();
        a.push((k as f64, (l2k - lk).exp() / (1.0 + x)));
        b.push((k as f64, (lk - (k as f64).ln() + suffix[2 * k]).exp()));
    }
    let (va, _) = bounded_verdict(&a);
    let fitted_c = a.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut criterion = PropertyReport::new("descendant_mg_criterion", va, fitted_c);
    criterion.trace = a;
    criterion.tail = Some(tail);

    let s = summarize(&b);
    let (vb, wb) = match s {
        Some(s) if s.window_min > 0.0 && s.window_min >= 0.5 * s.head_min => (Verdict::Holds, s.window_min),
        Some(s) if s.window_min < 0.1 * s.head_min => (Verdict::Fails, s.window_min),
        Some(s) => (Verdict::Inconclusive, s.window_min),
        None => (Verdict::Inconclusive, f64::NAN),
    };
    let mut alternative = PropertyReport::new("descendant_mg_liminf", vb, wb)
        .note("liminf estimated as the far-window minimum; holds if it stays above half the head minimum");
    alternative.trace = b;
    alternative.tail = Some(tail);

    let d = descendant(n, 1.0)?;
    let descendant_mg = check_property(&d.sigma, Property::ModerateGrowth)?;
    let consistent = criterion.verdict == descendant_mg.verdict;
    Ok(DescendantMgCheck { criterion, alternative, descendant_mg, consistent })
}

/// Certificate attached to a heir: the weight-level statistic at the requested
/// `r` and the full index bracket.
#[derive(Clone, Debug)]
pub struct HeirCertificate {
    pub mu_omega: IndexEstimate,
    pub probe: WeightGammaProbe,
    pub bracket: IndexEstimate,
}

/// Normalized heir `σ = κ^{1/r}_{ω^r}` together with its certificate.
pub fn heir_pair_for_sector<T: Real>(w: &WeightFunction<T>, r: f64) -> Result<(WeightFunction<T>, HeirCertificate)> {
    let mu = mu_of_weight(w)?;
    if !(mu.lo > r) {
        return Err(Error::Precondition(format!(
            "heir needs r < μ(ω); μ(ω) bracket is [{:.4}, {:.4}] and r = {r}",
            mu.lo, mu.hi
        )));
    }
    let sigma = w.heir(T::of(r), true)?;
    let probe = weight_gamma_probe(&sigma, w, r)?;
    let bracket = gamma_mixed_weights(&sigma, w)?;
    Ok((sigma, HeirCertificate { mu_omega: mu, probe, bracket }))
}

/// Blocks of the recursive example: `c_n ≤ k < d_n` flat, `d_n ≤ k < c_{n+1}` rising.
#[derive(Clone, Debug)]
pub struct RecursiveBlockExample<T> {
    pub gamma: f64,
    pub variant: Variant,
    pub c: Vec<u64>,
    pub d: Vec<u64>,
    pub sequence: WeightSequence<T>,
    pub checks: Vec<PropertyReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Mg,
    NoMg,
}

impl Variant {
    /// `(α, β)` for the variant.
    pub fn exponents(self, gamma: f64) -> (f64, f64) {
        match self {
            Variant::Mg => (2.0 * gamma - 1.0, 2.0 * gamma),
            Variant::NoMg => (2.0 * gamma, 2.0 * gamma + 1.0),
        }
    }
    /// Upper exponent `u` with `μ_k ≤ k^u`.
    fn upper_exponent(self, gamma: f64) -> f64 {
        match self {
            Variant::Mg => gamma * (2.0 * gamma - 1.0),
            Variant::NoMg => 2.0 * gamma * gamma,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Mg => "mg",
            Variant::NoMg => "no-mg",
        })
    }
}

/// Rational approximation `p/q` with `q ≤ 64`, if `x` is one to 1e-12.
fn as_rational(x: f64) -> Option<(u32, u32)> {
    (1..=64u32).find_map(|q| {
        let p = (x * q as f64).round();
        ((x * q as f64 - p).abs() < 1e-12 * q as f64 && p >= 0.0).then_some((p as u32, q))
    })
}

/// `⌊n^e⌋`, exact whenever `e` is a small rational and `n^p` fits in 128 bits.
pub fn floor_pow(n: u64, e: f64) -> u64 {
    let approx = (n as f64).powf(e).floor();
    let Some((p, q)) = as_rational(e) else {
        return approx as u64;
    };
    let Some(target) = (n as u128).checked_pow(p) else {
        return approx as u64;
    };
    let le = |m: u64| (m as u128).checked_pow(q).map_or(false, |v| v <= target);
    let mut m = approx as u64;
    while m > 0 && !le(m) {
        m -= 1;
    }
    while le(m + 1) {
        m += 1;
    }
    m
}

/// Block boundaries covering `1..=horizon`.
fn recursive_blocks(gamma: f64, alpha: f64, horizon: usize) -> (Vec<u64>, Vec<u64>) {
    let mut c = vec![1u64];
    let mut d = Vec::new();
    loop {
        let cn = *c.last().unwrap();
        let dn = floor_pow(cn, alpha / gamma) + 1;
        d.push(dn);
        if dn as usize > horizon {
            break;
        }
        let next = floor_pow(dn, gamma) + 1;
        c.push(next);
        if next as usize > horizon {
            break;
        }
    }
    (c, d)
}

pub fn recursive_block_example<T: Real>(gamma: f64, variant: Variant, horizon: usize) -> Result<RecursiveBlockExample<T>> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidInput("gamma must exceed 1".into()));
    }
    let (alpha, beta) = variant.exponents(gamma);
    let (c, d) = recursive_blocks(gamma, alpha, horizon);
    let mut q = vec![T::zero(); horizon + 1];
    for (n, &cn) in c.iter().enumerate() {
        if cn as usize > horizon {
            break;
        }
        let dn = d[n];
        let flat = T::of(alpha) * T::of((cn as f64).ln());
        for k in (cn as usize)..(dn as usize).min(horizon + 1) {
            q[k] = flat;
        }
        let end = c.get(n + 1).map_or(horizon + 1, |&x| (x as usize).min(horizon + 1));
        let shift = T::of(gamma) * T::of((dn as f64).ln());
        for k in (dn as usize)..end {
            q[k] = T::of(beta) * T::of_usize(k).ln() - shift;
        }
    }
    let seq = WeightSequence::from_log_quotients(q, format!("recursive-block(gamma={gamma}, {variant})"))?;

    let lower_ok = (1..=horizon).all(|k| seq.log_quotient(k).f64() >= gamma * (k as f64).ln() - 1e-9);
    let upper = variant.upper_exponent(gamma);
    let upper_ok = (1..=horizon).all(|k| seq.log_quotient(k).f64() <= upper * (k as f64).ln() + 1e-9);
    let checks = vec![
        PropertyReport::new("mu_k >= k^gamma", if lower_ok { Verdict::Holds } else { Verdict::Fails }, gamma),
        PropertyReport::new("mu_k <= k^upper", if upper_ok { Verdict::Holds } else { Verdict::Fails }, upper),
        check_property(&seq, Property::Beta3(2))?,
        check_property(&seq, Property::ModerateGrowth)?,
    ];
    Ok(RecursiveBlockExample { gamma, variant, c, d, sequence: seq, checks })
}

/// `ν_0 = 1`, `ν_k = 2^p p! p` for `p! ≤ k < (p+1)!`.
pub fn factorial_block_example<T: Real>(horizon: usize) -> Result<WeightSequence<T>> {
    let mut q = vec![T::zero(); horizon + 1];
    let mut fact: u64 = 1; // p!
    let mut p: u64 = 1;
    while (fact as usize) <= horizon {
        let next = fact.checked_mul(p + 1).ok_or_else(|| Error::InvalidInput("horizon too large".into()))?;
        let lf = (1..=p).map(|i| (i as f64).ln()).sum::<f64>();
        let val = T::of(p as f64 * std::f64::consts::LN_2 + lf + (p as f64).ln());
        for k in (fact as usize)..(next as usize).min(horizon + 1) {
            q[k] = val;
        }
        fact = next;
        p += 1;
    }
    WeightSequence::from_log_quotients(q, "factorial-block")
}

/// A pair `(M, N)` of recursive examples with exponents `γ' < γ`.
#[derive(Clone, Debug)]
pub struct MixedPair<T> {
    pub m: RecursiveBlockExample<T>,
    pub n: RecursiveBlockExample<T>,
    /// Left side of the admissibility constraint (must not exceed `γ`).
    pub constraint: f64,
    pub diagnostics: Vec<PropertyReport>,
}

pub fn mixed_pair_example<T: Real>(gamma_prime: f64, gamma: f64, variant: Variant, horizon: usize) -> Result<MixedPair<T>> {
    if !(1.0 < gamma_prime && gamma_prime < gamma) {
        return Err(Error::InvalidInput(format!("need 1 < γ' < γ, got γ' = {gamma_prime}, γ = {gamma}")));
    }
    let constraint = match variant {
        Variant::Mg => gamma_prime * (2.0 * gamma_prime - 1.0),
        Variant::NoMg => 2.0 * gamma_prime * gamma_prime,
    };
    if constraint > gamma {
        return Err(Error::Precondition(format!("constraint violated: {constraint:.4} > γ = {gamma}")));
    }
    let m = recursive_block_example::<T>(gamma_prime, variant, horizon)?;
    let n = recursive_block_example::<T>(gamma, variant, horizon)?;
    let worst = (1..=horizon)
        .map(|p| (m.sequence.log_quotient(p) - n.sequence.log_quotient(p)).f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut diagnostics = vec![PropertyReport::new(
        "mu_p <= nu_p",
        if worst <= 1e-12 { Verdict::Holds } else { Verdict::Fails },
        worst.exp(),
    )];
    for frac in [0.25, 0.5, 0.75] {
        let r = frac * gamma;
        let s = mixed_gamma_statistic(&m.sequence, &n.sequence, r)?;
        diagnostics.push(PropertyReport { property: format!("mixed_gamma_{r}"), ..s.report });
    }
    diagnostics.push(PropertyReport { property: "beta3(M)".into(), ..check_property(&m.sequence, Property::Beta3(2))? });
    diagnostics.push(PropertyReport { property: "beta3(N)".into(), ..check_property(&n.sequence, Property::Beta3(2))? });
    Ok(MixedPair { m, n, constraint, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_floor_powers() {
        assert_eq!(floor_pow(145, 1.5), 1746);
        assert_eq!(floor_pow(4, 1.5), 8);
        assert_eq!(floor_pow(1747, 2.0), 3_052_009);
        assert_eq!(floor_pow(41, 7.0 / 6.0), 76);
    }

    #[test]
    fn recursive_blocks_gamma_two() {
        let ex = recursive_block_example::<f64>(2.0, Variant::Mg, 4096).unwrap();
        assert_eq!(&ex.c[..3], &[1, 5, 145]);
        assert_eq!(&ex.d[..3], &[2, 12, 1747]);
        let mu = |k: usize| ex.sequence.log_quotient(k).exp();
        assert!((mu(1) - 1.0).abs() < 1e-12);
        assert!((mu(2) - 4.0).abs() < 1e-12);
        assert!((mu(3) - 20.25).abs() < 1e-12);
        assert!((mu(4) - 64.0).abs() < 1e-12);
        assert!((mu(5) - 125.0).abs() < 1e-9 && (mu(11) - 125.0).abs() < 1e-9);
        assert!(ex.sequence.is_log_convex());
    }

    #[test]
    fn recursive_blocks_small_gamma() {
        let ex = recursive_block_example::<f64>(1.2, Variant::Mg, 4096).unwrap();
        assert_eq!(&ex.c[..7], &[1, 3, 6, 14, 41, 184, 1483]);
        assert_eq!(&ex.d[..6], &[2, 4, 9, 22, 77, 439]);
    }

    #[test]
    fn factorial_block_values() {
        let n = factorial_block_example::<f64>(200).unwrap();
        assert!((n.log_quotient(1).exp() - 2.0).abs() < 1e-12);
        for k in 2..=5 {
            assert!((n.log_quotient(k).exp() - 16.0).abs() < 1e-12);
        }
        assert!((n.log_quotient(6).exp() - 144.0).abs() < 1e-9);
    }

    #[test]
    fn descendant_basics() {
        let n = WeightSequence::<f64>::gevrey(2.0, 1024).unwrap();
        let d = descendant(&n, 1.0).unwrap();
        assert_eq!(d.sigma.log_quotient(0), 0.0);
        assert_eq!(d.sigma.log_quotient(1), 0.0);
        assert!(d.constant.is_finite());
        assert!((1..=1024).all(|k| d.l.log_quotient(k) >= (k as f64).ln() - 1e-12));
    }

    #[test]
    fn mixed_pair_constraint() {
        let e = mixed_pair_example::<f64>(1.5, 2.0, Variant::Mg, 256).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        let p = mixed_pair_example::<f64>(1.2, 2.0, Variant::Mg, 256).unwrap();
        assert!((p.constraint - 1.68).abs() < 1e-12);
        assert!(p.diagnostics[0].verdict.holds());
    }
}
