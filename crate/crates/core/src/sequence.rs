//! Finite-horizon weight sequences stored in the log domain.

use crate::error::{Error, Result};
use crate::scalar::{ln_factorials, Real};
use serde::{Deserialize, Serialize};

const FLAG_TOL: f64 = 1e-12;

/// A weight sequence `M_0 = 1, M_1, ..., M_P` kept as `ln M_p` and `ln μ_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence<T> {
    label: String,
    log_values: Vec<T>,
    log_quotients: Vec<T>,
    normalized: bool,
    log_convex: bool,
}

/// Interchange form: `{"label", "horizon", "log_quotients"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDescriptor {
    pub label: String,
    pub horizon: usize,
    pub log_quotients: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SequenceTransform<T> {
    /// `M_p ↦ M_p^ρ`.
    Power(T),
    /// `M_p ↦ p! M_p`.
    Hat,
    /// `M_p ↦ M_p / p!`.
    Unhat,
}

fn tol_le<T: Real>(a: T, b: T) -> bool {
    a <= b + T::of(FLAG_TOL) * (T::one() + a.abs().max(b.abs()))
}

impl<T: Real> WeightSequence<T> {
    /// Builds a sequence from `ln μ_p`, `p = 0..=P`; entry 0 must be 0.
    pub fn from_log_quotients(log_mu: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if log_mu.len() < 2 {
            return Err(Error::InvalidInput("need at least two quotients".into()));
        }
        if let Some(p) = log_mu.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite log quotient at p = {p}")));
        }
        if log_mu[0] != T::zero() {
            return Err(Error::InvalidInput("log quotient at p = 0 must be 0".into()));
        }
        let mut log_values = Vec::with_capacity(log_mu.len());
        let mut acc = T::zero();
        for &q in &log_mu {
            acc = acc + q;
            log_values.push(acc);
        }
        let normalized = log_mu[1] >= T::zero();
        let log_convex = log_mu.windows(2).skip(1).all(|w| tol_le(w[0], w[1]));
        Ok(Self { label: label.into(), log_values, log_quotients: log_mu, normalized, log_convex })
    }

    /// Builds a sequence from `ln M_p`; entry 0 must be 0.
    pub fn from_log_values(log_values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if log_values.first().copied() != Some(T::zero()) {
            return Err(Error::InvalidInput("log M_0 must be 0".into()));
        }
        let mut q = vec![T::zero()];
        q.extend(log_values.windows(2).map(|w| w[1] - w[0]));
        Self::from_log_quotients(q, label)
    }

    /// Gevrey sequence `(p!)^r` up to horizon `P`.
    pub fn gevrey(r: T, horizon: usize) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::InvalidInput("Gevrey order must be positive".into()));
        }
        let mut q = vec![T::zero()];
        q.extend((1..=horizon).map(|p| r * T::of_usize(p).ln()));
        Self::from_log_quotients(q, format!("gevrey({r})"))
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn horizon(&self) -> usize {
        self.log_values.len() - 1
    }
    pub fn log_values(&self) -> &[T] {
        &self.log_values
    }
    pub fn log_quotients(&self) -> &[T] {
        &self.log_quotients
    }
    pub fn log_value(&self, p: usize) -> T {
        self.log_values[p]
    }
    pub fn log_quotient(&self, p: usize) -> T {
        self.log_quotients[p]
    }
    /// `1 = M_0 ≤ M_1`.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
    /// Quotients nondecreasing on `1..=P`.
    pub fn is_log_convex(&self) -> bool {
        self.log_convex
    }
    /// `M_p / p!` log-convex.
    pub fn is_strongly_log_convex(&self) -> bool {
        (1..self.horizon()).all(|p| {
            tol_le(
                self.log_quotients[p] - T::of_usize(p).ln(),
                self.log_quotients[p + 1] - T::of_usize(p + 1).ln(),
            )
        })
    }

    /// `ln μ_P`: the associated function is exact for `ln t` up to this value.
    pub fn log_validity_radius(&self) -> T {
        self.log_quotients[self.horizon()]
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// First `P + 1` terms.
    pub fn truncate(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::InvalidInput(format!("cannot truncate horizon {} to {horizon}", self.horizon())));
        }
        Self::from_log_quotients(self.log_quotients[..=horizon].to_vec(), self.label.clone())
    }

    pub fn transform(&self, mode: SequenceTransform<T>) -> Result<Self> {
        let n = self.horizon();
        let (q, label): (Vec<T>, String) = match mode {
            SequenceTransform::Power(rho) => {
                if !(rho > T::zero()) {
                    return Err(Error::InvalidInput("power must be positive".into()));
                }
                (self.log_quotients.iter().map(|&x| x * rho).collect(), format!("({})^{rho}", self.label))
            }
            SequenceTransform::Hat | SequenceTransform::Unhat => {
                let sign = if matches!(mode, SequenceTransform::Hat) { T::one() } else { -T::one() };
                let mut q = self.log_quotients.clone();
                for (p, x) in q.iter_mut().enumerate().skip(1) {
                    *x = *x + sign * T::of_usize(p).ln();
                }
                let tag = if sign > T::zero() { "hat" } else { "unhat" };
                (q, format!("{tag}({})", self.label))
            }
        };
        debug_assert_eq!(q.len(), n + 1);
        Self::from_log_quotients(q, label)
    }

    /// `ln(M_p / p!)` for `p = 0..=P`.
    pub fn log_small(&self) -> Vec<T> {
        let lf = ln_factorials::<T>(self.horizon());
        self.log_values.iter().zip(lf).map(|(a, b)| *a - b).collect()
    }

    pub fn descriptor(&self) -> SequenceDescriptor {
        SequenceDescriptor {
            label: self.label.clone(),
            horizon: self.horizon(),
            log_quotients: self.log_quotients.iter().map(|x| x.f64()).collect(),
        }
    }

    pub fn from_descriptor(d: &SequenceDescriptor) -> Result<Self> {
        if d.log_quotients.len() != d.horizon + 1 {
            return Err(Error::InvalidInput(format!(
                "descriptor horizon {} does not match {} quotients",
                d.horizon,
                d.log_quotients.len()
            )));
        }
        let q = d
            .log_quotients
            .iter()
            .map(|&x| T::from_f64(x).ok_or_else(|| Error::InvalidInput("quotient not representable".into())))
            .collect::<Result<Vec<T>>>()?;
        Self::from_log_quotients(q, d.label.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence() {
        let m = WeightSequence::<f64>::from_log_quotients(vec![0.0; 40], "one").unwrap();
        assert!(m.log_values().iter().all(|&x| x == 0.0));
        assert!(m.is_log_convex() && m.is_normalized());
    }

    #[test]
    fn gevrey_values() {
        let g2 = WeightSequence::<f64>::gevrey(2.0, 64).unwrap();
        assert!((g2.log_value(3).exp() - 36.0).abs() < 1e-10);
        let g1 = WeightSequence::<f64>::gevrey(1.0, 64).unwrap();
        assert!((g1.log_quotient(7).exp() - 7.0).abs() < 1e-12);
        assert!(g1.is_strongly_log_convex() && !WeightSequence::<f64>::gevrey(0.5, 64).unwrap().is_strongly_log_convex());
    }

    #[test]
    fn transforms() {
        let g1 = WeightSequence::<f64>::gevrey(1.0, 100).unwrap();
        let g2 = WeightSequence::<f64>::gevrey(2.0, 100).unwrap();
        let hat = g1.transform(SequenceTransform::Hat).unwrap();
        let half = g2.transform(SequenceTransform::Power(0.5)).unwrap();
        let back = hat.transform(SequenceTransform::Unhat).unwrap();
        for p in 0..=100 {
            assert!((hat.log_value(p) - g2.log_value(p)).abs() < 1e-9);
            assert!((half.log_value(p) - g1.log_value(p)).abs() < 1e-9);
            assert!((back.log_value(p) - g1.log_value(p)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightSequence::<f64>::from_log_quotients(vec![0.0, f64::NAN], "x").is_err());
        assert!(WeightSequence::<f64>::from_log_quotients(vec![0.0], "x").is_err());
        assert!(WeightSequence::<f64>::from_log_quotients(vec![1.0, 1.0], "x").is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let g = WeightSequence::<f64>::gevrey(1.5, 32).unwrap();
        let json = serde_json::to_string(&g.descriptor()).unwrap();
        let d: SequenceDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(WeightSequence::<f64>::from_descriptor(&d).unwrap(), g);
    }
}
