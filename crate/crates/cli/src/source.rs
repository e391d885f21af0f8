//! Compact textual specs for sequences, weights and coefficient lists.

use crate::Usage;
use anyhow::{Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use ultraflat::constructions::{factorial_block_example, recursive_block_example, Variant};
use ultraflat::{SequenceDescriptor, WeightDescriptor, WeightFunction, WeightSequence};

/// `gevrey:R`, `recursive-block:GAMMA:mg|no-mg`, `factorial-block` or `file:PATH`.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceSpec {
    Gevrey(f64),
    RecursiveBlock { gamma: f64, variant: Variant },
    FactorialBlock,
    File(PathBuf),
}

/// `power:S`, `log-power:S`, `file:PATH` (weight descriptor) or any
/// sequence spec, which stands for its associated function.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Power(f64),
    LogPower(f64),
    File(PathBuf),
    Associated(SequenceSpec),
}

/// `unit`, `ones:N`, `factorial:N`, `file:PATH` or a JSON list.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    Unit,
    Ones(usize),
    Factorial(usize),
    List(Vec<f64>),
    File(PathBuf),
}

fn number<T: FromStr>(text: &str, what: &str) -> Result<T, String> {
    text.parse().map_err(|_| format!("cannot read {what} from {text:?}"))
}

pub fn parse_variant(text: &str) -> Result<Variant, String> {
    match text {
        "mg" => Ok(Variant::Mg),
        "no-mg" => Ok(Variant::NoMg),
        other => Err(format!("unknown variant {other:?} (expected mg or no-mg)")),
    }
}

impl FromStr for SequenceSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.splitn(3, ':').collect();
        match parts.as_slice() {
            ["gevrey", r] => Ok(Self::Gevrey(number(r, "the Gevrey order")?)),
            ["recursive-block", g] => Ok(Self::RecursiveBlock { gamma: number(g, "gamma")?, variant: Variant::Mg }),
            ["recursive-block", g, v] => Ok(Self::RecursiveBlock { gamma: number(g, "gamma")?, variant: parse_variant(v)? }),
            ["factorial-block"] => Ok(Self::FactorialBlock),
            ["file", _] | ["file", _, _] => Ok(Self::File(PathBuf::from(&s[5..]))),
            _ => Err(format!("unrecognized sequence spec {s:?}")),
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gevrey(r) => write!(f, "gevrey:{r}"),
            Self::RecursiveBlock { gamma, variant } => write!(f, "recursive-block:{gamma}:{variant}"),
            Self::FactorialBlock => f.write_str("factorial-block"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(v) = s.strip_prefix("power:") {
            return Ok(Self::Power(number(v, "the power")?));
        }
        if let Some(v) = s.strip_prefix("log-power:") {
            return Ok(Self::LogPower(number(v, "the power")?));
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(Self::File(PathBuf::from(p)));
        }
        s.parse::<SequenceSpec>()
            .map(Self::Associated)
            .map_err(|_| format!("unrecognized weight spec {s:?}"))
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power(s) => write!(f, "power:{s}"),
            Self::LogPower(s) => write!(f, "log-power:{s}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
            Self::Associated(seq) => write!(f, "{seq}"),
        }
    }
}

impl FromStr for LambdaSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim_start().starts_with('[') {
            let list: Vec<f64> = serde_json::from_str(s).map_err(|e| format!("λ list: {e}"))?;
            return Ok(Self::List(list));
        }
        match s.split_once(':') {
            None if s == "unit" => Ok(Self::Unit),
            Some(("ones", n)) => Ok(Self::Ones(number(n, "the length")?)),
            Some(("factorial", n)) => Ok(Self::Factorial(number(n, "the length")?)),
            Some(("file", p)) => Ok(Self::File(PathBuf::from(p))),
            _ => Err(format!("unrecognized coefficient spec {s:?}")),
        }
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unit => f.write_str("unit"),
            Self::Ones(n) => write!(f, "ones:{n}"),
            Self::Factorial(n) => write!(f, "factorial:{n}"),
            Self::List(v) => f.write_str(&serde_json::to_string(v).map_err(|_| fmt::Error)?),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())).into())
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_input(path)?;
    serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())).into())
}

/// Hex SHA-256 of an input file, recorded so a report identifies its inputs.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl SequenceSpec {
    /// Files longer than `horizon` are truncated; shorter ones are used as given.
    pub fn build(&self, horizon: usize) -> Result<WeightSequence<f64>> {
        Ok(match self {
            Self::Gevrey(r) => WeightSequence::gevrey(*r, horizon)?,
            Self::RecursiveBlock { gamma, variant } => recursive_block_example(*gamma, *variant, horizon)?.sequence,
            Self::FactorialBlock => factorial_block_example(horizon)?,
            Self::File(path) => {
                let d: SequenceDescriptor = parse_json(path)?;
                let seq = WeightSequence::from_descriptor(&d).with_context(|| format!("{}", path.display()))?;
                if seq.horizon() > horizon {
                    seq.truncate(horizon)?
                } else {
                    seq
                }
            }
        })
    }

    pub fn file(&self) -> Option<&Path> {
        match self {
            Self::File(p) => Some(p),
            _ => None,
        }
    }
}

impl WeightSpec {
    pub fn build(&self, horizon: usize) -> Result<WeightFunction<f64>> {
        Ok(match self {
            Self::Power(s) => WeightFunction::power(*s)?,
            Self::LogPower(s) => WeightFunction::log_power(*s)?,
            Self::File(path) => {
                let d: WeightDescriptor = parse_json(path)?;
                WeightFunction::from_descriptor(&d).with_context(|| format!("{}", path.display()))?
            }
            Self::Associated(seq) => WeightFunction::from_sequence(seq.build(horizon)?)?,
        })
    }

    pub fn file(&self) -> Option<&Path> {
        match self {
            Self::File(p) => Some(p),
            Self::Associated(seq) => seq.file(),
            _ => None,
        }
    }
}

impl LambdaSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        let list = match self {
            Self::Unit => vec![1.0],
            Self::Ones(n) => vec![1.0; *n],
            Self::Factorial(n) => {
                let mut v = Vec::with_capacity(*n);
                let mut acc = 1.0f64;
                for p in 0..*n {
                    if p > 0 {
                        acc *= p as f64;
                    }
                    v.push(acc);
                }
                v
            }
            Self::List(v) => v.clone(),
            Self::File(path) => parse_json(path)?,
        };
        if list.is_empty() {
            return Err(Usage("the coefficient list is empty".into()).into());
        }
        Ok(list)
    }
}

/// A sequence pair `(M, N)` or a weight pair `(σ, ω)` from `--pair FILE`.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum PairFile {
    Sequences { m: SequenceDescriptor, n: SequenceDescriptor },
    Weights { sigma: WeightDescriptor, omega: WeightDescriptor },
}

pub enum Pair {
    Sequences(WeightSequence<f64>, WeightSequence<f64>),
    Weights(WeightFunction<f64>, WeightFunction<f64>),
}

impl Pair {
    pub fn from_file(path: &Path, horizon: usize) -> Result<Self> {
        Ok(match parse_json::<PairFile>(path)? {
            PairFile::Sequences { m, n } => {
                Self::sequences(WeightSequence::from_descriptor(&m)?, WeightSequence::from_descriptor(&n)?, horizon)?
            }
            PairFile::Weights { sigma, omega } => {
                Self::Weights(WeightFunction::from_descriptor(&sigma)?, WeightFunction::from_descriptor(&omega)?)
            }
        })
    }

    /// Both sequences cut to the shorter horizon (and at most `horizon`).
    pub fn sequences(m: WeightSequence<f64>, n: WeightSequence<f64>, horizon: usize) -> Result<Self> {
        let top = m.horizon().min(n.horizon()).min(horizon);
        Ok(Self::Sequences(m.truncate(top)?, n.truncate(top)?))
    }

    /// Name of the index the pair is measured by.
    pub fn index_name(&self) -> &'static str {
        match self {
            Self::Sequences(..) => "γ(M,N)",
            Self::Weights(..) => "γ(σ,ω)",
        }
    }
}
