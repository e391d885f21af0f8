//! Report-style subcommands: sequence, weight, indices, descendant, example, flat.

use crate::config::{RunConfig, SectorGrid};
use crate::emit::{num, Emitter};
use crate::source::{file_digest, Pair};
use crate::{DescendantArgs, ExampleArgs, ExampleCommand, FlatArgs, IndicesArgs, SequenceArgs, WeightArgs};
use anyhow::Result;
use serde::Serialize;
use std::path::PathBuf;
use ultraflat::constructions::{
    descendant as build_descendant, descendant_mg_check, factorial_block_example, recursive_block_example,
    mixed_pair_example, Variant,
};
use ultraflat::extension::{choose_ramification, flat_sandwich, flatness_report, FlatFunction, FlatSandwich, RamificationParams};
use ultraflat::indices::{gamma_mixed_sequences, gamma_mixed_weights, mu_of_sequence, mu_of_weight};
use ultraflat::quadrature::QuadratureConfig;
use ultraflat::weight::{weight_condition_report, WeightCondition};
use ultraflat::{
    check_property, IndexEstimate, Property, PropertyReport, SequenceDescriptor, TailEstimate, Verdict,
    WeightFunction, WeightSequence,
};

pub fn word(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive-at-horizon",
    }
}

/// Prefixes precondition messages with the index they concern.
pub fn cite(index: &str, e: ultraflat::Error) -> ultraflat::Error {
    match e {
        ultraflat::Error::Precondition(m) if !m.starts_with(index) => ultraflat::Error::Precondition(format!("{index}: {m}")),
        other => other,
    }
}

#[derive(Serialize)]
pub struct PropertyEntry {
    pub property: String,
    pub verdict: Verdict,
    pub witness: f64,
    pub slope: Option<f64>,
    pub tail: Option<TailEstimate>,
    pub notes: Vec<String>,
    pub trace: Option<String>,
}

pub fn property_entry(em: &mut Emitter, rep: &PropertyReport) -> Result<PropertyEntry> {
    println!("  {:<32} {:<24} witness {}", rep.property, word(rep.verdict), num(rep.witness));
    Ok(PropertyEntry {
        property: rep.property.clone(),
        verdict: rep.verdict,
        witness: rep.witness,
        slope: rep.slope,
        tail: rep.tail,
        notes: rep.notes.clone(),
        trace: em.pairs(&rep.property, ["x", "value"], &rep.trace)?,
    })
}

#[derive(Serialize)]
pub struct IndexEntry {
    pub index: String,
    pub estimate: f64,
    pub bracket: [f64; 2],
    pub method: String,
    pub unbounded: bool,
    pub notes: Vec<String>,
    pub traces_ref: String,
}

pub fn index_entry(em: &mut Emitter, name: &str, est: &IndexEstimate) -> Result<IndexEntry> {
    println!("  {name:<16} {} in [{}, {}]", num(est.estimate), num(est.lo), num(est.hi));
    let rows = est.trace.iter().map(|p| vec![num(p.r), word(p.verdict).to_string(), num(p.witness)]);
    let traces_ref = em.trace(name, &["r", "verdict", "witness"], rows)?;
    Ok(IndexEntry {
        index: name.into(),
        estimate: est.estimate,
        bracket: [est.lo, est.hi],
        method: est.method.clone(),
        unbounded: est.unbounded,
        notes: est.notes.clone(),
        traces_ref,
    })
}

fn quotient_trace(em: &mut Emitter, name: &str, seq: &WeightSequence<f64>) -> Result<String> {
    let rows = (0..=seq.horizon()).map(|p| vec![p.to_string(), num(seq.log_quotient(p)), num(seq.log_value(p))]);
    em.trace(name, &["p", "ln_mu_p", "ln_M_p"], rows)
}

fn finish<R: Serialize>(em: &mut Emitter, name: &str, pass: bool, result: &R) -> Result<bool> {
    let path = em.report(name, pass, result)?;
    println!("{} {}", if pass { "PASS" } else { "FAIL" }, path.display());
    Ok(pass)
}

#[derive(Serialize)]
struct SequenceResult {
    label: String,
    horizon: usize,
    properties: Vec<PropertyEntry>,
    quotients: String,
}

pub fn sequence(a: SequenceArgs, out: PathBuf) -> Result<bool> {
    let spec = a.input.spec();
    let seq = spec.build(a.input.horizon)?;
    let mut cfg = RunConfig::new("sequence", seq.horizon(), out);
    cfg.input("sequence", spec.to_string()).input("r", a.r).input("q", a.q);
    if let Some(f) = spec.file() {
        cfg.input("file_sha256", file_digest(f)?);
    }
    let mut em = Emitter::new(cfg)?;
    println!("{} (horizon {})", seq.label(), seq.horizon());
    let props = [
        Property::Normalized,
        Property::LogConvex,
        Property::StronglyLogConvex,
        Property::ModerateGrowth,
        Property::NonQuasianalytic(a.r),
        Property::Gamma(a.r),
        Property::Beta1(a.q),
        Property::Beta3(a.q),
    ];
    let mut properties = Vec::new();
    for p in props {
        properties.push(property_entry(&mut em, &check_property(&seq, p)?)?);
    }
    let quotients = quotient_trace(&mut em, "quotients", &seq)?;
    let result = SequenceResult { label: seq.label().into(), horizon: seq.horizon(), properties, quotients };
    finish(&mut em, "sequence", true, &result)
}

#[derive(Serialize)]
struct WeightResult {
    label: String,
    conditions: Vec<PropertyEntry>,
    order: IndexEntry,
}

pub fn weight(a: WeightArgs, out: PathBuf) -> Result<bool> {
    let w = a.weight.build(a.horizon)?;
    let mut cfg = RunConfig::new("weight", a.horizon, out);
    cfg.input("weight", a.weight.to_string()).input("r", a.r);
    if let Some(f) = a.weight.file() {
        cfg.input("file_sha256", file_digest(f)?);
    }
    let mut em = Emitter::new(cfg)?;
    println!("{}", w.label());
    let conditions = [
        WeightCondition::Omega1,
        WeightCondition::Omega2,
        WeightCondition::Omega3,
        WeightCondition::Omega4,
        WeightCondition::Omega5,
        WeightCondition::Omega6,
        WeightCondition::NonQuasianalytic(a.r),
        WeightCondition::StrongNonQuasianalytic,
    ];
    let mut entries = Vec::new();
    for c in conditions {
        entries.push(property_entry(&mut em, &weight_condition_report(&w, c)?)?);
    }
    let order = index_entry(&mut em, "mu_omega", &mu_of_weight(&w)?)?;
    finish(&mut em, "weight", true, &WeightResult { label: w.label().into(), conditions: entries, order })
}

#[derive(Serialize)]
struct IndicesResult {
    m: String,
    n: Option<String>,
    horizon: usize,
    indices: Vec<IndexEntry>,
}

pub fn indices(a: IndicesArgs, out: PathBuf) -> Result<bool> {
    let m = a.m.build(a.horizon)?;
    let n = a.n.as_ref().map(|s| s.build(a.horizon)).transpose()?;
    let (m, n) = match n {
        Some(n) => match Pair::sequences(m, n, a.horizon)? {
            Pair::Sequences(m, n) => (m, Some(n)),
            Pair::Weights(..) => unreachable!(),
        },
        None => (m, None),
    };
    let mut cfg = RunConfig::new("indices", m.horizon(), out);
    cfg.input("m", a.m.to_string()).input("cross_level", a.cross_level);
    if let Some(s) = &a.n {
        cfg.input("n", s.to_string());
    }
    for (i, f) in [a.m.file(), a.n.as_ref().and_then(|s| s.file())].into_iter().flatten().enumerate() {
        cfg.input(&format!("file_sha256_{i}"), file_digest(f)?);
    }
    let mut em = Emitter::new(cfg)?;
    let mut entries = vec![
        index_entry(&mut em, "mu_M", &mu_of_sequence(&m)?)?,
        index_entry(&mut em, "gamma_MM", &gamma_mixed_sequences(&m, &m)?)?,
    ];
    if let Some(n) = &n {
        entries.push(index_entry(&mut em, "mu_N", &mu_of_sequence(n)?)?);
        entries.push(index_entry(&mut em, "gamma_NN", &gamma_mixed_sequences(n, n)?)?);
        let mixed = gamma_mixed_sequences(&m, n).map_err(|e| cite("γ(M,N)", e))?;
        entries.push(index_entry(&mut em, "gamma_MN", &mixed)?);
        if a.cross_level {
            let sigma = WeightFunction::from_sequence(m.clone())?;
            let omega = WeightFunction::from_sequence(n.clone())?;
            let weights = gamma_mixed_weights(&sigma, &omega).map_err(|e| cite("γ(σ,ω)", e))?;
            entries.push(index_entry(&mut em, "gamma_sigma_omega", &weights)?);
        }
    }
    let result = IndicesResult {
        m: m.label().into(),
        n: n.as_ref().map(|n| n.label().to_string()),
        horizon: m.horizon(),
        indices: entries,
    };
    finish(&mut em, "indices", true, &result)
}

#[derive(Serialize)]
struct MgEntry {
    criterion: PropertyEntry,
    alternative: PropertyEntry,
    descendant_mg: PropertyEntry,
    consistent: bool,
}

#[derive(Serialize)]
struct DescendantResult {
    source: String,
    r: f64,
    constant: f64,
    tail: TailEstimate,
    tail_share: f64,
    checks: Vec<PropertyEntry>,
    mg_check: Option<MgEntry>,
    sigma: SequenceDescriptor,
    l: SequenceDescriptor,
    table: String,
}

pub fn descendant(a: DescendantArgs, out: PathBuf) -> Result<bool> {
    let spec = a.input.spec();
    let n = spec.build(a.input.horizon)?;
    let mut cfg = RunConfig::new("descendant", n.horizon(), out);
    cfg.input("sequence", spec.to_string()).input("r", a.r).input("mg_check", a.mg_check);
    if let Some(f) = spec.file() {
        cfg.input("file_sha256", file_digest(f)?);
    }
    let mut em = Emitter::new(cfg)?;
    let d = build_descendant(&n, a.r)?;
    println!("descendant of {} at r = {}: C = {}", n.label(), a.r, num(d.constant));
    let mut pass = true;
    let mut checks = Vec::new();
    for c in &d.checks {
        pass &= c.verdict.holds();
        checks.push(property_entry(&mut em, c)?);
    }
    let mg_check = if a.mg_check {
        let mg = descendant_mg_check(&n)?;
        pass &= mg.consistent;
        Some(MgEntry {
            criterion: property_entry(&mut em, &mg.criterion)?,
            alternative: property_entry(&mut em, &mg.alternative)?,
            descendant_mg: property_entry(&mut em, &mg.descendant_mg)?,
            consistent: mg.consistent,
        })
    } else {
        None
    };
    let rows = (1..=n.horizon()).map(|k| {
        vec![k.to_string(), num(d.log_tau[k]), num(d.sigma.log_quotient(k)), num(d.l.log_quotient(k))]
    });
    let table = em.trace("table", &["k", "ln_tau", "ln_sigma", "ln_lambda"], rows)?;
    let result = DescendantResult {
        source: n.label().into(),
        r: a.r,
        constant: d.constant,
        tail: d.tail,
        tail_share: d.tail_share,
        checks,
        mg_check,
        sigma: d.sigma.descriptor(),
        l: d.l.descriptor(),
        table,
    };
    finish(&mut em, "descendant", pass, &result)
}

#[derive(Serialize)]
struct GeneratedSequence {
    role: String,
    label: String,
    horizon: usize,
    blocks_c: Vec<u64>,
    blocks_d: Vec<u64>,
    descriptor: String,
    quotients: String,
}

#[derive(Serialize)]
struct ExampleResult {
    kind: String,
    constraint: Option<f64>,
    sequences: Vec<GeneratedSequence>,
    checks: Vec<PropertyEntry>,
}

fn generated(em: &mut Emitter, role: &str, seq: &WeightSequence<f64>, c: Vec<u64>, d: Vec<u64>) -> Result<GeneratedSequence> {
    let file = format!("example_{role}.sequence.json");
    let mut text = serde_json::to_string_pretty(&seq.descriptor())?;
    text.push('\n');
    std::fs::write(em.dir().join(&file), text)?;
    let quotients = quotient_trace(em, role, seq)?;
    Ok(GeneratedSequence {
        role: role.into(),
        label: seq.label().into(),
        horizon: seq.horizon(),
        blocks_c: c,
        blocks_d: d,
        descriptor: file,
        quotients,
    })
}

/// Running compensated partial sums of `1/ν_j`.
fn reciprocal_partial_sums(seq: &WeightSequence<f64>) -> Vec<(f64, f64)> {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut out = Vec::with_capacity(seq.horizon());
    for j in 1..=seq.horizon() {
        let term = (-seq.log_quotient(j)).exp();
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        out.push((j as f64, sum + comp));
    }
    out
}

pub fn example(a: ExampleArgs, out: PathBuf) -> Result<bool> {
    match a.kind {
        ExampleCommand::RecursiveBlock { gamma, variant, horizon } => {
            let variant: Variant = variant.into();
            let mut cfg = RunConfig::new("example", horizon, out);
            cfg.input("kind", "recursive-block").input("gamma", gamma).input("variant", variant.to_string());
            let mut em = Emitter::new(cfg)?;
            let ex = recursive_block_example::<f64>(gamma, variant, horizon)?;
            println!("{}: c = {:?}, d = {:?}", ex.sequence.label(), ex.c, ex.d);
            let pass = ex.checks[0].verdict.holds() && ex.checks[1].verdict.holds();
            let checks = ex.checks.iter().map(|c| property_entry(&mut em, c)).collect::<Result<Vec<_>>>()?;
            let seq = generated(&mut em, "M", &ex.sequence, ex.c.clone(), ex.d.clone())?;
            let result = ExampleResult { kind: "recursive-block".into(), constraint: None, sequences: vec![seq], checks };
            finish(&mut em, "example", pass, &result)
        }
        ExampleCommand::FactorialBlock { horizon } => {
            let mut cfg = RunConfig::new("example", horizon, out);
            cfg.input("kind", "factorial-block");
            let mut em = Emitter::new(cfg)?;
            let seq = factorial_block_example::<f64>(horizon)?;
            let sums = reciprocal_partial_sums(&seq);
            let top = sums.iter().map(|p| p.1).fold(0.0, f64::max);
            let mut partial = PropertyReport::new(
                "partial_sums_of_reciprocals",
                if top <= 1.0 { Verdict::Holds } else { Verdict::Fails },
                sums.last().map_or(0.0, |p| p.1),
            )
            .note("Σ_{j≤k} 1/ν_j stays at most 1");
            partial.trace = sums;
            let pass = partial.verdict.holds();
            let mut checks = vec![property_entry(&mut em, &partial)?];
            for p in [Property::ModerateGrowth, Property::NonQuasianalytic(1.0)] {
                checks.push(property_entry(&mut em, &check_property(&seq, p)?)?);
            }
            let generated = generated(&mut em, "N", &seq, vec![], vec![])?;
            let result = ExampleResult { kind: "factorial-block".into(), constraint: None, sequences: vec![generated], checks };
            finish(&mut em, "example", pass, &result)
        }
        ExampleCommand::MixedPair { gamma_prime, gamma, variant, horizon } => {
            let variant: Variant = variant.into();
            let mut cfg = RunConfig::new("example", horizon, out);
            cfg.input("kind", "mixed-pair")
                .input("gamma_prime", gamma_prime)
                .input("gamma", gamma)
                .input("variant", variant.to_string());
            let mut em = Emitter::new(cfg)?;
            let pair = mixed_pair_example::<f64>(gamma_prime, gamma, variant, horizon)?;
            println!("constraint {} <= {gamma}", num(pair.constraint));
            let pass = pair.diagnostics[0].verdict.holds();
            let checks = pair.diagnostics.iter().map(|c| property_entry(&mut em, c)).collect::<Result<Vec<_>>>()?;
            let m = generated(&mut em, "M", &pair.m.sequence, pair.m.c.clone(), pair.m.d.clone())?;
            let n = generated(&mut em, "N", &pair.n.sequence, pair.n.c.clone(), pair.n.d.clone())?;
            let result = ExampleResult {
                kind: "mixed-pair".into(),
                constraint: Some(pair.constraint),
                sequences: vec![m, n],
                checks,
            };
            finish(&mut em, "example", pass, &result)
        }
    }
}

#[derive(Serialize)]
struct FlatnessEntry {
    p: usize,
    decay: f64,
    monotone_tail: bool,
    pass: bool,
    trace: Option<String>,
}

#[derive(Serialize)]
struct FlatResult {
    bracket: IndexEntry,
    params: RamificationParams,
    flatness: Vec<FlatnessEntry>,
    sandwich: FlatSandwich,
    samples: String,
}

const FLAT_R_TOP: f64 = 0.1;
const FLAT_POINTS: usize = 24;

/// The mixed index of a pair, with precondition messages citing it.
pub fn pair_bracket(pair: &Pair) -> Result<IndexEstimate> {
    let est = match pair {
        Pair::Sequences(m, n) => gamma_mixed_sequences(m, n),
        Pair::Weights(s, o) => gamma_mixed_weights(s, o),
    };
    Ok(est.map_err(|e| cite(pair.index_name(), e))?)
}

pub fn flat(a: FlatArgs, out: PathBuf) -> Result<bool> {
    let pair = a.pair.build()?;
    let quad = QuadratureConfig::default().with_rel_tol(a.rel_tol);
    let mut cfg = RunConfig::new("flat", a.pair.horizon, out);
    a.pair.record(&mut cfg)?;
    cfg.quadrature = (&quad).into();
    cfg.input("gamma", a.gamma)
        .input("x", a.x)
        .input("powers", &a.powers)
        .input("decades", a.decades)
        .input("min_decay", a.min_decay);
    cfg.grids.rays.insert(
        "flatness".into(),
        ultraflat::scalar::geometric_grid(FLAT_R_TOP * 10f64.powf(-a.decades), FLAT_R_TOP, FLAT_POINTS),
    );
    let bracket = pair_bracket(&pair)?;
    let params = choose_ramification(a.gamma, &bracket, 0.5 / a.x).map_err(|e| cite(pair.index_name(), e))?;
    let grid = SectorGrid { gamma: params.delta, r_lo: a.r_lo, r_hi: a.r_hi, radii: a.radii, args: a.args };
    cfg.grids.sectors.insert("sandwich".into(), grid.clone());
    let mut em = Emitter::new(cfg)?;
    let bracket = index_entry(&mut em, pair.index_name(), &bracket)?;
    let flat = match &pair {
        Pair::Sequences(m, n) => FlatFunction::from_sequences(m, n, params, quad)?,
        Pair::Weights(s, o) => FlatFunction::from_weights(s, o, params, quad)?,
    };
    let mut pass = true;
    let mut flatness = Vec::new();
    for &p in &a.powers {
        let rep = flatness_report(&flat, p, FLAT_R_TOP, a.decades, FLAT_POINTS, a.min_decay)?;
        println!("  flatness p = {p}: drop {} ({})", num(rep.decay), if rep.pass { "pass" } else { "fail" });
        pass &= rep.pass;
        let trace = em.pairs(&format!("flatness_p{p}"), ["r", "log_ratio"], &rep.trace)?;
        flatness.push(FlatnessEntry { p, decay: rep.decay, monotone_tail: rep.pass && rep.monotone_tail, pass: rep.pass, trace });
    }
    let spec = grid.spec()?;
    let (cal, held) = spec.split();
    let sandwich = flat_sandwich(&flat, &cal.points(), &held.points())?;
    for side in [&sandwich.lower, &sandwich.upper] {
        println!("  {}: {} held-out violations, {:?}", side.name, side.holdout_violations, side.constants);
    }
    pass &= sandwich.pass();
    let mut rows = Vec::new();
    for z in spec.points() {
        let lg = flat.log_value(z)?;
        rows.push(vec![num(z.norm()), num(z.arg()), num(lg.re), num(lg.im)]);
    }
    let samples = em.trace("samples", &["abs_xi", "arg_xi", "ln_abs_g", "arg_g"], rows)?;
    finish(&mut em, "flat", pass, &FlatResult { bracket, params, flatness, sandwich, samples })
}
