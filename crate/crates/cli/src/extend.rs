//! The `extend` and `verify` subcommands.

use crate::analysis::{index_entry, IndexEntry};
use crate::config::{RunConfig, SectorGrid, SCHEMA};
use crate::emit::{num, Emitter, Report};
use crate::source::Pair;
use crate::{ExtendArgs, Usage};
use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use ultraflat::extension::{
    envelope_log_base, envelope_rows, extend_sequences, extend_weights, slope_fits, BorelSeries, Evaluation,
    ExtensionConfig, KernelBoundCheck, MomentBounds, RemainderRow, SlopeFit,
};
use ultraflat::quadrature::QuadratureConfig;
use ultraflat::scalar::geometric_grid;
use ultraflat::extension::RamificationParams;

const REMAINDER: &str = "extend_remainder.json";
/// The fitted constant peaks sharply near |z| ≈ 20; sixteen radii per decade
/// keep the held-out maximum within the fit margin.
const KERNEL_GRID: SectorGrid = SectorGrid { gamma: 0.0, r_lo: 1e-3, r_hi: 1e3, radii: 97, args: 5 };
const KERNEL_POWERS: [usize; 4] = [0, 1, 2, 5];

/// Envelope rows recomputable from the stored samples.
#[derive(Serialize, Deserialize)]
pub struct RemainderResult {
    pub lambda: Vec<f64>,
    /// `(N, ln base)` of each envelope.
    pub bases: Vec<(usize, f64)>,
    pub rows: Vec<RemainderRow>,
    /// Diagnostic only; not part of the verdict.
    pub slopes: Vec<SlopeFit>,
    pub pass: bool,
}

#[derive(Serialize)]
struct SeriesSummary {
    terms: usize,
    norm: f64,
    radius: f64,
    r0: f64,
    coefficient_bound_ok: bool,
}

impl From<&BorelSeries> for SeriesSummary {
    fn from(s: &BorelSeries) -> Self {
        Self { terms: s.lambda.len(), norm: s.norm, radius: s.radius, r0: s.r0, coefficient_bound_ok: s.coefficient_bound_ok }
    }
}

#[derive(Serialize)]
struct ConstantsResult {
    bracket: IndexEntry,
    params: RamificationParams,
    moment_bounds: MomentBounds,
    series: SeriesSummary,
    geometric_ratio: f64,
    kernel: KernelBoundCheck,
}

const SAMPLE_HEADER: [&str; 8] = ["set", "abs_z", "arg_z", "z_re", "z_im", "re_f", "im_f", "error"];

fn sample_rows<'a>(set: &'a str, evs: &'a [Evaluation]) -> impl Iterator<Item = Vec<String>> + 'a {
    evs.iter().map(move |ev| {
        vec![
            set.to_string(),
            num(ev.z.norm()),
            num(ev.z.arg()),
            num(ev.z.re),
            num(ev.z.im),
            num(ev.value.re),
            num(ev.value.im),
            num(ev.error),
        ]
    })
}

pub fn run(a: ExtendArgs, out: PathBuf) -> Result<bool> {
    if a.verify_only {
        return verify_only(&out);
    }
    if let Some(&n) = a.orders.iter().find(|&&n| n > a.depth) {
        return Err(Usage(format!("remainder order {n} exceeds the moment depth {}", a.depth)).into());
    }
    let pair = a.pair.build()?;
    let lambda = a.lambda.build()?;
    let quadrature = QuadratureConfig::default().with_rel_tol(a.rel_tol);
    let ext = ExtensionConfig {
        gamma: a.gamma,
        h: a.h,
        x: a.x,
        moment_depth: a.depth,
        moment_fit_max: a.fit_max,
        moment_rel_tol: a.rel_tol,
        quadrature,
        s_override: a.s,
        delta_override: a.delta,
    };

    let mut cfg = RunConfig::new("extend", a.pair.horizon, out);
    a.pair.record(&mut cfg)?;
    cfg.quadrature = (&quadrature).into();
    cfg.input("lambda", &lambda)
        .input("gamma", a.gamma)
        .input("h", a.h)
        .input("x", a.x)
        .input("depth", a.depth)
        .input("fit_max", a.fit_max)
        .input("s", a.s)
        .input("delta", a.delta)
        .input("orders", &a.orders)
        .input("kernel_powers", KERNEL_POWERS);
    let remainder_grid = SectorGrid { gamma: a.gamma, r_lo: a.r_lo, r_hi: a.r_hi, radii: a.radii, args: a.args };
    let kernel_grid = SectorGrid { gamma: a.gamma, ..KERNEL_GRID };
    let ray = geometric_grid(1e-3, 0.3, 16);
    cfg.grids.sectors.insert("remainder".into(), remainder_grid.clone());
    cfg.grids.sectors.insert("kernel".into(), kernel_grid.clone());
    cfg.grids.rays.insert("slope".into(), ray.clone());
    let mut em = Emitter::new(cfg)?;

    let result = match &pair {
        Pair::Sequences(m, n) => extend_sequences(m, n, &lambda, &ext)?,
        Pair::Weights(s, o) => extend_weights(s, o, &lambda, &ext)?,
    };
    let top = a.orders.iter().copied().max().unwrap_or(0);
    if top > result.output_row.horizon() {
        return Err(Usage(format!("remainder order {top} exceeds the output row horizon")).into());
    }
    let p = &result.params;
    println!("{} in [{}, {}]: s = {}, δ = {}", pair.index_name(), num(result.bracket.lo), num(result.bracket.hi), num(p.s), num(p.delta));

    let (cal, held) = remainder_grid.spec()?.split();
    let eval_all = |zs: Vec<Complex64>| zs.into_iter().map(|z| result.eval(z)).collect::<ultraflat::Result<Vec<_>>>();
    let cal = eval_all(cal.points())?;
    let held = eval_all(held.points())?;
    let on_ray = eval_all(ray.iter().map(|&r| Complex64::new(r, 0.0)).collect())?;

    let bases: Vec<(usize, f64)> = a.orders.iter().map(|&n| (n, envelope_log_base(&result, n))).collect();
    let rows = envelope_rows(&lambda, &bases, &cal, &held);
    let slopes = slope_fits(&lambda, &a.orders, &on_ray);
    for r in &rows {
        println!("  remainder N = {:<3} κ = {:<24} held-out violations {}", r.n, num(r.kappa), r.violations);
    }
    for s in &slopes {
        println!("  slope N = {:<3} {} from {} points", s.n, num(s.slope), s.points_used);
    }
    let envelope_pass = !rows.is_empty() && rows.iter().all(|r| r.pass);

    let (kcal, kheld) = kernel_grid.spec()?.split();
    let kernel = result.kernel_bound(&kcal.points(), &kheld.points(), &KERNEL_POWERS)?;
    println!("  kernel bound {}", if kernel.pass() { "pass" } else { "fail" });
    println!("  moment bounds {}", if result.bounds.pass() { "pass" } else { "fail" });

    em.trace(
        "samples",
        &SAMPLE_HEADER,
        sample_rows("calibration", &cal).chain(sample_rows("holdout", &held)).chain(sample_rows("ray", &on_ray)),
    )?;
    let remainder = RemainderResult { lambda: lambda.clone(), bases, rows, slopes, pass: envelope_pass };
    em.report("extend_remainder", envelope_pass, &remainder)?;

    let constants_pass = result.series.coefficient_bound_ok && result.bounds.pass() && kernel.pass();
    let constants = ConstantsResult {
        bracket: index_entry(&mut em, "bracket", &result.bracket)?,
        params: result.params,
        moment_bounds: result.bounds.clone(),
        series: (&result.series).into(),
        geometric_ratio: result.geometric_ratio(),
        kernel,
    };
    em.report("extend_constants", constants_pass, &constants)?;
    let pass = envelope_pass && constants_pass;
    println!("{} {}", if pass { "PASS" } else { "FAIL" }, em.dir().display());
    Ok(pass)
}

fn read_report<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Report<R>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Deserialize)]
struct SampleRecord {
    set: String,
    z_re: f64,
    z_im: f64,
    re_f: f64,
    im_f: f64,
    error: f64,
}

/// Recomputes the envelope rows from the stored samples and compares them
/// with the stored rows.
fn verify_only(dir: &Path) -> Result<bool> {
    let path = dir.join(REMAINDER);
    let report: Report<RemainderResult> = read_report(&path)?;
    let samples = report
        .traces
        .iter()
        .find(|t| t.ends_with("_samples.csv"))
        .ok_or_else(|| Usage(format!("{} lists no samples trace", path.display())))?;
    let mut reader = csv::Reader::from_path(dir.join(samples)).with_context(|| format!("reading {samples}"))?;
    let (mut cal, mut held) = (Vec::new(), Vec::new());
    for rec in reader.deserialize::<SampleRecord>() {
        let rec = rec?;
        let ev = Evaluation { z: Complex64::new(rec.z_re, rec.z_im), value: Complex64::new(rec.re_f, rec.im_f), error: rec.error };
        match rec.set.as_str() {
            "calibration" => cal.push(ev),
            "holdout" => held.push(ev),
            _ => {}
        }
    }
    let stored = &report.result;
    let rows = envelope_rows(&stored.lambda, &stored.bases, &cal, &held);
    let identical = rows == stored.rows;
    let pass = !rows.is_empty() && rows.iter().all(|r| r.pass);
    let hash_ok = report.config.hash() == report.config_hash;
    println!(
        "verify-only: {} envelope rows {}, verdict {}, config hash {}",
        rows.len(),
        if identical { "identical" } else { "differ" },
        if pass { "pass" } else { "fail" },
        if hash_ok { "ok" } else { "mismatch" }
    );
    Ok(identical && hash_ok && pass == stored.pass && pass == report.pass && pass)
}

/// Checks every report in `dir`: schema, config hash and listed traces.
pub fn verify(dir: PathBuf) -> Result<bool> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".sequence.json")
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Usage(format!("no reports in {}", dir.display())).into());
    }
    let mut all = true;
    for path in &paths {
        let report: Report<serde_json::Value> = read_report(path)?;
        let mut problems = Vec::new();
        if report.schema != SCHEMA {
            problems.push(format!("schema {}", report.schema));
        }
        if report.config.hash() != report.config_hash {
            problems.push("config hash mismatch".to_string());
        }
        for t in &report.traces {
            if !dir.join(t).is_file() {
                problems.push(format!("missing trace {t}"));
            }
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if problems.is_empty() {
            println!("ok   {name} ({}, pass = {})", report.command, report.pass);
        } else {
            println!("bad  {name}: {}", problems.join("; "));
            all = false;
        }
    }
    if dir.join(REMAINDER).is_file() {
        all &= verify_only(&dir)?;
    }
    Ok(all)
}
