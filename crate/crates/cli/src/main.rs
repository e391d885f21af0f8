//! `ultraflat`: property reports, growth indices and verified extension
//! operators from the command line.
//!
//! Every subcommand writes a JSON report (`"schema": "v1"`, with the hash of
//! its run configuration) plus CSV traces into the output directory:
//! `--out`, else `$ULTRAFLAT_OUT`, else `./ultraflat-out`.
//!
//! Exit codes: 0 pass, 1 usage, 2 precondition, 3 numeric failure.

mod analysis;
mod config;
mod emit;
mod extend;
mod source;

use clap::{Args, Parser, Subcommand, ValueEnum};
use source::{LambdaSpec, Pair, SequenceSpec, WeightSpec};
use std::path::PathBuf;
use std::process::ExitCode;

/// Malformed arguments or input files.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser, Debug)]
#[command(name = "ultraflat", version, about = "Weight sequences, growth indices and extension operators on sectors")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Property diagnostics for one weight sequence.
    Sequence(SequenceArgs),
    /// Weight-function conditions (ω_1)–(ω_6), (nq_r) and strong nonquasianalyticity.
    Weight(WeightArgs),
    /// Growth-index brackets for one sequence or a pair.
    Indices(IndicesArgs),
    /// The descendant S^{N,r} and L^{N,r} = (S^{N,r})^r.
    Descendant(DescendantArgs),
    /// Generate a block-structured example with its verification report.
    Example(ExampleArgs),
    /// Flatness and two-sided bounds of the flat function of a pair.
    Flat(FlatArgs),
    /// Build the extension operator, evaluate it and verify its bounds.
    Extend(ExtendArgs),
    /// Check reports against their embedded config hashes and rerun stored assertions.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ExampleKind {
    RecursiveBlock,
    FactorialBlock,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Mg,
    NoMg,
}

impl From<VariantArg> for ultraflat::constructions::Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Mg => Self::Mg,
            VariantArg::NoMg => Self::NoMg,
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Gevrey sequence p!^R.
    #[arg(long, value_name = "R")]
    gevrey: Option<f64>,
    /// Built-in example sequence.
    #[arg(long, value_enum)]
    example: Option<ExampleKind>,
    /// Sequence descriptor JSON ({"label", "horizon", "log_quotients"}).
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SequenceSource {
    #[command(flatten)]
    source: SourceArgs,
    /// Exponent of the recursive example.
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value = "mg")]
    variant: VariantArg,
    #[arg(long, default_value_t = 1024)]
    horizon: usize,
}

impl SequenceSource {
    pub fn spec(&self) -> SequenceSpec {
        let s = &self.source;
        if let Some(r) = s.gevrey {
            SequenceSpec::Gevrey(r)
        } else if let Some(path) = &s.file {
            SequenceSpec::File(path.clone())
        } else {
            match s.example {
                Some(ExampleKind::FactorialBlock) => SequenceSpec::FactorialBlock,
                _ => SequenceSpec::RecursiveBlock { gamma: self.gamma, variant: self.variant.into() },
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct SequenceArgs {
    #[command(flatten)]
    input: SequenceSource,
    /// Level r of (nq_r) and (γ_r).
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Q of (β_1) and (β_3).
    #[arg(long, default_value_t = 2)]
    q: usize,
}

#[derive(Args, Debug)]
pub struct WeightArgs {
    /// power:S (t^{1/S}), log-power:S, file:PATH, or a sequence spec for its associated function.
    #[arg(value_name = "SPEC")]
    weight: WeightSpec,
    #[arg(long, default_value_t = 1024)]
    horizon: usize,
    /// Level r of (nq_r).
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args, Debug)]
pub struct IndicesArgs {
    /// gevrey:R, recursive-block:GAMMA[:mg|no-mg], factorial-block or file:PATH.
    #[arg(long, value_name = "SPEC")]
    m: SequenceSpec,
    #[arg(long, value_name = "SPEC")]
    n: Option<SequenceSpec>,
    /// Also estimate γ(ω_M, ω_N) at the weight level.
    #[arg(long, requires = "n")]
    cross_level: bool,
    #[arg(long, default_value_t = 1024)]
    horizon: usize,
}

#[derive(Args, Debug)]
pub struct DescendantArgs {
    #[command(flatten)]
    input: SequenceSource,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Also run the moderate-growth criterion for the descendant at r = 1.
    #[arg(long)]
    mg_check: bool,
}

#[derive(Args, Debug)]
pub struct ExampleArgs {
    #[command(subcommand)]
    kind: ExampleCommand,
}

#[derive(Subcommand, Debug)]
pub enum ExampleCommand {
    /// Recursive block example with exponent γ.
    RecursiveBlock {
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "mg")]
        variant: VariantArg,
        #[arg(long, default_value_t = 4096)]
        horizon: usize,
    },
    /// ν_k = 2^p p! p on p! ≤ k < (p+1)!.
    FactorialBlock {
        #[arg(long, default_value_t = 40319)]
        horizon: usize,
    },
    /// Pair (M, N) of recursive examples with exponents γ' < γ.
    MixedPair {
        #[arg(long, default_value_t = 1.2)]
        gamma_prime: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "mg")]
        variant: VariantArg,
        #[arg(long, default_value_t = 2048)]
        horizon: usize,
    },
}

#[derive(Args, Debug)]
pub struct PairArgs {
    /// Coefficient sequence M (defaults to gevrey:1 with --n gevrey:2).
    #[arg(long, value_name = "SPEC", conflicts_with_all = ["sigma", "omega", "pair"])]
    m: Option<SequenceSpec>,
    #[arg(long, value_name = "SPEC", requires = "m")]
    n: Option<SequenceSpec>,
    /// Weight σ of the coefficient class.
    #[arg(long, value_name = "SPEC", requires = "omega", conflicts_with = "pair")]
    sigma: Option<WeightSpec>,
    #[arg(long, value_name = "SPEC", requires = "sigma")]
    omega: Option<WeightSpec>,
    /// Pair descriptor JSON: {"m", "n"} sequence descriptors or {"sigma", "omega"} weight descriptors.
    #[arg(long, value_name = "PATH")]
    pair: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    horizon: usize,
}

impl PairArgs {
    fn record(&self, cfg: &mut config::RunConfig) -> anyhow::Result<()> {
        let files: Vec<PathBuf> = if let Some(p) = &self.pair {
            cfg.input("pair", p.display().to_string());
            vec![p.clone()]
        } else if let (Some(s), Some(o)) = (&self.sigma, &self.omega) {
            cfg.input("sigma", s.to_string()).input("omega", o.to_string());
            [s.file(), o.file()].into_iter().flatten().map(PathBuf::from).collect()
        } else {
            let (m, n) = self.sequence_specs()?;
            cfg.input("m", m.to_string()).input("n", n.to_string());
            [m.file(), n.file()].into_iter().flatten().map(PathBuf::from).collect()
        };
        for (i, f) in files.iter().enumerate() {
            cfg.input(&format!("file_sha256_{i}"), source::file_digest(f)?);
        }
        Ok(())
    }

    fn sequence_specs(&self) -> anyhow::Result<(SequenceSpec, SequenceSpec)> {
        match (&self.m, &self.n) {
            (Some(m), Some(n)) => Ok((m.clone(), n.clone())),
            (None, None) => Ok((SequenceSpec::Gevrey(1.0), SequenceSpec::Gevrey(2.0))),
            _ => Err(Usage("--m and --n go together".into()).into()),
        }
    }

    fn build(&self) -> anyhow::Result<Pair> {
        if let Some(p) = &self.pair {
            return Pair::from_file(p, self.horizon);
        }
        if let (Some(s), Some(o)) = (&self.sigma, &self.omega) {
            return Ok(Pair::Weights(s.build(self.horizon)?, o.build(self.horizon)?));
        }
        let (m, n) = self.sequence_specs()?;
        Pair::sequences(m.build(self.horizon)?, n.build(self.horizon)?, self.horizon)
    }
}

#[derive(Args, Debug)]
pub struct FlatArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Opening of the target sector S_γ.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Matrix row; the flat function uses a = 1/(2x).
    #[arg(long, default_value_t = 0.125)]
    x: f64,
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
    /// Powers p for the flatness check |G(ξ)|/|ξ|^p → 0.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5")]
    powers: Vec<usize>,
    #[arg(long, default_value_t = 4.0)]
    decades: f64,
    #[arg(long, default_value_t = 20.0)]
    min_decay: f64,
    #[arg(long, default_value_t = 1e-4)]
    r_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    r_hi: f64,
    #[arg(long, default_value_t = 30)]
    radii: usize,
    #[arg(long, default_value_t = 5)]
    args: usize,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// unit (λ = (1, 0, …)), ones:N, factorial:N, file:PATH or a JSON list.
    #[arg(long, default_value = "unit")]
    lambda: LambdaSpec,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 0.125)]
    x: f64,
    /// Depth of the moment table.
    #[arg(long, default_value_t = 40)]
    depth: usize,
    /// Largest p used to fit the moment envelopes.
    #[arg(long, default_value_t = 20)]
    fit_max: usize,
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
    /// Override the ramification exponent s.
    #[arg(long)]
    s: Option<f64>,
    /// Override the intermediate opening δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Remainder orders N checked against their envelopes.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    orders: Vec<usize>,
    #[arg(long, default_value_t = 1e-3)]
    r_lo: f64,
    #[arg(long, default_value_t = 0.1)]
    r_hi: f64,
    #[arg(long, default_value_t = 8)]
    radii: usize,
    #[arg(long, default_value_t = 3)]
    args: usize,
    /// Rerun the envelope assertions on the samples stored in the output directory.
    #[arg(long)]
    verify_only: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Directory holding the reports (defaults to the output directory).
    dir: Option<PathBuf>,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ULTRAFLAT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ultraflat-out"))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() || cause.is::<serde_json::Error>() || cause.is::<std::io::Error>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<ultraflat::Error>() {
            return match e {
                ultraflat::Error::InvalidInput(_) => 1,
                ultraflat::Error::Precondition(_) => 2,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = out_dir(cli.out);
    let result = match cli.command {
        Command::Sequence(a) => analysis::sequence(a, out),
        Command::Weight(a) => analysis::weight(a, out),
        Command::Indices(a) => analysis::indices(a, out),
        Command::Descendant(a) => analysis::descendant(a, out),
        Command::Example(a) => analysis::example(a, out),
        Command::Flat(a) => analysis::flat(a, out),
        Command::Extend(a) => extend::run(a, out),
        Command::Verify(a) => extend::verify(a.dir.unwrap_or(out)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
