//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use addvar_core::sample::DEFAULT_SEED;

#[derive(Parser, Debug, Serialize)]
#[command(name = "addvar", version, about = "Variational structure, integrable family and continuum limits of additive fourth-order difference equations")]
pub struct Cli {
    /// Seed for every randomized check (sampled certificates, random points).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Print the JSON report on a single line.
    #[arg(long, global = true)]
    pub compact: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Decide whether an additive equation is variational and build its Lagrangian.
    Test(EquationInput),
    /// Euler-Lagrange equation of a discrete Lagrangian L(x[0], x[1], x[2]).
    El(ElArgs),
    /// Build the integrable family and its two invariants.
    Family(FamilyArgs),
    /// Reduce a numeric member of the family to its canonical form.
    Classify(ClassifyArgs),
    /// Poisson bracket table of a canonical form.
    Poisson(CaseArgs),
    /// Certify that the two invariants of a canonical form commute.
    Involution(CertArgs),
    /// Iterate a canonical form; writes an orbit CSV.
    Iterate(IterateArgs),
    /// Phase-space volume along an orbit against the λ^(2n) law.
    Volume(IterateArgs),
    /// Continuum limit of a canonical form along a ladder of step sizes.
    Contlim(ContlimArgs),
    /// Full Liouville certificate of a canonical form.
    Certify(CertArgs),
    /// (n, x_n, x_(n+1)) samples for time series and phase portraits.
    PlotData(IterateArgs),
}

/// One equation, from exactly one source.
#[derive(Args, Debug, Serialize, Default, Clone)]
pub struct EquationInput {
    /// f in x[2] = f·x[-2] + h (use with --h).
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// h in x[2] = f·x[-2] + h (use with --f).
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    /// A in A·x[2] + B·x[-2] + C = 0 (use with --b and --c).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// B in A·x[2] + B·x[-2] + C = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// C in A·x[2] + B·x[-2] + C = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// The equation E = 0, given by E.
    #[arg(long, allow_hyphen_values = true)]
    pub equation: Option<String>,
    /// JSON file with keys {f, h} or {a, b, c} or {equation}, and optionally params.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated parameter names; when absent any identifier is a parameter.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<String>>,
}

#[derive(Args, Debug, Serialize)]
pub struct ElArgs {
    /// Lagrangian in x[0], x[1], x[2]; log, arctan and arctanh are allowed.
    #[arg(long, allow_hyphen_values = true)]
    pub lagrangian: String,
    /// Multiplier λ of the weight λ^(-n).
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub lambda: String,
    /// Comma-separated parameter names; when absent any identifier is a parameter.
    #[arg(long, value_delimiter = ',')]
    pub params: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    None,
    Auto,
    Symbolic,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
pub struct FamilyArgs {
    /// A1,A2,A3,A5,A6,A7,A8 as rationals; symbolic when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Option<Vec<String>>,
    /// Certify invariance of I and J.
    #[arg(long, value_enum, default_value_t = CheckKind::None)]
    pub check: CheckKind,
    /// Points for sampled certificates.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// A1,A2,A3,A5,A6,A7,A8 as rationals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub params: Vec<String>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct CaseArgs {
    /// Canonical form 1..5.
    #[arg(long)]
    pub case: u8,
    /// α; symbolic when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// β; symbolic when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// γ; symbolic when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct CertArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// Expand every identity exactly.
    #[arg(long, conflicts_with = "sampled")]
    pub symbolic: bool,
    /// Evaluate identities at random rational points.
    #[arg(long)]
    pub sampled: bool,
    /// Points for sampled certificates.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct IterateArgs {
    /// Canonical form 1..5.
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    /// α as a rational.
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub alpha: String,
    /// β as a rational.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: String,
    /// γ as a rational.
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub gamma: String,
    /// λ ≠ 1 iterates the Euler-Lagrange equation of λ^(-n)·L.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub lambda: String,
    /// Number of steps.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Initial window x1,x0,xm1,xm2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.01,0.01,0.01,0.01")]
    pub init: Vec<String>,
    /// Exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    /// Iterate the inverse map.
    #[arg(long)]
    pub backward: bool,
    /// CSV output path; CSV goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ContlimArgs {
    /// Canonical form 1..5.
    #[arg(long)]
    pub case: u8,
    /// Number of step sizes h = 2^-k/10.
    #[arg(long, default_value_t = 5)]
    pub ladder: usize,
    /// Sampling time of the test function sin t.
    #[arg(long, default_value_t = addvar_core::contlim::STANDARD_T)]
    pub t: f64,
    /// r1,r2,r3 as rationals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,1,1")]
    pub r: Vec<String>,
    /// Also fit the collapse of the invariants onto K1 at h = 1/1000.
    #[arg(long)]
    pub collapse: bool,
}
