use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lacuna", version, about = "Certified multipliers, colorings and density bounds for lacunary sequences")]
pub struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a geometric lacunary sequence.
    Gen(GenArgs),
    /// Check a sequence and report its doubling span.
    Validate(SeqArgs),
    /// Evaluate the best multiplier of a truncation.
    FindTheta(FindThetaArgs),
    /// Run the survivor engine and emit a certificate.
    Survivor(SurvivorArgs),
    /// Nested middle-half construction for ratio above 4.
    Warmup(TruncatedSeq),
    /// Generate, run and certify in one go.
    Pipeline(PipelineArgs),
    /// Export a coloring of a window as CSV.
    Color(ColorArgs),
    /// Check a CSV coloring against a distance graph.
    VerifyColor(VerifyColorArgs),
    /// Exact chromatic number of a window of the distance graph.
    Chromatic(ChromaticArgs),
    /// Bracket the trigonometric-polynomial constant of a spectrum.
    Gamma(GammaArgs),
    /// Densest periodic set whose differences avoid a spectrum.
    Delta(DeltaArgs),
    /// Compare avoiding-set density with the gamma bracket.
    CheckRuzsa(RuzsaArgs),
    /// Compare Bohr-class density with the gamma bracket of a truncation.
    #[command(name = "corollary41")]
    Corollary(CorollaryArgs),
    /// Certified constants next to the reference formulas.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub start: u64,
}

/// Where a sequence comes from. Exactly one of `--input`, `--terms`, `--count`.
#[derive(Debug, Args)]
pub struct SeqArgs {
    /// JSON file `{"epsilon": "p/q" | null, "terms": [...]}`.
    #[arg(long, conflicts_with_all = ["terms", "count", "epsilon"])]
    pub input: Option<PathBuf>,
    /// Comma-separated terms.
    #[arg(long, conflicts_with = "count")]
    pub terms: Option<String>,
    /// Ratio margin to certify; with `--count`, the generator ratio.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Generate this many geometric terms from 1.
    #[arg(long, requires = "epsilon")]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TruncatedSeq {
    #[command(flatten)]
    pub seq: SeqArgs,
    /// Use only the first N terms.
    #[arg(long, short)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
#[group(id = "finder", required = true, multiple = false)]
pub struct Finder {
    /// Exhaustive search over all breakpoint candidates.
    #[arg(long)]
    pub exact: bool,
    /// Best point of the grid k/N.
    #[arg(long, value_name = "N")]
    pub grid: Option<u64>,
    /// Any registered strategy: exact, grid, survivor, warmup.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct FindThetaArgs {
    #[command(flatten)]
    pub seq: TruncatedSeq,
    #[command(flatten)]
    pub finder: Finder,
    /// Grid resolution used by `--method grid`.
    #[arg(long, default_value_t = 4096)]
    pub resolution: u64,
}

#[derive(Debug, Args)]
pub struct SurvivorArgs {
    #[command(flatten)]
    pub seq: TruncatedSeq,
    /// Override M (default: max(doubling span, 4)).
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub c0: Option<String>,
    #[arg(long)]
    pub c1: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub panes: usize,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub epsilon: String,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub panes: usize,
    /// Emit the run summary alongside the certificate.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args)]
pub struct ColorArgs {
    #[arg(long, requires = "delta", conflicts_with = "method")]
    pub theta: Option<String>,
    #[arg(long, requires = "theta")]
    pub delta: Option<String>,
    /// Registered coloring: bohr or quarters. Reads the sequence options.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub seq: SeqArgs,
    /// Closed window `a:b`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
}

/// The forbidden differences `S`. Exactly one of `--s`, `--s-file`.
#[derive(Debug, Args)]
#[group(id = "s_source", required = true, multiple = false)]
pub struct SetArgs {
    /// Comma-separated differences.
    #[arg(long)]
    pub s: Option<String>,
    /// JSON file: a list of integers or a sequence file.
    #[arg(long)]
    pub s_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyColorArgs {
    /// CSV with header `n,color` covering a contiguous window.
    #[arg(long)]
    pub coloring: PathBuf,
    #[command(flatten)]
    pub set: SetArgs,
}

#[derive(Debug, Args)]
pub struct ChromaticArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
}

#[derive(Debug, Args)]
#[group(id = "h_source", required = true, multiple = false)]
pub struct SpectrumArgs {
    /// Comma-separated frequencies.
    #[arg(long)]
    pub h: Option<String>,
    /// JSON file: a list of integers or a sequence file.
    #[arg(long)]
    pub h_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[arg(long)]
    pub period: usize,
}

#[derive(Debug, Args)]
pub struct RuzsaArgs {
    /// Single spectrum; without it the interval and random suites run.
    #[arg(long, conflicts_with_all = ["random", "seed"])]
    pub h: Option<String>,
    #[arg(long, default_value_t = 120)]
    pub period: usize,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    /// Random spectra drawn from {1..12}.
    #[arg(long, default_value_t = 100)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CorollaryArgs {
    #[command(flatten)]
    pub seq: TruncatedSeq,
    /// Default: 8 times the largest term.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value = "survivor")]
    pub method: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "1/8,1/16,1/32")]
    pub epsilons: String,
    #[arg(long, default_value_t = 60)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    pub format: ReportFormat,
}
