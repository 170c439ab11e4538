use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rise_core::cross_model::PortMode;
use rise_core::{NormPolicy, RotorBackend};

#[derive(Debug, Parser)]
#[command(name = "rise", version, about = "Rotor-invariant shift estimation on the embedding hypersphere")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Where to write the run manifest (default: `<out>.manifest.json`, or
    /// stderr when the command has no output file).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a planted synthetic pair corpus.
    Synth(SynthArgs),
    /// Draw a random prototype of fixed magnitude.
    RandomProto(RandomProtoArgs),
    /// Learn a prototype from a pair corpus.
    Learn(LearnArgs),
    /// Cross-language transfer matrix over a directory of corpora.
    EvalTransfer(EvalTransferArgs),
    /// Compare a prototype against magnitude-matched random prototypes.
    Baseline(BaselineArgs),
    /// Measure how the commutativity gap of two prototypes scales.
    Commute(CommuteArgs),
    /// Fit an anchor map between two embedding spaces and port a prototype.
    CrossModel(CrossModelArgs),
    /// Time the per-pair cycle across dimensions and fit the log-log slope.
    Bench(BenchArgs),
    /// Embed text pairs through an HTTP provider into a pair corpus.
    Embed(EmbedArgs),
}

/// Options shared by commands that consume randomness or rotors.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_backend)]
    pub backend: Option<RotorBackend>,
    /// Norm policy for loaded embeddings: strict or warn.
    #[arg(long, value_parser = parse_norm_policy)]
    pub norm_policy: Option<NormPolicy>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub pairs: usize,
    /// Planted shift magnitude in radians.
    #[arg(long)]
    pub magnitude: f64,
    /// Per-coordinate tangent noise.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value = "en")]
    pub language: String,
    #[arg(long)]
    pub phenomenon: Option<String>,
    /// Output corpus; a `.bin` extension selects the binary format.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the planted prototype.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RandomProtoArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub magnitude: f64,
    #[arg(long)]
    pub phenomenon: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub phenomenon: Option<String>,
    #[arg(long)]
    pub model_id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvalTransferArgs {
    /// Directory of `*.jsonl` / `*.bin` corpora, grouped by language tag.
    #[arg(long)]
    pub datasets: PathBuf,
    #[arg(long)]
    pub phenomenon: Option<String>,
    #[arg(long)]
    pub model_id: Option<String>,
    /// Training fraction per language.
    #[arg(long)]
    pub split: Option<f64>,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Held-out pairs to score on.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub proto: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    /// JSON report output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the report as a one-row CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CommuteArgs {
    #[arg(long)]
    pub proto_a: PathBuf,
    #[arg(long)]
    pub proto_b: PathBuf,
    /// Factors applied to both prototypes; at least three.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    pub scales: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CrossModelArgs {
    #[arg(long)]
    pub anchors_src: PathBuf,
    #[arg(long)]
    pub anchors_tgt: PathBuf,
    /// Prototype learned in the source space.
    #[arg(long)]
    pub proto: PathBuf,
    /// Target-space pairs for the native comparison.
    #[arg(long)]
    pub tgt_pairs: PathBuf,
    #[arg(long)]
    pub pca_rank: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, default_value = "tangent", value_parser = parse_port_mode)]
    pub mode: PortMode,
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub source_model: Option<String>,
    #[arg(long)]
    pub target_model: Option<String>,
    #[arg(long)]
    pub map_out: Option<PathBuf>,
    #[arg(long)]
    pub proto_out: Option<PathBuf>,
    /// JSON report output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096,16384")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 15)]
    pub reps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// JSONL of `{id, language, phenomenon, neutral_text, variant_text}`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model_id: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long)]
    pub token_env: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Skip the cache entirely.
    #[arg(long)]
    pub no_cache: bool,
}

fn parse_backend(s: &str) -> Result<RotorBackend, String> {
    match s.replace('-', "_").as_str() {
        "householder" => Ok(RotorBackend::Householder),
        "givens" => Ok(RotorBackend::Givens),
        "two_step" | "twostep" => Ok(RotorBackend::TwoStep),
        _ => Err(format!("unknown backend {s:?} (householder, givens, two_step)")),
    }
}

fn parse_norm_policy(s: &str) -> Result<NormPolicy, String> {
    match s {
        "strict" => Ok(NormPolicy::Strict),
        "warn" => Ok(NormPolicy::Warn),
        _ => Err(format!("unknown norm policy {s:?} (strict, warn)")),
    }
}

fn parse_port_mode(s: &str) -> Result<PortMode, String> {
    s.parse().map_err(|e: rise_core::Error| e.to_string())
}
